"""Sampling protocols and estimators.

Calibration: prepare |0...0>, draw a random mask t, flip those qubits,
read out through the noisy channel, XOR the observed string with t, and
record the result.  The records are then samples of the twirled row
Rbar(. | 0), and ghat(w) is their empirical (-1)^(w.s) average.

Tomography: per shot, draw a uniform setting from S^n, rotate each qubit
into its measurement basis, and push the ideal outcome through the same
XOR-twirl sandwich before recording (setting, outcome).

Datasets are stored as (M, n) uint8 bit arrays (column i = qubit i) for
vectorized estimation; record accessors return the usual value types.
All functions draw from a caller-supplied seed through a fresh numpy
Generator, with the draw order documented per function, so datasets are
reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bitspace import BitString
from .exceptions import SingularNoiseError, UnmitigatableComponentError
from .noise import NoiseModel
from .qsim import (
    Correlator,
    Direction,
    MeasurementSetting,
    StateVector,
    apply_single_qubit,
    pauli_directions,
    rotation_gate,
)
from .shadows import G_FLOOR, XiTable

DEFAULT_BOOTSTRAP_RESAMPLES = 200


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Collapse an (..., n) bit array to integer values (column 0 = LSB)."""
    bits = np.asarray(bits)
    weights = 1 << np.arange(bits.shape[-1], dtype=np.int64)
    return bits.astype(np.int64) @ weights


def unpack_bits(values: np.ndarray, n: int) -> np.ndarray:
    """Expand integer values to an (..., n) uint8 bit array (column 0 = LSB)."""
    values = np.asarray(values, dtype=np.int64)
    return ((values[..., None] >> np.arange(n)) & 1).astype(np.uint8)


@dataclass(frozen=True)
class CalibrationDataset:
    """Twirl-corrected calibration bitstrings as an (M, n) uint8 array."""

    n: int
    outcomes: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        outcomes = np.asarray(self.outcomes, dtype=np.uint8)
        if outcomes.ndim != 2 or outcomes.shape[1] != self.n:
            raise ValueError(f"expected an (M, {self.n}) bit array, got {outcomes.shape}")
        object.__setattr__(self, "outcomes", outcomes)

    def __len__(self) -> int:
        return self.outcomes.shape[0]

    def record(self, i: int) -> BitString:
        return BitString(self.n, int(pack_bits(self.outcomes[i])))


@dataclass(frozen=True)
class TomographyDataset:
    """Generalised outcomes (setting, bitstring) in columnar uint8 form."""

    n: int
    directions: tuple[Direction, ...]
    setting_indices: np.ndarray
    outcomes: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        settings = np.asarray(self.setting_indices, dtype=np.uint8)
        outcomes = np.asarray(self.outcomes, dtype=np.uint8)
        if settings.ndim != 2 or settings.shape[1] != self.n:
            raise ValueError(f"expected an (M, {self.n}) setting array, got {settings.shape}")
        if outcomes.shape != settings.shape:
            raise ValueError(
                f"outcome shape {outcomes.shape} does not match settings {settings.shape}"
            )
        if settings.size and settings.max() >= len(self.directions):
            raise ValueError("setting index outside the direction set")
        object.__setattr__(self, "setting_indices", settings)
        object.__setattr__(self, "outcomes", outcomes)

    def __len__(self) -> int:
        return self.setting_indices.shape[0]

    def record(self, i: int) -> tuple[MeasurementSetting, BitString]:
        setting = MeasurementSetting(
            tuple(self.directions[j] for j in self.setting_indices[i])
        )
        return setting, BitString(self.n, int(pack_bits(self.outcomes[i])))


@dataclass(frozen=True)
class EstimateReport:
    """A point estimate with its bootstrap standard error."""

    estimate: float
    stderr: float
    resamples: int
    samples: int

    def __post_init__(self) -> None:
        if self.stderr < 0.0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")


def run_calibration(model: NoiseModel, shots: int, seed: int) -> CalibrationDataset:
    """Collect twirled calibration records from the all-zeros state.

    Per shot: draw t uniformly; the ideal readout is t itself (the flip
    layer maps |0...0> to |t>); sample the noisy readout; XOR with t.
    Draw order: the full (shots, n) t matrix, then the channel's samples.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(seed)
    t = rng.integers(0, 2, size=(shots, model.n), dtype=np.uint8)
    observed = model.sample_bits(t, rng)
    return CalibrationDataset(model.n, observed ^ t, seed=seed)


def estimate_g(data: CalibrationDataset, w: BitString) -> float:
    """Empirical Fourier component ghat(w) = mean of (-1)^(w.s) over records."""
    if w.n != data.n:
        raise ValueError(f"pattern has {w.n} bits, dataset has {data.n}")
    if len(data) == 0:
        raise ValueError("empty calibration dataset")
    support = list(w.support())
    parity = np.bitwise_xor.reduce(data.outcomes[:, support], axis=1) if support else None
    if parity is None:
        return 1.0
    return float(np.mean(1.0 - 2.0 * parity.astype(np.float64)))


def run_tomography(
    state: StateVector,
    directions: tuple[Direction, ...] | list[Direction],
    model: NoiseModel,
    shots: int,
    seed: int,
) -> TomographyDataset:
    """Collect X-twirled tomography records for a fixed state.

    Per shot: draw a uniform setting over the direction set, rotate, draw
    the ideal outcome from the Born distribution, flip by a fresh mask t,
    push through the noisy channel, unflip, and record (setting, outcome).

    Draw order: the (shots, n) setting matrix, then one uniform variate
    per shot for the Born draw, then the (shots, n) t matrix, then the
    channel's samples.  Shots sharing a setting share one rotated
    probability table.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    directions = tuple(directions)
    if not directions:
        raise ValueError("direction set is empty")
    if len({d.label for d in directions}) != len(directions):
        raise ValueError("direction labels must be unique")
    if model.n != state.n:
        raise ValueError(f"noise model is on {model.n} qubits, state on {state.n}")
    n, k = state.n, len(directions)
    rng = np.random.default_rng(seed)
    settings = rng.integers(0, k, size=(shots, n), dtype=np.uint8)
    born = rng.random(shots)
    masks = rng.integers(0, 2, size=(shots, n), dtype=np.uint8)

    gates = [rotation_gate(d) for d in directions]
    keys = settings.astype(np.int64) @ (k ** np.arange(n, dtype=np.int64))
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    block_starts = np.flatnonzero(np.r_[True, np.diff(sorted_keys) != 0])
    block_bounds = np.r_[block_starts, shots]

    ideal_values = np.empty(shots, dtype=np.int64)
    for a, b in zip(block_bounds[:-1], block_bounds[1:]):
        rows = order[a:b]
        digits = settings[rows[0]]
        amps = state.amplitudes
        for qubit in range(n):
            amps = apply_single_qubit(amps, gates[digits[qubit]], qubit, n)
        cdf = np.cumsum(np.abs(amps) ** 2)
        cdf /= cdf[-1]
        draws = np.searchsorted(cdf, born[rows], side="right")
        ideal_values[rows] = np.minimum(draws, (1 << n) - 1)

    pre_noise = unpack_bits(ideal_values, n) ^ masks
    observed = model.sample_bits(pre_noise, rng)
    return TomographyDataset(n, directions, settings, observed ^ masks, seed=seed)


def _support_shades(data: TomographyDataset, correlator: Correlator, xi: XiTable) -> np.ndarray:
    """Per-record unmitigated shade (-1)^(v.s) prod_i overlap(nu_i, mu_i)."""
    if correlator.n != data.n:
        raise ValueError(f"correlator is on {correlator.n} qubits, dataset on {data.n}")
    if len(data) == 0:
        raise ValueError("empty tomography dataset")
    values = np.ones(len(data))
    parity = np.zeros(len(data), dtype=np.uint8)
    for qubit in correlator.pattern.support():
        overlaps = np.array(
            [xi.half_overlap(d.label, correlator.observables[qubit]) for d in data.directions]
        )
        values *= overlaps[data.setting_indices[:, qubit]]
        parity ^= data.outcomes[:, qubit]
    return values * (1.0 - 2.0 * parity.astype(np.float64))


def _bootstrap_stderr(
    shades: np.ndarray, resamples: int, rng: np.random.Generator
) -> float:
    if resamples < 2:
        raise ValueError(f"need >= 2 bootstrap resamples, got {resamples}")
    size = shades.size
    means = np.empty(resamples)
    for b in range(resamples):
        means[b] = shades[rng.integers(0, size, size)].mean()
    return float(np.std(means, ddof=1))


def estimate_correlator_mitigated(
    data: TomographyDataset,
    cal: CalibrationDataset,
    correlator: Correlator,
    xi: XiTable,
    *,
    g_floor: float = G_FLOOR,
    g_override: float | None = None,
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    bootstrap_seed: int = 0,
    joint_bootstrap: bool = False,
) -> EstimateReport:
    """Readout-mitigated correlator estimate.

    Averages the mitigated shade over records, dividing by ghat(v) taken
    from the calibration dataset (used as-is even when negative; only the
    absolute floor trips an error).  The default stderr treats ghat(v) as
    fixed; joint_bootstrap=True resamples both datasets per bootstrap
    replicate, which folds the calibration uncertainty into the stderr.
    g_override substitutes a known exact component for ghat(v).
    """
    if cal.n != data.n:
        raise ValueError(f"calibration is on {cal.n} qubits, tomography on {data.n}")
    if g_override is None:
        g_hat = estimate_g(cal, correlator.pattern)
    else:
        g_hat = float(g_override)
    if abs(g_hat) < g_floor:
        raise UnmitigatableComponentError(
            f"|ghat(v)| = {abs(g_hat)} below floor {g_floor} for v={correlator.pattern}"
        )
    raw = _support_shades(data, correlator, xi)
    shades = raw / g_hat
    rng = np.random.default_rng(bootstrap_seed)
    if not joint_bootstrap:
        stderr = _bootstrap_stderr(shades, bootstrap_resamples, rng)
    else:
        support = list(correlator.pattern.support())
        if support:
            cal_parity = np.bitwise_xor.reduce(cal.outcomes[:, support], axis=1)
            cal_signs = 1.0 - 2.0 * cal_parity.astype(np.float64)
        else:
            cal_signs = np.ones(len(cal))
        if bootstrap_resamples < 2:
            raise ValueError(f"need >= 2 bootstrap resamples, got {bootstrap_resamples}")
        means = np.empty(bootstrap_resamples)
        for b in range(bootstrap_resamples):
            g_b = cal_signs[rng.integers(0, cal_signs.size, cal_signs.size)].mean()
            if abs(g_b) < g_floor:
                raise UnmitigatableComponentError(
                    f"a bootstrap replicate of ghat(v) hit the floor {g_floor}"
                )
            means[b] = raw[rng.integers(0, raw.size, raw.size)].mean() / g_b
        stderr = float(np.std(means, ddof=1))
    return EstimateReport(float(shades.mean()), stderr, bootstrap_resamples, len(data))


def estimate_correlator_unmitigated(
    data: TomographyDataset,
    correlator: Correlator,
    xi: XiTable,
    *,
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    bootstrap_seed: int = 0,
) -> EstimateReport:
    """Plain shade average with no noise correction (the biased baseline)."""
    shades = _support_shades(data, correlator, xi)
    rng = np.random.default_rng(bootstrap_seed)
    stderr = _bootstrap_stderr(shades, bootstrap_resamples, rng)
    return EstimateReport(float(shades.mean()), stderr, bootstrap_resamples, len(data))


def estimate_correlator_independent_model(
    data: TomographyDataset,
    correlator: Correlator,
    xi: XiTable,
    p10,
    p01,
    *,
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    bootstrap_seed: int = 0,
) -> EstimateReport:
    """Correlator estimate assuming independent per-qubit readout flips.

    Each support qubit's pair of outcome weights (+overlap, -overlap) is
    corrected by the inverse of that qubit's assumed 2x2 transition
    matrix.  Because the recorded data went through the XOR-twirl, the
    assumed matrix is twirled first (its two flip rates average), which
    keeps the method exact when the true noise is an independent-flip
    channel with the assumed rates.  Crosstalk in the true channel leaves
    residual bias, which is the point of carrying this estimator.
    """
    if correlator.n != data.n:
        raise ValueError(f"correlator is on {correlator.n} qubits, dataset on {data.n}")
    if len(data) == 0:
        raise ValueError("empty tomography dataset")
    p10 = np.broadcast_to(np.asarray(p10, dtype=float), (data.n,))
    p01 = np.broadcast_to(np.asarray(p01, dtype=float), (data.n,))
    values = np.ones(len(data))
    for qubit in correlator.pattern.support():
        p_twirled = 0.5 * (p10[qubit] + p01[qubit])
        matrix = np.array(
            [[1.0 - p_twirled, p_twirled], [p_twirled, 1.0 - p_twirled]]
        )
        if abs(np.linalg.det(matrix)) < 1e-12:
            raise SingularNoiseError(
                f"assumed transition matrix of qubit {qubit} is singular"
            )
        inverse = np.linalg.inv(matrix)
        overlaps = np.array(
            [xi.half_overlap(d.label, correlator.observables[qubit]) for d in data.directions]
        )
        # weight pair per direction: corrected[s] = (M^-1 @ (ov, -ov))[s]
        corrected = np.stack([inverse @ np.array([ov, -ov]) for ov in overlaps])
        bit = data.outcomes[:, qubit]
        values *= corrected[data.setting_indices[:, qubit], bit]
    rng = np.random.default_rng(bootstrap_seed)
    stderr = _bootstrap_stderr(values, bootstrap_resamples, rng)
    return EstimateReport(float(values.mean()), stderr, bootstrap_resamples, len(data))


def median_of_means(values, groups: int) -> float:
    """Median of the means of `groups` contiguous blocks; groups=1 is the mean."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a nonempty 1-d array")
    if not 1 <= groups <= values.size:
        raise ValueError(f"groups must lie in [1, {values.size}], got {groups}")
    return float(np.median([block.mean() for block in np.array_split(values, groups)]))


def _check_bound_args(epsilon: float, delta: float, g: float) -> None:
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if g == 0.0:
        raise ValueError("g must be nonzero")


def calibration_sample_bound(epsilon: float, delta: float, g: float = 1.0) -> int:
    """Smallest integer shot count exceeding -32 ln(delta/2) / (epsilon g)^2."""
    _check_bound_args(epsilon, delta, g)
    bound = -32.0 * math.log(delta / 2.0) / epsilon**2 / g**2
    return math.floor(bound) + 1


def tomography_sample_bound(
    epsilon: float, delta: float, kappa: float, degree: int, g: float = 1.0
) -> int:
    """Smallest integer shot count exceeding
    -2 ln(delta/2)/epsilon^2 * kappa^(2 degree) / g^2."""
    _check_bound_args(epsilon, delta, g)
    if kappa < 1.0:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    bound = -2.0 * math.log(delta / 2.0) / epsilon**2 * kappa ** (2 * degree) / g**2
    return math.floor(bound) + 1


def random_correlators(
    n: int,
    degrees,
    count_per_degree: int,
    seed: int,
    directions: tuple[Direction, ...] | None = None,
) -> list[Correlator]:
    """Draw correlators with uniform support patterns of each requested
    degree and observable directions uniform over the given set."""
    if count_per_degree < 1:
        raise ValueError(f"count_per_degree must be >= 1, got {count_per_degree}")
    directions = tuple(directions) if directions is not None else pauli_directions()
    rng = np.random.default_rng(seed)
    out: list[Correlator] = []
    for degree in degrees:
        if not 1 <= degree <= n:
            raise ValueError(f"degree must lie in [1, {n}], got {degree}")
        for _ in range(count_per_degree):
            qubits = sorted(int(q) for q in rng.choice(n, size=degree, replace=False))
            pattern = BitString(n, sum(1 << q for q in qubits))
            observables = {q: directions[int(rng.integers(len(directions)))] for q in qubits}
            out.append(Correlator(pattern, observables))
    return out
