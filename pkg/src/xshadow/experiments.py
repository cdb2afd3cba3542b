"""End-to-end experiment drivers built on the estimation core.

Everything here is deterministic given the config: dataset collection
seeds, correlator draws, bootstrap replicates and subsample draws all
come from seeds named in the config file, so rerunning a command
reproduces its outputs byte for byte.
"""

from __future__ import annotations

import itertools
import math
import os
from typing import Sequence

import numpy as np

from . import storage
from .bitspace import BitString
from .config import ExperimentConfig
from .noise import exact_g, twirl
from .protocols import (
    CalibrationDataset,
    TomographyDataset,
    _support_shades,
    estimate_correlator_independent_model,
    estimate_correlator_mitigated,
    estimate_correlator_unmitigated,
    estimate_g,
    pack_bits,
    random_correlators,
    run_calibration,
    run_tomography,
)
from .qsim import Correlator, exact_expectation
from .shadows import compute_xi

CALIBRATION_RMS_COLUMNS = ("size", "weight", "rms")
TOMOGRAPHY_RMS_COLUMNS = ("size", "degree", "rms")
SUMMARY_COLUMNS = ("section", "key", "value")


def collect_calibration(
    config: ExperimentConfig, shots: int | None = None, seed: int | None = None
) -> CalibrationDataset:
    model = config.build_noise_model()
    return run_calibration(
        model,
        shots if shots is not None else config.calibration_shots,
        seed if seed is not None else config.calibration_seed,
    )


def collect_tomography(
    config: ExperimentConfig, shots: int | None = None, seed: int | None = None
) -> TomographyDataset:
    state = config.build_state()
    model = config.build_noise_model()
    return run_tomography(
        state,
        config.build_directions(),
        model,
        shots if shots is not None else config.tomography_shots,
        seed if seed is not None else config.tomography_seed,
    )


def calibration_summary(dataset: CalibrationDataset, top: int = 8, max_weight: int = 2) -> str:
    """Human-readable digest: record count, most frequent outcomes, and
    the empirical Fourier components up to the given weight."""
    lines = [f"records={len(dataset)} n={dataset.n}"]
    values, counts = np.unique(pack_bits(dataset.outcomes), return_counts=True)
    order = np.lexsort((values, -counts))
    lines.append("top outcomes:")
    for rank in order[:top]:
        text = BitString(dataset.n, int(values[rank])).to_text()
        lines.append(f"  {text} {counts[rank] / len(dataset):.6f}")
    lines.append(f"g_hat by wavevector (weight <= {max_weight}):")
    for weight in range(1, min(max_weight, dataset.n) + 1):
        for support in itertools.combinations(range(dataset.n), weight):
            w = BitString(dataset.n, sum(1 << q for q in support))
            lines.append(f"  {w.to_text()} {estimate_g(dataset, w):+.6f}")
    return "\n".join(lines)


def build_correlators(config: ExperimentConfig, per_degree: int | None = None) -> list[Correlator]:
    return random_correlators(
        config.n,
        config.correlator_degrees,
        per_degree if per_degree is not None else config.correlators_per_degree,
        config.correlator_seed,
        config.build_directions(),
    )


def comparison_rows(
    config: ExperimentConfig,
    tomo: TomographyDataset,
    cal: CalibrationDataset,
    correlators: Sequence[Correlator] | None = None,
) -> list[dict[str, object]]:
    """Three-estimator comparison against the exact state expectation."""
    xi = compute_xi(config.build_directions())
    state = config.build_state()
    if correlators is None:
        correlators = build_correlators(config)
    rows: list[dict[str, object]] = []
    for index, correlator in enumerate(correlators):
        seed = config.bootstrap_seed + 3 * index
        mit = estimate_correlator_mitigated(
            tomo,
            cal,
            correlator,
            xi,
            bootstrap_resamples=config.bootstrap_resamples,
            bootstrap_seed=seed,
        )
        unm = estimate_correlator_unmitigated(
            tomo,
            correlator,
            xi,
            bootstrap_resamples=config.bootstrap_resamples,
            bootstrap_seed=seed + 1,
        )
        ind = estimate_correlator_independent_model(
            tomo,
            correlator,
            xi,
            config.noise.p10,
            config.noise.p01,
            bootstrap_resamples=config.bootstrap_resamples,
            bootstrap_seed=seed + 2,
        )
        rows.append(
            {
                "correlator_id": f"c{index:02d}",
                "degree": correlator.degree,
                "pattern": correlator.pattern.to_text(),
                "truth": exact_expectation(state, correlator),
                "mitigated": mit.estimate,
                "mitigated_se": mit.stderr,
                "unmitigated": unm.estimate,
                "unmitigated_se": unm.stderr,
                "indep": ind.estimate,
                "indep_se": ind.stderr,
                "g_hat": estimate_g(cal, correlator.pattern),
            }
        )
    return rows


def subsample_grid(records: int, points: int, minimum: int) -> list[int]:
    """Log-spaced subsample sizes from `minimum` up to a tenth of the data."""
    top = records // 10
    if top < minimum:
        raise ValueError(
            f"dataset with {records} records is too small for subsampling from {minimum}"
        )
    raw = np.logspace(math.log10(minimum), math.log10(top), points)
    sizes = sorted(set(int(round(v)) for v in raw))
    if len(sizes) < 2:
        raise ValueError("subsample grid collapsed to fewer than two sizes")
    return sizes


def _subsample_rms(
    per_record: np.ndarray,
    truth: float,
    sizes: Sequence[int],
    resamples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """RMS error of the subsample mean at each size.

    Each replicate draws `size` records with replacement, which at
    size <= records/10 behaves like a fresh dataset of that size.
    Returns squared errors of shape (len(sizes), resamples); callers
    pool before taking the square root.
    """
    errors = np.empty((len(sizes), resamples))
    records = per_record.size
    for i, size in enumerate(sizes):
        for b in range(resamples):
            mean = per_record[rng.integers(0, records, size)].mean()
            errors[i, b] = (mean - truth) ** 2
    return errors


def _pick_wavevectors(
    n: int, weights: Sequence[int], per_weight: int, rng: np.random.Generator
) -> list[BitString]:
    chosen: list[BitString] = []
    for weight in weights:
        combos = list(itertools.combinations(range(n), weight))
        if len(combos) > per_weight:
            picks = rng.choice(len(combos), size=per_weight, replace=False)
            combos = [combos[i] for i in sorted(picks)]
        chosen.extend(BitString(n, sum(1 << q for q in combo)) for combo in combos)
    return chosen


def g_rms_rows(
    config: ExperimentConfig, cal: CalibrationDataset
) -> tuple[list[dict[str, object]], dict[int, float]]:
    """Convergence of ghat(w) with calibration size, pooled per weight.

    Returns tidy rows (size, weight, rms) and the fitted log-log slope
    per weight.  Truth is the exact Fourier component of the twirled
    configured noise model.
    """
    model = config.build_noise_model()
    g_exact = exact_g(twirl(model))
    rng = np.random.default_rng(config.study_seed)
    wavevectors = _pick_wavevectors(
        config.n, config.study_weights, config.wavevectors_per_weight, rng
    )
    sizes = subsample_grid(len(cal), config.grid_points, config.grid_min)

    pooled: dict[int, list[np.ndarray]] = {w: [] for w in config.study_weights}
    for w in wavevectors:
        support = list(w.support())
        parity = np.bitwise_xor.reduce(cal.outcomes[:, support], axis=1)
        signs = 1.0 - 2.0 * parity.astype(np.float64)
        truth = g_exact.component(w)
        errors = _subsample_rms(signs, truth, sizes, config.bootstrap_resamples, rng)
        pooled[len(support)].append(errors)

    rows: list[dict[str, object]] = []
    slopes: dict[int, float] = {}
    for weight in config.study_weights:
        stacked = np.stack(pooled[weight])  # (wavevectors, sizes, resamples)
        rms = np.sqrt(stacked.mean(axis=(0, 2)))
        for size, value in zip(sizes, rms):
            rows.append({"size": size, "weight": weight, "rms": float(value)})
        slopes[weight] = fit_loglog_slope(sizes, rms)
    return rows, slopes


def correlator_rms_rows(
    config: ExperimentConfig,
    tomo: TomographyDataset,
    cal: CalibrationDataset,
    correlators: Sequence[Correlator] | None = None,
) -> tuple[list[dict[str, object]], dict[int, float]]:
    """Convergence of the mitigated estimator with tomography size.

    Per-record mitigated shades are fixed once (using ghat(v) from the
    full calibration set); subsample means then isolate the statistical
    error.  Pooled per correlator degree.
    """
    xi = compute_xi(config.build_directions())
    state = config.build_state()
    if correlators is None:
        correlators = random_correlators(
            config.n,
            config.correlator_degrees,
            config.correlators_per_degree_study,
            config.correlator_seed,
            config.build_directions(),
        )
    rng = np.random.default_rng(config.study_seed + 1)
    sizes = subsample_grid(len(tomo), config.grid_points, config.grid_min)

    degrees = sorted(set(c.degree for c in correlators))
    pooled: dict[int, list[np.ndarray]] = {d: [] for d in degrees}
    for correlator in correlators:
        g_hat = estimate_g(cal, correlator.pattern)
        shades = _support_shades(tomo, correlator, xi) / g_hat
        truth = exact_expectation(state, correlator)
        errors = _subsample_rms(shades, truth, sizes, config.bootstrap_resamples, rng)
        pooled[correlator.degree].append(errors)

    rows: list[dict[str, object]] = []
    slopes: dict[int, float] = {}
    for degree in degrees:
        stacked = np.stack(pooled[degree])
        rms = np.sqrt(stacked.mean(axis=(0, 2)))
        for size, value in zip(sizes, rms):
            rows.append({"size": size, "degree": degree, "rms": float(value)})
        slopes[degree] = fit_loglog_slope(sizes, rms)
    return rows, slopes


def fit_loglog_slope(sizes: Sequence[int], rms: Sequence[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(sizes, float)), np.log(np.asarray(rms, float)), 1)[0])


def run_experiment(config: ExperimentConfig, out_dir: str) -> dict[str, str]:
    """Collect both datasets, write them, and produce every result table.

    Returns a name -> path map of everything written under out_dir.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "calibration": os.path.join(out_dir, "calibration.txt"),
        "tomography": os.path.join(out_dir, "tomography.txt"),
        "report": os.path.join(out_dir, "report.csv"),
        "calibration_rms": os.path.join(out_dir, "calibration_rms.csv"),
        "tomography_rms": os.path.join(out_dir, "tomography_rms.csv"),
        "summary": os.path.join(out_dir, "summary.csv"),
    }

    cal = collect_calibration(config)
    tomo = collect_tomography(config)
    storage.write_calibration(paths["calibration"], cal)
    storage.write_tomography(paths["tomography"], tomo)

    storage.write_report(paths["report"], comparison_rows(config, tomo, cal))

    cal_rows, cal_slopes = g_rms_rows(config, cal)
    storage.write_csv(paths["calibration_rms"], CALIBRATION_RMS_COLUMNS, cal_rows)
    tomo_rows, tomo_slopes = correlator_rms_rows(config, tomo, cal)
    storage.write_csv(paths["tomography_rms"], TOMOGRAPHY_RMS_COLUMNS, tomo_rows)

    summary = [
        {"section": "datasets", "key": "calibration_records", "value": len(cal)},
        {"section": "datasets", "key": "tomography_records", "value": len(tomo)},
    ]
    for weight, slope in sorted(cal_slopes.items()):
        summary.append(
            {"section": "calibration_rms_slope", "key": f"weight={weight}", "value": slope}
        )
    for degree, slope in sorted(tomo_slopes.items()):
        summary.append(
            {"section": "tomography_rms_slope", "key": f"degree={degree}", "value": slope}
        )
    storage.write_csv(paths["summary"], SUMMARY_COLUMNS, summary)
    return paths
