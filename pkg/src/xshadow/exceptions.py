"""Exception types shared across the package."""


class XShadowError(Exception):
    """Base class for all errors raised by this package."""


class CapabilityError(XShadowError):
    """A computation was requested beyond the exact/dense size caps."""


class NotInformationallyCompleteError(XShadowError):
    """The direction set does not span single-qubit operator space."""


class UnmitigatableComponentError(XShadowError):
    """A Fourier component is too close to zero to divide by."""


class SingularNoiseError(XShadowError):
    """A transition matrix required for mitigation is not invertible."""


class ConfigError(XShadowError):
    """An experiment configuration file is invalid."""


class DataFormatError(XShadowError):
    """A dataset file is malformed or inconsistent with its header."""
