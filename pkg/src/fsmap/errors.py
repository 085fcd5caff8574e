"""Exception types shared across the package.

Exit-code mapping used by the CLI: configuration errors -> 2,
numerical instability -> 3, threshold failures -> 1 (reported, not raised).
"""


class FsmapError(Exception):
    """Base class for package errors."""


class ConfigurationError(FsmapError):
    """Bad grid/config input: wrong sizes, unknown keys, invalid values."""


class ParameterError(FsmapError, ValueError):
    """Argument outside its documented range (s, block index, ...)."""


class NumericalDomainError(FsmapError):
    """Evaluation left the numerical domain (NaN symbol, pole proximity,
    dispersion-surface inequality violated)."""


class ResolutionError(FsmapError):
    """Sampled window too short to resolve a requested modulation block."""


class InstabilityError(FsmapError):
    """Time stepper detected blow-up or sphere drift beyond the guard."""
