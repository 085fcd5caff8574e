"""Pseudo-spectral laboratory for the fractional Schrodinger map on the torus."""

from .errors import (ConfigurationError, FsmapError, InstabilityError,
                     NumericalDomainError, ParameterError, ResolutionError)
from .spectral import (Field, Grid, fractional_laplacian, l2_norm, plane_wave,
                       random_band_limited)
from .stereographic import (SphereField, frame, lift, project,
                            reduction_residual, verify_frame_identities)
from .solver import SimConfig, SpinWaveSpec, picard_iterate, run

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "FsmapError", "InstabilityError",
    "NumericalDomainError", "ParameterError", "ResolutionError",
    "Field", "Grid", "fractional_laplacian", "l2_norm", "plane_wave",
    "random_band_limited", "SphereField", "frame", "lift", "project",
    "reduction_residual", "verify_frame_identities", "SimConfig",
    "SpinWaveSpec", "picard_iterate", "run", "__version__",
]
