"""Stereographic chart between the sphere and the complex plane.

The chart sends the north pole Q = (0,0,1) to 0:

    project(v) = (v1 + i v2) / (1 + v3),
    lift(z)    = (2 z1, 2 z2, 1 - |z|^2) / (1 + |z|^2),

with the moving frame e_i given by the normalized partial derivatives of the
lift.  `reduction_residual` is the machine check that the scalar evolution
-i((-Delta)^s f + N(f)) agrees with the frame pairing of the geometric flow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalDomainError
from .spectral import (Field, Grid, PHYSICAL, fractional_laplacian, l2_norm,
                       to_physical)

DELTA_POLE = 1e-6
TOL_SPHERE = 1e-10


@dataclass
class SphereField:
    """Pointwise unit 3-vector field; u has shape (3,) + grid.shape, real."""

    grid: Grid
    u: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        if self.u.shape != (3,) + self.grid.shape:
            raise ConfigurationError(
                f"sphere field shape {self.u.shape} does not match grid {self.grid.shape}")

    def copy(self) -> "SphereField":
        return SphereField(self.grid, self.u.copy())

    def norm_drift(self) -> float:
        """max |1 - |u|^2| over the lattice."""
        return float(np.max(np.abs(1.0 - np.sum(self.u**2, axis=0))))

    def check_unit(self, tol: float = TOL_SPHERE):
        drift = self.norm_drift()
        if drift > tol:
            raise NumericalDomainError(f"|u| drifted off the sphere by {drift:.3e}")


def constant_sphere(grid: Grid, v=(0.0, 0.0, 1.0)) -> SphereField:
    u = np.empty((3,) + grid.shape)
    for c in range(3):
        u[c] = v[c]
    return SphereField(grid, u)


def project(u: SphereField, delta_pole: float = DELTA_POLE) -> Field:
    """f = (u1 + i u2)/(1 + u3); rejects samples too close to the south pole."""
    u3 = u.u[2]
    worst = float(np.min(u3))
    if worst <= -1.0 + delta_pole:
        idx = np.unravel_index(np.argmin(u3), u3.shape)
        raise NumericalDomainError(
            f"projection undefined near the south pole: u3={worst:.6f} at sample {idx}")
    vals = (u.u[0] + 1j * u.u[1]) / (1.0 + u3)
    return Field(u.grid, vals, PHYSICAL)


def lift(f: Field) -> SphereField:
    """Inverse chart: u = (2 f1, 2 f2, 1 - |f|^2)/(1 + |f|^2), |u| = 1 to roundoff."""
    z = to_physical(f).values
    w = 1.0 / (1.0 + np.abs(z) ** 2)
    u = np.empty((3,) + f.grid.shape)
    u[0] = 2.0 * z.real * w
    u[1] = 2.0 * z.imag * w
    u[2] = (1.0 - np.abs(z) ** 2) * w
    return SphereField(f.grid, u)


def _lift_point(z: np.ndarray) -> np.ndarray:
    """lift for a bare array of complex samples; returns shape (3,) + z.shape."""
    w = 1.0 / (1.0 + np.abs(z) ** 2)
    return np.stack([2.0 * z.real * w, 2.0 * z.imag * w, (1.0 - np.abs(z) ** 2) * w])


def dz1_lift(z: np.ndarray) -> np.ndarray:
    """Partial derivative of the lift in the z1 (real) direction, closed form."""
    a = np.abs(z) ** 2
    pref = 2.0 / (1.0 + a) ** 2
    return np.stack([
        pref * (1.0 + a - 2.0 * z.real**2),
        pref * (-2.0 * z.real * z.imag),
        pref * (-2.0 * z.real),
    ])


def dz2_lift(z: np.ndarray) -> np.ndarray:
    """Partial derivative of the lift in the z2 (imaginary) direction, closed form."""
    a = np.abs(z) ** 2
    pref = 2.0 / (1.0 + a) ** 2
    return np.stack([
        pref * (-2.0 * z.real * z.imag),
        pref * (1.0 + a - 2.0 * z.imag**2),
        pref * (-2.0 * z.imag),
    ])


@dataclass
class FramePair:
    """Orthonormal tangent pair e1, e2 at each sample; shape (3,) + grid.shape."""

    e1: np.ndarray
    e2: np.ndarray


def frame(f: Field) -> FramePair:
    """Normalized partials of the lift; both norms equal 2/(1+|z|^2) beforehand."""
    z = to_physical(f).values
    scale = (1.0 + np.abs(z) ** 2) / 2.0
    return FramePair(dz1_lift(z) * scale, dz2_lift(z) * scale)


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _complex_step_partials(z: np.ndarray, h: float = 1e-20):
    """Machine-precision partials of the lift via complex-step differentiation.

    Each lift component is a rational function of (z1, z2); evaluating with a
    z1 (resp. z2) perturbed into a second complex plane and taking the
    imaginary part gives the derivative with no subtraction error.
    """
    z1 = z.real.astype(np.complex128)
    z2 = z.imag.astype(np.complex128)

    def lift_components(a, b):
        denom = 1.0 + a * a + b * b
        return np.stack([2.0 * a / denom, 2.0 * b / denom, (1.0 - a * a - b * b) / denom])

    d1 = lift_components(z1 + 1j * h, z2).imag / h
    d2 = lift_components(z1, z2 + 1j * h).imag / h
    return d1, d2


def verify_frame_identities(samples: int = 10_000, seed: int = 0,
                            radius: float = 10.0) -> dict:
    """Residuals of the six chart identities over random z with |z| <= radius.

    1,2: closed-form partials against the complex-step oracle;
    3: both partial norms equal 2/(1+|z|^2);
    4: the partials are orthogonal;
    5: lift(z) x dz1 = dz2;  6: lift(z) x dz2 = -dz1.
    """
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=samples))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=samples)
    z = r * np.exp(1j * theta)

    u = _lift_point(z)
    d1, d2 = dz1_lift(z), dz2_lift(z)
    o1, o2 = _complex_step_partials(z)
    target = 2.0 / (1.0 + np.abs(z) ** 2)

    residuals = {
        "dz1_formula": float(np.max(np.abs(d1 - o1))),
        "dz2_formula": float(np.max(np.abs(d2 - o2))),
        "norms": float(max(np.max(np.abs(np.linalg.norm(d1, axis=0) - target)),
                           np.max(np.abs(np.linalg.norm(d2, axis=0) - target)))),
        "orthogonality": float(np.max(np.abs(np.sum(d1 * d2, axis=0)))),
        "cross_dz1": float(np.max(np.abs(_cross(u, d1) - d2))),
        "cross_dz2": float(np.max(np.abs(_cross(u, d2) + d1))),
    }
    max_residual = max(residuals.values())
    return {"samples": samples, "seed": seed, "residuals": residuals,
            "max_residual": max_residual, "passed": max_residual <= 1e-12}


def geometric_rhs(u: SphereField, s: float) -> np.ndarray:
    """-u x (-Delta)^s u, componentwise fractional Laplacian; orthogonal to u."""
    from .spectral import fractional_symbol

    grid = u.grid
    axes = tuple(range(1, grid.n + 1))
    sym = fractional_symbol(grid, s)
    lap = np.fft.ifftn(sym * np.fft.fftn(u.u, axes=axes), axes=axes).real
    return -_cross(u.u, lap)


def reduction_residual(f: Field, s: float, dealias_products: bool = True) -> float:
    """Relative L^2 defect between the two routes to d/dt f.

    Route A evaluates -i((-Delta)^s f + N(f)) through the scalar nonlinearity;
    route B pairs the geometric right-hand side of the lifted field with the
    moving frame.  The two agree identically in exact arithmetic.

    With dealias_products on, route A zeroes the aliasing-contaminated top
    third of the product spectra while route B's pointwise algebra retains it,
    so both sides are compared on the commonly resolved band (the same
    two-thirds mask); the residual then measures fold-back aliasing of the
    analytic nonlinearity and decreases under N-refinement.  With dealiasing
    off the comparison is global and exact to roundoff.
    """
    from .nonlinearity import scalar_rhs
    from .spectral import dealias

    fp = to_physical(f)
    if np.max(np.abs(fp.values)) > 10.0:
        raise NumericalDomainError("field too large for a well-conditioned 1/(1+|f|^2)")

    a_side = scalar_rhs(fp, s, dealias_products=dealias_products)

    u = lift(fp)
    dtu = geometric_rhs(u, s)
    fr = frame(fp)
    pref = (1.0 + np.abs(fp.values) ** 2) / 2.0
    b_vals = pref * (np.sum(fr.e1 * dtu, axis=0) + 1j * np.sum(fr.e2 * dtu, axis=0))
    b_side = Field(f.grid, b_vals, PHYSICAL)

    if dealias_products:
        a_side = dealias(a_side)
        b_side = dealias(b_side)

    na = l2_norm(a_side)
    nb = l2_norm(b_side)
    diff = l2_norm(Field(f.grid, to_physical(a_side).values
                         - to_physical(b_side).values, PHYSICAL))
    return diff / max(na, nb, np.finfo(float).eps)
