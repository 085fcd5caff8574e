"""Dyadic frequency machinery: smooth cutoffs, blocks, Besov norms, cones,
and space-time modulation projections.

Cutoff convention: phi0 is the usual even bump (1 on [-1,1], supported in
(-2,2)) and phi(r) = phi0(r) - phi0(2r), which makes the telescoping identity

    phi0(r) + sum_{k=1}^K phi(r/2^k) = phi0(r/2^K)

exact.  The alternative convention phi(r) = phi0(r) - phi0(r/2) breaks the
identity and is retained only as a negative control (`convention="literal"`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ParameterError, ResolutionError
from .spectral import (Field, Grid, PHYSICAL, SPECTRAL, fractional_symbol,
                       l2_norm, to_physical, to_spectral)
from .stereographic import SphereField


def _g(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t) -> np.ndarray:
    """C^infty monotone step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    num = _g(t)
    return num / (num + _g(1.0 - t))


@dataclass(frozen=True)
class CutoffFamily:
    """Dyadic partition of unity on the line (radial on R^n).

    convention "standard": phi(r) = phi0(r) - phi0(2r) (telescoping identity
    holds); "literal": phi(r) = phi0(r) - phi0(r/2) (negative control)."""

    convention: str = "standard"

    def phi0(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        return 1.0 - smoothstep(r - 1.0)

    def phi(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.convention == "standard":
            return self.phi0(r) - self.phi0(2.0 * r)
        if self.convention == "literal":
            return self.phi0(r) - self.phi0(r / 2.0)
        raise ConfigurationError(f"unknown cutoff convention {self.convention!r}")

    def phi_k(self, r, k: int) -> np.ndarray:
        """Block weight: phi0 for k = 0, phi(r/2^k) for k >= 1."""
        if k < 0:
            raise ParameterError(f"block index must be >= 0, got {k}")
        if k == 0:
            return self.phi0(r)
        return self.phi(np.asarray(r, dtype=float) / 2.0**k)

    def partition_sum(self, r, k_max: int) -> np.ndarray:
        out = self.phi0(r).astype(float)
        for k in range(1, k_max + 1):
            out = out + self.phi_k(r, k)
        return out


DEFAULT_CUTOFFS = CutoffFamily()


def grid_k_max(grid: Grid) -> int:
    """Largest block index carrying lattice frequencies: ceil(log2(xi_max))."""
    return max(0, math.ceil(math.log2(grid.xi_max)))


def delta_k(f: Field, k: int, cutoffs: CutoffFamily = DEFAULT_CUTOFFS) -> Field:
    """Frequency block: spectral multiplication by phi_k(|xi|)."""
    kmax = grid_k_max(f.grid)
    if not 0 <= k <= kmax:
        raise ParameterError(f"block index {k} outside [0, {kmax}] for this grid")
    weight = cutoffs.phi_k(f.grid.xi_norm, k)
    fhat = to_spectral(f).values
    out = Field(f.grid, weight * fhat, SPECTRAL)
    return to_physical(out) if f.representation == PHYSICAL else out


def dyadic_profile(f: Field, cutoffs: CutoffFamily = DEFAULT_CUTOFFS) -> dict:
    """Per-block L^2 norms {k: ||Delta_k f||}."""
    fhat = to_spectral(f)
    return {k: l2_norm(delta_k(fhat, k, cutoffs))
            for k in range(grid_k_max(f.grid) + 1)}


def besov_norm(f: Field, sigma: float,
               cutoffs: CutoffFamily = DEFAULT_CUTOFFS) -> float:
    """B^sigma_{2,1} norm: sum_k 2^{k sigma} ||Delta_k f||_{L^2}."""
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    profile = dyadic_profile(f, cutoffs)
    return float(sum(2.0 ** (k * sigma) * v for k, v in profile.items()))


def besov_distance_Q(u: SphereField, v: SphereField | None, sigma: float,
                     Q=(0.0, 0.0, 1.0),
                     cutoffs: CutoffFamily = DEFAULT_CUTOFFS) -> float:
    """d^sigma_Q(u, v) = sum_l ||u_l - v_l||_{B^sigma}; v = None compares to Q."""
    grid = u.grid
    total = 0.0
    for comp in range(3):
        ref = v.u[comp] if v is not None else Q[comp]
        diff = Field(grid, (u.u[comp] - ref).astype(np.complex128), PHYSICAL)
        total += besov_norm(diff, sigma, cutoffs)
    return float(total)


# --- directional cone partition ---------------------------------------------

COVERING_BOUND = 0.55


def _directions(n: int) -> np.ndarray:
    if n == 1:
        dirs = np.array([[-1.0], [1.0]])
    elif n == 2:
        angles = 2.0 * np.pi * np.arange(8) / 8.0
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    elif n == 3:
        pts = [np.array(v, dtype=float)
               for v in np.ndindex(3, 3, 3) if v != (1, 1, 1)]
        dirs = np.stack([(p - 1.0) / np.linalg.norm(p - 1.0) for p in pts])
    else:
        raise ConfigurationError(f"no direction set for dimension {n}")
    # canonical (lexicographic) order fixes the zero-mode assignment
    order = np.lexsort(dirs.T[::-1])
    return dirs[order]


@dataclass(frozen=True)
class ConePartition:
    """Finite direction set closed under negation with smooth angular weights.

    Weights are normalized bumps of <nu, e> supported in [1/2, 1]; every unit
    lattice direction sees some e with <nu, e> >= 0.55, checked per grid."""

    n: int
    directions: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.directions is None:
            object.__setattr__(self, "directions", _directions(self.n))

    def __len__(self):
        return len(self.directions)

    def _bump(self, t: np.ndarray) -> np.ndarray:
        # 0 below 1/2, smooth rise, 1 above the covering bound
        return smoothstep((np.asarray(t, dtype=float) - 0.5)
                          / (COVERING_BOUND - 0.5))

    def weights(self, nu: np.ndarray) -> np.ndarray:
        """theta_e for unit vectors nu of shape (..., n); returns (M, ...)."""
        dots = np.tensordot(self.directions, np.moveaxis(nu, -1, 0), axes=(1, 0))
        raw = self._bump(dots)
        total = np.sum(raw, axis=0)
        if np.any(total <= 0):
            raise ConfigurationError("cone covering failed: a direction has no cone")
        return raw / total

    def covering_margin(self, grid: Grid) -> float:
        """min over nonzero lattice xi of max_e <xi/|xi|, e>."""
        norm = grid.xi_norm
        nz = norm > 0
        nu = np.stack([np.broadcast_to(x, grid.shape)[nz] / norm[nz]
                       for x in grid.xi], axis=-1)
        dots = nu @ self.directions.T
        return float(np.min(np.max(dots, axis=-1)))

    def check_covering(self, grid: Grid):
        margin = self.covering_margin(grid)
        if margin < COVERING_BOUND:
            raise ConfigurationError(
                f"cone covering margin {margin:.4f} below {COVERING_BOUND}")
        return margin


@lru_cache(maxsize=8)
def cone_partition(n: int) -> ConePartition:
    return ConePartition(n)


def cone_project(f: Field, e, partition: ConePartition | None = None) -> Field:
    """Spectral multiplication by theta_e(xi/|xi|); zero mode goes to the
    lexicographically first direction."""
    grid = f.grid
    part = partition if partition is not None else cone_partition(grid.n)
    e = np.asarray(e, dtype=float)
    matches = np.where(np.all(np.isclose(part.directions, e, atol=1e-12), axis=1))[0]
    if matches.size != 1:
        raise ParameterError(f"direction {e} is not in the cone set")
    idx = int(matches[0])

    norm = grid.xi_norm
    nz = norm > 0
    nu = np.zeros(grid.shape + (grid.n,))
    for axis, x in enumerate(grid.xi):
        nu[..., axis] = np.where(nz, np.broadcast_to(x, grid.shape) / np.where(nz, norm, 1.0), 0.0)
    weight = np.zeros(grid.shape)
    weight[nz] = part.weights(nu[nz])[idx]
    weight[~nz] = 1.0 if idx == 0 else 0.0

    fhat = to_spectral(f).values
    out = Field(grid, weight * fhat, SPECTRAL)
    return to_physical(out) if f.representation == PHYSICAL else out


# --- trajectories and modulation projections --------------------------------

@dataclass
class Trajectory:
    """Uniformly time-sampled fields over a window, for space-time analysis.

    frames has shape (M+1,) + grid.shape, physical representation.  For
    temporal transforms the frame count must be a power of two and the taper
    must be applied first (smooth window, 1 on the middle half)."""

    grid: Grid
    times: np.ndarray
    frames: np.ndarray
    tapered: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.frames = np.asarray(self.frames, dtype=np.complex128)
        if self.frames.shape != (self.times.size,) + self.grid.shape:
            raise ConfigurationError("frame stack does not match times/grid")
        dt = np.diff(self.times)
        if self.times.size > 1 and not np.allclose(dt, dt[0], rtol=1e-10, atol=1e-14):
            raise ConfigurationError("trajectory times must be uniformly spaced")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def window_length(self) -> float:
        return float(self.times.size * self.dt)

    def l2(self) -> float:
        """Mean-square norm over space and time samples."""
        return float(np.sqrt(np.mean(np.abs(self.frames) ** 2)))


def taper_weights(times: np.ndarray) -> np.ndarray:
    """Smooth window: 1 on the middle half of the span, 0 at the endpoints."""
    t0, t1 = float(times[0]), float(times[-1])
    rel = 2.0 * (times - t0) / (t1 - t0) - 1.0  # [-1, 1]
    return smoothstep(2.0 * (1.0 - np.abs(rel)))


def taper(tr: Trajectory) -> Trajectory:
    w = taper_weights(tr.times)
    shape = (tr.times.size,) + (1,) * tr.grid.n
    return Trajectory(tr.grid, tr.times, tr.frames * w.reshape(shape), tapered=True)


def _check_temporal(tr: Trajectory):
    m = tr.times.size
    if m < 2 or (m & (m - 1)) != 0:
        raise ConfigurationError(f"frame count must be a power of two, got {m}")
    if not tr.tapered:
        raise ParameterError("apply the taper before temporal transforms")


def tau_lattice(tr: Trajectory) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(tr.times.size, d=tr.dt)


def _spacetime_symbol(tr: Trajectory, s: float) -> np.ndarray:
    """tau + |xi|^{2s} over the (tau, xi) lattice, shape (M+1,) + grid.shape."""
    tau = tau_lattice(tr).reshape((tr.times.size,) + (1,) * tr.grid.n)
    return tau + fractional_symbol(tr.grid, s)


def modulation_j_max(tr: Trajectory, s: float) -> int:
    vmax = float(np.max(np.abs(_spacetime_symbol(tr, s))))
    return max(0, math.ceil(math.log2(max(vmax, 1.0))))


def modulation_project(tr: Trajectory, j: int, s: float,
                       cutoffs: CutoffFamily = DEFAULT_CUTOFFS) -> Trajectory:
    """Q_j: space-time spectral multiplication by phi_j(tau + |xi|^{2s})."""
    _check_temporal(tr)
    if j < 0:
        raise ParameterError(f"modulation index must be >= 0, got {j}")
    dtau = 2.0 * np.pi / tr.window_length
    if dtau > 2.0 ** (j + 1):
        needed = math.ceil(2.0 * np.pi / (2.0 ** (j + 1) * tr.dt))
        raise ResolutionError(
            f"window too short to resolve modulation 2^{j}: need >= {needed} frames")
    v = _spacetime_symbol(tr, s)
    weight = cutoffs.phi_k(v, j)
    hat = np.fft.fftn(tr.frames)
    out = np.fft.ifftn(weight * hat)
    return Trajectory(tr.grid, tr.times, out, tapered=True)


def modulation_partition_residual(tr: Trajectory, s: float,
                                  cutoffs: CutoffFamily = DEFAULT_CUTOFFS) -> float:
    """|| sum_j Q_j tr - tr || / ||tr|| over the resolvable j range."""
    _check_temporal(tr)
    total = np.zeros_like(tr.frames)
    for j in range(modulation_j_max(tr, s) + 1):
        total = total + modulation_project(tr, j, s, cutoffs).frames
    denom = max(tr.l2(), np.finfo(float).eps)
    return float(np.sqrt(np.mean(np.abs(total - tr.frames) ** 2)) / denom)


def xk_norm(tr: Trajectory, k: int, s: float,
            cutoffs: CutoffFamily = DEFAULT_CUTOFFS,
            localization_tol: float = 1e-8) -> float:
    """sum_j 2^{j/2} ||Q_j tr||_{L^2} for a block-k localized trajectory."""
    _check_temporal(tr)
    weight = cutoffs.phi_k(tr.grid.xi_norm, k)
    hat = np.fft.fftn(tr.frames, axes=tuple(range(1, tr.grid.n + 1)))
    mass = np.sqrt(np.sum(np.abs(hat) ** 2))
    outside = np.sqrt(np.sum(np.abs(np.where(weight > 0, 0.0, 1.0) * hat) ** 2))
    if mass > 0 and outside / mass > localization_tol:
        raise ParameterError(
            f"trajectory is not localized to block {k}: {outside/mass:.2e} of its "
            "mass lies outside the block support")
    total = 0.0
    for j in range(modulation_j_max(tr, s) + 1):
        total += 2.0 ** (j / 2.0) * modulation_project(tr, j, s, cutoffs).l2()
    return float(total)
