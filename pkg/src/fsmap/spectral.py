"""Periodic grid, discrete transforms, Fourier multipliers, fractional Laplacian.

Conventions: the torus is [0, box_period)^n, frequencies are xi = (2*pi/box_period)*m
with integer vectors m in [-N/2, N/2)^n.  The forward transform is normalized so
that a pure mode e^{i xi0 . x} has unit coefficient at xi0, which makes the L^2
norm the mean-square norm over the torus (||e^{i xi.x}||_2 = 1) and keeps mode
norms resolution independent.

The continuum problem lives on R^n; the torus is the standard periodic
surrogate (FFT-exact fractional Laplacian, small rapidly-decaying data is well
approximated by a large box).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, NumericalDomainError, ParameterError

TWO_PI = 2.0 * np.pi

PHYSICAL = "physical"
SPECTRAL = "spectral"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice with N samples per axis in n dimensions."""

    n: int
    N: int
    box_period: float = TWO_PI

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.N < 8 or not _is_power_of_two(self.N):
            raise ConfigurationError(f"N must be a power of two >= 8, got {self.N}")
        if not self.box_period > 0:
            raise ConfigurationError(f"box_period must be positive, got {self.box_period}")

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @cached_property
    def modes(self) -> list:
        """Integer frequency arrays, one per axis, broadcastable to `shape`."""
        m = np.fft.fftfreq(self.N, d=1.0 / self.N)
        out = []
        for axis in range(self.n):
            sl = [None] * self.n
            sl[axis] = slice(None)
            out.append(m[tuple(sl)])
        return out

    @cached_property
    def xi(self) -> list:
        scale = TWO_PI / self.box_period
        return [scale * m for m in self.modes]

    @cached_property
    def xi_normsq(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for x in self.xi:
            out = out + x**2
        return out

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt(self.xi_normsq)

    @property
    def xi_max(self) -> float:
        """Largest |xi| on the lattice."""
        return (TWO_PI / self.box_period) * (self.N / 2) * np.sqrt(self.n)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with every |m_i| <= N/3."""
        keep = np.ones(self.shape, dtype=bool)
        for m in self.modes:
            keep = keep & (np.abs(m) <= self.N / 3)
        return keep

    @cached_property
    def half_dealias_mask(self) -> np.ndarray:
        """Stricter 1/2 rule for aliasing studies."""
        keep = np.ones(self.shape, dtype=bool)
        for m in self.modes:
            keep = keep & (np.abs(m) <= self.N / 4)
        return keep

    def coords(self) -> list:
        x = self.box_period * np.arange(self.N) / self.N
        out = []
        for axis in range(self.n):
            sl = [None] * self.n
            sl[axis] = slice(None)
            out.append(x[tuple(sl)])
        return out


@dataclass
class Field:
    """Complex scalar samples over a Grid, in physical or spectral representation."""

    grid: Grid
    values: np.ndarray
    representation: str = PHYSICAL

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ConfigurationError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.representation not in (PHYSICAL, SPECTRAL):
            raise ConfigurationError(f"unknown representation {self.representation!r}")
        self.values = np.asarray(self.values, dtype=np.complex128)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.representation)


def zeros(grid: Grid, representation: str = PHYSICAL) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=np.complex128), representation)


def constant(grid: Grid, c: complex) -> Field:
    return Field(grid, np.full(grid.shape, c, dtype=np.complex128), PHYSICAL)


def plane_wave(grid: Grid, m, amplitude: complex = 1.0) -> Field:
    """amplitude * e^{i xi.x} with xi the lattice frequency of integer vector m."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    if m.size != grid.n:
        raise ConfigurationError(f"mode vector has {m.size} entries, grid is {grid.n}-d")
    phase = np.zeros(grid.shape)
    scale = TWO_PI / grid.box_period
    for mi, x in zip(m, grid.coords()):
        phase = phase + scale * mi * x
    return Field(grid, amplitude * np.exp(1j * phase), PHYSICAL)


def forward_transform(f: Field) -> Field:
    """Physical -> spectral, unit coefficient for a pure mode."""
    if f.representation != PHYSICAL:
        raise ConfigurationError("forward_transform expects a physical-representation field")
    fhat = np.fft.fftn(f.values) / f.grid.size
    return Field(f.grid, fhat, SPECTRAL)


def inverse_transform(f: Field) -> Field:
    if f.representation != SPECTRAL:
        raise ConfigurationError("inverse_transform expects a spectral-representation field")
    vals = np.fft.ifftn(f.values) * f.grid.size
    return Field(f.grid, vals, PHYSICAL)


def to_spectral(f: Field) -> Field:
    return f if f.representation == SPECTRAL else forward_transform(f)


def to_physical(f: Field) -> Field:
    return f if f.representation == PHYSICAL else inverse_transform(f)


def _spectral_values(f: Field) -> np.ndarray:
    if f.representation == SPECTRAL:
        return f.values
    return np.fft.fftn(f.values) / f.grid.size


def apply_symbol(f: Field, m) -> Field:
    """Multiply spectral coefficients pointwise by m(xi).

    `m` is either an ndarray over the frequency lattice or a callable taking
    the n broadcastable xi arrays.  The input representation is preserved.
    """
    grid = f.grid
    if callable(m):
        sym = np.broadcast_to(np.asarray(m(*grid.xi)), grid.shape)
    else:
        sym = np.broadcast_to(np.asarray(m), grid.shape)
    fhat = _spectral_values(f)
    # modes holding only transform roundoff do not count as occupied
    amp = np.abs(fhat)
    occupied = amp > 1e-13 * max(np.max(amp), 1e-300)
    if not np.all(np.isfinite(sym[occupied])):
        raise NumericalDomainError("symbol is not finite at an occupied mode")
    out = Field(grid, sym * fhat, SPECTRAL)
    if f.representation == PHYSICAL:
        return inverse_transform(out)
    return out


def fractional_laplacian(f: Field, s: float) -> Field:
    """(-Delta)^s: spectral multiplication by |xi|^{2s}; zero mode maps to zero."""
    if not 0.0 < s <= 1.0:
        raise ParameterError(f"s must lie in (0, 1], got {s}")
    return apply_symbol(f, fractional_symbol(f.grid, s))


def fractional_symbol(grid: Grid, s: float) -> np.ndarray:
    normsq = grid.xi_normsq
    sym = np.zeros(grid.shape)
    nz = normsq > 0
    sym[nz] = normsq[nz] ** s
    return sym


def dealias(f: Field, mask: np.ndarray | None = None) -> Field:
    """Zero all modes with any |m_i| > N/3 (two-thirds rule by default)."""
    if mask is None:
        mask = f.grid.dealias_mask
    fhat = _spectral_values(f)
    out = Field(f.grid, np.where(mask, fhat, 0.0), SPECTRAL)
    if f.representation == PHYSICAL:
        return inverse_transform(out)
    return out


def l2_norm(f: Field) -> float:
    """Mean-square L^2 norm (Parseval-consistent with the coefficient l^2 norm)."""
    if f.representation == PHYSICAL:
        return float(np.sqrt(np.mean(np.abs(f.values) ** 2)))
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2)))


def inner(f: Field, g: Field) -> complex:
    """Mean-square inner product <f, g> = mean(f * conj(g))."""
    fv = to_physical(f).values
    gv = to_physical(g).values
    return complex(np.mean(fv * np.conj(gv)))


def sup_norm(f: Field) -> float:
    return float(np.max(np.abs(to_physical(f).values)))


def random_band_limited(grid: Grid, rng: np.random.Generator, cutoff: float,
                        spectrum_scale: float | None = None) -> Field:
    """Gaussian-coefficient random field supported in |m| <= cutoff.

    Coefficients carry the spectrum exp(-|xi|^2/xi_c^2) with xi_c set from
    `spectrum_scale` (defaults to the cutoff frequency).  Unnormalized; callers
    scale to a target sup or Besov norm.
    """
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    keep = np.ones(grid.shape, dtype=bool)
    for m in grid.modes:
        keep &= np.abs(m) <= cutoff
    scale = TWO_PI / grid.box_period
    xi_c = scale * (spectrum_scale if spectrum_scale is not None else max(cutoff, 1.0))
    envelope = np.exp(-grid.xi_normsq / xi_c**2)
    return inverse_transform(Field(grid, np.where(keep, coeffs * envelope, 0.0), SPECTRAL))
