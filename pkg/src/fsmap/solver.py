"""Time integration of both formulations and the Duhamel fixed-point iteration.

Geometric flow: d/dt u = -u x (-Delta)^s u, explicit RK4, optional pointwise
renormalization to the sphere after each step.

Scalar flow: d/dt f = -i((-Delta)^s f + N(f)).  The linear part is applied
exactly through the spectral propagator S(t) = e^{-i t |xi|^{2s}} (free waves
are e^{i(xi.x - |xi|^{2s} t)}); the nonlinearity is handled by exponential
Euler or ETDRK4.  The phi-function coefficients are evaluated by averaging
over a unit contour around each symbol value, which is uniformly accurate
through z = 0.

Picard: f^{(m+1)} = psi(t) S(t) f0 - i psi(t) int_0^t S(t-r) N(f^{(m)})(r) dr
on the window [-2, 2], with psi a smooth taper equal to 1 on [-1, 1] and the
integral by cumulative composite Simpson on the frame grid.
"""
from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dyadic import Trajectory, besov_norm, smoothstep
from .errors import (ConfigurationError, InstabilityError, ParameterError)
from .nonlinearity import nonlin_total, scalar_rhs
from .spectral import (Field, Grid, PHYSICAL, SPECTRAL, fractional_symbol,
                       l2_norm, to_physical, to_spectral)
from .stereographic import SphereField, geometric_rhs, lift, project

INTEGRATORS = ("rk4", "exp_euler", "etd_rk4")
SUP_GUARD = 10.0
DRIFT_GUARD = 1e-3


@dataclass
class SimConfig:
    """Run parameters shared by both formulations."""

    n: int = 1
    N: int = 32
    box_period: float = 2.0 * np.pi
    s: float = 0.75
    dt: float = 1e-3
    T: float = 1.0
    sigma: float = 1.5
    integrator: str = "rk4"
    renormalize: bool = True
    dealias: bool = True
    seed: int = 0
    amplitude: float = 1e-2
    stride: int = 1

    def __post_init__(self):
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(
                f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not 0 < self.T <= 8.0:
            raise ConfigurationError(f"T must lie in (0, 8], got {self.T}")
        if self.stride < 1:
            raise ConfigurationError(f"stride must be >= 1, got {self.stride}")
        xi_cut = (2.0 * np.pi / self.box_period) * self.N / 3.0
        if self.dt * xi_cut ** (2.0 * self.s) > 0.5:
            warnings.warn(
                f"dt={self.dt} exceeds the phase-rotation guard "
                f"0.5 * xi_cut^(-2s) = {0.5 * xi_cut ** (-2.0 * self.s):.3e}; "
                "explicit nonlinear coupling may be inaccurate", stacklevel=2)

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.N, self.box_period)


@dataclass(frozen=True)
class SpinWaveSpec:
    """Exact rotating-wave solution of the geometric flow.

    u(x,t) = (sin a cos phi, sin a sin phi, cos a), phi = xi0.x - w t,
    w = cos(a) |xi0|^{2s}.  Substituting: (-Delta)^s u has the same transverse
    profile scaled by |xi0|^{2s}, and the cross product with u rotates the
    transverse pair at exactly that rate."""

    alpha: float
    xi0: tuple

    def omega(self, grid: Grid, s: float) -> float:
        scale = 2.0 * np.pi / grid.box_period
        normsq = sum((scale * m) ** 2 for m in self.xi0)
        return float(np.cos(self.alpha) * normsq**s)

    def field(self, grid: Grid, s: float, t: float) -> SphereField:
        scale = 2.0 * np.pi / grid.box_period
        phase = np.zeros(grid.shape)
        for m, x in zip(self.xi0, grid.coords()):
            phase = phase + scale * m * x
        phase = phase - self.omega(grid, s) * t
        u = np.stack([np.sin(self.alpha) * np.cos(phase),
                      np.sin(self.alpha) * np.sin(phase),
                      np.full(grid.shape, np.cos(self.alpha))])
        return SphereField(grid, u)

    def scalar(self, grid: Grid, s: float, t: float) -> Field:
        return project(self.field(grid, s, t))


# --- geometric stepping -----------------------------------------------------

def step_geometric(u: SphereField, dt: float, s: float,
                   cfg: SimConfig | None = None) -> SphereField:
    """One RK4 step of d/dt u = -u x (-Delta)^s u."""
    renorm = cfg.renormalize if cfg is not None else True
    k1 = geometric_rhs(u, s)
    k2 = geometric_rhs(SphereField(u.grid, u.u + 0.5 * dt * k1), s)
    k3 = geometric_rhs(SphereField(u.grid, u.u + 0.5 * dt * k2), s)
    k4 = geometric_rhs(SphereField(u.grid, u.u + dt * k3), s)
    out = SphereField(u.grid, u.u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    drift = out.norm_drift()
    if drift > DRIFT_GUARD:
        raise InstabilityError(
            f"sphere drift {drift:.3e} in one step exceeds {DRIFT_GUARD}; reduce dt")
    if renorm:
        out.u /= np.sqrt(np.sum(out.u**2, axis=0))
    return out


# --- scalar stepping --------------------------------------------------------

def _phi_coefficients(z: np.ndarray, which: str, contour_points: int = 32) -> np.ndarray:
    """Averaged-contour evaluation of the exponential-integrator weights.

    Each weight is analytic with a removable singularity at z = 0; averaging
    the closed form over z + e^{i theta} sidesteps the cancellation."""
    theta = np.exp(2j * np.pi * (np.arange(contour_points) + 0.5) / contour_points)
    zz = z[..., None] + theta
    ez = np.exp(zz)
    if which == "phi1":
        vals = (ez - 1.0) / zz
    elif which == "q":
        vals = (np.exp(zz / 2.0) - 1.0) / zz
    elif which == "f1":
        vals = (-4.0 - zz + ez * (4.0 - 3.0 * zz + zz**2)) / zz**3
    elif which == "f2":
        vals = (2.0 + zz + ez * (-2.0 + zz)) / zz**3
    elif which == "f3":
        vals = (-4.0 - 3.0 * zz - zz**2 + ez * (4.0 - zz)) / zz**3
    else:
        raise ParameterError(f"unknown coefficient {which!r}")
    return np.mean(vals, axis=-1)


class ScalarStepper:
    """Caches the propagator and phi-weights for a fixed (grid, s, dt)."""

    def __init__(self, grid: Grid, s: float, dt: float, integrator: str,
                 dealias_products: bool = True):
        if integrator not in ("exp_euler", "etd_rk4"):
            raise ConfigurationError(
                f"scalar integrator must be exp_euler or etd_rk4, got {integrator!r}")
        self.grid = grid
        self.s = s
        self.dt = dt
        self.integrator = integrator
        self.dealias_products = dealias_products
        z = -1j * dt * fractional_symbol(grid, s)
        self.E = np.exp(z)
        self.E2 = np.exp(z / 2.0)
        if integrator == "exp_euler":
            self.phi1 = _phi_coefficients(z, "phi1")
        else:
            self.Q = dt * _phi_coefficients(z, "q")
            self.f1 = dt * _phi_coefficients(z, "f1")
            self.f2 = dt * _phi_coefficients(z, "f2")
            self.f3 = dt * _phi_coefficients(z, "f3")

    def _nonlin_hat(self, fhat: np.ndarray) -> np.ndarray:
        """Spectral coefficients of -i N(f) from spectral coefficients of f."""
        f = Field(self.grid, fhat.copy(), SPECTRAL)
        nl = nonlin_total(to_physical(f), self.s, self.dealias_products)
        return -1j * to_spectral(nl).values

    def step(self, fhat: np.ndarray) -> np.ndarray:
        if self.integrator == "exp_euler":
            nu = self._nonlin_hat(fhat)
            return self.E * fhat + self.dt * self.phi1 * nu
        nu = self._nonlin_hat(fhat)
        a = self.E2 * fhat + self.Q * nu
        na = self._nonlin_hat(a)
        b = self.E2 * fhat + self.Q * na
        nb = self._nonlin_hat(b)
        c = self.E2 * a + self.Q * (2.0 * nb - nu)
        nc = self._nonlin_hat(c)
        return (self.E * fhat + self.f1 * nu + 2.0 * self.f2 * (na + nb)
                + self.f3 * nc)


def step_scalar(f: Field, dt: float, s: float, cfg: SimConfig) -> Field:
    """One exponential-integrator step of d/dt f = -i((-Delta)^s f + N(f))."""
    integrator = cfg.integrator if cfg.integrator != "rk4" else "etd_rk4"
    stepper = ScalarStepper(f.grid, s, dt, integrator, cfg.dealias)
    out_hat = stepper.step(to_spectral(f).values)
    out = Field(f.grid, out_hat, SPECTRAL)
    if not np.all(np.isfinite(out_hat)):
        raise InstabilityError("scalar step produced non-finite coefficients")
    return to_physical(out) if f.representation == PHYSICAL else out


# --- full runs with diagnostics ---------------------------------------------

def energy_s(values_hat: np.ndarray, grid: Grid, s: float) -> float:
    """E_s = sum_xi |xi|^{2s} |coef|^2, summed over leading components if any."""
    return float(np.sum(fractional_symbol(grid, s) * np.abs(values_hat) ** 2))


@dataclass
class RunResult:
    config: SimConfig
    times: np.ndarray
    trajectory: Trajectory           # scalar frames; projection L(u) for sphere runs
    diagnostics: dict                # arrays: t, besov_sigma, l2, energy_s, sphere_drift
    sphere_frames: np.ndarray | None = None
    completed: bool = True
    instability: str | None = None


def _diag_row(cfg, grid, t, f_vals, drift, uhat=None):
    f = Field(grid, f_vals, PHYSICAL)
    fhat = to_spectral(f).values
    e = energy_s(uhat if uhat is not None else fhat[None], grid, cfg.s)
    return (t, besov_norm(f, cfg.sigma), l2_norm(f), e, drift)


def run(cfg: SimConfig, initial) -> RunResult:
    """Integrate to T, recording frames and per-frame diagnostics every stride.

    Sphere-valued initial data runs the geometric RK4 flow; complex scalar
    data runs the configured exponential integrator.  An instability aborts
    the loop but preserves the partial trajectory (completed=False)."""
    grid = cfg.grid
    steps = int(round(cfg.T / cfg.dt))
    geometric = isinstance(initial, SphereField)
    rows, scalar_frames, sphere_frames, times = [], [], [], []
    instability = None

    if geometric:
        u = initial.copy()
    else:
        fhat = to_spectral(initial).values.copy()
        stepper = ScalarStepper(grid, cfg.s, cfg.dt,
                                cfg.integrator if cfg.integrator != "rk4" else "etd_rk4",
                                cfg.dealias)

    def record(t):
        if geometric:
            axes = tuple(range(1, grid.n + 1))
            uhat = np.fft.fftn(u.u, axes=axes) / grid.size
            f_vals = project(u).values
            rows.append(_diag_row(cfg, grid, t, f_vals, u.norm_drift(), uhat))
            sphere_frames.append(u.u.copy())
        else:
            f_vals = np.fft.ifftn(fhat) * grid.size
            rows.append(_diag_row(cfg, grid, t, f_vals, 0.0))
        scalar_frames.append(f_vals)
        times.append(t)

    record(0.0)
    for step_idx in range(1, steps + 1):
        try:
            if geometric:
                u = step_geometric(u, cfg.dt, cfg.s, cfg)
            else:
                fhat = stepper.step(fhat)
                if not np.all(np.isfinite(fhat)):
                    raise InstabilityError("non-finite spectral coefficients")
                if np.max(np.abs(np.fft.ifftn(fhat) * grid.size)) > SUP_GUARD:
                    raise InstabilityError(f"sup |f| exceeded {SUP_GUARD}")
        except InstabilityError as exc:
            instability = str(exc)
            break
        if step_idx % cfg.stride == 0:
            record(step_idx * cfg.dt)

    times = np.asarray(times)
    diag = {key: np.array([r[i] for r in rows])
            for i, key in enumerate(("t", "besov_sigma", "l2", "energy_s",
                                     "sphere_drift"))}
    traj = Trajectory(grid, times, np.stack(scalar_frames))
    return RunResult(cfg, times, traj, diag,
                     np.stack(sphere_frames) if geometric else None,
                     completed=instability is None, instability=instability)


# --- Duhamel--Picard iteration ----------------------------------------------

def psi_taper(t) -> np.ndarray:
    """Smooth window: 1 on [-1, 1], supported in [-2, 2]."""
    return smoothstep(2.0 - np.abs(np.asarray(t, dtype=float)))


def _cumulative_simpson(dt: float, values: np.ndarray) -> np.ndarray:
    """Cumulative integral from index 0 along axis 0 on a uniform grid.

    Even interval counts use composite Simpson; odd counts finish with the
    3/8 rule; a single interval falls back to the trapezoid."""
    m = values.shape[0]
    out = np.zeros_like(values)
    if m < 2:
        return out
    # composite Simpson partial sums at even indices
    for j in range(2, m, 2):
        out[j] = out[j - 2] + dt / 3.0 * (values[j - 2] + 4.0 * values[j - 1]
                                          + values[j])
    for j in range(1, m, 2):
        if j == 1:
            out[1] = dt / 2.0 * (values[0] + values[1])
        else:
            out[j] = out[j - 3] + 3.0 * dt / 8.0 * (
                values[j - 3] + 3.0 * values[j - 2] + 3.0 * values[j - 1]
                + values[j])
    return out


@dataclass
class PicardResult:
    iterates: list                 # Trajectory per iterate, window [-2, 2]
    d: list                        # sup_t Besov distance between iterates
    ratios: list
    non_contractive: bool


def picard_iterate(f0: Field, cfg: SimConfig, iterations: int,
                   frames: int = 64, window: float = 2.0) -> PicardResult:
    """Fixed-point iterates of the tapered Duhamel map on [-window, window].

    The propagator is pulled out of the integral, S(t-r) = S(t)S(-r), so each
    iterate costs one cumulative quadrature in r plus a final multiplication.
    """
    grid = f0.grid
    if frames % 2 != 0:
        raise ConfigurationError(f"frame count must be even, got {frames}")
    b0 = besov_norm(to_physical(f0), cfg.sigma)
    if b0 > 0.5:
        warnings.warn(f"initial Besov norm {b0:.3f} > 0.5; contraction may fail",
                      stacklevel=2)
    times = np.linspace(-window, window, frames + 1)
    dt = times[1] - times[0]
    half = frames // 2          # index of t = 0
    sym = fractional_symbol(grid, cfg.s)
    psi = psi_taper(times).reshape((frames + 1,) + (1,) * grid.n)
    s_t = np.exp(-1j * times.reshape((frames + 1,) + (1,) * grid.n) * sym)
    f0hat = to_spectral(f0).values

    free = psi * np.fft.ifftn(s_t * f0hat, axes=tuple(range(1, grid.n + 1))) * grid.size
    current = free
    iterates = [Trajectory(grid, times, free.copy())]
    d = []
    for _ in range(iterations):
        axes = tuple(range(1, grid.n + 1))
        g_hat = np.empty((frames + 1,) + grid.shape, dtype=np.complex128)
        for j in range(frames + 1):
            fr = Field(grid, current[j], PHYSICAL)
            g_hat[j] = to_spectral(nonlin_total(fr, cfg.s, cfg.dealias)).values
        integrand = np.conj(s_t) * g_hat          # S(-r) applied framewise
        cum = np.zeros_like(integrand)
        cum[half:] = _cumulative_simpson(dt, integrand[half:])
        cum[half::-1] = -_cumulative_simpson(dt, integrand[half::-1])
        duhamel_hat = -1j * s_t * cum
        new = psi * (np.fft.ifftn(s_t * f0hat + duhamel_hat, axes=axes) * grid.size)
        gap = 0.0
        for j in range(frames + 1):
            diff = Field(grid, new[j] - current[j], PHYSICAL)
            gap = max(gap, besov_norm(diff, cfg.sigma))
        d.append(gap)
        iterates.append(Trajectory(grid, times, new.copy()))
        current = new

    ratios = [d[i + 1] / d[i] if d[i] > 0 else 0.0 for i in range(len(d) - 1)]
    rising = sum(1 for i in range(len(d) - 1) if d[i + 1] > d[i])
    return PicardResult(iterates, d, ratios, non_contractive=rising >= 2)


# --- snapshot I/O -----------------------------------------------------------

SNAPSHOT_MAGIC = b"FSLAB\x00"


def write_snapshot(path, f, t: float, s: float):
    """Binary snapshot: header + little-endian complex128 coefficient dump.

    Header fields in order: magic, version(u16), n(u32), N(u32),
    box_period(f64), s(f64), t(f64), representation(u8: 0 physical,
    1 spectral), components(u8: 1 scalar, 3 sphere)."""
    if isinstance(f, SphereField):
        grid, comp, rep = f.grid, 3, 0
        data = f.u.astype(np.complex128)
    else:
        grid, comp = f.grid, 1
        rep = 0 if f.representation == PHYSICAL else 1
        data = f.values[None]
    header = SNAPSHOT_MAGIC + struct.pack(
        "<HIIdddBB", 1, grid.n, grid.N, grid.box_period, s, t, rep, comp)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.astype("<c16").tobytes())


def read_snapshot(path):
    """Returns (field, t, s); field is a Field or SphereField per the header."""
    with open(path, "rb") as fh:
        magic = fh.read(len(SNAPSHOT_MAGIC))
        if magic != SNAPSHOT_MAGIC:
            raise ConfigurationError(f"not a snapshot file: {path}")
        ver, n, N, box_period, s, t, rep, comp = struct.unpack(
            "<HIIdddBB", fh.read(struct.calcsize("<HIIdddBB")))
        if ver != 1:
            raise ConfigurationError(f"unsupported snapshot version {ver}")
        grid = Grid(int(n), int(N), box_period)
        raw = np.frombuffer(fh.read(), dtype="<c16")
    data = raw.reshape((comp,) + grid.shape).astype(np.complex128)
    if comp == 3:
        return SphereField(grid, data.real), t, s
    if comp != 1:
        raise ConfigurationError(f"unsupported component count {comp}")
    return Field(grid, data[0], PHYSICAL if rep == 0 else SPECTRAL), t, s
