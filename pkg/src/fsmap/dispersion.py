"""Characteristic-surface multiplier analysis for the symbol tau + |xi|^{2s}.

With xi = xi1 e + xi' split along a direction e, the symbol factors through
g(t) = (t^2 + |xi'|^2)^s:

    tau + |xi|^{2s} = g(xi1) - g(N) = (L + K)(xi1 - N),

where N(xi',tau) = ((-tau)^{1/s} - |xi'|^2)^{1/2} solves g(N) = -tau,
K = g'(N) = 2s(N^2+|xi'|^2)^{s-1} N, and L is the difference-quotient
remainder (L -> g''(N)(xi1-N)/2 as xi1 -> N).

Precision: admissible points carry the modulation offset delta = tau+|xi|^{2s}
exactly; xi1^2 - N^2 and related small differences are evaluated through
expm1/log1p chains so the factorization check is meaningful at machine
precision even when delta is 2^{-8} of a percent of |xi|^{2s}.

Sampling is over continuum (real-valued) frequencies: the statements are about
the symbol, not any grid.  The dyadic scales are desk-sized, k in [10, 30]
with modulation offset exponent -8; the structural conclusions are scale-free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError, ParameterError

K_RANGE = (10, 30)
MODULATION_OFFSET = -8


def _check_s(s: float):
    if not 0.0 < s <= 1.0:
        raise ParameterError(f"s must lie in (0, 1], got {s}")


def big_n(xi_perp_normsq: float, tau: float, s: float) -> float:
    """N(xi', tau) = ((-tau)^{1/s} - |xi'|^2)^{1/2}."""
    _check_s(s)
    if not tau < 0:
        raise NumericalDomainError(f"need tau < 0, got tau={tau}")
    inner = (-tau) ** (1.0 / s) - xi_perp_normsq
    if inner < 0:
        raise NumericalDomainError(
            f"need (-tau)^(1/s) >= |xi'|^2, got {(-tau) ** (1.0 / s)} < {xi_perp_normsq}")
    return math.sqrt(inner)


def big_k(xi_perp_normsq: float, tau: float, s: float) -> float:
    """K = 2s (N^2 + |xi'|^2)^{s-1} N = g'(N); positive on the domain."""
    n = big_n(xi_perp_normsq, tau, s)
    return 2.0 * s * (n * n + xi_perp_normsq) ** (s - 1.0) * n


@dataclass(frozen=True)
class AdmissiblePoint:
    """One continuum sample of the multiplier hypotheses.

    xi = xi1 e + xi' with |xi| in [2^{k-1}, 2^{k+1}], xi1 in
    [2^{k'-1}, 2^{k'+1}], k' in [ceil(4k/5), k+1], and the modulation
    delta = tau + |xi|^{2s} bounded by 2^{2k(s+q-1)-8}, q = k'/k.  delta is
    stored exactly; tau = delta - |xi|^{2s} is derived."""

    e: tuple
    k: int
    k_prime: int
    xi1: float
    xi_perp_normsq: float
    delta: float
    s: float

    def __post_init__(self):
        _check_s(self.s)
        if not K_RANGE[0] <= self.k <= K_RANGE[1]:
            raise ParameterError(f"k must lie in {K_RANGE}, got {self.k}")
        lo = math.ceil(4 * self.k / 5)
        if not lo <= self.k_prime <= self.k + 1:
            raise ParameterError(
                f"k' must lie in [{lo}, {self.k + 1}], got {self.k_prime}")
        if not 2.0 ** (self.k_prime - 1) <= self.xi1 <= 2.0 ** (self.k_prime + 1):
            raise ParameterError(f"xi1={self.xi1} outside its dyadic shell")
        norm = math.sqrt(self.xi_normsq)
        if not 2.0 ** (self.k - 1) <= norm <= 2.0 ** (self.k + 1):
            raise ParameterError(f"|xi|={norm} outside its dyadic shell")
        if abs(self.delta) > self.modulation_bound():
            raise ParameterError(
                f"modulation {self.delta} exceeds bound {self.modulation_bound()}")
        if self.tau >= 0:
            raise ParameterError("tau must be negative")

    @property
    def q(self) -> float:
        return self.k_prime / self.k

    @property
    def xi_normsq(self) -> float:
        return self.xi1 * self.xi1 + self.xi_perp_normsq

    @property
    def tau(self) -> float:
        return self.delta - self.xi_normsq ** self.s

    def modulation_bound(self) -> float:
        return 2.0 ** (2.0 * self.k * (self.s + self.q - 1.0) + MODULATION_OFFSET)

    # -- cancellation-free internals ------------------------------------

    def n_squared_minus_xi1sq(self) -> float:
        """N^2 - xi1^2 = (-tau)^{1/s} - |xi|^2, via expm1/log1p in delta."""
        a = self.xi_normsq
        return a * math.expm1(math.log1p(-self.delta / a**self.s) / self.s)

    def big_n(self) -> float:
        val = self.xi1 * self.xi1 + self.n_squared_minus_xi1sq()
        if val < 0:
            raise NumericalDomainError("admissible point left the multiplier domain")
        return math.sqrt(val)

    def xi1_minus_n(self) -> float:
        n = self.big_n()
        return -self.n_squared_minus_xi1sq() / (self.xi1 + n)

    def big_k(self) -> float:
        n = self.big_n()
        return 2.0 * self.s * (n * n + self.xi_perp_normsq) ** (self.s - 1.0) * n

    def big_l(self) -> float:
        """L from its defining quotient; 0 in the xi1 = N limit."""
        gap = self.xi1_minus_n()
        if gap == 0.0:
            return 0.0
        return self.delta / gap - self.big_k()


def factorization_residual(point: AdmissiblePoint, s: float | None = None) -> float:
    """|delta - (L+K)(xi1-N)| / max(|delta|, eps); zero up to roundoff."""
    if s is not None and s != point.s:
        raise ParameterError("s disagrees with the point's s")
    gap = point.xi1_minus_n()
    recon = (point.big_l() + point.big_k()) * gap
    return abs(point.delta - recon) / max(abs(point.delta), np.finfo(float).eps)


def sample_admissible(k: int, k_prime: int, s: float, count: int,
                      rng: np.random.Generator, n_dim: int = 3) -> list:
    """Random admissible points at the given dyadic scales."""
    _check_s(s)
    if count < 1:
        raise ParameterError("need at least one sample")
    points = []
    for _ in range(count):
        xi1_hi = min(2.0 ** (k_prime + 1), 2.0 ** (k + 1))
        xi1 = 2.0 ** (k_prime - 1) * math.exp(
            rng.uniform(0, math.log(xi1_hi / 2.0 ** (k_prime - 1))))
        norm_lo = max(2.0 ** (k - 1), xi1)
        norm = norm_lo * math.exp(rng.uniform(0, math.log(2.0 ** (k + 1) / norm_lo)))
        xi_perp_normsq = (norm - xi1) * (norm + xi1)
        e = rng.standard_normal(n_dim)
        e = tuple(e / np.linalg.norm(e))
        q = k_prime / k
        bound = 2.0 ** (2.0 * k * (s + q - 1.0) + MODULATION_OFFSET)
        delta = rng.choice([-1.0, 1.0]) * bound * 10.0 ** rng.uniform(-4, 0)
        points.append(AdmissiblePoint(e, k, k_prime, xi1, xi_perp_normsq, delta, s))
    return points


def lemma_multiplier_check(k: int, k_prime: int, s: float, sample_count: int,
                           seed: int) -> dict:
    """Sampled check of the two multiplier conclusions at scales (k, k').

    (a) N lands in the shell [2^{k'-2}, 2^{k'+2}] for every sample;
    (b) |tau + |xi|^{2s}| / (2^{k(2s-2+q)} |xi1 - N|) stays within [1/32, 32].
    """
    rng = np.random.default_rng(seed)
    points = sample_admissible(k, k_prime, s, sample_count, rng)
    if not points:
        raise ParameterError("empty admissible sample set")
    q = k_prime / k
    comparator = 2.0 ** (k * (2.0 * s - 2.0 + q))
    in_range = 0
    ratios = []
    for p in points:
        n = p.big_n()
        if 2.0 ** (k_prime - 2) <= n <= 2.0 ** (k_prime + 2):
            in_range += 1
        gap = abs(p.xi1_minus_n())
        if gap > 0:
            ratios.append(abs(p.delta) / (comparator * gap))
    ratios = np.asarray(ratios)
    report = {
        "k": k, "k_prime": k_prime, "s": s, "samples": sample_count,
        "n_in_range_fraction": in_range / len(points),
        "ratio_min": float(np.min(ratios)),
        "ratio_max": float(np.max(ratios)),
    }
    report["passed"] = (report["n_in_range_fraction"] == 1.0
                        and 1.0 / 32.0 <= report["ratio_min"]
                        and report["ratio_max"] <= 32.0)
    return report


def l_magnitude_check(points: list) -> dict:
    """min/max of |L| / (2^{k(2s-2)} |xi1 - N|) over points with xi1 != N."""
    ratios = []
    for p in points:
        gap = p.xi1_minus_n()
        if gap == 0.0:
            continue
        ratios.append(abs(p.big_l()) / (2.0 ** (p.k * (2.0 * p.s - 2.0)) * abs(gap)))
    if not ratios:
        raise ParameterError("no points with xi1 != N")
    ratios = np.asarray(ratios)
    report = {
        "samples": len(ratios),
        "ratio_min": float(np.min(ratios)),
        "ratio_max": float(np.max(ratios)),
    }
    report["passed"] = 1.0 / 64.0 <= report["ratio_min"] and report["ratio_max"] <= 64.0
    return report
