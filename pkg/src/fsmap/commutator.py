"""Fractional Leibniz commutators and their Taylor-coefficient machinery.

The two-argument commutator is the Leibniz defect of (-Delta)^s,

    h_s(f,g)     = (-Delta)^s(fg) - ((-Delta)^s f) g - f (-Delta)^s g,
    h_tilde(f,g) = (-Delta)^s(fg) - ((-Delta)^s f) g,

and the Taylor machinery expands the one-sided symbol |xi|^{2s} - |xi-eta|^{2s}
in the low frequency eta.  The closed form for the eta-derivatives at 0 is the
pairing sum

    (-1)^m |xi|^{2s-m} [ C^0_{s,m} R^{i_1}...R^{i_m}
                          + sum_k C^k_{s,m} sum_{p in P_k} delta^p prod R^j ],

with C^j_{s,m} = 2s(2s-2)...(2s-2(m-j-1)), R^j = xi_j/|xi|, and P_k the set of
k disjoint unordered index pairs.  Sign convention: differentiating
h(eta) = |xi-eta|^{2s} in eta flips the sign once per order, hence the (-1)^m
relative to the xi-derivatives of |xi|^{2s}; the finite-difference oracle in
the tests pins this down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import ParameterError
from .spectral import (Field, Grid, PHYSICAL, SPECTRAL, dealias,
                       fractional_laplacian, inverse_transform, l2_norm,
                       to_physical, to_spectral)

ALPHA_CAP = 6


def _product(f: Field, g: Field, dealias_products: bool) -> Field:
    out = Field(f.grid, to_physical(f).values * to_physical(g).values, PHYSICAL)
    if dealias_products:
        out = dealias(out)
    return out


def h_s(f: Field, g: Field, s: float, dealias_products: bool = True) -> Field:
    """Two-sided commutator (-Delta)^s(fg) - ((-Delta)^s f)g - f(-Delta)^s g."""
    lap_fg = fractional_laplacian(_product(f, g, dealias_products), s)
    lf_g = _product(fractional_laplacian(f, s), g, dealias_products)
    f_lg = _product(f, fractional_laplacian(g, s), dealias_products)
    vals = (to_physical(lap_fg).values - to_physical(lf_g).values
            - to_physical(f_lg).values)
    return Field(f.grid, vals, PHYSICAL)


def h_tilde(f: Field, g: Field, s: float, dealias_products: bool = True) -> Field:
    """One-sided commutator (-Delta)^s(fg) - ((-Delta)^s f)g."""
    lap_fg = fractional_laplacian(_product(f, g, dealias_products), s)
    lf_g = _product(fractional_laplacian(f, s), g, dealias_products)
    vals = to_physical(lap_fg).values - to_physical(lf_g).values
    return Field(f.grid, vals, PHYSICAL)


def taylor_coefficient_C(s: float, m: int, j: int) -> float:
    """C^j_{s,m} = 2s(2s-2)(2s-4)...(2s-2(m-j-1)); empty product is 1."""
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if not 0 <= j <= m // 2:
        raise ParameterError(f"j must lie in [0, m//2], got j={j}, m={m}")
    out = 1.0
    for i in range(m - j):
        out *= 2.0 * s - 2.0 * i
    return out


def pairing_count(m: int, k: int) -> int:
    """m! / ((m-2k)! 2^k k!): number of sets of k disjoint unordered pairs."""
    if not 0 <= 2 * k <= m:
        raise ParameterError(f"need 0 <= 2k <= m, got m={m}, k={k}")
    if m > 20:
        raise ParameterError(f"pairing counts overflow beyond m=20, got m={m}")
    return math.factorial(m) // (math.factorial(m - 2 * k) * 2**k * math.factorial(k))


@dataclass(frozen=True)
class PairingFamily:
    """All ways to choose k disjoint unordered pairs from m slots."""

    m: int
    k: int
    pairings: tuple  # tuple of tuples of (i, j) index pairs, 0-based slots

    def __len__(self):
        return len(self.pairings)


@lru_cache(maxsize=None)
def enumerate_pairings(m: int, k: int) -> PairingFamily:
    if not 0 <= 2 * k <= m:
        raise ParameterError(f"need 0 <= 2k <= m, got m={m}, k={k}")
    if m > 20:
        raise ParameterError(f"pairing enumeration overflows beyond m=20, got m={m}")

    def recurse(slots, pairs_left):
        if pairs_left == 0:
            yield ()
            return
        # pair the smallest remaining slot to avoid duplicates
        first = slots[0]
        for j in range(1, len(slots)):
            partner = slots[j]
            rest = slots[1:j] + slots[j + 1:]
            for tail in recurse(rest, pairs_left - 1):
                yield ((first, partner),) + tail

    # unpaired slots may remain: choose which 2k slots participate
    out = []
    for chosen in combinations(range(m), 2 * k):
        for pairing in recurse(chosen, k):
            out.append(pairing)
    return PairingFamily(m, k, tuple(out))


def _alpha_slots(alpha) -> list:
    """Multi-index -> explicit slot list, e.g. (2,1) -> [0,0,1]."""
    slots = []
    for axis, count in enumerate(alpha):
        if count < 0:
            raise ParameterError(f"multi-index entries must be >= 0, got {alpha}")
        slots.extend([axis] * int(count))
    return slots


def d_alpha_h0(xi, alpha, s: float) -> float:
    """D^alpha_eta |xi - eta|^{2s} at eta = 0, closed form."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    norm = float(np.linalg.norm(xi))
    if norm == 0.0:
        raise ParameterError("the symbol is singular at xi = 0")
    slots = _alpha_slots(alpha)
    m = len(slots)
    if m == 0:
        return norm ** (2.0 * s)
    if m > ALPHA_CAP:
        raise ParameterError(f"|alpha| capped at {ALPHA_CAP}, got {m}")
    R = xi / norm
    total = taylor_coefficient_C(s, m, 0) * float(np.prod([R[i] for i in slots]))
    for k in range(1, m // 2 + 1):
        coeff = taylor_coefficient_C(s, m, k)
        acc = 0.0
        for pairing in enumerate_pairings(m, k).pairings:
            paired = set()
            match = True
            for (a, b) in pairing:
                if slots[a] != slots[b]:
                    match = False
                    break
                paired.update((a, b))
            if not match:
                continue
            free = [slots[i] for i in range(m) if i not in paired]
            acc += float(np.prod([R[i] for i in free])) if free else 1.0
        total += coeff * acc
    return float((-1.0) ** m * norm ** (2.0 * s - m) * total)


def _d_alpha_symbol(grid: Grid, alpha, s: float) -> np.ndarray:
    """Vectorized -D^alpha h(0)/alpha! over the frequency lattice (0 at xi=0)."""
    slots = _alpha_slots(alpha)
    m = len(slots)
    norm = grid.xi_norm
    nz = norm > 0
    R = []
    for x in grid.xi:
        r = np.zeros(grid.shape)
        r[nz] = np.broadcast_to(x, grid.shape)[nz] / norm[nz]
        R.append(r)
    total = taylor_coefficient_C(s, m, 0) * np.prod([R[i] for i in slots], axis=0)
    for k in range(1, m // 2 + 1):
        coeff = taylor_coefficient_C(s, m, k)
        acc = np.zeros(grid.shape)
        for pairing in enumerate_pairings(m, k).pairings:
            paired = set()
            match = True
            for (a, b) in pairing:
                if slots[a] != slots[b]:
                    match = False
                    break
                paired.update((a, b))
            if not match:
                continue
            free = [slots[i] for i in range(m) if i not in paired]
            acc = acc + (np.prod([R[i] for i in free], axis=0) if free
                         else np.ones(grid.shape))
        total = total + coeff * acc
    out = np.zeros(grid.shape)
    alpha_fact = float(np.prod([math.factorial(int(a)) for a in alpha]))
    out[nz] = -((-1.0) ** m) * norm[nz] ** (2.0 * s - m) * total[nz] / alpha_fact
    return out


def _multi_indices(n: int, order: int):
    """All multi-indices of length n with |alpha| = order."""
    if n == 1:
        yield (order,)
        return
    for first in range(order + 1):
        for rest in _multi_indices(n - 1, order - first):
            yield (first,) + rest


def taylor_truncation(f_hi: Field, g_lo: Field, s: float, M: int,
                      separation: int = 4) -> tuple:
    """Order-M Taylor surrogate of h_tilde(f_hi, g_lo) and its relative error.

    f_hi must be spectrally supported in a dyadic block k1, g_lo below
    k1 - separation.  Each order-|alpha| term applies the output-frequency
    symbol -D^alpha h(0)/alpha! to the product of f_hi with the spectral
    derivative eta^alpha of g_lo.
    """
    grid = f_hi.grid
    fhat = to_spectral(f_hi).values
    ghat = to_spectral(g_lo).values
    occ_f = grid.xi_norm[np.abs(fhat) > 1e-14 * np.max(np.abs(fhat) + 1e-300)]
    occ_g = grid.xi_norm[np.abs(ghat) > 1e-14 * np.max(np.abs(ghat) + 1e-300)]
    if occ_f.size == 0:
        raise ParameterError("f_hi is identically zero")
    if occ_g.size and np.max(occ_g) > np.min(occ_f) / 2**separation:
        raise ParameterError(
            "frequency separation violated: g_lo must sit at least "
            f"{separation} octaves below f_hi")

    exact = h_tilde(f_hi, g_lo, s, dealias_products=False)
    approx = np.zeros(grid.shape, dtype=np.complex128)
    f_phys = to_physical(f_hi).values
    for order in range(1, M + 1):
        if order > ALPHA_CAP:
            raise ParameterError(f"truncation order capped at {ALPHA_CAP}")
        for alpha in _multi_indices(grid.n, order):
            eta_alpha = np.ones(grid.shape)
            for axis, a in enumerate(alpha):
                if a:
                    eta_alpha = eta_alpha * np.broadcast_to(grid.xi[axis],
                                                            grid.shape) ** a
            g_deriv = inverse_transform(Field(grid, eta_alpha * ghat, SPECTRAL)).values
            prod_hat = np.fft.fftn(f_phys * g_deriv) / grid.size
            approx += _d_alpha_symbol(grid, alpha, s) * prod_hat
    approx_field = inverse_transform(Field(grid, approx, SPECTRAL))
    denom = l2_norm(exact)
    diff = l2_norm(Field(grid, approx_field.values - to_physical(exact).values,
                         PHYSICAL))
    err = diff / max(denom, np.finfo(float).eps)
    return approx_field, float(err)


def a_m(s: float, m: int) -> float:
    """sum_k |C^k_{s,m}| |P_k|, the coefficient aggregate of the Taylor series."""
    return sum(abs(taylor_coefficient_C(s, m, k)) * pairing_count(m, k)
               for k in range(m // 2 + 1))


def series_increment(s: float, n: int, m: int) -> float:
    """a_m * (sum over |alpha|=m of 1/alpha!) * 2^{-10 n m} = a_m n^m/m! 2^{-10nm}.

    The partial sums of these increments converge geometrically; the ratio of
    consecutive increments is the computable stand-in for the series bound."""
    return a_m(s, m) * n**m / math.factorial(m) * 2.0 ** (-10.0 * n * m)
