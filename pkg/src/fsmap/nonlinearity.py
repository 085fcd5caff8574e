"""The scalar nonlinearity driving the stereographic evolution.

    N(f) = H_s(f, w) + f w H_s(f, conj f) + f H_s(|f|^2, w) - f^2 H_s(conj f, w),

with w = 1/(1+|f|^2) evaluated pointwise in physical space.  The rational
factor is never expanded in a Neumann series (exact evaluation is
unconditionally stable).  All four commutators share the transforms of f, w
and |f|^2; this matters because the residual and solver loops evaluate N(f)
thousands of times.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError, ParameterError
from .spectral import Field, PHYSICAL, fractional_symbol


@dataclass
class NonlinearityBreakdown:
    """The four summands of N(f) and their total (total = sum, fixed order)."""

    term1: Field
    term2: Field
    term3: Field
    term4: Field
    total: Field


def _nonlin_terms(f: Field, s: float, dealias_products: bool) -> list:
    """Physical-space values of the four terms of N(f), shared transforms."""
    if not 0.0 < s <= 1.0:
        raise ParameterError(f"s must lie in (0, 1], got {s}")
    grid = f.grid
    fv = f.values if f.representation == PHYSICAL else \
        np.fft.ifftn(f.values) * grid.size
    if np.max(np.abs(fv)) > 10.0:
        raise NumericalDomainError("require |f| <= 10 for a well-conditioned 1/(1+|f|^2)")

    sym = fractional_symbol(grid, s)
    mask = grid.dealias_mask if dealias_products else None

    def lap(v):
        return np.fft.ifftn(sym * np.fft.fftn(v))

    def lap_cut(v):  # (-Delta)^s of a dealiased product, one spectral pass
        vh = np.fft.fftn(v)
        if mask is not None:
            vh = np.where(mask, vh, 0.0)
        return np.fft.ifftn(sym * vh)

    def cut(v):
        if mask is None:
            return v
        return np.fft.ifftn(np.where(mask, np.fft.fftn(v), 0.0))

    absq = np.abs(fv) ** 2
    w = 1.0 / (1.0 + absq)
    lap_f = lap(fv)
    lap_w = lap(w.astype(np.complex128))
    lap_absq = lap(absq.astype(np.complex128))

    def commutator(a, lap_a, b, lap_b):
        return lap_cut(a * b) - cut(lap_a * b) - cut(a * lap_b)

    h_f_w = commutator(fv, lap_f, w, lap_w)
    h_f_fbar = commutator(fv, lap_f, np.conj(fv), np.conj(lap_f))
    h_absq_w = commutator(absq, lap_absq, w, lap_w)
    h_fbar_w = commutator(np.conj(fv), np.conj(lap_f), w, lap_w)

    return [h_f_w, fv * w * h_f_fbar, fv * h_absq_w, -(fv**2) * h_fbar_w], lap_f


def nonlin(f: Field, s: float, dealias_products: bool = True) -> NonlinearityBreakdown:
    """Term-by-term evaluation of N(f)."""
    terms, _ = _nonlin_terms(f, s, dealias_products)
    total = terms[0] + terms[1] + terms[2] + terms[3]
    wrap = lambda v: Field(f.grid, v, PHYSICAL)
    return NonlinearityBreakdown(*[wrap(t) for t in terms], wrap(total))


def nonlin_total(f: Field, s: float, dealias_products: bool = True) -> Field:
    terms, _ = _nonlin_terms(f, s, dealias_products)
    return Field(f.grid, terms[0] + terms[1] + terms[2] + terms[3], PHYSICAL)


def scalar_rhs(f: Field, s: float, dealias_products: bool = True) -> Field:
    """d/dt f = -i((-Delta)^s f + N(f))."""
    terms, lap_f = _nonlin_terms(f, s, dealias_products)
    return Field(f.grid, -1j * (lap_f + terms[0] + terms[1] + terms[2] + terms[3]),
                 PHYSICAL)


def nonlin_difference(f: Field, g: Field, s: float,
                      dealias_products: bool = True) -> Field:
    """N(f) - N(g), evaluated term-by-term for exact cancellation at f = g."""
    tf, _ = _nonlin_terms(f, s, dealias_products)
    tg, _ = _nonlin_terms(g, s, dealias_products)
    vals = sum(a - b for a, b in zip(tf, tg))
    return Field(f.grid, vals, PHYSICAL)
