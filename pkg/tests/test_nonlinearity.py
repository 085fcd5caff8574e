import numpy as np
import pytest

from fsmap.errors import NumericalDomainError, ParameterError
from fsmap.nonlinearity import (nonlin, nonlin_difference, nonlin_total,
                                scalar_rhs)
from fsmap.spectral import (Field, Grid, PHYSICAL, constant, l2_norm,
                            plane_wave, random_band_limited, zeros)


def _small_field(grid, seed, eps):
    f = random_band_limited(grid, np.random.default_rng(seed), 4.0)
    return Field(grid, eps * f.values / np.max(np.abs(f.values)), PHYSICAL)


class TestTrivialInputs:
    def test_zero(self):
        g = Grid(1, 32)
        assert l2_norm(nonlin_total(zeros(g), 0.75)) == 0.0

    def test_constant(self):
        g = Grid(2, 16)
        out = nonlin_total(constant(g, 0.4 - 0.1j), 0.6)
        assert np.max(np.abs(out.values)) < 1e-13

    def test_rejects_large_field(self):
        g = Grid(1, 16)
        with pytest.raises(NumericalDomainError):
            nonlin_total(constant(g, 20.0), 0.75)

    def test_rejects_bad_s(self):
        g = Grid(1, 16)
        with pytest.raises(ParameterError):
            nonlin_total(zeros(g), 1.5)


class TestPlaneWave:
    def test_term2_only(self):
        g = Grid(1, 64)
        rho, s = 0.3, 0.75
        f = plane_wave(g, (3,), rho)
        parts = nonlin(f, s, dealias_products=False)
        for t in (parts.term1, parts.term3, parts.term4):
            assert np.max(np.abs(t.values)) < 1e-13
        expected = -2.0 * rho**2 * 3.0 ** (2 * s) / (1.0 + rho**2) * f.values
        assert np.max(np.abs(parts.term2.values - expected)) < 1e-12

    def test_scalar_rhs_dispersion(self):
        # exact relation d/dt f = -i omega f with
        # omega = |xi0|^{2s} (1 - rho^2)/(1 + rho^2)
        g = Grid(1, 64)
        rho, s = 0.2, 0.6
        f = plane_wave(g, (2,), rho)
        out = scalar_rhs(f, s, dealias_products=False)
        omega = 2.0 ** (2 * s) * (1.0 - rho**2) / (1.0 + rho**2)
        assert np.max(np.abs(out.values - (-1j) * omega * f.values)) < 1e-12


class TestScaling:
    def test_cubic_order(self):
        g = Grid(1, 32)
        base = _small_field(g, 0, 1.0)
        norms = {}
        for eps in (1e-2, 1e-3):
            f = Field(g, eps * base.values, PHYSICAL)
            norms[eps] = l2_norm(nonlin_total(f, 0.75)) / eps**3
        assert abs(norms[1e-2] / norms[1e-3] - 1.0) < 0.05

    def test_gauge_invariance(self):
        g = Grid(2, 16)
        f = _small_field(g, 1, 0.1)
        theta = 0.7
        rotated = Field(g, np.exp(1j * theta) * f.values, PHYSICAL)
        lhs = nonlin_total(rotated, 0.75).values
        rhs = np.exp(1j * theta) * nonlin_total(f, 0.75).values
        assert np.max(np.abs(lhs - rhs)) < 1e-13


class TestDifference:
    def test_exact_zero_at_equal_arguments(self):
        g = Grid(1, 32)
        f = _small_field(g, 2, 0.2)
        out = nonlin_difference(f, f, 0.75)
        assert np.max(np.abs(out.values)) == 0.0

    def test_reduces_to_nonlin_at_zero(self):
        g = Grid(1, 32)
        f = _small_field(g, 3, 0.2)
        diff = nonlin_difference(f, zeros(g), 0.75).values
        assert np.max(np.abs(diff - nonlin_total(f, 0.75).values)) < 1e-14

    def test_quadratic_lipschitz_scaling(self):
        # ||N(f) - N(g)|| ~ eps^2 ||f - g|| for data of size eps
        g = Grid(1, 32)
        base = _small_field(g, 4, 1.0)
        pert = _small_field(g, 5, 1.0)
        ratios = {}
        for eps in (1e-2, 1e-3):
            f = Field(g, eps * base.values, PHYSICAL)
            h = Field(g, eps * (base.values + 0.1 * pert.values), PHYSICAL)
            gap = l2_norm(Field(g, f.values - h.values, PHYSICAL))
            ratios[eps] = l2_norm(nonlin_difference(f, h, 0.75)) / gap
        scale = ratios[1e-2] / ratios[1e-3]
        assert 100.0 / 4.0 <= scale <= 100.0 * 4.0


class TestBreakdown:
    def test_total_matches_sum_bitwise(self):
        g = Grid(1, 32)
        f = _small_field(g, 6, 0.3)
        parts = nonlin(f, 0.75)
        summed = (parts.term1.values + parts.term2.values
                  + parts.term3.values + parts.term4.values)
        assert np.array_equal(parts.total.values, summed)
        assert np.array_equal(nonlin_total(f, 0.75).values, summed)
