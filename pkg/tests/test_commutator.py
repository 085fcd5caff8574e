import math

import numpy as np
import pytest

from fsmap.commutator import (a_m, d_alpha_h0, enumerate_pairings, h_s,
                              h_tilde, pairing_count, series_increment,
                              taylor_coefficient_C, taylor_truncation)
from fsmap.errors import ParameterError
from fsmap.experiments import _fd_d_alpha
from fsmap.spectral import (Field, Grid, PHYSICAL, constant,
                            fractional_laplacian, plane_wave,
                            random_band_limited, to_physical)


class TestCommutators:
    def test_hs_constant_g(self):
        g = Grid(1, 32)
        f = random_band_limited(g, np.random.default_rng(0), 8.0)
        out = h_s(f, constant(g, 2.0), 0.75, dealias_products=False)
        # (-Delta)^s(2f) - 2(-Delta)^s f - f * 0 = 0
        assert np.max(np.abs(out.values)) < 1e-11

    def test_s_equals_one_gradient_form(self):
        g = Grid(1, 64)
        rng = np.random.default_rng(1)
        f = random_band_limited(g, rng, 8.0)
        h = random_band_limited(g, rng, 8.0)
        out = h_s(f, h, 1.0, dealias_products=False)
        grad = lambda q: np.fft.ifftn(1j * np.broadcast_to(g.xi[0], g.shape)
                                      * np.fft.fftn(q.values))
        expected = -2.0 * grad(f) * grad(h)
        assert np.max(np.abs(out.values - expected)) < 1e-10

    def test_single_mode_symbol_identity(self):
        g = Grid(1, 64)
        s = 0.6
        f, h = plane_wave(g, (5,)), plane_wave(g, (3,))
        out = h_s(f, h, s, dealias_products=False)
        factor = 8.0 ** (2 * s) - 5.0 ** (2 * s) - 3.0 ** (2 * s)
        expected = factor * plane_wave(g, (8,)).values
        assert np.max(np.abs(out.values - expected)) < 1e-12

    def test_h_tilde_constant_f(self):
        g = Grid(1, 32)
        h = random_band_limited(g, np.random.default_rng(2), 8.0)
        out = h_tilde(constant(g, 1.0), h, 0.75, dealias_products=False)
        lap = fractional_laplacian(h, 0.75)
        assert np.max(np.abs(out.values - lap.values)) < 1e-11

    def test_h_tilde_relation(self):
        g = Grid(1, 32)
        rng = np.random.default_rng(3)
        f = random_band_limited(g, rng, 8.0)
        h = random_band_limited(g, rng, 8.0)
        lhs = h_tilde(f, h, 0.75, dealias_products=False).values
        rhs = (h_s(f, h, 0.75, dealias_products=False).values
               + to_physical(f).values
               * fractional_laplacian(h, 0.75).values)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_bilinearity(self):
        g = Grid(1, 32)
        rng = np.random.default_rng(4)
        f1 = random_band_limited(g, rng, 8.0)
        f2 = random_band_limited(g, rng, 8.0)
        h = random_band_limited(g, rng, 8.0)
        comb = Field(g, 2.0 * f1.values - 1j * f2.values, PHYSICAL)
        lhs = h_s(comb, h, 0.75).values
        rhs = 2.0 * h_s(f1, h, 0.75).values - 1j * h_s(f2, h, 0.75).values
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_symmetry(self):
        g = Grid(1, 32)
        rng = np.random.default_rng(5)
        f = random_band_limited(g, rng, 8.0)
        h = random_band_limited(g, rng, 8.0)
        assert np.max(np.abs(h_s(f, h, 0.6).values - h_s(h, f, 0.6).values)) < 1e-12


class TestCoefficients:
    def test_first_coefficients(self):
        s = 0.75
        assert taylor_coefficient_C(s, 1, 0) == pytest.approx(1.5)
        assert taylor_coefficient_C(s, 2, 0) == pytest.approx(-0.75)
        assert taylor_coefficient_C(s, 2, 1) == pytest.approx(1.5)

    def test_coefficient_bound(self):
        for s in (0.1, 0.4, 0.75, 1.0):
            for m in range(1, 7):
                for k in range(m // 2 + 1):
                    bound = 2.0 ** (m - k) * math.factorial(m - k)
                    assert abs(taylor_coefficient_C(s, m, k)) <= bound

    def test_domain_checks(self):
        with pytest.raises(ParameterError):
            taylor_coefficient_C(0.75, 0, 0)
        with pytest.raises(ParameterError):
            taylor_coefficient_C(0.75, 2, 2)

    def test_pairing_counts(self):
        assert pairing_count(2, 1) == 1
        assert pairing_count(4, 2) == 3
        assert pairing_count(6, 2) == 45

    def test_enumeration_matches_count(self):
        for m in range(1, 11):
            for k in range(m // 2 + 1):
                assert len(enumerate_pairings(m, k)) == pairing_count(m, k)

    def test_enumeration_disjoint_pairs(self):
        fam = enumerate_pairings(6, 2)
        for pairing in fam.pairings:
            flat = [i for p in pairing for i in p]
            assert len(flat) == len(set(flat))


class TestDAlpha:
    def test_first_order_value(self):
        # D^{e1} |xi - eta|^{2s} at 0 for xi = (2,0,0), s = 0.75:
        # one sign flip per derivative order
        val = d_alpha_h0((2.0, 0.0, 0.0), (1, 0, 0), 0.75)
        assert val == pytest.approx(-1.5 * 2.0**0.5, rel=1e-12)

    def test_mixed_second_order_s1_vanishes(self):
        assert d_alpha_h0((2.0, 1.0, 0.5), (1, 1, 0), 1.0) == pytest.approx(0.0)

    def test_zero_alpha_is_symbol(self):
        assert d_alpha_h0((3.0, 4.0), (0, 0), 0.5) == pytest.approx(5.0)

    def test_singular_at_origin(self):
        with pytest.raises(ParameterError):
            d_alpha_h0((0.0,), (1,), 0.75)

    def test_against_fd_oracle(self):
        rng = np.random.default_rng(6)
        s = 0.75
        for _ in range(25):
            n = int(rng.integers(1, 4))
            xi = rng.normal(size=n) * 10 ** rng.uniform(0, 2)
            while np.linalg.norm(xi) < 1e-3:
                xi = rng.normal(size=n)
            order = int(rng.integers(1, 5))
            alpha = np.zeros(n, dtype=int)
            for _ in range(order):
                alpha[rng.integers(0, n)] += 1
            exact = d_alpha_h0(xi, tuple(alpha), s)
            approx = _fd_d_alpha(xi, tuple(alpha), s)
            denom = max(abs(exact), np.linalg.norm(xi) ** (2 * s - order))
            assert abs(exact - approx) / denom < 1e-6


class TestTruncation:
    def test_order_zero_error_is_one(self):
        g = Grid(1, 256)
        _, err = taylor_truncation(plane_wave(g, (64,)), plane_wave(g, (2,)),
                                   0.75, 0)
        assert err == pytest.approx(1.0, rel=1e-12)

    def test_separation_enforced(self):
        g = Grid(1, 64)
        with pytest.raises(ParameterError):
            taylor_truncation(plane_wave(g, (8,)), plane_wave(g, (4,)), 0.75, 2)

    def test_geometric_decay(self):
        g = Grid(1, 256)
        f_hi, g_lo = plane_wave(g, (64,)), plane_wave(g, (4,))
        ratio = 4.0 / 64.0
        errs = []
        for M in range(1, 5):
            _, err = taylor_truncation(f_hi, g_lo, 0.75, M)
            assert err <= 4.0 * ratio ** (M + 1)
            errs.append(err)
        # each extra order buys at least one full power of the ratio
        for a, b in zip(errs, errs[1:]):
            assert b <= a * ratio * 4.0


class TestSeries:
    def test_increment_ratio_bound(self):
        for s in (0.1, 0.5, 0.75, 1.0):
            for n in (1, 2, 3):
                bound = n * 2.0 ** (1.0 - 10.0 * n) * math.e
                for m in range(1, 12):
                    prev = series_increment(s, n, m)
                    if prev == 0.0:   # s = 1 truncates the coefficient ladder
                        continue
                    assert series_increment(s, n, m + 1) / prev <= bound

    def test_a_m_positive(self):
        assert a_m(0.75, 1) == pytest.approx(1.5)
        assert a_m(0.75, 2) == pytest.approx(abs(-0.75) + 1.5)
