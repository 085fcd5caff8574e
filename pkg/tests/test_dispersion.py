import numpy as np
import pytest

from fsmap.dispersion import (AdmissiblePoint, big_k, big_n,
                              factorization_residual, l_magnitude_check,
                              lemma_multiplier_check, sample_admissible)
from fsmap.errors import NumericalDomainError, ParameterError


class TestBigN:
    def test_exact_powers(self):
        assert big_n(0.0, -8.0, 0.75) == pytest.approx(4.0)

    def test_constructed_inverse(self):
        assert big_n(9.0, -(25.0**0.75), 0.75) == pytest.approx(4.0)

    def test_continuity_in_tau(self):
        base = big_n(9.0, -(25.0**0.75), 0.75)
        bumped = big_n(9.0, -(25.0**0.75) + 1e-9, 0.75)
        assert abs(bumped - base) <= 1e-6

    def test_domain_errors(self):
        with pytest.raises(NumericalDomainError):
            big_n(0.0, 1.0, 0.75)
        with pytest.raises(NumericalDomainError):
            big_n(100.0, -1.0, 0.75)
        with pytest.raises(ParameterError):
            big_n(0.0, -8.0, 1.5)


class TestBigK:
    def test_hand_value(self):
        # N = 4, (N^2)^{-1/4} = 1/2, K = 1.5 * 0.5 * 4 = 3
        assert big_k(0.0, -8.0, 0.75) == pytest.approx(3.0)

    def test_homogeneity(self):
        s = 0.6
        lam = 3.0
        base = big_k(4.0, -30.0, s)
        scaled = big_k(lam**2 * 4.0, lam ** (2 * s) * (-30.0), s)
        assert scaled == pytest.approx(lam ** (2 * s - 1) * base, rel=1e-12)

    def test_positive_on_domain(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            perp = rng.uniform(0.0, 10.0)
            tau = -rng.uniform((perp ** 0.75) + 0.1, 100.0)
            assert big_k(perp, tau, 0.75) > 0.0


class TestAdmissiblePoint:
    def test_shell_validation(self):
        with pytest.raises(ParameterError):
            AdmissiblePoint((1.0, 0.0, 0.0), 20, 18, 1.0, 0.0, 0.0, 0.75)

    def test_k_prime_window(self):
        with pytest.raises(ParameterError):
            AdmissiblePoint((1.0, 0.0, 0.0), 20, 10, 2.0**10, 0.0, 0.0, 0.75)

    def test_modulation_bound_enforced(self):
        k, kp, s = 20, 18, 0.75
        xi1 = 2.0**18
        normsq = (2.0**19) ** 2
        with pytest.raises(ParameterError):
            AdmissiblePoint((1.0, 0.0, 0.0), k, kp, xi1, normsq - xi1**2,
                            1e12, s)

    def test_sampler_produces_valid_points(self):
        pts = sample_admissible(20, 18, 0.75, 50, np.random.default_rng(1))
        assert len(pts) == 50
        for p in pts:
            assert abs(p.delta) <= p.modulation_bound()
            assert p.tau < 0


class TestFactorization:
    def test_zero_gap_is_exact(self):
        # delta = 0 forces N = xi1 and both sides vanish
        p = AdmissiblePoint((1.0, 0.0, 0.0), 20, 20, 2.0**20, 1.0, 0.0, 0.75)
        assert p.xi1_minus_n() == pytest.approx(0.0, abs=1e-12)
        assert factorization_residual(p) == 0.0

    @pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
    def test_random_points(self, s):
        rng = np.random.default_rng(2)
        for p in sample_admissible(20, 18, s, 200, rng):
            assert factorization_residual(p) <= 1e-10

    def test_s_equals_one_quadratic_case(self):
        rng = np.random.default_rng(3)
        for p in sample_admissible(15, 13, 1.0, 50, rng):
            # L = xi1 - N exactly when g is quadratic
            gap = p.xi1_minus_n()
            assert abs(p.big_l() - gap) <= 1e-7 * max(abs(gap), 1e-9 * p.xi1)
            assert factorization_residual(p) <= 1e-10

    def test_s_mismatch_rejected(self):
        p = sample_admissible(20, 18, 0.75, 1, np.random.default_rng(4))[0]
        with pytest.raises(ParameterError):
            factorization_residual(p, 0.6)


class TestLemmaChecks:
    def test_main_scales(self):
        report = lemma_multiplier_check(20, 18, 0.75, 2000, seed=5)
        assert report["passed"]
        assert report["n_in_range_fraction"] == 1.0
        assert 1.0 / 32.0 <= report["ratio_min"] <= report["ratio_max"] <= 32.0

    def test_boundary_k_prime(self):
        report = lemma_multiplier_check(20, 21, 0.75, 1000, seed=6)
        assert report["passed"]

    def test_s_one_ratio_concentrates(self):
        # quadratic symbol: delta/gap = xi1 + N, about twice the shell center
        report = lemma_multiplier_check(20, 20, 1.0, 1000, seed=7)
        assert report["passed"]
        assert 0.5 <= report["ratio_min"] <= report["ratio_max"] <= 8.0

    def test_l_magnitude_bracket(self):
        rng = np.random.default_rng(8)
        pts = sample_admissible(15, 12, 0.6, 2000, rng)
        report = l_magnitude_check(pts)
        assert report["passed"]

    def test_l_magnitude_s_one_is_unity(self):
        rng = np.random.default_rng(9)
        pts = sample_admissible(15, 14, 1.0, 200, rng)
        report = l_magnitude_check(pts)
        assert report["ratio_min"] == pytest.approx(1.0, rel=1e-6)
        assert report["ratio_max"] == pytest.approx(1.0, rel=1e-6)

    def test_small_gap_limit_finite(self):
        # shrink delta toward zero: |L|/|xi1-N| tends to a finite constant
        k, kp, s = 15, 14, 0.6
        xi1 = 1.5 * 2.0**kp
        normsq = (1.5 * 2.0**k) ** 2
        vals = []
        for expo in (-2, -6, -10):
            q = kp / k
            delta = 2.0 ** (2.0 * k * (s + q - 1.0) - 8) * 10.0**expo
            p = AdmissiblePoint((1.0, 0.0, 0.0), k, kp, xi1, normsq - xi1**2,
                                delta, s)
            vals.append(abs(p.big_l()) / abs(p.xi1_minus_n()))
        assert np.all(np.isfinite(vals))
        assert max(vals) / min(vals) < 1.0 + 1e-3
