import numpy as np
import pytest

from fsmap.errors import ConfigurationError, NumericalDomainError, ParameterError
from fsmap.spectral import (Field, Grid, PHYSICAL, SPECTRAL, apply_symbol,
                            constant, dealias, forward_transform,
                            fractional_laplacian, fractional_symbol, inner,
                            inverse_transform, l2_norm, plane_wave,
                            random_band_limited, to_physical, to_spectral)


class TestGrid:
    def test_rejects_bad_dimension(self):
        with pytest.raises(ConfigurationError):
            Grid(4, 32)

    @pytest.mark.parametrize("N", [7, 12, 4, 0])
    def test_rejects_bad_size(self, N):
        with pytest.raises(ConfigurationError):
            Grid(1, N)

    def test_shape_and_size(self):
        g = Grid(3, 16)
        assert g.shape == (16, 16, 16)
        assert g.size == 4096

    def test_dealias_mask_two_thirds(self):
        g = Grid(1, 32)
        kept = np.fft.fftfreq(32, d=1 / 32)[g.dealias_mask.ravel()]
        assert np.max(np.abs(kept)) <= 32 / 3

    def test_xi_scaling_with_box(self):
        g = Grid(1, 16, box_period=4 * np.pi)
        # integer mode 1 corresponds to xi = 2*pi/box = 1/2
        assert np.isclose(sorted(np.abs(g.xi[0].ravel()))[1], 0.5)


class TestTransforms:
    def test_constant_is_zero_mode(self):
        g = Grid(2, 16)
        fhat = forward_transform(constant(g, 1.0))
        assert np.isclose(fhat.values[0, 0], 1.0)
        assert np.max(np.abs(fhat.values)) == pytest.approx(1.0)
        assert np.sum(np.abs(fhat.values) > 1e-13) == 1

    def test_single_mode_unit_coefficient_3d(self):
        g = Grid(3, 8)
        fhat = forward_transform(plane_wave(g, (1, 0, 0)))
        assert np.isclose(fhat.values[1, 0, 0], 1.0)
        fhat.values[1, 0, 0] = 0.0
        assert np.max(np.abs(fhat.values)) < 1e-13

    def test_roundtrip(self):
        g = Grid(2, 32)
        rng = np.random.default_rng(0)
        f = Field(g, rng.standard_normal(g.shape)
                  + 1j * rng.standard_normal(g.shape), PHYSICAL)
        back = inverse_transform(forward_transform(f))
        assert np.max(np.abs(back.values - f.values)) < 1e-12

    def test_forward_requires_physical(self):
        g = Grid(1, 16)
        with pytest.raises(ConfigurationError):
            forward_transform(Field(g, np.zeros(g.shape, complex), SPECTRAL))

    def test_parseval_100_fields(self):
        g = Grid(2, 16)
        rng = np.random.default_rng(1)
        for _ in range(100):
            f = Field(g, rng.standard_normal(g.shape)
                      + 1j * rng.standard_normal(g.shape), PHYSICAL)
            np.testing.assert_allclose(l2_norm(f), l2_norm(forward_transform(f)),
                                       rtol=1e-12)


class TestApplySymbol:
    def test_identity_symbol(self):
        g = Grid(1, 16)
        f = plane_wave(g, (3,), 2.0 - 1j)
        out = apply_symbol(f, lambda x: np.ones_like(x))
        assert np.max(np.abs(out.values - f.values)) < 1e-13

    def test_derivative_symbol(self):
        g = Grid(1, 16)
        out = apply_symbol(plane_wave(g, (1,)), lambda x: 1j * x)
        expected = 1j * plane_wave(g, (1,)).values
        assert np.max(np.abs(out.values - expected)) < 1e-13

    def test_mean_projection(self):
        g = Grid(1, 16)
        rng = np.random.default_rng(2)
        f = Field(g, rng.standard_normal(g.shape) + 0j, PHYSICAL)
        out = apply_symbol(f, (g.xi_norm <= 0).astype(float))
        assert np.max(np.abs(out.values - np.mean(f.values))) < 1e-13

    def test_nan_at_occupied_mode_rejected(self):
        g = Grid(1, 16)
        sym = np.ones(g.shape)
        sym[1] = np.nan
        with pytest.raises(NumericalDomainError):
            apply_symbol(plane_wave(g, (1,)), sym)

    def test_nan_at_empty_mode_tolerated(self):
        g = Grid(1, 16)
        sym = np.ones(g.shape)
        sym[5] = np.nan
        apply_symbol(plane_wave(g, (1,)), sym)


class TestFractionalLaplacian:
    def test_constant_killed(self):
        g = Grid(2, 16)
        out = fractional_laplacian(constant(g, 3.0 + 1j), 0.7)
        assert np.max(np.abs(out.values)) < 1e-13

    def test_unit_frequency_eigenfunction(self):
        g = Grid(1, 16)
        f = plane_wave(g, (1,))
        out = fractional_laplacian(f, 0.75)
        assert np.max(np.abs(out.values - f.values)) < 1e-13

    def test_cos_2x_eigenvalue(self):
        g = Grid(1, 32)
        x = g.coords()[0]
        f = Field(g, np.cos(2 * x) + 0j, PHYSICAL)
        out = fractional_laplacian(f, 0.6)
        assert np.max(np.abs(out.values - 2.0**1.2 * f.values)) < 1e-12

    def test_s_range(self):
        g = Grid(1, 16)
        for bad in (0.0, -0.2, 1.5):
            with pytest.raises(ParameterError):
                fractional_laplacian(plane_wave(g, (1,)), bad)

    def test_s_equals_one_is_laplacian_symbol(self):
        g = Grid(2, 16)
        assert np.array_equal(fractional_symbol(g, 1.0), g.xi_normsq)

    def test_self_adjoint_positive(self):
        g = Grid(1, 32)
        rng = np.random.default_rng(3)
        f = random_band_limited(g, rng, 8.0)
        h = random_band_limited(g, rng, 8.0)
        lf, lh = fractional_laplacian(f, 0.75), fractional_laplacian(h, 0.75)
        assert abs(inner(lf, h) - inner(f, lh)) < 1e-12 * l2_norm(f) * l2_norm(h)
        assert inner(lf, f).real >= -1e-14


class TestDealias:
    def test_band_limited_unchanged(self):
        g = Grid(1, 32)
        f = plane_wave(g, (10,))   # 10 <= 32/3
        out = dealias(f)
        assert np.max(np.abs(out.values - f.values)) < 1e-13

    def test_high_mode_zeroed(self):
        g = Grid(1, 16)
        out = dealias(plane_wave(g, (7,)))   # N/2 - 1 = 7 > 16/3
        assert np.max(np.abs(out.values)) < 1e-13

    def test_energy_never_increases(self):
        g = Grid(2, 16)
        rng = np.random.default_rng(4)
        for _ in range(10):
            f = Field(g, rng.standard_normal(g.shape)
                      + 1j * rng.standard_normal(g.shape), PHYSICAL)
            assert l2_norm(dealias(f)) <= l2_norm(f) + 1e-14


class TestRandomBandLimited:
    def test_support(self):
        g = Grid(2, 32)
        f = random_band_limited(g, np.random.default_rng(5), 4.0)
        fhat = to_spectral(f).values
        for m in g.modes:
            mask = np.broadcast_to(np.abs(m) > 4.0, g.shape)
            assert np.max(np.abs(fhat[mask])) < 1e-15

    def test_deterministic(self):
        g = Grid(1, 32)
        a = random_band_limited(g, np.random.default_rng(6), 8.0)
        b = random_band_limited(g, np.random.default_rng(6), 8.0)
        assert np.array_equal(a.values, b.values)
