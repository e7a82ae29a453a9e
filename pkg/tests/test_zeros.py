import math

import numpy as np
import pytest

from fslab.ensembles import EnsembleSpec, Section, orthonormal_weights, sample_coeffs
from fslab.geometry import FSPoint, Region, sphere_from_affine
from fslab.harmonics import spherical_harmonic
from fslab.parallel import replicate_generator
from fslab.zeros import ZeroSection, count_in_region, find_zeros, linear_statistic, zeros_batch
from fslab import rootfind


def section_from_poly(poly_coeffs):
    """Section whose chart polynomial has the given monomial coefficients."""
    poly_coeffs = np.asarray(poly_coeffs, dtype=complex)
    k = len(poly_coeffs) - 1
    return Section(k, poly_coeffs / orthonormal_weights(1, k).weights)


class TestFindZeros:
    def test_explicit_quadratic(self):
        zs = find_zeros(section_from_poly([-1, 0, 1]))  # z^2 - 1
        assert sorted(np.round(zs.roots.real, 9)) == [-1, 1]
        assert np.allclose(zs.roots.imag, 0, atol=1e-10)

    def test_monomial_all_zeros_at_origin(self):
        zs = find_zeros(Section(3, np.array([0, 0, 0, 1], dtype=complex)))
        assert np.allclose(np.abs(zs.roots), 0, atol=1e-12)

    def test_constant_all_zeros_at_infinity(self):
        zs = find_zeros(Section(4, np.array([1, 0, 0, 0, 0], dtype=complex)))
        assert zs.n_infinite == 4

    def test_zero_section_raises(self):
        with pytest.raises(ZeroSection):
            find_zeros(Section(2, np.zeros(3, dtype=complex)))

    @pytest.mark.parametrize("k", [1, 3, 17, 60, 200])
    def test_root_count_invariant(self, k):
        for rep in range(8):
            c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(21, rep))
            zs = find_zeros(Section(k, c[0]))
            assert zs.roots.shape == (k,)
            assert np.all(np.isfinite(zs.roots) | np.isinf(zs.roots))

    def test_residual_contract(self):
        k = 80
        c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(22, 0), size=32)
        roots = zeros_batch(c, k)
        a = c * orthonormal_weights(1, k).weights
        a = a / np.abs(a).max(axis=1, keepdims=True)
        res = rootfind.max_log_residual(a, roots)
        assert res.max() <= math.log(1e-8)

    def test_chart_swap_maps_zeros(self):
        k = 25
        c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(23, 5))[0]
        s = Section(k, c)
        z1 = find_zeros(s).sphere()
        z2 = find_zeros(s.chart_swapped()).roots
        # swapped zeros are 1/zeros of the original
        z2_mapped = sphere_from_affine(1.0 / z2)
        d = np.linalg.norm(z1[:, None, :] - z2_mapped[None, :, :], axis=2)
        assert d.min(axis=1).max() < 1e-8

    def test_seeded_matches_companion(self):
        k = 160
        c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(24, 0), size=12)
        ra = zeros_batch(c, k, method="seeded")
        rc = zeros_batch(c, k, method="companion")
        for i in range(12):
            sa, sc = sphere_from_affine(ra[i]), sphere_from_affine(rc[i])
            d = np.linalg.norm(sa[:, None, :] - sc[None, :, :], axis=2)
            assert d.min(axis=1).max() < 1e-9

    def test_aberth_matches_companion(self):
        k = 150
        c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(25, 0), size=4)
        ra = zeros_batch(c, k, method="aberth")
        rc = zeros_batch(c, k, method="companion")
        for i in range(4):
            sa, sc = sphere_from_affine(ra[i]), sphere_from_affine(rc[i])
            d = np.linalg.norm(sa[:, None, :] - sc[None, :, :], axis=2)
            assert d.min(axis=1).max() < 1e-9


class TestCounting:
    def test_full_sphere_counts_degree(self):
        for k in (1, 6, 23):
            c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(31, k))[0]
            zs = find_zeros(Section(k, c))
            assert count_in_region(zs, Region.full()) == k

    def test_small_disc_excludes_far_roots(self):
        zs = find_zeros(section_from_poly([-1, 0, 1]))
        assert count_in_region(zs, Region.affine_disc(0.5)) == 0
        assert count_in_region(zs, Region.affine_disc(1.5)) == 2

    def test_infinity_in_caps(self):
        zs = find_zeros(Section(2, np.array([1, 0, 0], dtype=complex)))  # double zero at infinity
        assert count_in_region(zs, Region.cap(0.3, center=FSPoint.infinity())) == 2
        assert count_in_region(zs, Region.cap(0.3)) == 0


class TestLinearStatistic:
    def test_constant_function_counts(self):
        from fslab.harmonics import grid_function

        one = grid_function("one", lambda xyz: np.ones(np.asarray(xyz).shape[:-1]))
        k = 12
        c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(41, 0))[0]
        zs = find_zeros(Section(k, c))
        assert linear_statistic(zs, one) == pytest.approx(k, abs=1e-12)

    def test_odd_harmonic_mean_zero(self):
        # antipodally odd test function has mean linear statistic 0
        y1 = spherical_harmonic(1)
        k, n = 30, 4000
        c = sample_coeffs(EnsembleSpec(k=k), replicate_generator(42, 0), size=n)
        roots = zeros_batch(c, k)
        vals = np.array([y1.value_sphere(sphere_from_affine(r)).sum() for r in roots])
        stderr = vals.std(ddof=1) / math.sqrt(n)
        assert abs(vals.mean()) <= 4 * stderr

    def test_value_at_infinity(self):
        y1 = spherical_harmonic(1)
        zs = find_zeros(Section(2, np.array([1, 0, 0], dtype=complex)))
        assert linear_statistic(zs, y1) == pytest.approx(-2.0, abs=1e-12)
