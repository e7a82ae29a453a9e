import math

import numpy as np
import pytest

from fslab.geometry import (
    Chart,
    ChartError,
    FSPoint,
    KernelModel,
    Region,
    UnsupportedRegion,
    bergman_diagonal,
    dilog,
    far_decay_check,
    fs_distance,
    kernel_scaling_residual,
    normalized_kernel,
    region_geometry,
    zeta_value,
)

from oracles import (
    dilog_brute,
    fs_area_quadrature,
    fs_boundary_length_quadrature,
    normalized_kernel_quadrature,
    zeta_euler_maclaurin,
)


def aff(z):
    return FSPoint.from_affine(z)


class TestFSPoint:
    def test_round_trip_charts(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            z = complex(*rng.normal(size=2))
            if z == 0:
                continue
            p = aff(z)
            back = p.other_chart().other_chart()
            assert abs(back.coord - z) <= 1e-12 * abs(z)

    def test_chart_origin_not_representable_elsewhere(self):
        with pytest.raises(ChartError):
            FSPoint.origin().to_chart(Chart.INFINITY)

    def test_near_origin_points_have_small_coords(self):
        # points within FS distance pi/4 of a chart origin stay inside |coord| <= 1
        rng = np.random.default_rng(5)
        for _ in range(200):
            r = math.tan(rng.uniform(0, math.pi / 4 - 1e-9))
            z = r * np.exp(1j * rng.uniform(0, 2 * math.pi))
            assert abs(aff(z).coord) <= 1 + 1e-12
            assert fs_distance(aff(z), FSPoint.origin()) < math.pi / 4

    def test_sphere_map_agrees_between_charts(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            z = complex(*rng.normal(size=2))
            if abs(z) < 1e-3:
                continue
            p = aff(z)
            assert np.allclose(p.sphere(), p.other_chart().sphere(), atol=1e-12)


class TestDistance:
    def test_reference_distances(self):
        assert fs_distance(aff(0), aff(1)) == pytest.approx(math.pi / 4, abs=1e-12)
        assert fs_distance(FSPoint.origin(), FSPoint.infinity()) == pytest.approx(math.pi / 2, abs=1e-12)
        assert fs_distance(aff(0.3 + 0.1j), aff(0.3 + 0.1j)) == 0.0

    def test_small_distance_matches_chart_metric(self):
        # ds = |dz| / (1 + |z|^2)
        z = 0.4 + 0.2j
        eps = 1e-6
        d = fs_distance(aff(z), aff(z + eps))
        assert d == pytest.approx(eps / (1 + abs(z) ** 2), rel=1e-5)


class TestBergmanDiagonal:
    def test_reference_values(self):
        assert bergman_diagonal(KernelModel(1, 1)) == pytest.approx(2 / math.pi, rel=1e-14)
        assert bergman_diagonal(KernelModel(1, 0)) == pytest.approx(1 / math.pi, rel=1e-14)
        assert bergman_diagonal(KernelModel(2, 3)) == pytest.approx(20 / math.pi**2, rel=1e-14)

    def test_m1_closed_form(self):
        for k in (1, 5, 50, 500, 2000):
            assert bergman_diagonal(KernelModel(1, k)) == pytest.approx((k + 1) / math.pi, rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            KernelModel(0, 3)
        with pytest.raises(ValueError):
            KernelModel(1, -1)


class TestNormalizedKernel:
    def test_diagonal_is_one(self):
        rng = np.random.default_rng(11)
        for k in (1, 7, 40):
            z = complex(*rng.normal(size=2))
            assert normalized_kernel(KernelModel(1, k), aff(z), aff(z)) == 1.0

    def test_quadrature_oracle_k4(self):
        # frozen from the quadrature-built basis: P_4(0, 1) = 1/4
        val = normalized_kernel(KernelModel(1, 4), aff(0), aff(1))
        assert val == pytest.approx(0.25, abs=1e-12)
        assert val == pytest.approx(normalized_kernel_quadrature(4, 0j, 1 + 0j), abs=1e-9)

    def test_quadrature_oracle_k1(self):
        # the same oracle gives P_1(0,1) = 2^{-1/2}
        val = far_decay_check(KernelModel(1, 1), aff(0), aff(1))
        assert val == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert val == pytest.approx(normalized_kernel_quadrature(1, 0j, 1 + 0j), abs=1e-9)

    def test_closed_form_vs_quadrature_grid(self):
        rng = np.random.default_rng(13)
        for k in (2, 3, 5, 8, 10):
            for _ in range(3):
                z = complex(*rng.normal(size=2)) * 0.7
                w = complex(*rng.normal(size=2)) * 0.7
                got = normalized_kernel(KernelModel(1, k), aff(z), aff(w))
                want = normalized_kernel_quadrature(k, z, w)
                assert got == pytest.approx(want, abs=1e-9)

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(17)
        for k in range(1, 51):
            z = complex(*rng.normal(size=2))
            w = complex(*rng.normal(size=2))
            m = KernelModel(1, k)
            a = normalized_kernel(m, aff(z), aff(w))
            b = normalized_kernel(m, aff(w), aff(z))
            assert a == pytest.approx(b, abs=1e-14)
            assert 0.0 <= a <= 1.0

    def test_near_diagonal_gaussian(self):
        k = 400
        val = normalized_kernel(KernelModel(1, k), aff(0), aff(1 / math.sqrt(k)))
        assert val == pytest.approx(math.exp(-0.5), abs=2 / math.sqrt(k))

    def test_multidim_kernel(self):
        m = KernelModel(2, 3)
        assert normalized_kernel(m, [0, 0], [0, 0]) == pytest.approx(1.0)
        val = normalized_kernel(m, [0, 0], [1, 0])
        assert val == pytest.approx((1 / 2) ** 1.5, rel=1e-12)


class TestScalingAndDecay:
    def test_residual_zero_at_coincident(self):
        assert kernel_scaling_residual(KernelModel(1, 100), 0, 0) == 0.0

    def test_residual_halves_per_4x_k(self):
        # the k^{-1/2} remainder bound demands at least a halving per 4x in
        # k; the exact CP^1 kernel in this direction decays even faster
        res = [kernel_scaling_residual(KernelModel(1, k), 0, 1) for k in (100, 400, 1600)]
        assert res[0] > res[1] > res[2]
        assert res[1] <= 0.55 * res[0]
        assert res[2] <= 0.55 * res[1]

    def test_residual_far_point(self):
        assert kernel_scaling_residual(KernelModel(1, 100), 0, 3) <= 0.05

    def test_antipodal_decay(self):
        val = far_decay_check(KernelModel(1, 100), FSPoint.origin(), FSPoint.infinity())
        assert val < 1e-12

    def test_log_k_scale_decay(self):
        k = 100
        d = 3 * math.sqrt(math.log(k) / k)
        w = math.tan(d)
        val = far_decay_check(KernelModel(1, k), aff(0), aff(w))
        assert val <= k**-4


class TestDilog:
    def test_endpoints(self):
        assert dilog(0.0) == 0.0
        assert dilog(1.0) == pytest.approx(math.pi**2 / 6, abs=1e-14)

    def test_landen_point(self):
        assert dilog(0.5) == pytest.approx(math.pi**2 / 12 - math.log(2) ** 2 / 2, abs=1e-14)

    def test_reflection_identity_grid(self):
        x = np.linspace(1e-4, 1 - 1e-4, 301)
        lhs = dilog(x) + dilog(1 - x)
        rhs = math.pi**2 / 6 - np.log(x) * np.log1p(-x)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_against_brute_series(self):
        for x in (0.1, 0.3, 0.49, 0.7, 0.9):
            assert dilog(x) == pytest.approx(dilog_brute(x), abs=1e-12)

    def test_against_scipy_spence(self):
        from scipy.special import spence

        x = np.linspace(0, 1, 101)
        assert np.max(np.abs(dilog(x) - spence(1 - x))) < 1e-12

    def test_domain_error(self):
        with pytest.raises(ValueError):
            dilog(-0.1)
        with pytest.raises(ValueError):
            dilog(1.1)


class TestZeta:
    def test_reference_values(self):
        assert zeta_value(2.0) == pytest.approx(math.pi**2 / 6, abs=1e-12)
        assert zeta_value(3.0) == pytest.approx(1.2020569031595943, abs=1e-12)

    def test_euler_maclaurin_oracle(self):
        for s in (1.5, 2.5, 3.5):
            assert zeta_value(s) == pytest.approx(zeta_euler_maclaurin(s), abs=1e-10)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            zeta_value(1.0)


class TestRegionGeometry:
    def test_half_sphere(self):
        g = region_geometry(Region.half_sphere())
        assert g.area == pytest.approx(math.pi / 2, abs=1e-12)
        assert g.boundary_length == pytest.approx(math.pi, abs=1e-12)

    def test_full_sphere(self):
        g = region_geometry(Region.full())
        assert g.area == pytest.approx(math.pi, abs=1e-12)
        assert g.boundary_length == 0.0

    def test_affine_unit_disc(self):
        g = region_geometry(Region.affine_disc(1.0))
        assert g.area == pytest.approx(math.pi / 2, abs=1e-12)
        assert g.boundary_length == pytest.approx(math.pi, abs=1e-12)

    def test_disc_against_quadrature(self):
        for r in (0.3, 1.7, 5.0):
            g = region_geometry(Region.affine_disc(r))
            assert g.area == pytest.approx(fs_area_quadrature(r), abs=1e-9)
            assert g.boundary_length == pytest.approx(fs_boundary_length_quadrature(r), abs=1e-12)

    def test_cap_with_area(self):
        reg = Region.cap_with_area(0.05 * math.pi)
        assert region_geometry(reg).area == pytest.approx(0.05 * math.pi, abs=1e-12)

    def test_unsupported(self):
        with pytest.raises(UnsupportedRegion):
            region_geometry(Region.polydisc(1.0), m=2)
        with pytest.raises(UnsupportedRegion):
            region_geometry(Region.affine_disc(1.0, center=aff(0.5)))

    def test_membership(self):
        reg = Region.affine_disc(0.5)
        pts = np.array([aff(0.2).sphere(), aff(0.7).sphere(), FSPoint.infinity().sphere()])
        assert list(reg.contains_sphere(pts)) == [True, False, False]
        cap = Region.cap(math.pi / 4, center=FSPoint.infinity())
        assert bool(cap.contains_sphere(FSPoint.infinity().sphere()[None, :])[0])
        assert not bool(cap.contains_sphere(FSPoint.origin().sphere()[None, :])[0])
