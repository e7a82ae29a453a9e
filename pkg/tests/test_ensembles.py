import math

import numpy as np
import pytest

from fslab.ensembles import (
    EnsembleKind,
    EnsembleSpec,
    Section,
    evaluate,
    orthonormal_weights,
    sample,
    sample_coeffs,
)
from fslab.geometry import Chart, FSPoint, KernelModel, bergman_diagonal, normalized_kernel
from fslab.parallel import replicate_generator

from oracles import orthonormal_weight_quadrature


def gaussian(k):
    return EnsembleSpec(k=k, kind=EnsembleKind.GAUSSIAN)


class TestWeights:
    def test_against_quadrature(self):
        for k, j in [(1, 0), (1, 1), (2, 1), (4, 2), (7, 5)]:
            got = orthonormal_weights(1, k).weights[j]
            assert got == pytest.approx(orthonormal_weight_quadrature(k, j), rel=1e-10)

    def test_frozen_reference_values(self):
        assert orthonormal_weights(1, 1).weights[0] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
        assert orthonormal_weights(1, 2).weights[1] == pytest.approx(math.sqrt(6 / math.pi), rel=1e-14)

    def test_palindrome_symmetry(self):
        for k in (1, 2, 9, 40, 313):
            w = orthonormal_weights(1, k).weights
            assert np.allclose(w, w[::-1], rtol=1e-13)

    def test_diagonal_sum_matches_kernel(self):
        # sum_j |w_j z^j|^2 (1+|z|^2)^{-k} is constant = (k+1)/pi
        rng = np.random.default_rng(2)
        for k in (1, 5, 30):
            w = orthonormal_weights(1, k).weights
            for z in rng.normal(size=(100, 2)) @ np.array([1, 1j]):
                s = np.sum(np.abs(w * z ** np.arange(k + 1)) ** 2) * (1 + abs(z) ** 2) ** (-k)
                assert s == pytest.approx(bergman_diagonal(KernelModel(1, k)), rel=1e-10)


class TestSampling:
    def test_moments(self):
        n = 100000
        spec = gaussian(4)
        c = sample_coeffs(spec, replicate_generator(42, 0), size=n)
        tol = 4 / math.sqrt(n)
        assert np.all(np.abs(c.mean(axis=0)) <= tol)
        # E c_j c_l = 0 and E c_j conj(c_l) = delta_jl
        for j in range(5):
            for l in range(5):
                plain = np.mean(c[:, j] * c[:, l])
                herm = np.mean(c[:, j] * np.conj(c[:, l]))
                assert abs(plain) <= tol
                assert abs(herm - (1.0 if j == l else 0.0)) <= tol

    def test_spherical_normalization(self):
        spec = EnsembleSpec(k=6, kind=EnsembleKind.SPHERICAL)
        c = sample_coeffs(spec, replicate_generator(1, 0), size=100)
        assert np.allclose(np.linalg.norm(c, axis=1), 1.0, atol=1e-12)

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            EnsembleSpec(k=0)

    def test_replay_determinism(self):
        a = sample_coeffs(gaussian(5), replicate_generator(7, 3), size=4)
        b = sample_coeffs(gaussian(5), replicate_generator(7, 3), size=4)
        assert np.array_equal(a, b)
        c = sample_coeffs(gaussian(5), replicate_generator(7, 4), size=4)
        assert not np.array_equal(a, c)


class TestEvaluate:
    def test_basis_section_at_origin(self):
        s = Section(2, np.array([1, 0, 0], dtype=complex))
        res = evaluate(s, FSPoint.origin())
        assert res.hnorm == pytest.approx(math.sqrt(3 / math.pi), rel=1e-13)
        assert res.f == pytest.approx(math.sqrt(3 / math.pi))
        assert res.f_prime == 0

    def test_chart_covariance(self):
        # hnorm is globally defined: the same point through either chart
        # representation gives the same value
        rng = replicate_generator(11, 0)
        for k in (1, 4, 17):
            s = sample(gaussian(k), rng)
            for z in (0.3 + 0.8j, 1.5 - 0.2j, -2.0 + 1.0j):
                p = FSPoint.from_affine(z)
                h1 = evaluate(s, p).hnorm
                h2 = evaluate(s, p.other_chart()).hnorm
                assert h1 == pytest.approx(h2, rel=1e-10)

    def test_chart_swap_is_inversion(self):
        # the reversed-coefficient section is the original composed with z -> 1/z
        s = sample(gaussian(9), replicate_generator(12, 0))
        for z in (0.4 - 0.1j, 2.0 + 1.0j):
            h1 = evaluate(s.chart_swapped(), FSPoint.from_affine(z)).hnorm
            h2 = evaluate(s, FSPoint.from_affine(1 / z)).hnorm
            assert h1 == pytest.approx(h2, rel=1e-10)

    def test_mean_square_field(self):
        # E ||s(z)||^2 = (k+1)/pi at every z
        k, n = 3, 100000
        c = sample_coeffs(gaussian(k), replicate_generator(5, 0), size=n)
        w = orthonormal_weights(1, k).weights
        for z in (0.0, 0.7 + 0.2j):
            f = (c * w) @ z ** np.arange(k + 1)
            msq = np.mean(np.abs(f) ** 2) * (1 + abs(z) ** 2) ** (-k)
            target = (k + 1) / math.pi
            assert msq == pytest.approx(target, rel=5 / math.sqrt(n))

    def test_rotation_invariance_of_hnorm_distribution(self):
        # KS distance of ||s(z)|| samples at two points <= 0.01 at n = 1e5
        k, n = 10, 100000
        c = sample_coeffs(gaussian(k), replicate_generator(6, 0), size=n)
        w = orthonormal_weights(1, k).weights
        samples = []
        for z in (0.0, 1.3 - 0.4j):
            f = (c * w) @ z ** np.arange(k + 1)
            samples.append(np.sort(np.abs(f) * (1 + abs(z) ** 2) ** (-k / 2)))
        a, b = samples
        grid = np.union1d(a, b)
        ks = np.max(np.abs(np.searchsorted(a, grid, "right") / n - np.searchsorted(b, grid, "right") / n))
        assert ks <= 0.01

    def test_empirical_covariance_matches_kernel(self):
        # |empirical normalized covariance - P_k| <= 5/sqrt(N)
        n = 100000
        rng = np.random.default_rng(8)
        for k in (2, 9, 20):
            c = sample_coeffs(gaussian(k), replicate_generator(9, k), size=n)
            w = orthonormal_weights(1, k).weights
            for _ in range(4):
                z, wpt = [complex(*v) for v in rng.normal(scale=0.8, size=(2, 2))]
                fz = (c * w) @ z ** np.arange(k + 1)
                fw = (c * w) @ wpt ** np.arange(k + 1)
                cov = np.mean(fz * np.conj(fw))
                scale = math.exp(
                    -0.5 * k * (math.log1p(abs(z) ** 2) + math.log1p(abs(wpt) ** 2))
                )
                est = abs(cov) * scale / bergman_diagonal(KernelModel(1, k))
                want = normalized_kernel(KernelModel(1, k), FSPoint.from_affine(z), FSPoint.from_affine(wpt))
                assert est == pytest.approx(want, abs=5 / math.sqrt(n))
