"""Gaussian and spherical ensembles of degree-k sections on CP^1.

A section is stored by its coefficient vector c in the orthonormalized
monomial basis S_j = w_j z^j, j = 0..k, with weights

    w_j = sqrt((k+1) * binom(k, j) / pi),

the closed form derived from the rotation-invariant inner product
int f g-bar (1+|z|^2)^(-k-2) dA and frozen behind a quadrature regression
test.  The Gaussian ensemble draws c_j as i.i.d. standard complex Gaussians
(E c_j = 0, E c_j c_l-bar = delta_jl, i.e. real/imag parts of variance 1/2);
the spherical ensemble normalizes a Gaussian draw to unit norm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .geometry import Chart, FSPoint

__all__ = [
    "EnsembleKind",
    "EnsembleSpec",
    "BasisWeights",
    "Section",
    "EvalResult",
    "orthonormal_weights",
    "sample",
    "sample_coeffs",
    "evaluate",
    "log_hnorm_scale",
]


class EnsembleKind(enum.Enum):
    GAUSSIAN = "gaussian"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class EnsembleSpec:
    """Which Gaussian field to sample: dimension, degree and ensemble kind."""

    k: int
    kind: EnsembleKind = EnsembleKind.GAUSSIAN
    m: int = 1

    def __post_init__(self):
        if self.m != 1:
            raise ValueError("sampling is implemented on CP^1 (m=1) only")
        if self.k < 1:
            raise ValueError("degree k must be >= 1; degree-0 sections are excluded")

    @property
    def dim(self) -> int:
        """d_k = binom(k+m, m); equals k+1 on CP^1."""
        return math.comb(self.k + self.m, self.m)


@dataclass(frozen=True)
class BasisWeights:
    """Orthonormalization weights of the monomial basis at degree k."""

    k: int
    weights: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "log_weights", np.asarray(self.log_weights, dtype=float))


@lru_cache(maxsize=256)
def orthonormal_weights(m: int, k: int) -> BasisWeights:
    """Weights w_j making {w_j z^j} orthonormal at degree k (m=1).

    Computed in log-space so degrees up to a few thousand are exact to
    rounding; validated against direct quadrature of the inner product.
    """
    if m != 1:
        raise ValueError("orthonormal weights are implemented for m=1")
    if k < 0:
        raise ValueError("k must be >= 0")
    j = np.arange(k + 1)
    log_binom = gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1)
    log_w = 0.5 * (math.log(k + 1) + log_binom - math.log(math.pi))
    return BasisWeights(k=k, weights=np.exp(log_w), log_weights=log_w)


@dataclass(frozen=True)
class Section:
    """A holomorphic section: coefficients in the orthonormal basis."""

    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=complex)
        if c.shape != (self.k + 1,):
            raise ValueError(f"expected {self.k + 1} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def poly_coeffs(self) -> np.ndarray:
        """Monomial coefficients a_j = c_j w_j of the chart polynomial."""
        return self.coeffs * orthonormal_weights(1, self.k).weights

    def chart_swapped(self) -> "Section":
        """The same section written in the opposite chart.

        Under z -> 1/z the basis coefficients simply reverse, because the
        weights satisfy w_j = w_{k-j}.
        """
        return Section(self.k, self.coeffs[::-1].copy())

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def sample_coeffs(spec: EnsembleSpec, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Draw ``size`` coefficient vectors, shape (size, k+1)."""
    n = spec.dim
    raw = rng.standard_normal((size, 2 * n))
    c = (raw[:, :n] + 1j * raw[:, n:]) / math.sqrt(2.0)
    if spec.kind is EnsembleKind.SPHERICAL:
        c /= np.linalg.norm(c, axis=1, keepdims=True)
    return c


def sample(spec: EnsembleSpec, rng: np.random.Generator) -> Section:
    """One random section from the requested ensemble."""
    return Section(spec.k, sample_coeffs(spec, rng, size=1)[0])


@dataclass(frozen=True)
class EvalResult:
    f: complex
    f_prime: complex
    hnorm: float


def _horner_pair(a: np.ndarray, z: complex) -> tuple[complex, complex]:
    p = 0j
    dp = 0j
    for coeff in a[::-1]:
        dp = dp * z + p
        p = p * z + coeff
    return p, dp


def evaluate(section: Section, z: FSPoint | complex) -> EvalResult:
    """Evaluate f, f' and the Hermitian norm |f| (1+|z|^2)^(-k/2) at a point.

    The section is evaluated in the chart the point is given in, so the pair
    (f, f') is chart-dependent while hnorm is globally defined.
    """
    point = z if isinstance(z, FSPoint) else FSPoint.from_affine(z)
    a = section.poly_coeffs()
    if point.chart is Chart.INFINITY:
        a = a[::-1]
    zz = complex(point.coord)
    f, fp = _horner_pair(a, zz)
    hnorm = abs(f) * math.exp(-0.5 * section.k * math.log1p(abs(zz) ** 2))
    return EvalResult(f=f, f_prime=fp, hnorm=hnorm)


def log_hnorm_scale(k: int, z: np.ndarray) -> np.ndarray:
    """log of the chart factor (1+|z|^2)^(-k/2), vectorized."""
    return -0.5 * k * np.log1p(np.abs(np.asarray(z)) ** 2)


def hnorm_batch(coeffs: np.ndarray, k: int, z: np.ndarray) -> np.ndarray:
    """Hermitian norms of sections at affine points.

    coeffs: (B, k+1) basis coefficients; z: (P,) affine points with |z| <= ~1
    for accuracy (switch chart first for far points).  Returns (B, P).
    """
    a = coeffs * orthonormal_weights(1, k).weights
    z = np.asarray(z, dtype=complex)
    p = np.zeros(a.shape[:1] + z.shape, dtype=complex)
    for j in range(k, -1, -1):
        p = p * z + a[:, j, None]
    return np.abs(p) * np.exp(log_hnorm_scale(k, z))
