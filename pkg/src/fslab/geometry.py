"""Exact Fubini-Study model for (CP^m, O(k)).

Conventions (fixed once, used everywhere):

* metric potential  phi(z) = (1/2) log(1 + |z|^2)  in the affine chart,
* area form         omega = (i/2) dz ^ dzbar / (1 + |z|^2)^2,  Area(CP^1) = pi,
* geodesic distance d(z, w) = arccos( |1 + z wbar| / sqrt((1+|z|^2)(1+|w|^2)) ),
  so d ranges over [0, pi/2] and CP^1 is the round 2-sphere of radius 1/2.

The degree-k reproducing kernel of the polynomial space is constant on the
diagonal, (k+m)!/(pi^m k!), and its normalized off-diagonal value on CP^1 is
cos^k of the geodesic distance.  That closed form is frozen here and guarded
by a quadrature regression test built directly from the monomial basis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, zeta as _scipy_zeta

__all__ = [
    "Chart",
    "FSPoint",
    "KernelModel",
    "Region",
    "RegionGeometry",
    "ChartError",
    "UnsupportedRegion",
    "sphere_from_affine",
    "fs_distance",
    "bergman_diagonal",
    "log_bergman_diagonal",
    "normalized_kernel",
    "normalized_kernel_dots",
    "berezin_kernel_dots",
    "kernel_scaling_residual",
    "far_decay_check",
    "dilog",
    "zeta_value",
    "region_geometry",
]

ZETA_3 = 1.2020569031595943  # zeta(3)
ZETA_3_2 = 2.6123753486854883  # zeta(3/2)


class ChartError(ValueError):
    """Raised when a point cannot be represented in the requested chart."""


class UnsupportedRegion(ValueError):
    """Raised for region kinds not supported at the requested dimension."""


class Chart(enum.Enum):
    AFFINE = "affine"
    INFINITY = "infinity-chart"


@dataclass(frozen=True)
class FSPoint:
    """A point of CP^1 as a complex coordinate in one of the two charts.

    The infinity chart coordinate u corresponds to the affine point z = 1/u;
    u = 0 is the point at infinity.
    """

    chart: Chart = Chart.AFFINE
    coord: complex = 0j

    @classmethod
    def from_affine(cls, z: complex) -> "FSPoint":
        return cls(Chart.AFFINE, complex(z))

    @classmethod
    def infinity(cls) -> "FSPoint":
        return cls(Chart.INFINITY, 0j)

    @classmethod
    def origin(cls) -> "FSPoint":
        return cls(Chart.AFFINE, 0j)

    def to_chart(self, chart: Chart) -> "FSPoint":
        if chart is self.chart:
            return self
        if self.coord == 0:
            raise ChartError(f"chart origin of {self.chart} is not representable in {chart}")
        return FSPoint(chart, 1.0 / complex(self.coord))

    def other_chart(self) -> "FSPoint":
        other = Chart.INFINITY if self.chart is Chart.AFFINE else Chart.AFFINE
        return self.to_chart(other)

    def sphere(self) -> np.ndarray:
        """Unit vector on S^2 under the standard CP^1 <-> S^2 identification."""
        z = complex(self.coord)
        n = 1.0 + abs(z) ** 2
        x = 2.0 * z.real / n
        y = 2.0 * z.imag / n
        w = (1.0 - abs(z) ** 2) / n
        if self.chart is Chart.INFINITY:
            # z here is the chart coordinate u = 1/z_affine
            x, y, w = 2.0 * z.real / n, -2.0 * z.imag / n, -w
        return np.array([x, y, w])

    def affine(self) -> complex:
        """Affine coordinate; raises ChartError at the point at infinity."""
        return self.to_chart(Chart.AFFINE).coord


def sphere_from_affine(z: np.ndarray) -> np.ndarray:
    """Vectorized chart -> S^2 map; returns shape z.shape + (3,).

    Infinities in ``z`` map to the south pole (0, 0, -1).
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (3,))
    finite = np.isfinite(z)
    zf = np.where(finite, z, 0.0)
    n = 1.0 + np.abs(zf) ** 2
    out[..., 0] = np.where(finite, 2.0 * zf.real / n, 0.0)
    out[..., 1] = np.where(finite, 2.0 * zf.imag / n, 0.0)
    out[..., 2] = np.where(finite, (1.0 - np.abs(zf) ** 2) / n, -1.0)
    return out


def _sphere_of(p) -> np.ndarray:
    if isinstance(p, FSPoint):
        return p.sphere()
    return sphere_from_affine(np.asarray(p, dtype=complex))


def fs_distance(p, q) -> np.ndarray | float:
    """Fubini-Study geodesic distance in [0, pi/2].

    Accepts FSPoint instances or (arrays of) affine complex coordinates.
    Uses the chord formula, which is accurate near the diagonal.
    """
    a, b = _sphere_of(p), _sphere_of(q)
    chord = np.linalg.norm(a - b, axis=-1)
    theta = 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    d = theta / 2.0
    if np.ndim(d) == 0:
        return float(d)
    return d


@dataclass(frozen=True)
class KernelModel:
    """Dimension and degree of the polynomial space H^0(CP^m, O(k))."""

    m: int = 1
    k: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"dimension m must be >= 1, got {self.m}")
        if self.k < 0:
            raise ValueError(f"degree k must be >= 0, got {self.k}")

    @property
    def dim_sections(self) -> int:
        """dim H^0 = binomial(k + m, m)."""
        return math.comb(self.k + self.m, self.m)


def log_bergman_diagonal(model: KernelModel) -> float:
    """log of the diagonal kernel value, safe for degrees beyond factorial range."""
    m, k = model.m, model.k
    return float(gammaln(k + m + 1) - gammaln(k + 1) - m * math.log(math.pi))


def bergman_diagonal(model: KernelModel) -> float:
    """Diagonal kernel value (k+m)!/(pi^m k!); constant over CP^m.

    The factorial ratio is the short product (k+1)...(k+m), so this is
    exact to rounding at any degree; on CP^1 it is (k+1)/pi.
    """
    m, k = model.m, model.k
    ratio = 1.0
    for j in range(1, m + 1):
        ratio *= k + j
    return ratio / math.pi**m


def normalized_kernel_dots(k: int, dots: np.ndarray) -> np.ndarray:
    """P_k as a function of the S^2 inner product u = <n_z, n_w> in [-1, 1].

    P_k = cos^k(d) with cos^2(d) = (1+u)/2; evaluated as exp(k/2 * log((1+u)/2))
    so that large k stays accurate and underflows cleanly to 0.
    """
    u = np.clip(np.asarray(dots, dtype=float), -1.0, 1.0)
    with np.errstate(divide="ignore"):
        logp = 0.5 * k * np.log((1.0 + u) / 2.0)
    return np.exp(logp)


def berezin_kernel_dots(k: int, dots: np.ndarray) -> np.ndarray:
    """beta_k = P_k^2 as a function of the S^2 inner product."""
    u = np.clip(np.asarray(dots, dtype=float), -1.0, 1.0)
    with np.errstate(divide="ignore"):
        logb = k * np.log((1.0 + u) / 2.0)
    return np.exp(logb)


def normalized_kernel(model: KernelModel, z, w) -> float:
    """Normalized kernel P_k(z, w) in [0, 1]; equals 1 iff z == w.

    On CP^1 (m=1) the closed form is cos^k of the geodesic distance; for
    m >= 2, ``z`` and ``w`` may be coordinate vectors of length m and the same
    formula applies with the Hermitian inner product 1 + <z, wbar>.
    """
    if model.m == 1:
        # distance route: coincident points give exactly d = 0 and P = 1
        d = fs_distance(z, w)
        c = math.cos(d)
        if c <= 0.0:
            return 0.0
        return math.exp(model.k * math.log(c))
    zv = np.asarray(z, dtype=complex).ravel()
    wv = np.asarray(w, dtype=complex).ravel()
    if zv.size != model.m or wv.size != model.m:
        raise ValueError(f"expected coordinate vectors of length m={model.m}")
    num = abs(1.0 + np.vdot(wv, zv)) ** 2
    den = (1.0 + np.vdot(zv, zv).real) * (1.0 + np.vdot(wv, wv).real)
    return float((num / den) ** (model.k / 2.0))


def kernel_scaling_residual(model: KernelModel, u: complex, v: complex) -> float:
    """|P_k(u/sqrt k, v/sqrt k) - exp(-|u-v|^2/2)|, the near-diagonal residual."""
    k = model.k
    z = FSPoint.from_affine(complex(u) / math.sqrt(k))
    w = FSPoint.from_affine(complex(v) / math.sqrt(k))
    gauss = math.exp(-0.5 * abs(complex(u) - complex(v)) ** 2)
    return abs(normalized_kernel(model, z, w) - gauss)


def far_decay_check(model: KernelModel, z, w) -> float:
    """P_k(z, w) itself; callers assert the k^{-alpha} far-field bound."""
    return normalized_kernel(model, z, w)


_PI2_6 = math.pi ** 2 / 6.0


def dilog(x) -> np.ndarray | float:
    """Dilogarithm Li_2(x) = sum x^n/n^2 for x in [0, 1].

    Direct series for x <= 1/2 and the Euler reflection
    Li_2(x) = pi^2/6 - log(x)log(1-x) - Li_2(1-x) for x > 1/2; absolute
    accuracy is ~1e-15, comfortably under the 1e-12 contract.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("dilog requires 0 <= x <= 1")
    small = np.minimum(arr, 1.0 - arr)
    # 54 terms give 2^-54 tail at x = 1/2
    acc = np.zeros_like(small)
    powers = np.ones_like(small)
    for n in range(1, 55):
        powers = powers * small
        acc += powers / (n * n)
    upper = arr > 0.5
    if np.any(upper):
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = np.log(arr) * np.log1p(-arr)
        cross = np.where(arr >= 1.0, 0.0, cross)  # x=1: log(1-x) divergence is killed by log x = 0
        acc = np.where(upper, _PI2_6 - cross - acc, acc)
    if np.ndim(x) == 0:
        return float(acc)
    return acc


def zeta_value(s: float) -> float:
    """Riemann zeta(s) for s > 1."""
    if s <= 1.0:
        raise ValueError("zeta_value requires s > 1")
    return float(_scipy_zeta(s))


def kernel_quadrature_reference(k: int, z: complex, w: complex) -> float:
    """P_k assembled from a quadrature-built orthonormal basis.

    Reference path for regression against the frozen closed form: the basis
    weights come from numerically integrating the rotation-invariant inner
    product (nothing is shared with the closed-form evaluator).
    """
    from scipy.integrate import quad

    weights = np.empty(k + 1)
    for j in range(k + 1):
        val, _ = quad(lambda r: r ** (2 * j + 1) / (1 + r * r) ** (k + 2), 0, np.inf, epsabs=1e-14)
        weights[j] = 1.0 / math.sqrt(2.0 * math.pi * val)
    powers = np.arange(k + 1)
    f = weights * np.asarray(z, dtype=complex) ** powers
    g = weights * np.asarray(w, dtype=complex) ** powers
    num = abs(np.sum(f * np.conj(g)))
    den = math.sqrt(np.sum(np.abs(f) ** 2) * np.sum(np.abs(g) ** 2))
    return float(num / den)


class RegionKind(enum.Enum):
    SPHERICAL_CAP = "spherical-cap"
    AFFINE_DISC = "affine-disc"
    POLYDISC_CHART = "polydisc-chart"


@dataclass(frozen=True)
class Region:
    """A measurable region of CP^1 (or the polydisc in a chart of CP^m).

    * spherical-cap: all points within FS distance ``radius`` of ``center``;
      radius pi/2 is the full sphere, pi/4 the half-sphere.
    * affine-disc: |z - c| < radius in the affine chart.
    * polydisc-chart: |z_i| < radius in the affine chart (equals the disc at m=1).
    """

    kind: RegionKind = RegionKind.SPHERICAL_CAP
    center: FSPoint = field(default_factory=FSPoint.origin)
    radius: float = math.pi / 4

    @classmethod
    def cap(cls, radius: float, center: FSPoint | None = None) -> "Region":
        if not 0.0 <= radius <= math.pi / 2:
            raise ValueError("cap radius must lie in [0, pi/2]")
        return cls(RegionKind.SPHERICAL_CAP, center or FSPoint.origin(), float(radius))

    @classmethod
    def half_sphere(cls, center: FSPoint | None = None) -> "Region":
        return cls.cap(math.pi / 4, center)

    @classmethod
    def full(cls) -> "Region":
        return cls.cap(math.pi / 2)

    @classmethod
    def cap_with_area(cls, area: float, center: FSPoint | None = None) -> "Region":
        """Cap of prescribed FS area in (0, pi]; area = pi sin^2(radius)."""
        if not 0.0 <= area <= math.pi:
            raise ValueError("cap area must lie in [0, pi]")
        return cls.cap(math.asin(math.sqrt(area / math.pi)), center)

    @classmethod
    def affine_disc(cls, radius: float, center: FSPoint | None = None) -> "Region":
        if radius < 0:
            raise ValueError("disc radius must be >= 0")
        return cls(RegionKind.AFFINE_DISC, center or FSPoint.origin(), float(radius))

    @classmethod
    def polydisc(cls, radius: float) -> "Region":
        if radius < 0:
            raise ValueError("polydisc radius must be >= 0")
        return cls(RegionKind.POLYDISC_CHART, FSPoint.origin(), float(radius))

    def contains_sphere(self, xyz: np.ndarray) -> np.ndarray:
        """Open-region membership for points given as S^2 unit vectors (..., 3)."""
        if self.kind is RegionKind.SPHERICAL_CAP:
            dot = np.clip(xyz @ self.center.sphere(), -1.0, 1.0)
            d = np.arccos(dot) / 2.0
            return d < self.radius
        # chart discs: membership in the affine chart, infinity excluded
        x, y, w = xyz[..., 0], xyz[..., 1], xyz[..., 2]
        denom = 1.0 + w
        finite = denom > 1e-300
        z = np.where(finite, (x + 1j * y) / np.where(finite, denom, 1.0), np.inf)
        c = self.center.affine() if self.kind is RegionKind.AFFINE_DISC else 0.0
        return finite & (np.abs(z - c) < self.radius)


@dataclass(frozen=True)
class RegionGeometry:
    area: float
    boundary_length: float


def region_geometry(region: Region, m: int = 1) -> RegionGeometry:
    """FS area and boundary length (m=1 only) of a region.

    Closed forms: a cap of FS radius rho has area pi sin^2(rho) and boundary
    length pi sin(2 rho); the affine disc |z| < r is the cap of radius
    arctan(r).
    """
    if m != 1:
        raise UnsupportedRegion(f"region geometry is implemented for m=1 only, got m={m}")
    if region.kind is RegionKind.SPHERICAL_CAP:
        rho = region.radius
    elif region.kind in (RegionKind.AFFINE_DISC, RegionKind.POLYDISC_CHART):
        if region.center.sphere()[2] < 1.0 - 1e-12:
            raise UnsupportedRegion("closed-form geometry needs an origin-centered disc")
        rho = math.atan(region.radius)
    else:  # pragma: no cover
        raise UnsupportedRegion(f"unknown region kind {region.kind}")
    area = math.pi * math.sin(rho) ** 2
    boundary = math.pi * abs(math.sin(2.0 * rho))
    if rho in (0.0, math.pi / 2):
        boundary = 0.0
    return RegionGeometry(area=area, boundary_length=boundary)
