"""Statistics of random zero sets: density, correlations, variances, holes.

Closed-form evaluators live next to their Monte Carlo estimators so every
law can be checked both ways:

* expected counts against (k/pi) Area(U),
* the universal scaled pair correlation of zeros,
* the exact finite-k variance of smooth linear statistics from the
  dilogarithm bipotential (a 1-D Legendre reduction of the double
  sphere integral),
* asymptotic-normality diagnostics,
* number variance against the boundary-length law,
* hole probabilities,
* the closed-form hole-decay constant for polydiscs and the leading term
  of the higher-codimension scaled pair correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.special import gammaln, lpmv
from scipy.stats import norm as _norm

from .ensembles import EnsembleSpec, sample_coeffs
from .geometry import Region, dilog, zeta_value
from .harmonics import TestFunction, sphere_quadrature
from .parallel import run_replicates
from .summary import StatSummary, summarize
from .zeros import zeros_batch
from .geometry import sphere_from_affine

__all__ = [
    "BinTooWide",
    "QuadratureNotConverged",
    "NotRandom",
    "PairCorrEstimate",
    "expected_density_check",
    "universal_pair_correlation",
    "pair_correlation_estimate",
    "variance_bipotential",
    "variance_leading_coeff",
    "linear_statistic_samples",
    "normality_diagnostics",
    "number_variance",
    "hole_probability",
    "zhu_constant",
    "higher_codim_correlation_leading",
]


class BinTooWide(ValueError):
    """Pair-correlation bins wider than 0.25 rescaled units are rejected."""


class QuadratureNotConverged(RuntimeError):
    """Raised when refining the bipotential quadrature stops converging."""


class NotRandom(ValueError):
    """Raised when a linear statistic is degenerate (zero variance)."""


# ---------------------------------------------------------------------------
# expected density of zeros


def _count_worker(lo, hi, seed, k, regions, method):
    out = np.empty((hi - lo, len(regions)), dtype=np.int32)
    from .parallel import replicate_generator

    spec = EnsembleSpec(k=k)
    coeffs = np.vstack([sample_coeffs(spec, replicate_generator(seed, i)) for i in range(lo, hi)])
    roots = zeros_batch(coeffs, k, method=method)
    xyz = sphere_from_affine(roots)
    for j, reg in enumerate(regions):
        out[:, j] = reg.contains_sphere(xyz).sum(axis=1)
    return out


def region_counts(k: int, regions: list[Region], n: int, seed: int, workers: int = 1, method: str = "auto") -> np.ndarray:
    """(n, len(regions)) zero counts over independent Gaussian draws."""
    worker = partial(_count_worker, k=k, regions=tuple(regions), method=method)
    return run_replicates(n, seed, worker, workers=workers)


def expected_density_check(
    spec: EnsembleSpec, region: Region, n: int, seed: int = 0, workers: int = 1
) -> StatSummary:
    """Monte Carlo summary of zero counts in a region; mean target (k/pi)Area."""
    if n < 100:
        raise ValueError("need n >= 100 replicates")
    counts = region_counts(spec.k, [region], n, seed, workers)[:, 0]
    return summarize(counts, bins=np.arange(counts.min() - 0.5, counts.max() + 1.5))


# ---------------------------------------------------------------------------
# pair correlation


def universal_pair_correlation(r) -> np.ndarray | float:
    """Universal scaled pair correlation of zeros on a complex curve.

    kappa(r) = [(sinh^2 a + a^2) cosh a - 2 a sinh a] / sinh^3 a with
    a = r^2/2; near zero the series r^2/2 - r^6/36 + r^10/720 avoids
    cancellation.  kappa -> 1 for large r (uncorrelated level) and
    kappa ~ r^2/2 -> 0 at small r (repulsion).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("pair correlation needs r >= 0")
    a = r * r / 2.0
    small = r < 0.35
    asafe = np.where(small, 1.0, a)
    sh, ch = np.sinh(asafe), np.cosh(asafe)
    with np.errstate(over="ignore", invalid="ignore"):
        closed = ((sh * sh + asafe * asafe) * ch - 2.0 * asafe * sh) / sh**3
    closed = np.where(np.isfinite(closed), closed, 1.0)
    series = 0.5 * r**2 - r**6 / 36.0 + r**10 / 720.0
    out = np.where(small, series, closed)
    if np.ndim(r) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PairCorrEstimate:
    """Binned Ripley-type estimate of the rescaled pair correlation."""

    edges: np.ndarray
    centers: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray
    n: int
    k: int


def _annulus_area(k: int, lo: float, hi: float) -> float:
    """Exact FS area of the annulus between rescaled radii lo < hi."""
    s = math.sqrt(k)
    return 0.5 * math.pi * (math.cos(2 * lo / s) - math.cos(2 * hi / s))


def _paircorr_worker(lo, hi, seed, k, edges, method):
    from scipy.spatial import cKDTree

    from .parallel import replicate_generator

    spec = EnsembleSpec(k=k)
    nb = len(edges) - 1
    out = np.zeros((hi - lo, nb), dtype=np.int32)
    coeffs = np.vstack([sample_coeffs(spec, replicate_generator(seed, i)) for i in range(lo, hi)])
    roots = zeros_batch(coeffs, k, method=method)
    xyz = sphere_from_affine(roots)
    rmax = edges[-1] / math.sqrt(k)
    chord_max = 2.0 * math.sin(min(rmax, math.pi / 2))
    for row in range(hi - lo):
        tree = cKDTree(xyz[row])
        pairs = tree.query_pairs(chord_max, output_type="ndarray")
        if pairs.size == 0:
            continue
        chord = np.linalg.norm(xyz[row, pairs[:, 0]] - xyz[row, pairs[:, 1]], axis=1)
        rr = np.arcsin(np.clip(chord / 2.0, 0.0, 1.0)) * math.sqrt(k)
        out[row] = np.histogram(rr, bins=edges)[0]
    return out


def pair_correlation_estimate(
    spec: EnsembleSpec,
    edges: np.ndarray,
    n: int,
    seed: int = 0,
    workers: int = 1,
    method: str = "auto",
) -> PairCorrEstimate:
    """Ripley-type estimator of the rescaled zero pair correlation.

    Pair distances are sqrt(k) times the FS geodesic distance; counts are
    normalized per bin by the uncorrelated level (k/pi)^2 * Area * exact
    annulus area, so flat response = 1.
    """
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must increase")
    if np.any(np.diff(edges) > 0.25):
        raise BinTooWide("pair-correlation bins must not span more than 0.25 rescaled units")
    if edges[-1] > 3.0 + 1e-9:
        raise ValueError("estimator is restricted to rescaled distances <= 3")
    k = spec.k
    if k < 100:
        raise ValueError("need k >= 100 for the local chart linearization")
    counts = run_replicates(
        n, seed, partial(_paircorr_worker, k=k, edges=tuple(edges), method=method), workers=workers
    )
    # unordered pairs per draw at the uncorrelated level
    denom = np.array(
        [0.5 * (k**2 / math.pi) * _annulus_area(k, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    )
    vals = counts.mean(axis=0) / denom
    errs = counts.std(axis=0, ddof=1) / math.sqrt(n) / denom
    centers = 0.5 * (edges[:-1] + edges[1:])
    return PairCorrEstimate(edges=edges, centers=centers, values=vals, stderrs=errs, n=n, k=k)


# ---------------------------------------------------------------------------
# variance of smooth linear statistics: exact bipotential quadrature


def _legendre_projections(f: TestFunction, lmax: int, n_theta: int, n_phi: int) -> np.ndarray:
    """S_l = sum_m |<Lap f, Y_lm>|^2 from a product quadrature transform."""
    pts, wts = sphere_quadrature(n_theta, n_phi)
    vals = (f.laplacian_sphere(pts) * wts).reshape(n_theta, n_phi)
    u = pts.reshape(n_theta, n_phi, 3)[:, 0, 2]
    phase = np.fft.fft(vals, axis=1)  # sum_phi e^{-im phi} weighted values
    s = np.zeros(lmax + 1)
    for ell in range(lmax + 1):
        for m in range(0, min(ell, n_phi // 2 - 1) + 1):
            nl = math.sqrt((2 * ell + 1) / (4 * math.pi)) * math.exp(
                0.5 * (gammaln(ell - m + 1) - gammaln(ell + m + 1))
            )
            proj = np.sum(phase[:, m] * lpmv(m, ell, u)) * nl
            s[ell] += (1.0 if m == 0 else 2.0) * abs(proj) ** 2
    return s


def _kernel_legendre_coeffs(k: int, lmax: int, refine: int = 1) -> np.ndarray:
    """lambda_l = 2 pi int_{-1}^{1} Li2(((1+u)/2)^k) P_l(u) du.

    The integrand concentrates in a band of width O(1/k) at u = 1; the
    substitution s = k(1-u)/2 with panelled Gauss-Legendre resolves it.
    """
    panels = [0.0, 2.0, 6.0, 14.0, 30.0, 48.0]
    smax = min(48.0, 0.75 * k)
    panels = [p for p in panels if p < smax] + [smax]
    nodes_per = 24 * refine
    xs, ws = np.polynomial.legendre.leggauss(nodes_per)
    out = np.zeros(lmax + 1)
    for a, b in zip(panels[:-1], panels[1:]):
        s = 0.5 * (b - a) * xs + 0.5 * (a + b)
        w = 0.5 * (b - a) * ws
        u = 1.0 - 2.0 * s / k
        vals = dilog(np.exp(k * np.log1p(-s / k)))
        pl = np.ones((lmax + 1, s.size))
        if lmax >= 1:
            pl[1] = u
        for ell in range(2, lmax + 1):
            pl[ell] = ((2 * ell - 1) * u * pl[ell - 1] - (ell - 1) * pl[ell - 2]) / ell
        out += (pl * (vals * w)[None, :]).sum(axis=1)
    return 2.0 * math.pi * (2.0 / k) * out


def variance_bipotential(
    k: int, f: TestFunction, lmax: int = 48, n_theta: int = 128, n_phi: int = 128
) -> float:
    """Exact finite-k variance of the linear statistic (Z_s, f).

    Evaluates (1/4 pi^2) int int Li2(beta_k) (i d dbar f)^2 through the
    Legendre reduction of the distance-only kernel: the double sphere
    integral collapses to sum_l lambda_l(k) S_l[Lap f] / (256 pi^2).
    Refines until the relative change is below 1e-7.
    """
    s = _legendre_projections(f, lmax, n_theta, n_phi)
    lam = _kernel_legendre_coeffs(k, lmax)
    val = float(np.dot(lam[1:], s[1:]) / (256.0 * math.pi**2))
    if val == 0.0:
        return 0.0
    lam2 = _kernel_legendre_coeffs(k, lmax, refine=2)
    val2 = float(np.dot(lam2[1:], s[1:]) / (256.0 * math.pi**2))
    if abs(val2 - val) > 1e-6 * abs(val2):
        s3 = _legendre_projections(f, lmax + 16, n_theta + 64, n_phi + 64)
        lam3 = _kernel_legendre_coeffs(k, lmax + 16, refine=3)
        val3 = float(np.dot(lam3[1:], s3[1:]) / (256.0 * math.pi**2))
        if abs(val3 - val2) > 1e-6 * abs(val3):
            raise QuadratureNotConverged(
                f"bipotential quadrature drift {abs(val3 - val2):.3e} at k={k}"
            )
        return val3
    return val2


def variance_leading_coeff(f: TestFunction, lmax: int = 48, n_theta: int = 128, n_phi: int = 128) -> float:
    """Leading coefficient zeta(3)/(16 pi) ||Lap f||^2 of k * Var(Z, f)."""
    s = _legendre_projections(f, lmax, n_theta, n_phi)
    norm2 = float(s.sum()) / 4.0  # FS area form is dsigma/4
    return zeta_value(3.0) / (16.0 * math.pi) * norm2


# ---------------------------------------------------------------------------
# linear statistic sampling and normality diagnostics


def _linstat_worker(lo, hi, seed, k, f, method):
    from .parallel import replicate_generator

    spec = EnsembleSpec(k=k)
    coeffs = np.vstack([sample_coeffs(spec, replicate_generator(seed, i)) for i in range(lo, hi)])
    roots = zeros_batch(coeffs, k, method=method)
    vals = f.value_sphere(sphere_from_affine(roots))
    return vals.sum(axis=1)


def linear_statistic_samples(
    spec: EnsembleSpec, f: TestFunction, n: int, seed: int = 0, workers: int = 1, method: str = "auto"
) -> np.ndarray:
    """n independent samples of the linear statistic (Z_s, f)."""
    return run_replicates(n, seed, partial(_linstat_worker, k=spec.k, f=f, method=method), workers=workers)


@dataclass(frozen=True)
class NormalityReport:
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float


def normality_report(values: np.ndarray) -> NormalityReport:
    """Moments and KS distance to N(0,1) of the standardized sample."""
    x = np.asarray(values, dtype=float)
    n = x.size
    mu = x.mean()
    sd = x.std(ddof=1)
    if not sd > 0 or sd < 1e-13 * (1.0 + abs(mu)):
        raise NotRandom("linear statistic is degenerate; variance is zero")
    z = np.sort((x - mu) / sd)
    cdf = _norm.cdf(z)
    i = np.arange(1, n + 1)
    ks = float(np.max(np.maximum(i / n - cdf, cdf - (i - 1) / n)))
    m3 = float(np.mean(((x - mu) / sd) ** 3))
    m4 = float(np.mean(((x - mu) / sd) ** 4))
    return NormalityReport(
        n=n, mean=float(mu), variance=float(sd * sd), skewness=m3, excess_kurtosis=m4 - 3.0, ks_distance=ks
    )


def normality_diagnostics(
    spec: EnsembleSpec, f: TestFunction, n: int, seed: int = 0, workers: int = 1
) -> NormalityReport:
    """Normality diagnostics of the standardized linear statistic."""
    if n < 2000:
        raise ValueError("need n >= 2000 replicates for stable diagnostics")
    return normality_report(linear_statistic_samples(spec, f, n, seed, workers))


# ---------------------------------------------------------------------------
# number variance and holes


@dataclass(frozen=True)
class NumberVarianceResult:
    summary: StatSummary
    boundary_length: float
    ratio: float
    ratio_stderr: float
    target: float


def number_variance(
    spec: EnsembleSpec, region: Region, n: int, seed: int = 0, workers: int = 1, counts: np.ndarray | None = None
) -> NumberVarianceResult:
    """Variance of the zero count and its boundary-law normalization.

    The normalized ratio Var / (sqrt(k) Len(boundary)) converges to
    zeta(3/2) / (8 pi^{3/2}) ~ 0.0586.
    """
    from .geometry import region_geometry

    if counts is None:
        counts = region_counts(spec.k, [region], n, seed, workers)[:, 0]
    summ = summarize(counts)
    length = region_geometry(region).boundary_length
    denom = math.sqrt(spec.k) * length
    ratio = summ.variance / denom if denom > 0 else math.nan
    ratio_err = summ.stderr_variance / denom if denom > 0 else math.nan
    return NumberVarianceResult(
        summary=summ,
        boundary_length=length,
        ratio=ratio,
        ratio_stderr=ratio_err,
        target=zeta_value(1.5) / (8.0 * math.pi**1.5),
    )


@dataclass(frozen=True)
class HoleProbabilityResult:
    n: int
    p_hat: float
    log_p_hat: float
    stderr: float


def hole_probability(
    spec: EnsembleSpec, region: Region, n: int, seed: int = 0, workers: int = 1, counts: np.ndarray | None = None
) -> HoleProbabilityResult:
    """Fraction of draws whose zero set misses the region entirely."""
    if counts is None:
        counts = region_counts(spec.k, [region], n, seed, workers)[:, 0]
    p = float(np.mean(counts == 0))
    err = math.sqrt(max(p * (1 - p), 1.0 / n) / n)
    logp = math.log(p) if p > 0 else -math.inf
    return HoleProbabilityResult(n=n, p_hat=p, log_p_hat=logp, stderr=err)


def zhu_constant(m: int, r: float) -> float:
    """Hole-decay constant for the polydisc of radius r >= 1 in CP^m."""
    if r < 1:
        raise ValueError("the closed form requires r >= 1")
    if m < 1:
        raise ValueError("need m >= 1")
    harm = sum(1.0 / (j + 1) for j in range(1, m + 1))
    return 2.0 * m * math.log(r) / math.factorial(m + 1) + harm / math.factorial(m)


def higher_codim_correlation_leading(m: int, r: float) -> float:
    """Leading small-r term of the scaled pair correlation in codim m.

    ((m+1)/4) r^{4-2m}: vanishing at m=1 (repulsion), constant 3/4 at m=2,
    divergent for m >= 3 (clustering).
    """
    if m < 1:
        raise ValueError("need m >= 1")
    if r <= 0:
        raise ValueError("need r > 0")
    return (m + 1) / 4.0 * r ** (4 - 2 * m)
