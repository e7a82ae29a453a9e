"""Heat-kernel random Bergman metrics: Brownian motion on positive matrices.

The state is a determinant-one positive Hermitian d x d matrix P; the walk

    P  <-  P^{1/2} exp(sqrt(2 dt) H) P^{1/2},

with H standard Gaussian in a trace-orthonormal basis of traceless
Hermitians, approximates Brownian motion generated by the Laplacian of the
metric tr((P^{-1} dP)^2): E[dist(I, P_t)^2] = 2 (d^2 - 1) t + O(t^2).  For
d = 2 this space is hyperbolic 3-space of curvature -1/2, which pins the
radial-law oracle with no free parameter.

The Bergman potential of P relative to the flat one is
(1/2k) log(v* P v) with v the normalized basis-function vector at the
point; its mean vanishes identically for every unitarily invariant matrix
law, and its two-point correlation follows the kernel I2(t, beta_k)/(4k^2)
whose x-derivative is an explicit Gaussian-weighted integral with the
dilogarithm as the t -> infinity limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .ensembles import orthonormal_weights
from .geometry import berezin_kernel_dots, dilog
from .parallel import run_replicates
from .summary import StatSummary, summarize

__all__ = [
    "StepTooLarge",
    "NotConverged",
    "FlowConfig",
    "Rescale",
    "mabuchi_epsilon",
    "brownian_path",
    "brownian_paths_batch",
    "geodesic_distance_from_identity",
    "bergman_potential",
    "relative_potential_batch",
    "mean_potential_check",
    "i2_x_derivative",
    "i2_kernel",
    "covariance_check",
]


class StepTooLarge(RuntimeError):
    """A single walk step moved more than one unit of geodesic distance."""


class NotConverged(RuntimeError):
    """The I2 quadrature failed its refinement check."""


import enum


class Rescale(enum.Enum):
    NONE = "none"
    MABUCHI = "mabuchi"


def mabuchi_epsilon(k: int) -> float:
    """epsilon_k = k^{-1} d_k^{-1/2}, the Mabuchi time-rescaling unit."""
    return 1.0 / (k * math.sqrt(k + 1))


@dataclass(frozen=True)
class FlowConfig:
    """Degree, total time and stepping of the matrix Brownian motion."""

    k: int
    t: float
    dt: float | None = None
    rescale: Rescale = Rescale.NONE

    def __post_init__(self):
        if self.k < 1 or self.t < 0:
            raise ValueError("need k >= 1 and t >= 0")

    @property
    def dim(self) -> int:
        return self.k + 1

    @property
    def effective_time(self) -> float:
        if self.rescale is Rescale.MABUCHI:
            return self.t / mabuchi_epsilon(self.k) ** 2
        return self.t

    @property
    def effective_dt(self) -> float:
        """min(t/200, 0.01), tightened so a step stays well under unit length.

        E[step^2] = 2 (d^2-1) dt, so the dimension term keeps the geodesic
        walk in its small-step regime for the d_k of interest.
        """
        if self.dt is not None:
            return self.dt
        t = self.effective_time
        d2 = self.dim**2 - 1
        return min(t / 200.0 if t > 0 else 0.01, 0.01, 0.05 / d2)


def _gaussian_traceless(rng: np.random.Generator, d: int, size: int) -> np.ndarray:
    """Standard Gaussian traceless Hermitians in the tr(XY) inner product."""
    g = rng.standard_normal((size, d, d))
    h = rng.standard_normal((size, d, d))
    m = (g + np.swapaxes(g, 1, 2)) / 2.0 + 1j * (h - np.swapaxes(h, 1, 2)) / 2.0
    # diagonal: real N(0,1); off-diagonal: complex with E|.|^2 = 1
    idx = np.arange(d)
    m[:, idx, idx] = g[:, idx, idx]
    tr = np.trace(m, axis1=1, axis2=2) / d
    m[:, idx, idx] -= tr[:, None]
    return m


def _step_batch(p: np.ndarray, h: np.ndarray, sdt: float, check: bool = False) -> np.ndarray:
    """One geodesic step P <- P^{1/2} exp(sdt H) P^{1/2}, det renormalized."""
    lam, vec = np.linalg.eigh(p)
    lam = np.clip(lam, 1e-300, None)
    lam = lam / np.exp(np.mean(np.log(lam), axis=1, keepdims=True))
    sq = (vec * np.sqrt(lam)[:, None, :]) @ np.conj(np.swapaxes(vec, 1, 2))
    mu, uvec = np.linalg.eigh(h)
    if check and np.any(sdt * np.sqrt((mu * mu).sum(axis=1)) > 1.0):
        raise StepTooLarge("a walk step exceeded unit geodesic distance; reduce dt")
    ex = (uvec * np.exp(sdt * mu)[:, None, :]) @ np.conj(np.swapaxes(uvec, 1, 2))
    return sq @ ex @ sq


def brownian_paths_batch(
    config: FlowConfig, lo: int, hi: int, seed: int, check_steps: bool = False
) -> np.ndarray:
    """Final matrices of paths lo..hi, each from its own replicate stream."""
    from .parallel import replicate_generator

    d = config.dim
    t = config.effective_time
    b = hi - lo
    p = np.broadcast_to(np.eye(d, dtype=complex), (b, d, d)).copy()
    if t == 0:
        return p
    dt = config.effective_dt
    steps = max(1, int(round(t / dt)))
    dt = t / steps
    sdt = math.sqrt(2.0 * dt)
    # each path pre-draws its whole increment stream for determinism
    hs = np.empty((b, steps, d, d), dtype=complex)
    for i in range(b):
        rng = replicate_generator(seed, lo + i)
        hs[i] = _gaussian_traceless(rng, d, steps)
    for s in range(steps):
        p = _step_batch(p, hs[:, s], sdt, check=check_steps)
    return p


def brownian_path(config: FlowConfig, rng_or_seed=0, replicate: int = 0) -> np.ndarray:
    """One path's final determinant-one positive Hermitian matrix."""
    seed = rng_or_seed if isinstance(rng_or_seed, (int, np.integer)) else 0
    return brownian_paths_batch(config, replicate, replicate + 1, seed, check_steps=True)[0]


def geodesic_distance_from_identity(p: np.ndarray) -> np.ndarray:
    """delta(I, P) = ||log P||_F in the tr metric; batched."""
    lam = np.linalg.eigvalsh(np.atleast_3d(p) if p.ndim == 2 else p)
    out = np.sqrt((np.log(lam) ** 2).sum(axis=-1))
    return float(out[0]) if p.ndim == 2 else out


def _basis_vector(k: int, z: complex) -> np.ndarray:
    """Normalized vector of basis functions F_j(z) = w_j z^j (affine |z|<=1
    for accuracy; the relative potential only needs its direction)."""
    w = orthonormal_weights(1, k).weights
    if abs(z) <= 1:
        v = w * z ** np.arange(k + 1)
    else:
        v = w * (1.0 / z) ** np.arange(k, -1, -1)
    return v / np.linalg.norm(v)


def bergman_potential(p: np.ndarray, z: complex, k: int, relative: bool = True) -> float:
    """Bergman potential (1/2k) log sum F_j-bar P_jl F_l at an affine point.

    With ``relative`` (default) the flat potential is subtracted, leaving
    (1/2k) log(v* P v) for the normalized basis vector v; this is the
    globally defined, numerically stable quantity.
    """
    v = _basis_vector(k, z)
    quad = float(np.real(np.conj(v) @ p @ v))
    rel = math.log(quad) / (2.0 * k)
    if relative:
        return rel
    w = orthonormal_weights(1, k).weights
    f2 = np.sum(np.abs(w * z ** np.arange(k + 1)) ** 2)
    return rel + math.log(f2) / (2.0 * k)


def relative_potential_batch(ps: np.ndarray, zs: np.ndarray, k: int) -> np.ndarray:
    """(B, len(zs)) relative potentials phi_P - phi_I, batched over paths."""
    vs = np.stack([_basis_vector(k, z) for z in np.asarray(zs, dtype=complex)])
    quad = np.einsum("gi,bij,gj->bg", np.conj(vs), ps, vs).real
    return np.log(quad) / (2.0 * k)


def _potential_worker(lo, hi, seed, config, zs):
    ps = brownian_paths_batch(config, lo, hi, seed)
    return relative_potential_batch(ps, np.asarray(zs), config.k)


def potential_samples(
    config: FlowConfig, zs, n: int, seed: int = 0, workers: int = 1
) -> np.ndarray:
    """(n, len(zs)) samples of phi_P - phi_I over independent paths."""
    return run_replicates(n, seed, partial(_potential_worker, config=config, zs=tuple(zs)), workers=workers)


def mean_potential_check(
    config: FlowConfig, zs, n: int, seed: int = 0, workers: int = 1
) -> list[StatSummary]:
    """Per-point summaries of phi_P - phi_I; the exact mean is 0 at every z."""
    if n < 1000:
        raise ValueError("need n >= 1000 paths")
    vals = potential_samples(config, zs, n, seed, workers)
    return [summarize(vals[:, j]) for j in range(vals.shape[1])]


# ---------------------------------------------------------------------------
# the I2 correlation kernel


def _i2_integrand(lam: np.ndarray, t: float, x: float) -> np.ndarray:
    """Gaussian-weighted integrand of the x-derivative of I2, overflow-safe.

    The weight e^{-t/2 - lam^2/(2t)} cosh(lam) is written as a Gaussian bump
    centered at lam = t, and the log factor uses the exact identity
    log((D+e)/(D-e)) = 2 log(D+e) + 2 log sinh(lam), D = sqrt(coth^2 - x),
    e = sqrt(1-x), which has no cancellation at large lam.
    """
    lam = np.asarray(lam, dtype=float)
    e = math.sqrt(max(1.0 - x, 0.0))
    with np.errstate(divide="ignore", over="ignore"):
        sinh2 = np.sinh(lam) ** 2
        small = lam < 25.0
        delta = np.where(small, 1.0 / np.where(sinh2 > 0, sinh2, 1e-300), 4.0 * np.exp(-2.0 * lam))
    d2 = (1.0 - x) + delta
    dd = np.sqrt(d2)
    logsinh = np.where(small, np.log(np.maximum(np.sinh(lam), 1e-300)), lam - math.log(2.0) + np.log1p(np.exp(-2 * lam)))
    lfac = 2.0 * (np.log(dd + e) + logsinh) if e > 0 else np.zeros_like(lam)
    # e = 0 (x = 1): the log factor vanishes
    weight = np.exp(-((lam - t) ** 2) / (2.0 * t)) * (1.0 + np.exp(-2.0 * lam)) / (2.0 * math.sqrt(2.0 * math.pi * t))
    return weight * lfac / dd


def i2_x_derivative(t: float, x: float) -> float:
    """dI2/dx(t, x) for t > 0, 0 < x < 1."""
    if not 0.0 < x < 1.0:
        raise ValueError("need 0 < x < 1")
    if t <= 0:
        raise ValueError("need t > 0")
    width = math.sqrt(t)
    hi = t + 10.0 * width + 14.0
    cuts = sorted({0.0, min(3.0, hi), max(0.0, t - 9.0 * width), min(hi, t + 9.0 * width), hi})
    nodes, wts = np.polynomial.legendre.leggauss(72)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        lam = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        total += float(np.sum(_i2_integrand(lam, t, x) * wts) * 0.5 * (b - a))
    return 2.0 * t / x - math.sqrt(1.0 - x) / x * 2.0 * total


def i2_kernel(t: float, x: float, rtol: float = 1e-6) -> float:
    """I2(t, x) = int_0^x dI2/dx, with the boundary value I2(t, 0) = 0.

    (Distant points decorrelate, and the t -> infinity limit Li2 also
    vanishes at 0.)  Gauss-Legendre in x, refined once; raises NotConverged
    if the refinement moves the value beyond ``rtol``.
    """
    if not 0.0 <= x < 1.0:
        raise ValueError("need 0 <= x < 1")
    if x == 0.0:
        return 0.0

    def integrate(order: int) -> float:
        nodes, wts = np.polynomial.legendre.leggauss(order)
        xs = 0.5 * x * nodes + 0.5 * x
        return float(sum(w * i2_x_derivative(t, xi) for xi, w in zip(xs, wts)) * 0.5 * x)

    v1 = integrate(32)
    v2 = integrate(48)
    if abs(v2 - v1) > rtol * max(abs(v2), 1e-12) + 1e-9:
        v3 = integrate(80)
        if abs(v3 - v2) > rtol * max(abs(v3), 1e-12) + 1e-9:
            raise NotConverged(f"I2({t}, {x}) quadrature drift {abs(v3 - v2):.2e}")
        return v3
    return v2


def h3_radial_density(r: np.ndarray, t: float) -> np.ndarray:
    """Radial density of the d = 2 walk: hyperbolic 3-space at curvature -1/2.

    For the metric tr((P^{-1}dP)^2) on determinant-one positive Hermitian
    2 x 2 matrices the sectional curvature is -1/2, so distances scale by
    sqrt(2) and times by 2 relative to the curvature -1 heat kernel
    (4 pi t)^{-3/2} (rho/sinh rho) e^{-t - rho^2/(4t)} with sphere area
    4 pi sinh^2(rho).
    """
    r = np.asarray(r, dtype=float)
    s = r / math.sqrt(2.0)
    tau = t / 2.0
    dens = (4 * math.pi * tau) ** (-1.5) * 4 * math.pi * s * np.sinh(s) * np.exp(-tau - s * s / (4 * tau))
    return dens / math.sqrt(2.0)


@dataclass(frozen=True)
class CovarianceCheck:
    empirical: float
    predicted: float
    ratio: float
    stderr: float
    beta: float


def covariance_check(
    config: FlowConfig, z: complex, w: complex, n: int, seed: int = 0, workers: int = 1
) -> CovarianceCheck:
    """Sample covariance of (phi_P(z), phi_P(w)) against I2(t, beta_k)/(4k^2)."""
    if n < 100:
        raise ValueError("need n >= 100 paths")
    k = config.k
    vals = potential_samples(config, (z, w), n, seed, workers)
    a, b = vals[:, 0], vals[:, 1]
    prod = (a - a.mean()) * (b - b.mean())
    emp = float(prod.sum() / (n - 1))
    err = float(prod.std(ddof=1) / math.sqrt(n))
    from .geometry import FSPoint, fs_distance

    d = fs_distance(FSPoint.from_affine(z), FSPoint.from_affine(w))
    beta = float(berezin_kernel_dots(k, math.cos(2.0 * d)))
    pred = i2_kernel(config.effective_time, beta) / (4.0 * k * k) if beta > 0 else 0.0
    ratio = emp / pred if pred != 0 else math.nan
    return CovarianceCheck(empirical=emp, predicted=pred, ratio=ratio, stderr=err, beta=beta)
