"""Critical points and critical values of the Hermitian norm on CP^1.

Away from its zeros, ||s|| has only saddles (index 1) and local maxima
(index 2); in the affine chart the critical equation is

    g(z) = f'(z) (1 + |z|^2) - k zbar f(z) = 0,    f(z) != 0,

and the k zeros of the section are its minima.  The solver seeds a damped
Newton iteration on the real 2-D system from local minima of the gradient
field magnitude ||grad s|| on a structured sphere grid (FFT-evaluated per
constant-radius row, both charts), classifies indices from the chart
Hessian of log ||s||^2, and certifies completeness per sample through the
Morse identity  #max - #saddle = 2 - k.  Samples that fail the identity
after a denser reseeding are reported as degenerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np

from .ensembles import EnsembleKind, EnsembleSpec, orthonormal_weights, sample_coeffs
from .geometry import sphere_from_affine
from .parallel import run_replicates

__all__ = [
    "Degenerate",
    "CriticalSet",
    "find_critical_points",
    "critical_batch",
    "expected_crit_count",
    "critical_value_density",
    "VALUE_SCALE",
    "critical_value_histogram",
    "fm_monte_carlo",
    "crit_pair_correlation_constant",
]

# abscissa unit of the limiting critical-value density for the spherical
# ensemble: E||s(z)||^2 = ||B_k||/d_k = 1/pi exactly at every z and k, so
# values are measured in units of the local field scale 1/sqrt(pi).
# Fitted once at k=200 (moment matching, see tests) and frozen.
VALUE_SCALE = 1.7724538509055159  # sqrt(pi)


class Degenerate(RuntimeError):
    """A sample whose critical set failed the Morse-identity certificate."""


@dataclass(frozen=True)
class CriticalSet:
    """Critical points of one section: positions, values, Morse indices."""

    k: int
    sphere: np.ndarray  # (n, 3) unit vectors
    values: np.ndarray  # ||s||_{h^k} at the points
    index: np.ndarray  # 1 = saddle, 2 = local max

    @property
    def n_max(self) -> int:
        return int(np.sum(self.index == 2))

    @property
    def n_saddle(self) -> int:
        return int(np.sum(self.index == 1))

    @property
    def zeros_as_minima(self) -> int:
        return self.k

    def euler_defect(self) -> int:
        """#max - #saddle - (2 - k); zero for a complete nondegenerate set."""
        return self.n_max - self.n_saddle - (2 - self.k)


@lru_cache(maxsize=64)
def _crit_grid(k: int, level: int = 0):
    """Constant-radius rows for gradient-field seeding (denser per level)."""
    spacing = 0.22 / math.sqrt(k) / (1.6**level)
    n_theta = max(10, int(math.pi / (2.0 * spacing)) + 1)
    # columns must resolve both the polynomial degree and the equatorial
    # azimuthal spacing pi/spacing
    need = max(k + 1, int(math.pi / spacing) + 1, 16)
    nfft = 1 << (need - 1).bit_length()
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    affine = theta <= math.pi / 2
    rad = np.where(affine, np.tan(theta / 2.0), 1.0 / np.tan(theta / 2.0))
    powers = rad[:, None] ** np.arange(k + 1)[None, :]
    return rad, affine, powers, nfft


def _grad_field_rows(a: np.ndarray, rad: np.ndarray, powers: np.ndarray, nfft: int, k: int):
    """|g| ||grad||-weighted on the row grid for one chart's coefficients."""
    b = a.shape[0]
    ap = a[:, 1:] * np.arange(1, k + 1)
    t = np.zeros((b, rad.size, nfft), dtype=complex)
    t[:, :, : k + 1] = a[:, None, :] * powers[None, :, :]
    fvals = np.fft.ifft(t, axis=2) * nfft
    t[:, :, :] = 0.0
    t[:, :, :k] = ap[:, None, :] * powers[None, :, :k]
    fpvals = np.fft.ifft(t, axis=2) * nfft
    phase = np.exp(2j * math.pi * np.arange(nfft) / nfft)
    z = rad[:, None] * phase[None, :]
    g = fpvals * (1.0 + rad[:, None] ** 2)[None, :, :1] - k * np.conj(z)[None, :, :] * fvals
    w = np.exp((-0.5 * k - 1.0) * np.log1p(rad**2))
    return np.abs(g) * w[None, :, None]


def _local_minima(h: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    m = np.ones_like(h, dtype=bool)
    m &= h <= np.roll(h, 1, axis=2)
    m &= h <= np.roll(h, -1, axis=2)
    m[:, 1:, :] &= h[:, 1:, :] <= h[:, :-1, :]
    m[:, :-1, :] &= h[:, :-1, :] <= h[:, 1:, :]
    return [np.nonzero(m[i]) for i in range(h.shape[0])]


def _horner3(a: np.ndarray, z: np.ndarray, k: int):
    """f, f', f'' for coefficient rows a at points z (batched)."""
    f = np.zeros_like(z)
    fp = np.zeros_like(z)
    fpp = np.zeros_like(z)
    for j in range(k, -1, -1):
        fpp = fpp * z + 2.0 * fp
        fp = fp * z + f
        f = f * z + a[:, j, None]
    return f, fp, fpp


def _gw_only(a: np.ndarray, z: np.ndarray, k: int) -> np.ndarray:
    """Weighted gradient-field magnitude |g| (1+|z|^2)^{-k/2-1}, batched."""
    f = np.zeros_like(z)
    fp = np.zeros_like(z)
    for j in range(k, -1, -1):
        fp = fp * z + f
        f = f * z + a[:, j, None]
    r2 = (z * np.conj(z)).real
    g = fp * (1.0 + r2) - k * np.conj(z) * f
    return np.abs(g) * np.exp((-0.5 * k - 1.0) * np.log1p(r2))


def _newton_gradient(a: np.ndarray, z: np.ndarray, k: int, iters: int) -> np.ndarray:
    """Backtracking Newton for g(z) = f'(1+|z|^2) - k zbar f = 0, one chart.

    Plain Newton basins shrink with the root crowding at large k; enforcing
    descent of the weighted residual |g|(1+|z|^2)^{-k/2-1} (full step, else
    1/4, else 1/16) keeps far seeds from wandering chaotically.
    """
    gw = _gw_only(a, z, k)
    for _ in range(iters):
        f, fp, fpp = _horner3(a, z, k)
        zb = np.conj(z)
        r2 = (z * zb).real
        g = fp * (1.0 + r2) - k * zb * f
        gz = fpp * (1.0 + r2) + (1.0 - k) * zb * fp
        gzb = fp * z - k * f
        det = (gz * np.conj(gz)).real - (gzb * np.conj(gzb)).real
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = (gzb * np.conj(g) - np.conj(gz) * g) / det
        dz = np.where(np.isfinite(dz), dz, 0.0)
        # cap each step at ~0.1 FS units to keep iterates in-chart
        cap = 0.1 * (1.0 + r2)
        mag = np.abs(dz)
        dz = np.where(mag > cap, dz * (cap / np.where(mag > 0, mag, 1.0)), dz)
        z1 = z + dz
        gw1 = _gw_only(a, z1, k)
        z2 = z + 0.25 * dz
        gw2 = _gw_only(a, z2, k)
        take1 = gw1 <= gw
        take2 = ~take1 & (gw2 <= gw)
        z = np.where(take1, z1, np.where(take2, z2, z + 0.0625 * dz))
        # the escape branch keeps the stale bound; it only biases the next
        # descent test conservatively
        gw = np.where(take1, gw1, np.where(take2, gw2, gw))
    return z


def _gw_only_flat(a: np.ndarray, z: np.ndarray, sec: np.ndarray, k: int) -> np.ndarray:
    f = np.zeros_like(z)
    fp = np.zeros_like(z)
    for j in range(k, -1, -1):
        fp = fp * z + f
        f = f * z + a[sec, j]
    r2 = (z * np.conj(z)).real
    g = fp * (1.0 + r2) - k * np.conj(z) * f
    return np.abs(g) * np.exp((-0.5 * k - 1.0) * np.log1p(r2))


def _newton_gradient_flat(
    a: np.ndarray, z: np.ndarray, sec: np.ndarray, k: int, iters: int
) -> np.ndarray:
    """Backtracking Newton on a flat point list with active-set compaction.

    Residual descent keeps far seeds from wandering (the Newton basin
    shrinks with root crowding at large k); converged points drop out of
    the working set so late sweeps only touch the stragglers.
    """
    out = z.copy()
    active = np.arange(z.size)
    za = z
    sa = sec
    gw = _gw_only_flat(a, za, sa, k)
    for _ in range(iters):
        f = np.zeros_like(za)
        fp = np.zeros_like(za)
        fpp = np.zeros_like(za)
        for j in range(k, -1, -1):
            fpp = fpp * za + 2.0 * fp
            fp = fp * za + f
            f = f * za + a[sa, j]
        zb = np.conj(za)
        r2 = (za * zb).real
        g = fp * (1.0 + r2) - k * zb * f
        gz = fpp * (1.0 + r2) + (1.0 - k) * zb * fp
        gzb = fp * za - k * f
        det = (gz * np.conj(gz)).real - (gzb * np.conj(gzb)).real
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = (gzb * np.conj(g) - np.conj(gz) * g) / det
        dz = np.where(np.isfinite(dz), dz, 0.0)
        cap = 0.1 * (1.0 + r2)
        mag = np.abs(dz)
        dz = np.where(mag > cap, dz * (cap / np.where(mag > 0, mag, 1.0)), dz)
        z1 = za + dz
        gw1 = _gw_only_flat(a, z1, sa, k)
        z2 = za + 0.25 * dz
        gw2 = _gw_only_flat(a, z2, sa, k)
        take1 = gw1 <= gw
        take2 = ~take1 & (gw2 <= gw)
        za = np.where(take1, z1, np.where(take2, z2, za + 0.0625 * dz))
        gw = np.where(take1, gw1, np.where(take2, gw2, gw))
        out[active] = za
        live = np.abs(dz) > 1e-13 * (1.0 + r2)
        if not live.any():
            break
        if live.mean() < 0.9:
            active = active[live]
            za, sa, gw = za[live], sa[live], gw[live]
    return out


def _classify_flat(a: np.ndarray, z: np.ndarray, sec: np.ndarray, k: int):
    """_classify for a flat point list with per-point section index."""
    f = np.zeros_like(z)
    fp = np.zeros_like(z)
    fpp = np.zeros_like(z)
    for j in range(k, -1, -1):
        fpp = fpp * z + 2.0 * fp
        fp = fp * z + f
        f = f * z + a[sec, j]
    zb = np.conj(z)
    r2 = (z * zb).real
    g = fp * (1.0 + r2) - k * zb * f
    gw = np.abs(g) * np.exp((-0.5 * k - 1.0) * np.log1p(r2))
    hnorm = np.abs(f) * np.exp(-0.5 * k * np.log1p(r2))
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = (fpp * f - fp * fp) / (f * f)
    psi_zz = s2 + k * zb * zb / (1.0 + r2) ** 2
    psi_zzb = k / (1.0 + r2) ** 2
    ratio = np.abs(psi_zz) / psi_zzb
    index = np.where(ratio < 1.0, 2, 1)
    degenerate = np.abs(ratio - 1.0) < 1e-6
    return gw, hnorm, index, degenerate, ratio


def _collect_chart_solutions(a: np.ndarray, seeds_idx, rad, nfft, k: int):
    """Newton-solve per section from grid seeds; returns per-section arrays."""
    b = a.shape[0]
    counts = [idx[0].size for idx in seeds_idx]
    if max(counts, default=0) == 0:
        return [np.empty(0, dtype=complex) for _ in range(b)]
    phase = np.exp(2j * math.pi * np.arange(nfft) / nfft)
    flats = [rad[rows] * phase[cols] for rows, cols in seeds_idx]
    z = np.concatenate(flats)
    sec = np.repeat(np.arange(b), counts)
    z = _newton_gradient_flat(a, z, sec, k, iters=26)
    bounds = np.cumsum([0] + counts)
    return [z[bounds[i] : bounds[i + 1]] for i in range(b)]


def _classify(a: np.ndarray, z: np.ndarray, k: int):
    """(residual, value, index, degenerate, fold ratio) at points, one chart.

    ``ratio`` = |psi_zz| / |psi_zzbar| of log||s||^2 decides the Morse index
    (< 1 local max, > 1 saddle); values near 1 mark near-fold points whose
    birth-death partner may hide below the seeding resolution.
    """
    f, fp, fpp = _horner3(a[None, :] if a.ndim == 1 else a, z, k)
    zb = np.conj(z)
    r2 = (z * zb).real
    g = fp * (1.0 + r2) - k * zb * f
    # residual in gradient-field units; the field scale is ||c|| sqrt((k+1)/pi) sqrt(k)
    gw = np.abs(g) * np.exp((-0.5 * k - 1.0) * np.log1p(r2))
    hnorm = np.abs(f) * np.exp(-0.5 * k * np.log1p(r2))
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = (fpp * f - fp * fp) / (f * f)
    psi_zz = s2 + k * zb * zb / (1.0 + r2) ** 2
    psi_zzb = k / (1.0 + r2) ** 2
    ratio = np.abs(psi_zz) / psi_zzb
    index = np.where(ratio < 1.0, 2, 1)
    degenerate = np.abs(ratio - 1.0) < 1e-6
    return gw, hnorm, index, degenerate, ratio


def _ring_seeds(sphere: np.ndarray, k: int, level: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Chart-coordinate rings around previously found points.

    Close max-saddle pairs (near birth-death configurations) can hide one
    partner from the grid seeding; rings around every found point recover
    it.  Pair separations have no repulsion, so the rescue ladder reaches
    well below the grid spacing and tightens with the escalation level.
    Returns (affine_seeds, infinity_seeds).
    """
    radii = (0.05, 0.12, 0.28, 0.6) if level <= 1 else (0.004, 0.012, 0.035, 0.1, 0.28)
    ring = np.concatenate(
        [r * np.exp(1j * (2 * np.pi * np.arange(8) / 8 + 0.2 * level)) for r in radii]
    ) * (0.22 / math.sqrt(k))
    aff, inf = [], []
    for x, y, wz in sphere:
        if wz > -0.99:
            z = (x + 1j * y) / (1.0 + wz)
            aff.append(z + ring * (1.0 + abs(z) ** 2))
        if wz < 0.99:
            u = (x - 1j * y) / (1.0 - wz)
            inf.append(u + ring * (1.0 + abs(u) ** 2))
    a = np.concatenate(aff) if aff else np.empty(0, dtype=complex)
    i = np.concatenate(inf) if inf else np.empty(0, dtype=complex)
    return a[np.abs(a) <= 1.05], i[np.abs(i) <= 1.05]


def _solve_critical(coeffs: np.ndarray, k: int, level: int = 0, extra=None):
    """All critical points for each coefficient row; returns per-section

    (sphere (n,3), values, indices, degenerate_flag) tuples.  ``extra``
    optionally carries per-section (affine, infinity) chart seed arrays.
    """
    b = coeffs.shape[0]
    w = orthonormal_weights(1, k).weights
    a = coeffs * w
    scale = np.abs(a).max(axis=1, keepdims=True)
    a = a / scale
    arev = np.ascontiguousarray(a[:, ::-1])
    rad, affine, powers, nfft = _crit_grid(k, level)
    res = []
    h_aff = _grad_field_rows(a, rad[affine], powers[affine], nfft, k)
    h_inf = _grad_field_rows(arev, rad[~affine], powers[~affine], nfft, k)
    seeds_aff = _local_minima(h_aff)
    seeds_inf = _local_minima(h_inf)
    sol_aff = _collect_chart_solutions(a, seeds_aff, rad[affine], nfft, k)
    sol_inf = _collect_chart_solutions(arev, seeds_inf, rad[~affine], nfft, k)
    # gradient-field magnitude of each section after max-normalization:
    # ||grad s|| ~ ||c|| sqrt((k+1)/pi) sqrt(k), and the normalization
    # divides the whole field by max|a|
    fscale = (
        np.linalg.norm(coeffs, axis=1) / scale[:, 0] * math.sqrt((k + 1) / math.pi) * math.sqrt(k)
    )
    if extra is not None:
        for chart, coeff, sols in ((0, a, sol_aff), (1, arev, sol_inf)):
            counts = [extra[i][chart].size for i in range(b)]
            if max(counts, default=0) == 0:
                continue
            z = np.concatenate([extra[i][chart] for i in range(b)])
            sec = np.repeat(np.arange(b), counts)
            z = _newton_gradient_flat(coeff, z, sec, k, iters=26)
            bounds = np.cumsum([0] + counts)
            for i in range(b):
                if counts[i]:
                    sols[i] = np.concatenate([sols[i], z[bounds[i] : bounds[i + 1]]])
    # near-fold members (ratio ~ 1) may hide a tight birth-death partner
    # below the grid resolution without breaking the Morse identity, so
    # every such point gets a fine rescue ladder before assembly
    fold_z, fold_sec, fold_chart = [], [], []
    kept = []
    for i in range(b):
        za, zi = sol_aff[i], sol_inf[i]
        gw_a, hn_a, idx_a, dg_a, rat_a = _classify(a[i : i + 1], za[None, :], k)
        gw_i, hn_i, idx_i, dg_i, rat_i = _classify(arev[i : i + 1], zi[None, :], k)
        keep_a = (gw_a[0] < 1e-9 * fscale[i]) & (np.abs(za) <= 1.02)
        keep_i = (gw_i[0] < 1e-9 * fscale[i]) & (np.abs(zi) < 1.0)
        kept.append((za[keep_a], zi[keep_i]))
        for chart, zc, rc in ((0, za[keep_a], rat_a[0][keep_a]), (1, zi[keep_i], rat_i[0][keep_i])):
            sus = zc[np.abs(rc - 1.0) < 0.2]
            if sus.size:
                fold_z.append(sus)
                fold_sec.append(np.full(sus.size, i))
                fold_chart.append(np.full(sus.size, chart))
    if fold_z:
        radii = np.array([0.008, 0.025, 0.08, 0.2, 0.5, 1.2]) * (0.22 / math.sqrt(k))
        angles = np.exp(1j * (2 * np.pi * np.arange(8) / 8 + 0.11))
        ring = (radii[:, None] * angles[None, :]).ravel()
        zf = np.concatenate(fold_z)
        sf = np.concatenate(fold_sec)
        cf = np.concatenate(fold_chart)
        seeds = (zf[:, None] + ring[None, :] * (1.0 + np.abs(zf[:, None]) ** 2)).ravel()
        sec = np.repeat(sf, ring.size)
        cht = np.repeat(cf, ring.size)
        for chart, coeff in ((0, a), (1, arev)):
            m = cht == chart
            if not m.any():
                continue
            zs = _newton_gradient_flat(coeff, seeds[m], sec[m], k, iters=26)
            gw, hn, idx, dg, rat = _classify_flat(coeff, zs, sec[m], k)
            good = (gw < 1e-9 * fscale[sec[m]]) & (np.abs(zs) <= (1.02 if chart == 0 else 1.0))
            for i in np.unique(sec[m][good]):
                pick = good & (sec[m] == i)
                if chart == 0:
                    kept[i] = (np.concatenate([kept[i][0], zs[pick]]), kept[i][1])
                else:
                    kept[i] = (kept[i][0], np.concatenate([kept[i][1], zs[pick]]))

    for i in range(b):
        za, zi = kept[i]
        gw_a, hn_a, idx_a, dg_a, _ = _classify(a[i : i + 1], za[None, :], k)
        gw_i, hn_i, idx_i, dg_i, _ = _classify(arev[i : i + 1], zi[None, :], k)
        sph = np.concatenate(
            [
                sphere_from_affine(za),
                sphere_from_affine(zi) * np.array([1.0, -1.0, -1.0]),
            ]
        )
        vals = np.concatenate([hn_a[0], hn_i[0]]) * scale[i, 0]
        idx = np.concatenate([idx_a[0], idx_i[0]])
        deg = bool(dg_a[0].any() or dg_i[0].any())
        # dedupe on the sphere (points found from both charts coincide)
        order = np.lexsort((sph[:, 2], sph[:, 1], sph[:, 0]))
        sph, vals, idx = sph[order], vals[order], idx[order]
        if sph.shape[0]:
            gap = np.linalg.norm(np.diff(sph, axis=0), axis=1)
            keep = np.concatenate([[True], gap > 1e-7])
            sph, vals, idx = sph[keep], vals[keep], idx[keep]
        res.append((sph, vals, idx, deg))
    return res


def critical_batch(coeffs: np.ndarray, k: int, max_level: int = 2):
    """Certified critical sets for a batch of coefficient rows.

    Escalates to denser seeding grids for samples failing the Morse
    identity; survivors of all levels are returned with degenerate=True.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    out = [None] * coeffs.shape[0]
    pending = np.arange(coeffs.shape[0])
    extra = None
    for level in range(max_level + 1):
        if pending.size == 0:
            break
        results = _solve_critical(coeffs[pending], k, level, extra=extra)
        still = []
        rings = []
        for row, (sph, vals, idx, deg) in zip(pending, results):
            n_max = int(np.sum(idx == 2))
            n_sad = int(np.sum(idx == 1))
            complete = (n_max - n_sad == 2 - k) and not deg
            if complete or level == max_level:
                cs = CriticalSet(k=k, sphere=sph, values=vals, index=idx)
                if not complete:
                    object.__setattr__(cs, "_degenerate", True)
                out[row] = cs
            else:
                still.append(row)
                rings.append(_ring_seeds(sph, k, level + 1))
        pending = np.array(still, dtype=int)
        extra = rings
    return out


def is_degenerate(cs: CriticalSet) -> bool:
    return bool(getattr(cs, "_degenerate", False) or cs.euler_defect() != 0)


def find_critical_points(section) -> CriticalSet:
    """Critical set of one section; raises Degenerate if uncertified."""
    cs = critical_batch(section.coeffs[None, :], section.k)[0]
    if is_degenerate(cs):
        raise Degenerate("critical set failed the Morse identity certificate")
    return cs


def expected_crit_count(k: int) -> float:
    """Expected number of critical points, (5k^2 - 8k + 4)/(3k - 2)."""
    if k < 1:
        raise ValueError("need k >= 1")
    return (5.0 * k * k - 8.0 * k + 4.0) / (3.0 * k - 2.0)


def critical_value_density(t) -> np.ndarray | float:
    """Limit density of rescaled critical values, (2t^2-4+8e^{-t^2/2}) t e^{-t^2}.

    Integrates to 5/3, the limit of the expected critical count over k.
    """
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 0, (2 * t * t - 4 + 8 * np.exp(-t * t / 2)) * t * np.exp(-t * t), 0.0)
    if np.ndim(t) == 0:
        return float(out)
    return out


def _critval_worker(lo, hi, seed, k, edges):
    from .parallel import replicate_generator

    spec = EnsembleSpec(k=k, kind=EnsembleKind.SPHERICAL)
    nb = len(edges) - 1
    out = np.zeros((hi - lo, nb + 3), dtype=np.float64)
    coeffs = np.vstack([sample_coeffs(spec, replicate_generator(seed, i)) for i in range(lo, hi)])
    sets = critical_batch(coeffs, k)
    for row, cs in enumerate(sets):
        t = VALUE_SCALE * cs.values
        out[row, :nb] = np.histogram(t, bins=edges)[0]
        out[row, nb] = cs.values.size
        out[row, nb + 1] = cs.n_max
        out[row, nb + 2] = 1.0 if is_degenerate(cs) else 0.0
    return out


@dataclass(frozen=True)
class CriticalValueHistogram:
    edges: np.ndarray
    density: np.ndarray  # per-draw mass/(k * bin width), averaged
    density_stderr: np.ndarray
    total_mass: float  # mean #Crit / k
    total_mass_stderr: float
    mean_count: float
    degenerate_rate: float
    n: int


def critical_value_histogram(
    spec: EnsembleSpec, n: int, edges: np.ndarray, seed: int = 0, workers: int = 1
) -> CriticalValueHistogram:
    """Histogram of rescaled critical values against the limit density.

    Each draw contributes its critical values scaled by VALUE_SCALE with
    weight 1/k, so the total mass estimates #Crit/k (calibration-free) and
    the per-bin density targets (2t^2-4+8e^{-t^2/2}) t e^{-t^2}.
    """
    if spec.kind is not EnsembleKind.SPHERICAL:
        raise ValueError("critical values are defined on the spherical ensemble")
    edges = np.asarray(edges, dtype=float)
    rec = run_replicates(n, seed, partial(_critval_worker, k=spec.k, edges=tuple(edges)), workers=workers)
    nb = len(edges) - 1
    widths = np.diff(edges)
    per_draw = rec[:, :nb] / (spec.k * widths[None, :])
    dens = per_draw.mean(axis=0)
    errs = per_draw.std(axis=0, ddof=1) / math.sqrt(n)
    mass = rec[:, nb] / spec.k
    return CriticalValueHistogram(
        edges=edges,
        density=dens,
        density_stderr=errs,
        total_mass=float(mass.mean()),
        total_mass_stderr=float(mass.std(ddof=1) / math.sqrt(n)),
        mean_count=float(rec[:, nb].mean()),
        degenerate_rate=float(rec[:, nb + 2].mean()),
        n=n,
    )


def fm_monte_carlo(m: int, t: float, n: int, seed: int = 0) -> float:
    """Monte Carlo value of the universal critical-value factor f_m(t).

    Samples the complex symmetric Gaussian matrix ensemble and averages
    |det(A A* - t^2 I)| for A the matrix reshaping of sqrt(Q) Xi (diagonal
    entries of Xi weighted by sqrt(2)); normalization 2/pi^m reproduces the
    m = 1 closed form (1/pi)(2t^2 - 4 + 8 e^{-t^2/2}).  m = 2 output is
    experimental (the matrix-reshape reading of |sqrt(Q) Xi|^2).
    """
    if m not in (1, 2):
        raise ValueError("f_m Monte Carlo supports m in {1, 2}")
    from .parallel import replicate_generator

    rng = replicate_generator(seed, 0)
    dim = m * (m + 1) // 2
    raw = rng.standard_normal((n, 2 * dim))
    xi = (raw[:, :dim] + 1j * raw[:, dim:]) / math.sqrt(2.0)
    if m == 1:
        dets = np.abs(2.0 * np.abs(xi[:, 0]) ** 2 - t * t)
    else:
        amat = np.empty((n, 2, 2), dtype=complex)
        amat[:, 0, 0] = math.sqrt(2.0) * xi[:, 0]
        amat[:, 1, 1] = math.sqrt(2.0) * xi[:, 1]
        amat[:, 0, 1] = amat[:, 1, 0] = xi[:, 2]
        prod = amat @ np.conj(np.swapaxes(amat, 1, 2))
        prod[:, 0, 0] -= t * t
        prod[:, 1, 1] -= t * t
        dets = np.abs(prod[:, 0, 0] * prod[:, 1, 1] - prod[:, 0, 1] * prod[:, 1, 0])
    return float(2.0 / math.pi**m * dets.mean())


def crit_pair_correlation_constant() -> float:
    """Small-separation plateau of the scaled critical pair correlation."""
    return 2.0 / (3.0 * math.pi**2)


def _critpair_worker(lo, hi, seed, k, edges):
    from scipy.spatial import cKDTree

    from .parallel import replicate_generator

    spec = EnsembleSpec(k=k)
    nb = len(edges) - 1
    out = np.zeros((hi - lo, nb + 1), dtype=np.float64)
    coeffs = np.vstack([sample_coeffs(spec, replicate_generator(seed, i)) for i in range(lo, hi)])
    sets = critical_batch(coeffs, k)
    chord_max = 2.0 * math.sin(min(edges[-1] / math.sqrt(k), math.pi / 2))
    for row, cs in enumerate(sets):
        tree = cKDTree(cs.sphere)
        pairs = tree.query_pairs(chord_max, output_type="ndarray")
        if pairs.size:
            chord = np.linalg.norm(cs.sphere[pairs[:, 0]] - cs.sphere[pairs[:, 1]], axis=1)
            rr = np.arcsin(np.clip(chord / 2.0, 0.0, 1.0)) * math.sqrt(k)
            out[row, :nb] = np.histogram(rr, bins=edges)[0]
        out[row, nb] = cs.values.size
    return out


@dataclass(frozen=True)
class CritPairCorrEstimate:
    centers: np.ndarray
    k2_scaled: np.ndarray  # two-point intensity / k^2 (plateau -> 2/(3 pi^2))
    k2_stderr: np.ndarray
    ripley: np.ndarray  # normalized by the empirical intensity (level -> 1)
    n: int


def crit_pair_correlation(spec: EnsembleSpec, edges: np.ndarray, n: int, seed: int = 0, workers: int = 1):
    """Pair-correlation estimator applied to critical sets.

    ``k2_scaled`` is the raw two-point intensity in rescaled coordinates
    divided by k^2 (the units of the small-r plateau constant);
    ``ripley`` divides by the empirical intensity squared so the
    uncorrelated large-r level is 1.
    """
    edges = np.asarray(edges, dtype=float)
    rec = run_replicates(n, seed, partial(_critpair_worker, k=spec.k, edges=tuple(edges)), workers=workers)
    nb = len(edges) - 1
    k = spec.k
    areas = np.array([_annulus_area_crit(k, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    mean_count = rec[:, nb].mean()
    # ordered-pair intensity over the sphere: pairs/(pi * annulus); /k^2 scale
    per_draw = 2.0 * rec[:, :nb] / (math.pi * areas[None, :] * k * k)
    k2 = per_draw.mean(axis=0)
    k2_err = per_draw.std(axis=0, ddof=1) / math.sqrt(rec.shape[0])
    intensity = mean_count / math.pi  # per FS area
    ripley = k2 * k * k / intensity**2
    centers = 0.5 * (edges[:-1] + edges[1:])
    return CritPairCorrEstimate(centers=centers, k2_scaled=k2, k2_stderr=k2_err, ripley=ripley, n=n)


def _annulus_area_crit(k: int, lo: float, hi: float) -> float:
    s = math.sqrt(k)
    return 0.5 * math.pi * (math.cos(2 * lo / s) - math.cos(2 * hi / s))
