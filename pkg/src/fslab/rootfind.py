"""Polynomial root finding tuned for rotation-invariant random polynomials.

Two engines share the same contract (all complex roots of a batch of
degree-d polynomials, coefficients low-to-high):

* companion -- batched companion-matrix eigenvalues (LAPACK, O(d^3) per
  polynomial); robust, used for moderate degrees.
* aberth -- vectorized Ehrlich-Aberth simultaneous iteration (O(d^2) per
  sweep); used for large degrees where an eigensolve per draw is
  prohibitive.  Non-converged polynomials (rare) fall back to companion.

Both polish roots with Newton steps evaluated in the chart where the root
is small (|z| <= 1 directly, |z| > 1 through the reversed polynomial), so
accuracy is uniform over the whole sphere.
"""

from __future__ import annotations

import math
from functools import lru_cache as _lru_cache

import numpy as np

__all__ = ["roots_batch", "newton_polish", "max_log_residual"]

_ABERTH_TOL = 1e-12
_ABERTH_MAXITER = 120


def _companion_batch(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of the companion matrices of (B, d+1) coefficients."""
    b, d = a.shape[0], a.shape[1] - 1
    if d == 0:
        return np.empty((b, 0), dtype=complex)
    if d == 1:
        return (-a[:, 0] / a[:, 1])[:, None]
    monic = a[:, :-1] / a[:, -1:]
    comp = np.zeros((b, d, d), dtype=complex)
    idx = np.arange(d - 1)
    comp[:, idx + 1, idx] = 1.0
    comp[:, :, -1] = -monic
    return np.linalg.eigvals(comp)


def _eval_newton_dual(a: np.ndarray, arev: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Newton correction p(z)/p'(z), overflow-safe on the whole sphere.

    For |z| > 1 the correction is computed from the reversed polynomial g,
    p(z) = z^d g(1/z):  p/p' = z^2 g(u) / (d z g(u) - g'(u)),  u = 1/z.
    """
    d = a.shape[-1] - 1
    big = np.abs(z) > 1.0
    zin = np.where(big, 1.0 / np.where(z == 0, 1.0, z), z)

    def horner_pair(c: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = np.zeros_like(x)
        dp = np.zeros_like(x)
        for j in range(c.shape[-1] - 1, -1, -1):
            cj = c[..., j, None] if c.ndim == 2 else c[j]
            dp = dp * x + p
            p = p * x + cj
        return p, dp

    pa, dpa = horner_pair(a, zin)
    pg, dpg = horner_pair(arev, zin)
    with np.errstate(divide="ignore", invalid="ignore"):
        n_small = pa / dpa
        n_big = z * z * pg / (d * z * pg - dpg)
    return np.where(big, n_big, n_small)


def newton_polish(a: np.ndarray, roots: np.ndarray, iters: int = 3) -> np.ndarray:
    """Newton-polish roots of coefficient rows ``a`` ((B, d+1) or (d+1,))."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    z = np.atleast_2d(np.asarray(roots, dtype=complex)).copy()
    arev = a[:, ::-1]
    for _ in range(iters):
        step = _eval_newton_dual(a, arev, z)
        step = np.where(np.isfinite(step), step, 0.0)
        z -= step
    return z.reshape(np.shape(roots))


def _aberth_start(d: int) -> np.ndarray:
    """Deterministic start points roughly uniform on the sphere.

    Radii follow the |z| law of rotation-invariant zeros (P(|z|<r) =
    r^2/(1+r^2)); angles follow the golden-ratio spiral.
    """
    i = np.arange(d)
    q = (i + 0.5) / d
    r = np.sqrt(q / (1.0 - q))
    golden = (1 + math.sqrt(5.0)) / 2
    theta = 2.0 * math.pi * ((i * golden) % 1.0)
    return r * np.exp(1j * theta)


def _aberth_sweeps(a, arev, z, tol, maxiter):
    """Ehrlich-Aberth sweeps in the dtype of ``z`` with section compaction."""
    b = a.shape[0]
    active = np.arange(b)
    out = z.copy()
    za, aa, ra = z, a, arev
    for _ in range(maxiter):
        newton = _eval_newton_dual(aa, ra, za)
        diff = za[:, :, None] - za[:, None, :]
        np.einsum("bii->bi", diff)[...] = 1.0
        s = (1.0 / diff).sum(axis=2) - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            w = newton / (1.0 - newton * s)
        w = np.where(np.isfinite(w), w, 0.0)
        za = za - w
        done = (np.abs(w) <= tol * (1.0 + np.abs(za))).all(axis=1)
        if done.any():
            out[active[done]] = za[done]
            keep = ~done
            if not keep.any():
                return out, np.array([], dtype=int)
            za, aa, ra, active = za[keep], aa[keep], ra[keep], active[keep]
    out[active] = za
    return out, active


def _crowding_sum(z: np.ndarray) -> np.ndarray:
    """sum_{j != i} 1/(z_i - z_j) per row, via real arithmetic.

    numpy's complex division is several times slower than two real
    divisions, and this pairwise pass dominates the seeded engine.
    """
    x = np.ascontiguousarray(z.real, dtype=np.float32)
    y = np.ascontiguousarray(z.imag, dtype=np.float32)
    dx = x[:, :, None] - x[:, None, :]
    dy = y[:, :, None] - y[:, None, :]
    r2 = dx * dx + dy * dy
    np.einsum("bii->bi", r2)[...] = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        sre = (dx / r2).sum(axis=2, dtype=np.float64)
        sim = (dy / r2).sum(axis=2, dtype=np.float64)
    out = sre - 1j * sim
    return np.where(np.isfinite(out), out, 0.0)


def _min_pair_chord(z: np.ndarray) -> np.ndarray:
    """Per-row minimum pairwise chordal (S^2) distance between roots."""
    x = z[:, :, 0] if z.ndim == 3 else z
    n = 1.0 + np.abs(x) ** 2
    sx = np.empty(x.shape + (3,))
    sx[..., 0] = 2.0 * x.real / n
    sx[..., 1] = 2.0 * x.imag / n
    sx[..., 2] = (1.0 - np.abs(x) ** 2) / n
    d2 = ((sx[:, :, None, :] - sx[:, None, :, :]) ** 2).sum(-1)
    np.einsum("bii->bi", d2)[...] = np.inf
    return np.sqrt(d2.min(axis=(1, 2)))


def _aberth_batch(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ehrlich-Aberth sweeps followed by Newton finishing.

    Returns (roots, ok); rows with duplicates or unconverged sweeps are
    flagged for the companion fallback.
    """
    b, d = a.shape[0], a.shape[1] - 1
    z0 = np.ascontiguousarray(np.broadcast_to(_aberth_start(d), (b, d))).astype(complex)
    arev = np.ascontiguousarray(a[:, ::-1])
    z, not_conv = _aberth_sweeps(a, arev, z0, 1e-6, _ABERTH_MAXITER)
    ok = np.ones(b, dtype=bool)
    ok[not_conv] = False
    for _ in range(4):
        step = _eval_newton_dual(a, arev, z)
        step = np.where(np.isfinite(step), step, 0.0)
        z -= step
    resid = max_log_residual(a, z)
    ok &= resid <= math.log(1e-9)
    # a duplicate pair means some true root was missed by Newton contraction
    ok &= _min_pair_chord(z) > 1e-5 / math.sqrt(d)
    return z, ok


@_lru_cache(maxsize=64)
def _seed_grid(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Constant-radius rows covering both charts at ~0.45/sqrt(d) FS spacing.

    Returns (radii, is_affine_row, radius_powers, nfft).  Rows with polar
    angle <= pi/2 live in the affine chart, the rest in the infinity chart,
    so every chart radius is <= 1 and row evaluation is an FFT of the
    radius-scaled coefficients.
    """
    spacing = 0.45 / math.sqrt(d)
    n_theta = max(8, int(math.pi / (2.0 * spacing)) + 1)
    nfft = 1 << max(4, (d + 1).bit_length())
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    affine = theta <= math.pi / 2
    rad = np.where(affine, np.tan(theta / 2.0), 1.0 / np.tan(theta / 2.0))
    powers = rad[:, None] ** np.arange(d + 1)[None, :]
    return rad, affine, powers, nfft


def _hnorm_grid(a: np.ndarray, arev: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hermitian norm of each section on the seed grid.

    Returns (h, radii, is_affine_row) with h of shape (B, n_theta, nfft);
    column c of every row sits at physical azimuth 2 pi c / nfft.
    """
    rad, affine, powers, nfft = _seed_grid(d)
    b = a.shape[0]
    n_theta = rad.size
    vals = np.empty((b, n_theta, nfft), dtype=complex)
    t = np.zeros((b, int(affine.sum()), nfft), dtype=complex)
    t[:, :, : d + 1] = a[:, None, :] * powers[None, affine, :]
    # value at +phi needs the inverse transform in the affine chart
    vals[:, affine, :] = np.fft.ifft(t, axis=2) * nfft
    t = np.zeros((b, int((~affine).sum()), nfft), dtype=complex)
    t[:, :, : d + 1] = arev[:, None, :] * powers[None, ~affine, :]
    # infinity-chart azimuth runs backwards (u = 1/z), so the forward
    # transform lands the columns on the same physical azimuth order
    vals[:, ~affine, :] = np.fft.fft(t, axis=2)
    scale = np.exp(-0.5 * d * np.log1p(rad**2))
    h = np.abs(vals) * scale[None, :, None]
    return h, rad, affine


def _local_min_seeds(h: np.ndarray, rad: np.ndarray, affine: np.ndarray) -> list[np.ndarray]:
    """Per-section affine-coordinate seeds at 4-neighbour local minima of h."""
    b, n_theta, nfft = h.shape
    m = np.ones_like(h, dtype=bool)
    m &= h <= np.roll(h, 1, axis=2)
    m &= h <= np.roll(h, -1, axis=2)
    m[:, 1:, :] &= h[:, 1:, :] <= h[:, :-1, :]
    m[:, :-1, :] &= h[:, :-1, :] <= h[:, 1:, :]
    phase = np.exp(2j * math.pi * np.arange(nfft) / nfft)
    # both charts' columns sit at physical azimuth +2 pi c / nfft
    zaff = np.where(affine[:, None], rad[:, None], 1.0 / rad[:, None]) * phase[None, :]
    seeds = []
    for i in range(b):
        rows, cols = np.nonzero(m[i])
        seeds.append(zaff[rows, cols])
    return seeds


def _dedupe_count(z: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Representatives of distinct roots among converged Newton iterates.

    Converged duplicates coincide to near machine precision, so a sorted
    single-pass scan on S^2 chords with a loose tolerance is exact.
    """
    n = 1.0 + np.abs(z) ** 2
    sph = np.stack([2 * z.real / n, 2 * z.imag / n, (1 - np.abs(z) ** 2) / n], axis=-1)
    order = np.lexsort((sph[:, 2], sph[:, 1], sph[:, 0]))
    zs, ss = z[order], sph[order]
    gap = np.linalg.norm(np.diff(ss, axis=0), axis=1)
    keep = np.concatenate([[True], gap > tol])
    return zs[keep]


_RECOVER_SAMPLES = 44
_RECOVER_MAX_MISS = 16


def _ratio_candidates(pvals: np.ndarray, zs: np.ndarray, found: np.ndarray, miss: int) -> np.ndarray:
    """Candidate missing roots from the deflation quotient.

    With m of d roots in hand, q(z) = p(z) / prod_j (z - r_j) is a degree
    (d - m) polynomial; its values follow from log-stable ratio evaluation
    at equatorial sample points, a tiny Vandermonde fit gives its
    coefficients, and its roots are the candidates.
    """
    with np.errstate(divide="ignore"):
        logq = np.log(pvals) - np.log(zs[:, None] - found[None, :]).sum(axis=1)
    logq -= logq.real.max()
    qv = np.exp(logq)
    v = zs[:, None] ** np.arange(miss + 1)[None, :]
    b, *_ = np.linalg.lstsq(v, qv, rcond=None)
    if not np.all(np.isfinite(b)) or abs(b[-1]) == 0.0:
        return np.empty(0, dtype=complex)
    return np.roots(b[::-1]).astype(complex)


def _seeded_batch(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Grid-seeded Newton roots for random sections with simple zeros.

    Returns (roots, ok); ok rows found exactly d distinct roots that pass
    the residual certificate.  Close zero pairs occasionally merge under
    Newton; a Maehly-deflated recovery pass resolves most of them, and the
    remainder is left to the companion fallback.
    """
    b, d = a.shape[0], a.shape[1] - 1
    arev = np.ascontiguousarray(a[:, ::-1])
    h, rad, affine = _hnorm_grid(a, arev, d)
    seeds = _local_min_seeds(h, rad, affine)
    mmax = max(s.size for s in seeds)
    z = np.empty((b, mmax), dtype=complex)
    for i, s in enumerate(seeds):
        z[i, : s.size] = s
        z[i, s.size :] = s[0] if s.size else 0.0

    # Aberth-corrected Newton with the crowding sum frozen between
    # refreshes: the seeds already sit near distinct roots, so the sum is
    # accurate while costing a pairwise pass only twice.
    crowd = np.zeros_like(z)
    for sweep in range(10):
        if sweep in (0, 4):
            crowd = _crowding_sum(z)
        nwt = _eval_newton_dual(a, arev, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = nwt / (1.0 - nwt * crowd)
        z -= np.where(np.isfinite(w), w, 0.0)
    # plain-Newton endgame for quadratic convergence on an active set
    flat = z.ravel()
    sec = np.repeat(np.arange(b), mmax)
    step = _eval_newton_dual(a, arev, z).ravel()
    step = np.where(np.isfinite(step), step, 0.0)
    flat -= step
    active = np.flatnonzero(np.abs(step) > 1e-13 * (1.0 + np.abs(flat)))
    for _ in range(30):
        if active.size == 0:
            break
        za = flat[active]
        st = _eval_newton_dual_flat(a, arev, za, sec[active])
        st = np.where(np.isfinite(st), st, 0.0)
        za = za - st
        flat[active] = za
        active = active[np.abs(st) > 1e-13 * (1.0 + np.abs(za))]
    z = flat.reshape(b, mmax)
    final = _eval_newton_dual(a, arev, z)
    good = np.abs(np.where(np.isfinite(final), final, 1.0)) < 1e-9 * (1.0 + np.abs(z))
    distincts = []
    short = []
    for i in range(b):
        zi = z[i][good[i]]
        distincts.append(_dedupe_count(zi) if zi.size else zi)
        if distincts[i].size != d:
            short.append(i)

    if short:
        # batched ratio recovery for the sections that miss a few roots
        zs = np.exp(1j * (2.0 * math.pi * np.arange(_RECOVER_SAMPLES) / _RECOVER_SAMPLES + 0.37))
        sub = np.array(short)
        pv = np.zeros((sub.size, _RECOVER_SAMPLES), dtype=complex)
        for j in range(d, -1, -1):
            pv = pv * zs + a[sub, j, None]
        cand_flat = []
        cand_sec = []
        for row, i in enumerate(sub):
            miss = d - distincts[i].size
            if 0 < miss <= _RECOVER_MAX_MISS:
                c = _ratio_candidates(pv[row], zs, distincts[i], miss)
                cand_flat.append(c)
                cand_sec.append(np.full(c.size, i))
        if cand_flat:
            cz = np.concatenate(cand_flat)
            cs = np.concatenate(cand_sec)
            for _ in range(8):
                st = _eval_newton_dual_flat(a, arev, cz, cs)
                cz = cz - np.where(np.isfinite(st), st, 0.0)
            st = np.abs(_eval_newton_dual_flat(a, arev, cz, cs))
            keep = np.isfinite(cz) & (st < 1e-9 * (1.0 + np.abs(cz)))
            for i in short:
                extra = cz[keep & (cs == i)]
                if extra.size:
                    distincts[i] = _dedupe_count(np.concatenate([distincts[i], extra]))

    roots = np.empty((b, d), dtype=complex)
    ok = np.zeros(b, dtype=bool)
    for i in range(b):
        if distincts[i].size == d:
            roots[i] = distincts[i]
            ok[i] = True
    if ok.any():
        resid = max_log_residual(a[ok], roots[ok])
        sel = np.flatnonzero(ok)
        ok[sel[resid > math.log(1e-8)]] = False
    return roots, ok


def _eval_newton_dual_flat(a: np.ndarray, arev: np.ndarray, z: np.ndarray, sec: np.ndarray) -> np.ndarray:
    """Newton correction for a flat list of points with per-point section index."""
    d = a.shape[1] - 1
    big = np.abs(z) > 1.0
    zin = np.where(big, 1.0 / np.where(z == 0, 1.0, z), z)
    pa = np.zeros_like(zin)
    dpa = np.zeros_like(zin)
    pg = np.zeros_like(zin)
    dpg = np.zeros_like(zin)
    for j in range(d, -1, -1):
        dpa = dpa * zin + pa
        pa = pa * zin + a[sec, j]
        dpg = dpg * zin + pg
        pg = pg * zin + arev[sec, j]
    with np.errstate(divide="ignore", invalid="ignore"):
        ns = pa / dpa
        nb = z * z * pg / (d * z * pg - dpg)
    return np.where(big, nb, ns)


def roots_batch(a: np.ndarray, method: str = "auto", polish_iters: int = 2) -> np.ndarray:
    """All roots of each degree-d coefficient row of ``a`` (low-to-high).

    The leading coefficient must be nonzero for every row (degree drop is
    handled by the caller).  Returns (B, d) complex roots, Newton-polished.
    """
    a = np.ascontiguousarray(np.atleast_2d(a), dtype=complex)
    scale = np.abs(a).max(axis=1, keepdims=True)
    if np.any(scale == 0):
        raise ValueError("zero polynomial passed to roots_batch")
    a = a / scale
    d = a.shape[1] - 1
    # keep the O(B d^2) Aberth workspace (and the eigensolver batch) bounded
    cap = max(1, int(10_000_000 // max(d * d, 1)))
    if a.shape[0] > cap:
        return np.concatenate(
            [roots_batch(a[i : i + cap], method, polish_iters) for i in range(0, a.shape[0], cap)]
        )
    if method == "auto":
        method = "companion" if d <= 128 else "seeded"
    if method == "companion":
        roots = _companion_batch(a)
    elif method in ("seeded", "aberth"):
        engine = _seeded_batch if method == "seeded" else _aberth_batch
        roots, ok = engine(a)
        if not ok.all():
            bad = np.flatnonzero(~ok)
            roots[bad] = _companion_batch(a[bad])
    else:
        raise ValueError(f"unknown root-finding method {method!r}")
    if polish_iters and d > 0:
        roots = newton_polish(a, roots, iters=polish_iters)
    return roots


def max_log_residual(a: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """Per-polynomial max of log|p(root)| - log(max|a_j| (1+|root|)^d).

    This is the sphere-uniform residual used by the zero-finder contract;
    values below log(1e-8) certify the roots.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    z = np.atleast_2d(np.asarray(roots, dtype=complex))
    d = a.shape[1] - 1
    arev = a[:, ::-1]
    big = np.abs(z) > 1.0
    zin = np.where(big, 1.0 / np.where(z == 0, 1.0, z), z)
    p = np.zeros_like(zin)
    g = np.zeros_like(zin)
    for j in range(d, -1, -1):
        p = p * zin + a[:, j, None]
        g = g * zin + arev[:, j, None]
    # |p(z)| = |z|^d |g(1/z)| for the far-chart points
    logp = np.where(
        big,
        np.log(np.maximum(np.abs(g), 1e-300)) + d * np.log(np.maximum(np.abs(z), 1.0)),
        np.log(np.maximum(np.abs(p), 1e-300)),
    )
    logbound = np.log(np.abs(a).max(axis=1, keepdims=True)) + d * np.log1p(np.abs(z))
    return (logp - logbound).max(axis=1)
