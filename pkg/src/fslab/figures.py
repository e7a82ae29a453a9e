"""Per-experiment matplotlib figures rendered to reproducible SVG files."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "fslab"

__all__ = ["render_figure"]

_SAVE_KW = {"metadata": {"Date": None}, "bbox_inches": "tight"}


def _save(fig, path: Path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def _fig_kernels(payload, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    for k, curve in payload["curves"].items():
        ax1.plot(payload["dists"], curve, label=f"k={k}")
    ax1.set_xlabel("FS distance")
    ax1.set_ylabel("normalized kernel")
    ax1.legend()
    ks = [100, 400, 1600]
    ax2.loglog(ks, payload["scaling"], "o-")
    ax2.set_xlabel("k")
    ax2.set_ylabel("near-diagonal residual")
    _save(fig, path)


def _fig_density(payload, path):
    sm = payload["summary"]
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    if sm.hist_edges is not None:
        centers = 0.5 * (sm.hist_edges[:-1] + sm.hist_edges[1:])
        ax.bar(centers, sm.hist_counts, width=np.diff(sm.hist_edges), alpha=0.6)
    ax.axvline(payload["target"], color="k", ls="--", label="(k/pi) Area")
    ax.axvline(sm.mean, color="C3", label="MC mean")
    ax.set_xlabel("zero count in region")
    ax.set_ylabel("draws")
    ax.legend()
    _save(fig, path)


def _fig_paircorr(payload, path):
    est = payload["estimate"]
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    rr = np.linspace(1e-3, est.edges[-1], 400)
    from .zerostats import universal_pair_correlation

    ax.plot(rr, universal_pair_correlation(rr), "k-", label="universal curve")
    ax.errorbar(est.centers, est.values, yerr=3 * est.stderrs, fmt="o", ms=4, label="estimate (3 s.e.)")
    ax.axhline(1.0, color="gray", lw=0.6)
    ax.set_xlabel("rescaled separation")
    ax.set_ylabel("pair correlation")
    ax.legend()
    _save(fig, path)


def _fig_linstat(payload, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ks = np.asarray(payload["ks"], dtype=float)
    mc = np.array([s.variance for s in payload["mc"]])
    err = np.array([s.stderr_variance for s in payload["mc"]])
    ax.errorbar(ks, ks * mc, yerr=3 * ks * err, fmt="o", label="k x MC variance (3 s.e.)")
    ax.plot(ks, [k * b for k, b in zip(ks, payload["bp"])], "s--", label="k x bipotential")
    ax.axhline(payload["leading"], color="k", ls=":", label="leading coefficient")
    ax.set_xlabel("k")
    ax.set_ylabel("k x Var(Z, f)")
    ax.legend()
    _save(fig, path)


def _fig_normality(payload, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    x = payload.get("samples")
    if x is not None:
        z = np.sort((x - x.mean()) / x.std(ddof=1))
        from scipy.stats import norm

        ax.plot(z, np.arange(1, z.size + 1) / z.size, label="empirical CDF")
        ax.plot(z, norm.cdf(z), "k--", label="standard normal")
    ax.set_xlabel("standardized linear statistic")
    ax.set_ylabel("CDF")
    ax.legend()
    _save(fig, path)


def _fig_numbervar(payload, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    res = payload["results"]
    k = payload["k"]
    lens = [r.boundary_length for r in res]
    var = [r.summary.variance for r in res]
    err = [3 * r.summary.stderr_variance for r in res]
    ax.errorbar(lens, var, yerr=err, fmt="o", label="MC variance (3 s.e.)")
    ll = np.linspace(0, max(lens) * 1.1, 50)
    ax.plot(ll, res[0].target * math.sqrt(k) * ll, "k--", label="boundary law")
    ax.set_xlabel("boundary length")
    ax.set_ylabel("Var of count")
    ax.legend()
    _save(fig, path)


def _fig_hole(payload, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    k2 = np.asarray(payload["ks"], dtype=float) ** 2
    logp = -np.log(np.maximum(payload["p"], 1e-300))
    ax.plot(k2, logp, "o", label="-log p")
    ax.plot(k2, payload["slope"] * k2 + payload["intercept"], "k--", label=f"fit R^2={payload['r2']:.3f}")
    ax.set_xlabel("k^2")
    ax.set_ylabel("-log hole probability")
    ax.legend()
    _save(fig, path)


def _fig_crit(payload, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ks = payload["ks"]
    ax.errorbar(ks, payload["means"], yerr=[3 * e for e in payload["errs"]], fmt="o", label="MC mean (3 s.e.)")
    kk = np.linspace(min(ks), max(ks), 100)
    ax.plot(kk, (5 * kk**2 - 8 * kk + 4) / (3 * kk - 2), "k--", label="rational formula")
    ax.set_xlabel("k")
    ax.set_ylabel("expected critical points")
    ax.legend()
    _save(fig, path)


def _fig_critvals(payload, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    hist = payload["hist"]
    ax.bar(payload["centers"], hist.density, width=np.diff(hist.edges), alpha=0.6, label="MC histogram")
    tt = np.linspace(0, hist.edges[-1], 400)
    from .critical import critical_value_density

    ax.plot(tt, critical_value_density(tt), "k-", label="limit density")
    ax.set_xlabel("rescaled critical value")
    ax.set_ylabel("density x mass")
    ax.legend()
    _save(fig, path)


def _fig_excursion(payload, path):
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    from .excursion import expected_euler_char

    k = payload["k"]
    uu = np.linspace(0.55, 0.999, 300)
    ax.plot(uu, [expected_euler_char(k, 1, 0, u) for u in uu], "k-", label="exact formula")
    samples = payload["samples"]
    means = samples.chi.mean(axis=0)
    errs = 3 * samples.chi.std(axis=0, ddof=1) / math.sqrt(samples.chi.shape[0])
    ax.errorbar(payload["levels"], means, yerr=errs, fmt="o", label="MC mean (3 s.e.)")
    ax.set_xlabel("threshold u")
    ax.set_ylabel("expected Euler characteristic")
    ax.legend()
    _save(fig, path)


def _fig_metricflow(payload, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(payload["xs"], payload["li2"], "k-", label="dilogarithm")
    ax1.plot(payload["xs"], payload["i2"], "o", ms=4, label="I2(t=50, x)")
    ax1.set_xlabel("x")
    ax1.legend()
    r = payload["radial"]
    from .metricflow import h3_radial_density

    ax2.hist(r, bins=60, density=True, alpha=0.6, label="walk radii")
    rr = np.linspace(0, r.max() * 1.05, 300)
    ax2.plot(rr, h3_radial_density(rr, payload["t_radial"]), "k-", label="H3 law")
    ax2.set_xlabel("geodesic distance")
    ax2.legend()
    _save(fig, path)


_RENDERERS = {
    "kernels": _fig_kernels,
    "density": _fig_density,
    "paircorr": _fig_paircorr,
    "linstat": _fig_linstat,
    "normality": _fig_normality,
    "numbervar": _fig_numbervar,
    "hole": _fig_hole,
    "crit": _fig_crit,
    "critvals": _fig_critvals,
    "excursion": _fig_excursion,
    "metricflow": _fig_metricflow,
}


def render_figure(experiment: str, payload, path: Path) -> None:
    renderer = _RENDERERS.get(experiment)
    if renderer is None or payload is None:
        return
    renderer(payload, Path(path))
