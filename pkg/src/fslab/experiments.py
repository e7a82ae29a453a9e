"""Experiment entry points for the lab runner.

Each experiment takes (params, seed, workers) and returns (rows, payload):
rows are (statistic, value, stderr, n) tuples for the CSV, payload feeds
the figure renderer.  Parameters come from a JSON config; templates with
the documented defaults live in TEMPLATES.
"""

from __future__ import annotations

import math

import numpy as np

from . import critical as cr
from . import excursion as ex
from . import metricflow as mf
from . import zerostats as zs
from .ensembles import EnsembleKind, EnsembleSpec
from .geometry import (
    FSPoint,
    KernelModel,
    Region,
    bergman_diagonal,
    dilog,
    fs_distance,
    normalized_kernel,
)
from .harmonics import TestFunction, spherical_harmonic
from .zeros import zeros_batch

__all__ = ["EXPERIMENTS", "TEMPLATES", "parse_region", "parse_test_function", "run_experiment"]


def parse_region(spec: dict) -> Region:
    kind = spec.get("kind", "spherical-cap")
    center = spec.get("center", 0)
    if center == "infinity":
        cpt = FSPoint.infinity()
    else:
        cpt = FSPoint.from_affine(complex(*center) if isinstance(center, (list, tuple)) else complex(center))
    if kind == "spherical-cap":
        if "area" in spec:
            return Region.cap_with_area(float(spec["area"]), cpt)
        return Region.cap(float(spec["radius"]), cpt)
    if kind == "affine-disc":
        return Region.affine_disc(float(spec["radius"]), cpt)
    if kind == "polydisc-chart":
        return Region.polydisc(float(spec["radius"]))
    raise ValueError(f"unknown region kind {kind!r}")


def parse_test_function(spec: dict) -> TestFunction:
    if spec.get("type", "spherical-harmonic") != "spherical-harmonic":
        raise ValueError("only spherical-harmonic test functions are configurable")
    return spherical_harmonic(int(spec.get("ell", 1)), int(spec.get("mm", 0)))


def _rows_from_summary(prefix, summ):
    return [
        (f"{prefix}mean", summ.mean, summ.stderr_mean, summ.n),
        (f"{prefix}variance", summ.variance, summ.stderr_variance, summ.n),
    ]


# ---------------------------------------------------------------------------


def _kernels(params, seed, workers):
    ks = params.get("k_list", [1, 2, 4, 6, 8, 10])
    m = KernelModel(1, max(ks))
    rows = []
    # diagonal identity
    diag_err = max(abs(bergman_diagonal(KernelModel(1, k)) - (k + 1) / math.pi) for k in ks)
    rows.append(("diag_abs_err", diag_err, 0.0, len(ks)))
    # closed form against the quadrature-built kernel
    from .geometry import kernel_quadrature_reference as normalized_kernel_quadrature

    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in ks:
        for _ in range(int(params.get("pairs_per_k", 3))):
            z, w = [complex(*v) for v in rng.normal(scale=0.8, size=(2, 2))]
            got = normalized_kernel(KernelModel(1, k), FSPoint.from_affine(z), FSPoint.from_affine(w))
            worst = max(worst, abs(got - normalized_kernel_quadrature(k, z, w)))
    rows.append(("quadrature_abs_err", worst, 0.0, len(ks)))
    # near-diagonal scaling residual decay
    scal = []
    for k in (100, 400, 1600):
        from .geometry import kernel_scaling_residual

        scal.append(kernel_scaling_residual(KernelModel(1, k), 0, 1))
        rows.append((f"scaling_residual_k{k}", scal[-1], 0.0, 1))
    dists = np.linspace(0, math.pi / 2, 200)
    curves = {k: np.exp(k * np.log(np.maximum(np.cos(dists), 1e-300))) for k in (4, 20, 100)}
    payload = {"dists": dists, "curves": curves, "scaling": scal}
    return rows, payload


def _density(params, seed, workers):
    k = int(params["k"])
    n = int(params["n"])
    region = parse_region(params.get("region", {"kind": "spherical-cap", "radius": math.pi / 4}))
    spec = EnsembleSpec(k=k)
    summ = zs.expected_density_check(spec, region, n, seed, workers)
    from .geometry import region_geometry

    target = k / math.pi * region_geometry(region).area
    rows = _rows_from_summary("count_", summ) + [("target_mean", target, 0.0, n)]
    payload = {"summary": summ, "target": target, "k": k}
    return rows, payload


def _paircorr(params, seed, workers):
    k = int(params["k"])
    n = int(params["n"])
    edges = np.asarray(params.get("edges", np.round(np.arange(0.0, 3.01, 0.25), 3)), dtype=float)
    est = zs.pair_correlation_estimate(EnsembleSpec(k=k), edges, n, seed, workers)
    kappa = zs.universal_pair_correlation(est.centers)
    rows = [(f"kappa_hat_r{c:.3f}", v, e, n) for c, v, e in zip(est.centers, est.values, est.stderrs)]
    window = est.centers >= 0.5
    sup = float(np.max(np.abs(est.values - kappa)[window])) if window.any() else float("nan")
    rows.append(("sup_abs_dev_r_ge_0.5", sup, float(np.max(est.stderrs[window])), n))
    payload = {"estimate": est, "kappa": kappa}
    return rows, payload


def _linstat(params, seed, workers):
    ks = params.get("k_list", [50, 150, 300])
    n = int(params["n"])
    f = parse_test_function(params.get("f", {"ell": 1}))
    rows = []
    mc_vars, bp_vars = [], []
    for k in ks:
        spec = EnsembleSpec(k=k)
        samples = zs.linear_statistic_samples(spec, f, n, seed, workers)
        from .summary import summarize

        summ = summarize(samples)
        bp = zs.variance_bipotential(k, f)
        mc_vars.append(summ)
        bp_vars.append(bp)
        rows += [
            (f"mc_mean_k{k}", summ.mean, summ.stderr_mean, n),
            (f"mc_variance_k{k}", summ.variance, summ.stderr_variance, n),
            (f"bipotential_variance_k{k}", bp, 0.0, n),
        ]
    lead = zs.variance_leading_coeff(f)
    rows.append(("leading_coeff", lead, 0.0, 1))
    kv = int(params.get("k_leading", 400))
    bv = zs.variance_bipotential(kv, f)
    rows.append((f"k_var_bipotential_k{kv}", kv * bv, 0.0, 1))
    payload = {"ks": ks, "mc": mc_vars, "bp": bp_vars, "leading": lead, "k_leading": kv, "bp_leading": bv}
    return rows, payload


def _normality(params, seed, workers):
    ks = params.get("k_list", [30, 100, 300])
    n = int(params["n"])
    f = parse_test_function(params.get("f", {"ell": 1}))
    rows = []
    reports = {}
    samples_largest = None
    for k in ks:
        rep = zs.normality_diagnostics(EnsembleSpec(k=k), f, n, seed, workers)
        reports[k] = rep
        rows += [
            (f"skewness_k{k}", rep.skewness, math.sqrt(6.0 / n), n),
            (f"excess_kurtosis_k{k}", rep.excess_kurtosis, math.sqrt(24.0 / n), n),
            (f"ks_distance_k{k}", rep.ks_distance, 0.0, n),
        ]
        if k == max(ks):
            samples_largest = zs.linear_statistic_samples(EnsembleSpec(k=k), f, min(n, 5000), seed, workers)
    payload = {"reports": reports, "samples": samples_largest}
    return rows, payload


def _numbervar(params, seed, workers):
    k = int(params["k"])
    n = int(params["n"])
    radii = params.get("cap_radii", [math.pi / 4, math.pi / 12])
    regions = [Region.cap(float(r)) for r in radii]
    counts = zs.region_counts(k, regions, n, seed, workers)
    spec = EnsembleSpec(k=k)
    rows = []
    results = []
    for j, reg in enumerate(regions):
        res = zs.number_variance(spec, reg, n, seed, workers, counts=counts[:, j])
        results.append(res)
        rows += [
            (f"variance_cap{j}", res.summary.variance, res.summary.stderr_variance, n),
            (f"ratio_cap{j}", res.ratio, res.ratio_stderr, n),
            (f"boundary_length_cap{j}", res.boundary_length, 0.0, n),
        ]
    rows.append(("nu1_target", results[0].target, 0.0, n))
    if len(results) >= 2:
        vr = results[0].summary.variance / results[1].summary.variance
        lr = results[0].boundary_length / results[1].boundary_length
        rows.append(("variance_ratio", vr, 0.0, n))
        rows.append(("boundary_ratio", lr, 0.0, n))
    payload = {"results": results, "k": k}
    return rows, payload


def _hole(params, seed, workers):
    ks = params.get("k_list", [4, 6, 8, 10, 12, 14, 16])
    n = int(params["n"])
    area = float(params.get("cap_area", 0.05 * math.pi))
    region = Region.cap_with_area(area)
    rows = []
    ps, errs = [], []
    for k in ks:
        res = zs.hole_probability(EnsembleSpec(k=k), region, n, seed, workers)
        ps.append(res.p_hat)
        errs.append(res.stderr)
        rows.append((f"p_hole_k{k}", res.p_hat, res.stderr, n))
    logp = -np.log(np.maximum(ps, 1e-300))
    k2 = np.asarray(ks, dtype=float) ** 2
    slope, intercept = np.polyfit(k2, logp, 1)
    pred = slope * k2 + intercept
    ss_res = float(np.sum((logp - pred) ** 2))
    ss_tot = float(np.sum((logp - logp.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    rows += [("fit_slope", float(slope), 0.0, n), ("fit_r2", r2, 0.0, n)]
    payload = {"ks": ks, "p": ps, "errs": errs, "slope": slope, "intercept": intercept, "r2": r2}
    return rows, payload


def _crit(params, seed, workers):
    ks = params.get("k_list", [5, 10, 20])
    n = int(params["n"])
    rows = []
    means, targets, errs = [], [], []
    from functools import partial

    from .parallel import run_replicates

    for k in ks:
        rec = run_replicates(n, seed, partial(_crit_worker, k=k), workers=workers)
        counts = rec[:, 0]
        defects = rec[:, 1]
        degs = rec[:, 2]
        mean = counts.mean()
        err = counts.std(ddof=1) / math.sqrt(n)
        means.append(mean)
        errs.append(err)
        targets.append(cr.expected_crit_count(k))
        rows += [
            (f"mean_count_k{k}", float(mean), float(err), n),
            (f"target_k{k}", targets[-1], 0.0, n),
            (f"euler_violation_rate_k{k}", float(np.mean(defects != 0)), 0.0, n),
            (f"degenerate_rate_k{k}", float(degs.mean()), 0.0, n),
        ]
    payload = {"ks": ks, "means": means, "errs": errs, "targets": targets}
    return rows, payload


def _crit_worker(lo, hi, seed, k):
    from .ensembles import sample_coeffs
    from .parallel import replicate_generator

    spec = EnsembleSpec(k=k)
    coeffs = np.vstack([sample_coeffs(spec, replicate_generator(seed, i)) for i in range(lo, hi)])
    sets = cr.critical_batch(coeffs, k)
    out = np.zeros((hi - lo, 3))
    for row, cs in enumerate(sets):
        out[row] = (cs.values.size, cs.euler_defect(), 1.0 if cr.is_degenerate(cs) else 0.0)
    return out


def _critvals(params, seed, workers):
    k = int(params["k"])
    n = int(params["n"])
    edges = np.asarray(params.get("edges", np.round(np.arange(0.0, 3.61, 0.12), 3)), dtype=float)
    spec = EnsembleSpec(k=k, kind=EnsembleKind.SPHERICAL)
    hist = cr.critical_value_histogram(spec, n, edges, seed, workers)
    centers = 0.5 * (edges[:-1] + edges[1:])
    curve = cr.critical_value_density(centers)
    sup = float(np.max(np.abs(hist.density - curve)))
    from scipy.integrate import quad

    total, _ = quad(cr.critical_value_density, 0, 12, limit=200)
    rows = [
        ("total_mass", hist.total_mass, hist.total_mass_stderr, n),
        ("target_mass", cr.expected_crit_count(k) / k, 0.0, n),
        ("sup_density_mismatch", sup, float(np.max(hist.density_stderr)), n),
        ("density_integral", float(total), 0.0, 1),
        ("degenerate_rate", hist.degenerate_rate, 0.0, n),
    ]
    payload = {"hist": hist, "centers": centers, "curve": curve, "k": k}
    return rows, payload


def _excursion(params, seed, workers):
    k = int(params["k"])
    n = int(params["n"])
    levels = params.get("u_list", [0.8])
    samples = ex.euler_characteristic_samples(k, levels, n, seed, workers)
    rows = []
    targets = []
    for j, u in enumerate(levels):
        summ = samples.chi_summary(j)
        target = ex.expected_euler_char(k, 1, 0, u)
        targets.append(target)
        rows += [
            (f"chi_mean_u{u}", summ.mean, summ.stderr_mean, n),
            (f"chi_target_u{u}", target, 0.0, n),
        ]
    rows.append(("degenerate_rate", samples.degenerate_rate, 0.0, n))
    rows.append(("sup_mean", float(samples.sup.mean()), float(samples.sup.std(ddof=1) / math.sqrt(n)), n))
    payload = {"samples": samples, "levels": levels, "targets": targets, "k": k}
    return rows, payload


def _metricflow(params, seed, workers):
    k = int(params.get("k", 2))
    t = float(params.get("t", 1.0))
    n = int(params.get("n", 2000))
    rows = []
    # mean identity at a small z-grid
    zgrid = [0.0, 0.4, 0.9 + 0.3j]
    cfg = mf.FlowConfig(k=k, t=t)
    summs = mf.mean_potential_check(cfg, zgrid, n, seed, workers)
    for z, s in zip(zgrid, summs):
        rows.append((f"mean_potential_z{z}", s.mean, s.stderr_mean, n))
    # covariance against I2
    z, w = 0.0, 0.35
    chk = mf.covariance_check(cfg, z, w, n, seed, workers)
    rows += [
        ("cov_empirical", chk.empirical, chk.stderr, n),
        ("cov_predicted", chk.predicted, 0.0, n),
        ("cov_ratio", chk.ratio, chk.stderr / chk.predicted if chk.predicted else float("nan"), n),
    ]
    # I2 large-time limit vs dilogarithm
    xs = np.linspace(0.05, 0.9, 12)
    i2v = np.array([mf.i2_kernel(50.0, float(x)) for x in xs])
    li2 = dilog(xs)
    rows.append(("i2_t50_max_dev", float(np.max(np.abs(i2v - li2))), 0.0, len(xs)))
    # d = 2 radial law
    nrad = int(params.get("n_radial", 20000))
    cfg2 = mf.FlowConfig(k=1, t=0.5)
    from functools import partial

    from .parallel import run_replicates

    ps = run_replicates(nrad, seed + 1, partial(_radial_worker, config=cfg2), workers=workers)
    ks_stat = _radial_ks(ps, 0.5)
    rows.append(("radial_ks_d2", ks_stat, 0.0, nrad))
    payload = {"xs": xs, "i2": i2v, "li2": li2, "radial": ps, "t_radial": 0.5, "ks": ks_stat, "check": chk}
    return rows, payload


def _radial_worker(lo, hi, seed, config):
    ps = mf.brownian_paths_batch(config, lo, hi, seed)
    return mf.geodesic_distance_from_identity(ps)


def _radial_ks(dists: np.ndarray, t: float) -> float:
    """KS distance of sampled radial distances to the curvature -1/2 H^3 law."""
    from .metricflow import h3_radial_density

    x = np.sort(dists)
    grid = np.linspace(0, x[-1] * 1.05, 400)
    dens = h3_radial_density(grid, t)
    cdf_grid = np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(grid))
    cdf_grid = np.concatenate([[0], cdf_grid])
    cdf_grid /= cdf_grid[-1]
    cdf_at_x = np.interp(x, grid, cdf_grid)
    i = np.arange(1, x.size + 1)
    return float(np.max(np.maximum(i / x.size - cdf_at_x, cdf_at_x - (i - 1) / x.size)))


EXPERIMENTS = {
    "kernels": _kernels,
    "density": _density,
    "paircorr": _paircorr,
    "linstat": _linstat,
    "normality": _normality,
    "numbervar": _numbervar,
    "hole": _hole,
    "crit": _crit,
    "critvals": _critvals,
    "excursion": _excursion,
    "metricflow": _metricflow,
}


TEMPLATES = {
    "kernels": {
        "experiment": "kernels",
        "k_list": [1, 2, 4, 6, 8, 10],
        "pairs_per_k": 3,
        "n": 1,
        "seed": 1,
        "_doc": "closed-form kernel vs quadrature oracle; diagonal and scaling checks",
    },
    "density": {
        "experiment": "density",
        "k": 50,
        "region": {"kind": "spherical-cap", "radius": 0.7853981633974483},
        "n": 10000,
        "seed": 7,
        "_doc": "zero counts in a region vs (k/pi) Area",
    },
    "paircorr": {
        "experiment": "paircorr",
        "k": 400,
        "n": 100000,
        "edges": [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0],
        "seed": 11,
        "_doc": "rescaled zero pair correlation vs the universal curve",
    },
    "linstat": {
        "experiment": "linstat",
        "k_list": [50, 150, 300],
        "k_leading": 400,
        "f": {"type": "spherical-harmonic", "ell": 1, "mm": 0},
        "n": 100000,
        "seed": 13,
        "_doc": "linear-statistic variance vs the dilogarithm bipotential",
    },
    "normality": {
        "experiment": "normality",
        "k_list": [30, 100, 300],
        "f": {"type": "spherical-harmonic", "ell": 1, "mm": 0},
        "n": 5000,
        "seed": 17,
        "_doc": "normality diagnostics of the standardized linear statistic",
    },
    "numbervar": {
        "experiment": "numbervar",
        "k": 500,
        "cap_radii": [0.7853981633974483, 0.2617993877991494],
        "n": 100000,
        "seed": 19,
        "_doc": "count variance vs the boundary-length law",
    },
    "hole": {
        "experiment": "hole",
        "k_list": [4, 6, 8, 10, 12, 14, 16],
        "cap_area": 0.15707963267948966,
        "n": 200000,
        "seed": 23,
        "_doc": "hole probability decay vs k^2",
    },
    "crit": {
        "experiment": "crit",
        "k_list": [5, 10, 20],
        "n": 2000,
        "seed": 29,
        "_doc": "critical point counts vs the rational formula",
    },
    "critvals": {
        "experiment": "critvals",
        "k": 200,
        "n": 10000,
        "edges": [round(x, 3) for x in np.arange(0.0, 3.61, 0.12)],
        "seed": 31,
        "_doc": "critical value histogram vs the limit density",
    },
    "excursion": {
        "experiment": "excursion",
        "k": 10,
        "u_list": [0.8],
        "n": 1000000,
        "seed": 37,
        "_doc": "excursion-set Euler characteristic vs the exact polynomial",
    },
    "metricflow": {
        "experiment": "metricflow",
        "k": 4,
        "t": 1.0,
        "n": 10000,
        "n_radial": 20000,
        "seed": 41,
        "_doc": "heat-kernel Bergman metrics: mean identity, I2 covariance, radial law",
    },
}


def run_experiment(name: str, params: dict, seed: int, workers: int):
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    return EXPERIMENTS[name](params, seed, workers)
