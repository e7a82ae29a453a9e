"""Monte Carlo summaries: mean, variance and their standard errors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["StatSummary", "summarize"]


@dataclass(frozen=True)
class StatSummary:
    """Replicate-level summary of a scalar Monte Carlo observable.

    ``stderr_variance`` is the delete-one jackknife error of the variance
    estimate, so variance-based acceptance checks carry honest error bars.
    """

    n: int
    mean: float
    variance: float
    stderr_mean: float
    stderr_variance: float
    hist_edges: np.ndarray | None = None
    hist_counts: np.ndarray | None = None

    def as_rows(self) -> list[tuple[str, float, float]]:
        return [
            ("mean", self.mean, self.stderr_mean),
            ("variance", self.variance, self.stderr_variance),
        ]


def _jackknife_variance_stderr(x: np.ndarray) -> float:
    """Delete-one jackknife stderr of the unbiased sample variance."""
    n = x.size
    if n < 3:
        return float("nan")
    s1 = x.sum()
    s2 = (x * x).sum()
    s1i = s1 - x
    s2i = s2 - x * x
    var_i = (s2i - s1i * s1i / (n - 1)) / (n - 2)
    return float(np.sqrt((n - 1) / n * np.sum((var_i - var_i.mean()) ** 2)))


def summarize(x: np.ndarray, bins: np.ndarray | int | None = None) -> StatSummary:
    """Summary statistics of replicate observations (1-D array)."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("cannot summarize zero observations")
    mean = float(x.mean())
    var = float(x.var(ddof=1)) if n > 1 else 0.0
    se_mean = float(np.sqrt(var / n)) if n > 1 else float("nan")
    se_var = _jackknife_variance_stderr(x)
    edges = counts = None
    if bins is not None:
        counts, edges = np.histogram(x, bins=bins)
    return StatSummary(
        n=n,
        mean=mean,
        variance=var,
        stderr_mean=se_mean,
        stderr_variance=se_var,
        hist_edges=edges,
        hist_counts=counts,
    )
