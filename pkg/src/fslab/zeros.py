"""Zero sets of CP^1 sections: root finding, region counts, linear statistics.

A degree-k section has exactly k zeros counted with multiplicity; degree
drop in the affine chart puts the missing zeros at the point at infinity,
which is stored as complex infinity in the root array so that downstream
sphere-based code handles it transparently.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import rootfind
from .ensembles import Section, orthonormal_weights
from .geometry import FSPoint, Region, sphere_from_affine

__all__ = ["ZeroSection", "ZeroSet", "find_zeros", "zeros_batch", "count_in_region", "linear_statistic"]

log = logging.getLogger(__name__)

# spec'd thresholds
_DEGREE_DROP_RTOL = 1e-13
_RESIDUAL_RTOL = 1e-8
_CLUSTER_TOL = 1e-7


class ZeroSection(ValueError):
    """Raised when asked for the zero set of the identically-zero section."""


@dataclass(frozen=True)
class ZeroSet:
    """The k zeros of a section, with multiplicity; inf marks zeros at infinity."""

    k: int
    roots: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.roots, dtype=complex)
        if r.shape != (self.k,):
            raise ValueError(f"expected {self.k} roots with multiplicity, got shape {r.shape}")
        object.__setattr__(self, "roots", r)

    @property
    def n_infinite(self) -> int:
        return int(np.sum(~np.isfinite(self.roots)))

    def sphere(self) -> np.ndarray:
        """(k, 3) unit vectors of the zeros on S^2."""
        return sphere_from_affine(self.roots)

    def points(self) -> list[FSPoint]:
        out = []
        for r in self.roots:
            if np.isfinite(r):
                out.append(FSPoint.from_affine(complex(r)))
            else:
                out.append(FSPoint.infinity())
        return out


def _flag_clusters(roots: np.ndarray) -> None:
    """Log (never merge) near-coincident roots; a.s. absent for random draws."""
    finite = roots[np.isfinite(roots)]
    if finite.size < 2:
        return
    sph = sphere_from_affine(finite)
    order = np.lexsort((finite.imag, finite.real))
    s = sph[order]
    gap = np.linalg.norm(np.diff(s, axis=0), axis=1)
    if np.any(gap < _CLUSTER_TOL):
        log.warning("zero cluster below %.0e detected; possible multiple root", _CLUSTER_TOL)


def zeros_batch(coeffs: np.ndarray, k: int, method: str = "auto") -> np.ndarray:
    """Zero sets for a batch of coefficient rows; returns (B, k) roots.

    Rows must be nonzero.  Degree drop is detected by the trailing-weight
    test |c_k w_k| < 1e-13 ||c|| and the remaining multiplicity is assigned
    to infinity.  All returned finite roots satisfy the polished-residual
    contract.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    b = coeffs.shape[0]
    w = orthonormal_weights(1, k).weights
    a = coeffs * w
    norms = np.linalg.norm(coeffs, axis=1)
    if np.any(norms == 0):
        raise ZeroSection("zero section has no well-defined zero set")
    thresh = _DEGREE_DROP_RTOL * norms
    out = np.empty((b, k), dtype=complex)

    # degrees after trailing-coefficient drop; drop is a probability-zero
    # event for random draws, so only flagged rows take the scan
    degs = np.full(b, k, dtype=int)
    absa = np.abs(a)
    for i in np.flatnonzero(absa[:, k] < thresh):
        d = k
        while d >= 0 and absa[i, d] < thresh[i]:
            d -= 1
        if d < 0:
            raise ZeroSection("all coefficients below the degree-drop threshold")
        degs[i] = d

    for d in np.unique(degs):
        sel = np.flatnonzero(degs == d)
        out[sel, d:] = np.inf
        if d == 0:
            continue
        r = rootfind.roots_batch(a[sel, : d + 1], method=method)
        out[sel, :d] = r
    return out


def find_zeros(section: Section, method: str = "auto") -> ZeroSet:
    """All k zeros of a section, companion/Aberth-found and Newton-polished."""
    roots = zeros_batch(section.coeffs[None, :], section.k, method=method)[0]
    _flag_clusters(roots)
    return ZeroSet(k=section.k, roots=roots)


def count_in_region(zeroset: ZeroSet, region: Region) -> int:
    """Zeros inside an open region, counted with multiplicity."""
    return int(np.sum(region.contains_sphere(zeroset.sphere())))


def linear_statistic(zeroset: ZeroSet, f) -> float:
    """Sum of a test function over the zero set (with multiplicity)."""
    vals = f.value_sphere(zeroset.sphere())
    if not np.all(np.isfinite(vals)):
        raise ValueError("test function is not finite at some zero")
    return float(np.sum(vals))
