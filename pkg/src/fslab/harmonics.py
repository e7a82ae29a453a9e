"""Smooth test functions on CP^1 and quadrature over the sphere.

Test functions are built from real spherical harmonics through the standard
CP^1 <-> S^2 identification.  For the zonal family (mm = 0) the Laplacian of
the Fubini-Study metric is carried analytically via the chart identities

    Lap(g(w)) = -8 w g'(w) + 4 (1 - w^2) g''(w),      w = height on S^2,

obtained by direct differentiation of g((1-|z|^2)/(1+|z|^2)) in the affine
chart (no eigenvalue convention assumed); tests cross-check this against a
finite-difference stencil.  Non-zonal harmonics use the finite-difference
Laplacian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as npleg

__all__ = [
    "TestFunction",
    "spherical_harmonic",
    "grid_function",
    "sphere_quadrature",
    "integrate_fs",
    "laplacian_fd_sphere",
]


@dataclass(frozen=True)
class TestFunction:
    """A smooth function on CP^1 with Laplacian access.

    ``value_sphere`` / ``laplacian_sphere`` act on arrays of S^2 unit
    vectors with shape (..., 3); the Laplacian is the Laplace-Beltrami
    operator of the Fubini-Study metric (area pi).
    """

    name: str
    value_sphere: Callable[[np.ndarray], np.ndarray]
    laplacian_sphere: Callable[[np.ndarray], np.ndarray]

    def value_point(self, p) -> float:
        from .geometry import FSPoint

        xyz = p.sphere() if isinstance(p, FSPoint) else np.asarray(p, float)
        return float(self.value_sphere(xyz[None, :])[0])


def _legendre_funcs(ell: int):
    c = np.zeros(ell + 1)
    c[ell] = 1.0
    d1 = npleg.legder(c)
    d2 = npleg.legder(c, 2)
    return c, d1, d2


def spherical_harmonic(ell: int, mm: int = 0) -> TestFunction:
    """Real spherical harmonic Y_ell^mm as a CP^1 test function.

    Zonal (mm = 0) harmonics are the Legendre polynomials P_ell(w) with an
    analytic chart-derived Laplacian; mm != 0 uses associated Legendre
    functions with cos(mm*phi) and a finite-difference Laplacian.
    """
    if ell < 0 or abs(mm) > ell:
        raise ValueError("need ell >= 0 and |mm| <= ell")
    if mm == 0:
        c, d1, d2 = _legendre_funcs(ell)

        def value(xyz: np.ndarray) -> np.ndarray:
            w = np.clip(np.asarray(xyz)[..., 2], -1.0, 1.0)
            return npleg.legval(w, c)

        def lap(xyz: np.ndarray) -> np.ndarray:
            w = np.clip(np.asarray(xyz)[..., 2], -1.0, 1.0)
            return -8.0 * w * npleg.legval(w, d1) + 4.0 * (1.0 - w * w) * npleg.legval(w, d2)

        return TestFunction(f"Y{ell}", value, lap)

    from scipy.special import lpmv

    m = abs(mm)

    def value(xyz: np.ndarray) -> np.ndarray:
        xyz = np.asarray(xyz, float)
        w = np.clip(xyz[..., 2], -1.0, 1.0)
        phi = np.arctan2(xyz[..., 1], xyz[..., 0])
        ang = np.cos(m * phi) if mm > 0 else np.sin(m * phi)
        return lpmv(m, ell, w) * ang

    tf_name = f"Y{ell}m{mm}"
    return TestFunction(tf_name, value, lambda xyz: laplacian_fd_sphere(value, xyz))


def grid_function(name: str, value: Callable[[np.ndarray], np.ndarray]) -> TestFunction:
    """Wrap an arbitrary smooth sphere function; Laplacian by differences."""
    return TestFunction(name, value, lambda xyz: laplacian_fd_sphere(value, xyz))


def laplacian_fd_sphere(value: Callable[[np.ndarray], np.ndarray], xyz: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """FS Laplacian by a 5-point stencil in a rotated affine chart.

    Each evaluation point is rotated to the chart origin (where the FS and
    Euclidean Laplacians agree), so a single plain stencil serves the whole
    sphere, poles included.
    """
    xyz = np.asarray(xyz, float)
    flat = xyz.reshape(-1, 3)
    out = np.empty(flat.shape[0])
    offsets = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
    for i, n in enumerate(flat):
        # orthonormal frame (e1, e2, n)
        a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(n, a)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        # affine chart around n: point(z) = rotation of (2Re z, 2Im z, 1-|z|^2)/(1+|z|^2)
        zs = offsets[:, 0] + 1j * offsets[:, 1]
        den = 1.0 + np.abs(zs) ** 2
        pts = (
            2.0 * zs.real[:, None] * e1[None, :]
            + 2.0 * zs.imag[:, None] * e2[None, :]
            + (1.0 - np.abs(zs) ** 2)[:, None] * n[None, :]
        ) / den[:, None]
        f0 = float(value(n[None, :])[0])
        fs = np.asarray(value(pts), float)
        out[i] = (fs.sum() - 4.0 * f0) / (h * h)
    return out.reshape(xyz.shape[:-1])


def sphere_quadrature(n_theta: int = 64, n_phi: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre x trapezoid quadrature on the unit sphere.

    Returns (points (N,3), weights (N,)) with sum(weights) = 4 pi; spectrally
    accurate for smooth integrands.
    """
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * math.pi / n_phi
    su = np.sqrt(1.0 - u**2)
    x = su[:, None] * np.cos(phi)[None, :]
    y = su[:, None] * np.sin(phi)[None, :]
    z = np.broadcast_to(u[:, None], x.shape)
    pts = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    wts = np.broadcast_to(wu[:, None] * wphi, x.shape).reshape(-1)
    return pts, wts


def integrate_fs(f, n_theta: int = 64, n_phi: int = 64) -> float:
    """Integral of a test function against the FS area form (total mass pi)."""
    pts, wts = sphere_quadrature(n_theta, n_phi)
    vals = f.value_sphere(pts) if isinstance(f, TestFunction) else f(pts)
    return float(np.sum(vals * wts) / 4.0)
