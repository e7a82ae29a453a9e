"""Independent numerical oracles used to freeze expected test values.

Everything here is deliberately dumb and slow: direct quadrature of the
defining inner product, Euler-Maclaurin for zeta, brute-force sums.  The
library must agree with these, never the other way around.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def su2_inner_product_quadrature(k: int, i: int, j: int) -> complex:
    """<z^i, z^j> under the rotation-invariant weight by direct 2-D quadrature.

    The angular integral kills i != j exactly; the radial part is
    int_0^inf r^{i+j+1} (1+r^2)^{-(k+2)} dr * (angular factor).
    """
    if i != j:
        # do the full 2-D integral to keep the oracle honest
        re, _ = integrate.dblquad(
            lambda r, t: (r ** (i + j + 1)) * math.cos((i - j) * t) / (1 + r * r) ** (k + 2),
            0.0,
            2.0 * math.pi,
            0.0,
            np.inf,
            epsabs=1e-12,
        )
        return re
    val, _ = integrate.quad(lambda r: r ** (2 * i + 1) / (1 + r * r) ** (k + 2), 0, np.inf, epsabs=1e-14)
    return 2.0 * math.pi * val


def orthonormal_weight_quadrature(k: int, j: int) -> float:
    """w_j from the quadrature norm of z^j."""
    return 1.0 / math.sqrt(su2_inner_product_quadrature(k, j, j).real)


def normalized_kernel_quadrature(k: int, z: complex, w: complex) -> float:
    """P_k(z, w) assembled from the quadrature-built orthonormal basis."""
    weights = np.array([orthonormal_weight_quadrature(k, j) for j in range(k + 1)])
    f = weights * np.array([z**j for j in range(k + 1)])
    g = weights * np.array([w**j for j in range(k + 1)])
    num = abs(np.sum(f * np.conj(g)))
    den = math.sqrt(np.sum(np.abs(f) ** 2) * np.sum(np.abs(g) ** 2))
    return num / den


def zeta_euler_maclaurin(s: float, n: int = 40, terms: int = 8) -> float:
    """Riemann zeta via Euler-Maclaurin with Bernoulli corrections."""
    bern = [1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6, -3617.0 / 510]
    total = sum(m ** (-s) for m in range(1, n))
    total += n ** (-s) / 2.0 + n ** (1.0 - s) / (s - 1.0)
    factor = s / (n ** (s + 1))
    power = 1.0
    for i in range(terms):
        total += bern[i] * factor / math.factorial(2 * i + 2) * power
        factor *= (s + 2 * i + 1) * (s + 2 * i + 2) / (n * n)
        power = power
    return total


def dilog_brute(x: float, nmax: int = 200000) -> float:
    """Plain series sum of Li_2, accelerated only by brute force."""
    n = np.arange(1, nmax + 1)
    return float(np.sum(x**n / n**2))


def fs_area_quadrature(radius_affine: float) -> float:
    """FS area of |z| < r by radial quadrature of (1+r^2)^{-2} * 2 pi r dr."""
    val, _ = integrate.quad(lambda r: 2 * math.pi * r / (1 + r * r) ** 2, 0, radius_affine)
    return val


def fs_boundary_length_quadrature(radius_affine: float) -> float:
    """FS length of |z| = r: 2 pi r / (1 + r^2)."""
    return 2 * math.pi * radius_affine / (1 + radius_affine**2)


def h3_radial_density(r: np.ndarray, t: float) -> np.ndarray:
    """Radial density of hyperbolic-3-space Brownian motion, curvature -1/2.

    For the metric tr((P^{-1}dP)^2) on unit-determinant positive Hermitian
    2x2 matrices the sectional curvature is -1/2, so distances scale by
    sqrt(2) and times by 2 relative to the curvature -1 heat kernel
    p_t(rho) = (4 pi t)^{-3/2} (rho/sinh rho) exp(-t - rho^2/(4t)),
    with sphere area 4 pi sinh^2(rho).
    """
    r = np.asarray(r, dtype=float)
    s = r / math.sqrt(2.0)
    tau = t / 2.0
    dens = (4 * math.pi * tau) ** (-1.5) * 4 * math.pi * s * np.sinh(s) * np.exp(-tau - s * s / (4 * tau))
    return dens / math.sqrt(2.0)


def euler_char_polynomial(k: int, delta: int, g: int, u: float) -> float:
    """Direct arithmetic on the exact expected-Euler-characteristic formula."""
    q = 1.0 - u * u
    return q ** (k * delta - g - 1) * (
        (k * delta * u) ** 2 - k * delta * (g * u * u - 1 + u * u) + (2 - 2 * g) * q
    )


def f1_critical_value_quadrature(t: float) -> float:
    """f_1(t) from its defining Gaussian integral, by radial quadrature.

    f_1(t) = (2/pi^2) * int_C e^{-|xi|^2} |2|xi|^2 - t^2| dxi.
    """
    val, _ = integrate.quad(lambda u: math.exp(-u) * abs(2 * u - t * t), 0, np.inf)
    return 2.0 / math.pi * val
