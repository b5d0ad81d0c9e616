"""Reference values computed without the package's spectral machinery.

Everything here uses dense trapezoid quadrature, closed forms or scipy, so
a test that compares package output with these functions is comparing two
independent computations.
"""
from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.linalg import expm as scipy_expm


def trapezoid_fourier(f, xi, x_max: float = 14.0, n: int = 5601, chunk: int = 64) -> np.ndarray:
    """``int f(x) exp(-i x xi) dx`` over ``[-x_max, x_max]`` on a dense uniform grid."""
    x = np.linspace(-x_max, x_max, n)
    fx = f(x)
    xi = np.asarray(xi, float)
    out = np.empty(xi.shape, dtype=np.complex128)
    flat, res = xi.ravel(), out.ravel()
    for s in range(0, flat.size, chunk):
        k = flat[s:s + chunk, None]
        res[s:s + chunk] = np.trapezoid(fx[None, :] * np.exp(-1j * k * x[None, :]), x, axis=1)
    return out


def schrodinger_gaussian(x, t: float, c: float = 1.0, xi_max: float = 16.0, n: int = 8001) -> np.ndarray:
    """``exp(i t Delta) exp(-c x^2)`` in 1D by quadrature of the inverse Fourier integral.

    The transform of the data is the closed form ``sqrt(pi/c) exp(-xi^2/(4c))``;
    the symbol of ``i t Delta`` is ``-i t xi^2``.
    """
    xi = np.linspace(-xi_max, xi_max, n)
    fhat = np.sqrt(np.pi / c) * np.exp(-xi ** 2 / (4.0 * c)) * np.exp(-1j * t * xi ** 2)
    x = np.asarray(x, float)
    out = np.empty(x.shape, dtype=np.complex128)
    for s in range(0, x.size, 64):
        xs = x.ravel()[s:s + 64, None]
        out.ravel()[s:s + 64] = np.trapezoid(fhat[None, :] * np.exp(1j * xs * xi[None, :]), xi, axis=1)
    return out / (2.0 * np.pi)


def heat_convolution(x, f, t: float, y_max: float = 16.0, n: int = 6401) -> np.ndarray:
    """``(4 pi t)^{-1/2} int exp(-(x-y)^2/(4t)) f(y) dy`` by trapezoid quadrature."""
    y = np.linspace(-y_max, y_max, n)
    fy = f(y)
    x = np.asarray(x, float)
    K = np.exp(-(x[:, None] - y[None, :]) ** 2 / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)
    return np.trapezoid(K * fy[None, :], y, axis=1)


def weighted_norm_quad(f, gamma: float, lim: float = 12.0) -> float:
    """``||exp(gamma x^2) f||_{L^2(R)}`` by adaptive quadrature on ``[-lim, lim]``."""
    val, _ = integrate.quad(lambda x: abs(np.exp(gamma * x * x) * f(x)) ** 2, -lim, lim,
                            limit=400, epsabs=1e-14, epsrel=1e-13)
    return float(np.sqrt(val))


def l2_quad(f, lim: float = 12.0) -> float:
    return weighted_norm_quad(f, 0.0, lim)


def matrix_exp(M: np.ndarray) -> np.ndarray:
    return scipy_expm(np.asarray(M, dtype=np.complex128))


def random_hermitian(rng: np.random.Generator, m: int, scale: float = 1.0) -> np.ndarray:
    X = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return scale * 0.5 * (X + X.conj().T)
