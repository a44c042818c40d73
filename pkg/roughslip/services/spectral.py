"""
Discretization Building Blocks
Fourier, Chebyshev and finite-difference operators shared by the solvers
"""

from typing import Tuple

import numpy as np
import scipy.sparse as sp

TWO_PI = 2.0 * np.pi


# --- FOURIER ---

def fourier_nodes(n: int, period: float = 1.0) -> np.ndarray:
    return np.arange(n) * (period / n)


def wavenumbers(n: int, period: float = 1.0) -> np.ndarray:
    return TWO_PI * np.fft.fftfreq(n, d=period / n)


def fourier_derivative(values: np.ndarray, axis: int = -1, order: int = 1, period: float = 1.0) -> np.ndarray:
    """Spectral derivative along a periodic axis; the Nyquist mode is dropped for odd orders"""
    n = values.shape[axis]
    k = wavenumbers(n, period)
    if order % 2 == 1 and n % 2 == 0:
        k = k.copy()
        k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    factor = ((1j * k) ** order).reshape(shape)
    return np.real(np.fft.ifft(factor * np.fft.fft(values, axis=axis), axis=axis))


def fourier_diff_matrix(n: int, order: int = 1, period: float = 1.0) -> np.ndarray:
    return fourier_derivative(np.eye(n), axis=0, order=order, period=period)


def fourier_interp_matrix(n: int, targets: np.ndarray, period: float = 1.0) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant of n equispaced samples at the targets"""
    targets = np.asarray(targets, dtype=float)
    k = wavenumbers(n, period)
    phase = np.exp(1j * np.outer(targets, k))
    if n % 2 == 0:
        # symmetric Nyquist term keeps the interpolant real
        phase[:, n // 2] = np.cos(k[n // 2] * targets)
    coefficients = np.fft.fft(np.eye(n), axis=0) / n
    return np.real(phase @ coefficients)


def dtn_matrix(n: int, period: float = 1.0) -> np.ndarray:
    """Circulant multiplier |k|: the exterior Dirichlet-to-Neumann map of a decaying harmonic field"""
    k = np.abs(wavenumbers(n, period))
    return np.real(np.fft.ifft(k[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))


def dealias(values: np.ndarray, axis: int = 0, keep: float = 2.0 / 3.0) -> np.ndarray:
    n = values.shape[axis]
    j = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    mask = (j <= keep * (n // 2)).astype(float)
    shape = [1] * values.ndim
    shape[axis] = n
    return np.real(np.fft.ifft(np.fft.fft(values, axis=axis) * mask.reshape(shape), axis=axis))


def antiderivative(values: np.ndarray, axis: int = 0, period: float = 1.0) -> np.ndarray:
    """Zero-mean periodic primitive of a zero-mean field; the Nyquist mode is removed"""
    n = values.shape[axis]
    k = wavenumbers(n, period)
    inv = np.zeros_like(k, dtype=complex)
    nonzero = k != 0.0
    inv[nonzero] = 1.0 / (1j * k[nonzero])
    if n % 2 == 0:
        inv[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    return np.real(np.fft.ifft(np.fft.fft(values, axis=axis) * inv.reshape(shape), axis=axis))


# --- CHEBYSHEV ---

def chebyshev(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Lobatto points x_j = cos(pi j / n), j = 0..n, and the collocation derivative matrix"""
    if n == 0:
        return np.array([1.0]), np.zeros((1, 1))
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D = D - np.diag(D.sum(axis=1))
    return x, D


def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Quadrature weights on [-1, 1] for the nodes cos(pi j / n)"""
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    interior = slice(1, n)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n ** 2 - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k ** 2 - 1)
        v -= np.cos(n * theta[interior]) / (n ** 2 - 1)
    else:
        w[0] = w[n] = 1.0 / n ** 2
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k ** 2 - 1)
    w[interior] = 2.0 * v / n
    return w


def barycentric_weights(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def barycentric_eval(nodes: np.ndarray, weights: np.ndarray, values: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Barycentric interpolation along the last axis of values.
    values has shape (..., n); targets has shape values.shape[:-1] + (P,) or (P,).
    """
    targets = np.asarray(targets, dtype=float)
    diff = targets[..., :, None] - nodes
    exact = diff == 0.0
    diff = np.where(exact, 1.0, diff)
    ratio = weights / diff
    hit = exact.any(axis=-1)
    ratio = np.where(hit[..., None], exact.astype(float), ratio)
    numerator = np.einsum("...pn,...n->...p", ratio, values)
    return numerator / ratio.sum(axis=-1)


class ExponentialChebyshevMap:
    """s = L (exp(kt) - 1) / (exp(k) - 1) on t in [0, 1]; clusters nodes at s = 0"""

    def __init__(self, n: int, length: float, stretch: float):
        self.n = n
        self.length = float(length)
        self.stretch = float(stretch)
        x, D = chebyshev(n)
        self.t = (1.0 - x) / 2.0
        self.Dt = -2.0 * D
        self.weights_t = clenshaw_curtis_weights(n) / 2.0
        self.bary = barycentric_weights(n)
        k, L = self.stretch, self.length
        scale = L / np.expm1(k)
        self.s = scale * np.expm1(k * self.t)
        self.ds_dt = scale * k * np.exp(k * self.t)
        inv = 1.0 / self.ds_dt
        self.Ds = inv[:, None] * self.Dt
        # d2/ds2 = (1/s'^2) (d2/dt2 - (s''/s') d/dt), with s''/s' = k
        self.Dss = (inv ** 2)[:, None] * (self.Dt @ self.Dt - k * self.Dt)
        self.weights_s = self.weights_t * self.ds_dt

    def t_of_s(self, s: np.ndarray) -> np.ndarray:
        k, L = self.stretch, self.length
        return np.log1p(np.asarray(s, dtype=float) * np.expm1(k) / L) / k

    def interpolate(self, values: np.ndarray, s_targets: np.ndarray) -> np.ndarray:
        return barycentric_eval(self.t, self.bary, values, self.t_of_s(s_targets))


# --- FINITE DIFFERENCES ---

def periodic_fd_matrices(n: int, period: float = 1.0) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """Second-order centred first and second derivatives on a uniform periodic grid"""
    h = period / n
    e = np.ones(n)
    D1 = sp.diags([-e[:-1], e[:-1]], [-1, 1], shape=(n, n), format="lil")
    D1[0, n - 1] = -1.0
    D1[n - 1, 0] = 1.0
    D2 = sp.diags([e[:-1], -2.0 * e, e[:-1]], [-1, 0, 1], shape=(n, n), format="lil")
    D2[0, n - 1] = 1.0
    D2[n - 1, 0] = 1.0
    return (D1.tocsr() / (2.0 * h)), (D2.tocsr() / h ** 2)


def nonuniform_fd_matrices(s: np.ndarray) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """
    Three-point first and second derivatives on a nonuniform grid.
    End rows use second-order one-sided stencils for the first derivative;
    the second-derivative end rows are left empty (boundary rows are replaced by callers).
    """
    n = len(s)
    D1 = sp.lil_matrix((n, n))
    D2 = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        hm, hp = s[i] - s[i - 1], s[i + 1] - s[i]
        D1[i, i - 1] = -hp / (hm * (hm + hp))
        D1[i, i] = (hp - hm) / (hm * hp)
        D1[i, i + 1] = hm / (hp * (hm + hp))
        D2[i, i - 1] = 2.0 / (hm * (hm + hp))
        D2[i, i] = -2.0 / (hm * hp)
        D2[i, i + 1] = 2.0 / (hp * (hm + hp))
    for i, (a, b) in ((0, (1, 2)), (n - 1, (n - 2, n - 3))):
        h1, h2 = s[a] - s[i], s[b] - s[i]
        D1[i, i] = -(h1 + h2) / (h1 * h2)
        D1[i, a] = h2 / (h1 * (h2 - h1))
        D1[i, b] = -h1 / (h2 * (h2 - h1))
    return D1.tocsr(), D2.tocsr()


def trapezoid_weights(s: np.ndarray) -> np.ndarray:
    w = np.zeros(len(s))
    ds = np.diff(s)
    w[:-1] += ds / 2.0
    w[1:] += ds / 2.0
    return w
