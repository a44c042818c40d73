"""
Flat Half-Plane Oracle
Green-function solutions of the Fourier-mode Laplace problems on the periodic half-plane
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from utilities.errors import CompatibilityError, ContractError, DecayViolationError

TAIL_START = 30.0
TAIL_END = 40.0
HEAD_END = 5.0
DECAY_TOL = 1e-8
TRUNCATION_EXPONENT = 32.3  # exp(-32.3) < 1e-14
QUAD_OPTIONS = {"epsabs": 1e-15, "epsrel": 1e-12, "limit": 400}


@dataclass(frozen=True)
class ModeFunction:
    """Fourier-mode profile F_k(z2) on z2 >= 0"""
    wavenumber: float
    func: Callable[[float], float]

    def __call__(self, z):
        return np.vectorize(self.func, otypes=[float])(z)

    def tail_ratio(self) -> float:
        head = np.max(np.abs(self(np.linspace(0.0, HEAD_END, 101))))
        tail = np.max(np.abs(self(np.linspace(TAIL_START, TAIL_END, 21))))
        if tail == 0.0:
            return 0.0
        return float(tail / head) if head > 0.0 else float("inf")

    def require_decay(self) -> None:
        ratio = self.tail_ratio()
        if ratio > DECAY_TOL:
            raise DecayViolationError(
                f"mode profile does not decay: tail/head ratio {ratio:.3e} on [{TAIL_START}, {TAIL_END}]",
                tail_ratio=ratio,
            )


def _modulus(k: float) -> float:
    m = abs(float(k))
    if m == 0.0:
        raise ContractError("the Dirichlet Green function is defined for nonzero wavenumbers only")
    return m


def green_dirichlet(k: float, z, y):
    """G_k(z, y) = -(1/|k|) exp(-|k| max(z,y)) sinh(|k| min(z,y)) in overflow-free form"""
    m = _modulus(k)
    z, y = np.asarray(z, dtype=float), np.asarray(y, dtype=float)
    upper, lower = np.maximum(z, y), np.minimum(z, y)
    return -(np.exp(-m * (upper - lower)) - np.exp(-m * (upper + lower))) / (2.0 * m)


def poisson_dirichlet_mode(k: float, F: ModeFunction) -> Callable[[np.ndarray], np.ndarray]:
    """Psi with (d^2 - k^2) Psi = F, Psi(0) = 0, Psi decaying"""
    m = _modulus(k)
    F.require_decay()

    def psi(z: float) -> float:
        if z == 0.0:
            return 0.0
        y_max = z + TRUNCATION_EXPONENT / m
        below, _ = quad(lambda y: green_dirichlet(m, z, y) * F.func(y), 0.0, z, **QUAD_OPTIONS)
        above, _ = quad(lambda y: green_dirichlet(m, z, y) * F.func(y), z, y_max, **QUAD_OPTIONS)
        return below + above

    return np.vectorize(psi, otypes=[float])


def poisson_dirichlet_zero_mode(F: ModeFunction) -> Tuple[Callable[[np.ndarray], np.ndarray], float]:
    """
    Psi0'' = F, Psi0(0) = 0, bounded: Psi0(z) = -int_0^z int_s^inf F.
    Also returns the far-field constant Q0 = -int_0^inf y F(y) dy.
    """
    F.require_decay()

    def tail_integral(s: float) -> float:
        value, _ = quad(F.func, s, np.inf, **QUAD_OPTIONS)
        return value

    def psi(z: float) -> float:
        value, _ = quad(tail_integral, 0.0, z, **QUAD_OPTIONS)
        return -value

    far_field, _ = quad(lambda y: y * F.func(y), 0.0, np.inf, **QUAD_OPTIONS)
    return np.vectorize(psi, otypes=[float]), -far_field


def neumann_flat_mode(k: float, g: float, S: Optional[ModeFunction] = None,
                      tol: float = 1e-10) -> Callable[[np.ndarray], np.ndarray]:
    """
    Decaying psi with (d^2 - k^2) psi = S and psi'(0) = g.
    For k = 0 the data must satisfy int S = -g.
    """
    if S is not None:
        S.require_decay()
    m = abs(float(k))

    if m == 0.0:
        total = quad(S.func, 0.0, np.inf, **QUAD_OPTIONS)[0] if S is not None else 0.0
        mismatch = g + total
        if abs(mismatch) > tol * max(1.0, abs(g), abs(total)):
            raise CompatibilityError("zero-mode Neumann data are incompatible", mismatch)

        def psi0(z: float) -> float:
            if S is None:
                return 0.0
            value, _ = quad(lambda y: (y - z) * S.func(y), z, np.inf, **QUAD_OPTIONS)
            return value

        return np.vectorize(psi0, otypes=[float])

    if S is None:
        particular = None
        particular_slope = 0.0
    else:
        particular = poisson_dirichlet_mode(m, S)
        # d/dz int G(z,y) S(y) dy at z = 0
        particular_slope, _ = quad(lambda y: -np.exp(-m * y) * S.func(y), 0.0, np.inf, **QUAD_OPTIONS)
    c = (particular_slope - g) / m

    def psi(z):
        z = np.asarray(z, dtype=float)
        homogeneous = c * np.exp(-m * z)
        return homogeneous if particular is None else homogeneous + particular(z)

    return psi
