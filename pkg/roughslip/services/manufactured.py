"""
Manufactured Flows
Separable streamfunctions T(t) X(x1) Y(x2) with exact derivatives, and the forcing they induce
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from services.geometry import FourierSeries, RoughWall, frame_from_slope

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Wave:
    """sum of c cos(k x) + s sin(k x) over (k, c, s) triples"""
    terms: Tuple[Tuple[float, float, float], ...]

    @classmethod
    def constant(cls, value: float):
        return cls(((0.0, float(value), 0.0),))

    @classmethod
    def from_series(cls, series: FourierSeries, scale: float = 1.0, wavelength: float = 1.0):
        """scale * series(x / wavelength) written as waves"""
        terms = [(0.0, scale * series.mean_offset, 0.0)]
        for j, c in series.modes:
            terms.append((TWO_PI * j / wavelength, 2.0 * scale * c.real, -2.0 * scale * c.imag))
        return cls(tuple(terms))

    def derivative(self, order: int = 1) -> "Wave":
        terms = self.terms
        for _ in range(order):
            terms = tuple((k, k * s, -k * c) for k, c, s in terms)
        return Wave(terms)

    def __mul__(self, other: "Wave") -> "Wave":
        out = []
        for k1, c1, s1 in self.terms:
            for k2, c2, s2 in other.terms:
                out.append((k1 - k2, 0.5 * (c1 * c2 + s1 * s2), 0.5 * (s1 * c2 - c1 * s2)))
                out.append((k1 + k2, 0.5 * (c1 * c2 - s1 * s2), 0.5 * (c1 * s2 + s1 * c2)))
        return Wave(tuple(out))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for k, c, s in self.terms:
            total += c * np.cos(k * x) + s * np.sin(k * x)
        return total


@dataclass(frozen=True)
class ExpLinear:
    """(a + b x) exp(c x)"""
    a: float
    b: float
    c: float

    def derivative(self, order: int = 1) -> "ExpLinear":
        a, b, c = self.a, self.b, self.c
        for _ in range(order):
            a, b = a * c + b, b * c
        return ExpLinear(a, b, c)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self.a + self.b * x) * np.exp(self.c * x)


@dataclass(frozen=True)
class SeparableTerm:
    time: Polynomial
    x1: Wave
    x2: object  # Wave or ExpLinear

    def derivative(self, dt: int = 0, d1: int = 0, d2: int = 0) -> "SeparableTerm":
        return SeparableTerm(self.time.deriv(dt) if dt else self.time,
                             self.x1.derivative(d1) if d1 else self.x1,
                             self.x2.derivative(d2) if d2 else self.x2)

    def __call__(self, t: float, X1, X2) -> np.ndarray:
        return self.time(t) * self.x1(X1) * self.x2(X2)


@dataclass(frozen=True)
class SeparableField:
    terms: Tuple[SeparableTerm, ...]

    def derivative(self, dt: int = 0, d1: int = 0, d2: int = 0) -> "SeparableField":
        return SeparableField(tuple(term.derivative(dt, d1, d2) for term in self.terms))

    def __add__(self, other: "SeparableField") -> "SeparableField":
        return SeparableField(self.terms + other.terms)

    def scaled(self, factor: float) -> "SeparableField":
        return SeparableField(tuple(SeparableTerm(term.time * factor, term.x1, term.x2) for term in self.terms))

    def laplacian(self) -> "SeparableField":
        return self.derivative(d1=2) + self.derivative(d2=2)

    def __call__(self, t: float, X1, X2) -> np.ndarray:
        X1, X2 = np.broadcast_arrays(np.asarray(X1, float), np.asarray(X2, float))
        total = np.zeros(X1.shape)
        for term in self.terms:
            total += term(t, X1, X2)
        return total


class ManufacturedFlow:
    """
    Exact flow with streamfunction psi, zero pressure and the body force
    f = d_t u + u . grad u - nu Lap u that makes it a solution. The flow is
    at rest before t = 0, so psi must vanish at t = 0.
    """

    def __init__(self, streamfunction: SeparableField, nu: float = 0.0,
                 friction: Optional[FourierSeries] = None, wall: Optional[RoughWall] = None):
        self.psi = streamfunction
        self.nu = float(nu)
        self.friction = friction
        self.wall = wall
        self.u1 = streamfunction.derivative(d2=1)
        self.u2 = streamfunction.derivative(d1=1).scaled(-1.0)
        self.omega = streamfunction.laplacian().scaled(-1.0)

    # --- EXACT FIELDS ---

    def velocity(self, t: float, X1, X2) -> Tuple[np.ndarray, np.ndarray]:
        return self.u1(t, X1, X2), self.u2(t, X1, X2)

    def vorticity(self, t: float, X1, X2) -> np.ndarray:
        return self.omega(t, X1, X2)

    def streamfunction(self, t: float, X1, X2) -> np.ndarray:
        return self.psi(t, X1, X2)

    # --- FORCING PROTOCOL ---

    def force(self, t: float, X1, X2) -> Tuple[np.ndarray, np.ndarray]:
        if t < 0.0:
            zero = np.zeros(np.broadcast(np.asarray(X1), np.asarray(X2)).shape)
            return zero, zero.copy()
        u1, u2 = self.velocity(t, X1, X2)
        out = []
        for comp in (self.u1, self.u2):
            value = (comp.derivative(dt=1)(t, X1, X2)
                     + u1 * comp.derivative(d1=1)(t, X1, X2)
                     + u2 * comp.derivative(d2=1)(t, X1, X2)
                     - self.nu * comp.laplacian()(t, X1, X2))
            out.append(value)
        return out[0], out[1]

    def curl(self, t: float, X1, X2) -> np.ndarray:
        if t < 0.0:
            return np.zeros(np.broadcast(np.asarray(X1), np.asarray(X2)).shape)
        u1, u2 = self.velocity(t, X1, X2)
        w = self.omega
        return (w.derivative(dt=1)(t, X1, X2)
                + u1 * w.derivative(d1=1)(t, X1, X2)
                + u2 * w.derivative(d2=1)(t, X1, X2)
                - self.nu * w.laplacian()(t, X1, X2))

    def wall_vorticity_source(self, t: float, x1: np.ndarray) -> np.ndarray:
        """omega - (2 kappa - lambda) u . tau on the wall, added to the discrete wall condition"""
        if self.wall is None or t < 0.0:
            return np.zeros(np.shape(x1))
        h, hx, hxx = self.wall.height(x1)
        frame = frame_from_slope(hx)
        kappa = hxx / frame.bracket ** 3
        lam = self.friction.evaluate(x1)[0] if self.friction is not None else 0.0
        u1, u2 = self.velocity(t, x1, h)
        slip = u1 * frame.tau[0] + u2 * frame.tau[1]
        return self.vorticity(t, x1, h) - (2.0 * kappa - lam) * slip


def channel_test_flow(height: float, ramp_power: int = 2, nu: float = 0.0) -> ManufacturedFlow:
    """psi = t^p [sin(2 pi x1) sin(pi x2 / L) + 0.5 sin(2 pi x2 / L)]; impermeable at both walls"""
    T = Polynomial([0.0] * ramp_power + [1.0])
    terms = (
        SeparableTerm(T, Wave(((TWO_PI, 0.0, 1.0),)), Wave(((np.pi / height, 0.0, 1.0),))),
        SeparableTerm(T, Wave.constant(0.5), Wave(((TWO_PI / height, 0.0, 1.0),))),
    )
    return ManufacturedFlow(SeparableField(terms), nu=nu)


def rough_wall_test_flow(wall: RoughWall, nu: float, decay_length: float, amplitude: float = 1.0,
                         friction: Optional[FourierSeries] = None, ramp_power: int = 2) -> ManufacturedFlow:
    """
    psi = A t^p sin(2 pi x1) (x2 - h(x1)) exp(-x2 / l): vanishes on the rough wall
    and is negligible at the top when the height is many decay lengths.
    """
    T = Polynomial([0.0] * ramp_power + [amplitude])
    A = Wave(((TWO_PI, 0.0, 1.0),))
    h = Wave.from_series(wall.profile, wall.height_scale, wall.wavelength)
    c = -1.0 / decay_length
    terms = (
        SeparableTerm(T, A, ExpLinear(0.0, 1.0, c)),
        SeparableTerm(-T, A * h, ExpLinear(1.0, 0.0, c)),
    )
    return ManufacturedFlow(SeparableField(terms), nu=nu, friction=friction, wall=wall)
