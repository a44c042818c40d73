"""
Rough Wall Geometry
Periodic profiles, boundary frames, curvature and the flattening change of variables
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Iterable

import numpy as np

from utilities.errors import ContractError, DomainMembershipError

TWO_PI = 2.0 * np.pi
POSITIVITY_OVERSAMPLING = 16
HERMITIAN_TOL = 1e-12
INTEGER_TOL = 1e-9
MEMBERSHIP_TOL = 1e-12

FRAME_SCALES = ("physical", "rescaled", "cell")


@dataclass(frozen=True)
class FourierSeries:
    """Real 1-periodic trigonometric polynomial m + sum_j c_j exp(2 pi i j z)"""
    fourier_coeffs: Tuple[Tuple[int, complex], ...] = ()
    mean_offset: float = 0.0

    def __post_init__(self):
        modes = {}
        for j, c in self.fourier_coeffs:
            j, c = int(j), complex(c)
            if j == 0:
                raise ValueError("wavenumber 0 is carried by mean_offset, not by fourier_coeffs")
            key, value = (j, c) if j > 0 else (-j, c.conjugate())
            if key in modes and abs(modes[key] - value) > HERMITIAN_TOL * max(1.0, abs(value)):
                raise ValueError(f"coefficients for wavenumbers ±{key} are not Hermitian-symmetric")
            modes[key] = value
        object.__setattr__(self, "_modes", tuple(sorted(modes.items())))

    @classmethod
    def from_triples(cls, triples: Iterable[Tuple[int, float, float]], mean_offset: float = 0.0):
        """Build from (j, real part, imaginary part) triples as they appear in config files"""
        coeffs = tuple((int(j), complex(re, im)) for j, re, im in triples)
        return cls(coeffs, float(mean_offset))

    @property
    def modes(self) -> Tuple[Tuple[int, complex], ...]:
        return self._modes

    @property
    def max_wavenumber(self) -> int:
        return max((j for j, _ in self._modes), default=0)

    def evaluate(self, z) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        value = np.full(z.shape, float(self.mean_offset))
        d1 = np.zeros(z.shape)
        d2 = np.zeros(z.shape)
        for j, c in self._modes:
            k = TWO_PI * j
            cos, sin = np.cos(k * z), np.sin(k * z)
            value += 2.0 * (c.real * cos - c.imag * sin)
            d1 += 2.0 * k * (-c.real * sin - c.imag * cos)
            d2 += 2.0 * k * k * (-c.real * cos + c.imag * sin)
        return value, d1, d2

    def sample_points(self) -> np.ndarray:
        n = max(64, 2 * POSITIVITY_OVERSAMPLING * self.max_wavenumber)
        return np.arange(n) / n

    def infimum(self) -> float:
        return float(np.min(self.evaluate(self.sample_points())[0]))

    def sup_norms(self) -> Tuple[float, float, float]:
        """Sampled sup norms of the series and its first two derivatives"""
        value, d1, d2 = self.evaluate(self.sample_points())
        return float(np.max(np.abs(value))), float(np.max(np.abs(d1))), float(np.max(np.abs(d2)))

    def c2_norm(self) -> float:
        return float(sum(self.sup_norms()))


@dataclass(frozen=True)
class RoughProfile(FourierSeries):
    """Roughness profile eta; strictly positive so the rough wall stays above x2 = 0"""

    def __post_init__(self):
        super().__post_init__()
        inf_eta = self.infimum()
        if inf_eta <= 0.0:
            raise ValueError(f"roughness profile must be positive, sampled inf η = {inf_eta:.6g}")

    @classmethod
    def constant(cls, value: float):
        return cls((), float(value))

    @classmethod
    def default(cls):
        # eta = 2 + cos(2 pi z)
        return cls(((1, 0.5 + 0.0j),), 2.0)


def profile_eval(profile: FourierSeries, z1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(eta, eta', eta'') from the exact derivatives of the Fourier series"""
    return profile.evaluate(z1)


@dataclass(frozen=True)
class RoughWall:
    """Wall graph x2 = height_scale * eta(x1 / wavelength) on a period of the given length"""
    profile: FourierSeries
    height_scale: float
    wavelength: float = 1.0
    period: float = 1.0

    @classmethod
    def flat(cls, period: float = 1.0):
        return cls(FourierSeries(), 0.0, 1.0, period)

    def height(self, x1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        eta, d1, d2 = self.profile.evaluate(np.asarray(x1, dtype=float) / self.wavelength)
        a, lam = self.height_scale, self.wavelength
        return a * eta, a * d1 / lam, a * d2 / lam ** 2

    def max_height(self) -> float:
        x = self.profile.sample_points() * self.wavelength
        return float(np.max(self.height(x)[0]))

    def max_slope(self) -> float:
        x = self.profile.sample_points() * self.wavelength
        return float(np.max(np.abs(self.height(x)[1])))


@dataclass(frozen=True)
class DomainParams:
    """Roughness scale epsilon, layer exponent n0 (alpha = 1/n0) and profile"""
    epsilon: float
    n0: int
    profile: RoughProfile

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        inverse = 1.0 / self.epsilon
        if abs(inverse - round(inverse)) > INTEGER_TOL:
            raise ValueError(f"1/ε must be an integer, got 1/ε = {inverse:.12g}")
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise ValueError(f"n0 must be a positive integer, got {self.n0}")
        if not isinstance(self.profile, RoughProfile):
            raise TypeError("profile must be a RoughProfile")

    @property
    def alpha(self) -> float:
        return 1.0 / self.n0

    @property
    def amplitude(self) -> float:
        """eps^alpha, the wall height in rescaled variables"""
        return self.epsilon ** self.alpha

    @property
    def periods(self) -> int:
        return int(round(1.0 / self.epsilon))

    def wall(self, frame_scale: str = "physical") -> RoughWall:
        if frame_scale == "physical":
            return RoughWall(self.profile, self.epsilon ** (1.0 + self.alpha), self.epsilon, 1.0)
        if frame_scale == "rescaled":
            return RoughWall(self.profile, self.amplitude, 1.0, float(self.periods))
        if frame_scale == "cell":
            return RoughWall(self.profile, self.amplitude, 1.0, 1.0)
        raise ValueError(f"unknown frame scale '{frame_scale}', expected one of {FRAME_SCALES}")


@dataclass(frozen=True)
class Frame:
    """Inward unit normal, unit tangent and the bracket <eps^alpha eta'>; vectors stacked on axis 0"""
    n: np.ndarray
    tau: np.ndarray
    bracket: np.ndarray


def frame_from_slope(slope) -> Frame:
    slope = np.asarray(slope, dtype=float)
    bracket = np.sqrt(1.0 + slope ** 2)
    n = np.stack([-slope, np.ones_like(slope)]) / bracket
    tau = np.stack([np.ones_like(slope), slope]) / bracket
    return Frame(n=n, tau=tau, bracket=bracket)


def frame(domain: DomainParams, z1) -> Frame:
    # the slope is scale invariant: eps^{1+alpha} eta'(x1/eps)/eps = eps^alpha eta'(z1)
    _, d1, _ = domain.profile.evaluate(z1)
    return frame_from_slope(domain.amplitude * d1)


def curvature(domain: DomainParams, z1, frame_scale: str = "rescaled") -> np.ndarray:
    _, d1, d2 = domain.profile.evaluate(z1)
    a = domain.amplitude
    kappa = a * d2 / (1.0 + (a * d1) ** 2) ** 1.5
    if frame_scale == "rescaled":
        return kappa
    if frame_scale == "physical":
        return kappa / domain.epsilon
    raise ValueError(f"frame_scale must be 'physical' or 'rescaled', got '{frame_scale}'")


@dataclass(frozen=True)
class MetricTerms:
    """d/dx1 = d/dx1~ + p d/ds and d/dx2 = q d/ds for the map x2 = s + h(x1) beta(s)"""
    jacobian: np.ndarray
    p: np.ndarray
    q: np.ndarray
    lap_s: np.ndarray

    @property
    def laplacian_coefficients(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(a11, a22, a12, b2) of  a11 d_xx + a22 d_ss + a12 d_xs + b2 d_s"""
        a22 = self.p ** 2 + self.q ** 2
        return np.ones_like(a22), a22, 2.0 * self.p, self.lap_s


@dataclass(frozen=True)
class FlatteningMap:
    """
    Boundary-fitted coordinates x2 = s + h(x1) beta(s).
    Without a blend height beta = 1 (pure flattening); with one,
    beta = (1 - s/H)^2 on [0, H] so the line s = H is the flat line x2 = H.
    """
    wall: RoughWall
    blend_height: Optional[float] = None

    def __post_init__(self):
        if self.blend_height is not None:
            if self.blend_height <= 0.0:
                raise ValueError("blend height must be positive")
            # J = 1 + h beta'(s) >= 1 - 2 max h / H
            if 2.0 * max(self.wall.max_height(), 0.0) >= self.blend_height:
                raise ContractError(
                    f"wall height {self.wall.max_height():.3g} too large for blend height {self.blend_height:.3g}"
                )

    def blend(self, s) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = np.asarray(s, dtype=float)
        if self.blend_height is None:
            return np.ones_like(s), np.zeros_like(s), np.zeros_like(s)
        H = self.blend_height
        r = np.clip(1.0 - s / H, 0.0, None)
        inside = (s < H).astype(float)
        return r ** 2, -2.0 * r / H, 2.0 * inside / H ** 2

    def to_physical(self, x1, s) -> np.ndarray:
        h, _, _ = self.wall.height(x1)
        beta, _, _ = self.blend(s)
        return s + h * beta

    def to_flat(self, x1, x2, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        h, _, _ = self.wall.height(x1)
        if np.any(x2 < h - tol):
            worst = float(np.max(h - x2))
            raise DomainMembershipError(f"point lies {worst:.3e} below the rough wall")
        if self.blend_height is None:
            return x2 - h
        H = self.blend_height
        # s + h beta(s) is convex increasing; Newton from s = x2 decreases monotonically
        s = np.minimum(x2, H).copy()
        for _ in range(60):
            beta, dbeta, _ = self.blend(s)
            f = s + h * beta - x2
            step = f / (1.0 + h * dbeta)
            s = s - step
            if np.max(np.abs(step), initial=0.0) < 1e-15 * max(1.0, H):
                break
        return np.where(x2 >= H, x2, np.maximum(s, 0.0))

    def metric(self, x1, s) -> MetricTerms:
        h, hx, hxx = self.wall.height(x1)
        beta, dbeta, ddbeta = self.blend(s)
        w_x, w_xx = hx * beta, hxx * beta
        w_s, w_ss, w_xs = h * dbeta, h * ddbeta, hx * dbeta
        J = 1.0 + w_s
        p = -w_x / J
        q = 1.0 / J
        p_x = -(w_xx * J - w_x * w_xs) / J ** 2
        p_s = -(w_xs * J - w_x * w_ss) / J ** 2
        q_s = -w_ss / J ** 2
        lap_s = p_x + p * p_s + q * q_s
        return MetricTerms(jacobian=J, p=p, q=q, lap_s=lap_s)


@dataclass(frozen=True)
class FlattenedCoords:
    z1: np.ndarray
    z2: np.ndarray
    coefficients: Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    mapping: FlatteningMap

    def inverse(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.z1, self.mapping.to_physical(self.z1, self.z2)


def flatten(domain: DomainParams, z) -> FlattenedCoords:
    """Pure flattening z2~ = z2 - eps^alpha eta(z1) of rescaled points z = (z1, z2)"""
    z1, z2 = np.asarray(z[0], dtype=float), np.asarray(z[1], dtype=float)
    mapping = FlatteningMap(domain.wall("rescaled"))
    z2t = mapping.to_flat(z1, z2)
    coefficients = mapping.metric(z1, z2t).laplacian_coefficients
    return FlattenedCoords(z1=z1, z2=z2t, coefficients=coefficients, mapping=mapping)
