"""Lorentz-Minkowski 3-space: inner product, causal character, light cone
distance and the stereographic chart of the hyperbolic sphere.

The metric is dx1^2 + dx2^2 - dx3^2 with x3 the timelike axis.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)


class Infinity:
    """The point at infinity of the extended complex plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = Infinity()


@dataclass(frozen=True)
class LVec3:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x1, self.x2, self.x3)):
            raise ValueError(f"non-finite component in {self!r}")

    @classmethod
    def from_array(cls, a) -> "LVec3":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x1, self.x2, self.x3], dtype=dtype or float)

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))

    def __add__(self, other: "LVec3") -> "LVec3":
        return LVec3(self.x1 + other.x1, self.x2 + other.x2, self.x3 + other.x3)

    def __sub__(self, other: "LVec3") -> "LVec3":
        return LVec3(self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3)

    def __mul__(self, c: float) -> "LVec3":
        return LVec3(c * self.x1, c * self.x2, c * self.x3)

    __rmul__ = __mul__

    @property
    def norm_sq(self) -> float:
        """Lorentzian squared norm ||x||^2 (may be negative)."""
        return minkowski_inner(self, self)

    @property
    def euclidean_norm(self) -> float:
        return math.sqrt(self.x1**2 + self.x2**2 + self.x3**2)

    @property
    def horizontal_norm(self) -> float:
        """Euclidean norm of the projection onto {x3 = 0}."""
        return math.hypot(self.x1, self.x2)


class CausalClass(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"


def minkowski_inner(a, b):
    """<a, b> = a1 b1 + a2 b2 - a3 b3.

    Accepts LVec3 or array-likes whose last axis has length 3; arrays are
    broadcast and the result has the leading shape.
    """
    if isinstance(a, LVec3) and isinstance(b, LVec3):
        return a.x1 * b.x1 + a.x2 * b.x2 - a.x3 * b.x3
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def causal_character(v: LVec3) -> CausalClass:
    # exact comparison on purpose: callers wanting a tolerance round first
    q = minkowski_inner(v, v)
    if q > 0 or (v.x1 == 0 and v.x2 == 0 and v.x3 == 0):
        return CausalClass.SPACELIKE
    if q < 0:
        return CausalClass.TIMELIKE
    return CausalClass.LIGHTLIKE


def dist_to_lightcone(p):
    """Euclidean distance from p to the light cone {||x|| = 0}.

    The cone is a surface of revolution at 45 degrees, so the distance is
    | r - |x3| | / sqrt(2) with r the horizontal radius.
    """
    if isinstance(p, LVec3):
        return abs(p.horizontal_norm - abs(p.x3)) / SQRT2
    p = np.asarray(p, dtype=float)
    return np.abs(np.hypot(p[..., 0], p[..., 1]) - np.abs(p[..., 2])) / SQRT2


def stereographic(z) -> LVec3:
    """Stereographic parameterization of H^2 by the extended plane minus |z| = 1.

    |z| < 1 lands on the lower sheet (x3 <= -1), |z| > 1 on the upper one,
    and infinity on (0, 0, 1).
    """
    if z is INFINITY:
        return LVec3(0.0, 0.0, 1.0)
    z = complex(z)
    r2 = z.real**2 + z.imag**2
    if r2 == 1.0:
        raise ValueError(f"stereographic projection undefined on |z| = 1 (z={z})")
    d = 1.0 - r2
    return LVec3(-2.0 * z.imag / d, 2.0 * z.real / d, (r2 + 1.0) / (r2 - 1.0))


def stereographic_array(z) -> np.ndarray:
    """Vectorized stereographic(); entries with |z| = 1 come back as nan."""
    z = np.asarray(z, dtype=complex)
    r2 = z.real**2 + z.imag**2
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(r2 == 1.0, np.nan, 1.0 - r2)
        out = np.stack([-2.0 * z.imag / d, 2.0 * z.real / d, -(r2 + 1.0) / d], axis=-1)
    return out


def inverse_stereographic(p: LVec3):
    """Inverse of stereographic(); returns INFINITY for (0, 0, 1)."""
    if p.x3 == 1.0 and p.x1 == 0.0 and p.x2 == 0.0:
        return INFINITY
    denom = 1.0 - p.x3
    if denom == 0.0:
        raise ValueError(f"{p!r} is not on the hyperbolic sphere")
    return complex(p.x2 / denom, -p.x1 / denom)


def euclidean_normal_direction(g) -> np.ndarray:
    """Euclidean unit vector along the H^2 normal sigma(g).

    sigma(g) * (1 - |g|^2) stays finite as |g| -> 1, so this is defined on
    singular (lightlike) points as well.
    """
    g = np.asarray(g, dtype=complex)
    r2 = g.real**2 + g.imag**2
    v = np.stack([-2.0 * g.imag, 2.0 * g.real, -(1.0 + r2)], axis=-1)
    v = v * np.sign(1.0 - r2 + (r2 == 1.0))[..., None]
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
