"""Domain types and the built-in Misiurewicz-Ziemian family.

Every map here is a *lift*: a map of the plane that commutes with integer
translations. Lifts evaluate on Python floats, numpy arrays (elementwise) and,
for the refinement code in :mod:`torusrot.classify`, on ``mpmath.mpf`` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import mpmath
import numpy as np

TWO_PI = 2.0 * np.pi

# 'R','O','T','A' as ASCII bytes.
DEFAULT_SEED = 0x524F5441


class MapError(ValueError):
    """Raised for invalid map definitions or non-finite map values."""


class MissingInverseError(MapError):
    pass


@dataclass(frozen=True)
class PlanePoint:
    """A point of the universal cover R^2."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y

    def __getitem__(self, i: int) -> float:
        return (self.x, self.y)[i]

    def mod1(self) -> "PlanePoint":
        """Canonical representative in [0, 1)^2."""
        return PlanePoint(_frac(self.x), _frac(self.y))


@dataclass(frozen=True)
class RotationVector:
    vx: float
    vy: float

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.vy)):
            raise ValueError(f"non-finite rotation vector ({self.vx}, {self.vy})")

    def __iter__(self) -> Iterator[float]:
        yield self.vx
        yield self.vy

    def __getitem__(self, i: int) -> float:
        return (self.vx, self.vy)[i]


def _frac(t: float) -> float:
    r = t - math.floor(t)
    # t slightly below an integer can round up to exactly 1.0
    return 0.0 if r >= 1.0 else float(r)


@dataclass(frozen=True)
class Disk:
    """Open disk on the torus; ``center`` is read mod 1."""

    center: PlanePoint
    radius: float

    def __post_init__(self):
        if not isinstance(self.center, PlanePoint):
            object.__setattr__(self, "center", PlanePoint(*self.center))
        if not (0.0 < self.radius < 0.5):
            raise ValueError(f"disk radius must lie in (0, 1/2), got {self.radius}")


@dataclass(frozen=True)
class DirectionalFrame:
    """Unit direction ``v`` with a line offset ``lam`` and cone slopes ``a <= b``.

    The line is ``L = lam*v + {v}^perp``; the cone is
    ``C_v[a,b] = {z : a<z,v> <= <z,v_perp> <= b<z,v>}``.
    """

    v: tuple[float, float]
    lam: float = 0.0
    a: float = -math.inf
    b: float = math.inf

    def __post_init__(self):
        norm = math.hypot(*self.v)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, |v| = {norm}")
        if self.a > self.b:
            raise ValueError("cone bounds require a <= b")

    @property
    def v_perp(self) -> tuple[float, float]:
        return (-self.v[1], self.v[0])

    def on_line(self, z, tol: float = 1e-9) -> bool:
        return abs(z[0] * self.v[0] + z[1] * self.v[1] - self.lam) <= tol


class LiftMap:
    """Base class for lifts of torus homeomorphisms homotopic to the identity."""

    has_inverse: bool = False

    def __call__(self, x, y):
        raise NotImplementedError

    def inverse(self, x, y):
        raise MissingInverseError(f"{self.describe()} has no inverse")

    def eval_mp(self, x, y):
        """Evaluate with mpmath numbers (extended precision)."""
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__

    def factor(self):
        """``(inner, pre, post)`` when self = post o inner o pre for a coordinate change.

        Orbits of such a lift are computed as post(inner^n(pre(z))), which
        avoids one rounding per step. None for lifts without that structure.
        """
        return None

    def apply(self, z) -> PlanePoint:
        x, y = self(float(z[0]), float(z[1]))
        return PlanePoint(float(x), float(y))


@dataclass(frozen=True, eq=True)
class MZLift(LiftMap):
    """F(x,y) = (x + beta sin(2pi(y + alpha sin 2pi x)), y + alpha sin 2pi x)."""

    alpha: float
    beta: float

    has_inverse = True

    def __call__(self, x, y):
        y1 = y + self.alpha * np.sin(TWO_PI * x)
        return x + self.beta * np.sin(TWO_PI * y1), y1

    def inverse(self, x, y):
        x0 = x - self.beta * np.sin(TWO_PI * y)
        return x0, y - self.alpha * np.sin(TWO_PI * x0)

    def eval_mp(self, x, y):
        two_pi = 2 * mpmath.pi
        y1 = y + mpmath.mpf(self.alpha) * mpmath.sin(two_pi * x)
        return x + mpmath.mpf(self.beta) * mpmath.sin(two_pi * y1), y1

    def describe(self) -> str:
        return f"mz(alpha={self.alpha!r}, beta={self.beta!r})"


def eval_mz(alpha: float, beta: float, z) -> PlanePoint:
    return MZLift(alpha, beta).apply(z)


def eval_mz_inverse(alpha: float, beta: float, z) -> PlanePoint:
    x, y = MZLift(alpha, beta).inverse(float(z[0]), float(z[1]))
    return PlanePoint(float(x), float(y))


def sample_points(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """Deterministic uniform samples in [-scale, scale)^2 (shape (n, 2))."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return scale * (2.0 * rng.random((n, 2)) - 1.0)


def translate_commutation_check(F: LiftMap, samples: int = 1000, seed: int = DEFAULT_SEED) -> float:
    """Max over samples z and (m,k) in {-1,0,1}^2 of |F(z+(m,k)) - F(z) - (m,k)|."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = sample_points(samples, seed, scale=2.0)
    x, y = pts[:, 0], pts[:, 1]
    with np.errstate(all="ignore"):
        fx, fy = F(x, y)
        worst = 0.0
        for m in (-1, 0, 1):
            for k in (-1, 0, 1):
                gx, gy = F(x + m, y + k)
                err = np.hypot(gx - fx - m, gy - fy - k)
                if not np.all(np.isfinite(err)):
                    return math.inf
                worst = max(worst, float(err.max()))
    return worst


def jacobian_determinant(F: LiftMap, z, h: float = 1e-6) -> float:
    """Central finite-difference determinant of DF at z."""
    x, y = float(z[0]), float(z[1])
    ax, ay = F(x + h, y)
    bx, by = F(x - h, y)
    cx, cy = F(x, y + h)
    dx, dy = F(x, y - h)
    j11, j21 = (ax - bx) / (2 * h), (ay - by) / (2 * h)
    j12, j22 = (cx - dx) / (2 * h), (cy - dy) / (2 * h)
    return float(j11 * j22 - j12 * j21)


def format_float(v) -> str:
    """Shortest decimal that round-trips to the same double ('nan'/'inf' otherwise)."""
    v = float(v)
    return repr(v) if math.isfinite(v) else str(v)


def torus_delta(dx, dy):
    """Shortest representative of a displacement modulo Z^2."""
    return dx - np.round(dx), dy - np.round(dy)
