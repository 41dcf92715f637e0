"""SL(2,Z) coordinate changes, unimodular completion and symmetry checks.

Matrices are row-major: ``UnimodularMatrix(a, b, c, d)`` is [[a, b], [c, d]]
and acts on column vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_SEED, DirectionalFrame, LiftMap, MissingInverseError, RotationVector, sample_points
from .geometry import ConvexPolygon, convex_hull


@dataclass(frozen=True)
class UnimodularMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise TypeError("matrix entries must be integers")
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant {self.a * self.d - self.b * self.c} != 1")

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_columns(cls, u, v) -> "UnimodularMatrix":
        return cls(int(u[0]), int(v[0]), int(u[1]), int(v[1]))

    @classmethod
    def parse(cls, text: str) -> "UnimodularMatrix":
        """``"a,b;c,d"`` (rows separated by ';')."""
        rows = [r.split(",") for r in text.replace(" ", "").split(";")]
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ValueError(f"expected 'a,b;c,d', got {text!r}")
        try:
            (a, b), (c, d) = [[int(v) for v in r] for r in rows]
        except ValueError:
            raise ValueError(f"matrix entries must be integers: {text!r}") from None
        return cls(a, b, c, d)

    def __str__(self) -> str:
        return f"{self.a},{self.b};{self.c},{self.d}"

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def columns(self):
        return (self.a, self.c), (self.b, self.d)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def transpose(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.a, self.c, self.b, self.d)

    def __matmul__(self, o: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                                self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def apply(self, x, y):
        return self.a * x + self.b * y, self.c * x + self.d * y

    def apply_inverse(self, x, y):
        return self.d * x - self.b * y, -self.c * x + self.a * y


def complete_to_unimodular(w) -> UnimodularMatrix:
    """Matrix in SL(2,Z) whose first column is the primitive vector w.

    The second column u solves w1*u2 - w2*u1 = 1 (extended Euclid); among the
    solutions u + k*w the one with 0 <= u2 < |w2| is returned (u1 = 0 when
    w2 = 0).
    """
    w1, w2 = int(w[0]), int(w[1])
    if (w1, w2) == (0, 0) or math.gcd(w1, w2) != 1:
        raise ValueError(f"{(w1, w2)} is not a primitive integer vector")
    g, s, t = _ext_gcd(w1, w2)  # s*w1 + t*w2 == g == +-1
    s, t = s * g, t * g
    u1, u2 = -t, s
    if w2 != 0:
        k = -(u2 // abs(w2)) if w2 > 0 else u2 // abs(w2)
        u1, u2 = u1 + k * w1, u2 + k * w2
    else:
        u1 = 0
    return UnimodularMatrix(w1, u1, w2, u2)


def _ext_gcd(a: int, b: int):
    r0, r1, s0, s1, t0, t1 = a, b, 1, 0, 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


class ConjugatedLift(LiftMap):
    """M^-1 o F o M."""

    def __init__(self, base: LiftMap, M: UnimodularMatrix):
        self.base, self.M = base, M
        self.has_inverse = base.has_inverse

    def __call__(self, x, y):
        return self.M.apply_inverse(*self.base(*self.M.apply(x, y)))

    def inverse(self, x, y):
        if not self.has_inverse:
            return super().inverse(x, y)
        return self.M.apply_inverse(*self.base.inverse(*self.M.apply(x, y)))

    def eval_mp(self, x, y):
        return self.M.apply_inverse(*self.base.eval_mp(*self.M.apply(x, y)))

    def factor(self):
        return self.base, self.M.apply, self.M.apply_inverse

    def describe(self) -> str:
        return f"conj({self.base.describe()}, M={self.M})"


def conjugate_lift(F: LiftMap, M: UnimodularMatrix) -> ConjugatedLift:
    return ConjugatedLift(F, M)


def transform_rotation_data(data, M: UnimodularMatrix):
    """Apply M^-1 to rotation vectors, point arrays or hulls (hulls stay CCW)."""
    if isinstance(data, ConvexPolygon):
        v = data.vertices
        if len(v) == 0:
            return data
        x, y = M.apply_inverse(v[:, 0], v[:, 1])
        return convex_hull(np.column_stack([x, y]))
    if isinstance(data, RotationVector):
        return RotationVector(*(float(t) for t in M.apply_inverse(data.vx, data.vy)))
    if isinstance(data, np.ndarray):
        a = data.reshape(-1, 2)
        x, y = M.apply_inverse(a[:, 0], a[:, 1])
        return np.column_stack([x, y]).reshape(data.shape)
    return [transform_rotation_data(d if isinstance(d, RotationVector) else RotationVector(*d), M)
            for d in data]


def raw_line_transform(v, lam: float, M: UnimodularMatrix):
    """Unnormalised (v~, lam~) = (M^t v, lam |v|^2 / |v~|^2).

    z lies on {<z,v> = lam |v|^2} iff M^-1 z lies on {<z,v~> = lam~ |v~|^2}.
    """
    vt = M.transpose().apply(float(v[0]), float(v[1]))
    return vt, lam * (v[0] ** 2 + v[1] ** 2) / (vt[0] ** 2 + vt[1] ** 2)


def line_frame_transform(frame: DirectionalFrame, M: UnimodularMatrix) -> DirectionalFrame:
    """Frame seen in the coordinates z' = M^-1 z.

    The direction is M^t v normalised; the line offset is rescaled so that the
    returned frame describes the image line. Cone slopes transform as
    a' = <M^-1 v, M^-1 v_perp> + a |M^-1 v_perp|^2 (same for b), which keeps
    infinite bounds infinite.
    """
    vt, lam_t = raw_line_transform(frame.v, frame.lam, M)
    norm = math.hypot(*vt)
    v_hat = (vt[0] / norm, vt[1] / norm)
    mv = M.apply_inverse(*frame.v)
    mp = M.apply_inverse(*frame.v_perp)
    shift = mv[0] * mp[0] + mv[1] * mp[1]
    scale = mp[0] ** 2 + mp[1] ** 2
    return DirectionalFrame(v_hat, lam_t * norm, shift + frame.a * scale, shift + frame.b * scale)


@dataclass(frozen=True)
class AffineSymmetry:
    """z -> A z + c with integer A, det A = +-1."""

    name: str
    A: tuple[int, int, int, int]
    c: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        a, b, cc, d = self.A
        if a * d - b * cc not in (1, -1):
            raise ValueError("linear part must have determinant +-1")

    @property
    def det(self) -> int:
        a, b, c, d = self.A
        return a * d - b * c

    def __call__(self, x, y):
        a, b, c, d = self.A
        return a * x + b * y + self.c[0], c * x + d * y + self.c[1]

    def inverse(self, x, y):
        a, b, c, d = self.A
        det = self.det
        u, v = x - self.c[0], y - self.c[1]
        return (d * u - b * v) * det, (-c * u + a * v) * det


R = AffineSymmetry("R", (0, -1, 1, 0))
S = AffineSymmetry("S", (-1, 0, 0, -1))
T = AffineSymmetry("T", (1, 0, 0, -1), (0.5, 0.5))
SYMMETRIES = {"R": R, "S": S, "T": T}


def check_conjugacy(F: LiftMap, sym: AffineSymmetry, target: str = "self", samples: int = 1000,
                    seed: int = DEFAULT_SEED) -> float:
    """Max torus distance between sym^-1(F(sym z)) and F(z) or F^-1(z) over seeded samples."""
    if target not in ("self", "inverse"):
        raise ValueError("target must be 'self' or 'inverse'")
    if target == "inverse" and not F.has_inverse:
        raise MissingInverseError(f"{F.describe()} has no inverse")
    pts = sample_points(samples, seed, scale=0.5) + 0.5
    x, y = pts[:, 0], pts[:, 1]
    lhs = sym.inverse(*F(*sym(x, y)))
    rhs = F(x, y) if target == "self" else F.inverse(x, y)
    return float(torus_distance(lhs, rhs).max())


def torus_distance(p, q) -> np.ndarray:
    """Euclidean distance mod Z^2, minimised over the nine nearest translates."""
    dx = np.asarray(p[0], float) - np.asarray(q[0], float)
    dy = np.asarray(p[1], float) - np.asarray(q[1], float)
    dx, dy = dx - np.round(dx), dy - np.round(dy)
    best = np.full(np.shape(dx), np.inf)
    for m in (-1, 0, 1):
        for k in (-1, 0, 1):
            best = np.minimum(best, np.hypot(dx + m, dy + k))
    return best
