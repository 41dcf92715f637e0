"""Planar convex hulls and directional geometry."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import DirectionalFrame

COLLINEAR_RTOL = 1e-12


@dataclass(frozen=True)
class ConvexPolygon:
    """Counter-clockwise vertex array, shape (k, 2).

    Degenerate hulls are explicit: k == 0 (empty), 1 (point), 2 (segment).
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def kind(self) -> str:
        return {0: "empty", 1: "point", 2: "segment"}.get(len(self.vertices), "polygon")

    def __len__(self):
        return len(self.vertices)

    def centroid(self) -> np.ndarray:
        """Vertex centroid."""
        return self.vertices.mean(axis=0)

    def to_json(self) -> str:
        return json.dumps({"vertices": self.vertices.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ConvexPolygon":
        return cls(np.array(json.loads(text)["vertices"], dtype=float).reshape(-1, 2))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> ConvexPolygon:
    """Andrew's monotone chain; collinear points are dropped."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return ConvexPolygon(np.empty((0, 2)))
    pts = np.unique(pts, axis=0)  # lexicographic sort, duplicates removed
    if len(pts) == 1:
        return ConvexPolygon(pts)
    span = float(np.max(np.ptp(pts, axis=0)))
    eps = COLLINEAR_RTOL * span * span
    P = [tuple(p) for p in pts]

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= eps:
                out.pop()
            out.append(p)
        return out

    lower = chain(P)
    upper = chain(reversed(P))
    hull = lower[:-1] + upper[:-1]
    if len(hull) <= 2:
        # all collinear: keep the two extreme points
        return ConvexPolygon(np.array([P[0], P[-1]]))
    return ConvexPolygon(np.array(hull))


def hull_area(p: ConvexPolygon) -> float:
    v = p.vertices
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def hull_diameter(p: ConvexPolygon) -> float:
    v = p.vertices
    if len(v) < 2:
        return 0.0
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


def point_in_polygon(p: ConvexPolygon, q, tol: float = 1e-12) -> bool:
    """Closed containment test (boundary counts as inside)."""
    v = p.vertices
    q = (float(q[0]), float(q[1]))
    if len(v) == 0:
        return False
    scale = max(1.0, float(np.abs(v).max()))
    if len(v) == 1:
        return math.hypot(q[0] - v[0, 0], q[1] - v[0, 1]) <= tol * scale
    if len(v) == 2:
        a, b = v
        ab = b - a
        L = math.hypot(*ab)
        if abs(_cross(a, b, q)) > tol * scale * L:
            return False
        t = ((q[0] - a[0]) * ab[0] + (q[1] - a[1]) * ab[1]) / (L * L)
        return -tol <= t <= 1 + tol
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        if _cross(a, b, q) < -tol * scale * math.hypot(*(b - a)):
            return False
    return True


def contains(p: ConvexPolygon, q: ConvexPolygon, margin: float = 0.0) -> bool:
    """True iff every vertex of q, moved distance ``margin`` toward q's centroid, lies in p."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if len(q) == 0:
        return True
    c = q.centroid()
    for vert in q.vertices:
        d = c - vert
        L = math.hypot(*d)
        shrunk = vert + (d / L) * min(margin, L) if L > 0 else vert
        if not point_in_polygon(p, shrunk):
            return False
    return True


def diamond(radius: float) -> ConvexPolygon:
    """{|x| + |y| <= radius}."""
    r = radius
    return ConvexPolygon(np.array([[r, 0.0], [0.0, r], [-r, 0.0], [0.0, -r]]))


def cone_membership(frame: DirectionalFrame, z) -> bool:
    """Literal test of a<z,v> <= <z,v_perp> <= b<z,v>."""
    v, w = frame.v, frame.v_perp
    s = z[0] * v[0] + z[1] * v[1]
    t = z[0] * w[0] + z[1] * w[1]
    return frame.a * s <= t <= frame.b * s


def strip_membership(v, a: float, b: float, z) -> bool:
    """z in S_v[a,b] = {<z,v> in [a,b]}."""
    return a <= z[0] * v[0] + z[1] * v[1] <= b


def directed_hausdorff(A, B) -> float:
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("Hausdorff distance needs nonempty sets")
    from scipy.spatial import cKDTree

    d, _ = cKDTree(B).query(A)
    return float(d.max())


def hausdorff_distance(A, B) -> float:
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def polygon_hausdorff(p: ConvexPolygon, q: ConvexPolygon, n_dirs: int = 4096) -> float:
    """Hausdorff distance between two convex hulls (as filled sets).

    For convex bodies this equals the sup-norm difference of their support
    functions, evaluated here on a dense set of directions.
    """
    ang = np.linspace(0.0, 2.0 * np.pi, n_dirs, endpoint=False)
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    hp = (p.vertices @ dirs.T).max(axis=0)
    hq = (q.vertices @ dirs.T).max(axis=0)
    return float(np.abs(hp - hq).max())
