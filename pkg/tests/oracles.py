"""Slow, obviously-correct reference implementations used by the tests."""

import math

import numpy as np


def brute_hull_vertices(pts: np.ndarray) -> set[tuple[float, float]]:
    """Vertices of the hull: endpoints of every pair (i, j) with all other
    points strictly to the left of the directed line i -> j.

    Assumes no three input points are collinear.
    """
    p = np.asarray(pts, float)
    a = p[:, None, None, :]
    b = p[None, :, None, :]
    c = p[None, None, :, :]
    cross = (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])
    n = len(p)
    idx = np.arange(n)
    cross[idx, :, idx] = 1.0
    cross[:, idx, idx] = 1.0
    edge = np.all(cross > 0, axis=2)
    edge[idx, idx] = False
    i, j = np.nonzero(edge)
    return {tuple(p[k]) for k in np.concatenate([i, j])}


def brute_hausdorff(A, B) -> float:
    def directed(P, Q):
        worst = 0.0
        for px, py in P:
            best = math.inf
            for qx, qy in Q:
                best = min(best, math.hypot(px - qx, py - qy))
            worst = max(worst, best)
        return worst

    return max(directed(A, B), directed(B, A))


def direct_mz_deviation(alpha, beta, z, rho, n):
    """F^n(z) - z - n rho by an explicit loop over the map formula."""
    x, y = float(z[0]), float(z[1])
    for _ in range(n):
        y = y + alpha * math.sin(2 * math.pi * x)
        x = x + beta * math.sin(2 * math.pi * y)
    return x - z[0] - n * rho[0], y - z[1] - n * rho[1]


def brute_diameter(pts) -> float:
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = max(best, math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]))
    return best
