"""Torus-wide classification, island extraction, periodic orbits and stability probes."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .core import DEFAULT_SEED, Disk, LiftMap, PlanePoint, RotationVector, format_float
from .engine import GridSpec, boundary_samples, disk_samples, iterate_array
from .geometry import convex_hull
from .parallel import run_chunked
from .rotation import (
    QMAX,
    SINGLETON_TOL,
    ClassificationLabel,
    LocalRotationEstimate,
    detect_structure,
    label_from_history,
    local_clouds,
)

log = logging.getLogger(__name__)

__all__ = [
    "ClassificationLabel", "LabelGrid", "IslandRegion", "StabilityReport", "DeltaOutcome",
    "SpreadingFit", "classification_map", "extract_islands", "find_periodic_points",
    "find_periodic_orbits", "lyapunov_probe", "spreading_slope",
]

MAP_SCHEDULE = (500, 1000, 2000)
MAP_SAMPLES = 32


# ---------------------------------------------------------------- label grids

@dataclass
class LabelGrid:
    grid: GridSpec
    labels: list[ClassificationLabel]  # flat, ix-major

    def at(self, ix: int, iy: int) -> ClassificationLabel:
        return self.labels[(ix % self.grid.nx) * self.grid.ny + (iy % self.grid.ny)]

    def kinds(self) -> np.ndarray:
        """(nx, ny) array of label kinds."""
        return np.array([l.kind for l in self.labels], dtype=object).reshape(self.grid.nx, self.grid.ny)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ix", "iy", "label", "vx", "vy", "diameter", "area"])
        ix, iy = self.grid.indices()
        for i, j, lab in zip(ix, iy, self.labels):
            vx, vy = lab.witness if lab.witness is not None else (math.nan, math.nan)
            w.writerow([int(i), int(j), lab.kind] +
                       [format_float(v) for v in (vx, vy, lab.diameter, lab.area)])
        return buf.getvalue()


def classification_map(F: LiftMap, grid: GridSpec, disk_radius: float = 0.03, schedule=MAP_SCHEDULE,
                       tol: float = SINGLETON_TOL, samples: int = MAP_SAMPLES, seed: int = DEFAULT_SEED,
                       qmax: int = QMAX, threads: int | None = 1) -> LabelGrid:
    """Dichotomy label for the disk around every grid point.

    Cell (ix, iy) gets exactly the label of
    ``dichotomy_classify(F, Disk(center, disk_radius), schedule, tol, samples,
    seed, qmax, key=(ix, iy))``; all cells are iterated together.
    """
    if not 0 < disk_radius < 0.5:
        raise ValueError("disk_radius must lie in (0, 1/2)")
    x, y = grid.points()
    ix, iy = grid.indices()
    centers = np.column_stack([x, y])
    keys = list(zip(ix.tolist(), iy.tolist()))
    clouds = local_clouds(F, centers, disk_radius, schedule, samples, seed, keys, threads)
    labels = []
    for c in range(len(centers)):
        U = Disk(tuple(centers[c]), disk_radius)
        history = []
        for s, n in enumerate(schedule):
            cl = clouds[s, c]
            cl = cl[np.all(np.isfinite(cl), axis=1)]
            est = LocalRotationEstimate(U, cl, convex_hull(cl), n, samples)
            history.append(detect_structure(est, tol, qmax))
        labels.append(label_from_history(history, schedule))
    return LabelGrid(grid, labels)


# -------------------------------------------------------------------- islands

@dataclass
class IslandRegion:
    """4-connected elliptic cells sharing one witness vector.

    ``lifted`` holds unwrapped cell indices so that islands crossing the torus
    seam keep a contiguous bounding box.
    """

    cells: list[tuple[int, int]]
    lifted: list[tuple[int, int]]
    grid: GridSpec
    witness: RotationVector
    period: int | None = None
    displacement: tuple[int, int] | None = None
    periodic_point: PlanePoint | None = None

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) in lifted coordinates, including half a cell margin."""
        a = np.array(self.lifted, dtype=float)
        ox, oy = self.grid.offset
        xs = (a[:, 0] + ox) / self.grid.nx
        ys = (a[:, 1] + oy) / self.grid.ny
        hx, hy = 0.5 / self.grid.nx, 0.5 / self.grid.ny
        return xs.min() - hx, xs.max() + hx, ys.min() - hy, ys.max() + hy

    def box_contains(self, z) -> bool:
        x0, x1, y0, y1 = self.bounding_box()
        for m in range(math.floor(x0 - z[0]), math.ceil(x1 - z[0]) + 1):
            for k in range(math.floor(y0 - z[1]), math.ceil(y1 - z[1]) + 1):
                if x0 <= z[0] + m <= x1 and y0 <= z[1] + k <= y1:
                    return True
        return False

    def centroid(self) -> tuple[float, float]:
        a = np.array(self.lifted, dtype=float).mean(axis=0)
        return ((a[0] + self.grid.offset[0]) / self.grid.nx) % 1.0, ((a[1] + self.grid.offset[1]) / self.grid.ny) % 1.0

    def to_dict(self) -> dict:
        return {
            "cells": [list(c) for c in self.cells],
            "witness": [self.witness.vx, self.witness.vy],
            "bounding_box": list(self.bounding_box()),
            "period": self.period,
            "displacement": list(self.displacement) if self.displacement else None,
            "periodic_point": [self.periodic_point.x, self.periodic_point.y] if self.periodic_point else None,
        }


def islands_to_json(islands: list[IslandRegion]) -> str:
    return json.dumps([i.to_dict() for i in islands], indent=1)


def extract_islands(labels: LabelGrid, tol: float = SINGLETON_TOL, F: LiftMap | None = None,
                    max_period: int = 64) -> list[IslandRegion]:
    """Flood-fill elliptic cells (4-neighbours, torus wrap) grouped by witness.

    With ``F`` given, each island also gets an estimated period, the implied
    integer displacement and, where the search succeeds, a periodic point
    inside its cells.
    """
    g = labels.grid
    nx, ny = g.nx, g.ny
    seen = np.zeros((nx, ny), dtype=bool)
    islands = []
    for i0 in range(nx):
        for j0 in range(ny):
            lab = labels.at(i0, j0)
            if seen[i0, j0] or lab.kind != "elliptic":
                continue
            w0 = lab.witness
            seen[i0, j0] = True
            stack = [(i0, j0, i0, j0)]
            cells, lifted = [], []
            while stack:
                i, j, li, lj = stack.pop()
                cells.append((i, j))
                lifted.append((li, lj))
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    a, b = (i + di) % nx, (j + dj) % ny
                    if seen[a, b]:
                        continue
                    other = labels.at(a, b)
                    if other.kind == "elliptic" and max(abs(other.witness[0] - w0[0]),
                                                        abs(other.witness[1] - w0[1])) <= tol:
                        seen[a, b] = True
                        stack.append((a, b, li + di, lj + dj))
            order = sorted(range(len(cells)), key=lambda k: cells[k])
            islands.append(IslandRegion([cells[k] for k in order], [lifted[k] for k in order], g,
                                        RotationVector(*w0)))
    if F is not None:
        _annotate_islands(F, islands, labels, max_period)
    return islands


def _annotate_islands(F: LiftMap, islands: list[IslandRegion], labels: LabelGrid, max_period: int):
    g = labels.grid
    owner = -np.ones((g.nx, g.ny), dtype=int)
    for k, isl in enumerate(islands):
        for c in isl.cells:
            owner[c] = k
    cache: dict[tuple, list[PlanePoint]] = {}
    for k, isl in enumerate(islands):
        if len(isl.cells) == g.size:
            # the whole torus is one island: every point returns to it at once
            isl.period = 1
        else:
            x, y = isl.centroid()
            for n in range(1, max_period + 1):
                x, y = F(x, y)
                cx = int(math.floor(float(x) % 1.0 * g.nx - g.offset[0] + 0.5)) % g.nx
                cy = int(math.floor(float(y) % 1.0 * g.ny - g.offset[1] + 0.5)) % g.ny
                if owner[cx, cy] == k:
                    isl.period = n
                    break
        if isl.period is None:
            continue
        p = isl.period
        w = (round(p * isl.witness.vx), round(p * isl.witness.vy))
        isl.displacement = w
        if len(isl.cells) == g.size:
            continue
        if (p, w) not in cache:
            cache[(p, w)] = find_periodic_points(F, p, w)
        members = set(isl.cells)
        for z in cache[(p, w)]:
            cx = int(math.floor(z.x * g.nx - g.offset[0] + 0.5)) % g.nx
            cy = int(math.floor(z.y * g.ny - g.offset[1] + 0.5)) % g.ny
            if (cx, cy) in members:
                isl.periodic_point = z
                break


# ---------------------------------------------------------- periodic points

PERIODIC_GRID = GridSpec(48, 48, (0.5, 0.5))
RESIDUAL_TOL = 1e-10
MERGE_TOL = 1e-6
# double-precision Newton stalls up to ~3e-4 away from zeros where G is cubic
CLUSTER_RADIUS = 1e-3
FD_STEP = 1e-6
SINGULAR_DET = 1e-3
MP_DPS = 80
MP_FD_STEP = mpmath.mpf("1e-40")
MP_STEP_SCALES = (3, 2, 1, 0.5, 0.25, 0.125, 1 / 16, 1 / 32)
BISECT_MIN = 1e-14


class _Residual:
    """G(z) = F^p(z) - z - w in double and extended precision."""

    def __init__(self, F: LiftMap, p: int, w):
        self.F, self.p, self.w = F, p, (int(w[0]), int(w[1]))

    def __call__(self, x, y):
        a, b = x, y
        for _ in range(self.p):
            a, b = self.F(a, b)
        return a - x - self.w[0], b - y - self.w[1]

    def mp(self, x, y):
        a, b = x, y
        for _ in range(self.p):
            a, b = self.F.eval_mp(a, b)
        return a - x - self.w[0], b - y - self.w[1]


def _jacobian(G, x, y, h):
    a, b, c, d = G(x + h, y), G(x - h, y), G(x, y + h), G(x, y - h)
    return ((a[0] - b[0]) / (2 * h), (c[0] - d[0]) / (2 * h),
            (a[1] - b[1]) / (2 * h), (c[1] - d[1]) / (2 * h))


def _newton_double(G: _Residual, x: float, y: float, iters: int):
    g = G(x, y)
    r = math.hypot(*g)
    det = math.nan
    for _ in range(iters):
        if not math.isfinite(r) or r == 0.0:
            break
        j11, j12, j21, j22 = _jacobian(G, x, y, FD_STEP)
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            break
        sx = -(j22 * g[0] - j12 * g[1]) / det
        sy = -(-j21 * g[0] + j11 * g[1]) / det
        lam = 1.0
        while lam >= 1.0 / 1024:
            gn = G(x + lam * sx, y + lam * sy)
            rn = math.hypot(*gn)
            if rn < r:
                break
            lam *= 0.5
        else:
            break
        x, y, g, r = x + lam * sx, y + lam * sy, gn, rn
    if math.isnan(det) and math.isfinite(r):
        j11, j12, j21, j22 = _jacobian(G, x, y, FD_STEP)
        det = j11 * j22 - j12 * j21
    return float(x), float(y), float(r), float(det)


def _newton_mp(G: _Residual, x, y, iters: int = 200):
    """Damped Newton in extended precision; tries several step multipliers.

    Multipliers above 1 speed up the linear convergence Newton falls back to
    at zeros where the Jacobian of G vanishes.
    """
    nrm = lambda g: mpmath.sqrt(g[0] ** 2 + g[1] ** 2)
    g = G.mp(x, y)
    r = nrm(g)
    for _ in range(iters):
        if r == 0:
            break
        j11, j12, j21, j22 = _jacobian(G.mp, x, y, MP_FD_STEP)
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        sx = -(j22 * g[0] - j12 * g[1]) / det
        sy = -(-j21 * g[0] + j11 * g[1]) / det
        best = None
        for lam in MP_STEP_SCALES:
            gn = G.mp(x + lam * sx, y + lam * sy)
            rn = nrm(gn)
            if best is None or rn < best[0]:
                best = (rn, lam, gn)
        if best[0] >= r:
            break
        r, lam, g = best
        x, y = x + lam * sx, y + lam * sy
    return x, y, r


def _winding(G: _Residual, cx, cy, s, per_side: int = 16, max_points: int = 4096):
    """Winding number of G around the square of half-size s, or None if unresolved."""
    corners = [(cx - s, cy - s), (cx + s, cy - s), (cx + s, cy + s), (cx - s, cy + s)]
    pts = []
    for k in range(4):
        (ax, ay), (bx, by) = corners[k], corners[(k + 1) % 4]
        for t in range(per_side):
            f = mpmath.mpf(t) / per_side
            pts.append((ax + f * (bx - ax), ay + f * (by - ay)))
    pts.append(pts[0])

    def angle(z):
        g = G.mp(*z)
        if g[0] == 0 and g[1] == 0:
            return None
        return mpmath.atan2(g[1], g[0])

    angs = [angle(z) for z in pts]
    if any(a is None for a in angs):
        return None
    total = mpmath.mpf(0)
    i = 0
    # refine until consecutive boundary angles differ by less than pi/3
    while i < len(pts) - 1:
        d = angs[i + 1] - angs[i]
        d = (d + mpmath.pi) % (2 * mpmath.pi) - mpmath.pi
        if abs(d) > mpmath.pi / 3:
            if len(pts) >= max_points:
                return None
            mid = ((pts[i][0] + pts[i + 1][0]) / 2, (pts[i][1] + pts[i + 1][1]) / 2)
            a = angle(mid)
            if a is None:
                return None
            pts.insert(i + 1, mid)
            angs.insert(i + 1, a)
            continue
        total += d
        i += 1
    return int(mpmath.nint(total / (2 * mpmath.pi)))


def _winding_bisect(G: _Residual, x, y):
    """Shrink a box with nonzero winding number around (x, y) down to BISECT_MIN.

    Used where the Jacobian of G vanishes and Newton stalls; any box with
    nonzero index contains a zero. Returns None when no such box is found.
    """
    tiny = mpmath.mpf(BISECT_MIN)
    if _winding(G, x, y, tiny) not in (None, 0):
        return x, y
    s = None
    for k in range(9):
        trial = mpmath.mpf(1e-7) * 4 ** k
        if _winding(G, x, y, trial) not in (None, 0):
            s = trial
            break
    if s is None:
        return None
    level = 0
    while s > BISECT_MIN:
        for dx, dy in ((-1, -1), (1, -1), (-1, 1), (1, 1)):
            cx, cy = x + dx * s / 2, y + dy * s / 2
            if _winding(G, cx, cy, s * mpmath.mpf(0.6)) not in (None, 0):
                x, y, s = cx, cy, s * mpmath.mpf(0.6)
                break
        else:
            return None
        level += 1
        if level % 6 == 0:
            # Newton often converges once started close enough
            nx_, ny_, _ = _newton_mp(G, x, y, 60)
            if max(abs(nx_ - x), abs(ny_ - y)) < s and _winding(G, nx_, ny_, tiny) not in (None, 0):
                return nx_, ny_
    return x, y


def _refine_mp(G: _Residual, x: float, y: float):
    with mpmath.workdps(MP_DPS):
        mx, my, r = _newton_mp(G, mpmath.mpf(x), mpmath.mpf(y))
        j11, j12, j21, j22 = _jacobian(G.mp, mx, my, MP_FD_STEP)
        if abs(j11 * j22 - j12 * j21) < SINGULAR_DET:
            hit = _winding_bisect(G, mx, my)
            log.debug("singular Jacobian near (%s, %s): winding search %s", float(mx), float(my),
                      "located a zero" if hit else "found no nonzero index")
            if hit is not None:
                mx, my = hit
                r = mpmath.sqrt(sum(v ** 2 for v in G.mp(mx, my)))
        return float(mx), float(my), float(r)


def _candidates(G: _Residual, grid: GridSpec) -> list[tuple[float, float]]:
    """Cell centres whose corners bracket zero in both components, plus local minima of |G|."""
    x, y = grid.points()
    gx, gy = G(x, y)
    gx = np.asarray(gx, float).reshape(grid.nx, grid.ny)
    gy = np.asarray(gy, float).reshape(grid.nx, grid.ny)
    out = []

    def corners(a):
        return np.stack([a, np.roll(a, -1, 0), np.roll(a, -1, 1), np.roll(np.roll(a, -1, 0), -1, 1)])

    cx, cy = corners(gx), corners(gy)
    bracket = (cx.min(0) <= 0) & (cx.max(0) >= 0) & (cy.min(0) <= 0) & (cy.max(0) >= 0)
    for i, j in zip(*np.nonzero(bracket)):
        out.append(((i + grid.offset[0] + 0.5) / grid.nx, (j + grid.offset[1] + 0.5) / grid.ny))
    r = np.hypot(gx, gy)
    is_min = np.ones_like(r, dtype=bool)
    for di, dj in itertools.product((-1, 0, 1), repeat=2):
        if di or dj:
            is_min &= r <= np.roll(np.roll(r, di, 0), dj, 1)
    for i, j in zip(*np.nonzero(is_min & np.isfinite(r))):
        out.append(((i + grid.offset[0]) / grid.nx, (j + grid.offset[1]) / grid.ny))
    return out


def _torus_dist(a, b) -> float:
    dx = (a[0] - b[0]) - round(a[0] - b[0])
    dy = (a[1] - b[1]) - round(a[1] - b[1])
    return math.hypot(dx, dy)


def find_periodic_points(F: LiftMap, p: int, w=(0, 0), grid: GridSpec = PERIODIC_GRID,
                         refine_iters: int = 50, threads: int | None = 1) -> list[PlanePoint]:
    """Zeros of G(z) = F^p(z) - z - w on the torus, as points of [0,1)^2.

    Candidates come from the grid; each is polished by damped Newton in
    double precision. Where the Jacobian is (near) singular the candidate is
    re-solved in extended precision, with a winding-number box search as
    the last resort. Every returned point has |G| <= 1e-10 in double
    precision; zeros closer than 1e-6 are merged.
    """
    if p < 1:
        raise ValueError("period must be >= 1")
    G = _Residual(F, p, w)
    cands = _candidates(G, grid)
    coarse: list = [None] * len(cands)

    def polish(a, b):
        for k in range(a, b):
            coarse[k] = _newton_double(G, *cands[k], refine_iters)

    run_chunked(polish, len(cands), threads, chunk=1)
    close = [c for c in coarse if math.isfinite(c[2]) and c[2] <= 1e-4]
    if len(close) < len(coarse):
        log.debug("%d Newton candidates diverged or stalled", len(coarse) - len(close))
    # many candidates converge to the same zero; refine one per cluster
    reps = _merge(close, key=lambda c: (c[2], c[0], c[1]), radius=CLUSTER_RADIUS)
    results: list = [None] * len(reps)

    def refine(a, b):
        for k in range(a, b):
            results[k] = _finish(G, *reps[k])

    run_chunked(refine, len(reps), threads, chunk=1)
    kept = _merge([r for r in results if r is not None], key=lambda t: (t[2], t[0], t[1]))
    pts = [PlanePoint(t[0], t[1]).mod1() for t in kept]
    return sorted(pts, key=lambda z: (z.x, z.y))


def _merge(items, key, radius: float = MERGE_TOL):
    """Greedy torus-distance deduplication, best ``key`` first."""
    kept = []
    for it in sorted(items, key=key):
        if all(_torus_dist(it, k) >= radius for k in kept):
            kept.append(it)
    return kept


def _finish(G: _Residual, x: float, y: float, r: float, det: float):
    if r == 0.0 and not math.isfinite(det):
        return (x, y, r)
    if abs(det) >= SINGULAR_DET and r <= RESIDUAL_TOL:
        return (x, y, 0.0)
    x1, y1, mr = _refine_mp(G, x, y)
    if not math.hypot(*G(x1, y1)) <= RESIDUAL_TOL:
        log.debug("extended-precision refinement near (%g, %g) failed", x, y)
        return None
    return (x1, y1, mr)


def displacement_bound(F: LiftMap, grid: GridSpec = PERIODIC_GRID) -> float:
    """sup-norm of F(z) - z over the grid."""
    x, y = grid.points()
    fx, fy = F(x, y)
    return float(max(np.abs(fx - x).max(), np.abs(fy - y).max()))


def find_periodic_orbits(F: LiftMap, p: int, grid: GridSpec = PERIODIC_GRID, refine_iters: int = 50,
                         threads: int | None = 1) -> list[tuple[PlanePoint, tuple[int, int]]]:
    """All (z, w) with F^p(z) = z + w, enumerating |w|_inf <= ceil(p * sup|F - id|)."""
    if p < 1:
        raise ValueError("period must be >= 1")
    m = math.ceil(p * displacement_bound(F, grid))
    out = []
    for w in itertools.product(range(-m, m + 1), repeat=2):
        out.extend((z, w) for z in find_periodic_points(F, p, w, grid, refine_iters, threads))
    return out


# --------------------------------------------------------------- stability

ROUNDING_SLACK = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class DeltaOutcome:
    """verdict: instability-witness | stable-witness | inconclusive."""

    delta: float
    verdict: str
    n: int | None
    separation: float


@dataclass
class StabilityReport:
    point: PlanePoint
    epsilon: float
    delta_tested: list[float]
    verdict: str
    delta: float | None = None
    n: int | None = None
    separation: float | None = None
    outcomes: list[DeltaOutcome] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict == "instability-witness" and not (self.separation > self.epsilon and self.n):
            raise ValueError("instability witness needs n and a separation above epsilon")

    def to_json(self) -> str:
        return json.dumps({
            "point": [self.point.x, self.point.y], "epsilon": self.epsilon,
            "delta_tested": self.delta_tested, "verdict": self.verdict, "delta": self.delta,
            "n": self.n, "separation": self.separation,
            "outcomes": [o.__dict__ for o in self.outcomes],
        }, indent=1)


def lyapunov_probe(F: LiftMap, z, epsilon: float = 0.5, delta_list=(1e-2, 1e-3, 1e-4), n_max: int = 100_000,
                   samples: int = 64, seed: int = DEFAULT_SEED) -> StabilityReport:
    """Search for sample points of the circle of radius delta that drift more than epsilon from z.

    All radii share the same sample angles. A radius whose orbits stay within
    epsilon up to n_max, with no growth of the separation between the first
    and second half of the run, counts as a stable witness; other
    exhausted runs are inconclusive.
    """
    if epsilon <= 0 or n_max < 1:
        raise ValueError("need epsilon > 0 and n_max >= 1")
    z = PlanePoint(float(z[0]), float(z[1]))
    deltas = [float(d) for d in delta_list]
    outcomes = []
    for d in deltas:
        if d <= 0:
            raise ValueError("delta values must be positive")
        pts = boundary_samples(z, d, samples, seed)
        x = np.concatenate([[z.x], pts[:, 0]])
        y = np.concatenate([[z.y], pts[:, 1]])
        first_half = second_half = 0.0
        hit = None
        with np.errstate(all="ignore"):
            for n in range(1, n_max + 1):
                x, y = F(x, y)
                sep = float(np.max(np.hypot(x[1:] - x[0], y[1:] - y[0])))
                # differences of large cover coordinates carry rounding error
                slack = ROUNDING_SLACK * (1.0 + abs(float(x[0])) + abs(float(y[0])))
                if not sep <= epsilon + slack:
                    hit = (n, sep)
                    break
                if n <= n_max // 2:
                    first_half = max(first_half, sep)
                else:
                    second_half = max(second_half, sep)
        if hit:
            outcomes.append(DeltaOutcome(d, "instability-witness", hit[0], hit[1]))
        elif second_half <= max(first_half * (1 + 1e-6), d * (1 + 1e-9)):
            outcomes.append(DeltaOutcome(d, "stable-witness", None, max(first_half, second_half)))
        else:
            outcomes.append(DeltaOutcome(d, "inconclusive", None, max(first_half, second_half)))
    unstable = [o for o in outcomes if o.verdict == "instability-witness"]
    stable = [o for o in outcomes if o.verdict == "stable-witness"]
    if unstable:
        o = min(unstable, key=lambda o: o.delta)
        return StabilityReport(z, epsilon, deltas, o.verdict, o.delta, o.n, o.separation, outcomes)
    if stable:
        o = max(stable, key=lambda o: o.delta)
        return StabilityReport(z, epsilon, deltas, o.verdict, o.delta, None, o.separation, outcomes)
    return StabilityReport(z, epsilon, deltas, "inconclusive", None, None, None, outcomes)


@dataclass
class SpreadingFit:
    slope: float
    intercept: float
    residual: float  # |extent - fit| / |fit|
    n_list: list[int]
    extents: np.ndarray


def spreading_slope(F: LiftMap, U: Disk, v=(1.0, 0.0), n_list=tuple(range(100, 2001, 100)),
                    samples: int = 256, seed: int = DEFAULT_SEED) -> SpreadingFit:
    """Least-squares slope of the v-perp extent of F^n(U-hat) against n."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ValueError("n_list needs at least 3 entries")
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 0:
        raise ValueError("n_list must be ascending and >= 0")
    norm = math.hypot(*v)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError("v must be a unit vector")
    ux, uy = -v[1], v[0]
    pts = disk_samples(U, samples, seed)
    x, y = pts[:, 0], pts[:, 1]
    ext = np.empty(len(n_list))
    done = 0
    for i, n in enumerate(n_list):
        x, y = iterate_array(F, x, y, n - done)
        done = n
        proj = x * ux + y * uy
        ext[i] = proj.max() - proj.min()
    A = np.column_stack([n_list, np.ones(len(n_list))])
    coef, *_ = np.linalg.lstsq(A, ext, rcond=None)
    fit = A @ coef
    denom = np.linalg.norm(fit)
    resid = float(np.linalg.norm(ext - fit) / denom) if denom > 0 else 0.0
    return SpreadingFit(float(coef[0]), float(coef[1]), resid, n_list, ext)
