"""Estimators for global rotation sets and local rotation subsets.

All estimates are finite-time: ``phi_n(z) = (F^n(z) - z)/n`` evaluated on
finitely many starting points. Thresholds below are heuristics, not
certified bounds.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import DEFAULT_SEED, Disk, LiftMap
from .engine import GridSpec, disk_samples, iterate_array, phi_at, sweep
from .geometry import ConvexPolygon, convex_hull, hausdorff_distance, hull_area, hull_diameter
from .parallel import run_chunked

log = logging.getLogger(__name__)

SINGLETON_TOL = 1e-3
QMAX = 64
DEFAULT_SCHEDULE = (1000, 2000, 5000)
SPLIT_FACTOR = 10.0


@dataclass
class RotationSetEstimate:
    hull: ConvexPolygon
    sample_cloud: np.ndarray
    n_used: int
    resolution: GridSpec
    map_id: str = ""

    def to_json(self) -> str:
        return json.dumps({
            "map": self.map_id,
            "n": self.n_used,
            "grid": {"nx": self.resolution.nx, "ny": self.resolution.ny,
                     "offset": list(self.resolution.offset)},
            "vertices": self.hull.vertices.tolist(),
            "area": hull_area(self.hull),
            "diameter": hull_diameter(self.hull),
            "cloud_size": int(len(self.sample_cloud)),
        }, indent=1)


@dataclass
class LocalRotationEstimate:
    disk: Disk
    cloud: np.ndarray
    hull: ConvexPolygon
    n_used: int
    samples_used: int
    split_warning: bool = False

    def to_json(self) -> str:
        return json.dumps({
            "center": [self.disk.center.x, self.disk.center.y],
            "radius": self.disk.radius,
            "n": self.n_used,
            "samples": self.samples_used,
            "vertices": self.hull.vertices.tolist(),
            "area": hull_area(self.hull),
            "diameter": hull_diameter(self.hull),
            "split_warning": self.split_warning,
        }, indent=1)


@dataclass(frozen=True)
class StructureVerdict:
    """kind is one of: singleton-rational, singleton-semi-rational,
    singleton-irrational, segment, fat, undetermined.

    ``witness`` holds Fractions (rational singleton), the centroid
    (other singletons) or the two segment endpoints.
    """

    kind: str
    witness: tuple | None = None
    diameter: float = 0.0
    area: float = 0.0

    @property
    def singleton(self) -> bool:
        return self.kind.startswith("singleton")


@dataclass
class ClassificationLabel:
    kind: str  # elliptic | chaotic | undetermined
    diameter: float
    area: float
    witness: tuple[float, float] | None
    schedule: tuple[int, ...]
    detail: str = ""
    history: list[StructureVerdict] = field(default_factory=list)

    def __post_init__(self):
        if self.kind == "elliptic" and self.witness is None:
            raise ValueError("elliptic label needs a witness vector")


def convergents(x: float, qmax: int):
    """Continued-fraction convergents p/q of x with q <= qmax."""
    a0 = math.floor(x)
    p0, q0, p1, q1 = 1, 0, a0, 1
    yield p1, q1
    frac = x - a0
    while frac > 1e-15:
        x = 1.0 / frac
        a = math.floor(x)
        frac = x - a
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > qmax:
            return
        yield p1, q1


def rational_approximation(x: float, tol: float, qmax: int = QMAX) -> Fraction | None:
    """First convergent p/q (q <= qmax) with |x - p/q| <= tol/q, else None.

    Scaling the tolerance by 1/q keeps the accepted set small: with a flat
    tolerance, about a quarter of all reals would count as rational at
    q <= 64, tol = 1e-4.
    """
    for p, q in convergents(x, qmax):
        if abs(x - p / q) <= tol / q:
            return Fraction(p, q)
    return None


def classify_vector(rho, tol: float = SINGLETON_TOL, qmax: int = QMAX) -> StructureVerdict:
    r1 = rational_approximation(rho[0], tol, qmax)
    r2 = rational_approximation(rho[1], tol, qmax)
    if r1 is not None and r2 is not None:
        return StructureVerdict("singleton-rational", (r1, r2))
    centre = (float(rho[0]), float(rho[1]))
    if r1 is not None or r2 is not None:
        return StructureVerdict("singleton-semi-rational", centre)
    a, b = sorted((abs(rho[0]), abs(rho[1])))
    if rational_approximation(a / b, tol, qmax) is not None:
        return StructureVerdict("singleton-semi-rational", centre)
    return StructureVerdict("singleton-irrational", centre)


def detect_structure(e, tol: float = SINGLETON_TOL, qmax: int = QMAX) -> StructureVerdict:
    """Classify an estimate (or bare hull) as singleton / segment / fat."""
    if isinstance(e, ConvexPolygon):
        hull, cloud = e, e.vertices
    else:
        hull = e.hull
        cloud = e.cloud if isinstance(e, LocalRotationEstimate) else e.sample_cloud
    if tol <= 0 or qmax < 1:
        raise ValueError("need tol > 0 and qmax >= 1")
    if len(hull) == 0:
        return StructureVerdict("undetermined")
    diam = hull_diameter(hull)
    area = hull_area(hull)
    if diam < tol:
        centre = np.asarray(cloud).mean(axis=0)
        v = classify_vector(centre, tol, qmax)
        return StructureVerdict(v.kind, v.witness, diam, area)
    if area < tol * diam:
        v = hull.vertices
        d = ((v[:, None, :] - v[None, :, :]) ** 2).sum(-1)
        i, j = np.unravel_index(np.argmax(d), d.shape)
        return StructureVerdict("segment", (tuple(v[i]), tuple(v[j])), diam, area)
    return StructureVerdict("fat", None, diam, area)


def estimate_rotation_set(F: LiftMap, grid: GridSpec, n: int, threads: int | None = 1,
                          refine: bool = True) -> RotationSetEstimate:
    """Hull of phi_n over the grid plus one refinement pass near hull vertices.

    The refinement evaluates phi_n at the eight half-cell neighbours of every
    grid point that realises a hull vertex.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    res = sweep(F, grid, n, 0, threads)
    ok = res.finite
    cloud = res.cloud()
    idx = np.flatnonzero(ok)
    hull = convex_hull(cloud)
    if refine and len(hull) > 0:
        ix_all, iy_all = grid.indices()
        vert_rows = _rows_of(cloud, hull.vertices)
        xs, ys = [], []
        for r in vert_rows:
            k = idx[r]
            for dx in (-0.5, 0.0, 0.5):
                for dy in (-0.5, 0.0, 0.5):
                    if dx == 0.0 and dy == 0.0:
                        continue
                    xs.append((ix_all[k] + grid.offset[0] + dx) / grid.nx)
                    ys.append((iy_all[k] + grid.offset[1] + dy) / grid.ny)
        extra = phi_at(F, np.array(xs), np.array(ys), n, threads)
        extra = extra[np.all(np.isfinite(extra), axis=1)]
        cloud = np.vstack([cloud, extra])
        hull = convex_hull(cloud)
    return RotationSetEstimate(hull, cloud, n, grid, F.describe())


def _rows_of(cloud: np.ndarray, vertices: np.ndarray) -> list[int]:
    rows = []
    for v in vertices:
        rows.append(int(np.flatnonzero((cloud[:, 0] == v[0]) & (cloud[:, 1] == v[1]))[0]))
    return rows


def local_clouds(F: LiftMap, centers: np.ndarray, radius: float, schedule, samples: int,
                 seed: int = DEFAULT_SEED, keys=None, threads: int | None = 1) -> np.ndarray:
    """phi_n clouds for many disks at once.

    Returns shape (len(schedule), len(centers), samples, 2). Disk j is sampled
    with :func:`disk_samples` under key ``keys[j]`` (default: empty key).
    """
    schedule = [int(n) for n in schedule]
    if not schedule or schedule[0] < 1 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be ascending positive integers")
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    if keys is None:
        keys = [()] * len(centers)
    pts = np.vstack([
        disk_samples(Disk(tuple(c), radius), samples, seed, tuple(k)) for c, k in zip(centers, keys)
    ])
    x0, y0 = pts[:, 0], pts[:, 1]
    out = np.empty((len(schedule), len(pts), 2))

    def work(a, b):
        x, y = x0[a:b], y0[a:b]
        done = 0
        for s, n in enumerate(schedule):
            x, y = iterate_array(F, x, y, n - done)
            done = n
            with np.errstate(all="ignore"):
                out[s, a:b, 0] = (x - x0[a:b]) / n
                out[s, a:b, 1] = (y - y0[a:b]) / n

    run_chunked(work, len(pts), threads)
    return out.reshape(len(schedule), len(centers), samples, 2)


def split_diagnostic(cloud: np.ndarray, min_share: float = 0.05) -> tuple[bool, float, float]:
    """(split?, largest single-linkage gap, median nearest-neighbour gap).

    A connected disk has a connected rotation subset, so a cloud that breaks
    into clusters far apart relative to its typical spacing indicates an
    unconverged estimate. Only clusters holding at least ``min_share`` of the
    points count; isolated outliers do not.
    """
    from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
    from scipy.spatial import cKDTree

    pts = np.unique(np.asarray(cloud), axis=0)
    if len(pts) < 3:
        return False, 0.0, 0.0
    pts = pts[:: -(-len(pts) // 2048)]  # dense distance matrix below
    d, _ = cKDTree(pts).query(pts, k=2)
    median_gap = float(np.median(d[:, 1]))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    mst = minimum_spanning_tree(dist).tocoo()
    max_gap = float(mst.data.max()) if mst.nnz else 0.0
    if median_gap <= 0 or max_gap <= SPLIT_FACTOR * median_gap:
        return False, max_gap, median_gap
    keep = mst.data <= SPLIT_FACTOR * median_gap
    from scipy.sparse import coo_matrix

    g = coo_matrix((np.ones(keep.sum()), (mst.row[keep], mst.col[keep])), shape=(len(pts),) * 2)
    _, lab = connected_components(g, directed=False)
    sizes = np.bincount(lab)
    big = int((sizes >= max(2, min_share * len(pts))).sum())
    return big >= 2, max_gap, median_gap


def local_rotation_subset(F: LiftMap, U: Disk, n: int, samples: int = 256,
                          seed: int = DEFAULT_SEED, key=(), threads: int | None = 1) -> LocalRotationEstimate:
    """phi_n cloud over seeded stratified samples in one lift of U."""
    if n < 1 or samples < 1:
        raise ValueError("need n >= 1 and samples >= 1")
    cloud = local_clouds(F, [tuple(U.center)], U.radius, [n], samples, seed, [key], threads)[0, 0]
    return _local_estimate(U, cloud, n, samples)


def _local_estimate(U: Disk, cloud: np.ndarray, n: int, samples: int) -> LocalRotationEstimate:
    cloud = cloud[np.all(np.isfinite(cloud), axis=1)]
    split, gap, med = split_diagnostic(cloud)
    if split:
        log.info("phi_%d cloud over %s splits (gap %.3g vs median %.3g): estimate unconverged",
                    n, U, gap, med)
    return LocalRotationEstimate(U, cloud, convex_hull(cloud), n, samples, split)


def label_from_history(history: list[StructureVerdict], schedule) -> ClassificationLabel:
    """Elliptic if the last two verdicts are the same rational singleton,
    chaotic if the last two are fat, otherwise undetermined."""
    last = history[-1]
    prev = history[-2] if len(history) > 1 else last
    witness = None
    kind = "undetermined"
    if last.kind == prev.kind == "singleton-rational" and last.witness == prev.witness:
        kind = "elliptic"
        witness = tuple(float(w) for w in last.witness)
    elif last.kind == prev.kind == "fat":
        kind = "chaotic"
    elif last.singleton:
        witness = tuple(float(w) for w in last.witness)
    return ClassificationLabel(kind, last.diameter, last.area, witness, tuple(schedule),
                               last.kind, list(history))


def dichotomy_classify(F: LiftMap, U: Disk, schedule=DEFAULT_SCHEDULE, tol: float = SINGLETON_TOL,
                       samples: int = 256, seed: int = DEFAULT_SEED, qmax: int = QMAX, key=(),
                       threads: int | None = 1) -> ClassificationLabel:
    """Label U elliptic / chaotic / undetermined from its local rotation subsets.

    The chaotic test compares hull area with ``tol * diameter``; since finite
    samples concentrate around the mean rotation vector, chaotic hull areas
    decay roughly like 1/n and no fixed area threshold is used.
    """
    clouds = local_clouds(F, [tuple(U.center)], U.radius, schedule, samples, seed, [key], threads)
    history = [
        detect_structure(_local_estimate(U, clouds[s, 0], n, samples), tol, qmax)
        for s, n in enumerate(schedule)
    ]
    return label_from_history(history, schedule)


def convergence_profile(F: LiftMap, U: Disk, n_list, samples: int = 64,
                        seed: int = DEFAULT_SEED) -> np.ndarray:
    """Hausdorff distance between the phi_n and phi_2n clouds of U, per n."""
    n_list = [int(n) for n in n_list]
    sched = sorted(set(n_list) | {2 * n for n in n_list})
    clouds = local_clouds(F, [tuple(U.center)], U.radius, sched, samples, seed)
    pos = {n: i for i, n in enumerate(sched)}
    return np.array([hausdorff_distance(clouds[pos[n], 0], clouds[pos[2 * n], 0]) for n in n_list])
