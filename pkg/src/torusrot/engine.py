"""Orbit iteration, displacement averages and parallel grid sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_SEED, Disk, LiftMap, PlanePoint, RotationVector, format_float
from .parallel import run_chunked, task_rng


class OrbitError(ArithmeticError):
    def __init__(self, step: int, value):
        super().__init__(f"non-finite orbit value {value} at step {step}")
        self.step = step


def iterate(F: LiftMap, z, n: int) -> PlanePoint:
    """n-fold composition F^n(z) on the cover."""
    if n < 0:
        raise ValueError("n must be >= 0")
    x, y = float(z[0]), float(z[1])
    fac = F.factor() if n else None
    if fac is not None:
        inner, pre, post = fac
        return PlanePoint(*(float(t) for t in post(*iterate(inner, pre(x, y), n))))
    with np.errstate(all="ignore"):
        for k in range(1, n + 1):
            x, y = F(x, y)
            if not (math.isfinite(x) and math.isfinite(y)):
                raise OrbitError(k, (x, y))
    return PlanePoint(float(x), float(y))


def iterate_array(F: LiftMap, x: np.ndarray, y: np.ndarray, n: int):
    """Vectorised F^n over arrays; non-finite values propagate silently."""
    fac = F.factor() if n else None
    if fac is not None:
        inner, pre, post = fac
        with np.errstate(all="ignore"):
            return post(*iterate_array(inner, *pre(x, y), n))
    with np.errstate(all="ignore"):
        for _ in range(n):
            x, y = F(x, y)
    return x, y


def phi_n(F: LiftMap, z, n: int) -> RotationVector:
    """Average displacement (F^n(z) - z) / n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    fz = iterate(F, z, n)
    return RotationVector((fz.x - z[0]) / n, (fz.y - z[1]) / n)


def deviation(F: LiftMap, z, rho, n: int, v=None):
    """D_n(z, rho) = F^n(z) - z - n rho, or its projection onto the unit vector v."""
    if n < 1:
        raise ValueError("n must be >= 1")
    fz = iterate(F, z, n)
    dx = fz.x - z[0] - n * rho[0]
    dy = fz.y - z[1] - n * rho[1]
    if v is None:
        return (dx, dy)
    if abs(math.hypot(v[0], v[1]) - 1.0) > 1e-12:
        raise ValueError("v must be a unit vector")
    return dx * v[0] + dy * v[1]


@dataclass(frozen=True)
class GridSpec:
    """nx-by-ny grid on [0,1)^2; point (ix, iy) sits at ((ix+ox)/nx, (iy+oy)/ny)."""

    nx: int
    ny: int
    offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid dimensions must be >= 1")

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened coordinates, ix-major (flat index = ix*ny + iy)."""
        ix, iy = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        x = (ix.ravel() + self.offset[0]) / self.nx
        y = (iy.ravel() + self.offset[1]) / self.ny
        return x, y

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        ix, iy = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        return ix.ravel(), iy.ravel()

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        nx, _, ny = text.lower().partition("x")
        return cls(int(nx), int(ny or nx))


@dataclass
class SweepResult:
    grid: GridSpec
    n: int
    burn_in: int
    map_id: str
    x0: np.ndarray
    y0: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    trajectory: np.ndarray | None = field(default=None, repr=False)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.vx) & np.isfinite(self.vy)

    def cloud(self) -> np.ndarray:
        """Finite phi values as an (m, 2) array."""
        ok = self.finite
        return np.column_stack([self.vx[ok], self.vy[ok]])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ix", "iy", "x0", "y0", "vx", "vy"])
        ix, iy = self.grid.indices()
        for row in zip(ix, iy, self.x0, self.y0, self.vx, self.vy):
            w.writerow([int(row[0]), int(row[1])] + [format_float(v) for v in row[2:]])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "map": self.map_id,
            "grid": {"nx": self.grid.nx, "ny": self.grid.ny, "offset": list(self.grid.offset)},
            "n": self.n,
            "burn_in": self.burn_in,
            "x0": self.x0.tolist(), "y0": self.y0.tolist(),
            "vx": [_json_float(v) for v in self.vx],
            "vy": [_json_float(v) for v in self.vy],
        })

    @classmethod
    def from_json(cls, text: str) -> "SweepResult":
        d = json.loads(text)
        g = d["grid"]
        return cls(GridSpec(g["nx"], g["ny"], tuple(g["offset"])), d["n"], d["burn_in"], d["map"],
                   np.array(d["x0"], float), np.array(d["y0"], float),
                   np.array([np.nan if v is None else v for v in d["vx"]], float),
                   np.array([np.nan if v is None else v for v in d["vy"]], float))


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def read_sweep_csv(text: str) -> dict[str, np.ndarray]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return {k: np.array([float(r[k]) for r in rows]) for k in ("ix", "iy", "x0", "y0", "vx", "vy")}


def sweep(F: LiftMap, grid: GridSpec, n: int, burn_in: int = 0, threads: int | None = 1,
          record_every: int | None = None) -> SweepResult:
    """Average displacement over the window [burn_in, n] for every grid point.

    Non-finite orbits give NaN entries (see ``SweepResult.finite``) rather than
    an exception.
    """
    if not (n > burn_in >= 0):
        raise ValueError("require n > burn_in >= 0")
    x0, y0 = grid.points()
    vx = np.empty_like(x0)
    vy = np.empty_like(y0)
    traj = None
    if record_every:
        steps = (n - burn_in) // record_every
        traj = np.empty((x0.size, steps, 2))
    span = n - burn_in

    def work(a, b):
        x, y = iterate_array(F, x0[a:b], y0[a:b], burn_in)
        sx, sy = x, y
        if traj is None:
            x, y = iterate_array(F, x, y, span)
        else:
            for k in range(traj.shape[1]):
                x, y = iterate_array(F, x, y, record_every)
                traj[a:b, k, 0] = x
                traj[a:b, k, 1] = y
            x, y = iterate_array(F, x, y, span - traj.shape[1] * record_every)
        with np.errstate(all="ignore"):
            vx[a:b] = (x - sx) / span
            vy[a:b] = (y - sy) / span
        bad = ~(np.isfinite(vx[a:b]) & np.isfinite(vy[a:b]))
        vx[a:b][bad] = np.nan
        vy[a:b][bad] = np.nan

    run_chunked(work, x0.size, threads)
    return SweepResult(grid, n, burn_in, F.describe(), x0, y0, vx, vy, traj)


def phi_at(F: LiftMap, x: np.ndarray, y: np.ndarray, n: int, threads: int | None = 1) -> np.ndarray:
    """phi_n at arbitrary start points, shape (m, 2); chunked like ``sweep``."""
    out = np.empty((x.size, 2))

    def work(a, b):
        fx, fy = iterate_array(F, x[a:b], y[a:b], n)
        with np.errstate(all="ignore"):
            out[a:b, 0] = (fx - x[a:b]) / n
            out[a:b, 1] = (fy - y[a:b]) / n

    run_chunked(work, x.size, threads)
    return out


def disk_samples(U: Disk, m: int, seed: int = DEFAULT_SEED, key: tuple[int, ...] = ()) -> np.ndarray:
    """Stratified jittered samples in the lifted disk centred at ``U.center``.

    Strata form a k-by-k grid in (r^2, angle) coordinates, which is area-uniform;
    when m < k^2 a seeded subset of strata is kept.
    """
    if m < 1:
        raise ValueError("samples must be >= 1")
    rng = task_rng(seed, 1, *key)
    k = math.ceil(math.sqrt(m))
    i, j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    u = (i.ravel() + rng.random(k * k)) / k
    t = (j.ravel() + rng.random(k * k)) / k
    if k * k > m:
        keep = np.sort(rng.choice(k * k, size=m, replace=False))
        u, t = u[keep], t[keep]
    r = U.radius * np.sqrt(u)
    ang = 2.0 * np.pi * t
    return np.column_stack([U.center.x + r * np.cos(ang), U.center.y + r * np.sin(ang)])


def boundary_samples(center, radius: float, m: int, seed: int = DEFAULT_SEED,
                     key: tuple[int, ...] = ()) -> np.ndarray:
    """m points evenly spaced on a circle, with a seeded common phase.

    The phase depends only on (seed, key), so circles of different radius
    share their sample angles.
    """
    phase = task_rng(seed, 2, *key).random()
    ang = 2.0 * np.pi * (np.arange(m) + phase) / m
    return np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])


def set_diameter(points: np.ndarray) -> float:
    """Max pairwise distance of a finite point set."""
    from .geometry import convex_hull, hull_diameter

    if len(points) < 2:
        return 0.0
    return hull_diameter(convex_hull(points))


def orbit_diameter_growth(F: LiftMap, U: Disk, n_list, samples: int = 64,
                          seed: int = DEFAULT_SEED) -> np.ndarray:
    """diam F^n(U-hat) for each n, estimated from boundary + interior samples."""
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 0:
        raise ValueError("n_list must be nonempty, ascending and >= 0")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    nb = samples // 2
    pts = np.vstack([
        boundary_samples(U.center, U.radius, nb, seed),
        disk_samples(U, samples - nb, seed),
    ])
    x, y = pts[:, 0].copy(), pts[:, 1].copy()
    out = np.empty(len(n_list))
    done = 0
    for i, n in enumerate(n_list):
        x, y = iterate_array(F, x, y, n - done)
        done = n
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise OrbitError(n, "nan")
        out[i] = set_diameter(np.column_stack([x, y]))
    return out
