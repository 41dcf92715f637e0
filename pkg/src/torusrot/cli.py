"""Command-line interface: ``torusrot <subcommand> [options]``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classify, lattice, render, rotation
from .core import DEFAULT_SEED, DirectionalFrame, Disk, MapError, MZLift, format_float, translate_commutation_check
from .engine import GridSpec, OrbitError
from .geometry import ConvexPolygon, hull_area, hull_diameter
from .mapdsl import LIFT_TOLERANCE, parse_map

log = logging.getLogger("torusrot")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    map_source: str | None
    alpha: float
    beta: float
    seed: int
    threads: int
    out: str
    fmt: str | None
    options: dict = field(default_factory=dict)

    def lift(self):
        if self.map_source is not None:
            return parse_map(self.map_source, seed=self.seed)
        return MZLift(self.alpha, self.beta)


# ------------------------------------------------------------------ parsing

def _pair(text: str, kind=float):
    try:
        a, b = (kind(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None
    return a, b


def _int_pair(text: str):
    return _pair(text, int)


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be >= 0")
    return v


def _grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}: {e}") from None


def _schedule(text: str):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid schedule {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("map and run options")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--map", dest="map_source", help='DSL lift, e.g. "x + 0.1*sin(2*pi*y) ; y"')
    src.add_argument("--map-file", help="file holding a DSL lift")
    g.add_argument("--alpha", type=float, default=0.5, help="built-in family parameter (default 0.5)")
    g.add_argument("--beta", type=float, default=0.5, help="built-in family parameter (default 0.5)")
    g.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED:#x})")
    g.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    g.add_argument("--out", default="-", help="output path, '-' for stdout")
    g.add_argument("--format", dest="fmt", choices=["csv", "json", "ppm", "pgm"])
    g.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="torusrot", description="Rotation sets of torus homeomorphisms.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("portrait", parents=[common], help="phase portrait image")
    s.add_argument("--preset", choices=sorted(render.PRESETS))
    s.add_argument("--grid", type=_grid, help="grid of starting points, e.g. 40x40")
    s.add_argument("--starts", help="explicit starts 'x,y;x,y;...'")
    s.add_argument("--iterates", type=int)
    s.add_argument("--burn-in", type=int)
    s.add_argument("--size", help="WxH pixels (default 800x800)")

    s = sub.add_parser("rotset", parents=[common], help="estimate the rotation set")
    s.add_argument("--grid", type=_grid, default=GridSpec(200, 200))
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--no-refine", action="store_true")

    s = sub.add_parser("local", parents=[common], help="local rotation subset of a disk")
    s.add_argument("--center", type=_pair, required=True)
    s.add_argument("--radius", type=float, default=0.03)
    s.add_argument("--n", type=int, default=5000)
    s.add_argument("--samples", type=int, default=256)

    s = sub.add_parser("classify", parents=[common], help="elliptic/chaotic labels (one disk or a grid)")
    s.add_argument("--center", type=_pair, help="classify one disk around this point")
    s.add_argument("--grid", type=_grid, default=GridSpec(40, 40))
    s.add_argument("--radius", type=float, default=0.03)
    s.add_argument("--schedule", type=_schedule)
    s.add_argument("--samples", type=int)
    s.add_argument("--tol", type=float, default=rotation.SINGLETON_TOL)

    s = sub.add_parser("islands", parents=[common], help="elliptic islands with periods and periodic points")
    s.add_argument("--grid", type=_grid, default=GridSpec(40, 40))
    s.add_argument("--radius", type=float, default=0.03)
    s.add_argument("--schedule", type=_schedule, default=classify.MAP_SCHEDULE)
    s.add_argument("--samples", type=int, default=classify.MAP_SAMPLES)

    s = sub.add_parser("periodic", parents=[common], help="periodic points with F^p(z) = z + w")
    s.add_argument("-p", "--period", type=int, required=True)
    s.add_argument("--w", type=_int_pair, help="integer displacement; all are searched if omitted")
    s.add_argument("--search-grid", type=_grid, default=classify.PERIODIC_GRID)

    s = sub.add_parser("symmetry", parents=[common], help="check a conjugacy identity")
    s.add_argument("--sym", choices=sorted(lattice.SYMMETRIES), required=True)
    s.add_argument("--target", choices=["self", "inverse"], default="self")
    s.add_argument("--samples", type=int, default=1000)

    s = sub.add_parser("transform", parents=[common], help="SL(2,Z) operations on rotation data")
    s.add_argument("--matrix", help="'a,b;c,d' with determinant 1")
    s.add_argument("--complete", type=_int_pair, help="complete a primitive vector to an SL(2,Z) matrix")
    s.add_argument("--vector", action="append", type=_pair, default=[], help="rotation vector x,y (repeatable)")
    s.add_argument("--hull", help="hull JSON file (as written by rotset)")
    s.add_argument("--frame", help="line frame 'v1,v2,lam'")

    s = sub.add_parser("validate-map", parents=[common], help="check a DSL lift")
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    source = args.map_source
    if args.map_file:
        try:
            source = Path(args.map_file).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read map file: {e}") from None
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    opts = {k: v for k, v in vars(args).items()
            if k not in ("command", "map_source", "map_file", "alpha", "beta", "seed", "threads", "out", "fmt",
                         "verbose")}
    cfg = RunConfig(args.command, source, args.alpha, args.beta, args.seed, args.threads, args.out, args.fmt, opts)
    _validate(cfg)
    return cfg


# output formats per command; the first is the default
FORMATS = {
    "portrait": ("pgm", "ppm"), "rotset": ("json", "csv"), "local": ("json", "csv"),
    "classify": ("csv", "ppm", "json"), "islands": ("json",), "periodic": ("csv", "json"),
    "symmetry": ("json",), "transform": ("json",), "validate-map": ("json",),
}


def _validate(cfg: RunConfig):
    o = cfg.options
    if cfg.fmt is not None and cfg.fmt not in FORMATS[cfg.command]:
        raise ConfigError(f"{cfg.command} cannot write {cfg.fmt}; choose from {', '.join(FORMATS[cfg.command])}")
    for key in ("n", "iterates", "samples", "period"):
        if o.get(key) is not None and o[key] < 1:
            raise ConfigError(f"--{key} must be >= 1")
    if o.get("radius") is not None and not 0 < o["radius"] < 0.5:
        raise ConfigError("--radius must lie in (0, 1/2)")
    if o.get("burn_in") is not None and o["burn_in"] < 0:
        raise ConfigError("--burn-in must be >= 0")
    sched = o.get("schedule")
    if sched is not None and (sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:]))):
        raise ConfigError("--schedule must be ascending positive integers")
    if cfg.command == "validate-map" and cfg.map_source is None:
        raise ConfigError("validate-map needs --map or --map-file")
    if cfg.command == "transform" and not (o.get("matrix") or o.get("complete")):
        raise ConfigError("transform needs --matrix or --complete")
    if cfg.command == "portrait":
        if sum(x is not None for x in (o.get("preset"), o.get("grid"), o.get("starts"))) != 1:
            raise ConfigError("portrait needs exactly one of --preset, --grid, --starts")


# ----------------------------------------------------------------- outputs

def _emit(cfg: RunConfig, payload, default: str):
    data = payload.encode() if isinstance(payload, str) else payload
    if cfg.out == "-":
        if isinstance(payload, str):
            sys.stdout.write(payload)
        else:
            sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(cfg.out).write_bytes(data)
    except OSError as e:
        raise ConfigError(f"cannot write {cfg.out}: {e}") from None


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, (str, int)) and not isinstance(v, bool) else format_float(v) for v in r])
    return buf.getvalue()


def _fmt(cfg: RunConfig, allowed, default):
    fmt = cfg.fmt or default
    if fmt not in allowed:
        raise ConfigError(f"{cfg.command} cannot write {fmt}; choose from {', '.join(allowed)}")
    return fmt


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


# ---------------------------------------------------------------- commands

def cmd_portrait(cfg: RunConfig):
    o = cfg.options
    alpha, beta = cfg.alpha, cfg.beta
    base = {"iterates": 1000, "burn_in": 100, "size": 800}
    starts = None
    if o["preset"]:
        pre = render.preset_config(o["preset"])
        base.update({k: pre[k] for k in ("iterates", "burn_in", "size")})
        if cfg.map_source is None:
            alpha, beta = pre["alpha"], pre["beta"]
        starts = (render.grid_starts(GridSpec.parse(pre["grid"])) if "grid" in pre
                  else np.array(pre["starts"], dtype=float))
    elif o["grid"] is not None:
        starts = render.grid_starts(o["grid"])
    else:
        try:
            starts = np.array([_pair(p) for p in o["starts"].split(";")], dtype=float)
        except argparse.ArgumentTypeError as e:
            raise ConfigError(str(e)) from None
    iterates = o["iterates"] if o["iterates"] is not None else base["iterates"]
    burn_in = o["burn_in"] if o["burn_in"] is not None else base["burn_in"]
    if o["size"]:
        try:
            w, h = render.parse_size(o["size"])
        except ValueError as e:
            raise ConfigError(f"invalid --size: {e}") from None
    else:
        w = h = base["size"]
    if burn_in >= iterates:
        raise ConfigError("--burn-in must be smaller than --iterates")
    F = cfg.lift() if cfg.map_source is not None else MZLift(alpha, beta)
    img = render.portrait(F, starts, iterates, burn_in, w, h)
    fmt = _fmt(cfg, ("pgm", "ppm"), "pgm")
    _emit(cfg, img.to_pgm() if fmt == "pgm" else img.to_ppm(), fmt)


def _hull_dict(h: ConvexPolygon) -> dict:
    return {"vertices": h.vertices.tolist(), "area": hull_area(h), "diameter": hull_diameter(h)}


def cmd_rotset(cfg: RunConfig):
    o = cfg.options
    est = rotation.estimate_rotation_set(cfg.lift(), o["grid"], o["n"], cfg.threads, not o["no_refine"])
    fmt = _fmt(cfg, ("json", "csv"), "json")
    if fmt == "json":
        _emit(cfg, est.to_json() + "\n", fmt)
    else:
        _emit(cfg, _rows_csv(["x", "y"], est.hull.vertices.tolist()), fmt)


def cmd_local(cfg: RunConfig):
    o = cfg.options
    U = Disk(o["center"], o["radius"])
    est = rotation.local_rotation_subset(cfg.lift(), U, o["n"], o["samples"], cfg.seed, threads=cfg.threads)
    fmt = _fmt(cfg, ("json", "csv"), "json")
    if fmt == "json":
        _emit(cfg, est.to_json() + "\n", fmt)
    else:
        _emit(cfg, _rows_csv(["vx", "vy"], est.cloud.tolist()), fmt)


def _label_dict(lab) -> dict:
    return {"kind": lab.kind, "detail": lab.detail, "diameter": lab.diameter, "area": lab.area,
            "witness": list(lab.witness) if lab.witness is not None else None,
            "schedule": list(lab.schedule)}


def cmd_classify(cfg: RunConfig):
    o = cfg.options
    F = cfg.lift()
    if o["center"] is not None:
        lab = rotation.dichotomy_classify(F, Disk(o["center"], o["radius"]),
                                          o["schedule"] or rotation.DEFAULT_SCHEDULE, o["tol"],
                                          o["samples"] or 256, cfg.seed, threads=cfg.threads)
        _fmt(cfg, ("json",), "json")
        _emit(cfg, _dump(_label_dict(lab)), "json")
        return
    labels = classify.classification_map(F, o["grid"], o["radius"], o["schedule"] or classify.MAP_SCHEDULE,
                                         o["tol"], o["samples"] or classify.MAP_SAMPLES, cfg.seed,
                                         threads=cfg.threads)
    fmt = _fmt(cfg, ("csv", "ppm"), "csv")
    if fmt == "csv":
        _emit(cfg, labels.to_csv(), fmt)
    else:
        _emit(cfg, render.encode_pnm(render.label_image(labels)), fmt)


def cmd_islands(cfg: RunConfig):
    o = cfg.options
    F = cfg.lift()
    labels = classify.classification_map(F, o["grid"], o["radius"], o["schedule"], samples=o["samples"],
                                         seed=cfg.seed, threads=cfg.threads)
    islands = classify.extract_islands(labels, F=F)
    _fmt(cfg, ("json",), "json")
    _emit(cfg, classify.islands_to_json(islands) + "\n", "json")


def cmd_periodic(cfg: RunConfig):
    o = cfg.options
    F = cfg.lift()
    if o["w"] is not None:
        found = [(z, o["w"]) for z in classify.find_periodic_points(F, o["period"], o["w"], o["search_grid"],
                                                                    threads=cfg.threads)]
    else:
        found = classify.find_periodic_orbits(F, o["period"], o["search_grid"], threads=cfg.threads)
    fmt = _fmt(cfg, ("csv", "json"), "csv")
    rows = [(z.x, z.y, int(w[0]), int(w[1])) for z, w in found]
    if fmt == "csv":
        _emit(cfg, _rows_csv(["x", "y", "wx", "wy"], rows), fmt)
    else:
        _emit(cfg, _dump([{"x": r[0], "y": r[1], "w": [r[2], r[3]]} for r in rows]), fmt)


def cmd_symmetry(cfg: RunConfig):
    o = cfg.options
    F = cfg.lift()
    err = lattice.check_conjugacy(F, lattice.SYMMETRIES[o["sym"]], o["target"], o["samples"], cfg.seed)
    _fmt(cfg, ("json",), "json")
    _emit(cfg, _dump({"map": F.describe(), "sym": o["sym"], "target": o["target"], "samples": o["samples"],
                      "max_error": err}), "json")


def cmd_transform(cfg: RunConfig):
    o = cfg.options
    out: dict = {}
    try:
        if o["complete"] is not None:
            out["completion"] = str(lattice.complete_to_unimodular(o["complete"]))
        if o["matrix"]:
            M = lattice.UnimodularMatrix.parse(o["matrix"])
            out["matrix"] = str(M)
            if o["vector"]:
                out["vectors"] = [list(v) for v in lattice.transform_rotation_data(o["vector"], M)]
            if o["hull"]:
                hull = ConvexPolygon(np.array(json.loads(Path(o["hull"]).read_text())["vertices"], dtype=float))
                out["hull"] = _hull_dict(lattice.transform_rotation_data(hull, M))
            if o["frame"]:
                v1, v2, lam = (float(t) for t in o["frame"].split(","))
                norm = float(np.hypot(v1, v2))
                fr = lattice.line_frame_transform(DirectionalFrame((v1 / norm, v2 / norm), lam), M)
                out["frame"] = {"v": list(fr.v), "lam": fr.lam}
    except (OSError, KeyError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read input: {e}") from None
    _fmt(cfg, ("json",), "json")
    _emit(cfg, _dump(out), "json")


def cmd_validate_map(cfg: RunConfig):
    F = parse_map(cfg.map_source, validate=False)
    err = translate_commutation_check(F, 1000, cfg.seed)
    ok = err <= LIFT_TOLERANCE
    _fmt(cfg, ("json",), "json")
    _emit(cfg, _dump({"map": F.source, "commutation_error": err if np.isfinite(err) else None,
                      "tolerance": LIFT_TOLERANCE, "valid": bool(ok)}), "json")
    if not ok:
        raise ConfigError(f"not a valid lift (commutation error {err:.3g})")


COMMANDS = {
    "portrait": cmd_portrait, "rotset": cmd_rotset, "local": cmd_local, "classify": cmd_classify,
    "islands": cmd_islands, "periodic": cmd_periodic, "symmetry": cmd_symmetry,
    "transform": cmd_transform, "validate-map": cmd_validate_map,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        COMMANDS[cfg.command](cfg)
    except (ConfigError, MapError) as e:
        print(f"torusrot: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OrbitError, ArithmeticError, FloatingPointError) as e:
        print(f"torusrot: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"torusrot: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
