import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from torusrot.cli import main
from torusrot.geometry import ConvexPolygon, contains, diamond
from torusrot.render import decode_pnm


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rotset_json_contains_square(tmp_path):
    path = tmp_path / "hull.json"
    assert main(["rotset", "--grid", "40x40", "--n", "1000", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    hull = ConvexPolygon(np.array(data["vertices"]))
    assert contains(hull, diamond(0.48), 0.02)
    assert data["grid"]["nx"] == 40


def test_rotset_csv(capsys):
    code, out, _ = run(capsys, "rotset", "--grid", "8x8", "--n", "50", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "y"] and len(rows) > 3


def test_periodic_csv_contains_orbit(capsys):
    code, out, _ = run(capsys, "periodic", "--alpha", "0.5", "--beta", "0.5", "-p", "2", "--w", "0,1")
    assert code == 0
    assert "0.25,0.0,0,1" in out.splitlines()
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(r["wx"] == "0" and r["wy"] == "1" for r in rows)


def test_periodic_json_all_displacements(capsys):
    code, out, _ = run(capsys, "periodic", "-p", "1", "--format", "json", "--search-grid", "16x16")
    assert code == 0
    pts = json.loads(out)
    assert {(p["x"], p["y"]) for p in pts} >= {(0.0, 0.0), (0.5, 0.5)}


def test_symmetry_command(capsys):
    code, out, _ = run(capsys, "symmetry", "--alpha", "0.5", "--beta", "0.5", "--sym", "R", "--target", "inverse")
    assert code == 0
    assert json.loads(out)["max_error"] <= 1e-9
    code, out, _ = run(capsys, "symmetry", "--beta", "0.502", "--sym", "R", "--target", "inverse")
    assert code == 0 and json.loads(out)["max_error"] > 1e-3


def test_local_and_classify_single_disk(capsys):
    code, out, _ = run(capsys, "local", "--center", "0.25,0.25", "--n", "1000", "--samples", "64")
    assert code == 0
    assert json.loads(out)["diameter"] < 0.05
    code, out, _ = run(capsys, "local", "--center", "0.25,0.25", "--n", "100", "--samples", "16", "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 17
    code, out, _ = run(capsys, "classify", "--center", "0.25,0.25", "--schedule", "1000,2000")
    assert code == 0
    lab = json.loads(out)
    assert lab["kind"] == "elliptic" and lab["witness"] == [0.0, 0.0]


def test_classify_grid_csv_and_ppm(tmp_path, capsys):
    code, out, _ = run(capsys, "classify", "--grid", "4x4", "--schedule", "50,100", "--samples", "8")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 16 and {r["label"] for r in rows} <= {"elliptic", "chaotic", "undetermined"}
    path = tmp_path / "labels.ppm"
    assert main(["classify", "--grid", "4x4", "--schedule", "50,100", "--samples", "8",
                 "--format", "ppm", "--out", str(path)]) == 0
    assert decode_pnm(path.read_bytes()).shape == (40, 40, 3)


def test_islands_command(capsys):
    code, out, _ = run(capsys, "islands", "--map", "x ; y", "--grid", "3x3", "--schedule", "10,20", "--samples", "4")
    assert code == 0
    islands = json.loads(out)
    assert len(islands) == 1 and islands[0]["period"] == 1


def test_transform_command(tmp_path, capsys):
    code, out, _ = run(capsys, "transform", "--complete", "2,3")
    assert code == 0 and json.loads(out)["completion"] == "2,1;3,2"
    hull = tmp_path / "hull.json"
    hull.write_text(json.dumps({"vertices": [[0.5, 0], [0, 0.5], [-0.5, 0], [0, -0.5]]}))
    code, out, _ = run(capsys, "transform", "--matrix", "1,1;0,1", "--vector", "0,0.5",
                       "--hull", str(hull), "--frame", "1,0,1")
    assert code == 0
    data = json.loads(out)
    assert data["vectors"] == [[-0.5, 0.5]]
    assert len(data["hull"]["vertices"]) == 4
    assert data["frame"]["v"] == pytest.approx([2 ** -0.5, 2 ** -0.5])


def test_validate_map(tmp_path, capsys):
    code, out, _ = run(capsys, "validate-map", "--map", "x + 0.3 ; y + 0.7")
    assert code == 0 and json.loads(out)["valid"] is True
    path = tmp_path / "bad.map"
    path.write_text("x + x*x ; y")
    code, out, err = run(capsys, "validate-map", "--map-file", str(path))
    assert code == 2 and json.loads(out)["valid"] is False


def test_portrait_starts_and_formats(tmp_path):
    path = tmp_path / "p.ppm"
    assert main(["portrait", "--starts", "0.1,0.2;0.3,0.4", "--iterates", "50", "--burn-in", "0",
                 "--size", "20x10", "--format", "ppm", "--out", str(path)]) == 0
    assert decode_pnm(path.read_bytes()).shape == (10, 20, 3)


@pytest.mark.parametrize("argv", [
    ["rotset", "--n", "0"],
    ["rotset", "--map", "x + ; y"],
    ["rotset", "--map", "x*x ; y"],
    ["local", "--center", "0.1,0.1", "--radius", "0.7"],
    ["classify", "--schedule", "200,100"],
    ["portrait"],
    ["portrait", "--grid", "4x4", "--preset", "perturbed"],
    ["portrait", "--grid", "4x4", "--iterates", "10", "--burn-in", "10"],
    ["transform", "--matrix", "2,0;0,1"],
    ["transform"],
    ["validate-map"],
    ["symmetry", "--sym", "R", "--target", "inverse", "--map", "x + 0.1*sin(2*pi*y) ; y"],
    ["rotset", "--format", "ppm"],
    ["rotset", "--threads", "0"],
    ["nonsense"],
    ["periodic", "-p", "1", "--w", "a,b"],
])
def test_configuration_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_numeric_failure_exit_3(monkeypatch, capsys):
    import torusrot.cli as cli
    from torusrot.engine import OrbitError

    def boom(cfg):
        raise OrbitError(7, (float("inf"), 0.0))

    monkeypatch.setitem(cli.COMMANDS, "rotset", boom)
    code, _, err = run(capsys, "rotset", "--grid", "2x2", "--n", "3")
    assert code == 3 and "numerical failure" in err


def test_outputs_identical_across_threads(tmp_path):
    outs = []
    for t in ("1", "4"):
        path = tmp_path / f"r{t}.json"
        assert main(["rotset", "--grid", "64x64", "--n", "200", "--threads", t, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "torusrot", "transform", "--complete", "0,1"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["completion"] == "0,-1;1,0"
