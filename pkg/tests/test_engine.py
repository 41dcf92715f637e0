import json

import numpy as np
import pytest

from oracles import direct_mz_deviation
from torusrot.core import Disk, MZLift, PlanePoint
from torusrot.engine import (
    GridSpec,
    OrbitError,
    SweepResult,
    deviation,
    disk_samples,
    iterate,
    orbit_diameter_growth,
    phi_n,
    read_sweep_csv,
    sweep,
)
from torusrot.geometry import hausdorff_distance
from torusrot.mapdsl import identity, parse_map, translation
from torusrot.rotation import convergence_profile


@pytest.mark.parametrize("z, expected", [
    ((0.25, 0.0), (0.25, 1.0)),
    ((0.0, 0.25), (1.0, 0.25)),
    ((0.25, 0.25), (0.25, 0.25)),
])
def test_iterate_two_periodic_points(mz, z, expected):
    assert tuple(iterate(mz, z, 2)) == pytest.approx(expected, abs=1e-15)


def test_iterate_zero_steps_and_negative(mz):
    assert iterate(mz, (0.3, 0.4), 0) == PlanePoint(0.3, 0.4)
    with pytest.raises(ValueError):
        iterate(mz, (0.3, 0.4), -1)


def test_iterate_reports_failing_step():
    F = parse_map("x + 1e308*cos(2*pi*y) ; y", validate=False)
    with pytest.raises(OrbitError) as exc:
        iterate(F, (0.0, 0.0), 5)
    assert exc.value.step == 2


def test_phi_n_examples(mz):
    assert tuple(phi_n(mz, (0.25, 0.0), 2)) == pytest.approx((0.0, 0.5), abs=1e-15)
    assert tuple(phi_n(mz, (0.25, 0.25), 2)) == pytest.approx((0.0, 0.0), abs=1e-15)
    T = translation(0.3, 0.7)
    for z, n in [((0.0, 0.0), 1), ((5.5, -2.1), 37)]:
        assert tuple(phi_n(T, z, n)) == pytest.approx((0.3, 0.7), abs=1e-12)
    with pytest.raises(ValueError):
        phi_n(mz, (0, 0), 0)


def test_deviation_examples(mz):
    assert deviation(mz, (0.25, 0.0), (0.0, 0.5), 2) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert deviation(translation(0.3, 0.7), (0.2, 0.9), (0.3, 0.7), 50) == pytest.approx((0, 0), abs=1e-12)
    want = direct_mz_deviation(0.5, 0.5, (0.1, 0.6), (0.0, 0.0), 100)[0]
    assert deviation(mz, (0.1, 0.6), (0.0, 0.0), 100, v=(1.0, 0.0)) == pytest.approx(want, abs=1e-9)
    with pytest.raises(ValueError):
        deviation(mz, (0.1, 0.6), (0.0, 0.0), 10, v=(1.0, 1.0))


def test_deviation_matches_direct_loop():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = rng.uniform(0, 1, 2)
        z = tuple(rng.uniform(-2, 2, 2))
        rho = tuple(rng.uniform(-1, 1, 2))
        n = int(rng.integers(1, 101))
        got = deviation(MZLift(a, b), z, rho, n)
        want = direct_mz_deviation(a, b, z, rho, n)
        assert np.allclose(got, want, rtol=0, atol=1e-9)


def test_cocycle_identity_is_exact(mz):
    rng = np.random.default_rng(8)
    for _ in range(50):
        z = tuple(rng.uniform(0, 1, 2))
        n, m = (int(k) for k in rng.integers(0, 5000, 2))
        assert iterate(mz, z, n + m) == iterate(mz, iterate(mz, z, m), n)


def _equivariance_error(F, starts, n, rng):
    worst = 0.0
    for z in starts:
        w = tuple(int(k) for k in rng.integers(-3, 4, 2))
        shifted = iterate(F, (z[0] + w[0], z[1] + w[1]), n)
        base = iterate(F, z, n)
        worst = max(worst, abs(shifted.x - w[0] - base.x), abs(shifted.y - w[1] - base.y))
    return worst


def test_integer_translation_equivariance(mz):
    # rounding of z + w is amplified along chaotic orbits, so generic
    # starts are checked over short runs and island starts over long ones
    rng = np.random.default_rng(8)
    generic = rng.uniform(0, 1, size=(200, 2))
    assert _equivariance_error(mz, generic, 5, rng) <= 1e-9
    island = (0.25, 0.25) + rng.uniform(-0.01, 0.01, size=(100, 2))
    assert _equivariance_error(mz, island, 2000, rng) <= 1e-9


def test_sweep_identity_and_translation():
    res = sweep(identity(), GridSpec(5, 4), 10)
    assert np.all(res.vx == 0) and np.all(res.vy == 0)
    res = sweep(translation(0.3, 0.7), GridSpec(10, 10), 100)
    assert len(res.vx) == 100
    assert np.allclose(res.vx, 0.3, atol=1e-12) and np.allclose(res.vy, 0.7, atol=1e-12)


def test_sweep_burn_in_window(mz):
    res = sweep(mz, GridSpec(3, 3, (0.5, 0.5)), 30, burn_in=10)
    x0, y0 = res.x0[4], res.y0[4]
    start = iterate(mz, (x0, y0), 10)
    end = iterate(mz, (x0, y0), 30)
    assert res.vx[4] == pytest.approx((end.x - start.x) / 20, abs=1e-13)
    with pytest.raises(ValueError):
        sweep(mz, GridSpec(2, 2), 10, burn_in=10)


def test_sweep_flags_non_finite():
    F = parse_map("x + 1e308*cos(2*pi*y) ; y", validate=False)
    res = sweep(F, GridSpec(2, 2), 3)
    assert not res.finite.all()
    assert res.cloud().shape[1] == 2


def test_sweep_deterministic_across_threads(mz):
    g = GridSpec(70, 70, (0.5, 0.5))
    a = sweep(mz, g, 200, threads=1)
    b = sweep(mz, g, 200, threads=4)
    assert a.to_csv() == b.to_csv()


def test_sweep_trajectory_recording(mz):
    res = sweep(mz, GridSpec(2, 2), 20, record_every=5)
    assert res.trajectory.shape == (4, 4, 2)
    z = iterate(mz, (res.x0[1], res.y0[1]), 10)
    assert tuple(res.trajectory[1, 1]) == pytest.approx(tuple(z), abs=1e-12)


def test_sweep_serialisation_round_trip(mz):
    res = sweep(mz, GridSpec(4, 3, (0.5, 0.5)), 50)
    back = SweepResult.from_json(res.to_json())
    assert np.array_equal(back.vx, res.vx) and back.grid == res.grid
    table = read_sweep_csv(res.to_csv())
    assert np.array_equal(table["vy"], res.vy)
    assert json.loads(res.to_json())["n"] == 50


def test_grid_points_layout():
    g = GridSpec(4, 2, (0.5, 0.5))
    x, y = g.points()
    assert (x[0], y[0]) == (0.125, 0.25)
    assert (x[1], y[1]) == (0.125, 0.75)
    assert GridSpec.parse("40x30") == GridSpec(40, 30)
    with pytest.raises(ValueError):
        GridSpec(0, 3)


def test_disk_samples_inside_and_seeded():
    U = Disk(PlanePoint(0.1, 0.6), 0.03)
    pts = disk_samples(U, 100, seed=4)
    assert pts.shape == (100, 2)
    assert np.all(np.hypot(pts[:, 0] - 0.1, pts[:, 1] - 0.6) <= 0.03)
    assert np.array_equal(pts, disk_samples(U, 100, seed=4))
    assert not np.array_equal(pts, disk_samples(U, 100, seed=5))


def test_diameter_growth_isometries():
    U = Disk(PlanePoint(0.4, 0.4), 0.05)
    for F in (translation(0.3, 0.7), identity()):
        d = orbit_diameter_growth(F, U, [1, 10, 100], samples=32)
        assert np.allclose(d, d[0], atol=1e-12)
        assert 0.05 < d[0] <= 0.1 + 1e-12


def test_diameter_growth_chaotic_positive_slope(mz):
    U = Disk(PlanePoint(0.1, 0.6), 0.02)
    ns = list(range(100, 2001, 100))
    for samples in (64, 256):
        d = orbit_diameter_growth(mz, U, ns, samples=samples)
        slope = np.polyfit(ns, d, 1)[0]
        assert slope > 0


def test_convergence_profile_shrinks(mz):
    U = Disk(PlanePoint(0.1, 0.6), 0.03)
    prof = convergence_profile(mz, U, [100, 400, 1600], samples=64)
    assert prof[-1] < prof[0]
    clouds_far = hausdorff_distance([(0, 0)], [(0.3, 0.4)])
    assert clouds_far == pytest.approx(0.5)
