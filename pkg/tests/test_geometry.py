import math

import numpy as np
import pytest

from oracles import brute_diameter, brute_hausdorff, brute_hull_vertices
from torusrot.core import DirectionalFrame
from torusrot.geometry import (
    ConvexPolygon,
    cone_membership,
    contains,
    convex_hull,
    diamond,
    hausdorff_distance,
    hull_area,
    hull_diameter,
    point_in_polygon,
    polygon_hausdorff,
    strip_membership,
)

SQUARE = [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_hull_examples():
    sq = convex_hull(SQUARE + [(0.5, 0.5)])
    assert len(sq) == 4 and hull_area(sq) == 1.0
    seg = convex_hull([(0, 0), (1, 1), (2, 2)])
    assert seg.kind == "segment" and hull_area(seg) == 0.0
    assert {tuple(v) for v in seg.vertices} == {(0.0, 0.0), (2.0, 2.0)}
    assert convex_hull([(3, 4)]).kind == "point"
    assert convex_hull([]).kind == "empty"
    assert hull_area(convex_hull([(0, 0), (1, 0), (0, 1)])) == 0.5


def test_hull_is_counter_clockwise(rng):
    v = convex_hull(rng.normal(size=(50, 2))).vertices
    w = np.roll(v, -1, axis=0)
    u = np.roll(v, -2, axis=0)
    cross = (w[:, 0] - v[:, 0]) * (u[:, 1] - v[:, 1]) - (w[:, 1] - v[:, 1]) * (u[:, 0] - v[:, 0])
    assert np.all(cross > 0)


def test_hull_matches_brute_force(rng):
    for _ in range(100):
        pts = rng.uniform(-1, 1, size=(int(rng.integers(3, 60)), 2))
        got = {tuple(v) for v in convex_hull(pts).vertices}
        assert got == brute_hull_vertices(pts)


def test_hull_idempotent_and_monotone(rng):
    pts = rng.normal(size=(80, 2))
    h = convex_hull(pts)
    assert np.array_equal(convex_hull(h.vertices).vertices, h.vertices)
    more = convex_hull(np.vstack([pts, rng.normal(size=(10, 2)) * 3]))
    assert hull_area(more) >= hull_area(h)


def test_diameter_examples(rng):
    assert hull_diameter(convex_hull(SQUARE)) == pytest.approx(math.sqrt(2))
    assert hull_diameter(convex_hull([(1, 1)])) == 0.0
    for _ in range(50):
        pts = rng.uniform(-1, 1, size=(30, 2))
        assert hull_diameter(convex_hull(pts)) == pytest.approx(brute_diameter(pts), abs=1e-12)


def test_contains_examples():
    sq = convex_hull([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    assert contains(sq, diamond(1.0), 0.0)
    assert contains(sq, sq, 0.0)
    assert contains(diamond(0.5), diamond(0.5))
    assert not contains(diamond(0.4), diamond(0.5), 0.1 * 0.5)
    assert not contains(diamond(0.5), sq)
    assert contains(diamond(0.5), diamond(0.52), margin=0.02)


def test_point_in_polygon():
    sq = convex_hull(SQUARE)
    assert point_in_polygon(sq, (0.5, 0.5))
    assert point_in_polygon(sq, (1.0, 0.3))
    assert not point_in_polygon(sq, (1.1, 0.3))


@pytest.mark.parametrize("v, a, b, z, expected", [
    ((1, 0), -1, 1, (1, 0.5), True),
    ((1, 0), -1, 1, (1, 2), False),
    ((0, 1), 0, 0, (0, 3), True),
])
def test_cone_examples(v, a, b, z, expected):
    assert cone_membership(DirectionalFrame(v, 0.0, a, b), z) is expected


def test_cone_scale_invariance(rng):
    for _ in range(200):
        ang = rng.uniform(0, 2 * math.pi)
        a, b = sorted(rng.uniform(-2, 2, 2))
        f = DirectionalFrame((math.cos(ang), math.sin(ang)), 0.0, a, b)
        z = rng.normal(size=2)
        if cone_membership(f, z):
            assert cone_membership(f, 3.7 * z)


def test_strip_membership():
    assert strip_membership((0, 1), -0.5, 0.5, (10.0, 0.2))
    assert not strip_membership((0, 1), -0.5, 0.5, (10.0, 0.7))


def test_hausdorff_examples_and_oracle(rng):
    A = rng.normal(size=(10, 2))
    assert hausdorff_distance(A, A) == 0.0
    assert hausdorff_distance([(0, 0)], [(3, 4)]) == 5.0
    with pytest.raises(ValueError):
        hausdorff_distance([], [(0, 0)])
    for _ in range(50):
        A = rng.normal(size=(int(rng.integers(1, 40)), 2))
        B = rng.normal(size=(int(rng.integers(1, 40)), 2))
        assert abs(hausdorff_distance(A, B) - brute_hausdorff(A, B)) <= 1e-12


def test_polygon_hausdorff():
    assert polygon_hausdorff(diamond(0.5), diamond(0.5)) == pytest.approx(0.0, abs=1e-12)
    assert polygon_hausdorff(diamond(0.5), diamond(0.6)) == pytest.approx(0.1, abs=1e-3)


def test_polygon_json_round_trip():
    p = convex_hull(SQUARE)
    assert np.array_equal(ConvexPolygon.from_json(p.to_json()).vertices, p.vertices)
