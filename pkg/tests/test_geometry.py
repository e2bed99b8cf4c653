import math

import numpy as np
import pytest

from levysearch.errors import DomainMismatchError, InvalidCoordinateError
from levysearch.geometry import (
    Displacement,
    PlanePoint,
    TorusPoint,
    min_image,
    min_image_array,
    point_segment_distance,
    torus_distance,
    wrap,
)


def brute_torus_distance(p: TorusPoint, q: TorusPoint) -> float:
    """Oracle: minimum plane distance over the 9 integer translates of q."""
    best = math.inf
    for ix in (-1, 0, 1):
        for iy in (-1, 0, 1):
            d = math.hypot(p.x - (q.x + ix * p.side), p.y - (q.y + iy * p.side))
            best = min(best, d)
    return best


class TestWrap:
    def test_identity(self):
        p = wrap(0.0, 0.0, 100.0)
        assert (p.x, p.y) == (0.0, 0.0)

    def test_one_period_shift(self):
        p = wrap(51.0, 0.0, 100.0)
        assert (p.x, p.y) == (-49.0, 0.0)

    def test_multi_period(self):
        # oracle: wrapped coordinate is congruent mod side and in-window
        p = wrap(-150.5, 250.0, 100.0)
        assert (p.x, p.y) == (49.5, -50.0)
        for raw, got in ((-150.5, p.x), (250.0, p.y)):
            assert (got - raw) % 100.0 == pytest.approx(0.0, abs=1e-9)
            assert -50.0 <= got < 50.0

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            x, y = (rng.random(2) - 0.5) * 1e4
            side = 2.0 + rng.random() * 200.0
            p = wrap(x, y, side)
            p2 = wrap(p.x, p.y, side)
            assert (p2.x, p2.y) == (p.x, p.y)

    def test_boundary_is_half_open(self):
        p = wrap(50.0, -50.0, 100.0)
        assert (p.x, p.y) == (-50.0, -50.0)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidCoordinateError):
            wrap(math.nan, 0.0, 100.0)
        with pytest.raises(InvalidCoordinateError):
            wrap(0.0, math.inf, 100.0)

    def test_small_side_rejected(self):
        with pytest.raises(InvalidCoordinateError):
            wrap(0.0, 0.0, 2.0)
        with pytest.raises(InvalidCoordinateError):
            TorusPoint(0.0, 0.0, 1.5)


class TestTorusDistance:
    def test_wraparound_shortcut(self):
        p = wrap(49.9, 0.0, 100.0)
        q = wrap(-49.9, 0.0, 100.0)
        assert torus_distance(p, q) == pytest.approx(0.2, abs=1e-12)

    def test_345_triangle(self):
        assert torus_distance(wrap(0, 0, 100.0), wrap(3, 4, 100.0)) == 5.0

    def test_corner(self):
        p = wrap(-49, -49, 100.0)
        q = wrap(49, 49, 100.0)
        expected = brute_torus_distance(p, q)
        assert expected == pytest.approx(math.sqrt(8.0), abs=1e-12)
        assert torus_distance(p, q) == pytest.approx(expected, abs=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        side = 37.0
        for _ in range(10_000):
            a, b, c, d = (rng.random(4) - 0.5) * side
            p, q = wrap(a, b, side), wrap(c, d, side)
            assert torus_distance(p, q) == pytest.approx(
                brute_torus_distance(p, q), abs=1e-9)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(13)
        side = 12.0
        for _ in range(2000):
            a, b, c, d = (rng.random(4) - 0.5) * side
            p, q = wrap(a, b, side), wrap(c, d, side)
            assert torus_distance(p, q) == pytest.approx(
                torus_distance(q, p), abs=1e-12)
            assert torus_distance(p, q) <= side / math.sqrt(2.0) + 1e-12

    def test_triangle_inequality(self):
        rng = np.random.default_rng(17)
        side = 25.0
        for _ in range(3000):
            pts = [wrap(*((rng.random(2) - 0.5) * side), side) for _ in range(3)]
            a, b, c = pts
            assert torus_distance(a, c) <= (
                torus_distance(a, b) + torus_distance(b, c) + 1e-9)

    def test_mismatched_sides(self):
        with pytest.raises(DomainMismatchError):
            torus_distance(wrap(0, 0, 10.0), wrap(0, 0, 20.0))


class TestPointSegment:
    def test_perpendicular_foot(self):
        d = point_segment_distance(PlanePoint(0, 2), PlanePoint(-1, 0),
                                   PlanePoint(1, 0))
        assert d == 2.0

    def test_nearest_endpoint(self):
        d = point_segment_distance(PlanePoint(3, 0), PlanePoint(-1, 0),
                                   PlanePoint(1, 0))
        assert d == 2.0

    def test_point_on_segment(self):
        d = point_segment_distance(PlanePoint(1, 1), PlanePoint(0, 0),
                                   PlanePoint(2, 2))
        assert d == pytest.approx(0.0, abs=1e-15)

    def test_degenerate_segment(self):
        d = point_segment_distance(PlanePoint(3, 4), PlanePoint(0, 0),
                                   PlanePoint(0, 0))
        assert d == 5.0

    def test_against_dense_sampling(self):
        rng = np.random.default_rng(19)
        for _ in range(50):
            ax, ay, bx, by, px, py = (rng.random(6) - 0.5) * 20.0
            t = np.linspace(0.0, 1.0, 4001)
            sx, sy = ax + t * (bx - ax), ay + t * (by - ay)
            oracle = float(np.hypot(px - sx, py - sy).min())
            d = point_segment_distance(PlanePoint(px, py), PlanePoint(ax, ay),
                                       PlanePoint(bx, by))
            assert d == pytest.approx(oracle, abs=1e-2)
            assert d <= oracle + 1e-12


class TestDisplacement:
    def test_length_consistency(self):
        d = Displacement(3.0, -4.0)
        assert d.length == 5.0

    def test_min_image_array_matches_scalar(self):
        rng = np.random.default_rng(23)
        side = 50.0
        vals = (rng.random(5000) - 0.5) * 1e4
        fast = min_image_array(vals, side)
        assert np.all(np.abs(fast) <= side / 2 + 1e-9)
        slow = np.array([min_image(v, side) for v in vals])
        # conventions differ only at the +-side/2 boundary; distances agree
        assert np.allclose(np.abs(fast), np.abs(slow), atol=1e-9)
