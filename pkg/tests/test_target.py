import math

import numpy as np
import pytest

from levysearch.geometry import TorusPoint, wrap
from levysearch.target import (
    ENSEMBLE_SHAPES,
    disc_target,
    lshape_target,
    make_ensemble,
    polyline_target,
    segment_from_endpoints,
    segment_target,
    square_perimeter_target,
)
from levysearch.walk import trial_stream

SIDE = 100.0


def sample_target_points(target, spacing: float) -> np.ndarray:
    """Oracle point cloud: dense sampling of the target's point set.

    Points are in plane coordinates relative to the bounding center, built
    from the primitive parameters only (not through the distance code).
    """
    if target.kind == "disc":
        r = target.disc_radius
        # boundary circle plus the center handles inside/outside queries
        n = max(8, int(2.0 * math.pi * r / spacing))
        ang = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        pts = [np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1),
               np.zeros((1, 2))]
        return np.concatenate(pts)
    pts = []
    for ax, ay, bx, by in target.segments:
        length = math.hypot(bx - ax, by - ay)
        n = max(2, int(length / spacing) + 1)
        t = np.linspace(0.0, 1.0, n)
        pts.append(np.stack([ax + t * (bx - ax), ay + t * (by - ay)], axis=1))
    return np.concatenate(pts)


def oracle_distance(target, p: TorusPoint, cloud: np.ndarray) -> float:
    """Brute-force distance via the 9 periodic images of the query point."""
    best = math.inf
    side = p.side
    cx, cy = target.center.x, target.center.y
    for ix in (-1, 0, 1):
        for iy in (-1, 0, 1):
            qx = p.x + ix * side - cx
            qy = p.y + iy * side - cy
            if target.kind == "disc":
                d = max(0.0, math.hypot(qx, qy) - target.disc_radius)
            else:
                d = float(np.hypot(cloud[:, 0] - qx, cloud[:, 1] - qy).min())
            best = min(best, d)
    return best


class TestDetects:
    def test_disc_radial(self):
        tgt = disc_target(wrap(0, 0, SIDE), 2.0)
        assert tgt.detects(wrap(2.5, 0, SIDE))          # 2.5 - 2 <= 1
        assert tgt.detects(wrap(3.0, 0, SIDE))
        assert not tgt.detects(wrap(3.0001, 0, SIDE))

    def test_segment_perpendicular(self):
        tgt = segment_from_endpoints(wrap(-5, 0, SIDE), wrap(5, 0, SIDE))
        assert not tgt.detects(wrap(0, 1.0001, SIDE))
        assert tgt.detects(wrap(0, 0.999, SIDE))

    def test_square_is_hollow(self):
        center = wrap(0, 0, SIDE)
        tgt = square_perimeter_target(center, 4.0)
        assert tgt.distance_to(center) == pytest.approx(2.0, abs=1e-12)
        assert not tgt.detects(center)
        assert tgt.detects(wrap(2.0, 0, SIDE))

    def test_detection_across_the_seam(self):
        tgt = disc_target(wrap(49.5, 0, SIDE), 1.0)
        assert tgt.detects(wrap(-49.0, 0, SIDE))   # 1.5 away through the seam

    def test_large_square_on_small_torus(self):
        # bounding diameter 50 on side 100 is exactly the fig-2 corner case
        tgt = square_perimeter_target(wrap(0, 0, SIDE), 50.0 / math.sqrt(2.0))
        assert tgt.diameter == pytest.approx(50.0, rel=1e-12)
        assert tgt.detects(wrap(25.0, 0, SIDE))

    def test_guard_rejects_oversized_segments(self):
        with pytest.raises(ValueError):
            segment_target(wrap(0, 0, SIDE), 97.0)

    def test_whole_torus_disc_detects_everything(self):
        tgt = disc_target(wrap(0, 0, SIDE), SIDE)
        rng = np.random.default_rng(1)
        for _ in range(100):
            x, y = (rng.random(2) - 0.5) * SIDE
            assert tgt.detects(wrap(x, y, SIDE))


class TestEnsemble:
    def test_diameters_at_unit_scale(self):
        rng = trial_stream(5, (0,))
        targets = make_ensemble(1.0, 10.0, rng)
        assert [t.kind for t in targets] == list(ENSEMBLE_SHAPES)
        for t in targets:
            assert t.diameter == pytest.approx(1.0, abs=1e-9)

    def test_guard(self):
        rng = trial_stream(5, (0,))
        with pytest.raises(ValueError):
            make_ensemble(51.0, SIDE, rng)      # D > side/2
        with pytest.raises(ValueError):
            make_ensemble(0.5, SIDE, rng)       # D < 1
        # the fig-2 corner case is allowed
        targets = make_ensemble(50.0, SIDE, trial_stream(5, (1,)))
        assert len(targets) == 5

    def test_reproducible_placement(self):
        a = make_ensemble(10.0, SIDE, trial_stream(77, (3,)))
        b = make_ensemble(10.0, SIDE, trial_stream(77, (3,)))
        for ta, tb in zip(a, b):
            assert (ta.center.x, ta.center.y) == (tb.center.x, tb.center.y)
            if ta.segments is not None:
                assert np.array_equal(ta.segments, tb.segments)

    def test_diameter_against_dense_sampling(self):
        rng = trial_stream(21, (0,))
        for target in make_ensemble(10.0, SIDE, rng):
            cloud = sample_target_points(target, 0.01)
            if target.kind == "disc":
                # max pairwise distance on the sampled boundary circle
                diam = 2.0 * target.disc_radius
            else:
                sub = cloud[:: max(1, cloud.shape[0] // 800)]
                dx = sub[:, 0][:, None] - sub[:, 0][None, :]
                dy = sub[:, 1][:, None] - sub[:, 1][None, :]
                diam = float(np.sqrt(dx * dx + dy * dy).max())
            assert abs(diam - target.diameter) < 0.02

    def test_detects_against_brute_force(self):
        rng = trial_stream(22, (0,))
        targets = make_ensemble(4.0, 30.0, rng)
        qrng = np.random.default_rng(6)
        for target in targets:
            cloud = sample_target_points(target, 0.001)
            for _ in range(400):
                x, y = (qrng.random(2) - 0.5) * 30.0
                p = wrap(x, y, 30.0)
                d = oracle_distance(target, p, cloud)
                if abs(d - 1.0) > 0.002:      # outside the decision band
                    assert target.detects(p) == (d < 1.0)

    def test_batch_matches_scalar(self):
        rng = trial_stream(23, (0,))
        targets = make_ensemble(8.0, SIDE, rng)
        qrng = np.random.default_rng(9)
        xs = (qrng.random(10_000) - 0.5) * 300.0     # includes unwrapped coords
        ys = (qrng.random(10_000) - 0.5) * 300.0
        for target in targets:
            mask = target.detect_batch(xs, ys)
            for i in range(0, 10_000, 97):
                p = wrap(xs[i], ys[i], SIDE)
                assert mask[i] == target.detects(p)

    def test_nested_discs(self):
        center = wrap(12, -7, SIDE)
        small = disc_target(center, 2.0)
        big = disc_target(center, 5.0)
        qrng = np.random.default_rng(10)
        for _ in range(10_000):
            x, y = (qrng.random(2) - 0.5) * SIDE
            p = wrap(x, y, SIDE)
            if small.detects(p):
                assert big.detects(p)


class TestConstructors:
    def test_lshape_geometry(self):
        tgt = lshape_target(wrap(0, 0, SIDE), 10.0)
        assert tgt.diameter == pytest.approx(10.0, rel=1e-12)
        assert tgt.bounding_radius == pytest.approx(5.0, rel=1e-12)
        assert tgt.segments.shape == (2, 4)

    def test_polyline(self):
        pts = [wrap(0, 0, SIDE), wrap(3, 0, SIDE), wrap(3, 4, SIDE)]
        tgt = polyline_target(pts)
        assert tgt.diameter == pytest.approx(5.0, rel=1e-12)
        assert tgt.detects(wrap(3.0, 2.0, SIDE))
        assert not tgt.detects(wrap(0.0, 4.9, SIDE))
        with pytest.raises(ValueError):
            polyline_target([wrap(0, 0, SIDE)])

    def test_segment_across_seam(self):
        tgt = segment_from_endpoints(wrap(48, 0, SIDE), wrap(-48, 0, SIDE))
        assert tgt.diameter == pytest.approx(4.0, rel=1e-12)
        assert tgt.detects(wrap(49.5, 0.5, SIDE))
        assert not tgt.detects(wrap(45.0, 0.0, SIDE))

    def test_invalid_sizes(self):
        with pytest.raises(ValueError):
            disc_target(wrap(0, 0, SIDE), 0.0)
        with pytest.raises(ValueError):
            segment_target(wrap(0, 0, SIDE), -1.0)
