"""Connected target sets on the torus and the extended-set membership test.

A target is stored as its bounding center (a torus point) plus primitive
geometry in plane coordinates relative to that center.  Membership of the
extended set (all points within sensing radius 1 of the target) is decided by
translating the query point's minimal image next to the center and measuring
in the plane.  That decision is exact whenever ``side > 2*(bounding_radius+1)``,
which every constructor enforces with a margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    TorusPoint,
    min_image,
    min_image_array,
    segment_distance_batch,
    wrap,
)

__all__ = [
    "Target",
    "disc_target",
    "segment_target",
    "segment_from_endpoints",
    "square_perimeter_target",
    "lshape_target",
    "polyline_target",
    "make_ensemble",
    "ENSEMBLE_SHAPES",
    "TIE_PRECEDENCE",
]

# ensemble construction order; worst-case ties resolve toward segments
ENSEMBLE_SHAPES = ("disc", "segment_h", "segment_rand", "square", "lshape")
TIE_PRECEDENCE = ("segment_h", "segment_rand", "lshape", "square", "disc")

_GUARD_MARGIN = 2.0


@dataclass(frozen=True, eq=False)
class Target:
    """A connected target set of known diameter on a torus."""

    kind: str
    center: TorusPoint
    diameter: float
    bounding_radius: float
    disc_radius: float = 0.0
    segments: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        side = self.center.side
        # the minimal-image test is exact for a disc at any radius (the
        # nearest center image is the globally nearest); other shapes need
        # room so no second image can come within sensing range
        if self.kind != "disc" and \
                2.0 * (self.bounding_radius + 1.0) + _GUARD_MARGIN > side:
            raise ValueError(
                "minimal-image constraint violated: need "
                f"2*(bounding_radius+1)+{_GUARD_MARGIN} <= side, got radius "
                f"{self.bounding_radius} on side {side}"
            )
        if self.segments is not None:
            self.segments.setflags(write=False)

    # -- exact distances ---------------------------------------------------

    def _relative(self, p: TorusPoint) -> tuple[float, float]:
        side = self.center.side
        if p.side != side:
            raise ValueError(f"point on side {p.side}, target on side {side}")
        return (min_image(p.x - self.center.x, side),
                min_image(p.y - self.center.y, side))

    def distance_to(self, p: TorusPoint) -> float:
        """Distance from ``p`` to the target's point set."""
        rx, ry = self._relative(p)
        if self.kind == "disc":
            return max(0.0, math.hypot(rx, ry) - self.disc_radius)
        best = math.inf
        for ax, ay, bx, by in self.segments:
            d = float(segment_distance_batch(np.float64(rx), np.float64(ry),
                                             ax, ay, bx, by))
            if d < best:
                best = d
        return best

    def detects(self, p: TorusPoint) -> bool:
        """True iff ``p`` lies in the extended set (distance <= 1)."""
        rx, ry = self._relative(p)
        if rx * rx + ry * ry > (self.bounding_radius + 1.0) ** 2:
            return False
        return self.distance_to(p) <= 1.0

    # -- vectorized membership for the walk engine -------------------------

    def detect_batch(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Extended-set membership for raw plane coordinates of any magnitude.

        Applies the minimal-image wrap internally; cheap bounding-circle
        rejection first, exact per-primitive distances only near the target.
        """
        side = self.center.side
        rx = min_image_array(x - self.center.x, side)
        ry = min_image_array(y - self.center.y, side)
        r2 = rx * rx + ry * ry
        limit = self.bounding_radius + 1.0
        if self.kind == "disc":
            return r2 <= (self.disc_radius + 1.0) ** 2
        near = r2 <= limit * limit
        out = np.zeros(near.shape, dtype=bool)
        idx = np.flatnonzero(near)
        if idx.size:
            px = rx.reshape(-1)[idx]
            py = ry.reshape(-1)[idx]
            best = np.full(idx.shape, np.inf)
            for ax, ay, bx, by in self.segments:
                np.minimum(best, segment_distance_batch(px, py, ax, ay, bx, by),
                           out=best)
            out.reshape(-1)[idx] = best <= 1.0
        return out


def _rot(x: float, y: float, angle: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return (c * x - s * y, s * x + c * y)


def disc_target(center: TorusPoint, radius: float) -> Target:
    if radius <= 0.0:
        raise ValueError(f"disc radius must be positive, got {radius}")
    return Target(kind="disc", center=center, diameter=2.0 * radius,
                  bounding_radius=radius, disc_radius=radius)


def segment_target(center: TorusPoint, length: float, angle: float = 0.0,
                   kind: str = "segment_h") -> Target:
    if length <= 0.0:
        raise ValueError(f"segment length must be positive, got {length}")
    hx, hy = _rot(length / 2.0, 0.0, angle)
    seg = np.array([[-hx, -hy, hx, hy]], dtype=np.float64)
    return Target(kind=kind, center=center, diameter=length,
                  bounding_radius=length / 2.0, segments=seg)


def segment_from_endpoints(a: TorusPoint, b: TorusPoint) -> Target:
    """Segment given by its endpoints; midpoint taken along the short way."""
    side = a.side
    dx = min_image(b.x - a.x, side)
    dy = min_image(b.y - a.y, side)
    center = wrap(a.x + dx / 2.0, a.y + dy / 2.0, side)
    seg = np.array([[-dx / 2.0, -dy / 2.0, dx / 2.0, dy / 2.0]], dtype=np.float64)
    return Target(kind="segment", center=center, diameter=math.hypot(dx, dy),
                  bounding_radius=math.hypot(dx, dy) / 2.0, segments=seg)


def square_perimeter_target(center: TorusPoint, side_len: float,
                            angle: float = 0.0) -> Target:
    if side_len <= 0.0:
        raise ValueError(f"square side must be positive, got {side_len}")
    half_diag = side_len / math.sqrt(2.0)
    corners = [_rot(half_diag, 0.0, angle + k * math.pi / 2.0) for k in range(4)]
    segs = []
    for k in range(4):
        ax, ay = corners[k]
        bx, by = corners[(k + 1) % 4]
        segs.append([ax, ay, bx, by])
    return Target(kind="square", center=center, diameter=2.0 * half_diag,
                  bounding_radius=half_diag, segments=np.array(segs))


def lshape_target(center: TorusPoint, spread: float, angle: float = 0.0) -> Target:
    """Two equal perpendicular arms joined at a corner, end-to-end span ``spread``."""
    if spread <= 0.0:
        raise ValueError(f"lshape spread must be positive, got {spread}")
    arm = spread / math.sqrt(2.0)
    # local frame: corner at origin, arm tips at (arm, 0) and (0, arm);
    # circumcenter of the three vertices is the midpoint of the tips
    cx, cy = arm / 2.0, arm / 2.0
    pts = [(-cx, -cy), (arm - cx, -cy), (-cx, arm - cy)]
    pts = [_rot(px, py, angle) for px, py in pts]
    corner, tip1, tip2 = pts
    segs = np.array([[corner[0], corner[1], tip1[0], tip1[1]],
                     [corner[0], corner[1], tip2[0], tip2[1]]])
    return Target(kind="lshape", center=center, diameter=spread,
                  bounding_radius=spread / 2.0, segments=segs)


def polyline_target(vertices: list[TorusPoint]) -> Target:
    """Connected chain of segments through consecutive vertices."""
    if len(vertices) < 2:
        raise ValueError("polyline needs at least two vertices")
    side = vertices[0].side
    v0 = vertices[0]
    rel = [(0.0, 0.0)]
    for v in vertices[1:]:
        if v.side != side:
            raise ValueError("polyline vertices on mismatched tori")
        rel.append((min_image(v.x - v0.x, side), min_image(v.y - v0.y, side)))
    xs = [p[0] for p in rel]
    ys = [p[1] for p in rel]
    cx = (min(xs) + max(xs)) / 2.0
    cy = (min(ys) + max(ys)) / 2.0
    center = wrap(v0.x + cx, v0.y + cy, side)
    pts = [(px - cx, py - cy) for px, py in rel]
    radius = max(math.hypot(px, py) for px, py in pts)
    diameter = max(math.hypot(p[0] - q[0], p[1] - q[1])
                   for p in pts for q in pts)
    segs = np.array([[pts[i][0], pts[i][1], pts[i + 1][0], pts[i + 1][1]]
                     for i in range(len(pts) - 1)])
    return Target(kind="polyline", center=center, diameter=diameter,
                  bounding_radius=radius, segments=segs)


def _uniform_point(side: float, rng: np.random.Generator) -> TorusPoint:
    return wrap((rng.random() - 0.5) * side, (rng.random() - 0.5) * side, side)


def make_ensemble(D: float, side: float, rng: np.random.Generator) -> list[Target]:
    """The standard five-shape ensemble at diameter ``D``, randomly placed.

    Shapes in order: disc, horizontal segment, random-orientation segment,
    square perimeter (diagonal ``D``), and an L-shaped polyline.  The worst
    case over this ensemble stands in for the supremum over all connected
    sets of diameter ``D``.
    """
    if not 1.0 <= D <= side / 2.0:
        raise ValueError(f"diameter must satisfy 1 <= D <= side/2, got D={D} "
                         f"on side {side}")
    if 2.0 * (D / 2.0 + 1.0) + _GUARD_MARGIN > side:
        raise ValueError(f"minimal-image constraint fails for D={D} on side {side}")
    two_pi = 2.0 * math.pi
    targets = [
        disc_target(_uniform_point(side, rng), D / 2.0),
        segment_target(_uniform_point(side, rng), D, 0.0, kind="segment_h"),
        segment_target(_uniform_point(side, rng), D, rng.random() * two_pi,
                       kind="segment_rand"),
        square_perimeter_target(_uniform_point(side, rng), D / math.sqrt(2.0),
                                rng.random() * two_pi),
        lshape_target(_uniform_point(side, rng), D, rng.random() * two_pi),
    ]
    return targets
