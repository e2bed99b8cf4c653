"""Torus and plane geometry: points, minimal-image displacements, distances.

The torus of area ``n`` has side ``sqrt(n)`` and is identified with the
square ``[-side/2, side/2)^2``; coordinates are kept in that canonical
half-open window.  All functions here are pure and operate on immutable
values, so they are safe to call from any number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatchError, InvalidCoordinateError

__all__ = [
    "TorusPoint",
    "PlanePoint",
    "Displacement",
    "wrap",
    "wrap_coord",
    "min_image",
    "torus_distance",
    "torus_displacement",
    "point_segment_distance",
    "segment_distance_batch",
    "min_image_array",
]

MIN_SIDE = 2.0  # torus area must exceed 4


def _require_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidCoordinateError(f"non-finite coordinate: {v!r}")


@dataclass(frozen=True, slots=True)
class TorusPoint:
    """A point on the square torus, in canonical coordinates.

    Both coordinates lie in ``[-side/2, side/2)``; construct out-of-window
    raw coordinates via :func:`wrap`.
    """

    x: float
    y: float
    side: float

    def __post_init__(self) -> None:
        _require_finite(self.x, self.y, self.side)
        if self.side <= MIN_SIDE:
            raise InvalidCoordinateError(
                f"torus side must exceed {MIN_SIDE} (area > 4), got {self.side}"
            )
        h = self.side / 2.0
        if not (-h <= self.x < h and -h <= self.y < h):
            raise InvalidCoordinateError(
                f"({self.x}, {self.y}) outside canonical window for side {self.side}"
            )


@dataclass(frozen=True, slots=True)
class PlanePoint:
    """A point on the unbounded plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        _require_finite(self.x, self.y)


@dataclass(frozen=True, slots=True)
class Displacement:
    """A step vector with its cached Euclidean length."""

    dx: float
    dy: float
    length: float = field(init=False)

    def __post_init__(self) -> None:
        _require_finite(self.dx, self.dy)
        object.__setattr__(self, "length", math.hypot(self.dx, self.dy))


def wrap_coord(v: float, side: float) -> float:
    """Shift ``v`` by an integer multiple of ``side`` into ``[-side/2, side/2)``."""
    h = side / 2.0
    w = (v + h) % side - h
    # float rounding in the modulo can land exactly on +side/2
    return -h if w >= h else w


def wrap(x: float, y: float, side: float) -> TorusPoint:
    """Canonicalize raw coordinates onto the torus of the given side."""
    _require_finite(x, y, side)
    if side <= MIN_SIDE:
        raise InvalidCoordinateError(f"torus side must exceed {MIN_SIDE}, got {side}")
    return TorusPoint(wrap_coord(x, side), wrap_coord(y, side), side)


def min_image(d: float, side: float) -> float:
    """Minimal-image representative of a coordinate difference."""
    return wrap_coord(d, side)


def min_image_array(d: np.ndarray, side: float) -> np.ndarray:
    """Vectorized minimal image; lands in ``(-side/2, side/2]``.

    Uses round-to-nearest rather than floor-mod: ~25x faster and the
    boundary convention difference is irrelevant for distances.
    """
    return d - side * np.rint(d * (1.0 / side))


def torus_displacement(p: TorusPoint, q: TorusPoint) -> Displacement:
    """Shortest displacement carrying ``p`` to ``q`` under wraparound."""
    if p.side != q.side:
        raise DomainMismatchError(f"mismatched torus sides: {p.side} vs {q.side}")
    return Displacement(min_image(q.x - p.x, p.side), min_image(q.y - p.y, p.side))


def torus_distance(p: TorusPoint, q: TorusPoint) -> float:
    """Euclidean norm of the minimal-image displacement; at most side/sqrt(2)."""
    return torus_displacement(p, q).length


def point_segment_distance(p: PlanePoint, a: PlanePoint, b: PlanePoint) -> float:
    """Exact distance from ``p`` to the closed segment ``[a, b]`` in the plane.

    A degenerate segment (``a == b``) is treated as a point.
    """
    abx, aby = b.x - a.x, b.y - a.y
    apx, apy = p.x - a.x, p.y - a.y
    denom = abx * abx + aby * aby
    if denom == 0.0:
        return math.hypot(apx, apy)
    t = (apx * abx + apy * aby) / denom
    t = max(0.0, min(1.0, t))
    return math.hypot(apx - t * abx, apy - t * aby)


def segment_distance_batch(
    px: np.ndarray,
    py: np.ndarray,
    ax: float,
    ay: float,
    bx: float,
    by: float,
) -> np.ndarray:
    """Vectorized point-to-segment distance for plane coordinates."""
    abx, aby = bx - ax, by - ay
    apx, apy = px - ax, py - ay
    denom = abx * abx + aby * aby
    if denom == 0.0:
        return np.hypot(apx, apy)
    t = np.clip((apx * abx + apy * aby) / denom, 0.0, 1.0)
    return np.hypot(apx - t * abx, apy - t * aby)
