"""Planar geometry helpers shared by the simulator, cache, and factory.

Everything operates on axis-aligned rectangles in the world frame.  Objects
themselves may be yawed; their collision footprint is the axis-aligned
bounding rectangle of the rotated box, which is conservative but keeps all
downstream math (grid rasterisation, overlap tests, placement scoring)
simple and exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# (min_x, min_y, max_x, max_y)
Rect = tuple[float, float, float, float]


@dataclass
class Pose2:
    """Planar pose of a box: bottom-face height ``z``, heading ``yaw`` (rad)."""

    x: float
    y: float
    z: float = 0.0
    yaw: float = 0.0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.yaw)


def wrap_pi(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(angle + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def rotated_half_extents(hx: float, hy: float, yaw: float) -> tuple[float, float]:
    """Half extents of the axis-aligned bound of a yawed ``2hx x 2hy`` box."""
    c = abs(math.cos(yaw))
    s = abs(math.sin(yaw))
    return (hx * c + hy * s, hx * s + hy * c)


def footprint_rect(x: float, y: float, hx: float, hy: float, yaw: float = 0.0) -> Rect:
    ex, ey = rotated_half_extents(hx, hy, yaw)
    return (x - ex, y - ey, x + ex, y + ey)


def rects_overlap(a: Rect, b: Rect, eps: float = 1e-9) -> bool:
    """True when the interiors overlap.  Shared edges do not count."""
    return (
        a[0] < b[2] - eps
        and b[0] < a[2] - eps
        and a[1] < b[3] - eps
        and b[1] < a[3] - eps
    )


def rect_contains_rect(outer: Rect, inner: Rect, eps: float = 1e-9) -> bool:
    return (
        inner[0] >= outer[0] - eps
        and inner[1] >= outer[1] - eps
        and inner[2] <= outer[2] + eps
        and inner[3] <= outer[3] + eps
    )


def rect_contains_point(r: Rect, px: float, py: float, eps: float = 1e-9) -> bool:
    return r[0] - eps <= px <= r[2] + eps and r[1] - eps <= py <= r[3] + eps


def rect_distance(a: Rect, b: Rect) -> float:
    """Euclidean gap between two rectangles; zero when they touch or overlap."""
    dx = max(a[0] - b[2], b[0] - a[2], 0.0)
    dy = max(a[1] - b[3], b[1] - a[3], 0.0)
    return math.hypot(dx, dy)


def point_rect_distance(px: float, py: float, r: Rect) -> float:
    dx = max(r[0] - px, px - r[2], 0.0)
    dy = max(r[1] - py, py - r[3], 0.0)
    return math.hypot(dx, dy)


def rect_center(r: Rect) -> tuple[float, float]:
    return ((r[0] + r[2]) / 2.0, (r[1] + r[3]) / 2.0)


def rect_area(r: Rect) -> float:
    return max(0.0, r[2] - r[0]) * max(0.0, r[3] - r[1])
