"""Planar placement: grid x yaw search with soft-constraint scoring.

Candidates are grid-cell centres (aligned with the navigation grid) crossed
with a compass yaw set.  Hard requirements: footprint inside the room, no
overlap with already-placed footprints, robot spawn not covered, and, when
a ``reach_check`` is supplied, at least one standing cell next to the
candidate that the robot can reach.  Soft constraints score each surviving
candidate:

* ``nextto``  - 1 inside the nearness threshold, decaying ``exp(-(d - t))``
  beyond it;
* ``faceto``  - clamped cosine between the candidate's heading and the
  direction to the reference;
* ``alignedwith`` - 1 when the yaw difference (mod pi) is within 15
  degrees, else 0.

The argmax is deterministic: ties resolve by grid row, then column, then
yaw index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from homegym.constants import GRID_RES, NEAR_DIST
from homegym.geometry import Rect, rotated_half_extents, wrap_pi

YAWS_8 = tuple(i * math.pi / 4.0 for i in range(8))
YAWS_CARDINAL = tuple(i * math.pi / 2.0 for i in range(4))

ALIGN_TOLERANCE = math.radians(15.0)


@dataclass(frozen=True)
class SoftConstraint:
    kind: str  # nextto | faceto | alignedwith
    ref_rect: Rect
    ref_yaw: float = 0.0

    @property
    def ref_center(self) -> tuple[float, float]:
        return ((self.ref_rect[0] + self.ref_rect[2]) / 2.0, (self.ref_rect[1] + self.ref_rect[3]) / 2.0)


@dataclass(frozen=True)
class Placement:
    x: float
    y: float
    yaw: float
    score: float


def constraint_score(
    x: float, y: float, yaw: float, half_extents: tuple[float, float], constraints: list[SoftConstraint]
) -> float:
    """Scalar score of one candidate; the reference formula for the solver."""
    ex, ey = rotated_half_extents(half_extents[0], half_extents[1], yaw)
    rect = (x - ex, y - ey, x + ex, y + ey)
    total = 0.0
    for c in constraints:
        if c.kind == "nextto":
            dx = max(rect[0] - c.ref_rect[2], c.ref_rect[0] - rect[2], 0.0)
            dy = max(rect[1] - c.ref_rect[3], c.ref_rect[1] - rect[3], 0.0)
            d = math.hypot(dx, dy)
            total += 1.0 if d <= NEAR_DIST else math.exp(-(d - NEAR_DIST))
        elif c.kind == "faceto":
            rx, ry = c.ref_center
            vx, vy = rx - x, ry - y
            norm = math.hypot(vx, vy)
            if norm < 1e-9:
                total += 1.0
            else:
                total += max(0.0, (math.cos(yaw) * vx + math.sin(yaw) * vy) / norm)
        elif c.kind == "alignedwith":
            m = abs(wrap_pi(yaw - c.ref_yaw))
            m = min(m, math.pi - m)
            total += 1.0 if m <= ALIGN_TOLERANCE + 1e-12 else 0.0
        else:
            raise ValueError(f"unknown soft constraint {c.kind!r}")
    return total


def solve_placement(
    room_rect: Rect,
    half_extents: tuple[float, float],
    obstacles: list[Rect],
    constraints: list[SoftConstraint],
    origin: tuple[float, float],
    yaws: tuple[float, ...] = YAWS_8,
    keep_clear: list[tuple[float, float]] | None = None,
    reach_check: Callable[[float, float, Rect], bool] | None = None,
) -> Placement | None:
    """Best-scoring feasible pose, or None when nothing fits."""
    res = GRID_RES
    col_lo = int(math.ceil((room_rect[0] - origin[0]) / res - 0.5))
    col_hi = int(math.floor((room_rect[2] - origin[0]) / res - 0.5))
    row_lo = int(math.ceil((room_rect[1] - origin[1]) / res - 0.5))
    row_hi = int(math.floor((room_rect[3] - origin[1]) / res - 0.5))
    if col_hi < col_lo or row_hi < row_lo:
        return None
    cxs = origin[0] + (np.arange(col_lo, col_hi + 1) + 0.5) * res
    cys = origin[1] + (np.arange(row_lo, row_hi + 1) + 0.5) * res
    xs = np.broadcast_to(cxs, (len(cys), len(cxs)))
    ys = np.broadcast_to(cys[:, None], (len(cys), len(cxs)))

    ranked: list[tuple[float, int, int, int]] = []
    rects: dict[int, tuple[float, float]] = {}
    for yaw_index, yaw in enumerate(yaws):
        ex, ey = rotated_half_extents(half_extents[0], half_extents[1], yaw)
        rects[yaw_index] = (ex, ey)
        valid = (
            (xs - ex >= room_rect[0] - 1e-9)
            & (xs + ex <= room_rect[2] + 1e-9)
            & (ys - ey >= room_rect[1] - 1e-9)
            & (ys + ey <= room_rect[3] + 1e-9)
        )
        for ob in obstacles:
            valid &= ~(
                (xs - ex < ob[2] - 1e-9)
                & (ob[0] < xs + ex - 1e-9)
                & (ys - ey < ob[3] - 1e-9)
                & (ob[1] < ys + ey - 1e-9)
            )
        for px, py in keep_clear or []:
            valid &= ~(
                (xs - ex <= px) & (px <= xs + ex) & (ys - ey <= py) & (py <= ys + ey)
            )
        if not valid.any():
            continue

        score = np.zeros_like(xs)
        for c in constraints:
            if c.kind == "nextto":
                dx = np.maximum(
                    np.maximum((xs - ex) - c.ref_rect[2], c.ref_rect[0] - (xs + ex)), 0.0
                )
                dy = np.maximum(
                    np.maximum((ys - ey) - c.ref_rect[3], c.ref_rect[1] - (ys + ey)), 0.0
                )
                d = np.hypot(dx, dy)
                score += np.where(d <= NEAR_DIST, 1.0, np.exp(-(d - NEAR_DIST)))
            elif c.kind == "faceto":
                rx, ry = c.ref_center
                vx, vy = rx - xs, ry - ys
                norm = np.hypot(vx, vy)
                cosang = np.where(
                    norm < 1e-9,
                    1.0,
                    (math.cos(yaw) * vx + math.sin(yaw) * vy) / np.maximum(norm, 1e-9),
                )
                score += np.maximum(0.0, cosang)
            elif c.kind == "alignedwith":
                m = abs(wrap_pi(yaw - c.ref_yaw))
                m = min(m, math.pi - m)
                score += 1.0 if m <= ALIGN_TOLERANCE + 1e-12 else 0.0
            else:
                raise ValueError(f"unknown soft constraint {c.kind!r}")

        rr, cc = np.nonzero(valid)
        for r, c_ in zip(rr.tolist(), cc.tolist()):
            ranked.append((-float(score[r, c_]), r, c_, yaw_index))

    ranked.sort()
    for neg_score, r, c_, yaw_index in ranked:
        x = float(cxs[c_])
        y = float(cys[r])
        yaw = yaws[yaw_index]
        ex, ey = rects[yaw_index]
        rect = (x - ex, y - ey, x + ex, y + ey)
        if reach_check is not None and not reach_check(x, y, rect):
            continue
        return Placement(x, y, yaw, -neg_score)
    return None
