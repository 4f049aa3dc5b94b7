"""Pre-computed action outcomes: placement candidates and standing cells.

Built once per scene load, the cache is what lets the fast execution path
skip geometry search at rollout time.  Entries are pure functions of the
loaded state:

* ``placements[(subject_id, target_id, relation)]`` holds up to
  ``K_CANDIDATES`` candidate offsets ``(dx, dy)`` relative to the target's
  origin, from a deterministic sub-grid over the support face (``ontop``) or
  interior (``inside``), row-major, spaced so candidates never overlap each
  other.  Collision against whatever occupies the face at execution time is
  checked when the placement is applied, not here.
* ``standing[root_id]`` holds free cells within interaction reach of a
  floor-standing object's footprint, row-major.  Navigation resolves a
  target object to its current root ancestor before the lookup, so a mug
  moved from counter to table is reached via the table's cells.
"""

from __future__ import annotations

from dataclasses import dataclass

from homegym.constants import (
    CAND_GAP,
    FACE_MARGIN,
    K_CANDIDATES,
    NEAR_DIST,
    REACH_DIST,
)
from homegym.geometry import point_rect_distance
from homegym.world.grid import Cell, Grid
from homegym.world.types import ObjectInstance, WorldState


@dataclass
class OutcomeCache:
    placements: dict[tuple[int, int, str], list[tuple[float, float]]]
    standing: dict[int, list[Cell]]


def candidate_offsets(
    subject: ObjectInstance,
    target: ObjectInstance,
    relation: str,
    limit: int | None = K_CANDIDATES,
) -> list[tuple[float, float]]:
    """Deterministic placement sub-grid; offsets are relative to the target.

    ``limit=None`` returns the whole grid (scene dressing wants every slot;
    the runtime cache keeps only the first ``K_CANDIDATES``).
    """
    if limit is None:
        limit = 1 << 30
    shx, shy, shz = subject.half_extents
    thx, thy, thz = target.half_extents
    if relation == "inside" and 2.0 * shz > 2.0 * thz + 1e-9:
        return []
    # Usable face, in target-local coordinates (target candidates are axis
    # aligned; fixtures are authored at yaw 0).
    lo_x = -thx + FACE_MARGIN + shx
    hi_x = thx - FACE_MARGIN - shx
    lo_y = -thy + FACE_MARGIN + shy
    hi_y = thy - FACE_MARGIN - shy
    if lo_x > hi_x + 1e-9 or lo_y > hi_y + 1e-9:
        return []
    step_x = 2.0 * shx + CAND_GAP
    step_y = 2.0 * shy + CAND_GAP
    out: list[tuple[float, float]] = []
    y = lo_y
    while y <= hi_y + 1e-9 and len(out) < limit:
        x = lo_x
        while x <= hi_x + 1e-9 and len(out) < limit:
            out.append((x, y))
            x += step_x
        y += step_y
    return out


def standing_cells(grid: Grid, footprint, limit: int | None = None) -> list[Cell]:
    """Free cells within ``REACH_DIST`` of a footprint, row-major order."""
    out: list[Cell] = []
    for row in range(grid.rows):
        for col in range(grid.cols):
            if not grid.free[row, col]:
                continue
            cx, cy = grid.center_of((row, col))
            if point_rect_distance(cx, cy, footprint) <= REACH_DIST:
                out.append((row, col))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def build_cache(state: WorldState, grid: Grid) -> OutcomeCache:
    placements: dict[tuple[int, int, str], list[tuple[float, float]]] = {}
    for subject in state.objects:
        if not subject.has("grippable"):
            continue
        for target in state.objects:
            if target.id == subject.id:
                continue
            if target.has("surface"):
                offs = candidate_offsets(subject, target, "ontop")
                if offs:
                    placements[(subject.id, target.id, "ontop")] = offs
            if target.has("container"):
                offs = candidate_offsets(subject, target, "inside")
                if offs:
                    placements[(subject.id, target.id, "inside")] = offs

    standing: dict[int, list[Cell]] = {}
    for obj in state.objects:
        if obj.parent is None and state.robot.holding != obj.id:
            standing[obj.id] = standing_cells(grid, obj.footprint())
    return OutcomeCache(placements=placements, standing=standing)


__all__ = [
    "OutcomeCache",
    "build_cache",
    "candidate_offsets",
    "standing_cells",
    "K_CANDIDATES",
    "NEAR_DIST",
    "REACH_DIST",
]
