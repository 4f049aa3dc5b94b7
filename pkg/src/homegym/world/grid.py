"""Occupancy grid over the scene floor, plus BFS navigation queries.

Cells are ``GRID_RES`` squares; a cell is free when its centre lies inside a
room and outside every floor-standing object's footprint.  Only root objects
(things actually resting on the floor) block cells; children riding on top of
or inside a parent never do.  The robot is a point, so navigation treats a
single free cell as standable.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from homegym.constants import GRID_RES
from homegym.geometry import Rect
from homegym.world.types import WorldState

Cell = tuple[int, int]

# Fixed 4-neighbourhood expansion order; keeps BFS fully deterministic.
_NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


class Grid:
    def __init__(self, origin: tuple[float, float], rows: int, cols: int, free: np.ndarray):
        self.origin = origin
        self.rows = rows
        self.cols = cols
        self.free = free
        self.res = GRID_RES

    @classmethod
    def from_rects(cls, rooms: list, blockers: list[Rect]) -> "Grid":
        min_x = min(r.rect[0] for r in rooms)
        min_y = min(r.rect[1] for r in rooms)
        max_x = max(r.rect[2] for r in rooms)
        max_y = max(r.rect[3] for r in rooms)
        cols = int(round((max_x - min_x) / GRID_RES))
        rows = int(round((max_y - min_y) / GRID_RES))
        cx = min_x + (np.arange(cols) + 0.5) * GRID_RES
        cy = min_y + (np.arange(rows) + 0.5) * GRID_RES
        xs = np.broadcast_to(cx, (rows, cols))
        ys = np.broadcast_to(cy[:, None], (rows, cols))

        in_room = np.zeros((rows, cols), dtype=bool)
        for room in rooms:
            r = room.rect
            in_room |= (xs >= r[0]) & (xs <= r[2]) & (ys >= r[1]) & (ys <= r[3])

        blocked = np.zeros((rows, cols), dtype=bool)
        for fp in blockers:
            blocked |= (xs > fp[0]) & (xs < fp[2]) & (ys > fp[1]) & (ys < fp[3])

        return cls((min_x, min_y), rows, cols, in_room & ~blocked)

    @classmethod
    def from_state(cls, state: WorldState) -> "Grid":
        blockers = [
            o.footprint()
            for o in state.objects
            if o.parent is None and state.robot.holding != o.id
        ]
        return cls.from_rects(state.rooms, blockers)

    def cell_of(self, x: float, y: float) -> Cell:
        col = int((x - self.origin[0]) / GRID_RES)
        row = int((y - self.origin[1]) / GRID_RES)
        return (row, col)

    def center_of(self, cell: Cell) -> tuple[float, float]:
        return (
            self.origin[0] + (cell[1] + 0.5) * GRID_RES,
            self.origin[1] + (cell[0] + 0.5) * GRID_RES,
        )

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and bool(self.free[cell[0], cell[1]])

    def cells_overlapping(self, rect: Rect) -> list[Cell]:
        """Cells whose centre falls strictly inside ``rect``, row-major order."""
        out: list[Cell] = []
        for row in range(self.rows):
            cy = self.origin[1] + (row + 0.5) * GRID_RES
            if not (rect[1] < cy < rect[3]):
                continue
            for col in range(self.cols):
                cx = self.origin[0] + (col + 0.5) * GRID_RES
                if rect[0] < cx < rect[2]:
                    out.append((row, col))
        return out

    def bfs_path(self, start: Cell, goal: Cell) -> list[Cell] | None:
        """Shortest 4-connected path over free cells, or None."""
        if not self.is_free(start) or not self.is_free(goal):
            return None
        if start == goal:
            return [start]
        prev: dict[Cell, Cell] = {start: start}
        frontier = deque([start])
        while frontier:
            cur = frontier.popleft()
            for dr, dc in _NEIGHBOURS:
                nxt = (cur[0] + dr, cur[1] + dc)
                if nxt in prev or not self.is_free(nxt):
                    continue
                prev[nxt] = cur
                if nxt == goal:
                    path = [nxt]
                    while path[-1] != start:
                        path.append(prev[path[-1]])
                    path.reverse()
                    return path
                frontier.append(nxt)
        return None

    def reachable_from(self, start: Cell) -> set[Cell]:
        if not self.is_free(start):
            return set()
        seen = {start}
        frontier = deque([start])
        while frontier:
            cur = frontier.popleft()
            for dr, dc in _NEIGHBOURS:
                nxt = (cur[0] + dr, cur[1] + dc)
                if nxt not in seen and self.is_free(nxt):
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen
