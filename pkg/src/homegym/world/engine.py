"""Skill execution over a loaded scene.

Two execution paths produce identical terminal states and outcome records:

* ``fast`` applies pre-cached outcomes directly (no path integration, no
  per-step cost), which is what training uses.
* ``micro`` walks navigation at ``STEP_DELTA`` increments along the BFS
  path, charges ``SETTLE_STEPS`` for placements, and burns the deterministic
  per-step busy-work, which is what the latency bench uses.

Failures come in two stages.  Precondition failures (``hand_full``,
``not_adjacent``, ``container_closed``, ...) are detected before any state
change; execution failures (``navigation_failed``, ``no_free_placement``)
surface while applying an action.  Either kind halts the rollout.

Check order within a skill is fixed: hand state, then capability, then
adjacency, then state redundancy (``already_*``).  Heating, cooking and
freezing are effect-conditional: the action succeeds whenever the source is
legal and reachable, but the subject's state only changes if the source is
toggled on and the subject is coupled to it (resting on or inside it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from homegym.actionlang import Action
from homegym.busywork import spin_ms
from homegym.constants import (
    GRID_RES,
    REACH_DIST,
    SETTLE_STEPS,
    STEP_COST_MS,
    STEP_DELTA,
)
from homegym.geometry import footprint_rect, point_rect_distance, rects_overlap, wrap_pi
from homegym.world.cache import OutcomeCache, build_cache
from homegym.world.grid import Cell, Grid
from homegym.world.types import WorldState

# Height at which a held object rides along with the robot.
CARRY_Z = 0.5

PRECONDITION = "precondition"
EXECUTION = "execution"

# Steps per grid cell traversed (GRID_RES / STEP_DELTA).
_STEPS_PER_CELL = int(round(GRID_RES / STEP_DELTA))


@dataclass(frozen=True)
class SkillOutcome:
    index: int
    skill: str
    args: tuple[tuple[str, object], ...]
    ok: bool
    stage: str | None = None
    reason: str | None = None


@dataclass
class ExecResult:
    outcomes: list[SkillOutcome] = field(default_factory=list)
    objects_touched: set[int] = field(default_factory=set)
    sim_steps: int = 0

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    @property
    def executed(self) -> int:
        return len(self.outcomes)


class Engine:
    def __init__(self, state: WorldState, charge_work: bool = True):
        self.state = state
        self.grid = Grid.from_state(state)
        self.cache: OutcomeCache = build_cache(state, self.grid)
        self.charge_work = charge_work
        self._nav_key: object = None
        self._nav_grid: Grid = self.grid
        self._nav_labels: np.ndarray | None = None

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> WorldState:
        return self.state.clone()

    def restore(self, snap: WorldState) -> None:
        self.state = snap.clone()

    # -- navigation helpers ------------------------------------------------

    def _occupancy_key(self) -> object:
        st = self.state
        return (
            st.robot.holding,
            tuple(
                (o.id, o.pose.x, o.pose.y, o.pose.yaw)
                for o in st.objects
                if o.parent is None and st.robot.holding != o.id
            ),
        )

    def _nav_state(self) -> tuple[Grid, np.ndarray]:
        key = self._occupancy_key()
        if key != self._nav_key or self._nav_labels is None:
            grid = Grid.from_state(self.state)
            labels = np.full((grid.rows, grid.cols), -1, dtype=np.int32)
            next_label = 0
            for row in range(grid.rows):
                for col in range(grid.cols):
                    if not grid.free[row, col] or labels[row, col] >= 0:
                        continue
                    for cell in grid.reachable_from((row, col)):
                        labels[cell[0], cell[1]] = next_label
                    next_label += 1
            self._nav_key = key
            self._nav_grid = grid
            self._nav_labels = labels
        return self._nav_grid, self._nav_labels

    def _reachable_standing_cell(self, cells: list[Cell]) -> tuple[Cell | None, Grid]:
        grid, labels = self._nav_state()
        robot_cell = grid.cell_of(self.state.robot.x, self.state.robot.y)
        if not grid.in_bounds(robot_cell) or labels[robot_cell[0], robot_cell[1]] < 0:
            return None, grid
        home = labels[robot_cell[0], robot_cell[1]]
        for cell in cells:
            if grid.in_bounds(cell) and labels[cell[0], cell[1]] == home:
                return cell, grid
        return None, grid

    def _navigate_to_cell(self, cell: Cell, grid: Grid, exec_path: str) -> int:
        """Move the robot to a cell's centre; returns micro steps charged."""
        robot = self.state.robot
        steps = 0
        if exec_path == "micro":
            start = grid.cell_of(robot.x, robot.y)
            path = grid.bfs_path(start, cell)
            if path is not None:
                steps = (len(path) - 1) * _STEPS_PER_CELL
                if self.charge_work:
                    spin_ms(steps * STEP_COST_MS)
        robot.x, robot.y = grid.center_of(cell)
        room = self.state.room_of_point(robot.x, robot.y)
        if room is not None:
            robot.room = room.name
        self._sync_held()
        return steps

    def _sync_held(self) -> None:
        held = self.state.robot.holding
        if held is not None:
            o = self.state.objects[held]
            o.pose.x = self.state.robot.x
            o.pose.y = self.state.robot.y
            o.pose.z = CARRY_Z

    # -- predicates shared by skills ---------------------------------------

    def _adjacent_to_root(self, obj_id: int) -> bool:
        root = self.state.root_ancestor(obj_id)
        dist = point_rect_distance(self.state.robot.x, self.state.robot.y, root.footprint())
        return dist <= REACH_DIST + 1e-9

    def _enclosing_closed(self, obj_id: int, include_self: bool = False) -> bool:
        """True when the object sits behind a closed openable container."""
        o = self.state.objects[obj_id]
        if include_self and o.has("container") and o.has("openable") and not o.open:
            return True
        while o.parent is not None:
            pid, rel = o.parent
            parent = self.state.objects[pid]
            if rel == "inside" and parent.has("openable") and not parent.open:
                return True
            o = parent
        return False

    # -- execution ---------------------------------------------------------

    def execute(self, actions: list[Action], exec_path: str = "fast") -> ExecResult:
        if exec_path not in ("fast", "micro"):
            raise ValueError(f"unknown exec path {exec_path!r}")
        result = ExecResult()
        for index, action in enumerate(actions):
            ok, stage, reason, touched, steps = self._apply(action, exec_path)
            result.outcomes.append(
                SkillOutcome(index, action.skill, action.args, ok, stage, reason)
            )
            result.sim_steps += steps
            if not ok:
                break
            result.objects_touched |= touched
        return result

    def _apply(self, action: Action, exec_path: str):
        handler = getattr(self, "_skill_" + action.skill)
        return handler(action.kwargs, exec_path)

    def _fail(self, stage: str, reason: str):
        return False, stage, reason, set(), 0

    @staticmethod
    def _ok(touched: set[int], steps: int = 0):
        return True, None, None, touched, steps

    def _check_index(self, value: object) -> int:
        obj_id = int(value)  # grammar guarantees int
        if not (0 <= obj_id < len(self.state.objects)):
            raise IndexError(f"object index {obj_id} out of range")
        return obj_id

    # -- skills ------------------------------------------------------------

    def _skill_move(self, kwargs: dict, exec_path: str):
        obj_id = self._check_index(kwargs["object_index"])
        root = self.state.root_ancestor(obj_id)
        cells = self.cache.standing.get(root.id)
        if not cells:
            return self._fail(EXECUTION, "navigation_failed")
        cell, grid = self._reachable_standing_cell(cells)
        if cell is None:
            return self._fail(EXECUTION, "navigation_failed")
        steps = self._navigate_to_cell(cell, grid, exec_path)
        return self._ok({obj_id}, steps)

    def _skill_go_to_room(self, kwargs: dict, exec_path: str):
        name = str(kwargs["room_name"])
        try:
            room = self.state.room_named(name)
        except KeyError:
            return self._fail(PRECONDITION, "unknown_room")
        grid, labels = self._nav_state()
        room_cells = grid.cells_overlapping(room.rect)
        cell, grid = self._reachable_standing_cell(room_cells)
        if cell is None:
            return self._fail(EXECUTION, "navigation_failed")
        steps = self._navigate_to_cell(cell, grid, exec_path)
        return self._ok(set(), steps)

    def _skill_turn(self, kwargs: dict, exec_path: str):
        self.state.robot.yaw = wrap_pi(float(kwargs["yaw"]))
        return self._ok(set())

    def _skill_move_forward(self, kwargs: dict, exec_path: str):
        distance = float(kwargs["distance"])
        requested = max(0, int(round(distance / STEP_DELTA)))
        grid, _ = self._nav_state()
        robot = self.state.robot
        dx = math.cos(robot.yaw) * STEP_DELTA
        dy = math.sin(robot.yaw) * STEP_DELTA
        x, y = robot.x, robot.y
        walked = 0
        for _ in range(requested):
            nx, ny = x + dx, y + dy
            if not grid.is_free(grid.cell_of(nx, ny)):
                break
            x, y = nx, ny
            walked += 1
        if exec_path == "micro" and self.charge_work:
            spin_ms(walked * STEP_COST_MS)
        robot.x, robot.y = x, y
        room = self.state.room_of_point(x, y)
        if room is not None:
            robot.room = room.name
        self._sync_held()
        return self._ok(set(), walked if exec_path == "micro" else 0)

    def _skill_pick_up(self, kwargs: dict, exec_path: str):
        obj_id = self._check_index(kwargs["object_index"])
        robot = self.state.robot
        if robot.holding is not None:
            return self._fail(PRECONDITION, "hand_full")
        obj = self.state.objects[obj_id]
        if not obj.has("grippable"):
            return self._fail(PRECONDITION, "not_grippable")
        if not self._adjacent_to_root(obj_id):
            return self._fail(PRECONDITION, "not_adjacent")
        if self._enclosing_closed(obj_id):
            return self._fail(PRECONDITION, "container_closed")
        obj.parent = None
        robot.holding = obj_id
        self._sync_held()
        return self._ok({obj_id})

    def _skill_place(self, kwargs: dict, exec_path: str):
        target_id = self._check_index(kwargs["object_index"])
        relation = str(kwargs["relation"])
        robot = self.state.robot
        held = robot.holding
        if held is None:
            return self._fail(PRECONDITION, "hand_empty")
        if not self._adjacent_to_root(target_id):
            return self._fail(PRECONDITION, "not_adjacent")
        if relation == "inside" and self._enclosing_closed(target_id, include_self=True):
            return self._fail(PRECONDITION, "container_closed")
        if relation == "ontop" and self._enclosing_closed(target_id):
            return self._fail(PRECONDITION, "container_closed")
        target = self.state.objects[target_id]
        subject = self.state.objects[held]
        candidates = self.cache.placements.get((held, target_id, relation), [])
        if not candidates:
            return self._fail(EXECUTION, "no_free_placement")
        z = target.top_z if relation == "ontop" else target.pose.z
        shx, shy, shz = subject.half_extents
        cos_t = math.cos(target.pose.yaw)
        sin_t = math.sin(target.pose.yaw)
        for dx, dy in candidates:
            px = target.pose.x + dx * cos_t - dy * sin_t
            py = target.pose.y + dx * sin_t + dy * cos_t
            fp = footprint_rect(px, py, shx, shy, target.pose.yaw)
            blocked = False
            for other in self.state.objects:
                if other.id in (held, target_id):
                    continue
                if other.pose.z >= z + 2.0 * shz - 1e-9 or other.top_z <= z + 1e-9:
                    continue
                if rects_overlap(fp, other.footprint()):
                    blocked = True
                    break
            if blocked:
                continue
            subject.parent = (target_id, relation)
            subject.pose.x = px
            subject.pose.y = py
            subject.pose.z = z
            subject.pose.yaw = target.pose.yaw
            subject.room = target.room
            robot.holding = None
            steps = 0
            if exec_path == "micro":
                steps = SETTLE_STEPS
                if self.charge_work:
                    spin_ms(steps * STEP_COST_MS)
            return self._ok({held, target_id}, steps)
        return self._fail(EXECUTION, "no_free_placement")

    def _flag_flip(self, obj_id: int, flag: str, attr: str, value: bool, redundant: str):
        obj = self.state.objects[obj_id]
        if not obj.has(flag):
            return self._fail(PRECONDITION, "not_" + flag)
        if not self._adjacent_to_root(obj_id):
            return self._fail(PRECONDITION, "not_adjacent")
        if getattr(obj, attr) == value:
            return self._fail(PRECONDITION, redundant)
        setattr(obj, attr, value)
        return self._ok({obj_id})

    def _skill_open(self, kwargs: dict, exec_path: str):
        obj_id = self._check_index(kwargs["object_index"])
        return self._flag_flip(obj_id, "openable", "open", True, "already_open")

    def _skill_close(self, kwargs: dict, exec_path: str):
        obj_id = self._check_index(kwargs["object_index"])
        return self._flag_flip(obj_id, "openable", "open", False, "already_closed")

    def _skill_toggle_on(self, kwargs: dict, exec_path: str):
        obj_id = self._check_index(kwargs["object_index"])
        return self._flag_flip(obj_id, "toggleable", "toggled_on", True, "already_on")

    def _skill_toggle_off(self, kwargs: dict, exec_path: str):
        obj_id = self._check_index(kwargs["object_index"])
        return self._flag_flip(obj_id, "toggleable", "toggled_on", False, "already_off")

    def _conditioned(self, kwargs: dict, flag: str, attr: str):
        obj_id = self._check_index(kwargs["object_index"])
        source_id = self._check_index(kwargs["source_index"])
        source = self.state.objects[source_id]
        if not source.has(flag):
            return self._fail(PRECONDITION, "not_" + flag)
        if not self._adjacent_to_root(source_id):
            return self._fail(PRECONDITION, "not_adjacent")
        subject = self.state.objects[obj_id]
        coupled = subject.parent is not None and subject.parent[0] == source_id
        if source.toggled_on and coupled:
            setattr(subject, attr, True)
        return self._ok({obj_id, source_id})

    def _skill_heat_object_with_source(self, kwargs: dict, exec_path: str):
        return self._conditioned(kwargs, "heat_source", "heated")

    def _skill_cook_object_with_tool(self, kwargs: dict, exec_path: str):
        return self._conditioned(kwargs, "cook_tool", "cooked")

    def _skill_froze_object_with_source(self, kwargs: dict, exec_path: str):
        return self._conditioned(kwargs, "cold_source", "frozen")
