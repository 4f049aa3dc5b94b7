"""Soundness checks for an emitted (scene, task) pair.

Four stages, all of which must pass:

a. the scene document loads and the task parses;
b. every init predicate holds and every :require flag is present;
c. the robot spawn is free and every task symbol's object is reachable
   (its root has at least one standing cell connected to the spawn);
d. no two object boxes interpenetrate, except along a parent/ancestor
   containment chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from homegym.tasks import (
    TaskDef,
    TaskParseError,
    UnboundSymbol,
    bind_symbols,
    check_requirements,
    init_results,
    parse_task,
)
from homegym.world.cache import standing_cells
from homegym.world.grid import Grid
from homegym.world.scenedoc import SceneDocError, load_scene
from homegym.world.types import WorldState


@dataclass
class VerifyReport:
    ok: bool
    failures: list[str] = field(default_factory=list)


def _is_ancestor(state: WorldState, anc_id: int, obj_id: int) -> bool:
    o = state.objects[obj_id]
    while o.parent is not None:
        pid = o.parent[0]
        if pid == anc_id:
            return True
        o = state.objects[pid]
    return False


def verify_state(state: WorldState, task: TaskDef) -> VerifyReport:
    failures: list[str] = []
    try:
        binding = bind_symbols(task, state)
    except UnboundSymbol as exc:
        return VerifyReport(False, [f"load: unbound symbol {exc.args[0]!r}"])

    for problem in check_requirements(task, binding, state):
        failures.append(f"require: {problem}")
    for pred, ok in zip(task.init, init_results(state, task, binding)):
        if not ok:
            failures.append(f"init: {pred} unsatisfied")

    grid = Grid.from_state(state)
    spawn_cell = grid.cell_of(state.robot.x, state.robot.y)
    if not grid.is_free(spawn_cell):
        failures.append("reach: robot spawn is blocked")
        reachable: set = set()
    else:
        reachable = grid.reachable_from(spawn_cell)
    for sym in task.symbols():
        root = state.root_ancestor(binding[sym])
        cells = standing_cells(grid, root.footprint())
        if not any(c in reachable for c in cells):
            failures.append(f"reach: {sym} (via {root.name}) has no reachable standing cell")

    for i, a in enumerate(state.objects):
        fa = a.footprint()
        for b in state.objects[i + 1 :]:
            if a.pose.z >= b.top_z - 1e-9 or b.pose.z >= a.top_z - 1e-9:
                continue
            fb = b.footprint()
            if not (
                fa[0] < fb[2] - 1e-9
                and fb[0] < fa[2] - 1e-9
                and fa[1] < fb[3] - 1e-9
                and fb[1] < fa[3] - 1e-9
            ):
                continue
            if _is_ancestor(state, a.id, b.id) or _is_ancestor(state, b.id, a.id):
                continue
            failures.append(f"overlap: {a.name} interpenetrates {b.name}")

    return VerifyReport(not failures, failures)


def verify_scene(scene_text: str, task_text: str) -> VerifyReport:
    try:
        state = load_scene(scene_text)
    except SceneDocError as exc:
        return VerifyReport(False, [f"load: {exc}"])
    try:
        task = parse_task(task_text)
    except TaskParseError as exc:
        return VerifyReport(False, [f"load: {exc}"])
    return verify_state(state, task)
