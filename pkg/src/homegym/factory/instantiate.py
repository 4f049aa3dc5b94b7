"""Dress a base scene with a task's objects.

The layout proposal for a room is a list of attachment decisions (floor,
or on/in some target) built from the task's init predicates plus rules for
unconstrained objects.  Placements are attempted in dependency order; when
one fails, the failure (symbol, attachment, reason) feeds back into the
next proposal, which avoids the failed attachment.  Three proposals are
tried before giving up.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from homegym.constants import NEAR_DIST
from homegym.factory.assets import CATEGORIES, FACE_AFFINITY, NEXTTO_AFFINITY
from homegym.factory.distribute import assign_rooms
from homegym.factory.errors import GenerationFailed
from homegym.factory.planar import (
    SoftConstraint,
    YAWS_8,
    YAWS_CARDINAL,
    solve_placement,
)
from homegym.geometry import Pose2, rect_distance, rects_overlap, footprint_rect
from homegym.tasks import TaskDef, UnboundSymbol, bind_symbols, init_results
from homegym.world.cache import candidate_offsets, standing_cells
from homegym.world.grid import Grid
from homegym.world.types import ObjectInstance, WorldState

RETRY_BUDGET = 3

# Portables larger than this stay on the floor instead of riding a surface.
SURFACE_RIDER_MAX_DIM = 0.4


@dataclass(frozen=True)
class LayoutNode:
    symbol: str
    category: str
    # (target name, relation) or None for a floor placement
    attach: tuple[str, str] | None
    forced: bool


class _PlaceFail(Exception):
    def __init__(self, symbol: str, attach: tuple[str, str] | None, reason: str):
        super().__init__(reason)
        self.symbol = symbol
        self.attach = attach
        self.reason = reason


def _explicit_attachments(task: TaskDef) -> dict[str, tuple[str, str]]:
    manifest = {s for s, _ in task.manifest}
    out: dict[str, tuple[str, str]] = {}
    for pred in task.init:
        if pred.kind not in ("ontop", "inside"):
            continue
        child, target = pred.args
        if child not in manifest:
            continue
        if child in out and out[child] != (target, pred.kind):
            raise GenerationFailed(
                "layout", f"{child} has contradictory init attachments"
            )
        out[child] = (target, pred.kind)
    return out


def propose_layout(
    task: TaskDef,
    room_of: dict[str, str],
    base: WorldState,
    banned: set[tuple[str, tuple[str, str] | None]],
    rng: random.Random,
) -> list[LayoutNode]:
    explicit = _explicit_attachments(task)
    fixtures = {o.name: o for o in base.objects}
    nodes: list[LayoutNode] = []
    for sym, cat in task.manifest:
        spec = CATEGORIES[cat]
        if sym in explicit:
            target, relation = explicit[sym]
            if (sym, (target, relation)) in banned:
                raise GenerationFailed(
                    "layout", f"required attachment {sym} {relation} {target} failed"
                )
            nodes.append(LayoutNode(sym, cat, (target, relation), forced=True))
            continue
        attach: tuple[str, str] | None = None
        if spec.portable and max(spec.half_extents) * 2.0 <= SURFACE_RIDER_MAX_DIM:
            surfaces = [
                o.name
                for o in base.objects
                if o.has("surface")
                and o.room == room_of[sym]
                and (sym, (o.name, "ontop")) not in banned
            ]
            surfaces.sort(
                key=lambda n: -(
                    fixtures[n].half_extents[0] * fixtures[n].half_extents[1]
                )
            )
            if surfaces:
                attach = (surfaces[rng.randrange(len(surfaces))], "ontop")
        if attach is None and (sym, None) in banned:
            raise GenerationFailed("layout", f"no remaining placement options for {sym}")
        nodes.append(LayoutNode(sym, cat, attach, forced=False))

    # Dependency order: attachment targets that are manifest symbols first.
    by_symbol = {n.symbol: n for n in nodes}
    ordered: list[LayoutNode] = []
    visiting: set[str] = set()

    def visit(node: LayoutNode) -> None:
        if node.symbol in (n.symbol for n in ordered):
            return
        if node.symbol in visiting:
            raise GenerationFailed("layout", f"attachment cycle at {node.symbol}")
        visiting.add(node.symbol)
        if node.attach is not None and node.attach[0] in by_symbol:
            visit(by_symbol[node.attach[0]])
        visiting.discard(node.symbol)
        ordered.append(node)

    for node in nodes:
        visit(node)
    return ordered


def _nextto_partners(task: TaskDef, sym: str) -> list[str]:
    out = []
    for pred in task.init:
        if pred.kind != "nextto":
            continue
        if pred.args[0] == sym:
            out.append(pred.args[1])
        elif pred.args[1] == sym:
            out.append(pred.args[0])
    return out


def _place_on_target(
    state: WorldState,
    node: LayoutNode,
    target: ObjectInstance,
    task: TaskDef,
    rng: random.Random,
) -> ObjectInstance:
    import math

    spec = CATEGORIES[node.category]
    relation = node.attach[1]
    if relation == "ontop" and not target.has("surface"):
        raise _PlaceFail(node.symbol, node.attach, f"{target.name} is not a surface")
    if relation == "inside" and not target.has("container"):
        raise _PlaceFail(node.symbol, node.attach, f"{target.name} is not a container")
    probe = ObjectInstance(
        id=-1, name=node.symbol, category=node.category, room=target.room,
        pose=Pose2(0, 0), half_extents=spec.half_extents, flags=spec.flags,
    )
    offsets = candidate_offsets(probe, target, relation, limit=None)
    if not offsets:
        raise _PlaceFail(node.symbol, node.attach, f"{node.category} does not fit {relation} {target.name}")
    z = target.top_z if relation == "ontop" else target.pose.z
    shx, shy, shz = spec.half_extents
    cos_t, sin_t = math.cos(target.pose.yaw), math.sin(target.pose.yaw)
    placed_names = {o.name for o in state.objects}
    free: list[tuple[float, float]] = []
    preferred: list[tuple[float, float]] = []
    partners = [p for p in _nextto_partners(task, node.symbol) if p in placed_names]
    partner_rects = [
        next(o for o in state.objects if o.name == p).footprint() for p in partners
    ]
    for dx, dy in offsets:
        px = target.pose.x + dx * cos_t - dy * sin_t
        py = target.pose.y + dx * sin_t + dy * cos_t
        fp = footprint_rect(px, py, shx, shy, target.pose.yaw)
        blocked = False
        for other in state.objects:
            if other.id == target.id:
                continue
            if other.pose.z >= z + 2.0 * shz - 1e-9 or other.top_z <= z + 1e-9:
                continue
            if rects_overlap(fp, other.footprint()):
                blocked = True
                break
        if blocked:
            continue
        free.append((px, py))
        if partner_rects and all(
            rect_distance(fp, pr) <= NEAR_DIST + 1e-9 for pr in partner_rects
        ):
            preferred.append((px, py))
    if partner_rects and not preferred:
        raise _PlaceFail(
            node.symbol, node.attach, f"no spot {relation} {target.name} beside partners"
        )
    pool = preferred or free
    if not pool:
        raise _PlaceFail(node.symbol, node.attach, f"no free spot {relation} {target.name}")
    px, py = pool[rng.randrange(len(pool))]
    return ObjectInstance(
        id=len(state.objects),
        name=node.symbol,
        category=node.category,
        room=target.room,
        pose=Pose2(px, py, z, target.pose.yaw),
        half_extents=spec.half_extents,
        flags=spec.flags,
        parent=(target.id, relation),
    )


def _place_on_floor(
    state: WorldState,
    node: LayoutNode,
    room_name: str,
    task: TaskDef,
) -> ObjectInstance:
    spec = CATEGORIES[node.category]
    room = state.room_named(room_name)
    floor_rects = [
        o.footprint() for o in state.objects if o.parent is None and o.room == room_name
    ]
    by_name = {o.name: o for o in state.objects}

    constraints: list[SoftConstraint] = []
    for partner in _nextto_partners(task, node.symbol):
        if partner in by_name:
            constraints.append(SoftConstraint("nextto", by_name[partner].footprint()))
    for ref_cat in FACE_AFFINITY.get(node.category, ()):
        refs = [o for o in state.objects if o.category == ref_cat and o.room == room_name]
        if refs:
            constraints.append(
                SoftConstraint("faceto", refs[0].footprint(), refs[0].pose.yaw)
            )
            break
    for ref_cat in NEXTTO_AFFINITY.get(node.category, ()):
        refs = [o for o in state.objects if o.category == ref_cat and o.room == room_name]
        if refs:
            constraints.append(SoftConstraint("nextto", refs[0].footprint()))
            break

    all_floor = [o.footprint() for o in state.objects if o.parent is None]
    spawn = (state.robot.x, state.robot.y)

    def reach_check(x: float, y: float, rect) -> bool:
        grid = Grid.from_rects(state.rooms, all_floor + [rect])
        spawn_cell = grid.cell_of(*spawn)
        if not grid.is_free(spawn_cell):
            return False
        reachable = grid.reachable_from(spawn_cell)
        return any(c in reachable for c in standing_cells(grid, rect))

    yaws = YAWS_CARDINAL if (spec.flags & {"surface", "container"}) else YAWS_8
    origin = (
        min(r.rect[0] for r in state.rooms),
        min(r.rect[1] for r in state.rooms),
    )
    placement = solve_placement(
        room.rect,
        (spec.half_extents[0], spec.half_extents[1]),
        floor_rects,
        constraints,
        origin,
        yaws=yaws,
        keep_clear=[spawn],
        reach_check=reach_check,
    )
    if placement is None:
        raise _PlaceFail(node.symbol, None, f"no feasible floor pose in {room_name}")
    return ObjectInstance(
        id=len(state.objects),
        name=node.symbol,
        category=node.category,
        room=room_name,
        pose=Pose2(placement.x, placement.y, 0.0, placement.yaw),
        half_extents=spec.half_extents,
        flags=spec.flags,
        parent=None,
    )


def instantiate_scene(
    task: TaskDef, base: WorldState, seed: int = 0
) -> tuple[WorldState, dict[str, int]]:
    """Returns the dressed scene and the symbol binding.

    Raises GenerationFailed when the task cannot be realised on this base.
    """
    fixture_names = {o.name for o in base.objects}
    manifest_syms = {s for s, _ in task.manifest}
    for sym in task.symbols():
        if sym not in manifest_syms and sym not in fixture_names:
            raise GenerationFailed("binding", f"fixture {sym!r} not present in base scene")
    for sym, cat in task.manifest:
        if cat not in CATEGORIES:
            raise GenerationFailed("binding", f"unknown category {cat!r}")
    for sym, flag in task.requirements:
        if sym in manifest_syms:
            cat = dict(task.manifest)[sym]
            if flag not in CATEGORIES[cat].flags:
                raise GenerationFailed("binding", f"{sym} ({cat}) lacks required flag {flag}")
        else:
            fixture = next(o for o in base.objects if o.name == sym)
            if not fixture.has(flag):
                raise GenerationFailed("binding", f"{sym} lacks required flag {flag}")

    assignment = assign_rooms(task, base)
    rng = random.Random(seed)
    banned: set[tuple[str, tuple[str, str] | None]] = set()
    history: list[str] = []

    for _attempt in range(RETRY_BUDGET):
        nodes = propose_layout(task, assignment.rooms, base, banned, rng)
        state = base.clone()
        state.name = f"{base.name}.{task.name}.s{seed}"
        try:
            for node in nodes:
                if node.attach is not None:
                    target = next(
                        (o for o in state.objects if o.name == node.attach[0]), None
                    )
                    if target is None:
                        raise _PlaceFail(
                            node.symbol, node.attach, f"target {node.attach[0]} missing"
                        )
                    obj = _place_on_target(state, node, target, task, rng)
                else:
                    obj = _place_on_floor(state, node, assignment.rooms[node.symbol], task)
                state.objects.append(obj)
        except _PlaceFail as fail:
            history.append(f"{fail.symbol}@{fail.attach}: {fail.reason}")
            failed_node = next(n for n in nodes if n.symbol == fail.symbol)
            if failed_node.forced or fail.attach is None:
                # No alternative honours the init predicates / floor rule.
                raise GenerationFailed("placement", "; ".join(history))
            banned.add((fail.symbol, fail.attach))
            continue

        for pred in task.init:
            if pred.kind in ("open", "toggled_on", "heated", "cooked", "frozen"):
                target = next(o for o in state.objects if o.name == pred.args[0])
                setattr(target, pred.kind, True)

        try:
            binding = bind_symbols(task, state)
        except UnboundSymbol as exc:
            raise GenerationFailed("binding", f"unbound symbol {exc.args[0]!r}")
        unmet = [
            str(task.init[i])
            for i, ok in enumerate(init_results(state, task, binding))
            if not ok
        ]
        if unmet:
            raise GenerationFailed(
                "verify", "init predicates unsatisfied after layout: " + ", ".join(unmet)
            )
        return state, binding

    raise GenerationFailed("layout", "retry budget exhausted: " + "; ".join(history))
