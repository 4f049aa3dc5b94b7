"""Scene-level distribution: which room does each task object go to.

Binary init predicates tie symbols into co-location groups (union-find).
A group mentioning a fixture is anchored to that fixture's room; two
anchors in different rooms make the task infeasible on this base.  Free
groups go to the room maximising ``1 * normalized_area +
2 * function_match``, skipping rooms whose remaining free floor cannot fit
the group's footprint with a 3x slack, with deterministic index-order
tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass

from homegym.factory.assets import CATEGORIES
from homegym.factory.errors import GenerationFailed
from homegym.tasks import BINARY_PREDICATES, TaskDef
from homegym.world.types import WorldState

W_AREA = 1.0
W_FUNCTION = 2.0
CAPACITY_SLACK = 3.0


@dataclass
class RoomAssignment:
    rooms: dict[str, str]
    groups: list[list[str]]


class _UnionFind:
    def __init__(self, items: list[str]):
        self.parent = {i: i for i in items}

    def find(self, a: str) -> str:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _footprint_area(category: str) -> float:
    hx, hy, _ = CATEGORIES[category].half_extents
    return (2.0 * hx) * (2.0 * hy)


def assign_rooms(task: TaskDef, base: WorldState) -> RoomAssignment:
    symbols = [s for s, _ in task.manifest]
    categories = dict(task.manifest)
    for sym, cat in task.manifest:
        if cat not in CATEGORIES:
            raise GenerationFailed("distribute", f"unknown category {cat!r} for {sym}")

    fixtures = {o.name: o for o in base.objects}
    uf = _UnionFind(symbols)
    anchors: dict[str, set[str]] = {s: set() for s in symbols}
    for pred in task.init:
        if pred.kind not in BINARY_PREDICATES:
            continue
        a, b = pred.args
        if a in categories and b in categories:
            uf.union(a, b)
        elif a in categories and b in fixtures:
            anchors[a].add(fixtures[b].room)
        elif b in categories and a in fixtures:
            anchors[b].add(fixtures[a].room)

    groups: dict[str, list[str]] = {}
    for sym in symbols:
        groups.setdefault(uf.find(sym), []).append(sym)
    ordered_groups = sorted(groups.values(), key=lambda g: symbols.index(g[0]))

    max_area = max(r.area for r in base.rooms)
    free_floor: dict[str, float] = {}
    for room in base.rooms:
        used = sum(
            _rect_area(o.footprint())
            for o in base.objects
            if o.room == room.name and o.parent is None
        )
        free_floor[room.name] = room.area - used

    assignment: dict[str, str] = {}
    for group in ordered_groups:
        group_anchors = set()
        for sym in group:
            group_anchors |= anchors[sym]
        demand = CAPACITY_SLACK * sum(_footprint_area(categories[s]) for s in group)

        if len(group_anchors) > 1:
            raise GenerationFailed(
                "distribute",
                f"group {group} is anchored to multiple rooms {sorted(group_anchors)}",
            )
        if group_anchors:
            room_name = next(iter(group_anchors))
            if free_floor[room_name] < demand:
                raise GenerationFailed(
                    "distribute", f"room {room_name!r} cannot fit anchored group {group}"
                )
            chosen = room_name
        else:
            scored = []
            for index, room in enumerate(base.rooms):
                match = sum(
                    CATEGORIES[categories[s]].affinity_for(room.tag) for s in group
                ) / len(group)
                score = W_AREA * (room.area / max_area) + W_FUNCTION * match
                scored.append((-score, index, room.name))
            scored.sort()
            chosen = None
            for _, _, room_name in scored:
                if free_floor[room_name] >= demand:
                    chosen = room_name
                    break
            if chosen is None:
                raise GenerationFailed(
                    "distribute", f"no room has capacity for group {group}"
                )
        free_floor[chosen] -= demand
        for sym in group:
            assignment[sym] = chosen

    return RoomAssignment(rooms=assignment, groups=ordered_groups)


def _rect_area(rect) -> float:
    return max(0.0, rect[2] - rect[0]) * max(0.0, rect[3] - rect[1])
