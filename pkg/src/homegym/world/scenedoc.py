"""Versioned text serialisation for scenes.

A scene document is canonical JSON (sorted keys, two-space indent, trailing
newline).  Documents produced by :func:`save_scene` round-trip through
:func:`load_scene` byte-identically, which is what lets workers verify cached
scenes by string comparison alone.
"""

from __future__ import annotations

import json
from typing import Any

from homegym.geometry import Pose2
from homegym.world.types import (
    PARENT_RELATIONS,
    UNARY_STATES,
    VALID_FLAGS,
    ObjectInstance,
    Room,
    RobotState,
    WorldState,
)

SCHEMA_VERSION = 1


class SceneDocError(ValueError):
    """Raised when a scene document cannot be parsed or validated.

    ``reason`` is a stable machine-readable code: ``malformed``,
    ``unsupported_version``, ``bad_reference``, ``bad_value``.
    """

    def __init__(self, reason: str, message: str):
        super().__init__(f"{reason}: {message}")
        self.reason = reason


def _require(doc: dict, key: str, kind: type) -> Any:
    if key not in doc:
        raise SceneDocError("malformed", f"missing key {key!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SceneDocError("malformed", f"key {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise SceneDocError("malformed", f"key {key!r} must be {kind.__name__}")
    return value


def load_scene(text: str) -> WorldState:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneDocError("malformed", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneDocError("malformed", "top level must be an object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise SceneDocError("unsupported_version", f"got {version!r}")

    name = _require(doc, "name", str)

    rooms: list[Room] = []
    seen_rooms: set[str] = set()
    for rd in _require(doc, "rooms", list):
        if not isinstance(rd, dict):
            raise SceneDocError("malformed", "room entries must be objects")
        rname = _require(rd, "name", str)
        rect = _require(rd, "rect", list)
        if len(rect) != 4 or not all(isinstance(v, (int, float)) for v in rect):
            raise SceneDocError("bad_value", f"room {rname!r} rect must be 4 numbers")
        if rect[2] <= rect[0] or rect[3] <= rect[1]:
            raise SceneDocError("bad_value", f"room {rname!r} rect is degenerate")
        if rname in seen_rooms:
            raise SceneDocError("bad_value", f"duplicate room name {rname!r}")
        seen_rooms.add(rname)
        rooms.append(Room(name=rname, rect=tuple(float(v) for v in rect), tag=_require(rd, "tag", str)))
    if not rooms:
        raise SceneDocError("bad_value", "scene has no rooms")

    objects: list[ObjectInstance] = []
    seen_names: set[str] = set()
    raw_objects = _require(doc, "objects", list)
    for index, od in enumerate(raw_objects):
        if not isinstance(od, dict):
            raise SceneDocError("malformed", "object entries must be objects")
        oid = _require(od, "id", int)
        if oid != index:
            raise SceneDocError("bad_value", f"object ids must be 0..n-1 in order, got {oid} at {index}")
        oname = _require(od, "name", str)
        if oname in seen_names:
            raise SceneDocError("bad_value", f"duplicate object name {oname!r}")
        seen_names.add(oname)
        oroom = _require(od, "room", str)
        if oroom not in seen_rooms:
            raise SceneDocError("bad_reference", f"object {oname!r} references unknown room {oroom!r}")
        pose = _require(od, "pose", list)
        if len(pose) != 4 or not all(isinstance(v, (int, float)) for v in pose):
            raise SceneDocError("bad_value", f"object {oname!r} pose must be 4 numbers")
        he = _require(od, "half_extents", list)
        if len(he) != 3 or not all(isinstance(v, (int, float)) and v > 0 for v in he):
            raise SceneDocError("bad_value", f"object {oname!r} half_extents must be 3 positive numbers")
        flags = _require(od, "flags", list)
        bad = [f for f in flags if f not in VALID_FLAGS]
        if bad:
            raise SceneDocError("bad_value", f"object {oname!r} has unknown flags {bad}")
        states = _require(od, "states", list)
        bad = [s for s in states if s not in UNARY_STATES]
        if bad:
            raise SceneDocError("bad_value", f"object {oname!r} has unknown states {bad}")
        parent = od.get("parent")
        if parent is not None:
            if (
                not isinstance(parent, list)
                or len(parent) != 2
                or not isinstance(parent[0], int)
                or parent[1] not in PARENT_RELATIONS
            ):
                raise SceneDocError("bad_value", f"object {oname!r} parent must be [id, relation]")
            parent = (parent[0], parent[1])
        objects.append(
            ObjectInstance(
                id=oid,
                name=oname,
                category=_require(od, "category", str),
                room=oroom,
                pose=Pose2(*(float(v) for v in pose)),
                half_extents=tuple(float(v) for v in he),
                flags=frozenset(flags),
                open="open" in states,
                toggled_on="toggled_on" in states,
                heated="heated" in states,
                cooked="cooked" in states,
                frozen="frozen" in states,
                parent=parent,
            )
        )

    for o in objects:
        if o.parent is not None and not (0 <= o.parent[0] < len(objects)):
            raise SceneDocError("bad_reference", f"object {o.name!r} parent id {o.parent[0]} out of range")

    rd = _require(doc, "robot", dict)
    robot = RobotState(
        x=_require(rd, "x", float),
        y=_require(rd, "y", float),
        yaw=_require(rd, "yaw", float),
        room=_require(rd, "room", str),
        holding=rd.get("holding"),
    )
    if robot.room not in seen_rooms:
        raise SceneDocError("bad_reference", f"robot room {robot.room!r} unknown")
    if robot.holding is not None and not (
        isinstance(robot.holding, int) and 0 <= robot.holding < len(objects)
    ):
        raise SceneDocError("bad_reference", f"robot holding {robot.holding!r} out of range")

    state = WorldState(name=name, rooms=rooms, objects=objects, robot=robot)
    for o in objects:
        state.root_ancestor(o.id)  # rejects parent cycles
    return state


def save_scene(state: WorldState) -> str:
    doc = {
        "version": SCHEMA_VERSION,
        "name": state.name,
        "rooms": [
            {"name": r.name, "rect": list(r.rect), "tag": r.tag} for r in state.rooms
        ],
        "robot": {
            "x": state.robot.x,
            "y": state.robot.y,
            "yaw": state.robot.yaw,
            "room": state.robot.room,
            "holding": state.robot.holding,
        },
        "objects": [
            {
                "id": o.id,
                "name": o.name,
                "category": o.category,
                "room": o.room,
                "pose": list(o.pose.as_tuple()),
                "half_extents": list(o.half_extents),
                "flags": sorted(o.flags),
                "states": [s for s in UNARY_STATES if getattr(o, s)],
                "parent": list(o.parent) if o.parent is not None else None,
            }
            for o in state.objects
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
