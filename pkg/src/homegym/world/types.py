"""World-state dataclasses for the symbolic household simulator.

Conventions:

* ``pose.z`` is the height of an object's *bottom* face.  Floor-standing
  objects have ``z == 0``; a child resting on top of ``p`` has
  ``z == p.z + 2 * p.half_extents[2]``; a child inside ``p`` shares ``p.z``.
* Collision footprints are axis-aligned bounds of the yawed box
  (see :mod:`homegym.geometry`).
* The robot is a point with a heading; reach and nearness thresholds live in
  :mod:`homegym.constants`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from homegym.geometry import Pose2, Rect, footprint_rect

# Capability flags an object may carry.
VALID_FLAGS = frozenset(
    {
        "grippable",
        "surface",
        "container",
        "openable",
        "toggleable",
        "heat_source",
        "cold_source",
        "cook_tool",
    }
)

# Unary state names, in canonical order for serialisation.
UNARY_STATES = ("open", "toggled_on", "heated", "cooked", "frozen")

# Relations a parent link may carry.
PARENT_RELATIONS = ("ontop", "inside")


@dataclass
class Room:
    name: str
    rect: Rect
    tag: str = "generic"

    @property
    def area(self) -> float:
        return (self.rect[2] - self.rect[0]) * (self.rect[3] - self.rect[1])


@dataclass
class ObjectInstance:
    id: int
    name: str
    category: str
    room: str
    pose: Pose2
    half_extents: tuple[float, float, float]
    flags: frozenset[str] = field(default_factory=frozenset)
    open: bool = False
    toggled_on: bool = False
    heated: bool = False
    cooked: bool = False
    frozen: bool = False
    # (parent_id, "ontop" | "inside") or None when standing on the floor /
    # held by the robot.
    parent: tuple[int, str] | None = None

    def footprint(self) -> Rect:
        hx, hy, _ = self.half_extents
        return footprint_rect(self.pose.x, self.pose.y, hx, hy, self.pose.yaw)

    @property
    def top_z(self) -> float:
        return self.pose.z + 2.0 * self.half_extents[2]

    def has(self, flag: str) -> bool:
        return flag in self.flags

    def clone(self) -> "ObjectInstance":
        return replace(self, pose=replace(self.pose))


@dataclass
class RobotState:
    x: float
    y: float
    yaw: float = 0.0
    room: str = ""
    holding: int | None = None

    def clone(self) -> "RobotState":
        return replace(self)


@dataclass
class WorldState:
    name: str
    rooms: list[Room]
    objects: list[ObjectInstance]
    robot: RobotState

    def obj(self, obj_id: int) -> ObjectInstance:
        return self.objects[obj_id]

    def room_named(self, name: str) -> Room:
        for r in self.rooms:
            if r.name == name:
                return r
        raise KeyError(name)

    def room_of_point(self, x: float, y: float) -> Room | None:
        for r in self.rooms:
            if r.rect[0] <= x <= r.rect[2] and r.rect[1] <= y <= r.rect[3]:
                return r
        return None

    def children_of(self, obj_id: int) -> list[ObjectInstance]:
        return [o for o in self.objects if o.parent is not None and o.parent[0] == obj_id]

    def root_ancestor(self, obj_id: int) -> ObjectInstance:
        """Topmost ancestor through parent links (the floor-standing one)."""
        o = self.objects[obj_id]
        seen = {obj_id}
        while o.parent is not None:
            pid = o.parent[0]
            if pid in seen:
                raise ValueError(f"parent cycle at object {pid}")
            seen.add(pid)
            o = self.objects[pid]
        return o

    def clone(self) -> "WorldState":
        return WorldState(
            name=self.name,
            rooms=[replace(r) for r in self.rooms],
            objects=[o.clone() for o in self.objects],
            robot=self.robot.clone(),
        )
