"""Hand-authored base scenes the factory dresses with task objects.

Two floor plans ship with the package: a two-room flat (kitchen + living
room) and a three-room flat (kitchen, living room, bedroom).  Rooms tile a
rectangle and share open edges, so grid navigation crosses between them
without door objects.  Fixtures hug the walls, leaving the room centres and
the shared edges clear.
"""

from __future__ import annotations

import math

from homegym.factory.assets import CATEGORIES
from homegym.geometry import Pose2, Rect
from homegym.world.types import ObjectInstance, Room, RobotState, WorldState


class SceneBuilder:
    def __init__(self, name: str):
        self.name = name
        self.rooms: list[Room] = []
        self.objects: list[ObjectInstance] = []
        self.robot: RobotState | None = None
        self._category_counts: dict[str, int] = {}

    def add_room(self, name: str, rect: Rect, tag: str) -> None:
        self.rooms.append(Room(name, rect, tag))

    def add_fixture(
        self,
        category: str,
        room: str,
        x: float,
        y: float,
        yaw: float = 0.0,
        parent: str | None = None,
        relation: str = "ontop",
    ) -> str:
        spec = CATEGORIES[category]
        count = self._category_counts.get(category, 0)
        self._category_counts[category] = count + 1
        name = f"{category}_{count}"
        z = 0.0
        parent_link = None
        if parent is not None:
            parent_obj = next(o for o in self.objects if o.name == parent)
            z = parent_obj.top_z if relation == "ontop" else parent_obj.pose.z
            parent_link = (parent_obj.id, relation)
        self.objects.append(
            ObjectInstance(
                id=len(self.objects),
                name=name,
                category=category,
                room=room,
                pose=Pose2(x, y, z, yaw),
                half_extents=spec.half_extents,
                flags=spec.flags,
                parent=parent_link,
            )
        )
        return name

    def set_robot(self, x: float, y: float, room: str, yaw: float = 0.0) -> None:
        self.robot = RobotState(x, y, yaw, room)

    def build(self) -> WorldState:
        assert self.robot is not None, "scene needs a robot spawn"
        return WorldState(self.name, self.rooms, self.objects, self.robot)


def _apt_two() -> WorldState:
    b = SceneBuilder("apt_two")
    b.add_room("kitchen", (0.0, 0.0, 4.0, 3.0), "kitchen")
    b.add_room("living", (4.0, 0.0, 8.0, 3.0), "living")

    b.add_fixture("counter", "kitchen", 0.35, 1.5)
    b.add_fixture("stove", "kitchen", 1.5, 2.65)
    b.add_fixture("fridge", "kitchen", 3.6, 2.6)
    b.add_fixture("microwave", "kitchen", 0.35, 0.95, parent="counter_0")
    b.add_fixture("sink", "kitchen", 2.5, 0.3)
    b.add_fixture("cabinet", "kitchen", 1.3, 0.5)

    b.add_fixture("table", "living", 6.0, 1.5)
    b.add_fixture("sofa", "living", 6.0, 2.5)
    b.add_fixture("tv", "living", 6.0, 0.2)
    b.add_fixture("shelf", "living", 7.8, 1.5, yaw=math.pi / 2)
    b.add_fixture("lamp", "living", 7.7, 2.7)

    b.set_robot(2.0, 1.5, "kitchen")
    return b.build()


def _apt_three() -> WorldState:
    b = SceneBuilder("apt_three")
    b.add_room("kitchen", (0.0, 0.0, 4.0, 3.0), "kitchen")
    b.add_room("living", (0.0, 3.0, 8.0, 6.0), "living")
    b.add_room("bedroom", (4.0, 0.0, 8.0, 3.0), "bedroom")

    b.add_fixture("counter", "kitchen", 0.35, 1.5)
    b.add_fixture("stove", "kitchen", 1.5, 0.35)
    b.add_fixture("oven", "kitchen", 2.5, 0.35)
    b.add_fixture("fridge", "kitchen", 3.6, 0.55)
    b.add_fixture("microwave", "kitchen", 0.35, 1.95, parent="counter_0")
    b.add_fixture("trashcan", "kitchen", 3.8, 2.7)

    b.add_fixture("table", "living", 2.0, 4.5)
    b.add_fixture("chair", "living", 2.0, 3.6, yaw=math.pi / 2)
    b.add_fixture("sofa", "living", 5.5, 5.5)
    b.add_fixture("tv", "living", 5.5, 3.2)
    b.add_fixture("shelf", "living", 7.8, 4.5, yaw=math.pi / 2)
    b.add_fixture("lamp", "living", 0.3, 5.7)

    b.add_fixture("bed", "bedroom", 6.8, 1.0)
    b.add_fixture("desk", "bedroom", 5.0, 2.65)
    b.add_fixture("cabinet", "bedroom", 7.7, 2.4)
    b.add_fixture("lamp", "bedroom", 4.3, 0.3)

    b.set_robot(2.0, 2.3, "kitchen")
    return b.build()


_BUILDERS = {
    "apt_two": _apt_two,
    "apt_three": _apt_three,
}


def list_base_scenes() -> list[str]:
    return sorted(_BUILDERS)


def base_scene(name: str) -> WorldState:
    """A fresh copy of a bundled base scene."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown base scene {name!r}; have {list_base_scenes()}") from None
