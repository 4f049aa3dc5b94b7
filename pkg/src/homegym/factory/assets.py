"""Category registry: sizes, capability flags, and room affinities.

Half extents are metres.  Room affinity weights feed the scene-level
distribution score; 1.0 means "obviously belongs here", 0 means "never
stored here".  Categories carrying ``surface`` or ``container`` keep
cardinal yaws only so their support faces stay axis-exact under rotation.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CategorySpec:
    name: str
    half_extents: tuple[float, float, float]
    flags: frozenset[str]
    affinity: dict[str, float] = field(default_factory=dict)

    @property
    def portable(self) -> bool:
        return "grippable" in self.flags

    def affinity_for(self, room_tag: str) -> float:
        return self.affinity.get(room_tag, self.affinity.get("generic", 0.1))


def _cat(name, he, flags, **affinity):
    return CategorySpec(name, he, frozenset(flags), affinity)


_FIXTURES = [
    _cat("counter", (0.30, 0.90, 0.45), {"surface"}, kitchen=1.0, generic=0.0),
    _cat("table", (0.60, 0.40, 0.38), {"surface"}, living=0.9, kitchen=0.5, bedroom=0.2),
    _cat("desk", (0.55, 0.30, 0.37), {"surface"}, bedroom=0.9, living=0.4),
    _cat("shelf", (0.40, 0.15, 0.60), {"surface"}, living=0.8, bedroom=0.6),
    _cat("stove", (0.30, 0.30, 0.45), {"surface", "heat_source", "cook_tool", "toggleable"},
         kitchen=1.0, generic=0.0),
    _cat("oven", (0.30, 0.30, 0.40), {"container", "openable", "cook_tool", "toggleable"},
         kitchen=1.0, generic=0.0),
    _cat("microwave", (0.25, 0.20, 0.18), {"container", "openable", "heat_source", "toggleable"},
         kitchen=1.0, generic=0.0),
    _cat("fridge", (0.35, 0.35, 0.90), {"container", "openable", "cold_source", "toggleable"},
         kitchen=1.0, generic=0.0),
    _cat("cabinet", (0.25, 0.45, 0.50), {"container", "openable"}, kitchen=0.8, bedroom=0.5,
         living=0.4),
    _cat("sink", (0.30, 0.25, 0.25), {"container"}, kitchen=0.9, bathroom=1.0),
    _cat("sofa", (0.90, 0.45, 0.40), {"surface"}, living=1.0, generic=0.0),
    _cat("bed", (1.00, 0.80, 0.30), {"surface"}, bedroom=1.0, generic=0.0),
    _cat("chair", (0.22, 0.22, 0.45), set(), living=0.6, kitchen=0.5, bedroom=0.5),
    _cat("lamp", (0.12, 0.12, 0.70), {"toggleable"}, living=0.7, bedroom=0.8),
    _cat("tv", (0.50, 0.12, 0.35), {"toggleable"}, living=1.0, generic=0.0),
    _cat("trashcan", (0.15, 0.15, 0.30), {"container"}, kitchen=0.7, generic=0.3),
]

_PORTABLES = [
    _cat("apple", (0.04, 0.04, 0.04), {"grippable"}, kitchen=0.9, living=0.3),
    _cat("bread", (0.08, 0.05, 0.04), {"grippable"}, kitchen=0.9),
    _cat("chicken", (0.08, 0.08, 0.05), {"grippable"}, kitchen=1.0, generic=0.0),
    _cat("fish", (0.10, 0.04, 0.03), {"grippable"}, kitchen=1.0, generic=0.0),
    _cat("plate", (0.11, 0.11, 0.015), {"grippable", "surface"}, kitchen=0.9, living=0.3),
    _cat("bowl", (0.08, 0.08, 0.05), {"grippable", "container"}, kitchen=0.9, living=0.3),
    _cat("cup", (0.04, 0.04, 0.06), {"grippable"}, kitchen=0.8, living=0.5),
    _cat("pan", (0.12, 0.12, 0.04), {"grippable"}, kitchen=1.0, generic=0.0),
    _cat("book", (0.10, 0.07, 0.02), {"grippable"}, living=0.7, bedroom=0.8),
    _cat("towel", (0.10, 0.08, 0.03), {"grippable"}, bathroom=0.9, bedroom=0.5, kitchen=0.4),
    _cat("toy", (0.06, 0.06, 0.06), {"grippable"}, living=0.6, bedroom=0.7),
    _cat("remote", (0.07, 0.03, 0.015), {"grippable"}, living=0.9),
]

CATEGORIES: dict[str, CategorySpec] = {c.name: c for c in _FIXTURES + _PORTABLES}

PORTABLE_CATEGORIES = tuple(c.name for c in _PORTABLES)
FIXTURE_CATEGORIES = tuple(c.name for c in _FIXTURES)

# Soft-constraint affinities used by the placement solver when laying out
# floor-standing fixtures: which reference category a fixture likes to face
# or flank.
FACE_AFFINITY: dict[str, tuple[str, ...]] = {
    "chair": ("desk", "table"),
    "sofa": ("tv",),
}
NEXTTO_AFFINITY: dict[str, tuple[str, ...]] = {
    "chair": ("table", "desk"),
}

# Heatable / cookable / freezable foods, used by task templates.
FOOD_CATEGORIES = ("apple", "bread", "chicken", "fish")
