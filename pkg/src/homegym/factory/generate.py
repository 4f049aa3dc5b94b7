"""Template-based task generation over a base scene.

Four families: pick-and-place, appliance usage, kitchen operations
(heat / cook / chill), and compound tasks mixing the other families.
Sampling is seeded and deduplicated on the multiset of goal predicates, so
a batch never contains two tasks with identical goals.  Templates only use
capabilities the base scene actually offers; a family with no eligible
fixtures simply never fires.
"""

from __future__ import annotations

import random

from homegym.factory.assets import CATEGORIES, FOOD_CATEGORIES, PORTABLE_CATEGORIES
from homegym.factory.errors import GeneratorExhausted
from homegym.tasks import Predicate, TaskDef
from homegym.world.types import ObjectInstance, WorldState

FAMILIES = ("pickplace", "appliance", "kitchen", "compound")

_MOVE_VERBS = ("Move", "Take", "Bring", "Carry")


class _SceneIndex:
    def __init__(self, base: WorldState):
        self.surfaces = [o for o in base.objects if o.has("surface")]
        self.containers = [o for o in base.objects if o.has("container")]
        self.openables = [o for o in base.objects if o.has("openable")]
        self.toggleables = [o for o in base.objects if o.has("toggleable")]
        self.heat_sources = [o for o in base.objects if o.has("heat_source")]
        self.cook_tools = [o for o in base.objects if o.has("cook_tool")]
        self.cold_sources = [o for o in base.objects if o.has("cold_source")]
        # Surfaces that already carry a fixture (e.g. the microwave on the
        # counter); starting props there makes sloppy placement collide.
        hosts = {o.parent[0] for o in base.objects if o.parent is not None}
        self.cluttered_ids = {o.id for o in self.surfaces if o.id in hosts}


def _pick(rng: random.Random, items: list) -> ObjectInstance:
    return items[rng.randrange(len(items))]


def _article(noun: str) -> str:
    return "an" if noun[0] in "aeiou" else "a"


class _Draft:
    def __init__(self) -> None:
        self.manifest: list[tuple[str, str]] = []
        self.require: list[tuple[str, str]] = []
        self.init: list[Predicate] = []
        self.goals: list[Predicate] = []
        self.phrases: list[str] = []
        self._counts: dict[str, int] = {}

    def new_symbol(self, category: str) -> str:
        k = self._counts.get(category, 0)
        self._counts[category] = k + 1
        sym = f"{category}_{k}"
        self.manifest.append((sym, category))
        if "grippable" in CATEGORIES[category].flags:
            self.require.append((sym, "grippable"))
        return sym


def _relation_for(fixture: ObjectInstance) -> str:
    return "ontop" if fixture.has("surface") else "inside"


def _add_companion(
    draft: _Draft, rng: random.Random, sym: str, start: ObjectInstance | None
) -> None:
    """A second portable spawned beside ``sym`` (same surface, or floor)."""
    buddy_cat = PORTABLE_CATEGORIES[rng.randrange(len(PORTABLE_CATEGORIES))]
    buddy = draft.new_symbol(buddy_cat)
    if start is not None:
        draft.init.append(Predicate("ontop", (buddy, start.name)))
    draft.init.append(Predicate("nextto", (sym, buddy)))


def _add_pickplace(draft: _Draft, rng: random.Random, index: _SceneIndex) -> bool:
    if not index.surfaces:
        return False
    targets = [
        o for o in index.surfaces + index.containers if o.parent is None or o.has("surface")
    ]
    category = PORTABLE_CATEGORIES[rng.randrange(len(PORTABLE_CATEGORIES))]
    start = None if rng.random() < 0.25 else _pick(rng, index.surfaces)
    candidates = [t for t in targets if start is None or t.id != start.id]
    if not candidates:
        return False
    target = _pick(rng, candidates)
    relation = _relation_for(target)
    sym = draft.new_symbol(category)
    if start is not None:
        draft.init.append(Predicate("ontop", (sym, start.name)))
    if rng.random() < 0.6:
        _add_companion(draft, rng, sym, start)
    draft.goals.append(Predicate(relation, (sym, target.name)))
    verb = _MOVE_VERBS[rng.randrange(len(_MOVE_VERBS))]
    prep = "onto" if relation == "ontop" else "into"
    origin = " from the floor" if start is None else ""
    draft.phrases.append(
        f"{verb.lower()} the {category}{origin} {prep} the {target.category}"
    )
    return True


def _add_appliance(draft: _Draft, rng: random.Random, index: _SceneIndex) -> bool:
    mode_pool = []
    if index.toggleables:
        mode_pool.append("toggle")
    if index.openables:
        mode_pool.append("open")
    if not mode_pool:
        return False
    mode = mode_pool[rng.randrange(len(mode_pool))]
    if mode == "toggle":
        fixture = _pick(rng, index.toggleables)
        draft.goals.append(Predicate("toggled_on", (fixture.name,)))
        draft.phrases.append(f"turn on the {fixture.category}")
    else:
        fixture = _pick(rng, index.openables)
        draft.goals.append(Predicate("open", (fixture.name,)))
        draft.phrases.append(f"open the {fixture.category}")
    if index.surfaces and rng.random() < 0.5:
        # Scene dressing: a stray portable that the goal never references.
        cat = PORTABLE_CATEGORIES[rng.randrange(len(PORTABLE_CATEGORIES))]
        prop = draft.new_symbol(cat)
        surf = _pick(rng, index.surfaces)
        draft.init.append(Predicate("ontop", (prop, surf.name)))
    return True


def _add_kitchen(draft: _Draft, rng: random.Random, index: _SceneIndex) -> bool:
    modes = []
    if index.heat_sources:
        modes.append(("heat", index.heat_sources, "heated"))
    if index.cook_tools:
        modes.append(("cook", index.cook_tools, "cooked"))
    if index.cold_sources:
        modes.append(("chill", index.cold_sources, "frozen"))
    if not modes or not index.surfaces:
        return False
    verb, sources, flag = modes[rng.randrange(len(modes))]
    source = _pick(rng, sources)
    starts = [s for s in index.surfaces if s.id != source.id]
    if not starts:
        return False
    food = FOOD_CATEGORIES[rng.randrange(len(FOOD_CATEGORIES))]
    cluttered = [s for s in starts if s.id in index.cluttered_ids]
    if cluttered and rng.random() < 0.7:
        start = _pick(rng, cluttered)
    else:
        start = _pick(rng, starts)
    sym = draft.new_symbol(food)
    relation = _relation_for(source)
    draft.init.append(Predicate("ontop", (sym, start.name)))
    if rng.random() < 0.5:
        _add_companion(draft, rng, sym, start)
    draft.goals.append(Predicate(relation, (sym, source.name)))
    draft.goals.append(Predicate(flag, (sym,)))
    prep = "in" if relation == "inside" else "on"
    draft.phrases.append(f"{verb} the {food} {prep} the {source.category}")
    return True


def _build_task(
    name: str, draft: _Draft, rng: random.Random
) -> TaskDef:
    sentence = ", then ".join(draft.phrases)
    instruction = sentence[0].upper() + sentence[1:] + "."
    return TaskDef(
        name=name,
        instruction=instruction,
        manifest=draft.manifest,
        requirements=draft.require,
        init=draft.init,
        goals=draft.goals,
    )


def generate_tasks(
    base: WorldState,
    count: int,
    seed: int = 0,
    families: tuple[str, ...] = FAMILIES,
) -> list[TaskDef]:
    """``count`` unique tasks for a base scene, or GeneratorExhausted."""
    for fam in families:
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {fam!r}; have {FAMILIES}")
    rng = random.Random(seed)
    index = _SceneIndex(base)
    out: list[TaskDef] = []
    seen_goals: set[frozenset] = set()
    attempts = 0
    max_attempts = max(200, 60 * count)
    while len(out) < count:
        attempts += 1
        if attempts > max_attempts:
            raise GeneratorExhausted(
                f"{len(out)}/{count} unique tasks after {attempts - 1} attempts on {base.name}"
            )
        family = families[rng.randrange(len(families))]
        draft = _Draft()
        if family == "pickplace":
            ok = _add_pickplace(draft, rng, index)
        elif family == "appliance":
            ok = _add_appliance(draft, rng, index)
        elif family == "kitchen":
            ok = _add_kitchen(draft, rng, index)
        else:
            first = rng.choice(("pickplace", "kitchen"))
            if first == "pickplace":
                ok = _add_pickplace(draft, rng, index)
            else:
                ok = _add_kitchen(draft, rng, index)
            ok = ok and _add_appliance(draft, rng, index)
        if not ok:
            continue
        signature = frozenset((g.kind,) + g.args for g in draft.goals)
        if signature in seen_goals or len(signature) < len(draft.goals):
            continue
        seen_goals.add(signature)
        task = _build_task(f"{family}_{len(out):04d}", draft, rng)
        out.append(task)
    return out
