"""Random-uniform placement baseline.

Documented control for the constraint-aware factory.  The baseline knows
the same structural facts (which fixture an init predicate attaches an
object to, and the z level that relation implies) but places by sampling
uniformly: attachment positions uniform over the target's whole support
face or interior, floor positions uniform over a uniformly-chosen room,
yaw uniform.  It emits raw poses with no parent links and performs no
collision, containment-margin, adjacency, or reachability reasoning, so
overhangs, interpenetrations and unsatisfied ``nextto`` inits survive into
the emitted scene for ``verify_scene`` to catch.
"""

from __future__ import annotations

import math
import random

from homegym.factory.assets import CATEGORIES
from homegym.factory.errors import GenerationFailed
from homegym.geometry import Pose2
from homegym.tasks import TaskDef, bind_symbols
from homegym.world.types import ObjectInstance, WorldState


def place_random_uniform(
    task: TaskDef, base: WorldState, seed: int = 0
) -> tuple[WorldState, dict[str, int]]:
    rng = random.Random(seed)
    state = base.clone()
    state.name = f"{base.name}.{task.name}.rand{seed}"
    fixtures = {o.name for o in base.objects}

    attach: dict[str, tuple[str, str]] = {}
    for pred in task.init:
        if pred.kind in ("ontop", "inside"):
            attach[pred.args[0]] = (pred.args[1], pred.kind)

    for sym, cat in task.manifest:
        if cat not in CATEGORIES:
            raise GenerationFailed("binding", f"unknown category {cat!r}")
        spec = CATEGORIES[cat]
        if sym in attach and attach[sym][0] in fixtures:
            target_name, relation = attach[sym]
            target = next(o for o in state.objects if o.name == target_name)
            z = target.top_z if relation == "ontop" else target.pose.z
            fp = target.footprint()
            x = rng.uniform(fp[0], fp[2])
            y = rng.uniform(fp[1], fp[3])
            room = target.room
        else:
            room_obj = state.rooms[rng.randrange(len(state.rooms))]
            r = room_obj.rect
            x = rng.uniform(r[0], r[2])
            y = rng.uniform(r[1], r[3])
            z = 0.0
            room = room_obj.name
        state.objects.append(
            ObjectInstance(
                id=len(state.objects),
                name=sym,
                category=cat,
                room=room,
                pose=Pose2(x, y, z, rng.uniform(0.0, 2.0 * math.pi)),
                half_extents=spec.half_extents,
                flags=spec.flags,
                parent=None,
            )
        )

    for pred in task.init:
        if pred.kind in ("open", "toggled_on", "heated", "cooked", "frozen"):
            obj = next((o for o in state.objects if o.name == pred.args[0]), None)
            if obj is not None:
                setattr(obj, pred.kind, True)

    return state, bind_symbols(task, state)
