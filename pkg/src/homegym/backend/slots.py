"""Simulator slots: the unit of pre-warming on a worker.

A slot is COLD until a scene is loaded into it, WARM while it holds a
ready engine plus a pristine snapshot, and BUSY for exactly one in-flight
rollout.  After a rollout the engine is restored from the snapshot, so
the slot returns to WARM with zero reload cost.

``load_cost_ms`` models the expensive part of real scene initialisation
(asset I/O, physics warmup) as a wall-clock deadline spin; the bench sets
it to 2000 ms, live use leaves it at 0 so only the true parse/build cost
remains.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from homegym.busywork import spin_until_deadline
from homegym.rollout import RolloutReport, run_rollout
from homegym.tasks import parse_task
from homegym.world.engine import Engine
from homegym.world.scenedoc import load_scene

COLD = "COLD"
LOADING = "LOADING"
WARM = "WARM"
BUSY = "BUSY"


class SlotNotWarm(RuntimeError):
    pass


@dataclass
class ExecTimings:
    queue_ms: float = 0.0
    load_ms: float = 0.0
    exec_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "queue_ms": self.queue_ms,
            "load_ms": self.load_ms,
            "exec_ms": self.exec_ms,
        }


class SimSlot:
    def __init__(self, slot_id: int, load_cost_ms: float = 0.0, charge_work: bool = True):
        self.slot_id = slot_id
        self.load_cost_ms = load_cost_ms
        self.charge_work = charge_work
        self.phase = COLD
        self.scene_id: str | None = None
        self._engine: Engine | None = None
        self._snapshot = None

    def unload(self) -> None:
        self.phase = COLD
        self.scene_id = None
        self._engine = None
        self._snapshot = None

    def load(self, scene_id: str, scene_text: str) -> float:
        """Synchronous scene load; returns the wall cost in ms."""
        t0 = time.perf_counter()
        self.phase = LOADING
        self.scene_id = None
        if self.load_cost_ms > 0.0:
            spin_until_deadline(t0 + self.load_cost_ms / 1000.0)
        state = load_scene(scene_text)
        self._engine = Engine(state, charge_work=self.charge_work)
        self._snapshot = self._engine.snapshot()
        self.scene_id = scene_id
        self.phase = WARM
        return (time.perf_counter() - t0) * 1000.0

    def execute(
        self,
        scene_id: str,
        task_text: str,
        binding: dict[str, int],
        action_text: str,
        exec_path: str,
    ) -> tuple[RolloutReport, float]:
        """One rollout against the pristine snapshot; returns (report, exec_ms)."""
        if self.phase != WARM or self.scene_id != scene_id:
            raise SlotNotWarm(
                f"slot {self.slot_id} is {self.phase} with {self.scene_id!r}, "
                f"rollout wants {scene_id!r}"
            )
        self.phase = BUSY
        t0 = time.perf_counter()
        try:
            task = parse_task(task_text)
            report = run_rollout(
                self._engine, self._snapshot, task, binding, action_text, exec_path
            )
        finally:
            self.phase = WARM
        return report, (time.perf_counter() - t0) * 1000.0
