"""In-process rollout execution with the manager's submit/wait surface.

Training on one machine does not need sockets; this backend keeps one
warm engine + snapshot per scene and runs batches synchronously.  Result
dictionaries match the distributed path field-for-field so the trainer
can switch backends with a flag.
"""

from __future__ import annotations

import time

from homegym.rollout import run_rollout
from homegym.tasks import TaskDef, parse_task
from homegym.world.engine import Engine
from homegym.world.scenedoc import load_scene


class _DoneBatch:
    def __init__(self, results: list[dict]):
        self._results = results

    def wait(self, timeout: float | None = None) -> list[dict]:
        return self._results


class LocalBackend:
    def __init__(self, charge_work: bool = False):
        self.charge_work = charge_work
        self._scene_store: dict[str, str] = {}
        self._warm: dict[str, tuple[Engine, object]] = {}
        self._tasks: dict[str, TaskDef] = {}

    def register_scene(self, scene_id: str, scene_text: str) -> None:
        self._scene_store[scene_id] = scene_text

    def worker_count(self) -> int:
        return 1

    def _engine_for(self, scene_id: str, scene_text: str | None) -> tuple[Engine, object, float]:
        if scene_id in self._warm:
            engine, snapshot = self._warm[scene_id]
            return engine, snapshot, 0.0
        text = scene_text if scene_text is not None else self._scene_store[scene_id]
        t0 = time.perf_counter()
        engine = Engine(load_scene(text), charge_work=self.charge_work)
        snapshot = engine.snapshot()
        self._warm[scene_id] = (engine, snapshot)
        return engine, snapshot, (time.perf_counter() - t0) * 1000.0

    def _task_for(self, task_text: str) -> TaskDef:
        task = self._tasks.get(task_text)
        if task is None:
            task = parse_task(task_text)
            self._tasks[task_text] = task
        return task

    def submit_batch(
        self,
        items: list[dict],
        mode: str = "warm",
        upcoming: list[str] | None = None,
        group_size: int | None = None,
    ) -> _DoneBatch:
        if not items:
            raise ValueError("empty batch")
        results = []
        for it in items:
            t0 = time.perf_counter()
            engine, snapshot, load_ms = self._engine_for(it["scene_id"], it.get("scene"))
            task = self._task_for(it["task"])
            report = run_rollout(
                engine, snapshot, task, it["binding"], it["actions"],
                it.get("exec_path", "fast"),
            )
            wall = (time.perf_counter() - t0) * 1000.0
            results.append({
                "rollout_id": it["rollout_id"],
                "ok": True,
                "reason": None,
                "report": report.to_dict(),
                "timings": {"queue_ms": 0.0, "load_ms": load_ms,
                            "exec_ms": wall - load_ms},
                "latency_ms": wall,
                "worker_id": "local",
                "requeues": 0,
            })
        return _DoneBatch(results)
