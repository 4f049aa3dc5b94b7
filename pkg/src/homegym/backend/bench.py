"""Latency ablation bench.

Four cumulative stacks, measured on the same workload:

1. ``none``       micro-stepped execution, no scheduler, naive dispatch,
                  and a from-scratch scene load per rollout
2. ``cache``      pre-cached outcome execution (fast path); loads still fresh
3. ``scheduler``  slots keep their scene between rollouts (snapshot reset)
                  and a lookahead window pre-warms idle slots
4. ``dispatcher`` scene-aware dispatch replaces round-robin

The workload cycles four dressed scenes in two-batch blocks so the naive
dispatcher keeps colonising every slot with whatever it last ran: the
stack with retention but blind placement pays a miss on every block
switch, while the scene-aware stack settles into one warm slot per scene
and stops loading entirely.  Scene-load cost is a wall-clock deadline
spin (``load_cost_ms``), so concurrent loads overlap like real asset I/O
even on one core; micro-step cost burns calibrated CPU per step.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

from homegym.actionlang import Action, format_actions
from homegym.backend.local import LocalBackend
from homegym.backend.manager import Manager
from homegym.backend.worker import Worker
from homegym.factory import base_scene, generate_tasks, instantiate_scene
from homegym.factory.errors import GenerationFailed
from homegym.rollout import RolloutReport
from homegym.tasks import format_task
from homegym.world.scenedoc import save_scene

CONFIG_NAMES = ("none", "cache", "scheduler", "dispatcher")


@dataclass
class BenchConfig:
    load_cost_ms: float = 2000.0
    rollouts: int = 200
    batch_size: int = 4
    workers: int = 2
    slots_per_worker: int = 2
    n_scenes: int = 4
    block_batches: int = 2  # consecutive batches on one scene
    lookahead_batches: int = 8
    min_micro_steps: int = 250
    seed: int = 0
    heartbeat_interval: float = 1.0


@dataclass
class SceneJob:
    scene_id: str
    scene_text: str
    task_text: str
    binding: dict[str, int]
    actions: str
    micro_steps: int


@dataclass
class ConfigStats:
    name: str
    cache: bool
    scheduler: bool
    dispatcher: bool
    latencies_ms: list[float] = field(default_factory=list)
    load_ms: list[float] = field(default_factory=list)
    exec_ms: list[float] = field(default_factory=list)
    queue_ms: list[float] = field(default_factory=list)
    failures: int = 0

    @property
    def mean_ms(self) -> float:
        return statistics.fmean(self.latencies_ms)

    @property
    def p50_ms(self) -> float:
        return statistics.median(self.latencies_ms)

    @property
    def p95_ms(self) -> float:
        xs = sorted(self.latencies_ms)
        return xs[min(len(xs) - 1, int(0.95 * len(xs)))]

    def csv_row(self) -> str:
        return (
            f"{self.name},{int(self.cache)},{int(self.scheduler)},"
            f"{int(self.dispatcher)},{len(self.latencies_ms)},"
            f"{self.mean_ms:.1f},{self.p50_ms:.1f},{self.p95_ms:.1f}"
        )


CSV_HEADER = "config,cache,scheduler,dispatcher,rollouts,mean_ms,p50_ms,p95_ms"


def _plan_for(task, binding: dict[str, int], state) -> list[Action] | None:
    """move / pick_up / move / [open] / place for a single-relation goal."""
    goal = next((g for g in task.goals if g.kind in ("ontop", "inside")), None)
    if goal is None:
        return None
    subject, target = goal.args
    si, ti = binding[subject], binding[target]
    plan = [
        Action("move", (("object_index", si),)),
        Action("pick_up", (("object_index", si),)),
        Action("move", (("object_index", ti),)),
    ]
    if state.obj(ti).has("openable") and not state.obj(ti).open:
        plan.append(Action("open", (("object_index", ti),)))
    plan.append(Action("place", (("object_index", ti), ("relation", goal.kind))))
    return plan


def build_workload(cfg: BenchConfig) -> list[SceneJob]:
    """Dressed scenes plus a verified plan each; micro cost is bounded below
    so the cache ablation has a real execution term to remove."""
    base = base_scene("apt_two")
    probe = LocalBackend(charge_work=False)
    jobs: list[SceneJob] = []
    for task in generate_tasks(base, 40, seed=cfg.seed, families=("pickplace",)):
        if len(jobs) >= cfg.n_scenes:
            break
        try:
            state, binding = instantiate_scene(task, base, seed=cfg.seed)
        except GenerationFailed:
            continue
        plan = _plan_for(task, binding)
        if plan is None:
            continue
        scene_id = f"bench_{len(jobs)}"
        scene_text = save_scene(state)
        task_text = format_task(task)
        actions = format_actions(plan)
        probe.register_scene(scene_id, scene_text)
        item = {
            "rollout_id": f"probe_{scene_id}", "scene_id": scene_id,
            "task": task_text, "binding": binding, "actions": actions,
        }
        fast = RolloutReport.from_dict(
            probe.submit_batch([dict(item, exec_path="fast")]).wait()[0]["report"]
        )
        micro = RolloutReport.from_dict(
            probe.submit_batch(
                [dict(item, rollout_id=f"m_{scene_id}", exec_path="micro")]
            ).wait()[0]["report"]
        )
        if not (fast.success and micro.success):
            continue
        if micro.sim_steps < cfg.min_micro_steps:
            continue
        jobs.append(SceneJob(scene_id, scene_text, task_text, binding,
                             actions, micro.sim_steps))
    if len(jobs) < cfg.n_scenes:
        raise RuntimeError(
            f"workload wants {cfg.n_scenes} scenes, found {len(jobs)} "
            f"with solvable plans over {cfg.min_micro_steps} micro steps"
        )
    return jobs


def _scene_for_batch(cfg: BenchConfig, batch_index: int) -> int:
    return (batch_index // cfg.block_batches) % cfg.n_scenes


def run_config(name: str, cfg: BenchConfig, jobs: list[SceneJob]) -> ConfigStats:
    cache = name != "none"
    scheduler = name in ("scheduler", "dispatcher")
    dispatcher = name == "dispatcher"
    stats = ConfigStats(name, cache, scheduler, dispatcher)

    manager = Manager(heartbeat_interval=cfg.heartbeat_interval)
    addr = manager.start()
    workers = [
        Worker(addr, slots=cfg.slots_per_worker, worker_id=f"bench-w{i}",
               load_cost_ms=cfg.load_cost_ms, charge_work=True,
               heartbeat_interval=cfg.heartbeat_interval)
        for i in range(cfg.workers)
    ]
    try:
        for w in workers:
            w.start()
        manager.wait_workers(cfg.workers)
        for job in jobs:
            manager.register_scene(job.scene_id, job.scene_text)

        n_batches = -(-cfg.rollouts // cfg.batch_size)
        # Stateful stacks need one full scene cycle to reach steady state;
        # fresh-load stacks have no state to warm up.
        warm_batches = cfg.block_batches * cfg.n_scenes if scheduler else 1
        mode = "warm" if dispatcher else "naive"
        exec_path = "fast" if cache else "micro"
        rid = 0
        for b in range(warm_batches + n_batches):
            job = jobs[_scene_for_batch(cfg, b)]
            items = []
            for _ in range(cfg.batch_size):
                items.append({
                    "rollout_id": f"{name}_{rid}", "scene_id": job.scene_id,
                    "task": job.task_text, "binding": job.binding,
                    "actions": job.actions, "exec_path": exec_path,
                })
                rid += 1
            upcoming = None
            if scheduler:
                upcoming = [
                    jobs[_scene_for_batch(cfg, nb)].scene_id
                    for nb in range(b + 1, b + 1 + cfg.lookahead_batches)
                ]
            handle = manager.submit_batch(
                items, mode=mode, upcoming=upcoming, group_size=1,
                fresh=not scheduler,
            )
            results = handle.wait(timeout=600.0)
            if b < warm_batches:
                continue
            for res in results:
                if not res["ok"]:
                    stats.failures += 1
                    continue
                stats.latencies_ms.append(res["latency_ms"])
                t = res["timings"]
                stats.load_ms.append(t.get("load_ms", 0.0))
                stats.exec_ms.append(t.get("exec_ms", 0.0))
                stats.queue_ms.append(t.get("queue_ms", 0.0))
    finally:
        for w in workers:
            w.stop()
        manager.stop()
    return stats


def run_bench(cfg: BenchConfig | None = None,
              configs: tuple[str, ...] = CONFIG_NAMES,
              verbose: bool = False) -> list[ConfigStats]:
    cfg = cfg or BenchConfig()
    for name in configs:
        if name not in CONFIG_NAMES:
            raise ValueError(f"unknown config {name!r}; have {CONFIG_NAMES}")
    jobs = build_workload(cfg)
    out = []
    for name in configs:
        t0 = time.perf_counter()
        stats = run_config(name, cfg, jobs)
        if verbose:
            print(
                f"{name:>10}: mean {stats.mean_ms:8.1f} ms  "
                f"p50 {stats.p50_ms:8.1f}  p95 {stats.p95_ms:8.1f}  "
                f"({time.perf_counter() - t0:.0f} s wall)"
            )
        out.append(stats)
    return out


def stats_to_csv(rows: list[ConfigStats]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in rows]) + "\n"
