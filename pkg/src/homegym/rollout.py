"""End-to-end scoring of one action text against one task on one scene.

Shared by the in-process backend, the remote worker, and evaluation code so
that every execution surface produces byte-identical reports.  Action text
that references an object index outside the scene is treated as a parse
failure: the plan never grounded, so it earns the parse penalty rather than
a partial execution trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from homegym.actionlang import ActionParseError, parse_actions
from homegym.rewards import DEFAULT_REWARDS, RewardBreakdown, RewardConfig, score_rollout
from homegym.tasks import TaskDef, goal_results
from homegym.world.engine import Engine
from homegym.world.types import WorldState


@dataclass
class RolloutReport:
    parse_ok: bool
    parse_error: str | None
    executed: int
    outcomes: list[tuple[str, bool, str | None, str | None]]
    objects_touched: list[int]
    goal_flags: list[bool]
    breakdown: RewardBreakdown
    sim_steps: int = 0

    @property
    def success(self) -> bool:
        return self.parse_ok and bool(self.goal_flags) and all(self.goal_flags)

    @property
    def total(self) -> float:
        return self.breakdown.total

    def to_dict(self) -> dict:
        return {
            "parse_ok": self.parse_ok,
            "parse_error": self.parse_error,
            "executed": self.executed,
            "outcomes": [list(o) for o in self.outcomes],
            "objects_touched": list(self.objects_touched),
            "goal_flags": list(self.goal_flags),
            "r_format": self.breakdown.r_format,
            "r_relevance": self.breakdown.r_relevance,
            "r_goal": self.breakdown.r_goal,
            "sim_steps": self.sim_steps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RolloutReport":
        return cls(
            parse_ok=d["parse_ok"],
            parse_error=d.get("parse_error"),
            executed=d["executed"],
            outcomes=[tuple(o) for o in d["outcomes"]],
            objects_touched=list(d["objects_touched"]),
            goal_flags=list(d["goal_flags"]),
            breakdown=RewardBreakdown(d["r_format"], d["r_relevance"], d["r_goal"]),
            sim_steps=d.get("sim_steps", 0),
        )


def _parse_failure(error: ActionParseError, config: RewardConfig) -> RolloutReport:
    return RolloutReport(
        parse_ok=False,
        parse_error=str(error),
        executed=0,
        outcomes=[],
        objects_touched=[],
        goal_flags=[],
        breakdown=score_rollout(False, set(), set(), [True], config),
    )


def run_rollout(
    engine: Engine,
    snapshot: WorldState,
    task: TaskDef,
    binding: dict[str, int],
    action_text: str,
    exec_path: str = "fast",
    reward_config: RewardConfig = DEFAULT_REWARDS,
) -> RolloutReport:
    try:
        try:
            actions = parse_actions(action_text)
        except ActionParseError as exc:
            return _parse_failure(exc, reward_config)
        n_objects = len(engine.state.objects)
        for i, action in enumerate(actions):
            for key, value in action.args:
                if key in ("object_index", "source_index") and not (0 <= int(value) < n_objects):
                    err = ActionParseError(
                        "unknown_object", i + 1, 1,
                        f"{action.skill}: {key}={value} does not exist in the scene",
                    )
                    return _parse_failure(err, reward_config)

        result = engine.execute(actions, exec_path=exec_path)
        goal_flags = goal_results(engine.state, task, binding)
        goal_ids = {binding[s] for s in task.goal_symbols()}
        breakdown = score_rollout(
            True, goal_ids, result.objects_touched, goal_flags, reward_config
        )
        return RolloutReport(
            parse_ok=True,
            parse_error=None,
            executed=result.executed,
            outcomes=[(o.skill, o.ok, o.stage, o.reason) for o in result.outcomes],
            objects_touched=sorted(result.objects_touched),
            goal_flags=goal_flags,
            breakdown=breakdown,
            sim_steps=result.sim_steps,
        )
    finally:
        engine.restore(snapshot)
