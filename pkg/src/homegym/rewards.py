"""Three-tier reward: format gate, object relevance, goal completion.

A rollout that fails to parse earns the flat penalty and nothing else.  A
parseable rollout earns the base format reward, a relevance term paying
``beta`` per goal-referenced object actually touched by a successful action
(capped), and a goal term splitting a fixed per-task total evenly across
the task's goal predicates.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RewardConfig:
    parse_penalty: float = -1.0
    parse_base: float = 0.5
    relevance_beta: float = 0.2
    relevance_cap: float = 1.0
    task_total: float = 30.0


DEFAULT_REWARDS = RewardConfig()


@dataclass(frozen=True)
class RewardBreakdown:
    r_format: float
    r_relevance: float
    r_goal: float

    @property
    def total(self) -> float:
        return self.r_format + self.r_relevance + self.r_goal


def score_rollout(
    parse_ok: bool,
    goal_object_ids: set[int],
    touched_ids: set[int],
    goal_flags: list[bool],
    config: RewardConfig = DEFAULT_REWARDS,
) -> RewardBreakdown:
    if not parse_ok:
        return RewardBreakdown(config.parse_penalty, 0.0, 0.0)
    if not goal_flags:
        raise ValueError("a task must declare at least one goal predicate")
    relevant = len(goal_object_ids & touched_ids)
    r_relevance = min(config.relevance_beta * relevant, config.relevance_cap)
    alpha = config.task_total / len(goal_flags)
    r_goal = alpha * sum(1 for f in goal_flags if f)
    return RewardBreakdown(config.parse_base, r_relevance, r_goal)
