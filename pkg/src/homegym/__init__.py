"""Desk-scale training ground for household manipulation policies.

The package bundles four pieces that are usually scattered across separate
repos: a procedural scene/task factory, a symbolic physics-lite simulator
with pre-cached action outcomes, a manager/worker rollout backend, and a
small GRPO trainer for an autoregressive table policy.
"""

__version__ = "0.1.0"
