"""Failure types raised by the scene factory."""

from __future__ import annotations


class GenerationFailed(Exception):
    """Instantiating a task onto a base scene failed.

    ``stage`` identifies where: ``binding``, ``distribute``, ``layout``,
    ``placement``, ``verify``.
    """

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class GeneratorExhausted(Exception):
    """The template generator ran out of novel tasks for a base scene."""
