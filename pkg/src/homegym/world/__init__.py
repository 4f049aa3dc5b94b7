from homegym.world.types import ObjectInstance, Room, RobotState, WorldState
from homegym.world.scenedoc import SceneDocError, load_scene, save_scene
from homegym.world.grid import Grid
from homegym.world.cache import OutcomeCache, build_cache
from homegym.world.engine import Engine, ExecResult, SkillOutcome

__all__ = [
    "ObjectInstance",
    "Room",
    "RobotState",
    "WorldState",
    "SceneDocError",
    "load_scene",
    "save_scene",
    "Grid",
    "OutcomeCache",
    "build_cache",
    "Engine",
    "ExecResult",
    "SkillOutcome",
]
