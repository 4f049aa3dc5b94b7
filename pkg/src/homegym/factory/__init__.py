from homegym.factory.assets import CATEGORIES, CategorySpec
from homegym.factory.basescenes import base_scene, list_base_scenes
from homegym.factory.errors import GenerationFailed, GeneratorExhausted
from homegym.factory.generate import generate_tasks
from homegym.factory.instantiate import instantiate_scene
from homegym.factory.baseline import place_random_uniform
from homegym.factory.verify import VerifyReport, verify_scene

__all__ = [
    "CATEGORIES",
    "CategorySpec",
    "base_scene",
    "list_base_scenes",
    "GenerationFailed",
    "GeneratorExhausted",
    "generate_tasks",
    "instantiate_scene",
    "place_random_uniform",
    "VerifyReport",
    "verify_scene",
]
