from typing import Dict

from ..registry import GENERATOR_REGISTRY, GeneratorFactory
from .e8 import e8_generator  # noqa: F401
from .rectangular import rectangular_generator, skew2_generator  # noqa: F401


def builtin_generators() -> Dict[str, GeneratorFactory]:
    """Named built-in generator factories (``e8``, ``rect``, ``skew2``)."""
    return dict(GENERATOR_REGISTRY)


__all__ = [
    "builtin_generators",
    "e8_generator",
    "rectangular_generator",
    "skew2_generator",
]
