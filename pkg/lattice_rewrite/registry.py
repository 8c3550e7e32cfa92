from typing import Callable, Dict, Optional, Union

from .errors import ConfigError
from .lattice import GeneratorMatrix

GeneratorFactory = Callable[[Optional[int]], GeneratorMatrix]

GENERATOR_REGISTRY: Dict[str, GeneratorFactory] = {}


def register_generator(
    name: str, factory: Optional[GeneratorFactory] = None
) -> Union[Callable[[GeneratorFactory], GeneratorFactory], None]:
    """Register a generator factory. Can be used as a decorator or direct function call.

    When used as a decorator:
        @register_generator("e8")
        def e8_generator(n=None):
            ...

    When used as a function:
        register_generator("e8", e8_generator)

    A factory takes an optional dimension and returns a GeneratorMatrix.
    """

    def decorator(fn: GeneratorFactory) -> GeneratorFactory:
        GENERATOR_REGISTRY[name] = fn
        return fn

    if factory is None:
        return decorator
    GENERATOR_REGISTRY[name] = factory
    return None


def get_generator(name: str) -> GeneratorFactory:
    """Get a generator factory by name."""
    if name not in GENERATOR_REGISTRY:
        known = ", ".join(sorted(GENERATOR_REGISTRY))
        raise ConfigError(f"Unknown lattice: {name} (built-ins: {known})")
    return GENERATOR_REGISTRY[name]
