"""Lattice rewriting codes for flash memory."""

from importlib import import_module

from .codebook import CodeParams  # noqa: F401
from .codec import Codec, Strategy  # noqa: F401
from .core import Codeword  # noqa: F401
from .lattice import GeneratorMatrix, LatticeSpec, validate_lattice  # noqa: F401
from .registry import get_generator, register_generator  # noqa: F401

# Import built-in generators so the registry is populated on import.
import_module("lattice_rewrite.generators")

__all__ = [
    "CodeParams",
    "Codec",
    "Codeword",
    "GeneratorMatrix",
    "LatticeSpec",
    "Strategy",
    "get_generator",
    "register_generator",
    "validate_lattice",
]

__version__ = "0.1.0"
