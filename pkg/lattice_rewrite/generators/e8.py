from typing import Optional

from ..errors import DimensionMismatch
from ..lattice import GeneratorMatrix
from ..registry import register_generator

# Lower-triangular E8 generator: first column all 1/2, diagonal 1/2, 1, ..., 1, 2.
E8_ROWS = (
    ("1/2", 0, 0, 0, 0, 0, 0, 0),
    ("1/2", 1, 0, 0, 0, 0, 0, 0),
    ("1/2", -1, 1, 0, 0, 0, 0, 0),
    ("1/2", 0, -1, 1, 0, 0, 0, 0),
    ("1/2", 0, 0, -1, 1, 0, 0, 0),
    ("1/2", 0, 0, 0, -1, 1, 0, 0),
    ("1/2", 0, 0, 0, 0, -1, 1, 0),
    ("1/2", 0, 0, 0, 0, 0, -1, 2),
)


@register_generator("e8")
def e8_generator(n: Optional[int] = None) -> GeneratorMatrix:
    """The E8 lattice: unimodular, minimal squared norm 2, kissing number 240."""
    if n is not None and n != 8:
        raise DimensionMismatch(f"The e8 lattice has dimension 8, not {n}")
    return GeneratorMatrix(E8_ROWS)
