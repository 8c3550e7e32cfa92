from typing import Optional

from ..errors import ConfigError, DimensionMismatch
from ..lattice import GeneratorMatrix
from ..registry import register_generator


@register_generator("rect")
def rectangular_generator(n: Optional[int] = None) -> GeneratorMatrix:
    """Integer grid {0,...,q-1}^n used by conventional q-ary rewriting codes."""
    if n is None:
        raise ConfigError("The rect lattice needs a dimension (--n)")
    if n < 1:
        raise DimensionMismatch(f"Dimension must be positive, got {n}")
    return GeneratorMatrix.identity(n)


@register_generator("skew2")
def skew2_generator(n: Optional[int] = None) -> GeneratorMatrix:
    """Two-dimensional [1 0; 1/2 1] generator, the smallest non-diagonal example."""
    if n is not None and n != 2:
        raise DimensionMismatch(f"The skew2 lattice has dimension 2, not {n}")
    return GeneratorMatrix(((1, 0), ("1/2", 1)))
