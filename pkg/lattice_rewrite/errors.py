"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class LatticeRewriteError(Exception):
    """Base class for all lattice-rewrite errors."""

    exit_code: int = 1


class ParameterError(LatticeRewriteError):
    """Invalid lattice, code parameters or configuration."""

    exit_code = 2


class ConfigError(ParameterError):
    """Configuration could not be loaded or resolved."""


class NotLowerTriangular(ParameterError):
    def __init__(self, row: int, column: int):
        super().__init__(f"Generator entry g[{row},{column}] above the diagonal is non-zero")
        self.row = row
        self.column = column


class NonPositiveDiagonal(ParameterError):
    def __init__(self, index: int):
        super().__init__(f"Generator diagonal entry g[{index},{index}] must be positive")
        self.index = index


class NonIntegerRadix(ParameterError):
    def __init__(self, index: int, value: object = None):
        detail = f" (M / g_ii = {value})" if value is not None else ""
        super().__init__(f"Radix r_{index} is not an integer{detail}")
        self.index = index


class DimensionMismatch(ParameterError):
    """Vector or matrix sizes do not agree."""


class RangeViolation(ParameterError):
    """A word or block index component is outside its alphabet."""


class InsufficientData(ParameterError):
    """Not enough distinct points for a regression."""


class MemoryFull(LatticeRewriteError):
    """No candidate codeword can be written without decreasing a cell."""

    exit_code = 3


class Phantom(LatticeRewriteError):
    """The encoded point of a truncated block lies outside the cube."""

    exit_code = 3


class DecodeError(LatticeRewriteError):
    exit_code = 4


class NotALatticePoint(DecodeError):
    def __init__(self, index: int, value: object = None):
        detail = f" (b_{index} = {value})" if value is not None else ""
        super().__init__(f"Point is not on the lattice: coefficient {index} is not an integer{detail}")
        self.index = index


class OutOfCube(DecodeError):
    """A point lies outside the half-open cube [0, D*M)^n."""


class TooLarge(LatticeRewriteError):
    """An exhaustive enumeration would exceed its cap."""

    exit_code = 5


class InvariantViolation(LatticeRewriteError):
    """A verify-mode check on a write failed."""
