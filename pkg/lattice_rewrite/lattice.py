"""Exact rational lattice arithmetic for lower-triangular generators.

A lattice point is ``x = G b`` with ``x_i = sum_{j<=i} g_ij b_j``.  All arithmetic
uses :class:`fractions.Fraction`, so encoding and decoding never round.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .core import IntVector, Vector
from .errors import (
    DimensionMismatch,
    NonIntegerRadix,
    NonPositiveDiagonal,
    NotALatticePoint,
    NotLowerTriangular,
    ParameterError,
)

logger = logging.getLogger(__name__)

RationalLike = Union[int, str, Fraction]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse an int, a ``"p/q"`` string or an exact decimal string.

    Floats are rejected: ``0.1`` has no exact binary value.
    """
    if isinstance(value, bool):
        raise ParameterError(f"Expected a rational number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"Invalid rational number: {value!r}") from exc
    raise ParameterError(
        f"Expected an integer or a 'p/q' string, got {type(value).__name__} {value!r}"
    )


def parse_vector(values: Iterable[RationalLike]) -> Vector:
    return tuple(parse_rational(v) for v in values)


def format_rational(value: Fraction) -> str:
    """``"p/q"`` when the denominator exceeds one, a plain integer otherwise."""
    return str(Fraction(value))


def format_decimal(value: Fraction) -> str:
    """Exact decimal when the expansion terminates, ``"p/q"`` otherwise."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    rest, twos, fives = value.denominator, 0, 0
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return format_rational(value)
    places = max(twos, fives)
    scaled = abs(value.numerator) * 10**places // value.denominator
    whole, frac = divmod(scaled, 10**places)
    sign = "-" if value < 0 else ""
    return f"{sign}{whole}.{frac:0{places}d}"


def format_vector(values: Sequence[Fraction]) -> str:
    return "(" + ", ".join(format_rational(v) for v in values) + ")"


@dataclass(frozen=True)
class GeneratorMatrix:
    """Lower-triangular generator with a positive diagonal.

    ``rows[i][j]`` is g_ij (0-based); entries may be given as ints or ``"p/q"`` strings.
    """

    rows: Tuple[Vector, ...]

    def __post_init__(self) -> None:
        rows = tuple(parse_vector(row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0:
            raise DimensionMismatch("Generator matrix must have at least one row")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionMismatch(
                    f"Generator matrix must be square: row {i + 1} has {len(row)} entries, expected {n}"
                )
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != 0:
                    raise NotLowerTriangular(i + 1, j + 1)
        for i in range(n):
            if rows[i][i] <= 0:
                raise NonPositiveDiagonal(i + 1)

    @classmethod
    def identity(cls, n: int) -> "GeneratorMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def diagonal(self) -> Vector:
        return tuple(self.rows[i][i] for i in range(self.n))

    def to_strings(self) -> List[List[str]]:
        return [[format_rational(g) for g in row] for row in self.rows]


@dataclass(frozen=True)
class LatticeSpec:
    """A validated generator together with the block side M and radices r_i = M / g_ii."""

    generator: GeneratorMatrix
    M: int
    radices: IntVector

    @property
    def n(self) -> int:
        return self.generator.n

    @property
    def word_count(self) -> int:
        return math.prod(self.radices)

    @property
    def information_bits(self) -> float:
        return sum(math.log2(r) for r in self.radices)


def validate_lattice(generator: GeneratorMatrix, M: int) -> LatticeSpec:
    """Check that every M / g_ii is a positive integer and build the LatticeSpec."""
    if isinstance(M, bool) or not isinstance(M, int) or M < 1:
        raise ParameterError(f"M must be a positive integer, got {M!r}")
    radices = []
    for i, g in enumerate(generator.diagonal, start=1):
        radix = Fraction(M) / g
        if radix.denominator != 1:
            raise NonIntegerRadix(i, format_rational(radix))
        radices.append(radix.numerator)

    det = determinant(generator)
    expected = Fraction(M) ** generator.n / det
    if expected.denominator == 1 and math.prod(radices) != expected:
        raise ParameterError(
            f"Radix product {math.prod(radices)} disagrees with M^n / |det G| = {expected}"
        )
    logger.debug(f"Validated lattice n={generator.n} M={M} radices={tuple(radices)}")
    return LatticeSpec(generator=generator, M=M, radices=tuple(radices))


def determinant(generator: GeneratorMatrix) -> Fraction:
    """Voronoi volume |det G|; the product of the diagonal for a triangular G."""
    return math.prod(generator.diagonal, start=Fraction(1))


def scale_factor(generator: GeneratorMatrix) -> float:
    """The alpha with alpha^n |det G| = 1, for cross-code normalisation reports only."""
    det = determinant(generator)
    return math.pow(float(det), -1.0 / generator.n)


def lattice_point(generator: GeneratorMatrix, b: Sequence[int]) -> Vector:
    if len(b) != generator.n:
        raise DimensionMismatch(f"Expected {generator.n} coefficients, got {len(b)}")
    return tuple(
        sum((row[j] * b[j] for j in range(i + 1)), Fraction(0))
        for i, row in enumerate(generator.rows)
    )


def solve_triangular(generator: GeneratorMatrix, x: Sequence[RationalLike]) -> IntVector:
    """Forward substitution b = G^-1 x, requiring every b_i to be an integer."""
    if len(x) != generator.n:
        raise DimensionMismatch(f"Expected a point of dimension {generator.n}, got {len(x)}")
    point = parse_vector(x)
    b: List[int] = []
    for i, row in enumerate(generator.rows):
        partial = sum((row[j] * b[j] for j in range(i)), Fraction(0))
        coefficient = (point[i] - partial) / row[i]
        if coefficient.denominator != 1:
            raise NotALatticePoint(i + 1, format_rational(coefficient))
        b.append(coefficient.numerator)
    return tuple(b)


def squared_norm(x: Sequence[Fraction]) -> Fraction:
    return sum((v * v for v in x), Fraction(0))


def basis_norm_bound(generator: GeneratorMatrix) -> Fraction:
    """Smallest squared norm among the columns of G, an upper bound on the minimum."""
    n = generator.n
    return min(
        sum((generator.rows[i][j] ** 2 for i in range(j, n)), Fraction(0)) for j in range(n)
    )


def shortest_vectors(
    generator: GeneratorMatrix, max_norm: Optional[RationalLike] = None
) -> Tuple[Fraction, List[Tuple[IntVector, Vector]]]:
    """Minimal squared norm and every vector attaining it, among norms <= max_norm.

    max_norm defaults to basis_norm_bound, which always contains the minimum.

    Exhaustive over the ball: coordinate i only depends on b_1..b_i, so each b_i
    ranges over the integers keeping the partial norm within the bound.
    Returns ``(0, [])`` when no non-zero vector lies in the ball.
    """
    bound = basis_norm_bound(generator) if max_norm is None else parse_rational(max_norm)
    n = generator.n
    found: List[Tuple[IntVector, Vector, Fraction]] = []
    b: List[int] = [0] * n
    x: List[Fraction] = [Fraction(0)] * n

    def descend(i: int, remaining: Fraction) -> None:
        if i == n:
            norm = bound - remaining
            if norm > 0:
                found.append((tuple(b), tuple(x), norm))
            return
        row = generator.rows[i]
        partial = sum((row[j] * b[j] for j in range(i)), Fraction(0))
        g = row[i]
        root = math.sqrt(float(remaining))
        lo = math.floor((-root - float(partial)) / float(g)) - 1
        hi = math.ceil((root - float(partial)) / float(g)) + 1
        for coefficient in range(lo, hi + 1):
            value = partial + g * coefficient
            square = value * value
            if square <= remaining:
                b[i] = coefficient
                x[i] = value
                descend(i + 1, remaining - square)
        b[i] = 0
        x[i] = Fraction(0)

    descend(0, bound)
    if not found:
        return Fraction(0), []
    minimum = min(norm for _, _, norm in found)
    return minimum, [(bv, xv) for bv, xv, norm in found if norm == minimum]
