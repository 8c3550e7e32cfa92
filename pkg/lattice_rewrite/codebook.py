"""Cube geometry: the cube [0, D*M)^n, its blocks, and the codebook oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

from .core import BlockIndex, Codeword, Vector
from .errors import DimensionMismatch, OutOfCube, ParameterError, RangeViolation, TooLarge
from .lattice import (
    LatticeSpec,
    RationalLike,
    determinant,
    format_rational,
    parse_rational,
    parse_vector,
)

Interval = Tuple[Fraction, Fraction]

ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class CodeParams:
    """Code parameters (n, M, D, q) with q - 1 = D * M and D >= 1."""

    n: int
    M: int
    D: Fraction
    q: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "D", parse_rational(self.D))
        object.__setattr__(self, "q", parse_rational(self.q))
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if isinstance(self.M, bool) or not isinstance(self.M, int) or self.M < 1:
            raise ParameterError(f"M must be a positive integer, got {self.M!r}")
        if self.D * self.M != self.q - 1:
            raise ParameterError(
                f"q - 1 = {format_rational(self.q - 1)} "
                f"but D * M = {format_rational(self.D * self.M)}"
            )
        if self.D < 1:
            raise ParameterError(f"D must be at least 1, got {format_rational(self.D)}")

    @classmethod
    def from_levels(cls, n: int, M: int, q: RationalLike) -> "CodeParams":
        q = parse_rational(q)
        return cls(n=n, M=M, D=(q - 1) / M, q=q)

    @classmethod
    def from_blocks(cls, n: int, M: int, D: RationalLike) -> "CodeParams":
        D = parse_rational(D)
        return cls(n=n, M=M, D=D, q=D * M + 1)

    @property
    def cube_limit(self) -> Fraction:
        """D * M, the exclusive upper bound of every coordinate."""
        return self.D * self.M

    @property
    def blocks_per_axis(self) -> int:
        return math.ceil(self.D)

    @property
    def is_integral(self) -> bool:
        return self.D.denominator == 1


def check_block(d: Sequence[int], params: CodeParams) -> BlockIndex:
    if len(d) != params.n:
        raise DimensionMismatch(f"Block index must have {params.n} components, got {len(d)}")
    top = params.blocks_per_axis - 1
    for i, di in enumerate(d, start=1):
        if isinstance(di, bool) or not isinstance(di, int) or not 0 <= di <= top:
            raise RangeViolation(f"Block index d_{i} = {di!r} outside 0..{top}")
    return tuple(d)


def block_bounds(d: Sequence[int], params: CodeParams) -> Tuple[Interval, ...]:
    """Half-open box [d_i M, min((d_i + 1) M, D M)) per axis."""
    d = check_block(d, params)
    limit = params.cube_limit
    return tuple((Fraction(di * params.M), min(Fraction((di + 1) * params.M), limit)) for di in d)


def in_cube(x: Sequence[Fraction], params: CodeParams) -> bool:
    limit = params.cube_limit
    return len(x) == params.n and all(0 <= xi < limit for xi in x)


def block_of(x: Sequence[RationalLike], params: CodeParams) -> BlockIndex:
    """The unique block containing x; d_i = floor(x_i / M)."""
    point = parse_vector(x)
    if len(point) != params.n:
        raise DimensionMismatch(f"Expected a point of dimension {params.n}, got {len(point)}")
    if not in_cube(point, params):
        raise OutOfCube(
            f"Point ({', '.join(format_rational(v) for v in point)}) is outside "
            f"[0, {format_rational(params.cube_limit)})^{params.n}"
        )
    return tuple(int(xi // params.M) for xi in point)


def codebook_size_formula(params: CodeParams, det: Fraction) -> Tuple[Fraction, Fraction]:
    """Full codebook size (D M)^n / |det G| and the per-block maximum M^n / |det G|."""
    if det <= 0:
        raise ParameterError("Determinant must be positive")
    return params.cube_limit**params.n / det, Fraction(params.M) ** params.n / det


def rate(params: CodeParams, det: Fraction) -> float:
    """Information bits per cell, log2(M^n / |det G|) / n."""
    det = parse_rational(det)
    log_det = math.log2(det.numerator) - math.log2(det.denominator)
    return (params.n * math.log2(params.M) - log_det) / params.n


def neighbor_blocks(d: Sequence[int], params: CodeParams) -> List[BlockIndex]:
    """Positive neighbours d + delta, delta in {0,1}^n, in lexicographic order."""
    d = check_block(d, params)
    top = params.blocks_per_axis - 1
    axes = [range(di, min(di + 1, top) + 1) for di in d]
    return [tuple(c) for c in itertools.product(*axes)]


def blocks_above(
    d: Sequence[int], params: CodeParams, cap: int = ENUMERATION_CAP
) -> Iterator[BlockIndex]:
    """Every block d' >= d componentwise, in lexicographic order.

    Blocks below d on some axis cannot hold a codeword >= a state inside block d.
    """
    d = check_block(d, params)
    if params.blocks_per_axis**params.n > cap:
        raise TooLarge(
            f"Full search over {params.blocks_per_axis}^{params.n} blocks exceeds the cap of {cap}"
        )
    axes = [range(di, params.blocks_per_axis) for di in d]
    return (tuple(c) for c in itertools.product(*axes))


def enumerate_codebook(
    lattice: LatticeSpec, params: CodeParams, cap: int = ENUMERATION_CAP
) -> List[Codeword]:
    """Every lattice point of the half-open cube, ordered by (b_1, ..., b_n)."""
    if lattice.n != params.n:
        raise DimensionMismatch(f"Lattice dimension {lattice.n} != code dimension {params.n}")
    full, _ = codebook_size_formula(params, determinant(lattice.generator))
    if full > cap:
        raise TooLarge(f"Codebook of about {math.ceil(full)} points exceeds the cap of {cap}")

    rows = lattice.generator.rows
    limit = params.cube_limit
    n = params.n
    points: List[Codeword] = []
    b: List[int] = [0] * n
    x: List[Fraction] = [Fraction(0)] * n

    def descend(i: int) -> None:
        if i == n:
            point: Vector = tuple(x)
            block = tuple(int(v // params.M) for v in point)
            points.append(Codeword(x=point, b=tuple(b), block=block))
            return
        row = rows[i]
        partial = sum((row[j] * b[j] for j in range(i)), Fraction(0))
        g = row[i]
        # 0 <= partial + g b < limit
        for coefficient in range(math.ceil(-partial / g), math.ceil((limit - partial) / g)):
            b[i] = coefficient
            x[i] = partial + g * coefficient
            descend(i + 1)

    descend(0)
    return points
