"""Block-keyed hashing, cube-shaped encoding, exact decoding and rewrite selection.

Encoding a hashed word ``a`` into block ``d`` fixes ``b_i = a_i + r_i k_i`` one
coordinate at a time, with ``k_i`` the unique integer that puts
``x_i = sum_{j<i} g_ij b_j + g_ii b_i`` into ``[d_i M, (d_i + 1) M)``.

:class:`Codec` does this on integers scaled by the lcm of every denominator in G
and in D*M, so the hot path is exact without touching Fraction.
"""

from __future__ import annotations

import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .codebook import (
    ENUMERATION_CAP,
    CodeParams,
    block_of,
    blocks_above,
    check_block,
    in_cube,
    neighbor_blocks,
)
from .core import BlockIndex, Codeword, HashedWord, InfoWord, IntVector, Vector
from .errors import (
    DimensionMismatch,
    MemoryFull,
    OutOfCube,
    ParameterError,
    Phantom,
    RangeViolation,
)
from .lattice import LatticeSpec, RationalLike, format_vector, parse_vector, solve_triangular

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULTIPLIER_1 = 0xBF58476D1CE4E5B9
MIX_MULTIPLIER_2 = 0x94D049BB133111EB


class Strategy(str, Enum):
    neighbors = "neighbors"
    full = "full"


def mix64(value: int) -> int:
    """SplitMix64 finaliser applied to value + golden gamma (mod 2^64)."""
    v = (value + GOLDEN_GAMMA) & MASK64
    v = ((v ^ (v >> 30)) * MIX_MULTIPLIER_1) & MASK64
    v = ((v ^ (v >> 27)) * MIX_MULTIPLIER_2) & MASK64
    return v ^ (v >> 31)


def check_key(key: int) -> int:
    if isinstance(key, bool) or not isinstance(key, int) or not 0 <= key <= MASK64:
        raise ParameterError(f"Hash key must be a 64-bit unsigned integer, got {key!r}")
    return key


def check_word(word: Sequence[int], lattice: LatticeSpec, label: str = "u") -> Tuple[int, ...]:
    """Validate a mixed-radix word against the radices r_i = M / g_ii."""
    if len(word) != lattice.n:
        raise DimensionMismatch(f"Word {label} must have {lattice.n} components, got {len(word)}")
    for i, (value, radix) in enumerate(zip(word, lattice.radices), start=1):
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < radix:
            raise RangeViolation(f"{label}_{i} = {value!r} outside 0..{radix - 1}")
    return tuple(word)


def hash_vector(key: int, d: Sequence[int], lattice: LatticeSpec) -> IntVector:
    """Hash vector m for block d: chain mix64 over d_j + 1, then one draw per coordinate."""
    z = check_key(key)
    for dj in d:
        z = mix64(z ^ (dj + 1))
    return tuple(mix64(z ^ i) % radix for i, radix in enumerate(lattice.radices, start=1))


def apply_hash(u: Sequence[int], m: Sequence[int], lattice: LatticeSpec) -> HashedWord:
    """a_i = (u_i + m_i) mod r_i."""
    u = check_word(u, lattice, "u")
    m = check_word(m, lattice, "m")
    return tuple((ui + mi) % r for ui, mi, r in zip(u, m, lattice.radices))


def unhash(a: Sequence[int], m: Sequence[int], lattice: LatticeSpec) -> InfoWord:
    """u_i = (a_i - m_i) mod r_i, the inverse of apply_hash."""
    a = check_word(a, lattice, "a")
    m = check_word(m, lattice, "m")
    return tuple((ai - mi) % r for ai, mi, r in zip(a, m, lattice.radices))


def remaining_volume(x: Sequence[RationalLike], params: CodeParams) -> Fraction:
    """prod_i (M D - x_i): the volume still writable above x."""
    limit = params.cube_limit
    return math.prod((limit - xi for xi in parse_vector(x)), start=Fraction(1))


class Codec:
    """Encoder/decoder context for one memory: lattice, parameters and hash key.

    ``hash_off`` forces m = 0 in every block, which leaves the plain linear
    construction.
    """

    def __init__(
        self,
        lattice: LatticeSpec,
        params: CodeParams,
        key: int = 0,
        *,
        hash_off: bool = False,
    ):
        if lattice.n != params.n:
            raise DimensionMismatch(f"Lattice dimension {lattice.n} != code dimension {params.n}")
        if lattice.M != params.M:
            raise ParameterError(f"Lattice was validated for M={lattice.M}, code uses M={params.M}")
        self.lattice = lattice
        self.params = params
        self.key = check_key(key)
        self.hash_off = hash_off

        rows = lattice.generator.rows
        denominators = [g.denominator for row in rows for g in row]
        denominators.append(params.cube_limit.denominator)
        self._scale = math.lcm(*denominators)
        self._lower: List[Tuple[Tuple[int, int], ...]] = [
            tuple((j, int(rows[i][j] * self._scale)) for j in range(i) if rows[i][j] != 0)
            for i in range(lattice.n)
        ]
        self._diag = tuple(int(rows[i][i] * self._scale) for i in range(lattice.n))
        self._step = params.M * self._scale
        self._limit = int(params.cube_limit * self._scale)
        self._zero = (0,) * lattice.n
        self._hash_cache: Dict[BlockIndex, IntVector] = {}

    @property
    def n(self) -> int:
        return self.lattice.n

    @property
    def radices(self) -> IntVector:
        return self.lattice.radices

    def hash_vector(self, d: BlockIndex) -> IntVector:
        if self.hash_off:
            return self._zero
        m = self._hash_cache.get(d)
        if m is None:
            m = hash_vector(self.key, d, self.lattice)
            self._hash_cache[d] = m
        return m

    def _hashed(self, u: Sequence[int], d: BlockIndex) -> HashedWord:
        m = self.hash_vector(d)
        return tuple((ui + mi) % r for ui, mi, r in zip(u, m, self.radices))

    def _place(
        self,
        a: Sequence[int],
        d: Sequence[int],
        floor: Optional[Sequence[int]] = None,
    ) -> Optional[Tuple[IntVector, IntVector]]:
        """Scaled (b, X) for hashed word a in block d.

        None when the point leaves the cube (phantom) or, given a floor, drops
        below it on some coordinate.
        """
        step = self._step
        b: List[int] = []
        X: List[int] = []
        for i, lower in enumerate(self._lower):
            partial = 0
            for j, g in lower:
                partial += g * b[j]
            offset = partial + self._diag[i] * a[i] - d[i] * step
            k = -(offset // step)
            xi = offset + k * step + d[i] * step
            if xi >= self._limit:
                return None
            if floor is not None and xi < floor[i]:
                return None
            b.append(a[i] + self.radices[i] * k)
            X.append(xi)
        return tuple(b), tuple(X)

    def _codeword(self, d: BlockIndex, b: IntVector, X: IntVector) -> Codeword:
        scale = self._scale
        return Codeword(x=tuple(Fraction(xi, scale) for xi in X), b=b, block=d)

    def encode_in_block(self, a: Sequence[int], d: Sequence[int]) -> Codeword:
        """Place hashed word a in block d; Phantom if a truncated block pushes it out."""
        a = check_word(a, self.lattice, "a")
        d = check_block(d, self.params)
        placed = self._place(a, d)
        if placed is None:
            raise Phantom(f"Encoding of a={a} in block {d} falls outside the cube")
        return self._codeword(d, *placed)

    def encode(self, u: Sequence[int], d: Sequence[int]) -> Codeword:
        """Hash u with block d's vector, then encode into block d."""
        u = check_word(u, self.lattice, "u")
        d = check_block(d, self.params)
        return self.encode_in_block(self._hashed(u, d), d)

    def decode(self, x: Sequence[RationalLike]) -> InfoWord:
        """Recover u from a codebook point: b = G^-1 x, a = b mod r, then unhash."""
        point = parse_vector(x)
        if len(point) != self.n:
            raise DimensionMismatch(f"Expected a point of dimension {self.n}, got {len(point)}")
        b = solve_triangular(self.lattice.generator, point)
        d = block_of(point, self.params)
        a = tuple(bi % r for bi, r in zip(b, self.radices))
        return tuple((ai - mi) % r for ai, mi, r in zip(a, self.hash_vector(d), self.radices))

    def _state_floor(self, s: Sequence[RationalLike]) -> Tuple[Vector, IntVector]:
        state = parse_vector(s)
        if len(state) != self.n:
            raise DimensionMismatch(f"State must have {self.n} cells, got {len(state)}")
        if not in_cube(state, self.params):
            raise OutOfCube(f"State {format_vector(state)} is outside the cube")
        return state, tuple(math.ceil(si * self._scale) for si in state)

    def candidate_blocks(self, s: Sequence[RationalLike], strategy: Strategy) -> Iterable[BlockIndex]:
        here = block_of(s, self.params)
        strategy = Strategy(strategy)
        if strategy is Strategy.neighbors:
            return neighbor_blocks(here, self.params)
        return blocks_above(here, self.params, ENUMERATION_CAP)

    def select_rewrite(
        self,
        u: Sequence[int],
        s: Sequence[RationalLike],
        strategy: Strategy = Strategy.neighbors,
        *,
        allow_equal: bool = True,
    ) -> Codeword:
        """Best codeword for u that only raises cells above state s.

        Among candidate blocks, keep encodings x[d] >= s inside the cube and return
        the one with the largest remaining volume; ties go to the smallest d.
        ``allow_equal=False`` additionally rejects x == s.
        """
        u = check_word(u, self.lattice, "u")
        state, floor = self._state_floor(s)
        exact = all((si * self._scale).denominator == 1 for si in state)
        current = floor if exact else None

        best: Optional[Tuple[BlockIndex, IntVector, IntVector]] = None
        best_volume = -1
        for d in self.candidate_blocks(state, strategy):
            placed = self._place(self._hashed(u, d), d, floor)
            if placed is None:
                continue
            b, X = placed
            if not allow_equal and X == current:
                continue
            volume = math.prod(self._limit - xi for xi in X)
            if volume > best_volume:
                best, best_volume = (d, b, X), volume
        if best is None:
            raise MemoryFull(
                f"No {Strategy(strategy).value} candidate for u={u} above state {format_vector(state)}"
            )
        return self._codeword(*best)

    def full_search_oracle(
        self, u: Sequence[int], s: Sequence[RationalLike], *, allow_equal: bool = True
    ) -> Codeword:
        """select_rewrite over every block; the reference for the neighbour search."""
        return self.select_rewrite(u, s, Strategy.full, allow_equal=allow_equal)


def encode_in_block(
    a: Sequence[int], d: Sequence[int], lattice: LatticeSpec, params: CodeParams
) -> Codeword:
    return Codec(lattice, params, hash_off=True).encode_in_block(a, d)


def decode(
    x: Sequence[RationalLike],
    lattice: LatticeSpec,
    params: CodeParams,
    key: int = 0,
    *,
    hash_off: bool = False,
) -> InfoWord:
    return Codec(lattice, params, key, hash_off=hash_off).decode(x)


def select_rewrite(
    u: Sequence[int],
    s: Sequence[RationalLike],
    lattice: LatticeSpec,
    params: CodeParams,
    key: int = 0,
    strategy: Strategy = Strategy.neighbors,
    *,
    hash_off: bool = False,
    allow_equal: bool = True,
) -> Codeword:
    codec = Codec(lattice, params, key, hash_off=hash_off)
    return codec.select_rewrite(u, s, strategy, allow_equal=allow_equal)


def full_search_oracle(
    u: Sequence[int],
    s: Sequence[RationalLike],
    lattice: LatticeSpec,
    params: CodeParams,
    key: int = 0,
    *,
    hash_off: bool = False,
    allow_equal: bool = True,
) -> Codeword:
    codec = Codec(lattice, params, key, hash_off=hash_off)
    return codec.full_search_oracle(u, s, allow_equal=allow_equal)
