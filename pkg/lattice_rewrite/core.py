from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

Vector = Tuple[Fraction, ...]
IntVector = Tuple[int, ...]
BlockIndex = Tuple[int, ...]
InfoWord = Tuple[int, ...]
HashedWord = Tuple[int, ...]


@dataclass(frozen=True)
class Codeword:
    """A lattice point x = G b inside the cube, with its coefficients and block."""

    x: Vector
    b: Optional[IntVector] = None
    block: Optional[BlockIndex] = None

    @property
    def n(self) -> int:
        return len(self.x)
