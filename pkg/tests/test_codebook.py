import math
from fractions import Fraction

import pytest

from lattice_rewrite.codebook import (
    CodeParams,
    block_bounds,
    block_of,
    blocks_above,
    check_block,
    codebook_size_formula,
    enumerate_codebook,
    in_cube,
    neighbor_blocks,
    rate,
)
from lattice_rewrite.errors import OutOfCube, ParameterError, RangeViolation, TooLarge
from lattice_rewrite.generators import e8_generator, rectangular_generator
from lattice_rewrite.lattice import lattice_point, validate_lattice


def test_params_from_levels_and_blocks():
    params = CodeParams.from_levels(8, 4, 17)
    assert params.D == 4
    assert params.cube_limit == 16
    assert params.is_integral

    fractional = CodeParams.from_blocks(1, 4, "3/2")
    assert fractional.q == 7
    assert fractional.blocks_per_axis == 2
    assert not fractional.is_integral


def test_params_validation():
    with pytest.raises(ParameterError):
        CodeParams(n=2, M=5, D=Fraction(2), q=Fraction(12))
    with pytest.raises(ParameterError):
        CodeParams.from_levels(2, 5, 3)
    with pytest.raises(ParameterError):
        CodeParams.from_blocks(2, 0, 2)


def test_block_bounds_truncated():
    params = CodeParams.from_blocks(1, 4, "3/2")
    assert block_bounds((0,), params) == ((0, 4),)
    assert block_bounds((1,), params) == ((4, 6),)
    with pytest.raises(RangeViolation):
        block_bounds((2,), params)


def test_block_of(skew2_params):
    assert block_of((7, "3/2"), skew2_params) == (1, 0)
    assert block_of(("9.5", "9.5"), skew2_params) == (1, 1)
    assert block_of((0, 5), skew2_params) == (0, 1)
    with pytest.raises(OutOfCube):
        block_of((10, 0), skew2_params)
    with pytest.raises(OutOfCube):
        block_of(("-1/2", 0), skew2_params)


def test_in_cube(skew2_params):
    assert in_cube((Fraction(0), Fraction(19, 2)), skew2_params)
    assert not in_cube((Fraction(0), Fraction(10)), skew2_params)


def test_check_block(skew2_params):
    assert check_block([1, 0], skew2_params) == (1, 0)
    with pytest.raises(RangeViolation):
        check_block((0, 2), skew2_params)


def test_codebook_size_formula(skew2_params):
    assert codebook_size_formula(skew2_params, Fraction(1)) == (100, 25)
    e8_params = CodeParams.from_levels(8, 4, 17)
    assert codebook_size_formula(e8_params, Fraction(1)) == (16**8, 4**8)
    assert codebook_size_formula(CodeParams.from_blocks(2, 5, 2), Fraction(2)) == (50, Fraction(25, 2))


def test_rate(skew2_params):
    assert rate(CodeParams.from_levels(8, 4, 17), Fraction(1)) == pytest.approx(2.0)
    assert rate(skew2_params, Fraction(1)) == pytest.approx(math.log2(5))


def test_neighbor_blocks(skew2_params):
    assert neighbor_blocks((0, 0), skew2_params) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert neighbor_blocks((1, 0), skew2_params) == [(1, 0), (1, 1)]
    assert neighbor_blocks((1, 1), skew2_params) == [(1, 1)]


def test_blocks_above():
    params = CodeParams.from_blocks(2, 1, 3)
    assert list(blocks_above((1, 0), params)) == [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]
    with pytest.raises(TooLarge):
        blocks_above((0,) * 8, CodeParams.from_blocks(8, 4, 16))


def test_skew2_codebook(skew2_lattice, skew2_params):
    codewords = enumerate_codebook(skew2_lattice, skew2_params)
    assert len(codewords) == 100
    assert len({c.x for c in codewords}) == 100
    for c in codewords:
        assert in_cube(c.x, skew2_params)
        assert lattice_point(skew2_lattice.generator, c.b) == c.x
        assert c.block == block_of(c.x, skew2_params)
    per_block = {}
    for c in codewords:
        per_block[c.block] = per_block.get(c.block, 0) + 1
    assert per_block == {(0, 0): 25, (0, 1): 25, (1, 0): 25, (1, 1): 25}


@pytest.mark.parametrize("M, D", [(3, 2), (2, 3), (5, 2)])
def test_rect2_codebook_fills_the_cube(M, D):
    lattice = validate_lattice(rectangular_generator(2), M)
    codewords = enumerate_codebook(lattice, CodeParams.from_blocks(2, M, D))
    assert len(codewords) == (D * M) ** 2
    assert {c.x for c in codewords} == {
        (Fraction(i), Fraction(j)) for i in range(D * M) for j in range(D * M)
    }


def test_every_codeword_decodes_to_a_word_of_its_block(skew2_keyed, skew2_params):
    seen = set()
    for c in enumerate_codebook(skew2_keyed.lattice, skew2_params):
        u = skew2_keyed.decode(c.x)
        assert all(0 <= ui < r for ui, r in zip(u, skew2_keyed.radices))
        assert skew2_keyed.encode(u, c.block).x == c.x
        seen.add((u, c.block))
    assert len(seen) == 100


def test_single_cell_codebooks():
    line = validate_lattice(rectangular_generator(1), 2)
    codewords = enumerate_codebook(line, CodeParams.from_blocks(1, 2, 1))
    assert [c.x for c in codewords] == [(0,), (1,)]

    line = validate_lattice(rectangular_generator(1), 4)
    codewords = enumerate_codebook(line, CodeParams.from_blocks(1, 4, "3/2"))
    assert [c.x[0] for c in codewords] == list(range(6))


def test_e8_codebook_too_large():
    lattice = validate_lattice(e8_generator(), 16)
    with pytest.raises(TooLarge) as exc:
        enumerate_codebook(lattice, CodeParams.from_blocks(8, 16, 16))
    assert exc.value.exit_code == 5
