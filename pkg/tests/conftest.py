import pytest

from lattice_rewrite.codebook import CodeParams
from lattice_rewrite.codec import Codec
from lattice_rewrite.generators import e8_generator, rectangular_generator, skew2_generator
from lattice_rewrite.lattice import validate_lattice


@pytest.fixture(scope="session")
def skew2_lattice():
    return validate_lattice(skew2_generator(), 5)


@pytest.fixture(scope="session")
def skew2_params():
    return CodeParams.from_blocks(2, 5, 2)


@pytest.fixture(scope="session")
def skew2_plain(skew2_lattice, skew2_params):
    """The skew2 code with every hash vector forced to zero."""
    return Codec(skew2_lattice, skew2_params, hash_off=True)


@pytest.fixture(scope="session")
def skew2_keyed(skew2_lattice, skew2_params):
    return Codec(skew2_lattice, skew2_params, key=0x5EED)


@pytest.fixture(scope="session")
def e8_lattice():
    return validate_lattice(e8_generator(), 4)


@pytest.fixture(scope="session")
def e8_codec(e8_lattice):
    return Codec(e8_lattice, CodeParams.from_levels(8, 4, 17), key=2024)


@pytest.fixture(scope="session")
def unit_line():
    """rect(1) with M = 1: one information word and one codeword per block."""

    def build(D):
        return Codec(validate_lattice(rectangular_generator(1), 1), CodeParams.from_blocks(1, 1, D))

    return build
