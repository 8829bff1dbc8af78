from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from pncsim.algebra import AlphabetSpec
from pncsim.channel import ChannelModel, draw_realization, rng_from, transmit_mac
from pncsim.ldpc import construct_regular, encode, syndrome
from pncsim.modem import modulate, pam, psk_gray

ROTATION_8PSK = math.pi / 8


@pytest.fixture(scope="session")
def binary_code():
    return construct_regular(24, 12, 2, 4, AlphabetSpec.binary(), seed=3)


@pytest.fixture(scope="session")
def z4_code():
    return construct_regular(8, 4, 2, 4, AlphabetSpec.ring(4), seed=3)


@pytest.fixture(scope="session")
def gf4_code():
    return construct_regular(8, 4, 2, 4, AlphabetSpec.field(2), seed=3)


@pytest.fixture(scope="session")
def gf8_code():
    return construct_regular(8, 4, 2, 4, AlphabetSpec.field(3), seed=3)


@pytest.fixture
def rotated_8psk():
    return psk_gray(8), psk_gray(8, ROTATION_8PSK)


@pytest.fixture
def same_8psk():
    return psk_gray(8), psk_gray(8)


@pytest.fixture
def pam4_pair():
    return pam(4), pam(4)


def random_codeword(code, rng):
    return encode(code, rng.integers(0, code.alphabet.size, size=code.k))


def transmit_pair(code, constellations, model, seed, noise_var=0.0, binary=False):
    """Two random codewords through the multiple-access channel."""
    rng = rng_from(seed)
    c1, c2 = random_codeword(code, rng), random_codeword(code, rng)
    ca, cb = constellations
    s1 = ca.bits_to_symbols(c1) if binary else c1
    s2 = cb.bits_to_symbols(c2) if binary else c2
    realization = draw_realization(model, len(s1), seed + 1, noise_var)
    y = transmit_mac(modulate(s1, ca), modulate(s2, cb), realization, noise_var, seed + 2)
    return c1, c2, y, realization


@pytest.fixture
def awgn():
    return ChannelModel("awgn")


@pytest.fixture
def fading():
    return ChannelModel("block-rayleigh", blocks=2)


def all_codewords(code):
    """Every word with zero syndrome, found by exhausting the alphabet^n words."""
    q = code.alphabet.size
    words = np.array(list(itertools.product(range(q), repeat=code.n)), dtype=np.int64)
    return words[~syndrome(code, words).any(axis=1)]
