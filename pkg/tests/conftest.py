import itertools

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from surjca.symbolic import Alphabet, Sft1D, SlidingBlockMap1D

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def full(s: int) -> Sft1D:
    return Sft1D(Alphabet(tuple(str(i) for i in range(s))))


def random_ca(rng: np.random.Generator, s: int, m: int, left: int = 0) -> SlidingBlockMap1D:
    sft = full(s)
    rule = {w: int(rng.integers(s)) for w in itertools.product(range(s), repeat=m)}
    return SlidingBlockMap1D(sft, sft, left, left + m - 1, rule)


@st.composite
def cellular_automata(draw, max_s=3, max_m=3):
    s = draw(st.integers(2, max_s))
    m = draw(st.integers(1, max_m))
    left = draw(st.integers(-1, 0))
    words = list(itertools.product(range(s), repeat=m))
    values = draw(st.lists(st.integers(0, s - 1), min_size=len(words), max_size=len(words)))
    sft = full(s)
    return SlidingBlockMap1D(sft, sft, left, left + m - 1, dict(zip(words, values)))


@pytest.fixture
def binary():
    return full(2)


@pytest.fixture
def golden():
    return Sft1D.from_strings("01", ["11"])
