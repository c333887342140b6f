import os
import sys
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

# Add the project root to Python path
sys.path.insert(0, str(Path(__file__).parent.parent))

from algebra.free_group import Endo, word_from_syllables
from algebra.loop_subgroup import LoopSubgroup
from algebra.permutation import Permutation

settings.register_profile("ci", deadline=None, max_examples=200)
settings.register_profile("dev", deadline=None, max_examples=40)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


def words(r: int = 3, max_syllables: int = 8):
    """Reduced words of F_r built from random syllables"""
    syllable = st.tuples(st.integers(1, r), st.integers(-3, 3).filter(lambda e: e != 0))
    return st.lists(syllable, max_size=max_syllables).map(lambda pieces: word_from_syllables(r, pieces))


def endos(r: int = 3, max_syllables: int = 4):
    """Endomorphisms of F_r with short random generator images"""
    return st.lists(words(r, max_syllables), min_size=r, max_size=r).map(lambda images: Endo(tuple(images)))


@st.composite
def even_permutations(draw, min_points: int = 3, max_points: int = 8):
    """(permutation, m) with an even permutation on n points and 1 < m < n"""
    n = draw(st.integers(min_points, max_points))
    m = draw(st.integers(2, n - 1))
    p = Permutation.from_mapping(draw(st.permutations(list(range(1, n + 1)))))
    if not p.is_even():
        p = Permutation.from_cycles([(1, 2)], n).compose(p)
    return p, m


@pytest.fixture
def u331():
    return LoopSubgroup((3, 3, 1))


@pytest.fixture
def u221():
    return LoopSubgroup((2, 2, 1))
