from __future__ import annotations

import os
import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from distred.core import Alphabet, Distribution, keep_maximal

settings.register_profile(
    "default",
    deadline=None,
    # the acceptance suite re-runs some class-based property tests on fresh instances
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large, HealthCheck.differing_executors],
    derandomize=True,
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

LETTERS = "abcdefghij"


def D(text: str, alphabet: Distribution | Alphabet | str | None = None) -> Distribution:
    """Shorthand: ``D("ab|bc")``, optionally over another distribution's alphabet."""
    if isinstance(alphabet, Distribution):
        alphabet = alphabet.alphabet
    return Distribution.parse(text, alphabet)


def random_distribution(rng: random.Random, n_symbols: int, max_parts: int | None = None) -> Distribution:
    """Random antichain cover: random subsets, keep maximal, patch uncovered symbols."""
    alphabet = Alphabet(LETTERS[:n_symbols])
    full = alphabet.full
    k = rng.randint(1, max_parts or n_symbols + 1)
    masks = [rng.randint(1, full) for _ in range(k)]
    covered = 0
    for m in masks:
        covered |= m
    for i in range(n_symbols):
        if not covered >> i & 1:
            masks.append(1 << i)
    masks = list(keep_maximal(masks))
    if max_parts is not None and len(masks) > max_parts:
        # fold the surplus into the last kept part
        tail = 0
        for m in masks[max_parts - 1 :]:
            tail |= m
        masks = list(keep_maximal(masks[: max_parts - 1] + [tail]))
    return Distribution(alphabet, masks)


@st.composite
def distributions(draw, min_symbols: int = 1, max_symbols: int = 5, max_parts: int | None = None):
    n = draw(st.integers(min_symbols, max_symbols))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_distribution(random.Random(seed), n, max_parts)


@st.composite
def distribution_pairs(draw, min_symbols: int = 1, max_symbols: int = 5):
    n = draw(st.integers(min_symbols, max_symbols))
    s1, s2 = draw(st.integers(0, 2**32 - 1)), draw(st.integers(0, 2**32 - 1))
    return random_distribution(random.Random(s1), n), random_distribution(random.Random(s2), n)


@pytest.fixture
def four_parts():
    return D("ab|bc|de|ef")


BENCHMARK_ROWS = [
    # (source, reduction exists, mechanism label)
    ("ab|bc|cd|dae", False, "L_cand (app)"),
    ("abe|bc|cd|daf", False, "L_cand (app)"),
    ("abe|bc|cde|da", False, "L_cand"),
    ("abe|bce|cde|dae", False, "L_cand"),
    ("abef|bce|cf|dae", True, "sub"),
    ("ab|bc|ac|df|de|ef", True, "sub"),
    ("abcf|abce|cdef|defg", True, "sub"),
    ("abcf|cde|def|cefg", True, "sub"),
    ("abg|bc|ac|df|de|efg", True, "S sub"),
    ("abcg|cde|def|efg|fgca", True, "S sub"),
    ("abcg|cde|def|efg|cfgh", True, "S sub"),
]
