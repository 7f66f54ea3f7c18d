from __future__ import annotations

import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import D, LETTERS, random_distribution
from distred.core import Alphabet, Distribution, leq_sigma
from distred.errors import AlphabetMismatch, CapacityExceeded, NotSubstitutable
from distred.language import FiniteLanguage, decomposition_closure, is_decomposable
from distred.lattice import CandidateReduction
from distred.substitution import (
    ProofTrace,
    _substitute_masks,
    saturate,
    shared_symbols,
    strengthened_validate,
    substitutable,
    substitute,
)


@pytest.fixture
def triangles():
    d = D("ab|bc|ac|de|ef|df")
    return d, D("abde|bcef|acdf", d), D("abc|de|ef|df", d)


def test_shared_symbols():
    assert shared_symbols(D("ab|bc|cd")) == {"b", "c"}
    assert shared_symbols(D("ab|cd")) == frozenset()


def test_substitute_basic():
    d = D("abc|cde")
    left = D("ab|bcde", d)
    assert substitutable(left, d, 1)
    assert not substitutable(left, d, 2)
    assert substitute(left, d, 1) == D("ab|bc|cde", d)
    with pytest.raises(NotSubstitutable):
        substitute(left, d, 2)
    with pytest.raises(IndexError):
        substitutable(left, d, 3)
    with pytest.raises(AlphabetMismatch):
        substitutable(D("ab|bc"), d, 1)


def test_substitution_refines_the_right_operand():
    d = D("abcd|cde")
    left = D("ab|bc|cde", d)
    out = substitute(left, d, 1)
    assert leq_sigma(out, d)
    assert out == D("ab|bc|cde", d)


def _generic(left, right, k):
    """Replace part k by its intersections with left, then keep maximal parts."""
    pieces = [right[k] & m for m in left]
    parts = [p for p in list(right[:k]) + pieces + list(right[k + 1 :]) if p]
    return frozenset(p for p in parts if not any(p != q and p & q == p for q in parts))


@settings(max_examples=300)
@given(st.integers(0, 2**32 - 1))
def test_fast_substitution_matches_generic_formula(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    left = random_distribution(rng, n)
    right = random_distribution(rng, n)
    for k in range(len(right)):
        got = _substitute_masks(left.masks, right.masks, k)
        assert frozenset(got) == _generic(left.masks, right.masks, k)


def test_ordinary_saturation_stalls_then_strengthened_succeeds(triangles):
    d, d1, d2 = triangles
    ordinary, strong = strengthened_validate(CandidateReduction(d, [d1, d2]))
    assert ordinary.status == "fixpoint" and ordinary.derived == 0
    assert strong.succeeded and strong.mode == "strengthened"
    trace = strong.trace
    assert trace.replay()
    assert trace.conclusion == d
    assert D("abc|def", d) in {s.left for s in trace.steps}


def test_direct_derivation():
    d = D("ab|bc|de|ef")
    res = saturate([D("abc|def", d), D("abde|bcef", d)], d)
    assert res.succeeded
    assert res.trace.replay()
    assert res.summary()["steps"] == len(res.trace.steps)


def test_goal_among_premises():
    d = D("ab|bc")
    res = saturate([d, D("abc", d)], d)
    assert res.succeeded and res.trace.steps == ()
    assert res.trace.replay()


def test_budget_and_mismatch(triangles):
    d, d1, d2 = triangles
    p = CandidateReduction(d, [d1, d2])
    _, strong = strengthened_validate(p, max_derived=5)
    assert strong.status == "budget" and strong.trace is None
    with pytest.raises(AlphabetMismatch):
        saturate([D("ab|bc")], d)


def test_cancellation(triangles):
    import threading

    d, d1, d2 = triangles
    ev = threading.Event()
    ev.set()
    ordinary, strong = strengthened_validate(CandidateReduction(d, [d1, d2]), cancel=ev)
    assert ordinary.status in {"fixpoint", "cancelled"}


def test_trace_roundtrip(triangles):
    d, d1, d2 = triangles
    _, strong = strengthened_validate(CandidateReduction(d, [d1, d2]))
    data = strong.trace.to_dict()
    again = ProofTrace.from_dict(data, d.alphabet)
    assert again == strong.trace
    assert again.replay()


def test_tampered_trace_fails_replay(triangles):
    d, d1, d2 = triangles
    _, strong = strengthened_validate(CandidateReduction(d, [d1, d2]))
    t = strong.trace
    assert not ProofTrace(t.premises[:1], t.steps, t.conclusion).replay()
    assert not ProofTrace(t.premises, t.steps[:-1], t.conclusion).replay()


def test_saturation_is_deterministic(triangles):
    d, d1, d2 = triangles
    a = strengthened_validate(CandidateReduction(d, [d1, d2]))[1]
    b = strengthened_validate(CandidateReduction(d, [d2, d1]))[1]
    assert a.trace == b.trace and a.derived == b.derived


def _close(lang: FiniteLanguage, ds: list[Distribution], cap: int = 4000) -> FiniteLanguage:
    while True:
        grown = lang
        for d in ds:
            grown = decomposition_closure(grown, d, cap)
        if grown == lang:
            return lang
        lang = grown


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_substitution_preserves_decomposability(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    alphabet = Alphabet(LETTERS[:n])
    left = random_distribution(rng, n)
    right = random_distribution(rng, n)
    ks = [k for k in range(1, len(right) + 1) if substitutable(left, right, k)]
    assume(ks)
    words = {
        "".join(rng.choice(alphabet.symbols) for _ in range(rng.randint(0, 3)))
        for _ in range(rng.randint(1, 5))
    }
    try:
        lang = _close(FiniteLanguage(words, alphabet), [left, right])
    except CapacityExceeded:
        assume(False)
    assert is_decomposable(lang, left) and is_decomposable(lang, right)
    for k in ks:
        assert is_decomposable(lang, substitute(left, right, k))
