from __future__ import annotations

import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import D, distribution_pairs, distributions, random_distribution
from distred.core import (
    Alphabet,
    Distribution,
    IndexPartition,
    all_distributions,
    all_merges,
    covered_by,
    dependence,
    independence,
    join,
    keep_minimal,
    leq_sigma,
    meet,
    meet_all,
    merge,
    merges_with_partitions,
    minimal_merges,
    validate_distribution,
)
from distred.errors import (
    ComparableParts,
    DuplicatePart,
    EmptyPart,
    ImproperPartition,
    NotCovering,
    TrivialResult,
)


def brute_leq(d1: Distribution, d2: Distribution) -> bool:
    p2 = d2.parts
    return all(any(p <= q for q in p2) for p in d1.parts)


def brute_distributions(n: int) -> list[frozenset[frozenset[int]]]:
    subsets = [frozenset(i for i in range(n) if m >> i & 1) for m in range(1, 1 << n)]
    out = []
    for k in range(1, len(subsets) + 1):
        for fam in combinations(subsets, k):
            if frozenset().union(*fam) != frozenset(range(n)):
                continue
            if any(a < b or b < a for a, b in combinations(fam, 2)):
                continue
            out.append(frozenset(fam))
    return out


class TestValidation:
    def test_parse_and_repr(self):
        d = D("ab|bc|de|ef")
        assert str(d) == "(ab|bc|de|ef)"
        assert d.alphabet.symbols == tuple("abcdef")
        assert len(d) == 4

    def test_multi_character_symbols(self):
        d = Distribution.parse("x1 x2|x2 x3")
        assert d.parts == (frozenset({"x1", "x2"}), frozenset({"x2", "x3"}))
        assert str(d) == "({x1,x2}|{x2,x3})"

    @pytest.mark.parametrize(
        "parts, error",
        [
            ([["a", "b"], []], EmptyPart),
            ([["a"]], NotCovering),
            ([["a", "b"], ["a"], ["c"]], ComparableParts),
            ([["a", "b"], ["b", "a"], ["c"]], DuplicatePart),
        ],
    )
    def test_invalid(self, parts, error):
        with pytest.raises(error):
            validate_distribution(parts, Alphabet("abc"))

    def test_unknown_symbol(self):
        with pytest.raises(ValueError):
            validate_distribution([["a", "z"]], Alphabet("a"))

    def test_equality_ignores_part_order(self):
        assert D("ab|bc") == D("bc|ab")
        assert hash(D("ab|bc")) == hash(D("bc|ab"))
        assert D("ab|bc").masks != D("bc|ab").masks

    def test_alphabet_order_matters(self):
        assert D("a|b") != Distribution.parse("a|b", Alphabet("ba"))


class TestOrderAndLattice:
    def test_leq_examples(self):
        d = D("ab|bc|de|ef")
        assert leq_sigma(d, D("abc|def"))
        assert not leq_sigma(D("abc|def"), d)
        assert leq_sigma(d, d)

    def test_meet_of_example_one_members(self):
        d = D("ab|bc|de|ef")
        assert meet(D("abef|bcde"), D("abc|def")) == d
        assert meet_all([D("ab|bcdef"), D("abc|def"), D("abcef|de")]) == d

    def test_meet_keeps_maximal_intersections(self):
        assert meet(D("abc|def"), D("ab|bcdef")) == D("ab|bc|def")

    def test_join(self):
        assert join(D("ab|c"), D("a|bc")) == D("ab|bc")
        assert join(D("ab|bc|de|ef"), D("abc|de|ef")) == D("abc|de|ef")

    @given(distribution_pairs(max_symbols=4))
    def test_meet_is_greatest_lower_bound(self, pair):
        d1, d2 = pair
        m = meet(d1, d2)
        assert brute_leq(m, d1) and brute_leq(m, d2)
        for x in all_distributions(d1.alphabet):
            if brute_leq(x, d1) and brute_leq(x, d2):
                assert brute_leq(x, m)

    @given(distribution_pairs(max_symbols=4))
    def test_join_is_least_upper_bound(self, pair):
        d1, d2 = pair
        j = join(d1, d2)
        assert brute_leq(d1, j) and brute_leq(d2, j)
        for x in all_distributions(d1.alphabet):
            if brute_leq(d1, x) and brute_leq(d2, x):
                assert brute_leq(j, x)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 5))
    @settings(max_examples=300)
    def test_lattice_laws(self, seed, n):
        rng = random.Random(seed)
        a, b, c = (random_distribution(rng, n) for _ in range(3))
        assert meet(a, b) == meet(b, a) and join(a, b) == join(b, a)
        assert meet(meet(a, b), c) == meet(a, meet(b, c))
        assert join(join(a, b), c) == join(a, join(b, c))
        assert meet(a, join(a, b)) == a and join(a, meet(a, b)) == a
        assert meet(a, a) == a == join(a, a)
        assert leq_sigma(a, b) == (meet(a, b) == a) == (join(a, b) == b)

    @given(distribution_pairs(max_symbols=5))
    def test_leq_matches_definition(self, pair):
        d1, d2 = pair
        assert leq_sigma(d1, d2) == brute_leq(d1, d2)


class TestEnumeration:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_all_distributions_against_brute_force(self, n):
        alphabet = Alphabet("abcd"[:n])
        ours = {frozenset(frozenset(alphabet.index(s) for s in p) for p in d.parts) for d in all_distributions(alphabet)}
        assert ours == set(brute_distributions(n))

    def test_all_distributions_counts(self):
        # 1, 2, 9, 114 are cross-checked above; 6894 is frozen from the enumerator
        counts = [sum(1 for _ in all_distributions(Alphabet("abcde"[:n]))) for n in range(1, 6)]
        assert counts == [1, 2, 9, 114, 6894]


class TestIndependence:
    def test_relations_of_two_parts(self):
        d = D("ab|c")
        assert independence(d) == {frozenset("ac"), frozenset("bc")}
        assert ("a", "b") in dependence(d) and ("a", "a") in dependence(d)
        assert ("a", "c") not in dependence(d)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(1, 4))
    @settings(max_examples=500)
    def test_independence_of_meet_is_union(self, seed, n, k):
        rng = random.Random(seed)
        ds = [random_distribution(rng, n) for _ in range(k)]
        union = set()
        for d in ds:
            union |= independence(d)
        assert independence(meet_all(ds)) == union

    def test_covered_by(self):
        d = D("abc|cd")
        assert covered_by("ab", d) and covered_by("cd", d)
        assert not covered_by("ad", d)


class TestMerging:
    def test_merge_example(self):
        d = D("ab|bc|cd|de")
        assert merge(d, IndexPartition([[1, 3], [2], [4]], 4)) == D("abcd|de")

    def test_improper_and_trivial(self):
        d = D("ab|bc|cd|de")
        with pytest.raises(ImproperPartition):
            merge(d, IndexPartition([[1], [2], [3], [4]], 4))
        with pytest.raises(ImproperPartition):
            merge(d, IndexPartition([[1, 2, 3, 4]], 4))
        with pytest.raises(TrivialResult):
            merge(D("ab|bc|ac"), IndexPartition([[1, 2], [3]], 3))

    def test_bottom_of_example_one(self):
        d = D("ab|bc|de|ef")
        bottom = set(minimal_merges(d))
        expected = {D(x, d) for x in ["ab|bc|def", "abc|de|ef", "abde|bc|ef", "abef|bc|de", "ab|bcde|ef", "ab|bcef|de"]}
        assert bottom == expected
        assert set(keep_minimal(bottom)) == expected

    def test_minimal_merges_of_ring5(self):
        d = D("ab|bc|cd|de|ae")
        bottom = keep_minimal(minimal_merges(d))
        assert set(bottom) == {D(x, d) for x in ["abc|cd|de|ae", "ab|bcd|de|ae", "ab|bc|cde|ae", "ab|bc|cd|ade", "abe|bc|cd|de"]}
        assert len(minimal_merges(d)) == 10

    def test_ring3_has_no_merges(self):
        assert minimal_merges(D("ab|bc|ac")) == ()
        assert all_merges(D("ab|bc|ac")) == ()

    @given(distributions(min_symbols=2, max_symbols=5))
    def test_merges_lie_above_and_are_smaller(self, d):
        for m, part in merges_with_partitions(d).items():
            assert leq_sigma(d, m) and m != d
            assert len(m) < len(d)
            assert merge(d, part) == m

    @given(distributions(min_symbols=2, max_symbols=5))
    def test_bottom_generates_all_merges(self, d):
        merged = all_merges(d)
        assert set(keep_minimal(merged)) == set(keep_minimal(minimal_merges(d)))
