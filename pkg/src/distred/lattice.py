"""Candidate reductions and the lattice they form under ``leq_delta``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from itertools import combinations
from typing import Iterable, Iterator

from .core import Distribution, all_merges, keep_minimal, leq_sigma, meet_all
from .errors import AlphabetMismatch, EmptyCandidate, SourceMismatch


class CandidateReduction:
    """A source distribution together with a set of pairwise incomparable members.

    Members are normalised with :func:`keep_minimal` on construction and stored
    in canonical order.  Members are not required to be merges of the source;
    use :meth:`in_search_space` to check that.
    """

    __slots__ = ("source", "members", "_key")

    def __init__(self, source: Distribution, members: Iterable[Distribution]):
        members = list(members)
        for m in members:
            if m.alphabet != source.alphabet:
                raise AlphabetMismatch(f"{m} is not over the alphabet of {source}")
        self.source = source
        self.members = tuple(sorted(keep_minimal(members), key=lambda d: d.sort_key))
        self._key = frozenset(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Distribution]:
        return iter(self.members)

    def __contains__(self, d: object) -> bool:
        return d in self._key

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CandidateReduction)
            and self.source == other.source
            and self._key == other._key
        )

    def __hash__(self) -> int:
        return hash((self.source, self._key))

    def __repr__(self) -> str:
        return "{" + ", ".join(map(str, self.members)) + "}"

    @property
    def sort_key(self):
        return tuple(m.sort_key for m in self.members)

    def in_search_space(self) -> bool:
        merged = set(all_merges(self.source))
        return all(m in merged for m in self.members)

    def meet(self) -> Distribution:
        return meet_all(self.members)


@total_ordering
@dataclass(frozen=True)
class Dimension:
    """``(height, width)`` of a candidate; ordering prefers small width first."""

    height: int
    width: int

    def __lt__(self, other: Dimension) -> bool:
        return (self.width, self.height) < (other.width, other.height)

    def __str__(self) -> str:
        return f"({self.height}, {self.width})"


def _same_source(p: CandidateReduction, q: CandidateReduction) -> Distribution:
    if p.source != q.source:
        raise SourceMismatch(f"candidates over different sources {p.source} and {q.source}")
    return p.source


def leq_delta(p: CandidateReduction, q: CandidateReduction) -> bool:
    """True iff every member of ``q`` lies above some member of ``p``."""
    _same_source(p, q)
    return all(any(leq_sigma(a, b) for a in p.members) for b in q.members)


def cr_meet(p: CandidateReduction, q: CandidateReduction) -> CandidateReduction:
    return CandidateReduction(_same_source(p, q), p.members + q.members)


def cr_join(p: CandidateReduction, q: CandidateReduction) -> CandidateReduction:
    source = _same_source(p, q)
    joins = {a | b for a in p.members for b in q.members}
    above = [m for m in all_merges(source) if any(leq_sigma(j, m) for j in joins)]
    return CandidateReduction(source, above)


def upward_set(p: CandidateReduction) -> tuple[Distribution, ...]:
    """Merges of the source lying above at least one member of ``p``."""
    return tuple(
        m for m in all_merges(p.source) if any(leq_sigma(a, m) for a in p.members)
    )


def is_meet_consistent(p: CandidateReduction) -> bool:
    return bool(p.members) and p.meet() == p.source


def is_minimal_meet_consistent(p: CandidateReduction) -> bool:
    if not is_meet_consistent(p):
        return False
    # meet only grows when members are removed, so checking the |p|-1 subsets suffices
    return all(
        meet_all(sub) != p.source
        for sub in combinations(p.members, len(p.members) - 1)
        if sub
    )


def dimension(p: CandidateReduction) -> Dimension:
    if not p.members:
        raise EmptyCandidate("the empty candidate has no dimension")
    return Dimension(len(p.members), max(len(m) for m in p.members))


def compare_optimality(p: CandidateReduction, q: CandidateReduction) -> int:
    """Negative if ``p`` is preferred, positive if ``q`` is, zero on a tie."""
    dp, dq = dimension(p), dimension(q)
    return (dp > dq) - (dp < dq)


def enumerate_search_space(source: Distribution) -> Iterator[CandidateReduction]:
    """Every element of the candidate lattice, including the empty candidate.

    Doubly exponential; meant for exhaustive checks on tiny sources.
    """
    merged = list(all_merges(source))
    n = len(merged)
    comparable = [[i != j and (leq_sigma(merged[i], merged[j]) or leq_sigma(merged[j], merged[i])) for j in range(n)] for i in range(n)]

    def extend(start: int, chosen: list[int]) -> Iterator[list[int]]:
        yield chosen
        for k in range(start, n):
            if any(comparable[k][c] for c in chosen):
                continue
            chosen.append(k)
            yield from extend(k + 1, chosen)
            chosen.pop()

    for idx in extend(0, []):
        yield CandidateReduction(source, [merged[i] for i in idx])
