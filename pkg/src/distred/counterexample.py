"""The template counter-example language and an exact oracle for it.

For a distribution with parts ``S_1 .. S_n`` the template is the union of
``n`` commutation classes: class ``j`` holds every word in which each symbol
of ``S_j`` occurs once and every other symbol occurs ``j + 1`` times.  A union
of full commutation classes stays commutation-closed under projection and
synchronous product, so decomposability can be decided on occurrence-count
vectors alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from more_itertools import distinct_permutations

from .core import Alphabet, Distribution, bits
from .errors import CapacityExceeded
from .language import FiniteLanguage, Word, word_cap
from .lattice import CandidateReduction
from .structural import StructuralSession


@dataclass(frozen=True, order=True)
class ExponentVector:
    """Occurrence counts, one per alphabet symbol in alphabet order."""

    counts: tuple[int, ...]
    alphabet: Alphabet = field(compare=False)

    def __str__(self) -> str:
        return " ".join(f"{s}^{c}" for s, c in zip(self.alphabet.symbols, self.counts))

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.alphabet.symbols, self.counts))

    def restrict(self, mask: int) -> tuple[int, ...]:
        return tuple(self.counts[i] for i in bits(mask))

    def length(self) -> int:
        return sum(self.counts)

    def class_size(self) -> int:
        from math import factorial

        size = factorial(self.length())
        for c in self.counts:
            size //= factorial(c)
        return size

    def words(self) -> Iterator[Word]:
        letters = [s for s, c in zip(self.alphabet.symbols, self.counts) for _ in range(c)]
        for p in distinct_permutations(letters):
            yield tuple(p)


@dataclass(frozen=True)
class ParikhUnion:
    """A union of commutation classes, each given by its count vector."""

    alphabet: Alphabet
    classes: tuple[ExponentVector, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def __contains__(self, counts: object) -> bool:
        if isinstance(counts, ExponentVector):
            counts = counts.counts
        return any(c.counts == counts for c in self.classes)

    def materialize(self, cap: int | None = None) -> FiniteLanguage:
        cap = word_cap() if cap is None else cap
        total = sum(c.class_size() for c in self.classes)
        if total > cap:
            raise CapacityExceeded(f"materialising would produce {total} words (cap {cap})")
        return FiniteLanguage((w for c in self.classes for w in c.words()), self.alphabet)


def build_lcand(d: Distribution) -> ParikhUnion:
    n = len(d)
    if n < 2:
        raise ValueError("the template needs a distribution with at least two parts")
    classes = []
    for j, part in enumerate(d.masks, start=1):
        counts = tuple(1 if part >> i & 1 else j + 1 for i in range(len(d.alphabet)))
        classes.append(ExponentVector(counts, d.alphabet))
    return ParikhUnion(d.alphabet, tuple(classes))


def glued_vectors(lang: ParikhUnion, dprime: Distribution) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Yield ``(choice, counts)`` for every consistent way to glue class restrictions.

    ``choice`` holds one 1-based class index per part of ``dprime``; choices
    are produced in lexicographic order, and for each part only the first
    class giving a particular restriction is tried.
    """
    n_sym = len(lang.alphabet)
    options = []
    for part in dprime.masks:
        seen: dict[tuple[int, ...], int] = {}
        for j, c in enumerate(lang.classes, start=1):
            seen.setdefault(c.restrict(part), j)
        options.append([(j, r) for r, j in seen.items()])
    order = [list(bits(p)) for p in dprime.masks]
    counts: list[int | None] = [None] * n_sym
    choice: list[int] = []

    def go(k: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        if k == len(order):
            yield tuple(choice), tuple(counts)  # type: ignore[arg-type]
            return
        for j, restricted in options[k]:
            set_here = []
            ok = True
            for pos, value in zip(order[k], restricted):
                if counts[pos] is None:
                    counts[pos] = value
                    set_here.append(pos)
                elif counts[pos] != value:
                    ok = False
                    break
            if ok:
                choice.append(j)
                yield from go(k + 1)
                choice.pop()
            for pos in set_here:
                counts[pos] = None

    return go(0)


def decomposability_witness(lang: ParikhUnion, dprime: Distribution) -> tuple[tuple[int, ...], ExponentVector] | None:
    """First glued count vector outside ``lang``, or None when decomposable."""
    known = {c.counts for c in lang.classes}
    for choice, counts in glued_vectors(lang, dprime):
        if counts not in known:
            return choice, ExponentVector(counts, lang.alphabet)
    return None


def parikh_decomposable(lang: ParikhUnion, dprime: Distribution) -> bool:
    return decomposability_witness(lang, dprime) is None


@dataclass(frozen=True)
class MemberCertificate:
    """Why the template is decomposable for one member of a candidate."""

    member: Distribution
    rule: str  # "cr", "fixpoint" or "oracle"

    def to_dict(self) -> dict:
        return {"member": str(self.member), "rule": self.rule}


@dataclass(frozen=True)
class RefutationEvidence:
    source: Distribution
    lcand: ParikhUnion
    certificates: tuple[MemberCertificate, ...]
    source_witness: ExponentVector | None
    source_choice: tuple[int, ...] | None

    @property
    def label(self) -> str:
        rules = {c.rule for c in self.certificates}
        if "oracle" in rules:
            return "L_cand (oracle)"
        if "fixpoint" in rules:
            return "L_cand (app)"
        return "L_cand"

    def to_dict(self) -> dict:
        return {
            "kind": "lcand",
            "label": self.label,
            "source": str(self.source),
            "lcand": [str(c) for c in self.lcand.classes],
            "certificates": [c.to_dict() for c in self.certificates],
            "source_witness": None if self.source_witness is None else str(self.source_witness),
            "source_witness_choice": None if self.source_choice is None else list(self.source_choice),
        }


def member_rule(session: StructuralSession, lang: ParikhUnion, member: Distribution) -> str | None:
    """Weakest structural rule proving decomposability, "oracle" if only the oracle does."""
    rule = session.rule_for(member)
    if rule is not None:
        return rule
    return "oracle" if parikh_decomposable(lang, member) else None


def lcand_report(source: Distribution, members: Iterable[Distribution]) -> list[tuple[Distribution, bool, str | None]]:
    """Per member: oracle decomposability and the structural rule that also proves it."""
    lang = build_lcand(source)
    session = StructuralSession(source)
    out = []
    for m in members:
        decomposable = parikh_decomposable(lang, m)
        rule = session.rule_for(m) if decomposable else None
        out.append((m, decomposable, rule or ("oracle" if decomposable else None)))
    return out


def refute_candidate(p: CandidateReduction, session: StructuralSession | None = None) -> RefutationEvidence | None:
    """Evidence that the template separates ``p`` from its source, if it does.

    The template is never decomposable for the source itself, so it refutes
    ``p`` exactly when it is decomposable for every member.
    """
    source = p.source
    if len(source) < 2 or not p.members:
        return None
    lang = build_lcand(source)
    session = session or StructuralSession(source)
    certs = []
    for m in p.members:
        rule = member_rule(session, lang, m)
        if rule is None:
            return None
        certs.append(MemberCertificate(m, rule))
    witness = decomposability_witness(lang, source)
    choice, vec = witness if witness is not None else (None, None)
    return RefutationEvidence(source, lang, tuple(certs), vec, choice)
