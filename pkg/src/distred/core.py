"""Alphabets, distributions and the lattice of distributions.

Sub-alphabets are stored as integer bitmasks over the symbol order fixed by an
:class:`Alphabet`.  A :class:`Distribution` keeps its parts in the order it was
built with, because several constructions (merge partitions, the counter
example template, the distinctive-index map) refer to parts by position.
Equality and hashing ignore that order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from more_itertools import set_partitions

from .errors import (
    AlphabetMismatch,
    ComparableParts,
    DuplicatePart,
    EmptyPart,
    ImproperPartition,
    NotCovering,
    SizeCapExceeded,
    TrivialResult,
)

DEFAULT_MERGE_CAP = 9


def merge_cap() -> int:
    return int(os.environ.get("DISTRED_MERGE_CAP", DEFAULT_MERGE_CAP))


def bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class Alphabet:
    """An ordered, duplicate-free set of symbols."""

    __slots__ = ("symbols", "_index", "full")

    def __init__(self, symbols: Iterable[str]):
        symbols = tuple(symbols)
        if not symbols:
            raise ValueError("an alphabet needs at least one symbol")
        index = {}
        for i, s in enumerate(symbols):
            if not isinstance(s, str) or not s:
                raise ValueError(f"invalid symbol {s!r}")
            if s in index:
                raise ValueError(f"duplicate symbol {s!r}")
            index[s] = i
        self.symbols = symbols
        self._index = index
        self.full = (1 << len(symbols)) - 1

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"Alphabet({' '.join(self.symbols)!r})"

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} is not in {self!r}") from None

    def mask(self, symbols: Iterable[str] | int) -> int:
        if isinstance(symbols, int):
            if symbols & ~self.full:
                raise ValueError("mask has bits outside the alphabet")
            return symbols
        m = 0
        for s in symbols:
            m |= 1 << self.index(s)
        return m

    def members(self, mask: int) -> tuple[str, ...]:
        return tuple(self.symbols[i] for i in bits(mask))

    def subset(self, mask: int) -> frozenset[str]:
        return frozenset(self.members(mask))

    def restrict(self, mask: int) -> Alphabet:
        """The sub-alphabet ``mask`` as an alphabet of its own, order preserved."""
        return Alphabet(self.members(mask))

    def format_mask(self, mask: int) -> str:
        members = self.members(mask)
        if self.single_char:
            return "".join(members)
        return "{" + ",".join(members) + "}"


def _part_key(mask: int) -> tuple[int, ...]:
    return tuple(bits(mask))


def keep_maximal(masks: Iterable[int]) -> tuple[int, ...]:
    """Drop duplicates and strict subsets, preserving first-occurrence order."""
    uniq: list[int] = []
    seen = set()
    for m in masks:
        if m not in seen:
            seen.add(m)
            uniq.append(m)
    return tuple(
        m for m in uniq if not any(o != m and m & o == m for o in uniq)
    )


def canonical_masks(masks: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(masks, key=_part_key))


class Distribution:
    """A cover of an alphabet by pairwise incomparable non-empty sub-alphabets.

    Build validated instances with :func:`validate_distribution` or
    :meth:`Distribution.parse`; the bare constructor trusts its input.
    """

    __slots__ = ("alphabet", "masks", "key", "_hash", "_shared")

    def __init__(self, alphabet: Alphabet, masks: Sequence[int]):
        self.alphabet = alphabet
        self.masks = tuple(masks)
        self.key = frozenset(self.masks)
        self._hash = hash((alphabet, self.key))
        self._shared: int | None = None

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet | Iterable[str] | None = None) -> Distribution:
        """Parse ``"ab|bc|de"`` (single-character symbols) or ``"a0 a1|a1 a2"``.

        Without an explicit alphabet, symbols are ordered by first appearance
        after sorting, so ``"bc|ab"`` is over ``abc``.
        """
        chunks = [c.strip() for c in text.strip().strip("()").split("|")]
        parts = []
        for chunk in chunks:
            chunk = chunk.strip("{}")
            if " " in chunk or "," in chunk:
                parts.append([s for s in chunk.replace(",", " ").split() if s])
            else:
                parts.append(list(chunk))
        if alphabet is None:
            alphabet = Alphabet(sorted({s for p in parts for s in p}))
        elif not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        return validate_distribution(parts, alphabet)

    def __len__(self) -> int:
        return len(self.masks)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Distribution)
            and self._hash == other._hash
            and self.key == other.key
            and self.alphabet == other.alphabet
        )

    def __hash__(self) -> int:
        return self._hash

    def __le__(self, other: Distribution) -> bool:
        return leq_sigma(self, other)

    def __lt__(self, other: Distribution) -> bool:
        return self != other and leq_sigma(self, other)

    def __and__(self, other: Distribution) -> Distribution:
        return meet(self, other)

    def __or__(self, other: Distribution) -> Distribution:
        return join(self, other)

    def __repr__(self) -> str:
        return "(" + "|".join(self.alphabet.format_mask(m) for m in self.masks) + ")"

    __str__ = __repr__

    @property
    def size(self) -> int:
        return len(self.masks)

    @property
    def parts(self) -> tuple[frozenset[str], ...]:
        return tuple(self.alphabet.subset(m) for m in self.masks)

    @property
    def sort_key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_part_key(m) for m in canonical_masks(self.masks))

    def canonical(self) -> Distribution:
        return Distribution(self.alphabet, canonical_masks(self.masks))

    def is_trivial(self) -> bool:
        return len(self.masks) == 1

    def index_of(self, part: Iterable[str]) -> int:
        """1-based position of ``part`` in this distribution."""
        m = self.alphabet.mask(part)
        try:
            return self.masks.index(m) + 1
        except ValueError:
            raise ValueError(f"{set(part)} is not a part of {self}") from None

    def to_lists(self) -> list[list[str]]:
        return [list(self.alphabet.members(m)) for m in self.masks]

    @property
    def shared_mask(self) -> int:
        """Symbols that occur in at least two parts."""
        if self._shared is None:
            seen = shared = 0
            for m in self.masks:
                shared |= seen & m
                seen |= m
            self._shared = shared
        return self._shared


def validate_distribution(parts: Iterable[Iterable[str]], sigma: Alphabet) -> Distribution:
    masks = []
    for p in parts:
        m = sigma.mask(p)
        if m == 0:
            raise EmptyPart("distribution parts must be non-empty")
        if m in masks:
            raise DuplicatePart(f"duplicate part {sigma.format_mask(m)}")
        masks.append(m)
    if not masks:
        raise EmptyPart("a distribution needs at least one part")
    union = 0
    for m in masks:
        union |= m
    if union != sigma.full:
        missing = sigma.format_mask(sigma.full & ~union)
        raise NotCovering(f"parts do not cover the alphabet (missing {missing})")
    for a, b in combinations(masks, 2):
        if a & b == a or a & b == b:
            raise ComparableParts(
                f"parts {sigma.format_mask(a)} and {sigma.format_mask(b)} are comparable"
            )
    return Distribution(sigma, masks)


def _same_alphabet(*ds: Distribution) -> Alphabet:
    alphabet = ds[0].alphabet
    for d in ds[1:]:
        if d.alphabet != alphabet:
            raise AlphabetMismatch(f"{ds[0]} and {d} are over different alphabets")
    return alphabet


def _covered(mask: int, masks: Sequence[int]) -> bool:
    return any(mask & q == mask for q in masks)


def leq_sigma(d1: Distribution, d2: Distribution) -> bool:
    """True iff every part of ``d1`` is contained in some part of ``d2``."""
    _same_alphabet(d1, d2)
    return all(_covered(p, d2.masks) for p in d1.masks)


def meet(d1: Distribution, d2: Distribution) -> Distribution:
    alphabet = _same_alphabet(d1, d2)
    inter = [p & q for p in d1.masks for q in d2.masks]
    return Distribution(alphabet, canonical_masks(keep_maximal(m for m in inter if m)))


def join(d1: Distribution, d2: Distribution) -> Distribution:
    alphabet = _same_alphabet(d1, d2)
    return Distribution(alphabet, canonical_masks(keep_maximal(d1.masks + d2.masks)))


def meet_all(ds: Iterable[Distribution]) -> Distribution:
    it = iter(ds)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("meet of an empty family is undefined") from None
    for d in it:
        acc = meet(acc, d)
    return acc


def adjacency(d: Distribution) -> tuple[int, ...]:
    """Per-symbol mask of the symbols sharing a part with it (itself included)."""
    adj = [0] * len(d.alphabet)
    for m in d.masks:
        for i in bits(m):
            adj[i] |= m
    return tuple(adj)


def dependence(d: Distribution) -> frozenset[tuple[str, str]]:
    syms = d.alphabet.symbols
    adj = adjacency(d)
    return frozenset((syms[i], syms[j]) for i in range(len(syms)) for j in bits(adj[i]))


def independence(d: Distribution) -> frozenset[frozenset[str]]:
    """Unordered pairs of symbols that never share a part."""
    syms = d.alphabet.symbols
    adj = adjacency(d)
    full = d.alphabet.full
    return frozenset(
        frozenset((syms[i], syms[j]))
        for i in range(len(syms))
        for j in bits(full & ~adj[i])
        if i < j
    )


def independence_masks(d: Distribution) -> frozenset[int]:
    """Independent pairs encoded as two-bit masks."""
    adj = adjacency(d)
    full = d.alphabet.full
    return frozenset(
        (1 << i) | (1 << j) for i in range(len(adj)) for j in bits(full & ~adj[i]) if i < j
    )


def covered_by(s: Iterable[str] | int, d: Distribution) -> bool:
    return _covered(d.alphabet.mask(s), d.masks)


@dataclass(frozen=True)
class IndexPartition:
    """A partition of the part indices ``1..n`` of a distribution."""

    blocks: tuple[frozenset[int], ...]
    n: int

    def __init__(self, blocks: Iterable[Iterable[int]], n: int):
        blocks = tuple(frozenset(b) for b in blocks)
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ImproperPartition("partition blocks must be non-empty")
            if seen & b:
                raise ImproperPartition("partition blocks overlap")
            seen |= b
        if seen != set(range(1, n + 1)):
            raise ImproperPartition(f"blocks do not partition [1, {n}]")
        blocks = tuple(sorted(blocks, key=min))
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "n", n)

    def is_proper(self) -> bool:
        return 2 <= len(self.blocks) < self.n

    def __str__(self) -> str:
        return "{" + ", ".join("{" + ", ".join(map(str, sorted(b))) + "}" for b in self.blocks) + "}"


def _merge_masks(masks: Sequence[int], blocks: Iterable[Iterable[int]]) -> tuple[int, ...]:
    """Union parts per block (0-based indices) then keep maximal parts."""
    unions = []
    for block in sorted((sorted(b) for b in blocks), key=lambda b: b[0]):
        u = 0
        for i in block:
            u |= masks[i]
        unions.append(u)
    return keep_maximal(unions)


def merge(d: Distribution, p: IndexPartition) -> Distribution:
    if p.n != len(d):
        raise ImproperPartition(f"partition is over [1, {p.n}] but {d} has {len(d)} parts")
    if not p.is_proper():
        raise ImproperPartition("merging needs at least two blocks and must combine some parts")
    merged = _merge_masks(d.masks, ([i - 1 for i in b] for b in p.blocks))
    if len(merged) == 1:
        raise TrivialResult(f"merging {d} by {p} collapses to the whole alphabet")
    return Distribution(d.alphabet, merged)


def minimal_merges(d: Distribution) -> tuple[Distribution, ...]:
    """Distributions obtained by merging exactly two parts, trivial results dropped."""
    out: dict[Distribution, None] = {}
    n = len(d)
    for i, j in combinations(range(n), 2):
        blocks = [[i, j]] + [[k] for k in range(n) if k not in (i, j)]
        merged = _merge_masks(d.masks, blocks)
        if len(merged) > 1:
            out.setdefault(Distribution(d.alphabet, merged))
    return tuple(out)


_MERGE_CACHE: dict[tuple[Alphabet, tuple[int, ...]], dict[Distribution, IndexPartition]] = {}


def merges_with_partitions(d: Distribution, cap: int | None = None) -> dict[Distribution, IndexPartition]:
    """Every merged distribution of ``d`` mapped to the first partition producing it."""
    cap = merge_cap() if cap is None else cap
    n = len(d)
    if n > cap:
        raise SizeCapExceeded(f"{d} has {n} parts; merge enumeration is capped at {cap}")
    cache_key = (d.alphabet, d.masks)
    cached = _MERGE_CACHE.get(cache_key)
    if cached is not None:
        return cached
    out: dict[Distribution, IndexPartition] = {}
    if n >= 3:
        for blocks in set_partitions(range(n)):
            if len(blocks) < 2 or len(blocks) == n:
                continue
            merged = _merge_masks(d.masks, blocks)
            if len(merged) == 1:
                continue
            m = Distribution(d.alphabet, merged)
            if m not in out:
                out[m] = IndexPartition(([i + 1 for i in b] for b in blocks), n)
    if len(_MERGE_CACHE) > 256:
        _MERGE_CACHE.clear()
    _MERGE_CACHE[cache_key] = out
    return out


def all_merges(d: Distribution, cap: int | None = None) -> tuple[Distribution, ...]:
    return tuple(merges_with_partitions(d, cap))


def keep_minimal(ps: Iterable[Distribution]) -> tuple[Distribution, ...]:
    """The ``<=``-minimal elements of ``ps``, deduplicated, input order kept."""
    uniq = list(dict.fromkeys(ps))
    if uniq:
        _same_alphabet(*uniq)
    return tuple(
        d for d in uniq if not any(o != d and leq_sigma(o, d) for o in uniq)
    )


def all_distributions(alphabet: Alphabet) -> Iterator[Distribution]:
    """Enumerate every distribution of ``alphabet`` (exponential; tests only)."""
    subsets = sorted(range(1, alphabet.full + 1), key=lambda m: (-popcount(m), _part_key(m)))
    full = alphabet.full

    def extend(start: int, chosen: list[int], union: int) -> Iterator[tuple[int, ...]]:
        if union == full:
            yield tuple(chosen)
        for k in range(start, len(subsets)):
            m = subsets[k]
            if any(m & c == m for c in chosen):
                continue
            chosen.append(m)
            yield from extend(k + 1, chosen, union | m)
            chosen.pop()

    # parts are visited largest first, so a later part can never contain an
    # earlier one; only the subset direction needs checking above
    for masks in extend(0, [], 0):
        yield Distribution(alphabet, canonical_masks(masks))
