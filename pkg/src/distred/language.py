"""Finite languages: shuffle, projection, synchronous product, trace closure.

This is the brute-force layer every symbolic shortcut elsewhere in the package
is tested against.
"""

from __future__ import annotations

import os
from collections import deque
from functools import lru_cache
from typing import Iterable, Sequence

from .core import Alphabet, Distribution
from .errors import AlphabetMismatch, CapacityExceeded

Word = tuple[str, ...]

DEFAULT_WORD_CAP = 10**6


def word_cap() -> int:
    return int(os.environ.get("DISTRED_WORD_CAP", DEFAULT_WORD_CAP))


def as_word(w: str | Sequence[str]) -> Word:
    """Strings are read one character per symbol."""
    return tuple(w)


def format_word(w: Word) -> str:
    if not w:
        return "epsilon"
    if all(len(s) == 1 for s in w):
        return "".join(w)
    return " ".join(w)


class FiniteLanguage:
    __slots__ = ("alphabet", "words")

    def __init__(self, words: Iterable[str | Sequence[str]], alphabet: Alphabet | Iterable[str]):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        ws = frozenset(as_word(w) for w in words)
        for w in ws:
            for s in w:
                if s not in alphabet:
                    raise ValueError(f"word {format_word(w)!r} uses {s!r} outside {alphabet!r}")
        self.alphabet = alphabet
        self.words = ws

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(sorted(self.words))

    def __contains__(self, w: object) -> bool:
        return as_word(w) in self.words  # type: ignore[arg-type]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FiniteLanguage)
            and self.alphabet == other.alphabet
            and self.words == other.words
        )

    def __hash__(self) -> int:
        return hash((self.alphabet, self.words))

    def __repr__(self) -> str:
        shown = ", ".join(format_word(w) for w in sorted(self.words)[:8])
        more = ", ..." if len(self.words) > 8 else ""
        return f"FiniteLanguage({{{shown}{more}}})"

    def __le__(self, other: FiniteLanguage) -> bool:
        return self.words <= other.words


def shuffle(s1: Sequence[str], s2: Sequence[str]) -> frozenset[Word]:
    """All interleavings of two words that keep each word's own order."""
    s1, s2 = as_word(s1), as_word(s2)

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> frozenset[Word]:
        if i == len(s1):
            return frozenset([s2[j:]])
        if j == len(s2):
            return frozenset([s1[i:]])
        left = {(s1[i],) + w for w in go(i + 1, j)}
        right = {(s2[j],) + w for w in go(i, j + 1)}
        return frozenset(left | right)

    return go(0, 0)


def project(w: Sequence[str], target: Iterable[str]) -> Word:
    keep = set(target)
    return tuple(s for s in w if s in keep)


def project_language(lang: FiniteLanguage, target: Iterable[str]) -> FiniteLanguage:
    keep = [s for s in lang.alphabet if s in set(target)]
    return FiniteLanguage((project(w, keep) for w in lang.words), Alphabet(keep))


class _Trie:
    """Prefix tree over a finite set of words; node 0 is the root."""

    def __init__(self, words: Iterable[Word]):
        self.children: list[dict[str, int]] = [{}]
        self.terminal: list[bool] = [False]
        for w in words:
            node = 0
            for s in w:
                nxt = self.children[node].get(s)
                if nxt is None:
                    nxt = len(self.children)
                    self.children[node][s] = nxt
                    self.children.append({})
                    self.terminal.append(False)
                node = nxt
            self.terminal[node] = True


class _Product:
    """Synchronous product of finite component languages, explored lazily."""

    def __init__(self, components: Sequence[FiniteLanguage], alphabet: Alphabet):
        self.alphabet = alphabet
        self.tries = [_Trie(c.words) for c in components]
        # for each symbol, the components that synchronise on it
        self.owners = {
            s: [i for i, c in enumerate(components) if s in c.alphabet] for s in alphabet
        }
        self.start = tuple(0 for _ in components)
        self._count: dict[tuple[int, ...], int] = {}

    def successors(self, state: tuple[int, ...]):
        for s in self.alphabet:
            nxt = list(state)
            for i in self.owners[s]:
                child = self.tries[i].children[state[i]].get(s)
                if child is None:
                    break
                nxt[i] = child
            else:
                yield s, tuple(nxt)

    def accepting(self, state: tuple[int, ...]) -> bool:
        return all(t.terminal[q] for t, q in zip(self.tries, state))

    def count(self, state: tuple[int, ...] | None = None) -> int:
        """Number of words accepted from ``state`` (every symbol is owned, so this is finite)."""
        state = self.start if state is None else state
        stack = [(state, False)]
        memo = self._count
        while stack:
            st, expanded = stack.pop()
            if st in memo:
                continue
            succ = [n for _, n in self.successors(st)]
            if expanded:
                memo[st] = int(self.accepting(st)) + sum(memo[n] for n in succ)
            else:
                stack.append((st, True))
                stack.extend((n, False) for n in succ if n not in memo)
        return memo[state]

    def words(self, cap: int) -> frozenset[Word]:
        if self.count() > cap:
            raise CapacityExceeded(f"synchronous product has {self.count()} words (cap {cap})")
        out: list[Word] = []
        stack: list[tuple[tuple[int, ...], Word]] = [(self.start, ())]
        while stack:
            st, w = stack.pop()
            if self.accepting(st):
                out.append(w)
            for s, n in self.successors(st):
                stack.append((n, w + (s,)))
        return frozenset(out)


def _product_alphabet(components: Sequence[FiniteLanguage], alphabet: Alphabet | None) -> Alphabet:
    if alphabet is None:
        seen: dict[str, None] = {}
        for c in components:
            for s in c.alphabet:
                seen.setdefault(s)
        return Alphabet(seen)
    union = {s for c in components for s in c.alphabet}
    if union != set(alphabet):
        raise AlphabetMismatch("component alphabets must cover the product alphabet exactly")
    return alphabet


def sync_product(
    components: Sequence[FiniteLanguage],
    alphabet: Alphabet | None = None,
    cap: int | None = None,
) -> FiniteLanguage:
    """Words over the union alphabet whose projection onto each component is in it."""
    alphabet = _product_alphabet(components, alphabet)
    prod = _Product(components, alphabet)
    return FiniteLanguage(prod.words(word_cap() if cap is None else cap), alphabet)


def _components(lang: FiniteLanguage, d: Distribution) -> list[FiniteLanguage]:
    if d.alphabet != lang.alphabet:
        raise AlphabetMismatch(f"{d} is not over the alphabet of the language")
    return [project_language(lang, d.alphabet.members(m)) for m in d.masks]


def decomposition_closure(lang: FiniteLanguage, d: Distribution, cap: int | None = None) -> FiniteLanguage:
    return sync_product(_components(lang, d), lang.alphabet, cap)


def is_decomposable(lang: FiniteLanguage, d: Distribution) -> bool:
    """``lang`` equals the synchronous product of its projections.

    The closure always contains ``lang``, so comparing sizes is enough and
    the closure never has to be materialised.
    """
    prod = _Product(_components(lang, d), lang.alphabet)
    return prod.count() == len(lang)


def _pairs(indep: Iterable[Iterable[str]]) -> frozenset[frozenset[str]]:
    out = set()
    for pair in indep:
        pair = frozenset(pair)
        if len(pair) != 2:
            raise ValueError("an independence relation is irreflexive")
        out.add(pair)
    return frozenset(out)


def trace_closure(lang: FiniteLanguage, indep: Iterable[Iterable[str]], cap: int | None = None) -> FiniteLanguage:
    """Close ``lang`` under swapping adjacent independent symbols."""
    pairs = _pairs(indep)
    cap = word_cap() if cap is None else cap
    seen = set(lang.words)
    queue = deque(seen)
    while queue:
        w = queue.popleft()
        for k in range(len(w) - 1):
            if w[k] != w[k + 1] and frozenset((w[k], w[k + 1])) in pairs:
                v = w[:k] + (w[k + 1], w[k]) + w[k + 2 :]
                if v not in seen:
                    seen.add(v)
                    if len(seen) > cap:
                        raise CapacityExceeded(f"trace closure exceeds {cap} words")
                    queue.append(v)
    return FiniteLanguage(seen, lang.alphabet)


def is_trace_closed(lang: FiniteLanguage, indep: Iterable[Iterable[str]]) -> bool:
    pairs = _pairs(indep)
    for w in lang.words:
        for k in range(len(w) - 1):
            if w[k] != w[k + 1] and frozenset((w[k], w[k + 1])) in pairs:
                if w[:k] + (w[k + 1], w[k]) + w[k + 2 :] not in lang.words:
                    return False
    return True


def trace_equivalent(u: Sequence[str], v: Sequence[str], indep: Iterable[Iterable[str]]) -> bool:
    """Projection criterion: equal letter counts and equal projections onto every dependent pair."""
    u, v = as_word(u), as_word(v)
    if sorted(u) != sorted(v):
        return False
    pairs = _pairs(indep)
    symbols = sorted(set(u))
    for i, a in enumerate(symbols):
        for b in symbols[i:]:
            if a == b or frozenset((a, b)) not in pairs:
                if project(u, {a, b}) != project(v, {a, b}):
                    return False
    return True
