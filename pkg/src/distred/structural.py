"""Dependence-graph rules that prove the template counter-example decomposable.

Everything here reasons about the source distribution ``d`` (the one the
template is built for, with ``n`` parts) and a coarser distribution
``dprime``.  Index sets are bitmasks over the *positions* of ``d``'s parts;
public helpers convert them to 1-based ``frozenset``s.

The central quantity ``Cr(S, t)`` is the set of indices ``j`` such that some
simple path runs from a symbol of ``S`` to ``t`` with every vertex except the
last one outside part ``j``.  Since a walk through a vertex set always
contains a simple path through the same set, membership of ``j`` is a plain
reachability question in the graph with part ``j`` deleted, which is how it
is computed.  :func:`cr_by_paths` keeps the literal path enumeration for
cross-checking.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .core import Alphabet, Distribution, adjacency, bits, popcount
from .errors import AlphabetMismatch


def _idx(mask: int) -> frozenset[int]:
    return frozenset(i + 1 for i in bits(mask))


class DependenceGraph:
    """The undirected graph ``(alphabet, dependence(d))`` without self-loops."""

    __slots__ = ("distribution", "alphabet", "neighbours")

    def __init__(self, d: Distribution):
        self.distribution = d
        self.alphabet = d.alphabet
        self.neighbours = tuple(adj & ~(1 << i) for i, adj in enumerate(adjacency(d)))

    def edges(self) -> Iterator[tuple[str, str]]:
        syms = self.alphabet.symbols
        for i, nb in enumerate(self.neighbours):
            for j in bits(nb):
                if i < j:
                    yield syms[i], syms[j]

    def neighbourhood(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.neighbours[i]
        return out

    def reach(self, start: int, allowed: int) -> int:
        """Vertices of ``allowed`` connected to ``start`` inside ``allowed``."""
        seen = start & allowed
        frontier = seen
        while frontier:
            nxt = self.neighbourhood(frontier) & allowed & ~seen
            seen |= nxt
            frontier = nxt
        return seen


def distinctive_masks(d: Distribution) -> tuple[int, ...]:
    """Per symbol, the positions of the parts of ``d`` not containing it."""
    n = len(d)
    out = []
    for i in range(len(d.alphabet)):
        m = 0
        for k in range(n):
            if not d.masks[k] >> i & 1:
                m |= 1 << k
        out.append(m)
    return tuple(out)


def distinctive_index_map(d: Distribution) -> dict[str, frozenset[int]]:
    """``N(sigma)``: 1-based indices of the parts of ``d`` not containing ``sigma``."""
    return {s: _idx(m) for s, m in zip(d.alphabet.symbols, distinctive_masks(d))}


def boundary_symbols(g: DependenceGraph, s: Iterable[str] | int) -> frozenset[str]:
    """Members of ``s`` adjacent to a symbol outside ``s``."""
    sm = g.alphabet.mask(s)
    outside = g.alphabet.full & ~sm
    return g.alphabet.subset(sum(1 << i for i in bits(sm) if g.neighbours[i] & outside))


class StructuralSession:
    """Memoised rule evaluation for one source distribution.

    A session keeps mutable caches; give each thread its own.
    """

    def __init__(self, d: Distribution):
        self.d = d
        self.alphabet = d.alphabet
        self.n = len(d)
        self.full_index = (1 << self.n) - 1
        self.nmask = distinctive_masks(d)
        self.graph = DependenceGraph(d)
        self._graphs: dict[Distribution, DependenceGraph] = {d: self.graph}
        self._cr: dict[tuple[Distribution, int], tuple[int, ...]] = {}
        self._extent: dict[tuple[Distribution, int], int] = {}

    def _check(self, dprime: Distribution) -> None:
        if dprime.alphabet != self.alphabet:
            raise AlphabetMismatch(f"{dprime} is not over the alphabet of {self.d}")

    def graph_of(self, dprime: Distribution) -> DependenceGraph:
        g = self._graphs.get(dprime)
        if g is None:
            self._check(dprime)
            g = self._graphs[dprime] = DependenceGraph(dprime)
        return g

    # Cr ------------------------------------------------------------------

    def cr_all(self, dprime: Distribution, s: int) -> tuple[int, ...]:
        """``Cr_{dprime}(s, t)`` as an index mask for every symbol ``t`` (0 inside ``s``)."""
        key = (dprime, s)
        hit = self._cr.get(key)
        if hit is not None:
            return hit
        g = self.graph_of(dprime)
        full = self.alphabet.full
        out = [0] * len(self.alphabet)
        for j in range(self.n):
            avoid = self.d.masks[j]
            allowed = full & ~avoid
            reached = g.reach(s & allowed, allowed)
            hit_j = g.neighbourhood(reached) & ~s
            for t in bits(hit_j):
                out[t] |= 1 << j
        result = tuple(out)
        self._cr[key] = result
        return result

    def cr(self, dprime: Distribution, s: Iterable[str] | int, target: str) -> frozenset[int]:
        sm = self.alphabet.mask(s)
        t = self.alphabet.index(target)
        if sm >> t & 1:
            raise ValueError(f"{target!r} lies inside the seed set")
        return _idx(self.cr_all(dprime, sm)[t])

    def cr_restricted(self, dprime: Distribution, s: Iterable[str] | int, source: str, target: str) -> frozenset[int]:
        """``Cr^R``: paths start at ``source`` and never re-enter ``s``."""
        g = self.graph_of(dprime)
        sm = self.alphabet.mask(s)
        src = self.alphabet.index(source)
        t = self.alphabet.index(target)
        if not sm >> src & 1 or sm >> t & 1:
            raise ValueError("source must lie in the seed set and target outside it")
        full = self.alphabet.full
        out = 0
        for j in range(self.n):
            if not self.nmask[src] >> j & 1:
                continue
            allowed = full & ~sm & ~self.d.masks[j]
            reached = g.reach(g.neighbours[src] & allowed, allowed)
            if (g.neighbours[src] | g.neighbourhood(reached)) >> t & 1:
                out |= 1 << j
        return _idx(out)

    def fully_determined(self, dprime: Distribution, s: int) -> int:
        """Symbols outside ``s`` whose Cr value is every index."""
        cr = self.cr_all(dprime, s)
        outside = self.alphabet.full & ~s
        return sum(1 << t for t in bits(outside) if cr[t] == self.full_index)

    # rules ---------------------------------------------------------------

    def new_parts(self, dprime: Distribution) -> tuple[int, ...]:
        """Parts of ``dprime`` that are not parts of the source."""
        self._check(dprime)
        return tuple(m for m in dprime.masks if m not in self.d.key)

    def _cr_rule(self, dprime: Distribution, graph_dist: Distribution) -> bool:
        full = self.alphabet.full
        return any(
            self.fully_determined(graph_dist, m) == full & ~m for m in self.new_parts(dprime)
        )

    def cr_rule(self, dprime: Distribution) -> bool:
        return self._cr_rule(dprime, dprime)

    def cr_rule_source(self, dprime: Distribution) -> bool:
        return self._cr_rule(dprime, self.d)

    def jointly_determined(self, graph_dist: Distribution, determined: int) -> int:
        """Symbols fixed by two or more determined symbols sharing exactly one source part.

        For each source part ``k`` the largest usable set is the determined
        part of ``Q & d[k]`` for a part ``Q`` of ``graph_dist``; any smaller
        subset lies in at least as many source parts, so checking the largest
        one is enough.
        """
        full = self.alphabet.full
        out = 0
        for q in graph_dist.masks:
            sd = determined & q
            if popcount(sd) < 2 or not q & ~determined:
                continue
            for part in self.d.masks:
                core = sd & part
                if popcount(core) < 2:
                    continue
                holders = sum(1 for other in self.d.masks if other & core == core)
                if holders == 1:
                    out |= q & ~determined
                    break
        return out & full

    def extent(self, graph_dist: Distribution, seed: int) -> int:
        """The determined-symbol fixpoint starting from ``seed``.

        Both growth steps are repeated until neither adds a symbol.
        """
        key = (graph_dist, seed)
        hit = self._extent.get(key)
        if hit is not None:
            return hit
        full = self.alphabet.full
        determined = seed
        while determined != full:
            grown = determined | self.fully_determined(graph_dist, determined)
            if grown != full:
                grown |= self.jointly_determined(graph_dist, grown)
            if grown == determined:
                break
            determined = grown
        self._extent[key] = determined
        return determined

    def fixpoint_rule(self, dprime: Distribution) -> bool:
        full = self.alphabet.full
        return any(self.extent(dprime, m) == full for m in self.new_parts(dprime))

    def fixpoint_rule_source(self, dprime: Distribution) -> bool:
        full = self.alphabet.full
        return any(self.extent(self.d, m) == full for m in self.new_parts(dprime))

    def rule_for(self, dprime: Distribution) -> str | None:
        """Name of the weakest rule proving the template decomposable for ``dprime``."""
        if self.cr_rule(dprime):
            return "cr"
        if self.fixpoint_rule(dprime):
            return "fixpoint"
        return None

    def _pair_unions(self) -> Iterator[int]:
        masks = self.d.masks
        full = self.alphabet.full
        for i in range(self.n):
            for j in range(i + 1, self.n):
                u = masks[i] | masks[j]
                if u != full:
                    yield u

    def no_reduction_check(self) -> bool:
        full = self.alphabet.full
        return self.n >= 3 and all(self.extent(self.d, u) == full for u in self._pair_unions())

    def pairwise_cr_check(self) -> bool:
        full = self.alphabet.full
        return self.n >= 3 and all(
            self.fully_determined(self.d, u) == full & ~u for u in self._pair_unions()
        )


def cr_value(dprime: Distribution, d: Distribution, s: Iterable[str], target: str) -> frozenset[int]:
    return StructuralSession(d).cr(dprime, s, target)


def cr_restricted(dprime: Distribution, d: Distribution, s: Iterable[str], source: str, target: str) -> frozenset[int]:
    return StructuralSession(d).cr_restricted(dprime, s, source, target)


def cr_by_paths(dprime: Distribution, d: Distribution, s: Iterable[str] | int, target: str) -> frozenset[int]:
    """Literal evaluation: union over simple paths of the intersection of ``N``."""
    alphabet = d.alphabet
    g = DependenceGraph(dprime)
    nmask = distinctive_masks(d)
    sm = alphabet.mask(s)
    t = alphabet.index(target)
    out = 0

    def walk(v: int, on_path: int, inter: int) -> None:
        nonlocal out
        for w in bits(g.neighbours[v] & ~on_path):
            if w == t:
                out |= inter
            elif inter & nmask[w]:
                walk(w, on_path | (1 << w), inter & nmask[w])

    for v in bits(sm):
        walk(v, 1 << v, nmask[v])
    return _idx(out)


def cr_rule_decomposable(dprime: Distribution, d: Distribution) -> bool:
    return StructuralSession(d).cr_rule(dprime)


def cr_rule_source_decomposable(dprime: Distribution, d: Distribution) -> bool:
    return StructuralSession(d).cr_rule_source(dprime)


def determined_extent(dprime: Distribution, d: Distribution, seed: Iterable[str]) -> frozenset[str]:
    session = StructuralSession(d)
    return d.alphabet.subset(session.extent(dprime, d.alphabet.mask(seed)))


def fixpoint_rule_decomposable(dprime: Distribution, d: Distribution) -> bool:
    return StructuralSession(d).fixpoint_rule(dprime)


def fixpoint_rule_source_decomposable(dprime: Distribution, d: Distribution) -> bool:
    return StructuralSession(d).fixpoint_rule_source(dprime)


def no_reduction_check(d: Distribution) -> bool:
    return StructuralSession(d).no_reduction_check()


def pairwise_cr_check(d: Distribution) -> bool:
    return StructuralSession(d).pairwise_cr_check()


def ring(n: int) -> Distribution:
    """The cycle ``(a1 a2 | a2 a3 | ... | an a1)`` over ``a1 .. an``."""
    if n < 3:
        raise ValueError("a ring needs at least three symbols")
    alphabet = Alphabet(f"a{i}" for i in range(1, n + 1))
    return Distribution(
        alphabet, tuple((1 << k) | (1 << ((k + 1) % n)) for k in range(n))
    )


def to_dot(d: Distribution, kind: str = "dep", source: Distribution | None = None) -> str:
    """DOT text for the dependence or independence graph of ``d``.

    With ``source`` given, vertices are labelled with ``N(sigma)`` of the source.
    """
    alphabet = d.alphabet
    syms = alphabet.symbols
    if kind == "dep":
        edges = list(DependenceGraph(d).edges())
    elif kind == "indep":
        adj = adjacency(d)
        edges = [
            (syms[i], syms[j])
            for i in range(len(syms))
            for j in bits(alphabet.full & ~adj[i])
            if i < j
        ]
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    lines = [f"graph {kind} {{"]
    labels = distinctive_index_map(source) if source is not None else None
    for s in syms:
        if labels is not None:
            idx = ",".join(str(i) for i in sorted(labels[s]))
            lines.append(f'  "{s}" [label="{s} {{{idx}}}"];')
        else:
            lines.append(f'  "{s}";')
    for a, b in edges:
        lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
