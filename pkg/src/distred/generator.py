"""Search for small reductions.

The incremental strategy builds candidates from merges of the source:
*collection* keeps adding merges until every independent pair of the source
is independent in some member, and *refinement* then keeps adding merges that
split a troublesome part of the members' meet until the meet equals the
source.  Every minimal meet-consistent subset of such a set is validated by
substitution.  Widths are explored in increasing order, so the first
validated candidate has the smallest width the search can validate.

The recursive strategy starts from a reduction made of two-part merges and
repeatedly replaces a member by a reduction of that member.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Iterable, Iterator, Sequence

from .core import (
    Distribution,
    IndexPartition,
    bits,
    covered_by,
    independence_masks,
    keep_minimal,
    meet_all,
    merges_with_partitions,
    minimal_merges,
)
from .counterexample import refute_candidate
from .lattice import (
    CandidateReduction,
    Dimension,
    compare_optimality,
    dimension,
    is_minimal_meet_consistent,
)
from .substitution import SaturationResult, strengthened_validate
from .structural import StructuralSession

DISCLAIMER = "validated, compact; optimal within explored set"

Event = dict[str, Any]


@dataclass(frozen=True)
class CoverConstraint:
    """A sub-alphabet to break, with its minimal covers by source parts (1-based)."""

    target: frozenset[str]
    covers: tuple[frozenset[int], ...]

    @classmethod
    def build(cls, d: Distribution, target: Iterable[str]) -> CoverConstraint:
        tm = d.alphabet.mask(target)
        n = len(d)
        found: list[int] = []
        # subsets in increasing size; a cover containing an earlier one is not minimal
        for r in range(1, n + 1):
            for combo in combinations(range(n), r):
                cm = sum(1 << i for i in combo)
                if any(f & cm == f for f in found):
                    continue
                u = 0
                for i in combo:
                    u |= d.masks[i]
                if u & tm == tm:
                    found.append(cm)
        covers = tuple(frozenset(i + 1 for i in bits(c)) for c in found)
        return cls(d.alphabet.subset(tm), covers)

    def violated_by(self, p: IndexPartition) -> bool:
        return any(cover <= block for cover in self.covers for block in p.blocks)


def _ordered(d: Distribution, merged: Iterable[Distribution]) -> list[Distribution]:
    full = independence_masks(d)
    return sorted(merged, key=lambda m: (len(m), independence_masks(m) == full, m.sort_key))


def separating_merges(d: Distribution, edge: Iterable[str], max_size: int | None = None) -> list[Distribution]:
    """Merges that never unite a part holding one end of ``edge`` with a part holding the other."""
    a, b = (d.alphabet.mask([s]) for s in edge)
    out = []
    for m, part in merges_with_partitions(d).items():
        if max_size is not None and len(m) > max_size:
            continue
        ok = True
        for block in part.blocks:
            has_a = any(d.masks[i - 1] & a for i in block)
            has_b = any(d.masks[i - 1] & b for i in block)
            if has_a and has_b:
                ok = False
                break
        if ok:
            out.append(m)
    return _ordered(d, out)


def breaking_merges(d: Distribution, constraint: CoverConstraint, max_size: int | None = None) -> list[Distribution]:
    """Merges whose partition keeps every minimal cover of the target apart."""
    out = [
        m
        for m, part in merges_with_partitions(d).items()
        if (max_size is None or len(m) <= max_size) and not constraint.violated_by(part)
    ]
    return _ordered(d, out)


GENERATOR_MAX_DERIVED = 3_000


@dataclass
class GeneratorOptions:
    max_width: int | None = None
    max_nodes: int = 200_000
    # per-candidate saturation cap; kept well below the verifier's because
    # closures that do not reach the source tend to grow large
    max_derived: int = GENERATOR_MAX_DERIVED
    time_limit: float | None = None
    fallback: bool = True
    events: Callable[[Event], None] | None = None


@dataclass
class Validated:
    candidate: CandidateReduction
    dimension: Dimension
    mechanism: str
    saturation: SaturationResult

    def to_dict(self) -> dict:
        return {
            "members": [m.to_lists() for m in self.candidate.members],
            "dimension": [self.dimension.height, self.dimension.width],
            "mechanism": self.mechanism,
            "trace": self.saturation.trace.to_dict() if self.saturation.trace else None,
        }


@dataclass
class GenerationResult:
    """``status`` is found, no_reduction, exhausted (nothing validated) or budget."""

    status: str
    source: Distribution
    found: Validated | None = None
    refutation: dict | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def candidate(self) -> CandidateReduction | None:
        return None if self.found is None else self.found.candidate

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "source": self.source.to_lists(),
            "reduction": None if self.found is None else self.found.to_dict(),
            "refutation": self.refutation,
            "metadata": self.metadata,
        }


class _Budget(Exception):
    pass


class _Search:
    """Depth-first collection and refinement over a fixed pool of merges."""

    def __init__(self, d: Distribution, pool: Sequence[Distribution], width: int, height: int, max_nodes: int):
        self.d = d
        self.width = width
        self.height = height
        self.truncated = False
        self.pool = [m for m in pool if len(m) <= width]
        edges = sorted(independence_masks(d), key=lambda e: tuple(bits(e)))
        degree = {i: sum(1 for e in edges if e >> i & 1) for i in range(len(d.alphabet))}
        edges.sort(key=lambda e: (-sum(degree[i] for i in bits(e)), tuple(bits(e))))
        self.edges = edges
        self.all_edges = (1 << len(edges)) - 1
        self.cover = []
        for m in self.pool:
            ind = independence_masks(m)
            self.cover.append(sum(1 << k for k, e in enumerate(edges) if e in ind))
        self.max_nodes = max_nodes
        self.nodes = 0
        self.visited: set[tuple[str, frozenset[int]]] = set()

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise _Budget

    def run(self) -> Iterator[tuple[Distribution, ...]]:
        """Meet-consistent member sets, possibly non-minimal."""
        yield from self._collect((), 0)

    def _collect(self, chosen: tuple[int, ...], covered: int) -> Iterator[tuple[Distribution, ...]]:
        key = ("c", frozenset(chosen))
        if key in self.visited:
            return
        self.visited.add(key)
        self._tick()
        if covered == self.all_edges:
            yield from self._refine(chosen)
            return
        if len(chosen) >= self.height:
            self.truncated = True
            return
        uncovered = self.all_edges & ~covered
        e = (uncovered & -uncovered).bit_length() - 1
        for k, cov in enumerate(self.cover):
            if cov >> e & 1 and k not in chosen:
                yield from self._collect(chosen + (k,), covered | cov)

    def _refine(self, chosen: tuple[int, ...]) -> Iterator[tuple[Distribution, ...]]:
        key = ("r", frozenset(chosen))
        if key in self.visited:
            return
        self.visited.add(key)
        self._tick()
        members = tuple(self.pool[k] for k in chosen)
        mt = meet_all(members) if members else None
        if mt == self.d:
            yield members
            return
        if mt is None:
            return
        if len(chosen) >= self.height:
            self.truncated = True
            return
        trouble = next(p for p in mt.canonical().masks if not covered_by(p, self.d))
        for k, m in enumerate(self.pool):
            if k not in chosen and not covered_by(trouble, m):
                yield from self._refine(chosen + (k,))


def minimal_consistent_subsets(d: Distribution, members: Sequence[Distribution]) -> list[CandidateReduction]:
    """Every subset whose meet is ``d`` and none of whose proper subsets has that meet."""
    members = list(keep_minimal(members))
    found: list[frozenset[int]] = []
    out = []
    for r in range(1, len(members) + 1):
        for combo in combinations(range(len(members)), r):
            s = frozenset(combo)
            if any(f <= s for f in found):
                continue
            if meet_all(members[i] for i in combo) == d:
                found.append(s)
                out.append(CandidateReduction(d, [members[i] for i in combo]))
    return sorted(out, key=lambda c: (dimension(c).width, len(c), c.sort_key))


def _emit(opts: GeneratorOptions, event: Event) -> None:
    if opts.events is not None:
        opts.events(event)


def _refute_bottom(d: Distribution) -> tuple[list[Distribution], dict | None]:
    bottom = list(keep_minimal(minimal_merges(d))) if len(d) >= 3 else []
    if not bottom:
        return bottom, {"mechanism": "empty"}
    if meet_all(bottom) != d:
        return bottom, {"mechanism": "meet", "meet": meet_all(bottom).to_lists()}
    ev = refute_candidate(CandidateReduction(d, bottom))
    if ev is not None:
        return bottom, {"mechanism": ev.label, "evidence": ev.to_dict()}
    return bottom, None


def _validate(
    p: CandidateReduction, opts: GeneratorOptions, session: StructuralSession | None = None
) -> tuple[Validated | None, str]:
    """Validate ``p``; the second item is the mechanism or why it failed."""
    # a template refutation rules out validation, and is far cheaper than saturating
    if session is not None and refute_candidate(p, session) is not None:
        return None, "refuted"
    ordinary, strong = strengthened_validate(p, opts.max_derived, opts.time_limit)
    if ordinary is not None and ordinary.succeeded:
        return Validated(p, dimension(p), "sub", ordinary), "sub"
    if strong is not None and strong.succeeded:
        return Validated(p, dimension(p), "S sub", strong), "S sub"
    last = strong or ordinary
    return None, "unresolved" if last is not None and last.status == "budget" else "failed"


def _search_passes(
    d: Distribution,
    pool: Sequence[Distribution],
    widths: Iterable[int],
    opts: GeneratorOptions,
    stats: dict,
    stop_at_first: bool,
) -> Iterator[Validated]:
    """Validate candidates in increasing (width, height) order.

    For each width the search is repeated with a growing bound on the number
    of chosen merges.  A minimal meet-consistent candidate of height ``h`` is
    reachable by choosing only its own members, so the bound-``h`` pass finds
    all of them; passes stop once no branch was cut by the bound.
    """
    seen: set[CandidateReduction] = set()
    session = StructuralSession(d)
    deadline = None if opts.time_limit is None else time.monotonic() + opts.time_limit
    for width in widths:
        height = 1
        while True:
            height += 1
            _emit(opts, {"event": "pass", "width": width, "height": height})
            search = _Search(d, pool, width, height, opts.max_nodes)
            batch: list[CandidateReduction] = []
            out_of_budget = False
            try:
                for members in search.run():
                    for cand in minimal_consistent_subsets(d, members):
                        if cand not in seen:
                            seen.add(cand)
                            batch.append(cand)
            except _Budget:
                stats["budget"] = out_of_budget = True
            stats["nodes"] += search.nodes
            batch.sort(key=lambda c: (dimension(c).width, len(c), c.sort_key))
            for cand in batch:
                assert is_minimal_meet_consistent(cand)
                stats["candidates"] += 1
                _emit(opts, {"event": "candidate", "members": [str(m) for m in cand.members]})
                result, why = _validate(cand, opts, session)
                stats[why] = stats.get(why, 0) + 1
                _emit(
                    opts,
                    {"event": "validation", "members": [str(m) for m in cand.members], "result": why},
                )
                if result is not None:
                    yield result
                    if stop_at_first:
                        return
                if deadline is not None and time.monotonic() > deadline:
                    stats["budget"] = True
                    return
            if not search.truncated or out_of_budget:
                break


def _fallback(d: Distribution, bottom: list[Distribution], opts: GeneratorOptions, stats: dict) -> Validated | None:
    """Validate the two-part merges directly when they are not minimal meet-consistent."""
    p = CandidateReduction(d, bottom)
    if len(p) < 2 or is_minimal_meet_consistent(p):
        return None
    stats["fallback"] = True
    ordinary, strong = strengthened_validate(p, opts.max_derived, opts.time_limit)
    if ordinary is not None and ordinary.succeeded:
        return Validated(p, dimension(p), "sub", ordinary)
    if strong is not None and strong.succeeded:
        return Validated(p, dimension(p), "S sub", strong)
    return None


def _widths(d: Distribution, opts: GeneratorOptions) -> range:
    top = len(d) - 1
    if opts.max_width is not None:
        top = min(top, opts.max_width)
    return range(2, top + 1)


def incremental_generate(d: Distribution, options: GeneratorOptions | None = None) -> GenerationResult:
    opts = options or GeneratorOptions()
    stats = {"candidates": 0, "nodes": 0, "budget": False, "fallback": False}
    bottom, refutation = _refute_bottom(d)
    if refutation is not None:
        _emit(opts, {"event": "refuted", "mechanism": refutation["mechanism"]})
        return GenerationResult("no_reduction", d, refutation=refutation, metadata=dict(stats))
    pool = _ordered(d, merges_with_partitions(d))
    found = next(_search_passes(d, pool, _widths(d, opts), opts, stats, True), None)
    if found is None and opts.fallback:
        found = _fallback(d, bottom, opts, stats)
    meta = dict(stats, disclaimer=DISCLAIMER)
    if found is not None:
        return GenerationResult("found", d, found, metadata=meta)
    return GenerationResult("budget" if stats["budget"] else "exhausted", d, metadata=meta)


def collect_all_validated(d: Distribution, options: GeneratorOptions | None = None) -> tuple[list[Validated], GenerationResult]:
    """Every candidate the search validates, plus a summary naming the best one."""
    opts = options or GeneratorOptions()
    stats = {"candidates": 0, "nodes": 0, "budget": False, "fallback": False}
    bottom, refutation = _refute_bottom(d)
    if refutation is not None:
        return [], GenerationResult("no_reduction", d, refutation=refutation, metadata=dict(stats))
    pool = _ordered(d, merges_with_partitions(d))
    found = list(_search_passes(d, pool, _widths(d, opts), opts, stats, False))
    if not found and opts.fallback:
        fb = _fallback(d, bottom, opts, stats)
        if fb is not None:
            found.append(fb)
    meta = dict(stats, disclaimer=DISCLAIMER)
    if not found:
        return [], GenerationResult("budget" if stats["budget"] else "exhausted", d, metadata=meta)
    best = found[0]
    for v in found[1:]:
        c = compare_optimality(v.candidate, best.candidate)
        if c < 0 or (c == 0 and v.candidate.sort_key < best.candidate.sort_key):
            best = v
    return found, GenerationResult("found", d, best, metadata=meta)


def _bottom_reduction(d: Distribution, opts: GeneratorOptions) -> tuple[Validated | None, dict | None]:
    """A validated reduction whose members are all minimal two-part merges."""
    bottom, refutation = _refute_bottom(d)
    if refutation is not None:
        return None, refutation
    stats = {"candidates": 0, "nodes": 0, "budget": False}
    found = next(_search_passes(d, bottom, [len(d) - 1], opts, stats, True), None)
    if found is None and opts.fallback:
        found = _fallback(d, bottom, opts, dict(stats))
    return found, None


@dataclass
class RecursiveResult:
    status: str
    source: Distribution
    reduction: CandidateReduction | None
    chain: list[dict] = field(default_factory=list)
    refutation: dict | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "source": self.source.to_lists(),
            "reduction": None
            if self.reduction is None
            else {
                "members": [m.to_lists() for m in self.reduction.members],
                "dimension": list(_dim_pair(self.reduction)),
            },
            "chain": self.chain,
            "refutation": self.refutation,
            "metadata": {"disclaimer": DISCLAIMER},
        }


def _dim_pair(p: CandidateReduction) -> tuple[int, int]:
    dim = dimension(p)
    return dim.height, dim.width


def recursive_generate(d: Distribution, options: GeneratorOptions | None = None) -> RecursiveResult:
    """Start from a reduction by two-part merges, then replace members by their own reductions."""
    opts = options or GeneratorOptions()
    first, refutation = _bottom_reduction(d, opts)
    if first is None:
        status = "no_reduction" if refutation is not None else "exhausted"
        return RecursiveResult(status, d, None, refutation=refutation)
    current = first.candidate
    chain = [{"replaced": None, "by": [m.to_lists() for m in current.members], "mechanism": first.mechanism}]
    irreducible: set[Distribution] = set()
    changed = True
    while changed:
        changed = False
        for member in current.members:
            if member in irreducible or len(member) < 3:
                continue
            sub, _ = _bottom_reduction(member.canonical(), opts)
            if sub is None:
                irreducible.add(member)
                continue
            current = CandidateReduction(
                d, [m for m in current.members if m != member] + list(sub.candidate.members)
            )
            chain.append(
                {
                    "replaced": member.to_lists(),
                    "by": [m.to_lists() for m in sub.candidate.members],
                    "mechanism": sub.mechanism,
                    "result": [m.to_lists() for m in current.members],
                }
            )
            changed = True
            break
    return RecursiveResult("found", d, current, chain)
