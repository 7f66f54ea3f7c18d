"""Substitution proofs: deriving a distribution from premises by refinement steps.

Substituting ``left`` into part ``i`` of ``right`` is allowed when every
symbol shared between parts of ``left`` lies inside that part; the part is
then replaced by its intersections with the parts of ``left``.  A language
decomposable for both operands stays decomposable for the result, so
deriving the source from a candidate's members proves the candidate valid.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import Alphabet, Distribution, canonical_masks, keep_maximal, validate_distribution
from .errors import AlphabetMismatch, NotSubstitutable
from .lattice import CandidateReduction, upward_set

DEFAULT_MAX_DERIVED = 50_000


def shared_symbols(d: Distribution) -> frozenset[str]:
    return d.alphabet.subset(d.shared_mask)


def substitutable(left: Distribution, right: Distribution, i: int) -> bool:
    """Whether ``left`` can be substituted into the ``i``-th (1-based) part of ``right``."""
    if left.alphabet != right.alphabet:
        raise AlphabetMismatch("operands are over different alphabets")
    if not 1 <= i <= len(right):
        raise IndexError(f"{right} has no part {i}")
    part = right.masks[i - 1]
    return left.shared_mask & part == left.shared_mask


def _substitute_masks(left: Sequence[int], right: Sequence[int], k: int) -> tuple[int, ...]:
    part = right[k]
    pieces = [part & m for m in left]
    if part in pieces:
        return tuple(right)
    # right's other parts form an antichain and cannot sit inside a piece of
    # ``part``, so only the pieces need filtering
    others = right[:k] + right[k + 1 :]
    kept = []
    for p in keep_maximal(q for q in pieces if q):
        if not any(p & o == p for o in others):
            kept.append(p)
    return tuple(right[:k]) + tuple(kept) + tuple(right[k + 1 :])


def substitute(left: Distribution, right: Distribution, i: int) -> Distribution:
    if not substitutable(left, right, i):
        raise NotSubstitutable(
            f"shared symbols of {left} are not inside part {i} of {right}"
        )
    return Distribution(right.alphabet, _substitute_masks(left.masks, right.masks, i - 1))


@dataclass(frozen=True)
class SubstitutionStep:
    left: Distribution
    right: Distribution
    position: int  # 1-based, into right's part order
    result: Distribution

    def to_dict(self) -> dict:
        return {
            "left": self.left.to_lists(),
            "right": self.right.to_lists(),
            "position": self.position,
            "result": self.result.to_lists(),
        }

    def __str__(self) -> str:
        return f"{self.left} |-{self.position} {self.right} = {self.result}"


@dataclass(frozen=True)
class ProofTrace:
    premises: tuple[Distribution, ...]
    steps: tuple[SubstitutionStep, ...]
    conclusion: Distribution

    def replay(self) -> bool:
        """Re-run every step from the premises; True iff the conclusion is reproduced."""
        available = {p for p in self.premises}
        if not self.steps:
            return self.conclusion in available
        for step in self.steps:
            if step.left not in available or step.right not in available:
                return False
            # operands are compared as sets, so re-resolve the stored part order
            if substitute(step.left, step.right, step.position) != step.result:
                return False
            available.add(step.result)
        return self.conclusion in available

    def to_dict(self) -> dict:
        return {
            "premises": [p.to_lists() for p in self.premises],
            "steps": [s.to_dict() for s in self.steps],
            "conclusion": self.conclusion.to_lists(),
        }

    @classmethod
    def from_dict(cls, data: dict, alphabet: Alphabet) -> ProofTrace:
        def dist(parts):
            return validate_distribution(parts, alphabet)

        return cls(
            tuple(dist(p) for p in data["premises"]),
            tuple(
                SubstitutionStep(dist(s["left"]), dist(s["right"]), s["position"], dist(s["result"]))
                for s in data["steps"]
            ),
            dist(data["conclusion"]),
        )


@dataclass
class SaturationResult:
    """Outcome of a saturation run.

    ``status`` is ``"derived"`` (goal reached), ``"fixpoint"`` (closure
    complete without the goal), ``"budget"`` (size or time cap hit) or
    ``"cancelled"``.  Only ``"derived"`` carries a trace.
    """

    status: str
    trace: ProofTrace | None
    premises: int
    derived: int
    mode: str = "ordinary"
    elapsed: float = field(default=0.0, compare=False)

    @property
    def succeeded(self) -> bool:
        return self.status == "derived"

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "status": self.status,
            "premises": self.premises,
            "derived": self.derived,
            "steps": None if self.trace is None else len(self.trace.steps),
        }


def saturate(
    premises: Iterable[Distribution],
    goal: Distribution,
    max_derived: int = DEFAULT_MAX_DERIVED,
    time_limit: float | None = None,
    cancel: threading.Event | None = None,
) -> SaturationResult:
    """Close ``premises`` under substitution breadth-first until ``goal`` appears.

    Premises are processed in canonical order and each new distribution is
    combined with every processed one (in both directions, all positions),
    so the run is deterministic.
    """
    start = time.monotonic()
    alphabet = goal.alphabet
    prem = sorted({p for p in premises}, key=lambda d: d.sort_key)
    for p in prem:
        if p.alphabet != alphabet:
            raise AlphabetMismatch(f"premise {p} is not over the goal's alphabet")
    goal_key = goal.key

    keys: list[frozenset[int]] = []
    masks: list[tuple[int, ...]] = []
    shared: list[int] = []
    parent: list[tuple[int, int, int] | None] = []
    index: dict[frozenset[int], int] = {}

    def add(ms: tuple[int, ...], origin: tuple[int, int, int] | None) -> int | None:
        key = frozenset(ms)
        if key in index:
            return None
        ms = canonical_masks(ms)
        idx = len(keys)
        index[key] = idx
        keys.append(key)
        masks.append(ms)
        s = seen = 0
        for m in ms:
            s |= seen & m
            seen |= m
        shared.append(s)
        parent.append(origin)
        return idx

    queue: deque[int] = deque()
    for p in prem:
        idx = add(p.masks, None)
        if idx is not None:
            queue.append(idx)

    def result(status: str, goal_idx: int | None = None) -> SaturationResult:
        trace = None
        if goal_idx is not None:
            trace = _extract_trace(goal_idx, len(prem), masks, parent, alphabet)
        return SaturationResult(
            status, trace, len(prem), len(keys) - len(prem), elapsed=time.monotonic() - start
        )

    if goal_key in index:
        return result("derived", index[goal_key])

    # processed distributions indexed by part (as right operands) and by
    # shared-symbol set (as left operands), so only substitutable pairs are visited
    by_part: dict[int, list[tuple[int, int]]] = {}
    by_shared: dict[int, list[int]] = {}
    checks = 0
    while queue:
        x = queue.popleft()
        for k, part in enumerate(masks[x]):
            by_part.setdefault(part, []).append((x, k))
        by_shared.setdefault(shared[x], []).append(x)
        pairs: list[tuple[int, int, int]] = []
        a = shared[x]
        for part, users in by_part.items():
            if a & part == a:
                pairs.extend((x, y, k) for y, k in users)
        for k, part in enumerate(masks[x]):
            for sh, lefts in by_shared.items():
                if sh & part == sh:
                    pairs.extend((y, x, k) for y in lefts if y != x)
        for left, right, k in pairs:
            new = _substitute_masks(masks[left], masks[right], k)
            idx = add(new, (left, right, k + 1))
            if idx is None:
                continue
            if keys[idx] == goal_key:
                return result("derived", idx)
            queue.append(idx)
            if len(keys) - len(prem) >= max_derived:
                return result("budget")
        checks += 1
        if checks & 15 == 0:
            if cancel is not None and cancel.is_set():
                return result("cancelled")
            if time_limit is not None and time.monotonic() - start > time_limit:
                return result("budget")
    return result("fixpoint")


def _extract_trace(goal_idx, n_premises, masks, parent, alphabet) -> ProofTrace:
    needed: set[int] = set()
    stack = [goal_idx]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        if parent[i] is not None:
            stack.extend(parent[i][:2])

    def dist(i: int) -> Distribution:
        return Distribution(alphabet, masks[i])

    # indices grow in derivation order, so sorting gives a valid replay order
    steps = tuple(
        SubstitutionStep(dist(parent[i][0]), dist(parent[i][1]), parent[i][2], dist(i))
        for i in sorted(needed)
        if parent[i] is not None
    )
    premises = tuple(dist(i) for i in range(n_premises))
    return ProofTrace(premises, steps, dist(goal_idx))


def strengthened_validate(
    p: CandidateReduction,
    max_derived: int = DEFAULT_MAX_DERIVED,
    time_limit: float | None = None,
    cancel: threading.Event | None = None,
    try_ordinary: bool = True,
) -> tuple[SaturationResult | None, SaturationResult | None]:
    """Try the members alone, then the members plus every merge above them.

    Returns ``(ordinary, strengthened)``; the second is None when the first
    already succeeded or was cancelled.
    """
    ordinary = None
    if try_ordinary:
        ordinary = saturate(p.members, p.source, max_derived, time_limit, cancel)
        if ordinary.succeeded or ordinary.status == "cancelled":
            return ordinary, None
    premises = list(p.members) + list(upward_set(p))
    strong = saturate(premises, p.source, max_derived, time_limit, cancel)
    strong.mode = "strengthened"
    return ordinary, strong
