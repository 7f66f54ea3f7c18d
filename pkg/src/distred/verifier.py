"""Three-valued verification of candidate reductions.

Steps, cheapest first:

1. the meet of the members must equal the source;
2. the template counter-example must not be decomposable for every member;
3. substitution from the members derives the source;
4. substitution from the members and every merge above them derives it;
5. otherwise the answer is Unknown.

Steps 1 and 2 can only refute, 3 and 4 can only validate, and all four are
sound, so the lowest conclusive step decides regardless of scheduling.
"""

from __future__ import annotations

import enum
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Iterable

from .core import Distribution, keep_minimal, meet_all, minimal_merges
from .counterexample import refute_candidate
from .errors import AlphabetMismatch, MalformedCandidate, SizeCapExceeded
from .lattice import CandidateReduction, upward_set
from .structural import StructuralSession
from .substitution import DEFAULT_MAX_DERIVED, SaturationResult, saturate


class Outcome(str, enum.Enum):
    VALID = "ValidReduction"
    NOT = "NotReduction"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass
class Verdict:
    outcome: Outcome
    mechanism: str | None
    source: Distribution
    candidate: CandidateReduction | None
    evidence: dict[str, Any] = field(default_factory=dict)
    diagnostics: list[dict[str, Any]] = field(default_factory=list)
    trace: Any = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def is_valid(self) -> bool:
        return self.outcome is Outcome.VALID

    @property
    def is_refuted(self) -> bool:
        return self.outcome is Outcome.NOT

    def to_dict(self) -> dict[str, Any]:
        """Deterministic payload; timings are kept out of it on purpose."""
        return {
            "outcome": self.outcome.value,
            "mechanism": self.mechanism,
            "source": self.source.to_lists(),
            "candidate": None
            if self.candidate is None
            else [m.to_lists() for m in self.candidate.members],
            "evidence": self.evidence,
            "diagnostics": self.diagnostics,
        }


@dataclass
class VerifyOptions:
    max_derived: int = DEFAULT_MAX_DERIVED
    time_limit: float | None = None
    parallel: bool = False


def _as_candidate(d: Distribution, p) -> CandidateReduction:
    if isinstance(p, CandidateReduction):
        if p.source != d:
            return CandidateReduction(d, p.members)
        return p
    return CandidateReduction(d, p)


def check_well_formed(d: Distribution, p: CandidateReduction) -> None:
    if len(p) < 2:
        raise MalformedCandidate("a reduction needs at least two incomparable members")
    for m in p.members:
        if m.alphabet != d.alphabet:
            raise AlphabetMismatch(f"{m} is not over the alphabet of {d}")
        if len(m) >= len(d):
            raise MalformedCandidate(f"{m} is not smaller than {d}")


def _step_meet(p: CandidateReduction) -> tuple[Outcome | None, dict]:
    m = meet_all(p.members) if p.members else None
    ok = m == p.source
    info = {"step": 1, "name": "meet", "meet": None if m is None else m.to_lists(), "equal": ok}
    if ok:
        return None, info
    return Outcome.NOT, info


def _step_lcand(p: CandidateReduction, session: StructuralSession) -> tuple[Outcome | None, dict, Any]:
    ev = refute_candidate(p, session)
    info: dict[str, Any] = {"step": 2, "name": "lcand", "refuted": ev is not None}
    if ev is None:
        return None, info, None
    return Outcome.NOT, info, ev


def _sat_info(step: int, res: SaturationResult | None, error: str | None = None) -> dict:
    info: dict[str, Any] = {"step": step, "name": "sub" if step == 3 else "strengthened_sub"}
    if error is not None:
        info["status"] = "skipped"
        info["reason"] = error
    elif res is not None:
        info.update(res.summary())
    return info


def _run_steps(
    p: CandidateReduction,
    opts: VerifyOptions,
    cancel: threading.Event | None = None,
) -> list[Callable[[], tuple]]:
    session = StructuralSession(p.source)

    def s1():
        return _step_meet(p) + (None,)

    def s2():
        return _step_lcand(p, session)

    def s3():
        res = saturate(p.members, p.source, opts.max_derived, opts.time_limit, cancel)
        return (Outcome.VALID if res.succeeded else None), _sat_info(3, res), res

    def s4():
        try:
            premises = list(p.members) + list(upward_set(p))
        except SizeCapExceeded as exc:
            return None, _sat_info(4, None, str(exc)), None
        res = saturate(premises, p.source, opts.max_derived, opts.time_limit, cancel)
        res.mode = "strengthened"
        return (Outcome.VALID if res.succeeded else None), _sat_info(4, res), res

    return [s1, s2, s3, s4]


_MECHANISM = {1: "meet", 3: "sub", 4: "S sub"}


def _conclude(p: CandidateReduction, k: int, outcome: Outcome, payload, diagnostics, timings) -> Verdict:
    evidence: dict[str, Any]
    trace = None
    if k == 1:
        mechanism = "meet"
        evidence = {"kind": "meet", "meet": diagnostics[-1]["meet"], "source": p.source.to_lists()}
    elif k == 2:
        mechanism = payload.label
        evidence = payload.to_dict()
    else:
        mechanism = _MECHANISM[k]
        trace = payload.trace
        evidence = {"kind": "substitution", "mode": payload.mode, "trace": trace.to_dict()}
    return Verdict(outcome, mechanism, p.source, p, evidence, diagnostics, trace, timings)


def verify_reduction(
    d: Distribution,
    p: CandidateReduction | Iterable[Distribution],
    options: VerifyOptions | None = None,
    *,
    check_shape: bool = True,
) -> Verdict:
    opts = options or VerifyOptions()
    cand = _as_candidate(d, p)
    if check_shape:
        check_well_formed(d, cand)
    if opts.parallel:
        return _verify_parallel(cand, opts)
    diagnostics: list[dict] = []
    timings: dict[str, float] = {}
    for k, step in enumerate(_run_steps(cand, opts), start=1):
        t0 = time.perf_counter()
        outcome, info, payload = step()
        timings[f"step{k}"] = time.perf_counter() - t0
        diagnostics.append(info)
        if outcome is not None:
            return _conclude(cand, k, outcome, payload, diagnostics, timings)
    return Verdict(Outcome.UNKNOWN, None, d, cand, {"kind": "unknown"}, diagnostics, None, timings)


def _verify_parallel(cand: CandidateReduction, opts: VerifyOptions) -> Verdict:
    cancel = threading.Event()
    steps = _run_steps(cand, opts, cancel)
    diagnostics: list[dict] = []
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=len(steps)) as pool:
        futures = [pool.submit(s) for s in steps]
        try:
            for k, fut in enumerate(futures, start=1):
                outcome, info, payload = fut.result()
                timings[f"step{k}"] = time.perf_counter() - t0
                diagnostics.append(info)
                if outcome is not None:
                    return _conclude(cand, k, outcome, payload, diagnostics, timings)
        finally:
            cancel.set()
    return Verdict(Outcome.UNKNOWN, None, cand.source, cand, {"kind": "unknown"}, diagnostics, None, timings)


def exists_reduction(d: Distribution, options: VerifyOptions | None = None) -> Verdict:
    """Decide existence by verifying the minimal elements of the two-part merges."""
    t0 = time.perf_counter()
    session = StructuralSession(d)
    structural = session.no_reduction_check() if len(d) >= 3 else None
    bottom = keep_minimal(minimal_merges(d)) if len(d) >= 3 else ()
    if not bottom:
        return Verdict(
            Outcome.NOT,
            "empty",
            d,
            CandidateReduction(d, ()),
            {"kind": "empty", "reason": "no merge of the source is a proper distribution"},
            [{"name": "no_reduction_check", "result": structural}],
            None,
            {"total": time.perf_counter() - t0},
        )
    verdict = verify_reduction(d, bottom, options, check_shape=False)
    verdict.diagnostics.insert(0, {"name": "no_reduction_check", "result": structural})
    if verdict.outcome is Outcome.NOT and verdict.mechanism and verdict.mechanism.startswith("L_cand"):
        verdict.evidence["no_reduction_check"] = structural
    verdict.timings["total"] = time.perf_counter() - t0
    return verdict


def is_reduction_of_some(p: Iterable[Distribution], options: VerifyOptions | None = None) -> Verdict:
    members = keep_minimal(p)
    if len(members) < 2:
        raise MalformedCandidate("fewer than two incomparable members remain")
    return verify_reduction(meet_all(members), members, options)


def is_compact(d: Distribution, p: CandidateReduction, options: VerifyOptions | None = None) -> bool | None:
    """Whether no proper subset of ``p`` is a reduction (exponential; small inputs only).

    None when some proper subset could be neither validated nor refuted.
    """
    if len(p) > 6:
        raise ValueError("compactness check is limited to six members")
    unknown = False
    for r in range(2, len(p)):
        for sub in combinations(p.members, r):
            v = verify_reduction(d, sub, options, check_shape=False)
            if v.is_valid:
                return False
            if v.outcome is Outcome.UNKNOWN:
                unknown = True
    return None if unknown else True
