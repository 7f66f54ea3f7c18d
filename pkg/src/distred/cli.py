"""Command-line entry point.

Exit codes: 0 valid / yes / found, 1 not a reduction / no, 2 unknown or
search exhausted, 3 usage error, 4 unreadable or malformed input, 5 a
capacity guardrail was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any, Sequence

from .core import Distribution, dependence, independence
from .counterexample import build_lcand
from .errors import CapacityExceeded, DistredError, SizeCapExceeded
from .generator import (
    GENERATOR_MAX_DERIVED,
    GeneratorOptions,
    collect_all_validated,
    incremental_generate,
    recursive_generate,
)
from .io import (
    ParseError,
    dumps,
    format_distribution,
    read_distributions,
    read_language,
    result_document,
    trace_lines,
)
from .language import decomposition_closure, format_word
from .lattice import CandidateReduction
from .structural import to_dot
from .substitution import DEFAULT_MAX_DERIVED
from .verifier import Outcome, Verdict, VerifyOptions, exists_reduction, verify_reduction

EXIT_YES, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE, EXIT_INPUT, EXIT_CAPACITY = range(6)

_OUTCOME_EXIT = {Outcome.VALID: EXIT_YES, Outcome.NOT: EXIT_NO, Outcome.UNKNOWN: EXIT_UNKNOWN}
_STATUS_EXIT = {"found": EXIT_YES, "no_reduction": EXIT_NO, "exhausted": EXIT_UNKNOWN, "budget": EXIT_UNKNOWN}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2, which is taken
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Output:
    def __init__(self, args: argparse.Namespace):
        self.args = args

    def emit(self, command: str, result: dict[str, Any], timings: dict[str, float], text: list[str]) -> None:
        if self.args.format == "text":
            out = "\n".join(text) + "\n"
        else:
            out = dumps(result_document(command, result, timings if self.args.timings else {}))
        if self.args.output:
            with open(self.args.output, "w") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)


def _load_one(path: str, as_json: bool) -> Distribution:
    return read_distributions(path, as_json).single(path)


def _verify_options(args: argparse.Namespace) -> VerifyOptions:
    return VerifyOptions(
        max_derived=args.max_derived or DEFAULT_MAX_DERIVED,
        time_limit=args.time_limit,
        parallel=args.parallel,
    )


def _verdict_text(v: Verdict) -> list[str]:
    lines = [f"source: {format_distribution(v.source)}", f"outcome: {v.outcome.value}"]
    if v.mechanism:
        lines.append(f"mechanism: {v.mechanism}")
    if v.outcome is Outcome.VALID and v.evidence.get("trace"):
        lines.append("proof:")
        lines += ["  " + s for s in trace_lines(v.evidence["trace"])]
    elif v.mechanism == "meet":
        lines.append(f"meet of members: {v.evidence['meet']}")
    elif v.mechanism and v.mechanism.startswith("L_cand"):
        for c in v.evidence["certificates"]:
            lines.append(f"  decomposable for {c['member']} ({c['rule']})")
        lines.append(f"  not decomposable for the source: {v.evidence['source_witness']}")
    return lines


def cmd_verify(args: argparse.Namespace, out: _Output) -> int:
    d = _load_one(args.dist, args.json)
    cand = read_distributions(args.candidate, args.json, default_alphabet=d.alphabet)
    v = verify_reduction(d, CandidateReduction(d, cand.distributions), _verify_options(args))
    out.emit("verify", v.to_dict(), v.timings, _verdict_text(v))
    return _OUTCOME_EXIT[v.outcome]


def cmd_exists(args: argparse.Namespace, out: _Output) -> int:
    d = _load_one(args.dist, args.json)
    v = exists_reduction(d, _verify_options(args))
    answer = {Outcome.VALID: "yes", Outcome.NOT: "no", Outcome.UNKNOWN: "unknown"}[v.outcome]
    result = dict(v.to_dict(), answer=answer)
    out.emit("exists", result, v.timings, [f"reduction exists: {answer}"] + _verdict_text(v))
    return _OUTCOME_EXIT[v.outcome]


def _events_sink(enabled: bool):
    if not enabled:
        return None

    def sink(event: dict) -> None:
        sys.stderr.write(json.dumps(event, sort_keys=True) + "\n")

    return sink


def cmd_reduce(args: argparse.Namespace, out: _Output) -> int:
    d = _load_one(args.dist, args.json)
    opts = GeneratorOptions(
        max_width=args.max_width,
        max_derived=args.max_derived or GENERATOR_MAX_DERIVED,
        time_limit=args.time_limit,
        events=_events_sink(args.events),
    )
    t0 = time.perf_counter()
    if args.strategy == "recursive":
        if args.all:
            raise _UsageError("--all is only available with the incremental strategy")
        rec = recursive_generate(d, opts)
        result = rec.to_dict()
        status = rec.status
        text = [f"status: {status}"]
        if rec.reduction is not None:
            text += [format_distribution(m) for m in rec.reduction.members]
    elif args.all:
        found, summary = collect_all_validated(d, opts)
        winner = summary.candidate
        entries = []
        for v in found:
            entry = v.to_dict()
            entry["optimal"] = v.candidate == winner
            entries.append(entry)
        result = summary.to_dict()
        result["validated"] = entries
        status = summary.status
        text = [f"status: {status}"]
        for e, v in zip(entries, found):
            mark = "*" if e["optimal"] else " "
            dim = v.dimension
            members = "  ".join(format_distribution(m) for m in v.candidate.members)
            text.append(f"{mark} ({dim.height},{dim.width}) {v.mechanism}: {members}")
    else:
        res = incremental_generate(d, opts)
        result = res.to_dict()
        status = res.status
        text = [f"status: {status}"]
        if res.found is not None:
            dim = res.found.dimension
            text.append(f"dimension: ({dim.height},{dim.width}) via {res.found.mechanism}")
            text += [format_distribution(m) for m in res.found.candidate.members]
    result["strategy"] = args.strategy
    out.emit("reduce", result, {"total": time.perf_counter() - t0}, text)
    return _STATUS_EXIT[status]


def cmd_lcand(args: argparse.Namespace, out: _Output) -> int:
    d = _load_one(args.dist, args.json)
    lang = build_lcand(d)
    result: dict[str, Any] = {
        "source": d.to_lists(),
        "classes": [str(c) for c in lang.classes],
        "class_sizes": [c.class_size() for c in lang.classes],
        "total_words": sum(c.class_size() for c in lang.classes),
    }
    text = [str(c) for c in lang.classes]
    if args.materialize:
        words = [format_word(w) for w in lang.materialize()]
        result["words"] = words
        text = words
    out.emit("lcand", result, {}, text)
    return EXIT_YES


def cmd_decomposable(args: argparse.Namespace, out: _Output) -> int:
    d = _load_one(args.dist, args.json)
    lang = read_language(args.language, d.alphabet)
    closure = decomposition_closure(lang, d)
    extra = sorted(closure.words - lang.words)
    result = {
        "distribution": d.to_lists(),
        "language_size": len(lang),
        "closure_size": len(closure),
        "decomposable": not extra,
        "witness": format_word(extra[0]) if extra else None,
    }
    text = [f"decomposable: {'yes' if not extra else 'no'}"]
    if extra:
        text.append(f"word in the product of projections but not in the language: {format_word(extra[0])}")
    out.emit("decomposable", result, {}, text)
    return EXIT_YES if not extra else EXIT_NO


def cmd_graph(args: argparse.Namespace, out: _Output) -> int:
    d = _load_one(args.dist, args.json)
    dot = to_dot(d, args.kind)
    if args.dot:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(dot)
        else:
            sys.stdout.write(dot)
        return EXIT_YES
    pairs = {frozenset(p) for p in dependence(d)} if args.kind == "dep" else independence(d)
    idx = d.alphabet.index
    edges = sorted(sorted(e, key=idx) for e in pairs if len(e) == 2)
    edges.sort(key=lambda e: (idx(e[0]), idx(e[1])))
    result = {"distribution": d.to_lists(), "kind": args.kind, "vertices": list(d.alphabet.symbols), "edges": edges}
    out.emit("graph", result, {}, [f"{a} -- {b}" for a, b in edges])
    return EXIT_YES


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="read distribution files as JSON")
    common.add_argument("--format", choices=["json", "text"], default="json", help="output format (default json)")
    common.add_argument("-o", "--output", help="write the result here instead of stdout")
    common.add_argument(
        "--no-timings", dest="timings", action="store_false", help="leave the timings object empty"
    )

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--max-derived", type=int, help="cap on distributions derived per saturation")
    budget.add_argument("--time-limit", type=float, help="seconds allowed per saturation")
    verifying = argparse.ArgumentParser(add_help=False)
    verifying.add_argument("--parallel", action="store_true", help="run the verification steps concurrently")

    parser = _Parser(prog="distred", description="Verify, refute and generate reductions of distributions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common, budget, verifying], help="check whether a candidate is a reduction")
    p.add_argument("dist", help="file with the source distribution")
    p.add_argument("candidate", help="file with the candidate's distributions")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("exists", parents=[common, budget, verifying], help="decide whether any reduction exists")
    p.add_argument("dist")
    p.set_defaults(func=cmd_exists)

    p = sub.add_parser("reduce", parents=[common, budget], help="generate a small reduction")
    p.add_argument("dist")
    p.add_argument("--strategy", choices=["incremental", "recursive"], default="incremental")
    p.add_argument("--max-width", type=int, help="largest member size to consider")
    p.add_argument("--all", action="store_true", help="report every validated reduction found")
    p.add_argument("--events", action="store_true", help="stream search events to stderr as JSON lines")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("lcand", parents=[common], help="print the template counter-example")
    p.add_argument("dist")
    p.add_argument("--materialize", action="store_true", help="list every word instead of count vectors")
    p.set_defaults(func=cmd_lcand)

    p = sub.add_parser("decomposable", parents=[common], help="check a finite language for decomposability")
    p.add_argument("language", help="file with one word per line")
    p.add_argument("dist")
    p.set_defaults(func=cmd_decomposable)

    p = sub.add_parser("graph", parents=[common], help="dependence or independence graph")
    p.add_argument("dist")
    p.add_argument("--kind", choices=["dep", "indep"], default="dep")
    p.add_argument("--dot", action="store_true", help="emit Graphviz DOT")
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, _Output(args))
    except _UsageError as exc:
        print(f"distred: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"distred: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapacityExceeded, SizeCapExceeded) as exc:
        print(f"distred: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DistredError, ValueError) as exc:
        print(f"distred: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
