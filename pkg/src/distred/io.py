"""File formats and result documents.

Distribution files are line oriented::

    # comment
    alphabet: a b c d
    distribution: {a,b} {b,c} {c,d} {d,a}

The ``alphabet:`` line is optional (symbols are then collected from the
parts and sorted) and any number of ``distribution:`` lines may follow.
The same content is accepted as JSON::

    {"alphabet": ["a", "b"], "distributions": [[["a"], ["b"]]]}

Language files hold one word per line, ``epsilon`` standing for the empty
word.  Words are read one character per symbol unless they contain spaces.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .core import Alphabet, Distribution, validate_distribution
from .errors import DistredError, DistributionError
from .language import FiniteLanguage, format_word

SCHEMA_VERSION = 1
TOOL_NAME = "distred"

_SYMBOL = re.compile(r"[A-Za-z0-9_'.]+")


class ParseError(DistredError, ValueError):
    """Malformed input, located by 1-based line and column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = [self.source or "<input>"]
        if self.line is not None:
            where.append(str(self.line))
            if self.column is not None:
                where.append(str(self.column))
        return ":".join(where) + ": " + self.message


@dataclass
class DistributionFile:
    alphabet: Alphabet
    distributions: list[Distribution]

    def single(self, source: str | None = None) -> Distribution:
        if len(self.distributions) != 1:
            raise ParseError(
                f"expected exactly one distribution, found {len(self.distributions)}", source=source
            )
        return self.distributions[0]


def _parse_parts(text: str, line: int, offset: int, source: str | None) -> list[tuple[list[str], int]]:
    """Parse ``{a,b} {c}`` into symbol lists paired with the part's column."""
    parts = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        col = offset + i + 1
        if ch != "{":
            raise ParseError(f"expected '{{', found {ch!r}", line, col, source)
        close = text.find("}", i)
        if close < 0:
            raise ParseError("unterminated part, missing '}'", line, col, source)
        body = text[i + 1 : close]
        if "{" in body:
            raise ParseError("nested '{' inside a part", line, offset + i + 2 + body.index("{"), source)
        symbols = []
        pos = i + 1
        for token in body.split(","):
            stripped = token.strip()
            tcol = offset + pos + (len(token) - len(token.lstrip())) + 1
            if not stripped:
                if body.strip():
                    raise ParseError("empty symbol between commas", line, tcol, source)
            elif not _SYMBOL.fullmatch(stripped):
                raise ParseError(f"invalid symbol {stripped!r}", line, tcol, source)
            else:
                symbols.append(stripped)
            pos += len(token) + 1
        if not symbols:
            raise ParseError("empty part '{}'", line, col, source)
        parts.append((symbols, col))
        i = close + 1
    if not parts:
        raise ParseError("a distribution needs at least one part", line, offset + 1, source)
    return parts


def parse_distribution_text(
    text: str, source: str | None = None, default_alphabet: Alphabet | None = None
) -> DistributionFile:
    """Parse the text format; ``default_alphabet`` applies when no ``alphabet:`` line is given."""
    alphabet_syms: list[str] | None = None
    raw: list[tuple[int, list[tuple[list[str], int]]]] = []
    for lineno, full in enumerate(text.splitlines(), start=1):
        line = full.split("#", 1)[0]
        if not line.strip():
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        offset = len(line) - len(rest)
        if not sep:
            raise ParseError("expected 'alphabet:' or 'distribution:'", lineno, 1, source)
        if key == "alphabet":
            if alphabet_syms is not None:
                raise ParseError("duplicate 'alphabet:' line", lineno, 1, source)
            syms = [s for s in re.split(r"[\s,]+", rest.strip()) if s]
            if not syms:
                raise ParseError("empty alphabet", lineno, offset + 1, source)
            for s in syms:
                if not _SYMBOL.fullmatch(s):
                    raise ParseError(f"invalid symbol {s!r}", lineno, offset + rest.index(s) + 1, source)
            if len(set(syms)) != len(syms):
                raise ParseError("repeated symbol in alphabet", lineno, offset + 1, source)
            alphabet_syms = syms
        elif key == "distribution":
            raw.append((lineno, _parse_parts(rest, lineno, offset, source)))
        else:
            raise ParseError(f"unknown key {key!r}", lineno, 1, source)
    if not raw:
        raise ParseError("no 'distribution:' line found", source=source)
    if alphabet_syms is None:
        if default_alphabet is not None:
            alphabet_syms = list(default_alphabet.symbols)
        else:
            alphabet_syms = sorted({s for _, parts in raw for p, _ in parts for s in p})
    alphabet = Alphabet(alphabet_syms)
    dists = []
    for lineno, parts in raw:
        for symbols, col in parts:
            for s in symbols:
                if s not in alphabet:
                    raise ParseError(f"symbol {s!r} is not in the alphabet", lineno, col, source)
        try:
            dists.append(validate_distribution([p for p, _ in parts], alphabet))
        except DistributionError as exc:
            raise ParseError(str(exc), lineno, None, source) from None
    return DistributionFile(alphabet, dists)


def parse_distribution_json(
    text: str, source: str | None = None, default_alphabet: Alphabet | None = None
) -> DistributionFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from None
    if not isinstance(data, dict) or "distributions" not in data:
        raise ParseError("expected an object with a 'distributions' list", source=source)
    dists_raw = data["distributions"]
    if not isinstance(dists_raw, list) or not dists_raw:
        raise ParseError("'distributions' must be a non-empty list", source=source)
    try:
        syms = data.get("alphabet")
        if not syms:
            if default_alphabet is not None:
                syms = list(default_alphabet.symbols)
            else:
                syms = sorted({s for d in dists_raw for p in d for s in p})
        alphabet = Alphabet(syms)
        dists = []
        for d in dists_raw:
            for p in d:
                if not p:
                    raise ParseError("empty part '{}'", source=source)
                for s in p:
                    if s not in alphabet:
                        raise ParseError(f"symbol {s!r} is not in the alphabet", source=source)
            dists.append(validate_distribution(d, alphabet))
    except ParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), source=source) from None
    return DistributionFile(alphabet, dists)


def format_distribution(d: Distribution) -> str:
    d = d.canonical()
    return " ".join("{" + ",".join(p) + "}" for p in d.to_lists())


def format_distribution_file(f: DistributionFile) -> str:
    """Canonical text: alphabet in order, parts in canonical order."""
    lines = ["alphabet: " + " ".join(f.alphabet.symbols)]
    lines += ["distribution: " + format_distribution(d) for d in f.distributions]
    return "\n".join(lines) + "\n"


def distribution_file_json(f: DistributionFile) -> dict:
    return {
        "alphabet": list(f.alphabet.symbols),
        "distributions": [d.canonical().to_lists() for d in f.distributions],
    }


def read_distributions(
    path: str | Path, as_json: bool = False, default_alphabet: Alphabet | None = None
) -> DistributionFile:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(exc.strerror or str(exc), source=str(path)) from None
    if as_json:
        return parse_distribution_json(text, str(path), default_alphabet)
    return parse_distribution_text(text, str(path), default_alphabet)


def parse_language_text(text: str, alphabet: Alphabet | None = None, source: str | None = None) -> FiniteLanguage:
    words: list[tuple[int, tuple[str, ...]]] = []
    declared: list[str] | None = None
    for lineno, full in enumerate(text.splitlines(), start=1):
        line = full.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            declared = [s for s in re.split(r"[\s,]+", line[len("alphabet:") :].strip()) if s]
            continue
        if line == "epsilon":
            words.append((lineno, ()))
            continue
        words.append((lineno, tuple(line.split()) if " " in line else tuple(line)))
    if declared is not None:
        lang_alpha = Alphabet(declared)
        if alphabet is not None and lang_alpha != alphabet:
            raise ParseError("language alphabet differs from the distribution's", source=source)
    else:
        lang_alpha = alphabet or Alphabet(sorted({s for _, w in words for s in w}))
    for lineno, w in words:
        for s in w:
            if s not in lang_alpha:
                raise ParseError(f"symbol {s!r} is not in the alphabet", lineno, None, source)
    return FiniteLanguage((w for _, w in words), lang_alpha)


def read_language(path: str | Path, alphabet: Alphabet | None = None) -> FiniteLanguage:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(exc.strerror or str(exc), source=str(path)) from None
    return parse_language_text(text, alphabet, str(path))


def format_language(lang: FiniteLanguage) -> str:
    return "".join(format_word(w) + "\n" for w in lang)


def result_document(command: str, result: dict[str, Any], timings: dict[str, float] | None = None) -> dict[str, Any]:
    """Wrap a command payload; ``timings`` is the only run-dependent field."""
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "result": result,
        "timings": {k: round(v, 6) for k, v in (timings or {}).items()},
    }


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def strip_timings(doc: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in doc.items() if k != "timings"}


RESULT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "distred result document",
    "type": "object",
    "required": ["schema_version", "tool", "command", "result", "timings"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {
            "type": "object",
            "required": ["name", "version"],
            "properties": {"name": {"const": TOOL_NAME}, "version": {"type": "string"}},
        },
        "command": {"enum": ["verify", "exists", "reduce", "lcand", "decomposable", "graph"]},
        "result": {"type": "object"},
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}


def trace_lines(trace_dict: dict) -> Sequence[str]:
    """Human-readable rendering of a serialized proof trace."""

    def show(parts):
        return "(" + "|".join("".join(p) if all(len(s) == 1 for s in p) else ",".join(p) for p in parts) + ")"

    return [
        f"{show(s['left'])} |-{s['position']} {show(s['right'])} = {show(s['result'])}"
        for s in trace_dict["steps"]
    ]
