"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

import test_core
import test_counterexample
import test_lattice
import test_structural
import test_substitution
from conftest import BENCHMARK_ROWS, D
from distred.cli import main
from distred.core import keep_minimal, minimal_merges
from distred.counterexample import build_lcand, parikh_decomposable, refute_candidate
from distred.io import DistributionFile, format_distribution_file
from distred.lattice import CandidateReduction, dimension
from distred.structural import (
    StructuralSession,
    fixpoint_rule_decomposable,
    cr_restricted,
    cr_value,
    no_reduction_check,
    ring,
    cr_rule_decomposable,
)
from distred.substitution import strengthened_validate
from distred.verifier import Outcome, exists_reduction, verify_reduction

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number: int, title: str):
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"\nFAIL criterion {number}: {title}")
            raise
        with capsys.disabled():
            print(f"\nPASS criterion {number}: {title}")

    return run


def _write(tmp_path: Path, name: str, d) -> str:
    path = tmp_path / name
    path.write_text(format_distribution_file(DistributionFile(d.alphabet, [d])))
    return str(path)


def _cli(capsys, *argv) -> tuple[int, str]:
    code = main([*argv, "--no-timings"])
    return code, capsys.readouterr().out


def _members(d, *texts):
    return [D(t, d) for t in texts]


def test_criterion_1_benchmark_rows(criterion, capsys, tmp_path):
    with criterion(1, "all 11 benchmark rows reproduce verdict and mechanism"):
        for k, (row, exists, label) in enumerate(BENCHMARK_ROWS):
            path = _write(tmp_path, f"row{k}.dist", D(row))
            t0 = time.perf_counter()
            code, out = _cli(capsys, "exists", path)
            elapsed = time.perf_counter() - t0
            result = json.loads(out)["result"]
            assert result["answer"] == ("yes" if exists else "no"), row
            assert code == (0 if exists else 1), row
            assert result["mechanism"] == label, (row, result["mechanism"])
            assert elapsed <= 60, (row, elapsed)


def test_criterion_2_rings(criterion):
    with criterion(2, "ring family has no reduction"):
        t0 = time.perf_counter()
        for n in range(4, 9):
            v = exists_reduction(ring(n))
            assert v.outcome is Outcome.NOT and v.mechanism == "L_cand"
        v = exists_reduction(ring(3))
        assert v.outcome is Outcome.NOT and v.mechanism == "empty"
        # the structural check alone, without building any language
        assert all(no_reduction_check(ring(n)) for n in range(4, 11))
        assert time.perf_counter() - t0 <= 10


def test_criterion_3_wide_and_narrow(criterion, capsys):
    with criterion(3, "both reductions of the four-part source validate; (2,2) wins"):
        d = D("ab|bc|de|ef")
        wide = verify_reduction(d, _members(d, "ab|bcdef", "abc|def", "abcef|de"))
        narrow = verify_reduction(d, _members(d, "abef|bcde", "abc|def"))
        assert wide.is_valid and narrow.is_valid
        assert dimension(wide.candidate).height == 3 and dimension(wide.candidate).width == 2
        assert dimension(narrow.candidate).height == 2 and dimension(narrow.candidate).width == 2
        code, out = _cli(capsys, "reduce", str(DATA / "four_parts.dist"), "--all")
        assert code == 0
        winners = [v for v in json.loads(out)["result"]["validated"] if v["optimal"]]
        assert [w["dimension"] for w in winners] == [[2, 2]]


def test_criterion_4_strengthened(criterion):
    with criterion(4, "ordinary saturation stalls, strengthened saturation validates"):
        d = D("ab|bc|ac|de|ef|df")
        p = CandidateReduction(d, _members(d, "abde|bcef|acdf", "abc|de|ef|df"))
        ordinary, strong = strengthened_validate(p)
        assert ordinary.status == "fixpoint"
        assert strong.succeeded and strong.trace.replay()
        assert D("abc|def", d) in {s.left for s in strong.trace.steps}
        assert verify_reduction(d, p).outcome is Outcome.VALID


def test_criterion_5_refutation_split(criterion):
    with criterion(5, "template refutes the ring bottom, meet refutes the chain candidate"):
        r5 = D("ab|bc|cd|de|ea")
        v = verify_reduction(r5, keep_minimal(minimal_merges(r5)))
        assert v.diagnostics[0]["equal"] is True
        assert v.outcome is Outcome.NOT and v.mechanism == "L_cand"
        chain = D("ab|bc|cd|de")
        p = CandidateReduction(chain, _members(chain, "abc|cde", "abcd|de"))
        v = verify_reduction(chain, p)
        assert v.outcome is Outcome.NOT and v.mechanism == "meet"
        assert refute_candidate(p) is None


def test_criterion_6_cr_values(criterion):
    with criterion(6, "Cr values on the five-ring"):
        r5 = D("ab|bc|cd|de|ea")
        d1 = D("abc|cd|de|ae", r5)
        assert cr_restricted(d1, r5, "abc", "a", "d") == {2, 3}
        assert cr_restricted(d1, r5, "abc", "c", "d") == {1, 4, 5}
        assert cr_value(d1, r5, "abc", "d") == {1, 2, 3, 4, 5}
        assert cr_value(d1, r5, "abc", "e") == {1, 2, 3, 4, 5}


def test_criterion_7_fixpoint_rule(criterion):
    with criterion(7, "fixpoint rule proves what the Cr rule cannot"):
        d = D("abcg|cde|def|efg")
        dp = D("abcg|cdef|efg", d)
        assert cr_rule_decomposable(dp, d) is False
        assert fixpoint_rule_decomposable(dp, d) is True
        assert cr_value(dp, d, "cdef", "a") == {2, 3, 4}
        assert parikh_decomposable(build_lcand(d), dp)
        assert StructuralSession(d).rule_for(dp) == "fixpoint"


def test_criterion_8_property_suites(criterion):
    with criterion(8, "property suites (a)-(f) report zero violations"):
        # (a) lattice laws and bounds against brute force
        order = test_core.TestOrderAndLattice()
        order.test_meet_is_greatest_lower_bound()
        order.test_join_is_least_upper_bound()
        order.test_lattice_laws()
        for text in test_lattice.SMALL_SOURCES:
            test_lattice.test_candidate_lattice_against_brute_force(text)
        # (b) independence of a meet is the union
        test_core.TestIndependence().test_independence_of_meet_is_union()
        # (c) meet characterisation, exhaustively
        test_lattice.test_meet_characterisation_exhaustive_up_to_five_symbols()
        # (d) template is closed and not decomposable
        test_counterexample.test_template_closed_and_not_decomposable()
        # (e) structural rules agree with the exact oracle
        test_structural.test_rules_agree_with_parikh_oracle()
        # (f) substitution preserves decomposability
        test_substitution.test_substitution_preserves_decomposability()


def test_criterion_9_determinism(criterion, capsys, tmp_path):
    with criterion(9, "repeated runs give byte-identical documents"):
        paths = [_write(tmp_path, f"row{k}.dist", D(row)) for k, (row, _, _) in enumerate(BENCHMARK_ROWS)]
        commands = [("exists", p) for p in paths]
        commands += [
            ("verify", str(DATA / "four_parts.dist"), str(DATA / "four_parts_wide.cand")),
            ("verify", str(DATA / "four_parts.dist"), str(DATA / "four_parts_narrow.cand")),
            ("verify", str(DATA / "ring5.dist"), str(DATA / "ring5_bottom.cand")),
            ("reduce", str(DATA / "four_parts.dist"), "--all"),
            ("reduce", str(DATA / "two_triangles.dist"), "--strategy", "recursive"),
            ("lcand", str(DATA / "ring4.dist")),
            ("graph", str(DATA / "indep_example.dist"), "--kind", "indep"),
        ]
        for argv in commands:
            first = _cli(capsys, *argv)
            second = _cli(capsys, *argv)
            assert first == second, argv
            assert json.loads(first[1])["timings"] == {}
