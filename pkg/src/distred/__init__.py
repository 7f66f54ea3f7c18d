"""Reductions of distributions: verification, refutation and generation.

A distribution is a cover of an alphabet by incomparable sub-alphabets.  A
reduction replaces it by several smaller distributions that agree with it on
the decomposability of every language.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Alphabet,
    Distribution,
    IndexPartition,
    all_merges,
    dependence,
    independence,
    join,
    keep_minimal,
    leq_sigma,
    meet,
    meet_all,
    merge,
    minimal_merges,
    validate_distribution,
)
from .counterexample import build_lcand, parikh_decomposable, refute_candidate  # noqa: E402
from .errors import (  # noqa: E402
    AlphabetMismatch,
    CapacityExceeded,
    DistredError,
    DistributionError,
    MalformedCandidate,
    SizeCapExceeded,
)
from .generator import (  # noqa: E402
    GeneratorOptions,
    collect_all_validated,
    incremental_generate,
    recursive_generate,
)
from .language import FiniteLanguage, is_decomposable, sync_product, trace_closure  # noqa: E402
from .lattice import CandidateReduction, Dimension, compare_optimality, dimension  # noqa: E402
from .structural import no_reduction_check, ring  # noqa: E402
from .substitution import ProofTrace, saturate, strengthened_validate, substitute  # noqa: E402
from .verifier import (  # noqa: E402
    Outcome,
    Verdict,
    VerifyOptions,
    exists_reduction,
    is_reduction_of_some,
    verify_reduction,
)

__all__ = [
    "Alphabet",
    "AlphabetMismatch",
    "CapacityExceeded",
    "DistredError",
    "DistributionError",
    "MalformedCandidate",
    "SizeCapExceeded",
    "CandidateReduction",
    "Dimension",
    "Distribution",
    "FiniteLanguage",
    "GeneratorOptions",
    "IndexPartition",
    "Outcome",
    "ProofTrace",
    "Verdict",
    "VerifyOptions",
    "all_merges",
    "build_lcand",
    "collect_all_validated",
    "compare_optimality",
    "dependence",
    "dimension",
    "exists_reduction",
    "incremental_generate",
    "independence",
    "is_decomposable",
    "is_reduction_of_some",
    "join",
    "keep_minimal",
    "leq_sigma",
    "meet",
    "meet_all",
    "merge",
    "minimal_merges",
    "no_reduction_check",
    "parikh_decomposable",
    "recursive_generate",
    "refute_candidate",
    "ring",
    "saturate",
    "strengthened_validate",
    "substitute",
    "sync_product",
    "trace_closure",
    "validate_distribution",
    "verify_reduction",
]
