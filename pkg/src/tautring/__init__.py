"""Exact standard-monomial calculus for tautological rings of pointed
curves with rational tails: generators, rewriting to a standard basis,
socle evaluation, and Gorenstein pairing checks."""

from .core import (
    Monomial,
    Polynomial,
    RingContext,
    UNIT,
    diag,
    exc,
    kappa,
    kappa_truncate,
    point_k,
    relabel,
)
from .evaluate import (
    DegreeError,
    EvaluationError,
    Evaluator,
    KappaTable,
    KappaTableError,
    evaluate_free,
    socle_monomial,
)
from .forest import (
    EMPTY_FOREST,
    ExceptionalForest,
    StandardMonomial,
    ZERO_CLASS,
    build_forest,
    cluster_monomials,
    dual_forest,
    enumerate_basis,
    is_standard,
    ll_monomials,
    marking_set,
    standard_info,
)
from .grammar import GrammarError, parse_monomial, parse_polynomial
from .linalg import exact_det, exact_rank
from .pairing import (
    BlockConstantReport,
    ConjectureReport,
    GorensteinSymmetryError,
    PairingMatrix,
    ProportionalityFailure,
    block_constant_reports,
    check_duality_classes,
    conjecture_check,
    gorenstein_dims,
    pairing_matrix,
    subdiagonal_block_violations,
    verify_triangular,
)
from .rewrite import (
    Certificate,
    NonTermination,
    Normalizer,
    ReductionStuck,
    RelationInstance,
    instance_R1a,
    instance_R1b,
    instance_R2,
    instance_R3,
)

__version__ = "0.1.0"

__all__ = [
    "BlockConstantReport",
    "Certificate",
    "ConjectureReport",
    "DegreeError",
    "EMPTY_FOREST",
    "EvaluationError",
    "Evaluator",
    "ExceptionalForest",
    "GorensteinSymmetryError",
    "GrammarError",
    "KappaTable",
    "KappaTableError",
    "Monomial",
    "NonTermination",
    "Normalizer",
    "PairingMatrix",
    "Polynomial",
    "ProportionalityFailure",
    "ReductionStuck",
    "RelationInstance",
    "RingContext",
    "StandardMonomial",
    "UNIT",
    "ZERO_CLASS",
    "block_constant_reports",
    "build_forest",
    "check_duality_classes",
    "cluster_monomials",
    "conjecture_check",
    "diag",
    "dual_forest",
    "enumerate_basis",
    "evaluate_free",
    "exact_det",
    "exact_rank",
    "exc",
    "gorenstein_dims",
    "instance_R1a",
    "instance_R1b",
    "instance_R2",
    "instance_R3",
    "is_standard",
    "kappa",
    "kappa_truncate",
    "ll_monomials",
    "marking_set",
    "pairing_matrix",
    "parse_monomial",
    "parse_polynomial",
    "point_k",
    "relabel",
    "socle_monomial",
    "standard_info",
    "subdiagonal_block_violations",
    "verify_triangular",
]
