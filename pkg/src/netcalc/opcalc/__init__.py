"""Finite-section calculus for bounded operators on a separable Hilbert space."""

from .filtrations import STRATEGIES, Filtration, parse_strategies
from .operators import (
    BlockDiag,
    Diagonal,
    DiagonalPlusFiniteRank,
    EntryOracle,
    IdentityMinus,
    Matrix,
    OperatorSpec,
    identity,
    rank_one,
)
from .probes import (
    DEFAULT_STRATEGIES,
    EquivalenceReport,
    FactorReport,
    FredholmResult,
    TraceClassReport,
    block_factor_check,
    det_class_to_trace_class_check,
    doubling_schedule,
    fredholm_det,
    minor_net,
    normalize,
    open_question_probe,
    product_rule_check,
    trace_class_probe,
)
from .sections import (
    CoordinateFrame,
    DenseFrame,
    FiniteSection,
    charpoly,
    compress,
    det_minor,
    exterior_trace,
    exterior_traces,
    principal_minor_sums,
    trace_minor,
    trace_norm,
)
