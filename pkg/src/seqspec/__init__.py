"""Asymptotic analysis of matrix sequences: finite sections, compactness,
Fredholm detection and essential/transient spectral points."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    AlgebraError,
    ConfigurationError,
    ContractViolation,
    ConvergenceError,
    EvaluationError,
    SeqSpecError,
    SymbolVanishesError,
)
from .sequences import (
    DimensionFunction,
    MatrixSequence,
    Restriction,
    add,
    adjoint,
    alternate,
    direct_sum,
    identity,
    mul,
    padded,
    restrict,
    scale,
    scaled_identity,
    sup_norm,
    zero,
)
from .linalg import extreme_singular_values, hermitian_eig, svd_values
from .toeplitz import (
    StructuredToeplitzSequence,
    Symbol,
    assemble,
    limit_W,
    limit_Wtilde,
    reflect,
    stability_check,
    toeplitz_section,
    winding_number,
)
from .asymptotics import (
    SingularProfile,
    compactness_test,
    essential_rank,
    fredholm_test,
    singular_profile,
    zero_sequence_test,
)
from .arveson import (
    Rules,
    classify_point,
    cross_check_fredholm,
    dichotomy_audit,
    eig_counts,
    essential_spectrum_estimate,
)
from .restriction import ExtractionRequest, extract_convergent, verify_convergence
