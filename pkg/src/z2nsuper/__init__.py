"""Symbolic Z_2^n-graded commutative algebra and formal supergeometry.

Exact arithmetic in truncated algebras C[x][[xi]] with Z_2^n-commutative
generators, superdomain morphisms, atlases with cocycle checks under
several sign conventions, split models, and an order-by-order construction
of splitting isomorphisms.
"""

from .atlas import Atlas, check_cocycle, lift_derivative, superize, tangent_lift
from .errors import (
    ArityMismatch,
    BaseMapNotSupported,
    CocycleFailure,
    DegreeMismatch,
    GradingViolation,
    MalformedAtlas,
    NonInvertibleLinearPart,
    ParseError,
    TableMismatch,
    UnknownVariable,
    UnsolvableAtBound,
    Z2nError,
)
from .fileformat import format_document, load, parse_document
from .grading import (
    Convention,
    Degree,
    enumerate_nonzero_degrees,
    koszul_sign,
    parity,
    scalar_product,
)
from .morphism import Morphism, compose, equal_mod, invert_mod_order, make_morphism, pullback
from .polynomial import BasePolynomial
from .report import Report
from .series import (
    J_INFINITY,
    GradedSeries,
    VariableTable,
    add,
    epsilon,
    homogeneous_part,
    j_order,
    mul,
    normalize_word,
    truncate,
)
from .split_model import BundleTransition, GradedBundle, linearize, monomial_count, split_atlas
from .splitting import (
    CechCochain,
    EmbeddingFamily,
    SplittingIso,
    build_phi,
    build_splitting_iso,
    coboundary_solve,
    extend_phi,
    mismatch_cocycle,
    verify_splitting,
)
from .syntax import format_series, parse_expression

import types as _types

__all__ = sorted(
    name for name, value in globals().items()
    if not name.startswith("_") and not isinstance(value, _types.ModuleType)
)
