"""Exact Schur multipliers, epicenters and capability of special p-groups of rank 2.

The package computes the isomorphism type of M(G) for class-2 p-groups
with elementary abelian central quotient via exact F_p linear algebra,
verifies the classification theorems for special rank-2 groups over
enumerated families, and cross-checks everything against an independent
bar-resolution homology oracle.
"""

from .catalog import IsoType, make_named, nonresidue, recognize
from .errors import (
    BudgetExceededError, CapExceededError, DimensionMismatchError, ParseError,
    NotSpecialError, SchurError, UnsupportedShapeError, ValidationError,
)
from .fplin import SubspaceFp, intersect, kernel, member, rref, subspace, subspace_sum
from .multiplier import (
    EpicenterReport, GaneaRecord, MultiplierInvariants, central_lines, epicenter,
    eq1_order, ganea_check, multiplier_invariants, rho_kernel, x1_subspace,
    x2_subspace, x_subspace,
)
from .presentation import (
    ClassTwoPresentation, PresentationDiagnostics, central_quotient, commutator,
    direct_product, elem_inv, elem_mul, elem_pow, eval_f, from_json_dict,
    load_presentation, make_presentation, to_json_dict, transform, validate,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
