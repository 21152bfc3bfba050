"""Exact invariants of plane-curve singularities and their suspensions.

The package computes, in exact rational arithmetic: the saturated
Jacobian ideal and the invariant mu, the twisted De Rham quotient nu,
the rank mu + nu of the associated (a,b)-module with its monomial basis
and a-action, Thom-Sebastiani suspension transport, and a truncated
(a,b)-module algebra with tensor products and regularity checks.
"""

__version__ = "0.1.0"

from .ab_module import (
    ABModule,
    OperatorWord,
    TorsionFixture,
    check_commutation,
    factorial_identity_holds,
    is_regular,
    is_simple_pole,
    normal_order,
    tensor,
    torsion_subspaces,
)
from .curve import (
    FactoredCurve,
    InvariantReport,
    annihilator_field,
    annihilator_form,
    check_hypotheses,
    closed_form_witness,
    invariants,
    torsion_free_witness,
    transversal_milnor,
    verify_a_action,
)
from .errors import BrieskornError, InconclusiveError, InputError, ParseError
from .forms import DiffForm, VectorField, field_from_one_form
from .local_algebra import (
    IdealGens,
    jacobian_ideal,
    mu,
    quotient_dim_jet,
    saturate_at_origin,
    twisted_quotient_dim,
)
from .poly import Poly, WeightSystem, parse_polynomial, weighted_degree
from .suspension import (
    IsolatedGerm,
    SuspensionReport,
    milnor_isolated,
    suspend,
    verify_suspension_direct,
)

__all__ = [
    "ABModule",
    "BrieskornError",
    "DiffForm",
    "FactoredCurve",
    "IdealGens",
    "InconclusiveError",
    "InputError",
    "InvariantReport",
    "IsolatedGerm",
    "OperatorWord",
    "ParseError",
    "Poly",
    "SuspensionReport",
    "TorsionFixture",
    "VectorField",
    "WeightSystem",
    "annihilator_field",
    "annihilator_form",
    "check_commutation",
    "check_hypotheses",
    "closed_form_witness",
    "factorial_identity_holds",
    "field_from_one_form",
    "invariants",
    "is_regular",
    "is_simple_pole",
    "jacobian_ideal",
    "milnor_isolated",
    "mu",
    "normal_order",
    "parse_polynomial",
    "quotient_dim_jet",
    "saturate_at_origin",
    "suspend",
    "tensor",
    "torsion_free_witness",
    "torsion_subspaces",
    "transversal_milnor",
    "twisted_quotient_dim",
    "verify_a_action",
    "verify_suspension_direct",
    "weighted_degree",
]
