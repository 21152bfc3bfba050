"""Thom-Sebastiani suspensions  F(x, y) = f(x) + g(y)  of an isolated
singularity f with a plane curve g.

The invariants transport multiplicatively: the Milnor number of f scales
mu, nu and the rank of the curve's module, and when both factors carry
verified a-action data the suspended module is the tensor product, with
the action coefficients adding on basis pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .ab_module import ABModule, tensor
from .curve import FactoredCurve, InvariantReport
from .errors import InconclusiveError, InputError
from .linalg import Span
from .local_algebra import (
    IdealGens,
    jacobian_ideal,
    jet_key_order,
    monomials_below,
    mu,
    poly_vec,
    stable_colength,
)
from .poly import (
    Exponents,
    Poly,
    WeightSystem,
    format_fraction,
    listing_key,
    weighted_degree,
)


@dataclass(frozen=True)
class IsolatedGerm:
    """An isolated singularity with its Milnor data and optional weight
    certificate carrying verified a-action coefficients."""

    poly: Poly
    milnor: int
    basis: tuple[Exponents, ...]
    weights: Optional[WeightSystem]
    a_coefficients: Optional[tuple[tuple[Exponents, Fraction], ...]]

    @property
    def variables(self) -> tuple[str, ...]:
        return self.poly.variables

    def monomial_str(self, exponents: Exponents) -> str:
        return str(Poly.monomial(self.variables, exponents))

    def to_dict(self) -> dict:
        return {
            "f": str(self.poly),
            "variables": list(self.variables),
            "milnor": self.milnor,
            "basis": [self.monomial_str(e) for e in self.basis],
            "weights": None
            if self.weights is None
            else [format_fraction(w) for w in self.weights.weights],
            "a_action": None
            if self.a_coefficients is None
            else [
                {"monomial": self.monomial_str(e), "coefficient": format_fraction(c)}
                for e, c in self.a_coefficients
            ],
        }


def _auto_weights(f: Poly) -> Optional[tuple[Fraction, ...]]:
    """Positive weights making f quasi-homogeneous of degree 1, if any.

    Solves the linear system over the exponent vectors; free variables
    (possible when the system is underdetermined) default to 1/deg(f).
    """
    exponents = list(f.terms)
    n = len(f.variables)
    rows = [[Fraction(e) for e in exps] + [Fraction(1)] for exps in exponents]
    pivot_cols: list[int] = []
    row_idx = 0
    for col in range(n):
        pivot_row = None
        for r in range(row_idx, len(rows)):
            if rows[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        rows[row_idx], rows[pivot_row] = rows[pivot_row], rows[row_idx]
        pivot = rows[row_idx][col]
        rows[row_idx] = [v / pivot for v in rows[row_idx]]
        for r in range(len(rows)):
            if r != row_idx and rows[r][col] != 0:
                scale = rows[r][col]
                rows[r] = [a - scale * b for a, b in zip(rows[r], rows[row_idx])]
        pivot_cols.append(col)
        row_idx += 1
    for r in range(row_idx, len(rows)):
        if rows[r][n] != 0:
            return None  # inconsistent: not quasi-homogeneous at all
    default = Fraction(1, max(f.total_degree(), 1))
    weights = [default] * n
    for i, col in enumerate(pivot_cols):
        value = rows[i][n]
        for free_col in range(n):
            if free_col not in pivot_cols and rows[i][free_col] != 0:
                value -= rows[i][free_col] * default
        weights[col] = value
    if any(w <= 0 for w in weights):
        return None
    if f.quasi_homogeneous_degree(tuple(weights)) != 1:
        return None
    return tuple(weights)


def _isolated_action_coefficient(ws: WeightSystem, exponents: Exponents) -> Fraction:
    return (ws.degree_of(exponents) + sum(ws.weights, Fraction(0))) / ws.total_degree


def _verify_isolated_action_univariate(
    f: Poly, exponents: Exponents, coefficient: Fraction
) -> bool:
    """One-variable oracle: the relation  a[m dz] = c b[m dz]  is an exact
    polynomial identity  m f = c f' (primitive of m)."""
    (power,) = exponents
    variables = f.variables
    primitive = Poly.monomial(variables, (power + 1,), Fraction(1, power + 1))
    delta = Poly.monomial(variables, exponents) * f - (
        f.derivative(variables[0]) * primitive * coefficient
    )
    return delta.is_zero


def _verify_isolated_action_slice(
    f: Poly, ws: WeightSystem, exponents: Exponents, coefficient: Fraction, jet_cap: int
) -> bool:
    """Membership oracle in >= 2 variables:  f m vol - c df ^ xi  must lie
    in the span of df ^ d(eta) over monomial (n-1)-forms eta, where xi is
    an explicit primitive of m vol.  Quasi-homogeneity confines eta to a
    single weighted slice, so the solve is finite and exact."""
    from .forms import DiffForm

    variables = f.variables
    n = len(variables)
    m_poly = Poly.monomial(variables, exponents)
    omega = DiffForm.volume(variables, f * m_poly)
    primitive = Poly.monomial(
        variables,
        tuple(e + 1 if i == 0 else e for i, e in enumerate(exponents)),
        Fraction(1, exponents[0] + 1),
    )
    xi = DiffForm(variables, n - 1, {tuple(range(1, n)): primitive})
    df = DiffForm(
        variables, 1, {(i,): f.derivative(v) for i, v in enumerate(variables)}
    )
    omega = omega - df.wedge(xi) * Poly.constant(variables, coefficient)
    if omega.is_zero:
        return True
    top_key = tuple(range(n))
    target = omega.coefficient(top_key)
    target_degree = target.quasi_homogeneous_degree(ws.weights)
    if target_degree is None:
        return False
    span = Span(jet_key_order)
    weight_sum = sum(ws.weights, Fraction(0))
    for index_set in combinations(range(n), n - 2):
        index_weight = sum((ws.weights[j] for j in index_set), Fraction(0))
        for h_exp in monomials_below(n, jet_cap + 1):
            eta_degree = weighted_degree(h_exp, ws.weights) + index_weight
            # df ^ d(eta) has form-degree  d + eta_degree;  match omega
            if ws.total_degree + eta_degree != target_degree + weight_sum:
                continue
            eta = DiffForm(
                variables, n - 2, {index_set: Poly.monomial(variables, h_exp)}
            )
            vec = poly_vec(df.wedge(eta.d()).coefficient(top_key))
            if vec:
                span.insert(vec)
    return span.contains(poly_vec(target))


def milnor_isolated(
    f: Poly,
    jet_cap: int = 24,
    weights: Optional[Sequence[Fraction]] = None,
    verify_action: bool = True,
) -> IsolatedGerm:
    """Milnor number and monomial basis of an isolated singularity.

    Smooth germs are rejected; non-isolated critical points surface as an
    "infinite colength" error when the quotient keeps growing.  When a
    weight certificate is available (given or auto-detected), a-action
    coefficients are attached after passing the membership oracle.
    """
    if f.is_zero or f.is_constant():
        raise InputError("an isolated germ must be nonconstant")
    if f.constant_value() != 0:
        raise InputError("an isolated germ must vanish at the origin")
    J = jacobian_ideal(f)
    try:
        value, basis, _ = stable_colength(J, start=4, cap=jet_cap)
    except InconclusiveError as exc:
        raise InputError(
            f"infinite colength: {f} does not have an isolated critical point"
        ) from exc
    if value == 0:
        raise InputError(f"smooth germ rejected: {f} has Milnor number 0")
    ws: Optional[WeightSystem] = None
    if weights is not None:
        ws = WeightSystem.for_poly(f, weights)
    else:
        detected = _auto_weights(f)
        if detected is not None:
            ws = WeightSystem(detected, 1)
    action: Optional[tuple[tuple[Exponents, Fraction], ...]] = None
    if ws is not None:
        coefficients = []
        for exps in basis:
            c = _isolated_action_coefficient(ws, exps)
            if verify_action:
                if len(f.variables) == 1:
                    ok = _verify_isolated_action_univariate(f, exps, c)
                else:
                    ok = _verify_isolated_action_slice(f, ws, exps, c, jet_cap)
                if not ok:
                    raise InputError(
                        "a-action verification failed on monomial "
                        f"{Poly.monomial(f.variables, exps)}"
                    )
            coefficients.append((exps, c))
        action = tuple(coefficients)
    return IsolatedGerm(
        poly=f,
        milnor=value,
        basis=tuple(sorted(basis, key=listing_key)),
        weights=ws,
        a_coefficients=action,
    )


@dataclass(frozen=True)
class SuspensionReport:
    germ: IsolatedGerm
    curve_report: InvariantReport
    mu: int
    nu: int
    rank: int
    ab_model: Optional[ABModule]
    basis_pairs: tuple[tuple[Exponents, Poly], ...]
    provenance: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "F": f"({self.germ.poly}) + ({self.curve_report.f})",
            "mu": self.mu,
            "nu": self.nu,
            "rank": self.rank,
            "basis_pairs": [
                {
                    "isolated": self.germ.monomial_str(a),
                    "curve": str(b),
                }
                for a, b in self.basis_pairs
            ],
            "ab_model": None if self.ab_model is None else self.ab_model.to_record(),
            "provenance": list(self.provenance),
        }


def suspend(
    germ: IsolatedGerm,
    curve_report: InvariantReport,
    trunc_order: int = 16,
) -> SuspensionReport:
    """Transport invariants through the suspension isomorphism.

    Requires the curve report to carry the torsion-free flag (the
    transport is an isomorphism of the associated modules only then).
    The suspended module is the tensor product of the two diagonal
    quasi-homogeneous models when both sides carry a-action data.
    """
    if not curve_report.assumptions.torsion_free:
        raise InputError(
            "suspension requires the torsion-free property on the curve side"
        )
    if set(germ.variables) & set(curve_report.variables):
        raise InputError(
            "isolated and curve variables must be disjoint for a suspension"
        )
    mu_f = germ.milnor
    mu_total = mu_f * curve_report.mu
    nu_total = mu_f * curve_report.nu
    rank_total = mu_f * curve_report.rank
    provenance = [
        "mu: Milnor number of the isolated factor times curve mu",
        "nu: Milnor number of the isolated factor times curve nu",
        "rank: Milnor number of the isolated factor times curve rank",
    ]
    basis_pairs = tuple(
        (a, b) for a in germ.basis for b in curve_report.basis
    )
    model: Optional[ABModule] = None
    if germ.a_coefficients is not None and curve_report.a_action is not None:
        left = _diagonal_module(
            germ.a_coefficients, trunc_order, label=f"isolated({germ.poly})"
        )
        right = _diagonal_module(
            curve_report.a_action, trunc_order, label=f"curve({curve_report.f})"
        )
        model = tensor(left, right, label=f"suspension({germ.poly} + {curve_report.f})")
        provenance.append(
            "ab_model: tensor of the diagonal models, action coefficients add"
        )
    return SuspensionReport(
        germ=germ,
        curve_report=curve_report,
        mu=mu_total,
        nu=nu_total,
        rank=rank_total,
        ab_model=model,
        basis_pairs=basis_pairs,
        provenance=tuple(provenance),
    )


def _diagonal_module(
    action: Sequence[tuple[Exponents, Fraction]], trunc_order: int, label: str
) -> ABModule:
    rank = len(action)
    matrix = [
        [[0, action[i][1]] if i == j else [] for j in range(rank)]
        for i in range(rank)
    ]
    return ABModule(rank, trunc_order, matrix, label=label)


@dataclass(frozen=True)
class DirectCheck:
    mu_direct: int
    mu_transported: int
    agrees: bool
    exact: bool

    def to_dict(self) -> dict:
        return {
            "mu_direct": self.mu_direct,
            "mu_transported": self.mu_transported,
            "agrees": self.agrees,
            "exact": self.exact,
        }


def verify_suspension_direct(
    germ: IsolatedGerm,
    curve: FactoredCurve,
    curve_report: InvariantReport,
    jet_cap: int = 14,
) -> DirectCheck:
    """Cross-check the transported mu by a direct computation in the
    joined ring: saturate the Jacobian ideal of F = f + g and take the
    quotient dimension.  Desk scale only (at most three variables)."""
    joined = germ.variables + curve.variables
    if len(set(joined)) != len(joined):
        raise InputError("isolated and curve variables must be disjoint")
    if len(joined) > 3:
        raise InputError("direct verification is limited to three variables")
    f_side = germ.poly.substitute(
        {v: Poly.variable(joined, v) for v in germ.variables}
    )
    g_side = curve.expand().substitute(
        {v: Poly.variable(joined, v) for v in curve.variables}
    )
    big_f = f_side + g_side
    ws_joined: Optional[WeightSystem] = None
    if germ.weights is not None and curve_report.weights is not None:
        curve_ws = curve_report.weights
        combined = tuple(germ.weights.weights) + tuple(
            w / curve_ws.total_degree for w in curve_ws.weights
        )
        ws_joined = WeightSystem.for_poly(big_f, combined)
    mu_res = mu(big_f, ws_joined, jet_cap=jet_cap, window=4)
    transported = germ.milnor * curve_report.mu
    return DirectCheck(
        mu_direct=mu_res.value,
        mu_transported=transported,
        agrees=mu_res.value == transported,
        exact=mu_res.exact,
    )
