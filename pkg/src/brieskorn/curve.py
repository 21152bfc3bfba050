"""Invariants of plane-curve singularities given in factored form.

The input is a germ  f = u_1^p_1 ... u_k^p_k * psi  in two variables with
every multiplicity p_i >= 2 and psi either a nonzero constant or a reduced
germ vanishing at the origin.  From the factored shape one reads off the
annihilator 1-form

    alpha = sum_l  p_l u_1 ... (u_l omitted) ... u_k psi du_l
            + u_1 ... u_k dpsi,

which satisfies  df = u_1^(p_1-1) ... u_k^(p_k-1) alpha  exactly and spans
the kernel of wedging with df.  The dual vector field drives the twisted
quotient giving nu; the saturated Jacobian ideal gives mu; for plane
curves the torsion corrections vanish so the rank of the associated
(a,b)-module is mu + nu.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .errors import InconclusiveError, InputError
from .forms import DiffForm, VectorField, field_from_one_form
from .linalg import Span, Vec, kernel_relations
from .local_algebra import (
    IdealGens,
    jacobian_ideal,
    jet_key_order,
    monomials_below,
    mu,
    poly_vec,
    saturate_at_origin,
    stable_colength,
    twisted_quotient_dim,
)
from .poly import (
    Exponents,
    Poly,
    WeightSystem,
    format_fraction,
    graded_key,
    listing_key,
    weighted_degree,
)


@dataclass(frozen=True)
class FactoredCurve:
    """A factored plane-curve germ  u_1^p_1 ... u_k^p_k * psi."""

    variables: tuple[str, str]
    factors: tuple[tuple[Poly, int], ...]
    residual: Poly

    @classmethod
    def of(
        cls,
        variables: Sequence[str],
        factors: Sequence[tuple[Poly, int]],
        residual: Optional[Poly] = None,
    ) -> "FactoredCurve":
        variables = tuple(variables)
        if len(variables) != 2:
            raise InputError("factored curves live in exactly two variables")
        if not factors:
            raise InputError(
                "no singular locus: at least one branch with multiplicity >= 2 "
                "is required"
            )
        normalized: list[tuple[Poly, int]] = []
        for u, p in factors:
            if u.variables != variables:
                raise InputError("factor lives in a different ring")
            if not isinstance(p, int) or p < 2:
                raise InputError(f"multiplicity must be an integer >= 2, got {p}")
            if u.is_zero or u.is_constant():
                raise InputError("factors must be nonconstant")
            if u.constant_value() != 0:
                raise InputError(f"factor {u} does not vanish at the origin")
            low = min(u.terms, key=graded_key)
            normalized.append((u * (Fraction(1) / u.terms[low]), p))
        for i in range(len(normalized)):
            for j in range(i + 1, len(normalized)):
                if normalized[i][0] == normalized[j][0]:
                    raise InputError(
                        "factors must be pairwise distinct branches "
                        f"({normalized[i][0]} repeats)"
                    )
        if residual is None:
            residual = Poly.constant(variables, 1)
        if residual.variables != variables:
            raise InputError("residual lives in a different ring")
        if residual.is_zero:
            raise InputError("residual must be nonzero")
        if residual.is_constant():
            pass  # nonzero constant: the psi == 1 case up to a unit
        elif residual.constant_value() != 0:
            raise InputError("a nonconstant residual must vanish at the origin")
        return cls(variables, tuple(normalized), residual)

    @property
    def residual_is_constant(self) -> bool:
        return self.residual.is_constant()

    def expand(self) -> Poly:
        f = self.residual
        for u, p in self.factors:
            f = f * u**p
        return f

    def multiplicity_cofactor(self) -> Poly:
        """The product u_1^(p_1-1) ... u_k^(p_k-1)."""
        out = Poly.constant(self.variables, 1)
        for u, p in self.factors:
            out = out * u ** (p - 1)
        return out

    def __str__(self) -> str:
        pieces = [f"({u})^{p}" for u, p in self.factors]
        if not self.residual_is_constant or self.residual.constant_value() != 1:
            pieces.append(f"({self.residual})")
        return " * ".join(pieces)


def annihilator_form(curve: FactoredCurve) -> DiffForm:
    """The 1-form alpha with  df = (product of u_i^(p_i - 1)) * alpha."""
    variables = curve.variables
    alpha = DiffForm.zero(variables, 1)
    product_all = Poly.constant(variables, 1)
    for u, _ in curve.factors:
        product_all = product_all * u
    for l, (u_l, p_l) in enumerate(curve.factors):
        cofactor = Poly.constant(variables, p_l)
        for i, (u_i, _) in enumerate(curve.factors):
            if i != l:
                cofactor = cofactor * u_i
        cofactor = cofactor * curve.residual
        du = DiffForm(
            variables,
            1,
            {(i,): u_l.derivative(v) for i, v in enumerate(variables)},
        )
        alpha = alpha + du * cofactor
    if not curve.residual_is_constant:
        dpsi = DiffForm(
            variables,
            1,
            {(i,): curve.residual.derivative(v) for i, v in enumerate(variables)},
        )
        alpha = alpha + dpsi * product_all
    return alpha


def annihilator_field(curve: FactoredCurve) -> VectorField:
    """Vector field dual to the annihilator form; kills f exactly."""
    field = field_from_one_form(annihilator_form(curve))
    killed = field.apply(curve.expand())
    if not killed.is_zero:
        raise RuntimeError(
            "internal invariant violation: annihilator field does not kill f"
        )
    return field


def _finite_colength_or_none(gens: Sequence[Poly], variables, cap: int) -> Optional[int]:
    nonzero = [g for g in gens if not g.is_zero]
    if not nonzero:
        return None
    ideal = IdealGens.of(variables, nonzero)
    try:
        dim, _, _ = stable_colength(ideal, start=4, cap=cap)
        return dim
    except InconclusiveError:
        return None


def check_hypotheses(curve: FactoredCurve, jet_cap: int = 16) -> bool:
    """Verify the singular-locus hypotheses behind the pipeline.

    Checks, at jet order: the branches are pairwise non-associate and do
    not divide the residual, each branch and the residual are reduced
    (singular locus of each is isolated), and the coefficients of the
    annihilator form vanish simultaneously only at the origin.  Raises
    InputError naming the violated clause.
    """
    variables = curve.variables
    f = curve.expand()
    if f.is_constant():
        raise InputError("no singular locus: f is constant")
    for i, (u, _) in enumerate(curve.factors):
        for j in range(i + 1, len(curve.factors)):
            v = curve.factors[j][0]
            if u.divide_exact(v) is not None or v.divide_exact(u) is not None:
                raise InputError(
                    f"branches {u} and {v} are associate (identical branches)"
                )
    for u, _ in curve.factors:
        if not curve.residual_is_constant and curve.residual.divide_exact(u) is not None:
            raise InputError(f"branch {u} divides the residual {curve.residual}")
        partials = [u.derivative(v) for v in variables]
        if _finite_colength_or_none([u] + partials, variables, jet_cap) is None:
            raise InputError(
                f"branch {u} is not reduced: its singular locus is not isolated"
            )
    if not curve.residual_is_constant:
        psi = curve.residual
        partials = [psi.derivative(v) for v in variables]
        if _finite_colength_or_none([psi] + partials, variables, jet_cap) is None:
            raise InputError(
                f"residual {psi} is not reduced: its singular locus is not isolated"
            )
    alpha = annihilator_form(curve)
    coeffs = [alpha.coefficient((i,)) for i in range(2)]
    if _finite_colength_or_none(coeffs, variables, jet_cap) is None:
        raise InputError(
            "the annihilating field vanishes along a curve "
            "(annihilator-form coefficients share a positive-dimensional zero set)"
        )
    return True


# -- the invariant report -----------------------------------------------------


@dataclass(frozen=True)
class Assumptions:
    torsion_free: bool
    torsion_free_justification: str
    heuristic_jet_orders: tuple[int, ...]
    exact: bool

    def to_dict(self) -> dict:
        return {
            "torsion_free": self.torsion_free,
            "torsion_free_justification": self.torsion_free_justification,
            "heuristic_jet_orders": list(self.heuristic_jet_orders),
            "exact": self.exact,
        }


@dataclass(frozen=True)
class InvariantReport:
    variables: tuple[str, str]
    f: str
    mu: int
    nu: int
    gamma: int
    delta: int
    rank: int
    betti_n: int
    basis_mu: tuple[Poly, ...]
    basis_nu: tuple[Poly, ...]
    a_action: Optional[tuple[tuple[Poly, Fraction], ...]]
    assumptions: Assumptions
    weights: Optional[WeightSystem]

    @property
    def basis(self) -> tuple[Poly, ...]:
        return self.basis_mu + self.basis_nu

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "variables": list(self.variables),
            "mu": self.mu,
            "nu": self.nu,
            "gamma": self.gamma,
            "delta": self.delta,
            "rank": self.rank,
            "betti_n": self.betti_n,
            "basis": [str(p) for p in self.basis],
            "basis_mu": [str(p) for p in self.basis_mu],
            "basis_nu": [str(p) for p in self.basis_nu],
            "a_action": None
            if self.a_action is None
            else [
                {
                    "monomial": str(p),
                    "coefficient": format_fraction(c),
                }
                for p, c in self.a_action
            ],
            "weights": None
            if self.weights is None
            else {
                "weights": [format_fraction(w) for w in self.weights.weights],
                "total_degree": format_fraction(self.weights.total_degree),
            },
            "assumptions": self.assumptions.to_dict(),
        }


def invariants(
    curve: FactoredCurve,
    weights: Optional[Sequence[Fraction]] = None,
    jet_cap: int = 24,
    window: Optional[int] = None,
) -> InvariantReport:
    """Full invariant pipeline: mu, nu, rank = mu + nu, quotient basis,
    and (with a verifying weight certificate) the a-action coefficients.
    """
    # the hypothesis checks are cheap stabilization sweeps; keep their cap
    # at a sane floor even when the main cap is squeezed
    check_hypotheses(curve, jet_cap=max(16, min(jet_cap, 32)))
    f = curve.expand()
    ws = WeightSystem.for_poly(f, weights) if weights is not None else None
    if window is None:
        window = max(p for _, p in curve.factors) + 2
    mu_res = mu(f, ws, jet_cap=jet_cap, window=window)
    field = annihilator_field(curve)
    nu_res = twisted_quotient_dim(
        mu_res.saturated, field, ws, jet_cap=jet_cap, window=window
    )
    rank = mu_res.value + nu_res.dim
    basis_mu = tuple(sorted(mu_res.basis, key=_basis_sort_key))
    basis_nu = tuple(
        sorted(
            (Poly.monomial(curve.variables, e) for e in nu_res.basis),
            key=_basis_sort_key,
        )
    )
    exact = mu_res.exact and nu_res.exact
    heuristic_orders: tuple[int, ...] = tuple(mu_res.jet_orders)
    action = None
    if ws is not None:
        action = a_action(curve, ws, basis_mu + basis_nu, jet_cap=jet_cap)
    assumptions = Assumptions(
        torsion_free=True,
        torsion_free_justification=(
            "plane curve in two variables: both torsion corrections vanish"
        ),
        heuristic_jet_orders=heuristic_orders if not exact else (),
        exact=exact,
    )
    return InvariantReport(
        variables=curve.variables,
        f=str(f),
        mu=mu_res.value,
        nu=nu_res.dim,
        gamma=0,
        delta=0,
        rank=rank,
        betti_n=rank,
        basis_mu=basis_mu,
        basis_nu=basis_nu,
        a_action=action,
        assumptions=assumptions,
        weights=ws,
    )


# -- the a-action and its oracle ----------------------------------------------


def _basis_sort_key(p: Poly):
    """Listing order keyed on the lowest term (for monomials, the monomial)."""
    return listing_key(min(p.terms, key=graded_key))


def a_action_coefficient(ws: WeightSystem, rep: Poly) -> Fraction:
    """Predicted coefficient c with  a[m] = c b[m]:
    (weighted degree of m + sum of the weights) / total degree."""
    degree = rep.quasi_homogeneous_degree(ws.weights)
    if degree is None:
        raise InputError(f"basis representative {rep} is not quasi-homogeneous")
    return (degree + sum(ws.weights, Fraction(0))) / ws.total_degree


def a_action(
    curve: FactoredCurve,
    ws: WeightSystem,
    basis: Sequence[Poly],
    jet_cap: int = 24,
) -> tuple[tuple[Poly, Fraction], ...]:
    """a-action coefficients on the given basis classes, each verified by
    the membership oracle before inclusion."""
    out = []
    for rep in basis:
        coefficient = a_action_coefficient(ws, rep)
        if not verify_a_action(curve, rep, coefficient, jet_cap, ws):
            raise InputError(f"a-action verification failed on monomial {rep}")
        out.append((rep, coefficient))
    return tuple(out)


def _volume_vec(form: DiffForm) -> Vec:
    """Coefficient vector of a 2-form in two variables."""
    return poly_vec(form.coefficient((0, 1)))


def _x_primitive(p: Poly) -> Poly:
    """Termwise primitive in the first variable."""
    terms = {}
    for (a, b), c in p.terms.items():
        terms[(a + 1, b)] = c * Fraction(1, a + 1)
    return Poly(p.variables, terms)


def verify_a_action(
    curve: FactoredCurve,
    rep,
    coefficient: Fraction,
    jet_cap: int,
    ws: Optional[WeightSystem] = None,
) -> bool:
    """Independent oracle for  a[m] = c b[m]  in the quotient by d(h alpha).

    With a acting as multiplication by f and b as df wedge a primitive,
    the claim is the membership of  f m dx^dy - c df ^ xi  in the span of
    the exact forms d(h alpha).  For quasi-homogeneous f only the h of one
    weighted degree can contribute, so the test is a finite exact solve.
    """
    variables = curve.variables
    f = curve.expand()
    if ws is None:
        raise InputError("the a-action oracle needs a weight certificate")
    ws_weights = ws.weights
    alpha = annihilator_form(curve)
    m_poly = rep if isinstance(rep, Poly) else Poly.monomial(variables, rep)
    omega = DiffForm.volume(variables, f * m_poly)
    # xi is an explicit primitive:  d(xi) = m dx^dy  for xi = (int m dx) dy
    xi = DiffForm(variables, 1, {(1,): _x_primitive(m_poly)})
    df = DiffForm(
        variables, 1, {(i,): f.derivative(v) for i, v in enumerate(variables)}
    )
    omega = omega - (df.wedge(xi)) * Poly.constant(variables, coefficient)
    if omega.is_zero:
        return True
    # weighted degree bookkeeping: d(h alpha) matches omega exactly when
    # w(h) = w(omega as a form) - w(alpha as a form)
    target = _form_weighted_degree(omega, ws_weights)
    alpha_degree = _form_weighted_degree(alpha, ws_weights)
    if target is None or alpha_degree is None:
        raise InputError("forms are not quasi-homogeneous under the certificate")
    h_degree = target - alpha_degree
    candidates = _monomials_of_fractional_degree(variables, ws_weights, h_degree, jet_cap)
    if candidates is None:
        raise InconclusiveError(
            "a-action oracle would need multipliers beyond the jet cap",
            jet_cap=jet_cap,
        )
    span = Span(jet_key_order)
    for h_exp in candidates:
        h = Poly.monomial(variables, h_exp)
        span.insert(_volume_vec((alpha * h).d()))
    return span.contains(_volume_vec(omega))


def _form_weighted_degree(form: DiffForm, weights) -> Optional[Fraction]:
    degrees = set()
    for key, coeff in form.terms.items():
        d = coeff.quasi_homogeneous_degree(weights)
        if d is None:
            return None
        degrees.add(d + sum((weights[i] for i in key), Fraction(0)))
    if len(degrees) != 1:
        return None
    return degrees.pop()


def _monomials_of_fractional_degree(
    variables, weights, degree: Fraction, jet_cap: int
) -> Optional[list[Exponents]]:
    """Monomials of the given weighted degree, or None when the slice is
    not fully contained in total degree <= jet_cap."""
    if degree < 0:
        return []
    if degree / min(weights) > jet_cap:
        return None
    return [
        exps
        for exps in monomials_below(len(variables), jet_cap + 1)
        if weighted_degree(exps, weights) == degree
    ]


# -- torsion-free witness -------------------------------------------------------


def torsion_free_witness(
    curve: FactoredCurve,
    jet_order: int = 12,
    weights: Optional[Sequence[Fraction]] = None,
    jet_cap: int = 24,
) -> bool:
    """Jet-order witness that exact forms d(h alpha) lying inside the
    saturated-Jacobian multiples are themselves df ^ d(g) combinations.

    For plane curves this always holds, which makes the check a powerful
    end-to-end self-test of the pipeline.  Returns True on success; a
    too-small window raises InconclusiveError ("window too small"), as
    does a failed membership (which at adequate orders would indicate an
    implementation defect).
    """
    variables = curve.variables
    f = curve.expand()
    if jet_order < f.total_degree() + 2:
        raise InconclusiveError(
            "window too small for the torsion-free witness",
            jet_order=jet_order,
            needed=f.total_degree() + 2,
        )
    ws = WeightSystem.for_poly(f, weights) if weights is not None else None
    alpha = annihilator_form(curve)
    sat = saturate_at_origin(jacobian_ideal(f), ws, jet_cap=jet_cap)
    exact_vectors: list[tuple] = []
    for h_exp in monomials_below(2, jet_order + 1):
        vec = _volume_vec((alpha * Poly.monomial(variables, h_exp)).d())
        if vec:
            exact_vectors.append((("w", h_exp), vec))
    bound = max(
        (sum(e) for _, v in exact_vectors for e in v),
        default=0,
    )
    ideal_vectors: list[tuple] = []
    for gen_index, g in enumerate(sat.ideal.generators):
        g_ord = g.order() or 0
        for m_exp in monomials_below(2, max(bound + 2 - g_ord, 1)):
            prod = g * Poly.monomial(variables, m_exp)
            ideal_vectors.append((("u", gen_index, m_exp), poly_vec(prod)))
    relations = kernel_relations(
        exact_vectors + ideal_vectors,
        key_order=jet_key_order,
    )
    intersection: list[Vec] = []
    for relation in relations:
        vec: Vec = {}
        for tag, scale in relation.items():
            if tag[0] != "w":
                continue
            h_exp = tag[1]
            piece = _volume_vec((alpha * Poly.monomial(variables, h_exp)).d())
            for key, value in piece.items():
                acc = vec.get(key, Fraction(0)) + scale * value
                if acc == 0:
                    vec.pop(key, None)
                else:
                    vec[key] = acc
        if vec:
            intersection.append(vec)
    if not intersection:
        return True
    df = DiffForm(
        variables, 1, {(i,): f.derivative(v) for i, v in enumerate(variables)}
    )
    witness_span = Span(jet_key_order)
    for g_exp in monomials_below(2, jet_order + 1):
        dg = DiffForm.from_poly(Poly.monomial(variables, g_exp)).d()
        vec = _volume_vec(df.wedge(dg))
        if vec:
            witness_span.insert(vec)
    for vec in intersection:
        if not witness_span.contains(vec):
            raise InconclusiveError(
                "torsion-free witness membership failed; raise the jet order "
                "or investigate",
                jet_order=jet_order,
            )
    return True


# -- closed multiples of the annihilator form -----------------------------------


def closed_form_witness(curve: FactoredCurve) -> Optional[Poly]:
    """Closed multiple h0 of alpha, for curves with constant residual.

    When the multiplicities share a common divisor D > 1, the product
    h0 = prod u_i^(p_i/D - 1) satisfies d(h0 alpha) = 0 exactly and is
    returned.  When gcd = 1 the scan over all smaller exponent patterns
    (excluding the pattern of df itself) confirms no closed product form
    exists, and None is returned.
    """
    if not curve.residual_is_constant:
        raise InputError("the closed-form witness applies to constant residuals only")
    alpha = annihilator_form(curve)
    mults = [p for _, p in curve.factors]
    common = gcd(*mults) if len(mults) > 1 else mults[0]
    if common > 1:
        h0 = Poly.constant(curve.variables, 1)
        for u, p in curve.factors:
            h0 = h0 * u ** (p // common - 1)
        if not (alpha * h0).d().is_zero:
            raise RuntimeError(
                "internal invariant violation: predicted witness is not closed"
            )
        return h0
    # gcd = 1: exhaustive scan, excluding the exponents of df / alpha
    def scan(idx: int, exps: list[int]):
        if idx == len(curve.factors):
            if all(e == p - 1 for e, (_, p) in zip(exps, curve.factors)):
                return  # this is df itself, closed for trivial reasons
            h = Poly.constant(curve.variables, 1)
            for (u, _), e in zip(curve.factors, exps):
                h = h * u**e
            if (alpha * h).d().is_zero:
                raise RuntimeError(
                    "internal invariant violation: unexpected closed product form "
                    f"at exponents {tuple(exps)}"
                )
            return
        for e in range(curve.factors[idx][1]):
            scan(idx + 1, exps + [e])

    scan(0, [])
    return None


# -- transversal Milnor numbers --------------------------------------------------


def transversal_milnor(curve: FactoredCurve, branch: int, jet_cap: int = 16) -> int:
    """Milnor number of the slice singularity transverse to one branch.

    Along a generic smooth point of the branch a transverse line meets f
    in t^(valuation) times a unit, so the one-variable Milnor number is
    the branch valuation of f minus one.  The valuation is computed by
    exact polynomial division, which also catches multiplicities hidden
    in the residual.
    """
    if not 0 <= branch < len(curve.factors):
        raise InputError(f"no branch with index {branch}")
    u, _ = curve.factors[branch]
    partials = [u.derivative(v) for v in curve.variables]
    if _finite_colength_or_none([u] + partials, curve.variables, jet_cap) is None:
        raise InputError(
            f"degenerate slice: branch {u} is singular along a curve"
        )
    valuation = curve.expand().valuation(u)
    if valuation < 2:
        raise InputError(
            f"degenerate slice: f has valuation {valuation} < 2 along {u}"
        )
    return valuation - 1
