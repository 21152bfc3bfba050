"""Jet-space linear algebra at the origin.

Everything here models the local ring of germs at 0 through two finite
windows:

* total-degree jets (monomials of total degree < M), used for general
  input with a stabilization heuristic across two jet orders, and
* weighted-degree slices, used when a weight certificate makes the input
  quasi-homogeneous; slice computations carry no truncation error, so the
  graded results are exact.

The ideal-theoretic operations (colength, saturation by the maximal
ideal, twisted quotients) are all driven by exact rational row reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Optional, Sequence

from .errors import InconclusiveError, InputError
from .forms import VectorField
from .linalg import Span, Vec, kernel_relations
from .poly import Exponents, Poly, WeightSystem, graded_key, listing_key


def jet_key_order(exponents: Exponents) -> tuple:
    """Column order for jet spans: high total degree first, so that rows
    pivoting in low degrees are entirely supported there (this makes
    intersection-with-smaller-jet ranks exact, see Span.restricted_rank)."""
    return (-sum(exponents), tuple(reversed(exponents)))


@lru_cache(maxsize=None)
def monomials_below(n_vars: int, bound: int) -> tuple[Exponents, ...]:
    """All exponent vectors of total degree < bound, in graded order."""
    out: list[Exponents] = []

    def rec(prefix: list[int], remaining: int, budget: int) -> None:
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for e in range(budget + 1):
            rec(prefix + [e], remaining - 1, budget - e)

    if bound > 0:
        rec([], n_vars, bound - 1)
    return tuple(sorted(out, key=graded_key))


@lru_cache(maxsize=None)
def monomials_of_weighted_degree(
    n_vars: int, int_weights: tuple[int, ...], wdeg: int
) -> tuple[Exponents, ...]:
    """All exponent vectors with integer-scaled weighted degree == wdeg."""
    out: list[Exponents] = []

    def rec(prefix: list[int], idx: int, remaining: int) -> None:
        if idx == n_vars - 1:
            w = int_weights[idx]
            if remaining % w == 0:
                out.append(tuple(prefix + [remaining // w]))
            return
        w = int_weights[idx]
        for e in range(remaining // w + 1):
            rec(prefix + [e], idx + 1, remaining - e * w)

    if wdeg >= 0:
        rec([], 0, wdeg)
    return tuple(sorted(out, key=listing_key))


def poly_vec(p: Poly) -> Vec:
    return {e: c for e, c in p.terms.items()}


def vec_poly(vec: Vec, variables: Sequence[str]) -> Poly:
    return Poly(variables, dict(vec))


def truncate_vec(vec: Vec, bound: int) -> Vec:
    return {e: c for e, c in vec.items() if sum(e) < bound}


@dataclass(frozen=True)
class IdealGens:
    """A finite generating set; duplicates and zero generators are removed,
    and each generator is scaled so its lowest term has coefficient 1."""

    variables: tuple[str, ...]
    generators: tuple[Poly, ...]

    @classmethod
    def of(cls, variables: Sequence[str], generators: Sequence[Poly]) -> "IdealGens":
        variables = tuple(variables)
        seen: list[Poly] = []
        for g in generators:
            if g.variables != variables:
                raise InputError("ideal generator lives in a different ring")
            if g.is_zero:
                continue
            low = min(g.terms, key=graded_key)
            normalized = g * (Fraction(1) / g.terms[low])
            if normalized not in seen:
                seen.append(normalized)
        if not seen:
            raise InputError("an ideal needs at least one nonzero generator")
        return cls(variables, tuple(seen))

    def contains_unit(self) -> bool:
        return any(g.constant_value() != 0 for g in self.generators)

    def __str__(self) -> str:
        return "(" + ", ".join(str(g) for g in self.generators) + ")"


def jacobian_ideal(f: Poly) -> IdealGens:
    """Ideal generated by all partial derivatives of f."""
    if f.is_constant():
        raise InputError("the Jacobian ideal of a constant is undefined here")
    return IdealGens.of(f.variables, [f.derivative(v) for v in f.variables])


def ideal_jet_span(I: IdealGens, order: int) -> Span:
    """Row-reduced span of the ideal's image in the degree-< order jet space."""
    span = Span(jet_key_order)
    n = len(I.variables)
    for g in I.generators:
        g_ord = g.order()
        if g_ord is None or g_ord >= order:
            continue
        for m in monomials_below(n, order - g_ord):
            shifted = {
                tuple(a + b for a, b in zip(e, m)): c for e, c in g.terms.items()
            }
            vec = truncate_vec(shifted, order)
            if vec:
                span.insert(vec)
    return span


def jet_quotient(I: IdealGens, order: int) -> tuple[int, list[Exponents]]:
    """Dimension and greedy monomial basis of (jets of degree < order) / I.

    The basis picks, in graded order, each monomial independent of the
    ideal image plus the previously picked monomials.
    """
    span = ideal_jet_span(I, order)
    basis: list[Exponents] = []
    for m in monomials_below(len(I.variables), order):
        if span.insert({m: Fraction(1)}):
            basis.append(m)
    return len(basis), basis


def quotient_dim_jet(I: IdealGens, order: int) -> int:
    if order < 1:
        raise InputError("jet order must be at least 1")
    return jet_quotient(I, order)[0]


def stable_colength(
    I: IdealGens, start: int = 4, cap: int = 24
) -> tuple[int, list[Exponents], tuple[int, int]]:
    """Colength of I detected by agreement at two successive jet orders.

    Returns (dim, monomial basis, (order, order+2)).  Raises
    InconclusiveError when the quotient keeps growing up to the cap,
    which is exactly the infinite-colength signature at desk scale.
    """
    previous: Optional[tuple[int, list[Exponents]]] = None
    order = max(2, start)
    while order <= cap:
        current = jet_quotient(I, order)
        if previous is not None and previous == current:
            return current[0], current[1], (order - 2, order)
        previous = current
        order += 2
    raise InconclusiveError(
        "colength did not stabilize (infinite colength?)", jet_cap=cap
    )


# -- dimension-of-zero-set heuristic ----------------------------------------

_GENERIC_LINE_COEFFS = ((1, 17, 41), (1, 23, 53))


def check_zero_set_is_at_most_curve(I: IdealGens, cap: int = 14) -> None:
    """Heuristic precondition check: V(I) should have dimension <= 1 at 0.

    Cutting with a generic line must leave a finite-colength ideal; two
    different lines are tried to dodge the case where a branch of V(I)
    happens to lie on the first one.
    """
    n = len(I.variables)
    for coeffs in _GENERIC_LINE_COEFFS:
        line = Poly(
            I.variables,
            {
                tuple(1 if j == i else 0 for j in range(n)): coeffs[i % len(coeffs)]
                for i in range(n)
            },
        )
        probe = IdealGens.of(I.variables, list(I.generators) + [line])
        try:
            stable_colength(probe, start=4, cap=cap)
            return
        except InconclusiveError:
            continue
    raise InputError(
        "the zero set of the ideal appears to have dimension > 1 near the origin"
    )


# -- saturation ---------------------------------------------------------------


@dataclass(frozen=True)
class SaturationResult:
    ideal: IdealGens
    exact: bool
    colon_steps: int
    jet_order: Optional[int]
    notes: tuple[str, ...] = ()


def _extract_generators(
    kernel_span: Span, variables: tuple[str, ...], window: int
) -> list[Poly]:
    """Greedy generating set for the ideal whose jet space is the given span."""
    n = len(variables)
    covered = Span(jet_key_order)
    gens: list[Poly] = []
    rows = sorted(
        kernel_span.row_vectors(), key=lambda r: min(graded_key(e) for e in r)
    )
    for row in rows:
        if covered.contains(row):
            continue
        p = vec_poly(row, variables)
        low = min(p.terms, key=graded_key)
        p = p * (Fraction(1) / p.terms[low])
        gens.append(p)
        p_ord = p.order() or 0
        for m in monomials_below(n, max(window - p_ord, 1)):
            shifted = {
                tuple(a + b for a, b in zip(e, m)): c for e, c in p.terms.items()
            }
            vec = truncate_vec(shifted, window)
            if vec:
                covered.insert(vec)
    return gens


def _jet_saturate(I: IdealGens, jet_order: int) -> tuple[Span, int, int]:
    """Iterated colon by the maximal ideal inside a total-degree jet window.

    Returns (stable colon span, window of that span, colon steps used).
    Each colon shrinks the usable window by one degree; the chain stops
    when two consecutive colons agree on the shared window.
    """
    n = len(I.variables)
    current: Span = ideal_jet_span(I, jet_order)
    window = jet_order
    steps = 0
    while window > 2:
        new_window = window - 1
        candidates = []
        for m in monomials_below(n, new_window):
            compound: Vec = {}
            for i in range(n):
                shifted = tuple(e + (1 if j == i else 0) for j, e in enumerate(m))
                residual = current.reduce({shifted: Fraction(1)})
                for key, value in residual.items():
                    compound[(i, key)] = value
            candidates.append((m, compound))
        relations = kernel_relations(
            candidates, key_order=lambda k: (k[0], jet_key_order(k[1]))
        )
        colon = Span(jet_key_order)
        for rel in relations:
            colon.insert(dict(rel))
        stable_rank = current.restricted_rank(lambda e: sum(e) < new_window)
        if colon.rank == stable_rank:
            return current, window, steps
        steps += 1
        current = colon
        window = new_window
    raise InconclusiveError(
        "colon chain by the maximal ideal did not stabilize", jet_order=jet_order
    )


class _GradedIdeal:
    """Weighted-degree slices of a quasi-homogeneous ideal (exact)."""

    def __init__(self, I: IdealGens, weights: tuple[Fraction, ...], wdeg_cap: int):
        self.variables = I.variables
        self.weights = weights
        self.scale = lcm(*(w.denominator for w in weights))
        self.int_weights = tuple(int(w * self.scale) for w in weights)
        self.wdeg_cap = wdeg_cap
        self.gen_degrees: list[int] = []
        for g in I.generators:
            d = g.quasi_homogeneous_degree(weights)
            if d is None:
                raise InputError(
                    f"generator {g} is not quasi-homogeneous for the certificate"
                )
            scaled = d * self.scale
            if scaled.denominator != 1:
                raise InputError("weight scaling failed to clear denominators")
            self.gen_degrees.append(int(scaled))
        self.generators = I.generators
        self._slices: dict[int, Span] = {}

    def monomials(self, wdeg: int) -> tuple[Exponents, ...]:
        return monomials_of_weighted_degree(
            len(self.variables), self.int_weights, wdeg
        )

    def slice_span(self, wdeg: int) -> Span:
        if wdeg not in self._slices:
            span = Span(jet_key_order)
            for g, d in zip(self.generators, self.gen_degrees):
                if wdeg < d:
                    continue
                for m in self.monomials(wdeg - d):
                    vec = {
                        tuple(a + b for a, b in zip(e, m)): c
                        for e, c in g.terms.items()
                    }
                    span.insert(vec)
            self._slices[wdeg] = span
        return self._slices[wdeg]


def _graded_saturate(
    I: IdealGens,
    weights: tuple[Fraction, ...],
    jet_cap: int,
    window: int,
) -> tuple[dict[int, Span], _GradedIdeal, int, int]:
    """Colon chain computed per weighted-degree slice; exact within the cap.

    Returns (stable colon slices, graded ideal helper, wdeg cap actually
    certified, colon steps).
    """
    graded = _GradedIdeal(I, weights, wdeg_cap=0)
    wmax = max(graded.int_weights)
    wdeg_cap = jet_cap * wmax
    graded.wdeg_cap = wdeg_cap
    n = len(I.variables)

    def colon_once(prev: dict[int, Span], top: int) -> dict[int, Span]:
        out: dict[int, Span] = {}
        for wdeg in range(0, top + 1):
            monos = graded.monomials(wdeg)
            if not monos:
                out[wdeg] = Span(jet_key_order)
                continue
            candidates = []
            for m in monos:
                compound: Vec = {}
                for i in range(n):
                    shifted = tuple(
                        e + (1 if j == i else 0) for j, e in enumerate(m)
                    )
                    target = prev.get(wdeg + graded.int_weights[i])
                    if target is None:
                        residual = {shifted: Fraction(1)}
                    else:
                        residual = target.reduce({shifted: Fraction(1)})
                    for key, value in residual.items():
                        compound[(i, key)] = value
                candidates.append((m, compound))
            relations = kernel_relations(
                candidates, key_order=lambda k: (k[0], jet_key_order(k[1]))
            )
            span = Span(jet_key_order)
            for rel in relations:
                span.insert(dict(rel))
            out[wdeg] = span
        return out

    base = {wdeg: graded.slice_span(wdeg) for wdeg in range(wdeg_cap + 1)}
    current = base
    steps = 0
    max_steps = jet_cap
    while steps < max_steps:
        top = wdeg_cap - (steps + 1) * wmax
        if top < 0:
            break
        nxt = colon_once(current, top)
        if all(nxt[w].rank == current[w].rank for w in range(top + 1)):
            # margin: the saturation must add nothing in the top `window`
            # nonempty slices of the certified region (widened past any
            # gap the scaled weights can produce)
            margin = max(window, wmax + 1)
            nonempty = [w for w in range(top + 1) if graded.monomials(w)]
            tail = nonempty[-margin:] if margin > 0 else []
            if any(nxt[w].rank != base[w].rank for w in tail):
                raise InconclusiveError(
                    "graded saturation still active near the cap",
                    wdeg_cap=top,
                    window=window,
                )
            return nxt, graded, top, steps
        current = nxt
        steps += 1
    raise InconclusiveError(
        "graded colon chain did not stabilize", jet_cap=jet_cap, steps=steps
    )


def saturate_at_origin(
    I: IdealGens,
    weights: Optional[WeightSystem] = None,
    jet_cap: int = 24,
    window: int = 4,
) -> SaturationResult:
    """Generators of (I : m^infinity), the sections extending through 0.

    With a weight certificate on quasi-homogeneous input the computation
    runs per weighted-degree slice and is exact.  Otherwise the answer is
    the jet-order approximation at ``jet_cap`` and is flagged heuristic.
    Non-stabilizing colon chains raise InconclusiveError, never return a
    silent wrong answer.
    """
    if I.contains_unit():
        one = Poly.constant(I.variables, 1)
        return SaturationResult(
            IdealGens.of(I.variables, [one]), True, 0, None, ("unit ideal",)
        )
    # cheap precondition sweep; floor the cap so a squeezed main cap does
    # not read as a dimension defect
    check_zero_set_is_at_most_curve(I, cap=max(14, min(jet_cap, 20)))
    notes: list[str] = []
    if weights is not None:
        slices, graded, top, steps = _graded_saturate(
            I, weights.weights, jet_cap, window
        )
        gens: list[Poly] = []
        covered: dict[int, Span] = {w: Span(jet_key_order) for w in range(top + 1)}
        for wdeg in range(top + 1):
            for row in slices[wdeg].row_vectors():
                if covered[wdeg].contains(row):
                    continue
                p = vec_poly(row, I.variables)
                low = min(p.terms, key=graded_key)
                p = p * (Fraction(1) / p.terms[low])
                gens.append(p)
                for target in range(wdeg, top + 1):
                    for m in graded.monomials(target - wdeg):
                        vec = {
                            tuple(a + b for a, b in zip(e, m)): c
                            for e, c in p.terms.items()
                        }
                        covered[target].insert(vec)
        return SaturationResult(
            IdealGens.of(I.variables, gens), True, steps, None, tuple(notes)
        )
    span, window_used, steps = _jet_saturate(I, jet_cap)
    gens = _extract_generators(span, I.variables, window_used)
    notes.append("jet-order approximation without a weight certificate")
    return SaturationResult(
        IdealGens.of(I.variables, gens), False, steps, jet_cap, tuple(notes)
    )


# -- the mu invariant ---------------------------------------------------------


@dataclass(frozen=True)
class MuResult:
    value: int
    jacobian: IdealGens
    saturated: IdealGens
    basis: tuple[Poly, ...]
    exact: bool
    jet_orders: tuple[int, ...]
    saturation: SaturationResult = field(repr=False, default=None)


def _quotient_reps(
    big: Span, work: Span, monos, variables
) -> list[Poly]:
    """Representatives of big/work: greedy monomials inside the big span
    first, then leftover reduced rows of big (some quotients, e.g. by a
    principal ideal on a rotated line, contain no monomials at all)."""
    reps: list[Poly] = []
    for m in monos:
        vec = {m: Fraction(1)}
        if big.contains(vec) and work.insert(vec):
            reps.append(Poly.monomial(variables, m))
    for row in big.row_vectors():
        if work.insert(row):
            p = vec_poly(row, variables)
            low = min(p.terms, key=graded_key)
            reps.append(p * (Fraction(1) / p.terms[low]))
    return reps


def _pair_quotient_jet(
    big: IdealGens, small: IdealGens, order: int
) -> tuple[int, list[Poly]]:
    """dim (big-jets)/(small-jets) with greedy representatives inside the
    big ideal's span (monomials preferred)."""
    big_span = ideal_jet_span(big, order)
    work = ideal_jet_span(small, order)
    small_rank = work.rank
    basis = _quotient_reps(
        big_span, work, monomials_below(len(big.variables), order), big.variables
    )
    assert len(basis) == big_span.rank - small_rank
    return len(basis), basis


def mu(
    f: Poly,
    weights: Optional[WeightSystem] = None,
    jet_cap: int = 24,
    window: int = 4,
) -> MuResult:
    """dim of (saturated Jacobian ideal) / (Jacobian ideal) at the origin.

    For isolated singularities the saturation is the unit ideal and this
    is the classical Milnor number.
    """
    if f.is_zero or f.is_constant():
        raise InputError("mu requires a nonconstant germ")
    if f.constant_value() != 0:
        raise InputError("mu requires f(0) = 0")
    J = jacobian_ideal(f)
    sat = saturate_at_origin(J, weights, jet_cap, window)
    if weights is not None:
        graded_sat = _GradedIdeal(sat.ideal, weights.weights, 0)
        graded_jac = _GradedIdeal(J, weights.weights, 0)
        wmax = max(graded_sat.int_weights)
        wdeg_cap = jet_cap * wmax
        # scaled weights above one can leave genuine gaps of up to
        # wmax - 1 empty slices inside the support; widen the stop window
        window = max(window, wmax + 1)
        total = 0
        basis: list[Poly] = []
        zero_run = 0
        certified = False
        for wdeg in range(wdeg_cap + 1):
            monos = graded_sat.monomials(wdeg)
            if not monos:
                continue
            big = graded_sat.slice_span(wdeg)
            work = Span(jet_key_order)
            for row in graded_jac.slice_span(wdeg).row_vectors():
                work.insert(row)
            contribution = big.rank - work.rank
            basis.extend(_quotient_reps(big, work, monos, f.variables))
            total += contribution
            zero_run = zero_run + 1 if contribution == 0 else 0
            if zero_run >= window:
                certified = True
                break
        if not certified:
            raise InconclusiveError(
                "graded mu computation did not exhaust the quotient",
                wdeg_cap=wdeg_cap,
                window=window,
            )
        return MuResult(total, J, sat.ideal, tuple(basis), True, (), sat)
    previous: Optional[tuple[int, list[Exponents]]] = None
    order = max(6, (f.total_degree() + 2))
    tried: list[int] = []
    while order <= jet_cap:
        current = _pair_quotient_jet(sat.ideal, J, order)
        tried.append(order)
        if previous is not None and previous == current:
            return MuResult(
                current[0], J, sat.ideal, tuple(current[1]), False, tuple(tried), sat
            )
        previous = current
        order += 2
    raise InconclusiveError("mu did not stabilize", jet_orders=tuple(tried))


# -- twisted quotients --------------------------------------------------------


@dataclass(frozen=True)
class TwistedResult:
    dim: int
    basis: tuple[Exponents, ...]
    exact: bool
    detail: tuple[str, ...] = ()


def _twisted_shift(
    V: VectorField, weights: tuple[Fraction, ...]
) -> Optional[Fraction]:
    """Weighted-degree shift of the twisted action, or None when the field
    is not graded for these weights (all coefficient shifts must agree)."""
    shift: Optional[Fraction] = None
    for i, coeff in enumerate(V.coefficients):
        if coeff.is_zero:
            continue
        d = coeff.quasi_homogeneous_degree(weights)
        if d is None:
            return None
        s = d - weights[i]
        if shift is None:
            shift = s
        elif shift != s:
            return None
    div = V.divergence()
    if not div.is_zero:
        d = div.quasi_homogeneous_degree(weights)
        if d is None or (shift is not None and d != shift):
            return None
        shift = d if shift is None else shift
    return shift


def twisted_quotient_dim(
    I: IdealGens,
    V: VectorField,
    weights: Optional[WeightSystem] = None,
    jet_cap: int = 24,
    window: int = 4,
) -> TwistedResult:
    """Dimension and monomial basis of O / (I + twisted-action image).

    The twisted action is h -> V.h + div(V) h.  With a weight certificate
    under which the field is graded, each weighted slice is finite exact
    linear algebra and the scan stops after ``window`` consecutive
    nonempty slices contribute nothing.  Without a certificate the jet
    truncation is used with two-order stabilization and flagged heuristic.
    """
    if V.variables != I.variables:
        raise InputError("ideal and vector field live in different rings")
    n = len(I.variables)
    if weights is not None:
        shift = _twisted_shift(V, weights.weights)
        if shift is not None or V.is_zero:
            graded = _GradedIdeal(I, weights.weights, 0)
            scaled_shift = 0
            if shift is not None:
                s = shift * graded.scale
                if s.denominator != 1:
                    raise InputError("twisted shift does not scale to an integer")
                scaled_shift = int(s)
            wmax = max(graded.int_weights)
            wdeg_cap = jet_cap * wmax - max(0, -scaled_shift)
            window = max(window, wmax + 1)
            total = 0
            basis: list[Exponents] = []
            zero_run = 0
            for wdeg in range(max(wdeg_cap, 0) + 1):
                monos = graded.monomials(wdeg)
                if not monos:
                    continue
                span = Span(jet_key_order)
                for row in graded.slice_span(wdeg).row_vectors():
                    span.insert(row)
                if not V.is_zero:
                    source = wdeg - scaled_shift
                    if source >= 0:
                        for m in graded.monomials(source):
                            image = V.apply_twisted(
                                Poly.monomial(I.variables, m)
                            )
                            if not image.is_zero:
                                span.insert(poly_vec(image))
                picked = 0
                for m in monos:
                    if span.insert({m: Fraction(1)}):
                        basis.append(m)
                        picked += 1
                total += picked
                zero_run = zero_run + 1 if picked == 0 else 0
                if zero_run >= window:
                    return TwistedResult(total, tuple(basis), True, ())
            raise InconclusiveError(
                "graded twisted quotient did not close out",
                wdeg_cap=wdeg_cap,
                window=window,
            )
    # jet path
    orders_tried: list[int] = []
    previous: Optional[tuple[int, list[Exponents]]] = None
    drop = 0
    for i, coeff in enumerate(V.coefficients):
        o = coeff.order()
        if o is not None:
            drop = max(drop, 1 - o)
    div_ord = V.divergence().order()
    if div_ord is not None:
        drop = max(drop, -div_ord)
    order = max(6, min(10, jet_cap))
    while order <= jet_cap:
        span = ideal_jet_span(I, order)
        for m in monomials_below(n, order + drop):
            image = V.apply_twisted(Poly.monomial(I.variables, m))
            vec = truncate_vec(poly_vec(image), order)
            if vec:
                span.insert(vec)
        basis = []
        for m in monomials_below(n, order):
            if span.insert({m: Fraction(1)}):
                basis.append(m)
        current = (len(basis), basis)
        orders_tried.append(order)
        if previous is not None and previous == current:
            return TwistedResult(
                current[0],
                tuple(current[1]),
                False,
                (f"jet stabilization at orders {orders_tried[-2]}, {orders_tried[-1]}",),
            )
        previous = current
        order += 2
    raise InconclusiveError(
        "twisted quotient did not stabilize", jet_orders=tuple(orders_tried)
    )
