"""The plane-curve pipeline: annihilator data, hypotheses, invariants,
a-action, witnesses, and transversal Milnor numbers."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from brieskorn.curve import (
    FactoredCurve,
    a_action_coefficient,
    annihilator_field,
    annihilator_form,
    check_hypotheses,
    closed_form_witness,
    invariants,
    torsion_free_witness,
    transversal_milnor,
    verify_a_action,
)
from brieskorn.errors import InconclusiveError, InputError
from brieskorn.forms import DiffForm
from brieskorn.poly import Poly, WeightSystem, parse_polynomial

XY = ("x", "y")


def p(text):
    return parse_polynomial(text, XY)


def sextic() -> FactoredCurve:
    return FactoredCurve.of(XY, [(p("x"), 3)], p("x^3+y^3"))


def cross(p1=2, p2=2) -> FactoredCurve:
    return FactoredCurve.of(XY, [(p("x"), p1), (p("y"), p2)])


FACTOR_POOL = ["x", "y", "x+y", "x-y", "x+y^2", "x^2+y^3"]


def random_corpus(count: int, seed: int = 2024) -> list[FactoredCurve]:
    rng = random.Random(seed)
    corpus = []
    while len(corpus) < count:
        k = rng.randint(1, 3)
        texts = rng.sample(FACTOR_POOL, k)
        factors = [(p(t), rng.randint(2, 5)) for t in texts]
        corpus.append(FactoredCurve.of(XY, factors))
    return corpus


class TestFactoredCurve:
    def test_expand(self):
        assert sextic().expand() == p("x^6 + x^3*y^3")
        assert cross().expand() == p("x^2*y^2")

    def test_multiplicity_must_be_at_least_two(self):
        with pytest.raises(InputError):
            FactoredCurve.of(XY, [(p("x"), 1)])

    def test_no_factors_means_no_singular_curve(self):
        with pytest.raises(InputError) as err:
            FactoredCurve.of(XY, [])
        assert "no singular locus" in str(err.value)

    def test_duplicate_branches_rejected(self):
        with pytest.raises(InputError):
            FactoredCurve.of(XY, [(p("x"), 2), (p("2*x"), 3)])

    def test_residual_constraints(self):
        # nonzero constants are fine (unit rescaling), nonvanishing
        # nonconstant residuals are not
        FactoredCurve.of(XY, [(p("x"), 2)], p("5"))
        with pytest.raises(InputError):
            FactoredCurve.of(XY, [(p("x"), 2)], p("1 + y"))
        with pytest.raises(InputError):
            FactoredCurve.of(XY, [(p("x"), 2)], Poly.zero(XY))

    def test_two_variables_only(self):
        XYZ = ("x", "y", "z")
        with pytest.raises(InputError):
            FactoredCurve.of(XYZ, [(parse_polynomial("x", XYZ), 2)])


class TestAnnihilatorForm:
    def test_sextic(self):
        alpha = annihilator_form(sextic())
        assert alpha == DiffForm(XY, 1, {(0,): p("6*x^3 + 3*y^3"), (1,): p("3*x*y^2")})
        f = sextic().expand()
        df = DiffForm(XY, 1, {(0,): f.derivative("x"), (1,): f.derivative("y")})
        assert df == alpha * p("x^2")

    def test_cross(self):
        alpha = annihilator_form(cross())
        assert alpha == DiffForm(XY, 1, {(0,): p("2*y"), (1,): p("2*x")})

    def test_two_branch_homogeneous(self):
        c = FactoredCurve.of(XY, [(p("x+y"), 2), (p("x-y"), 3)])
        alpha = annihilator_form(c)
        u, v = p("x+y"), p("x-y")
        expected = DiffForm(
            XY,
            1,
            {
                (0,): v * 2 + u * 3,
                (1,): v * 2 + u * (-3),
            },
        )
        assert alpha == expected
        f = c.expand()
        df = DiffForm(XY, 1, {(0,): f.derivative("x"), (1,): f.derivative("y")})
        assert df == alpha * (u * v**2)

    def test_factorization_on_random_corpus(self):
        for curve in random_corpus(12, seed=5):
            alpha = annihilator_form(curve)
            f = curve.expand()
            df = DiffForm(XY, 1, {(0,): f.derivative("x"), (1,): f.derivative("y")})
            assert df == alpha * curve.multiplicity_cofactor()

    def test_wedge_with_df_vanishes(self):
        curve = sextic()
        alpha = annihilator_form(curve)
        f = curve.expand()
        df = DiffForm(XY, 1, {(0,): f.derivative("x"), (1,): f.derivative("y")})
        assert df.wedge(alpha).is_zero

    def test_exact_multiple_lands_in_saturation(self):
        # d(h alpha) for h = x^2 y^2 lies in (x^2) times the top forms
        alpha = annihilator_form(sextic())
        two_form = (alpha * p("x^2*y^2")).d()
        coeff = two_form.coefficient((0, 1))
        assert coeff.divide_exact(p("x^2")) is not None


class TestAnnihilatorField:
    def test_sextic_proportional_to_reference(self):
        field = annihilator_field(sextic())
        assert field.coefficients == (p("3*x*y^2"), p("-3*(2*x^3+y^3)"))

    def test_kills_f_on_corpus(self):
        for curve in random_corpus(12, seed=6):
            field = annihilator_field(curve)
            assert field.apply(curve.expand()).is_zero

    def test_dual_of_cross(self):
        field = annihilator_field(cross())
        assert field.coefficients == (p("2*x"), p("-2*y"))


class TestHypotheses:
    def test_valid_curves_pass(self):
        assert check_hypotheses(sextic())
        assert check_hypotheses(cross())
        # a single multiple smooth branch is legitimate
        assert check_hypotheses(FactoredCurve.of(XY, [(p("y"), 2)]))

    def test_branch_dividing_residual_rejected(self):
        c = FactoredCurve.of(XY, [(p("x"), 2)], p("x*y + x^2"))
        with pytest.raises(InputError) as err:
            check_hypotheses(c)
        assert "divides the residual" in str(err.value)

    def test_nonreduced_branch_rejected(self):
        c = FactoredCurve.of(XY, [(p("x^2"), 2)])
        with pytest.raises(InputError) as err:
            check_hypotheses(c)
        assert "not reduced" in str(err.value)

    def test_nonreduced_residual_rejected(self):
        c = FactoredCurve.of(XY, [(p("x"), 2)], p("y^2"))
        with pytest.raises(InputError) as err:
            check_hypotheses(c)
        assert "not reduced" in str(err.value)

    def test_associate_branches_rejected(self):
        c = FactoredCurve.of(XY, [(p("x+y"), 2), (p("x + y + y^2"), 2)])
        assert check_hypotheses(c)  # genuinely different branches pass
        with pytest.raises(InputError):
            check_hypotheses(
                FactoredCurve.of(XY, [(p("x + y^2"), 2), (p("x*y + x + y^2 - x*y"), 3)])
            )


class TestInvariants:
    def test_sextic_report(self):
        rep = invariants(sextic(), weights=(1, 1))
        assert (rep.mu, rep.nu, rep.rank) == (9, 4, 13)
        assert rep.betti_n == 13
        assert rep.gamma == 0 and rep.delta == 0
        assert [str(b) for b in rep.basis_nu] == ["1", "x", "y", "x*y"]
        assert [str(b) for b in rep.basis_mu] == [
            "x^2", "x^3", "x^4", "x^5",
            "x^2*y", "x^3*y", "x^4*y", "x^5*y",
            "x^2*y^2",
        ]
        assert len(rep.basis) == rep.rank
        assert rep.assumptions.exact
        assert rep.assumptions.torsion_free

    def test_sextic_a_action(self):
        rep = invariants(sextic(), weights=(1, 1))
        for rep_poly, coeff in rep.a_action:
            exps = next(iter(rep_poly.terms))
            assert coeff == Fraction(exps[0] + exps[1] + 2, 6)

    def test_cross_report(self):
        rep = invariants(cross(), weights=(1, 1))
        assert (rep.mu, rep.nu, rep.rank) == (1, 1, 2)
        assert [str(b) for b in rep.basis] == ["x*y", "1"]
        assert dict((str(m), c) for m, c in rep.a_action) == {
            "1": Fraction(1, 2),
            "x*y": Fraction(1),
        }

    def test_unit_scaling_invariance(self):
        base = invariants(sextic(), weights=(1, 1))
        scaled_curve = FactoredCurve.of(XY, [(p("x"), 3)], p("7*x^3 + 7*y^3"))
        scaled = invariants(scaled_curve, weights=(1, 1))
        assert (scaled.mu, scaled.nu, scaled.rank) == (base.mu, base.nu, base.rank)
        third = FactoredCurve.of(XY, [(p("x"), 2), (p("y"), 2)], p("-3"))
        rep = invariants(third, weights=(1, 1))
        assert (rep.mu, rep.nu, rep.rank) == (1, 1, 2)

    def test_heuristic_path_matches(self):
        rep = invariants(sextic(), weights=None, jet_cap=18)
        assert (rep.mu, rep.nu, rep.rank) == (9, 4, 13)
        assert not rep.assumptions.exact
        assert rep.assumptions.heuristic_jet_orders
        assert rep.a_action is None

    def test_unimodular_substitution_invariance(self):
        substitutions = [
            {"x": p("x+y"), "y": p("y")},
            {"x": p("x"), "y": p("x+y")},
            {"x": p("x+2*y"), "y": p("x+3*y")},
        ]
        for sub in substitutions:
            u = p("x").substitute(sub)
            psi = p("x^3+y^3").substitute(sub)
            curve = FactoredCurve.of(XY, [(u, 3)], psi)
            rep = invariants(curve, weights=(1, 1), jet_cap=24)
            assert (rep.mu, rep.nu, rep.rank) == (9, 4, 13)
            assert len(rep.basis) == 13
            assert rep.a_action is not None and len(rep.a_action) == 13

    def test_non_quasi_homogeneous_weights_rejected(self):
        c = FactoredCurve.of(XY, [(p("x"), 2)], p("x^2 + y^3"))
        with pytest.raises(InputError):
            invariants(c, weights=(1, 1))

    def test_multiple_smooth_branch_degenerates_gracefully(self):
        # f = y^2: everything is killed by the annihilating flow
        rep = invariants(FactoredCurve.of(XY, [(p("y"), 2)]), weights=(1, 1))
        assert (rep.mu, rep.nu, rep.rank) == (0, 0, 0)


class TestCrossPathConsistency:
    """The graded and jet paths must agree, and the transported Milnor
    number must match a direct three-variable saturation (an independent
    route through completely different code)."""

    CASES = [
        # (factors as (text, mult), residual, weights, expected mu/nu/rank)
        ([("x", 2)], "x^2+y^3", (3, 2), (7, 2, 9)),
        ([("x", 3)], "x+y^2", (2, 1), (3, 2, 5)),
        # for x^2 y^3 the saturation is (x y^2) and the twisted action
        # kills everything: mu = 1, nu = 0, rank 1 (hand-checked; the
        # Milnor fibre is connected of Euler characteristic zero)
        ([("x", 2), ("y", 3)], None, (1, 1), (1, 0, 1)),
        ([("x+y", 2), ("x-y", 3)], None, (1, 1), (1, 0, 1)),
    ]

    @pytest.mark.parametrize("factors,residual,weights,expected", CASES)
    def test_paths_agree(self, factors, residual, weights, expected):
        from brieskorn.suspension import milnor_isolated, verify_suspension_direct

        curve = FactoredCurve.of(
            XY,
            [(p(t), m) for t, m in factors],
            p(residual) if residual else None,
        )
        graded = invariants(curve, weights=weights, jet_cap=24)
        jet = invariants(curve, weights=None, jet_cap=18)
        assert (graded.mu, graded.nu, graded.rank) == expected
        assert (jet.mu, jet.nu, jet.rank) == expected
        assert graded.assumptions.exact and not jet.assumptions.exact
        germ = milnor_isolated(
            parse_polynomial("z^2", ("z",))
        )
        check = verify_suspension_direct(germ, curve, graded, jet_cap=16)
        assert check.agrees and check.mu_direct == expected[0]


class TestAActionOracle:
    def test_wrong_coefficient_fails(self):
        ws = WeightSystem.for_poly(sextic().expand(), (1, 1))
        assert verify_a_action(sextic(), (0, 0), Fraction(1, 3), 12, ws)
        assert not verify_a_action(sextic(), (0, 0), Fraction(1, 2), 12, ws)

    def test_cross_values(self):
        ws = WeightSystem.for_poly(cross().expand(), (1, 1))
        assert verify_a_action(cross(), (0, 0), Fraction(1, 2), 10, ws)
        assert verify_a_action(cross(), (1, 1), Fraction(1), 10, ws)
        assert not verify_a_action(cross(), (0, 0), Fraction(1, 3), 10, ws)

    def test_coefficient_formula_positive(self):
        ws = WeightSystem.for_poly(sextic().expand(), (1, 1))
        rep = invariants(sextic(), weights=(1, 1))
        for rep_poly, _ in rep.a_action:
            assert a_action_coefficient(ws, rep_poly) > 0


class TestTorsionFreeWitness:
    def test_sextic_at_order_12(self):
        assert torsion_free_witness(sextic(), 12, weights=(1, 1))

    def test_cross_at_order_10(self):
        assert torsion_free_witness(cross(), 10, weights=(1, 1))

    def test_window_too_small(self):
        with pytest.raises(InconclusiveError):
            torsion_free_witness(sextic(), 2)


class TestClosedFormWitness:
    def test_cross_gcd_two(self):
        witness = closed_form_witness(cross())
        assert witness == Poly.constant(XY, 1)
        assert (annihilator_form(cross()) * witness).d().is_zero

    def test_coprime_multiplicities_give_none(self):
        assert closed_form_witness(cross(2, 3)) is None

    def test_x4_y2(self):
        curve = cross(4, 2)
        witness = closed_form_witness(curve)
        assert witness == p("x")
        assert (annihilator_form(curve) * witness).d().is_zero

    def test_requires_constant_residual(self):
        with pytest.raises(InputError):
            closed_form_witness(sextic())

    def test_corpus(self):
        from math import gcd
        for curve in random_corpus(15, seed=9):
            mults = [m for _, m in curve.factors]
            common = gcd(*mults) if len(mults) > 1 else mults[0]
            witness = closed_form_witness(curve)
            if common > 1:
                assert witness is not None
                assert (annihilator_form(curve) * witness).d().is_zero
            else:
                assert witness is None


class TestTransversalMilnor:
    def test_sextic_branch(self):
        assert transversal_milnor(sextic(), 0) == 2

    def test_cross_branches(self):
        assert transversal_milnor(cross(), 0) == 1
        assert transversal_milnor(cross(), 1) == 1

    def test_catches_hidden_multiplicity(self):
        # the residual contributes an extra power of x along the branch
        curve = FactoredCurve.of(XY, [(p("x"), 2)], p("x^2 + x*y^2"))
        # expand = x^3 (x + y^2): branch x has valuation 3, not 2
        assert transversal_milnor(curve, 0) == 2

    def test_degenerate_slice_rejected(self):
        curve = FactoredCurve.of(XY, [(p("x^2"), 2)])
        with pytest.raises(InputError):
            transversal_milnor(curve, 0)

    def test_unknown_branch(self):
        with pytest.raises(InputError):
            transversal_milnor(cross(), 5)
