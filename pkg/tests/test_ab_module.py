"""Truncated (a,b)-modules, normal ordering, and torsion fixtures."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from brieskorn.ab_module import (
    ABModule,
    OperatorWord,
    TorsionFixture,
    a_torsion,
    bpoly,
    check_commutation,
    factorial_identity_holds,
    fixture_axioms_hold,
    is_nilpotent,
    is_regular,
    is_simple_pole,
    mat_power,
    mat_vec,
    nilpotence_exponent,
    normal_order,
    rewrite_normal_order,
    subspaces_equal,
    tensor,
    torsion_subspaces,
)
from brieskorn.errors import InconclusiveError, InputError


def word(letters: str) -> OperatorWord:
    return OperatorWord({tuple(letters): 1})


class TestNormalOrder:
    def test_defining_relation(self):
        assert normal_order(word("ab")) == word("ba") + word("bb")

    def test_a2b2_hand_checked(self):
        # a^2 b^2 = b^2 a^2 + 4 b^3 a + 6 b^4, verified once by hand
        expected = word("bbaa") + 4 * word("bbba") + 6 * word("bbbb")
        assert normal_order(word("aabb")) == expected

    def test_a_bn_rule(self):
        for n in range(1, 7):
            lhs = normal_order(word("a" + "b" * n))
            rhs = OperatorWord.monomial(n, 1) + n * OperatorWord.monomial(n + 1, 0)
            assert lhs == rhs

    def test_already_normal(self):
        w = OperatorWord.monomial(3, 2, Fraction(5, 7))
        assert normal_order(w) == w
        assert w.is_normal()

    @given(st.lists(st.sampled_from("ab"), max_size=7))
    def test_rewriter_oracle_and_confluence(self, letters):
        w = word("".join(letters))
        left = rewrite_normal_order(w, leftmost=True)
        right = rewrite_normal_order(w, leftmost=False)
        fast = normal_order(w)
        assert left == right == fast
        assert fast.is_normal()

    def test_identity_for_small_n(self):
        for n in range(1, 9):
            assert factorial_identity_holds(n)

    def test_identity_n1_is_the_relation(self):
        a, b = word("a"), word("b")
        assert normal_order(a * b - b * a) == word("bb")


class TestABModule:
    def test_rank_one_lambda_b_commutes(self):
        for lam in (Fraction(0), Fraction(1, 3), Fraction(-2)):
            assert check_commutation(ABModule.rank_one(lam))

    def test_generator_with_zero_action_commutes(self):
        # a e = 0 extended by the commutation rule: a(b^n e) = n b^(n+1) e
        module = ABModule(1, 16, [[[]]])
        assert check_commutation(module)
        element = module.generator(0, 3)
        assert module.apply_a(element) == {(0, 4): Fraction(3)}

    def test_matrix_only_action_fails_commutation(self):
        module = ABModule.rank_one(Fraction(1, 2))
        assert not check_commutation(module, derivation_term=False)

    def test_validation(self):
        with pytest.raises(InputError):
            ABModule(0, 16, [])
        with pytest.raises(InputError):
            ABModule(1, 1, [[[0]]])
        with pytest.raises(InputError):
            ABModule(2, 16, [[[0]]])

    def test_serialization_round_trip(self):
        module = ABModule(
            2,
            8,
            [
                [[0, Fraction(1, 3)], [0, 0, Fraction(2)]],
                [[], [0, Fraction(-1)]],
            ],
            label="demo",
        )
        back = ABModule.from_record(module.to_record())
        assert back.rank == module.rank
        assert back.trunc_order == module.trunc_order
        assert back.a_matrix == module.a_matrix
        assert back.label == "demo"


class TestTensor:
    def test_rank_one_coefficients_add(self):
        E = ABModule.rank_one(Fraction(1, 3))
        F = ABModule.rank_one(Fraction(1, 2))
        T = tensor(E, F)
        assert T.rank == 1
        assert T.a_matrix[0][0] == bpoly([0, Fraction(5, 6)])

    def test_rank_multiplicative(self):
        E = ABModule(2, 16, [[[0, 1], []], [[], [0, 2]]])
        F = ABModule(3, 16, [[[0, 1], [], []], [[], [0, 2], []], [[], [], [0, 3]]])
        assert tensor(E, F).rank == 6

    def test_mismatched_truncation_rejected(self):
        with pytest.raises(InputError):
            tensor(ABModule.rank_one(1, 8), ABModule.rank_one(1, 16))

    def test_commutative_up_to_swap(self):
        rng = random.Random(7)

        def rand_module(rank):
            return ABModule(
                rank,
                12,
                [
                    [
                        [0] + [Fraction(rng.randint(-2, 2)) for _ in range(2)]
                        for _ in range(rank)
                    ]
                    for _ in range(rank)
                ],
            )

        E, F = rand_module(2), rand_module(3)
        EF, FE = tensor(E, F), tensor(F, E)

        def swap(index, r_left, r_right):
            i, j = divmod(index, r_right)
            return j * r_left + i

        for col in range(EF.rank):
            for row in range(EF.rank):
                assert (
                    EF.a_matrix[row][col]
                    == FE.a_matrix[swap(row, 2, 3)][swap(col, 2, 3)]
                )

    def test_randomized_properties(self):
        rng = random.Random(11)
        for _ in range(25):
            ranks = rng.randint(1, 3), rng.randint(1, 3)
            mods = []
            for r in ranks:
                matrix = [
                    [
                        [0] + [Fraction(rng.randint(-3, 3)) for _ in range(3)]
                        for _ in range(r)
                    ]
                    for _ in range(r)
                ]
                mods.append(ABModule(r, 16, matrix))
            T = tensor(*mods)
            assert T.rank == ranks[0] * ranks[1]
            assert check_commutation(T)
            assert is_simple_pole(T)


class TestRegularity:
    def test_simple_pole_examples(self):
        assert is_simple_pole(ABModule.rank_one(Fraction(1, 2)))
        assert not is_simple_pole(ABModule(1, 16, [[[1]]]))

    def test_simple_pole_implies_regular_k1(self):
        assert is_regular(ABModule.rank_one(Fraction(3, 4)), 1)

    def test_unit_constant_term_never_regular(self):
        # a e = e escapes every lattice: (1/b a)^m e = b^(-m) e
        module = ABModule(1, 16, [[[1]]])
        for k in (1, 2, 3):
            assert not is_regular(module, k)

    def test_tensor_of_regulars_is_regular(self):
        E = ABModule.rank_one(Fraction(2, 3))
        F = ABModule(2, 16, [[[0, 1], [0, 0, 1]], [[], [0, -1]]])
        assert is_regular(E, 1) and is_regular(F, 1)
        T = tensor(E, F)
        assert is_regular(T, 1) and is_regular(T, 2)

    def test_truncation_guard(self):
        with pytest.raises(InconclusiveError):
            is_regular(ABModule.rank_one(1, trunc_order=3), 2)


def derivation_fixture(dim: int) -> TorsionFixture:
    """b the shift e_i -> e_(i+1), a the weighted shift e_i -> i e_(i+1):
    the truncated model of the rank-one module with a e = 0."""
    a = [[(j if i == j + 1 else 0) for j in range(dim)] for i in range(dim)]
    b = [[(1 if i == j + 1 else 0) for j in range(dim)] for i in range(dim)]
    return TorsionFixture.of(a, b)


class TestTorsionFixtures:
    def test_b_zero_a_nilpotent(self):
        a = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
        zero = [[0] * 3 for _ in range(3)]
        fixture = TorsionFixture.of(a, zero)
        assert fixture_axioms_hold(fixture)
        b_space, a_space = torsion_subspaces(fixture)
        assert len(b_space) == 3 and len(a_space) == 3
        assert subspaces_equal(b_space, a_space)

    def test_a_zero_b_jordan(self):
        # B = A = everything whenever a vanishes and b is nilpotent; only
        # the two-dimensional block also satisfies the commutation rule
        for dim in (2, 4):
            zero = [[0] * dim for _ in range(dim)]
            b = [[(1 if i == j + 1 else 0) for j in range(dim)] for i in range(dim)]
            fixture = TorsionFixture.of(zero, b)
            assert fixture.commutation_holds() == (dim == 2)
            b_space, a_space = torsion_subspaces(fixture)
            assert subspaces_equal(b_space, a_space)
            assert len(b_space) == dim
        assert fixture_axioms_hold(
            TorsionFixture.of([[0, 0], [0, 0]], [[0, 0], [1, 0]])
        )

    def test_derivation_fixture(self):
        for dim in (2, 3, 5):
            fixture = derivation_fixture(dim)
            assert fixture.commutation_holds()
            assert fixture_axioms_hold(fixture)
            b_space, a_space = torsion_subspaces(fixture)
            assert subspaces_equal(b_space, a_space)
            n = nilpotence_exponent(fixture.a, a_space)
            assert n is not None
            # the factorial power identity predicts b^(2n) kills A
            power = mat_power(fixture.b, 2 * n)
            assert all(not mat_vec(power, dict(v)) for v in a_space)

    def test_nonconforming_fixture_splits_a_from_a_tilde(self):
        # a like diag(0, 1) with b = shift: the commutation rule fails, and
        # with it the containment of A in the a-torsion collapses
        fixture = TorsionFixture.of([[0, 0], [0, 1]], [[0, 0], [1, 0]])
        assert not fixture.commutation_holds()
        assert not fixture_axioms_hold(fixture)
        _, a_space = torsion_subspaces(fixture)
        a_tilde = a_torsion(fixture)
        assert len(a_space) == 0 and len(a_tilde) == 1

    def test_b_zero_partial_a_breaks_containment(self):
        # with b = 0 the b-torsion is everything; a = diag(0, 1) keeps the
        # a-side torsion strictly smaller, violating the containment axiom
        fixture = TorsionFixture.of([[0, 0], [0, 1]], [[0, 0], [0, 0]])
        assert fixture.commutation_holds()
        assert not fixture_axioms_hold(fixture)
        b_space, a_space = torsion_subspaces(fixture)
        assert len(b_space) == 2 and len(a_space) == 1

    def test_is_nilpotent(self):
        assert is_nilpotent(((Fraction(0), Fraction(1)), (Fraction(0), Fraction(0))))
        assert not is_nilpotent(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))))
