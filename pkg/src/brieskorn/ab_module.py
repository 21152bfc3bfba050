"""Truncated computational model of (a,b)-modules.

An (a,b)-module is a free module of finite rank over power series in b
together with an operator a obeying  a.b - b.a = b^2.  The truncated
model cuts every b-power series at a fixed order N: b acts by
multiplication, and a acts by a matrix of b-polynomials plus the
derivation rule  b^k e -> k b^(k+1) e  forced by the commutation law.

The module also houses a free-algebra normal-ordering engine for words
in a and b (the independent oracle for the operator identities) and
desk-scale torsion fixtures given by explicit matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Mapping, Optional, Sequence

from .errors import InconclusiveError, InputError
from .linalg import Span, Vec, kernel_relations
from .poly import Scalar, as_fraction, format_fraction, parse_fraction

# a b-polynomial: coefficient tuple indexed by b-power, zero-trimmed
BPoly = tuple[Fraction, ...]


def bpoly(coefficients: Sequence[Scalar]) -> BPoly:
    values = [as_fraction(c) for c in coefficients]
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


def bpoly_str(p: BPoly) -> str:
    if not p:
        return "0"
    parts = []
    for power, coeff in enumerate(p):
        if coeff == 0:
            continue
        if power == 0:
            parts.append(format_fraction(coeff))
        elif coeff == 1:
            parts.append("b" if power == 1 else f"b^{power}")
        else:
            body = "b" if power == 1 else f"b^{power}"
            parts.append(f"{format_fraction(coeff)}*{body}")
    return " + ".join(parts)


# module elements: sparse maps (generator index, b power) -> coefficient
Element = dict[tuple[int, int], Fraction]


class ABModule:
    """Free rank-r module over b-series truncated at order N, with the
    a-operator given by an r x r matrix of b-polynomials of degree < N."""

    __slots__ = ("rank", "trunc_order", "a_matrix", "label")

    def __init__(
        self,
        rank: int,
        trunc_order: int,
        a_matrix: Sequence[Sequence[Sequence[Scalar]]],
        label: str = "",
    ):
        if rank < 1:
            raise InputError("rank must be at least 1")
        if trunc_order < 2:
            raise InputError("truncation order must be at least 2")
        matrix = tuple(tuple(bpoly(entry) for entry in row) for row in a_matrix)
        if len(matrix) != rank or any(len(row) != rank for row in matrix):
            raise InputError(f"a-matrix must be {rank}x{rank}")
        for row in matrix:
            for entry in row:
                if len(entry) > trunc_order:
                    raise InputError(
                        "a-matrix entry exceeds the truncation order in b"
                    )
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "trunc_order", trunc_order)
        object.__setattr__(self, "a_matrix", matrix)
        object.__setattr__(self, "label", label)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("ABModule is immutable")

    @classmethod
    def rank_one(
        cls, coefficient: Scalar, trunc_order: int = 16, label: str = ""
    ) -> "ABModule":
        """Rank-1 module with  a e = coefficient * b e."""
        return cls(1, trunc_order, [[[0, as_fraction(coefficient)]]], label=label)

    # -- operator actions ----------------------------------------------------

    def generator(self, index: int, power: int = 0) -> Element:
        return {(index, power): Fraction(1)}

    def basis(self) -> list[Element]:
        return [
            {(j, t): Fraction(1)}
            for j in range(self.rank)
            for t in range(self.trunc_order)
        ]

    def apply_b(self, element: Element) -> Element:
        out: Element = {}
        for (j, t), c in element.items():
            if t + 1 < self.trunc_order:
                out[(j, t + 1)] = out.get((j, t + 1), Fraction(0)) + c
        return {k: v for k, v in out.items() if v != 0}

    def apply_a(self, element: Element, derivation_term: bool = True) -> Element:
        out: Element = {}
        for (j, t), c in element.items():
            for i in range(self.rank):
                entry = self.a_matrix[i][j]
                for power, coeff in enumerate(entry):
                    if coeff == 0:
                        continue
                    target = t + power
                    if target < self.trunc_order:
                        key = (i, target)
                        out[key] = out.get(key, Fraction(0)) + c * coeff
            if derivation_term and t > 0 and t + 1 < self.trunc_order:
                key = (j, t + 1)
                out[key] = out.get(key, Fraction(0)) + c * t
        return {k: v for k, v in out.items() if v != 0}

    def __repr__(self) -> str:
        return (
            f"ABModule(rank={self.rank}, N={self.trunc_order}, "
            f"label={self.label!r})"
        )

    # -- serialization ---------------------------------------------------------

    def to_record(self) -> dict:
        return {
            "rank": self.rank,
            "trunc_order": self.trunc_order,
            "label": self.label,
            "a_matrix": [
                [
                    [[power, format_fraction(c)] for power, c in enumerate(entry) if c]
                    for entry in row
                ]
                for row in self.a_matrix
            ],
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "ABModule":
        rank = record["rank"]
        order = record["trunc_order"]
        matrix = []
        for row in record["a_matrix"]:
            new_row = []
            for entry in row:
                coeffs = [Fraction(0)] * order
                for power, text in entry:
                    coeffs[power] = parse_fraction(text)
                new_row.append(coeffs)
            matrix.append(new_row)
        return cls(rank, order, matrix, label=record.get("label", ""))


def _element_key(key: tuple[int, int]) -> tuple[int, int]:
    return key


def check_commutation(module: ABModule, derivation_term: bool = True) -> bool:
    """Verify  a(b x) - b(a x) = b^2 x  on every basis vector.

    Both operators never lower the b-degree, so every represented
    component is exact and the difference must vanish identically.
    """
    for element in module.basis():
        ((_, t),) = element.keys()
        if t + 2 >= module.trunc_order:
            continue
        lhs = module.apply_a(module.apply_b(element), derivation_term)
        rhs = module.apply_b(module.apply_a(element, derivation_term))
        b2 = module.apply_b(module.apply_b(element))
        diff = dict(lhs)
        for key, value in rhs.items():
            diff[key] = diff.get(key, Fraction(0)) - value
        for key, value in b2.items():
            diff[key] = diff.get(key, Fraction(0)) - value
        if any(value != 0 for value in diff.values()):
            return False
    return True


def tensor(left: ABModule, right: ABModule, label: str = "") -> ABModule:
    """Tensor product over the b-series ring with a = aized on each factor:
    a(e_i (x) f_j) = (a e_i) (x) f_j + e_i (x) (a f_j).

    Basis pairs are ordered left-factor major.
    """
    if left.trunc_order != right.trunc_order:
        raise InputError("tensor factors must share the truncation order")
    rank = left.rank * right.rank
    order = left.trunc_order
    zero = [Fraction(0)] * order

    def index(i: int, j: int) -> int:
        return i * right.rank + j

    matrix = [[list(zero) for _ in range(rank)] for _ in range(rank)]
    for i in range(left.rank):
        for j in range(right.rank):
            col = index(i, j)
            for k in range(left.rank):
                entry = left.a_matrix[k][i]
                row = index(k, j)
                for power, coeff in enumerate(entry):
                    matrix[row][col][power] += coeff
            for l in range(right.rank):
                entry = right.a_matrix[l][j]
                row = index(i, l)
                for power, coeff in enumerate(entry):
                    matrix[row][col][power] += coeff
    if not label:
        label = f"({left.label or 'E'}) (x) ({right.label or 'F'})"
    return ABModule(rank, order, matrix, label=label)


def is_simple_pole(module: ABModule) -> bool:
    """a E inside b E: every a-matrix entry has zero constant term."""
    return all(
        not entry or entry[0] == 0
        for row in module.a_matrix
        for entry in row
    )


def is_regular(module: ABModule, k: int) -> bool:
    """Check  a^k E  inside  sum_{j<k} b^(k-j) a^j E,  modulo b^N.

    Raises InconclusiveError when the truncation is too shallow for the
    requested k.
    """
    if k < 1:
        raise InputError("regularity order k must be at least 1")
    if module.trunc_order < k + 2:
        raise InconclusiveError(
            "truncation too small to decide regularity",
            trunc_order=module.trunc_order,
            k=k,
        )
    span = Span(_element_key)
    for j in range(k):
        for element in module.basis():
            vec: Element = element
            for _ in range(j):
                vec = module.apply_a(vec)
            for _ in range(k - j):
                vec = module.apply_b(vec)
            if vec:
                span.insert(vec)
    for element in module.basis():
        vec = element
        for _ in range(k):
            vec = module.apply_a(vec)
        if not span.contains(vec):
            return False
    return True


# -- free-algebra words and normal ordering -----------------------------------


class OperatorWord:
    """Rational linear combination of words in the letters a, b."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[str, ...], Scalar]):
        clean: dict[tuple[str, ...], Fraction] = {}
        for word, coeff in terms.items():
            word = tuple(word)
            if any(letter not in ("a", "b") for letter in word):
                raise InputError(f"invalid letter in word {word!r}")
            value = as_fraction(coeff)
            if value != 0:
                clean[word] = clean.get(word, Fraction(0)) + value
                if clean[word] == 0:
                    del clean[word]
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("OperatorWord is immutable")

    @classmethod
    def letter(cls, name: str) -> "OperatorWord":
        return cls({(name,): 1})

    @classmethod
    def one(cls) -> "OperatorWord":
        return cls({(): 1})

    @classmethod
    def monomial(cls, b_power: int, a_power: int, coeff: Scalar = 1) -> "OperatorWord":
        return cls({("b",) * b_power + ("a",) * a_power: coeff})

    def __add__(self, other: "OperatorWord") -> "OperatorWord":
        out = dict(self.terms)
        for word, coeff in other.terms.items():
            out[word] = out.get(word, Fraction(0)) + coeff
        return OperatorWord(out)

    def __sub__(self, other: "OperatorWord") -> "OperatorWord":
        return self + (-1) * other

    def __mul__(self, other) -> "OperatorWord":
        if isinstance(other, (int, Fraction)):
            s = as_fraction(other)
            return OperatorWord({w: c * s for w, c in self.terms.items()})
        if not isinstance(other, OperatorWord):
            return NotImplemented
        out: dict[tuple[str, ...], Fraction] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                key = w1 + w2
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return OperatorWord(out)

    def __rmul__(self, other: Scalar) -> "OperatorWord":
        return self.__mul__(other)

    def __pow__(self, n: int) -> "OperatorWord":
        result = OperatorWord.one()
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorWord):
            return NotImplemented
        return self.terms == other.terms

    def is_normal(self) -> bool:
        """True when every word already has all b letters on the left."""
        return all("ab" not in "".join(word) for word in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for word in sorted(self.terms):
            body = "".join(word) or "1"
            pieces.append(f"{format_fraction(self.terms[word])}*{body}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"OperatorWord({str(self)!r})"


@lru_cache(maxsize=None)
def _reorder_a_powers(a_power: int, b_power: int) -> tuple[tuple[int, int, Fraction], ...]:
    """Normal form of a^j b^k as tuples (b exponent, a exponent, coeff)."""
    if a_power == 0:
        return (((b_power, 0, Fraction(1)),))
    acc: dict[tuple[int, int], Fraction] = {}
    for i, l, c in _reorder_a_powers(a_power - 1, b_power):
        # a * b^i a^l = b^i a^(l+1) + i b^(i+1) a^l
        acc[(i, l + 1)] = acc.get((i, l + 1), Fraction(0)) + c
        if i:
            acc[(i + 1, l)] = acc.get((i + 1, l), Fraction(0)) + c * i
    return tuple((i, l, c) for (i, l), c in sorted(acc.items()) if c != 0)


def normal_order(word: OperatorWord) -> OperatorWord:
    """Canonical b-left normal form: a sum of terms b^i a^j.

    Uses the memoized single-letter recurrence; the naive rewriter below
    serves as an independent oracle for it.
    """
    total: dict[tuple[int, int], Fraction] = {}
    for letters, coeff in word.terms.items():
        state: dict[tuple[int, int], Fraction] = {(0, 0): coeff}
        for letter in letters:
            nxt: dict[tuple[int, int], Fraction] = {}
            for (i, l), c in state.items():
                if letter == "a":
                    key = (i, l + 1)
                    nxt[key] = nxt.get(key, Fraction(0)) + c
                else:
                    for i2, l2, c2 in _reorder_a_powers(l, 1):
                        key = (i + i2, l2)
                        nxt[key] = nxt.get(key, Fraction(0)) + c * c2
            state = {k: v for k, v in nxt.items() if v != 0}
        for key, value in state.items():
            total[key] = total.get(key, Fraction(0)) + value
    return OperatorWord(
        {("b",) * i + ("a",) * l: c for (i, l), c in total.items() if c != 0}
    )


def rewrite_normal_order(word: OperatorWord, leftmost: bool = True) -> OperatorWord:
    """Oracle rewriter: repeatedly replace one occurrence of 'ab' using
    a.b -> b.a + b.b until no word contains 'ab'.  Terminates and is
    confluent; the strategy flag exercises confluence in tests."""
    pending = dict(word.terms)
    done: dict[tuple[str, ...], Fraction] = {}
    while pending:
        letters, coeff = pending.popitem()
        spot = -1
        indices = range(len(letters) - 1)
        for i in (indices if leftmost else reversed(indices)):
            if letters[i] == "a" and letters[i + 1] == "b":
                spot = i
                break
        if spot < 0:
            done[letters] = done.get(letters, Fraction(0)) + coeff
            continue
        prefix, suffix = letters[:spot], letters[spot + 2 :]
        for replacement in (("b", "a"), ("b", "b")):
            key = prefix + replacement + suffix
            acc = pending.get(key, Fraction(0)) + coeff
            if acc == 0:
                pending.pop(key, None)
            else:
                pending[key] = acc
    return OperatorWord({w: c for w, c in done.items() if c != 0})


def factorial_identity_holds(n: int) -> bool:
    """Check the operator identity
        n! b^(2n) = sum_{j=0..n} (-1)^j C(n,j) b^j a^n b^(n-j)
    exactly, via the normal-ordering engine."""
    if n < 1:
        raise InputError("the identity is stated for n >= 1")
    a = OperatorWord.letter("a")
    b = OperatorWord.letter("b")
    rhs = OperatorWord({})
    for j in range(n + 1):
        term = (b**j) * (a**n) * (b ** (n - j))
        rhs = rhs + ((-1) ** j * comb(n, j)) * term
    lhs = OperatorWord({("b",) * (2 * n): factorial(n)})
    return normal_order(rhs) == lhs


# -- torsion fixtures ----------------------------------------------------------

Matrix = tuple[tuple[Fraction, ...], ...]


def matrix(rows: Sequence[Sequence[Scalar]]) -> Matrix:
    out = tuple(tuple(as_fraction(v) for v in row) for row in rows)
    size = len(out)
    if any(len(row) != size for row in out):
        raise InputError("torsion fixture matrices must be square")
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    size = len(a)
    return tuple(
        tuple(
            sum((a[i][k] * b[k][j] for k in range(size)), Fraction(0))
            for j in range(size)
        )
        for i in range(size)
    )


def mat_vec(a: Matrix, v: Vec) -> Vec:
    size = len(a)
    out: Vec = {}
    for j, c in v.items():
        for i in range(size):
            if a[i][j]:
                out[i] = out.get(i, Fraction(0)) + a[i][j] * c
    return {k: val for k, val in out.items() if val != 0}


def mat_power(a: Matrix, n: int) -> Matrix:
    size = len(a)
    result: Matrix = tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(size)) for i in range(size)
    )
    for _ in range(n):
        result = mat_mul(result, a)
    return result


def is_nilpotent(a: Matrix) -> bool:
    power = mat_power(a, len(a))
    return all(v == 0 for row in power for v in row)


@dataclass(frozen=True)
class TorsionFixture:
    """Desk-scale model: explicit dim x dim matrices for a and b.

    Conforming fixtures satisfy the commutation rule a.b - b.a = b^2 with
    b nilpotent; validation is exposed as predicates rather than enforced
    at construction so that tests can also exhibit what goes wrong on
    non-conforming data.
    """

    dim: int
    a: Matrix
    b: Matrix

    @classmethod
    def of(cls, a_rows: Sequence[Sequence[Scalar]], b_rows: Sequence[Sequence[Scalar]]):
        a = matrix(a_rows)
        b = matrix(b_rows)
        if len(a) != len(b):
            raise InputError("a and b must have the same dimension")
        return cls(len(a), a, b)

    def commutation_holds(self) -> bool:
        lhs = mat_mul(self.a, self.b)
        rhs = mat_mul(self.b, self.a)
        square = mat_mul(self.b, self.b)
        return all(
            lhs[i][j] - rhs[i][j] == square[i][j]
            for i in range(self.dim)
            for j in range(self.dim)
        )


def _stable_kernel(m: Matrix) -> list[Vec]:
    """Basis of the union of kernels of m^k (the generalized kernel)."""
    size = len(m)
    power = mat_power(m, size)
    columns = [(j, mat_vec(power, {j: Fraction(1)})) for j in range(size)]
    return kernel_relations(columns, key_order=lambda k: k)


def _subspace_span(vectors: Sequence[Vec]) -> Span:
    span = Span(lambda k: k)
    for v in vectors:
        span.insert(dict(v))
    return span


def a_torsion(fixture: TorsionFixture) -> list[Vec]:
    """Union of the kernels of the powers of a."""
    return _stable_kernel(fixture.a)


def torsion_subspaces(fixture: TorsionFixture) -> tuple[list[Vec], list[Vec]]:
    """Return (B, A): the union of b-power kernels, and the subspace of
    vectors whose whole b-orbit span is a-nilpotent."""
    b_space = _stable_kernel(fixture.b)
    a_tilde = _subspace_span(a_torsion(fixture))
    # A = vectors x with b^j x inside the a-torsion for every j;
    # the powers j < dim already span the whole b-orbit
    compound_vectors = []
    for col in range(fixture.dim):
        vec: Vec = {}
        current: Vec = {col: Fraction(1)}
        for j in range(fixture.dim):
            residual = a_tilde.reduce(current)
            for key, value in residual.items():
                vec[(j, key)] = value
            current = mat_vec(fixture.b, current)
        compound_vectors.append((col, vec))
    relations = kernel_relations(compound_vectors, key_order=lambda k: k)
    return b_space, relations


def subspaces_equal(first: Sequence[Vec], second: Sequence[Vec]) -> bool:
    s1 = _subspace_span(first)
    s2 = _subspace_span(second)
    return s1.rank == s2.rank and all(s1.contains(dict(v)) for v in second)


def fixture_axioms_hold(fixture: TorsionFixture) -> bool:
    """All finite-model axioms: the commutation rule, b nilpotent (which
    settles invertibility of b - lambda and the b-separation condition),
    b-torsion contained in A, and a nilpotent on A."""
    if not fixture.commutation_holds():
        return False
    if not is_nilpotent(fixture.b):
        return False
    b_space, a_space = torsion_subspaces(fixture)
    a_span = _subspace_span(a_space)
    if not all(a_span.contains(dict(v)) for v in b_space):
        return False
    a_power = mat_power(fixture.a, fixture.dim)
    for v in a_space:
        if mat_vec(a_power, dict(v)):
            return False
    return True


def nilpotence_exponent(m: Matrix, vectors: Sequence[Vec]) -> Optional[int]:
    """Smallest N with m^N v = 0 for all given vectors, if one exists."""
    for n in range(len(m) + 1):
        power = mat_power(m, n)
        if all(not mat_vec(power, dict(v)) for v in vectors):
            return n
    return None
