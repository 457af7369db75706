from fractions import Fraction

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, strategies as st

from mflab.polycore import (
    ExactMatrix,
    MultiPoly,
    PolyError,
    PolyRing,
    Q,
    RationalFunction,
    bareiss_det,
    cofactor_det,
    fmt_rational,
    nullspace_rational,
    parse_poly,
    rank_poly,
    rank_rational,
    subset_det,
    substitute,
    weighted_degree,
)

from strategies import CHART, homogeneous_polys, polys, small_rationals

R = CHART
x2, x3, y2, y3 = R.gens()


def to_sympy(p: MultiPoly):
    syms = sympy.symbols(p.ring.names)
    return sympy.expand(sum(sympy.Rational(int(c.numerator), int(c.denominator)) * sympy.prod(
        [s ** e for s, e in zip(syms, exps)]) for exps, c in p.terms.items()))


# --- rationals -------------------------------------------------------------


def test_rationals_are_reduced():
    c = Q(6, -4)
    assert (c.numerator, c.denominator) == (-3, 2)
    assert Q(0, 7).denominator == 1
    assert fmt_rational(Q("10/4")) == "5/2"
    assert fmt_rational(Q(-3)) == "-3"


def test_rational_interoperates_with_fraction():
    assert Q(Fraction(3, 9)) == Fraction(1, 3)
    assert hash(Q(1, 3)) == hash(Fraction(1, 3))


# --- polynomials -----------------------------------------------------------


def test_weighted_degree_examples():
    assert weighted_degree(x2 ** 3) == 6
    assert weighted_degree(27 * x3 * x3 - x2 ** 3) == 6
    assert weighted_degree(x2 + x3) == "inhomogeneous"
    with pytest.raises(PolyError, match="undefined degree"):
        weighted_degree(R.zero())


def test_canonical_text_order_and_format():
    p = R.parse("x3 + 1/2*x2^3 - 27*x3^2 + x2*y2")
    # weighted degree descending, then exponent vectors ascending
    assert p.to_text() == "-27*x3^2 + 1/2*x2^3 + 1*x2*y2 + 1*x3"
    assert R.zero().to_text() == "0"


@given(polys())
def test_text_roundtrip(p):
    assert parse_poly(R, p.to_text()) == p


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a
    assert (a - a).is_zero()


@given(polys(), polys())
def test_product_matches_sympy(a, b):
    assert sympy.expand(to_sympy(a * b) - to_sympy(a) * to_sympy(b)) == 0


@given(homogeneous_polys(degree=6), homogeneous_polys(degree=5))
def test_weighted_degree_is_additive(p, q):
    assert weighted_degree(p * q) == weighted_degree(p) + weighted_degree(q)


@given(polys(max_terms=3))
def test_derivative_matches_sympy(p):
    s = sympy.symbols(R.names)
    for k, name in enumerate(R.names):
        assert sympy.expand(to_sympy(p.diff(name)) - sympy.diff(to_sympy(p), s[k])) == 0


@given(polys(max_terms=3), polys(max_terms=3))
def test_exact_division_recovers_factor(a, b):
    if b.is_zero():
        return
    assert (a * b).exact_div(b) == a


def test_exact_division_refuses_remainder():
    with pytest.raises(PolyError):
        (x2 * x3 + 1).exact_div(x2)


def test_evaluate_and_compose():
    p = 27 * x3 * x3 - x2 ** 3
    assert p.evaluate({"x2": 3, "x3": 1, "y2": 0, "y3": 0}) == 0
    T = PolyRing(["u"])
    u = T.var("u")
    img = p.compose({"x2": 3 * u * u, "x3": u ** 3, "y2": T.zero(), "y3": T.zero()}, T)
    assert img.is_zero()


# --- substitution and rational functions -----------------------------------

S = PolyRing(["t1", "t2", "t3", "s1", "s2", "s3"], [1, 2, 3, 1, 2, 3])
t1, t2, t3, s1, s2, s3 = S.gens()


def test_substitute_examples():
    r = substitute(x2, {"x2": RationalFunction(t2, (t1 - s1) ** 2)}, S)
    assert r == RationalFunction(t2, (t1 - s1) ** 2)
    assert substitute(R.one(), {}, S) == RationalFunction(S.one())


def test_substitute_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        substitute(x2, {"x2": RationalFunction(t2, S.zero())}, S)


def test_substitute_requires_full_assignment():
    with pytest.raises(PolyError):
        substitute(x2 * x3, {"x2": t1}, S)


@given(polys(max_terms=3), polys(max_terms=3))
def test_substitute_respects_products(a, b):
    assign = {
        "x2": RationalFunction(t2, (t1 - s1) ** 2),
        "x3": RationalFunction(t3 + t1, t1 - s1),
        "y2": RationalFunction(s2, s1 + 1),
        "y3": t2 - s3,
    }
    lhs = substitute(a * b, assign, S)
    rhs = substitute(a, assign, S) * substitute(b, assign, S)
    assert lhs == rhs


def test_rational_function_equality_is_cross_multiplication():
    a = RationalFunction(t1 * t2 - t1 * s2, t1 * s1)
    b = RationalFunction(t2 - s2, s1)
    assert a == b
    assert a.reduce() == b
    assert a != RationalFunction(t2, s1)


def test_rational_function_derivative_quotient_rule():
    f = RationalFunction(t2, t1 - s1)
    lhs = f.diff("t1")
    assert lhs == RationalFunction(-t2, (t1 - s1) ** 2)


# --- linear algebra --------------------------------------------------------


def test_bareiss_det_examples():
    assert bareiss_det(ExactMatrix.identity(3)) == 1
    M = ExactMatrix([[x2, x3], [x3, x2]])
    assert bareiss_det(M) == x2 * x2 - x3 * x3
    assert bareiss_det(ExactMatrix([[1]])) == 1
    with pytest.raises(PolyError):
        bareiss_det(ExactMatrix([[1, 2]]))


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(polys(max_terms=2, max_exp=1), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_cofactor_expansion(rows):
    if all(p.is_zero() for r in rows for p in r):
        return
    M = ExactMatrix(rows)
    assert bareiss_det(M) == cofactor_det(M)


@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(small_rationals, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_rational_det_matches_sympy(rows):
    M = ExactMatrix(rows)
    oracle = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows]).det()
    assert bareiss_det(M) == Fraction(int(oracle.p), int(oracle.q))
    assert subset_det(M.entries, mpq(1), mpq(0)) == bareiss_det(M)


@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=6))
def test_rank_and_nullspace_match_sympy(rows):
    M = ExactMatrix(rows)
    S_ = sympy.Matrix(rows)
    assert rank_rational(M) == S_.rank()
    basis = nullspace_rational(M)
    assert len(basis) == 4 - S_.rank()
    for k in basis:
        assert all(x == 0 for x in M.apply(k))


def test_nullspace_examples():
    assert nullspace_rational(ExactMatrix([[1, 1], [2, 2]])) == [[1, -1]]
    assert nullspace_rational(ExactMatrix.identity(2)) == []


def test_rank_examples():
    assert rank_rational(ExactMatrix([[0] * 4] * 4)) == 0
    assert rank_rational(ExactMatrix.identity(5)) == 5


def test_rank_over_fraction_field():
    # rows dependent over Q(x2, x3) but no row is a rational multiple of another
    M = ExactMatrix([[x2, x3], [x2 * x3, x3 * x3]])
    assert rank_poly(M) == 1
    assert rank_poly(ExactMatrix([[x2, x3], [x3, x2]])) == 2


def test_matrix_shape_checks():
    with pytest.raises(PolyError):
        ExactMatrix([[1, 2], [3]])
    with pytest.raises(PolyError):
        ExactMatrix([[x2, 1]])
