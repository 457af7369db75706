import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from mflab.bmat import (
    BMatrixError,
    IsogenyInput,
    bmatrix,
    coefficient_check,
    cusp_matrix,
    cusp_point,
    cusp_rank_report,
    equation_at_point,
    isogeny_point,
    jdet,
    jdet_on_leaf,
    monomial_count_recount,
    monomials,
    relative_check,
    swapped_cusp_point,
    two_isogeny,
)
from mflab.polycore import Q
from mflab.qmod import leaf_param, modular_equation
from mflab.vfield import apply_derivation, chart_ring, foliation_v

v = foliation_v()
x2, x3, y2, y3 = chart_ring().gens()


# --- monomial bases ---------------------------------------------------------


def test_monomial_counts_for_i2():
    assert [len(monomials(d, 2)) for d in (2, 3, 4, 5)] == [5, 7, 12, 12]


@pytest.mark.parametrize("d", range(1, 21))
@pytest.mark.parametrize("i", [1, 2, 3])
def test_monomial_count_matches_recount(d, i):
    assert len(monomials(d, i)) == monomial_count_recount(d, i)


def test_monomial_labels():
    assert monomials(2, 2).labels() == ["y2^3", "y2^2*x2", "y2*x2^2", "x2^3", "x3^2"]
    with pytest.raises(BMatrixError):
        monomials(0, 1)


# --- the matrix B and its determinant ----------------------------------------


def test_trivial_level():
    B = bmatrix(1, 1)
    assert B.m == 1 and B.entry(0, 0) == chart_ring().one()
    assert jdet(1, 1) == 1


@pytest.mark.parametrize("d,i", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_rows_follow_the_derivation(d, i):
    B = bmatrix(d, i)
    for r in range(1, B.m):
        for j in range(B.m):
            assert B.entry(r, j) == apply_derivation(v, B.entry(r - 1, j))


def test_second_row_entry():
    assert bmatrix(2, 2).entry(1, 0) == 3 * y2 * y2 * v["y2"]


@pytest.mark.parametrize("d,i", [(2, 1), (2, 2), (3, 2)])
def test_entries_in_z_one_sixth(d, i):
    B = bmatrix(d, i)
    assert all(B.entry(r, j).coefficients_in_z_1_6() for r in range(B.m) for j in range(B.m))


def test_jdet_22_is_not_identically_zero():
    J = jdet(2, 2)
    assert not J.is_zero()


@pytest.mark.parametrize("d,i", [(2, 1), (2, 2), (3, 1)])
def test_symbolic_and_series_determinants_agree(d, i):
    a = jdet_on_leaf(d, i, 24, symbolic=True)
    b = jdet_on_leaf(d, i, 24)
    assert a.coeffs == b.coeffs and a.is_zero()


def test_jdet_on_another_leaf_is_nonzero():
    # J_{2,2} vanishes on the level-2 leaf but not on the level-3 leaf
    assert not jdet_on_leaf(2, 2, 20, leaf_d=3).is_zero()


def test_jdet_size_cap():
    with pytest.raises(BMatrixError, match="size cap"):
        jdet(4, 2)
    assert not jdet(2, 2, size_cap=5).is_zero()


# --- isogeny points -------------------------------------------------------------


def _j(t2, t3):
    return 1728 * t2 ** 3 / (t2 ** 3 - 27 * t3 ** 2)


def _phi2(X, Y):
    """Classical level-2 modular polynomial in the j-invariants."""
    return (
        X ** 3 + Y ** 3 - X ** 2 * Y ** 2
        + 1488 * (X ** 2 * Y + X * Y ** 2)
        - 162000 * (X ** 2 + Y ** 2)
        + 40773375 * X * Y
        + 8748000000 * (X + Y)
        - 157464000000000
    )


TWO_ISOGENIES = [(1, 2), (2, -5), (Q(1, 3), 5), (-1, Q(7, 2)), (3, -1)]


@pytest.mark.parametrize("x0,a", TWO_ISOGENIES)
def test_two_isogeny_curves_are_two_isogenous(x0, a):
    inp = two_isogeny(x0, a)
    assert _phi2(_j(inp.t2, inp.t3), _j(inp.s2, inp.s3)) == 0


@pytest.mark.parametrize("x0,a", TWO_ISOGENIES)
def test_two_isogeny_kernel_point_is_two_torsion(x0, a):
    inp = two_isogeny(x0, a)
    x0 = Q(x0)
    assert 4 * x0 ** 3 - inp.t2 * x0 - inp.t3 == 0


@pytest.mark.parametrize("x0,a", TWO_ISOGENIES)
def test_isogeny_point_lies_on_the_modular_equations(x0, a):
    p = isogeny_point(two_isogeny(x0, a))
    for i in (1, 2, 3):
        E = modular_equation(2, i)
        assert equation_at_point(E.chart_poly, p) == 0
        assert all(c == 0 for c in coefficient_check(2, i, p, E.chart_coefficients))


def test_isogeny_point_numeric_mode():
    p = isogeny_point(two_isogeny(Q(1, 3), 5, exact=False))
    for i in (1, 2, 3):
        E = modular_equation(2, i)
        assert abs(complex(equation_at_point(E.chart_poly, p))) <= 1e-8
        assert relative_check(2, i, p, E.chart_coefficients) <= 1e-12


def test_wrong_normalisation_misses_the_equation():
    inp = two_isogeny(1, 2)
    bad = IsogenyInput(inp.t2, inp.t3, inp.s2, inp.s3, inp.k, 2 * inp.kp)
    E = modular_equation(2, 1)
    assert equation_at_point(E.chart_poly, isogeny_point(bad)) != 0


def test_isogeny_point_errors():
    with pytest.raises(BMatrixError, match="k' = 0"):
        isogeny_point(IsogenyInput(1, 2, 3, 4, 1, 0))
    with pytest.raises(BMatrixError, match="Delta"):
        isogeny_point(IsogenyInput(3, 1, 1, 5, 1, 1))
    with pytest.raises(BMatrixError):
        IsogenyInput(1, 2, 3, 4, 0, 1)
    # x^3 - 3x - 2 has a double root: the source curve is singular
    with pytest.raises(BMatrixError, match="Delta"):
        isogeny_point(two_isogeny(2, -3))


def test_coefficient_check_length():
    p = isogeny_point(two_isogeny(1, 2))
    with pytest.raises(BMatrixError):
        coefficient_check(2, 2, p, [1, 2])


@given(st.lists(st.integers(-9, 9), min_size=5, max_size=5))
def test_random_coefficients_are_not_annihilated(C):
    E = modular_equation(2, 2).chart_coefficients
    # skip zero and multiples of the true coefficient vector
    if all(C[j] * E[k] == C[k] * E[j] for j in range(5) for k in range(5)):
        return
    p = isogeny_point(two_isogeny(1, 2))
    assert any(x != 0 for x in coefficient_check(2, 2, p, [mpq(c) for c in C]))


# --- cusps ------------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_leaf_cusp_is_the_q0_value(d):
    L = leaf_param(d, 2).chart()
    assert {k: s[0] for k, s in L.items()} == cusp_point(d)


def test_cusp_points_on_the_singular_curve():
    for r in (2, 3, Q(1, 2), -4):
        for p in (cusp_point(r), swapped_cusp_point(r)):
            assert all(c == 0 for c in v.evaluate(p))
    with pytest.raises(BMatrixError):
        cusp_point(1)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("i", [1, 2, 3])
def test_cusp_identity_annihilates_c(d, i):
    C = modular_equation(d, i).chart_coefficients
    for a in range(2, d + 1):
        if d % a == 0 and d // a < a:
            M = cusp_matrix(d, i, a, d // a)
            assert all(x == 0 for x in M.apply(C))


def test_cusp_matrix_errors():
    with pytest.raises(BMatrixError):
        cusp_matrix(2, 2, 3, 1)
    with pytest.raises(BMatrixError):
        cusp_matrix(4, 2, 2, 2)


def test_cusp_rank_report():
    ranks = [cusp_rank_report(d)["rank"] for d in (2, 3, 4, 5)]
    assert ranks == [1, 3, 3, 3]
    rep = cusp_rank_report(2)
    assert {"rank[y3,leaf]", "rank[x3,leaf]", "rank[x3,swapped]", "raw_B_rank"} <= set(rep)
