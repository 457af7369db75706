"""Derivation matrices B_{d,i}, their determinants, isogeny points and the cusp matrix."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .polycore import (
    ExactMatrix,
    MultiPoly,
    Q,
    bareiss_det,
    fmt_rational,
    rank_rational,
    subset_det,
)
from .qmod import QSeries, dedekind_psi, degree_matched_exponents, leaf_param
from .vfield import V_VARS, apply_derivation, chart_ring, foliation_v

DEFAULT_SIZE_CAP = 8


class BMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class MonomialBasis:
    d: int
    i: int
    exponents: Tuple[Tuple[int, int, int], ...]

    @property
    def size(self) -> int:
        return len(self.exponents)

    def __len__(self):
        return len(self.exponents)

    def polys(self) -> List[MultiPoly]:
        """Monomials in the chart ring; for i = 1 the y1 factor is dropped (y1 = 1)."""
        R = chart_ring()
        out = []
        for a1, a2, a3 in self.exponents:
            e = [a2, a3, 0, 0]
            if self.i == 2:
                e[2] = a1
            elif self.i == 3:
                e[3] = a1
            out.append(R.monomial(e))
        return out

    def labels(self) -> List[str]:
        out = []
        for a1, a2, a3 in self.exponents:
            fac = []
            for name, k in (("y%d" % self.i, a1), ("x2", a2), ("x3", a3)):
                if k == 1:
                    fac.append(name)
                elif k > 1:
                    fac.append("%s^%d" % (name, k))
            out.append("*".join(fac) or "1")
        return out


def monomials(d: int, i: int) -> MonomialBasis:
    if d < 1:
        raise BMatrixError("d must be >= 1")
    return MonomialBasis(d, i, tuple(degree_matched_exponents(d, i)))


def monomial_count_recount(d: int, i: int) -> int:
    """Independent count: solutions of 2*a2 + 3*a3 <= i*psi(d) with the remainder divisible by i."""
    total = i * dedekind_psi(d)
    count = 0
    for a3 in range(total // 3 + 1):
        for a2 in range((total - 3 * a3) // 2 + 1):
            if (total - 2 * a2 - 3 * a3) % i == 0:
                count += 1
    return count


@dataclass
class BMatrixSym:
    d: int
    i: int
    basis: MonomialBasis
    matrix: ExactMatrix

    @property
    def m(self) -> int:
        return self.basis.size

    def entry(self, r: int, j: int) -> MultiPoly:
        return self.matrix[r, j]


@lru_cache(maxsize=32)
def _bmatrix_cached(d: int, i: int) -> BMatrixSym:
    basis = monomials(d, i)
    v = foliation_v()
    cols = []
    for mono in basis.polys():
        col = [mono]
        for _ in range(basis.size - 1):
            col.append(apply_derivation(v, col[-1]))
        cols.append(col)
    rows = [[cols[j][r] for j in range(basis.size)] for r in range(basis.size)]
    return BMatrixSym(d, i, basis, ExactMatrix(rows))


def bmatrix(d: int, i: int) -> BMatrixSym:
    """Row r, column j holds v^r applied to the j-th monomial."""
    return _bmatrix_cached(d, i)


def jdet(d: int, i: int, size_cap: int = DEFAULT_SIZE_CAP) -> MultiPoly:
    """J_{d,i} = det B_{d,i} (symbolic); refuses above ``size_cap``."""
    B = bmatrix(d, i)
    if B.m > size_cap:
        raise BMatrixError(
            "m_{%d,%d} = %d exceeds the symbolic size cap %d; use jdet_on_leaf for the series value "
            "or raise size_cap" % (d, i, B.m, size_cap)
        )
    return bareiss_det(B.matrix)


def bmatrix_on_series(d: int, i: int, P: Dict[str, QSeries]) -> List[List[QSeries]]:
    """Entries of B_{d,i} with the chart variables replaced by series."""
    B = bmatrix(d, i)
    return [[_poly_on_series(B.matrix[r, j], P) for j in range(B.m)] for r in range(B.m)]


def _poly_on_series(p: MultiPoly, P: Dict[str, QSeries]) -> QSeries:
    order = min(s.order for s in P.values())
    if p.is_zero():
        return QSeries.const(0, order)
    return p.evaluate(P) + QSeries.const(0, order)


def jdet_on_leaf(d: int, i: int, N: int, leaf_d: Optional[int] = None, symbolic: bool = False) -> QSeries:
    """J_{d,i} restricted to the leaf S_0(leaf_d) as a q-series to order N.

    With ``symbolic`` the determinant polynomial is formed first and then
    evaluated; otherwise the entries are evaluated and the determinant is taken
    over the series ring (same value, since evaluation is a ring map).
    """
    leaf = leaf_param(leaf_d or d, N).chart()
    if symbolic:
        return _poly_on_series(jdet(d, i), leaf)
    M = bmatrix_on_series(d, i, leaf)
    return subset_det(M, QSeries.const(1, N), QSeries.const(0, N))


# ---------------------------------------------------------------------------
# points of S_0(d)


@dataclass
class IsogenyInput:
    t2: object
    t3: object
    s2: object
    s3: object
    k: object
    kp: object

    def __post_init__(self):
        if self.k == 0:
            raise BMatrixError("k must be nonzero")


def isogeny_point(inp: IsogenyInput, d: Optional[int] = None) -> Dict[str, object]:
    """(t2 (k/k')^2, t3 (k/k')^3, s2 (k/k')^2, -s3 (k/k')^3)."""
    if inp.kp == 0:
        raise BMatrixError("chart at infinity: k' = 0")
    if 27 * inp.t3 ** 2 - inp.t2 ** 3 == 0 or 27 * inp.s3 ** 2 - inp.s2 ** 3 == 0:
        raise BMatrixError("on Delta: degenerate curve")
    lam = inp.k / inp.kp
    return {"x2": inp.t2 * lam ** 2, "x3": inp.t3 * lam ** 3, "y2": inp.s2 * lam ** 2, "y3": -inp.s3 * lam ** 3}


def two_isogeny(x0, a, exact: bool = True) -> IsogenyInput:
    """Rational 2-isogeny with kernel (x0, 0) on y^2 = 4x^3 - t2 x - t3.

    In the model Y^2 = X^3 + aX + b (X = x, Y = y/2, b = -x0^3 - a x0) Velu's
    formulas give phi with phi*(dX/Y) = dX/Y onto a' = a - 5g, b' = b - 7 x0 g,
    g = 3x0^2 + a, and phi*(x dx/y) = (2x - x0) dx/y in de Rham cohomology.
    Composing with (x, y) -> (x/2, y/2^(3/2)) lands on s = (s2', s3') / (4, 8)
    and on the basis (dx/y, x dx/y)

        f* = sqrt(2) * [[1, -x0/2], [0, 1]] = sqrt(d) * [[k, k'], [0, 1/k]],

    so k = 1 and k' = -x0/2 (f* has determinant d = deg f).
    """
    x0, a = Q(x0), Q(a)
    b = -x0 ** 3 - a * x0
    g = 3 * x0 * x0 + a
    a2, b2 = a - 5 * g, b - 7 * x0 * g
    t2, t3, s2, s3 = -4 * a, -4 * b, -a2, -b2 / 2
    if exact:
        return IsogenyInput(t2=t2, t3=t3, s2=s2, s3=s3, k=mpq(1), kp=-x0 / 2)
    return IsogenyInput(t2=float(t2), t3=float(t3), s2=float(s2), s3=float(s3), k=1.0, kp=-float(x0) / 2)


def evaluate_bmatrix(d: int, i: int, point: Dict[str, object]) -> list:
    B = bmatrix(d, i)
    return [[B.matrix[r, j].evaluate(point) for j in range(B.m)] for r in range(B.m)]


def coefficient_check(d: int, i: int, point: Dict[str, object], C: Sequence[object]) -> list:
    """B_{d,i}(p) . C."""
    B = bmatrix(d, i)
    if len(C) != B.m:
        raise BMatrixError("coefficient vector has length %d, expected %d" % (len(C), B.m))
    M = evaluate_bmatrix(d, i, point)
    return [sum((x * c for x, c in zip(row, C)), 0 * C[0]) for row in M]


def relative_check(d: int, i: int, point: Dict[str, object], C: Sequence[object]) -> float:
    """max over rows of |sum_j B_rj C_j| / sum_j |B_rj C_j|, for floating-point points."""
    worst = 0.0
    for row in evaluate_bmatrix(d, i, point):
        terms = [complex(x) * complex(c) for x, c in zip(row, C)]
        size = sum(abs(z) for z in terms)
        if size:
            worst = max(worst, abs(sum(terms)) / size)
    return worst


def equation_at_point(poly: MultiPoly, point: Dict[str, object]):
    """A chart-convention Q_{d,i} evaluated at a chart point (y1 = 1)."""
    vals = dict(point)
    vals.setdefault("y1", 1)
    return poly.evaluate(vals)


# ---------------------------------------------------------------------------
# cusps


def cusp_point(r) -> Dict[str, object]:
    """Chart image of [12 : 8 : 12 r^2 : -8 r^3 : 1 - r] (= g([1 : -r])), the leaf's value at q = 0."""
    r = Q(r)
    if r == 1:
        raise BMatrixError("r = 1 is the point at infinity")
    one = 1 - r
    return {"x2": 12 / one ** 2, "x3": 8 / one ** 3, "y2": 12 * r * r / one ** 2, "y3": -8 * r ** 3 / one ** 3}


def swapped_cusp_point(r) -> Dict[str, object]:
    """Chart image of g([r : -1]) = [3r^2 : r^3 : 3 : -1 : (r-1)/2]."""
    r = Q(r)
    if r == 1:
        raise BMatrixError("r = 1 is the point at infinity")
    h = (r - 1) / 2
    return {"x2": 3 * r * r / h ** 2, "x3": r ** 3 / h ** 3, "y2": 3 / h ** 2, "y3": -1 / h ** 3}


def cusp_direction(r, fourth: str = "y3") -> Dict[str, object]:
    """Weights of the four partial derivatives in the cusp identity."""
    r = Q(r)
    w = {"x2": (6 - 5 * r) * (1 - r), "x3": 7 * r - 6, "y2": r * r * (1 - r), "y3": mpq(0)}
    w[fourth] = w[fourth] - r ** 3
    return w


def cusp_matrix(d: int, i: int, a: int, b: int, fourth: str = "y3", point: str = "leaf") -> ExactMatrix:
    """sum over chart variables of dB/dvar(p) * weight(var), with r = a/b and p the cusp.

    ``fourth`` selects the variable of the r^3 term ("y3", or "x3" for the
    literal repetition); ``point`` selects the leaf cusp g([1:-r]) or g([r:-1]).
    """
    if a * b != d:
        raise BMatrixError("a*b must equal d")
    if b >= a:
        raise BMatrixError("cusp matrix needs b < a")
    r = mpq(a, b)
    p = cusp_point(r) if point == "leaf" else swapped_cusp_point(r)
    w = cusp_direction(r, fourth)
    B = bmatrix(d, i)
    rows = []
    for rr in range(B.m):
        row = []
        for j in range(B.m):
            e = B.matrix[rr, j]
            val = mpq(0)
            for var in V_VARS:
                if w[var] != 0:
                    val += e.diff(var).evaluate(p) * w[var]
            row.append(val)
        rows.append(row)
    return ExactMatrix(rows)


def cusp_rank_report(d: int, i: int = 2) -> Dict[str, object]:
    """Ranks of the cusp combination (a, b) = (d, 1) under each reading, plus the raw B(p) rank."""
    p = cusp_point(d)
    raw = ExactMatrix(evaluate_bmatrix(d, i, p))
    out = {"d": d, "i": i, "m": bmatrix(d, i).m, "raw_B_rank": rank_rational(raw)}
    for fourth in ("y3", "x3"):
        for point in ("leaf", "swapped"):
            out["rank[%s,%s]" % (fourth, point)] = rank_rational(cusp_matrix(d, i, d, 1, fourth, point))
    out["interpretation"] = (
        "rank of the first-order cusp combination with the fourth partial in y3, "
        "evaluated at g([r:-1]) with r = d"
    )
    out["rank"] = out["rank[y3,swapped]"]
    return out


def matrix_to_json(M: ExactMatrix):
    return M.to_json()


def point_to_json(p: Dict[str, object], mode: str = "exact"):
    if mode == "exact":
        return {"mode": "exact", "point": [fmt_rational(p[v]) for v in V_VARS]}
    return {"mode": "numeric", "point": [complex(p[v]).real if complex(p[v]).imag == 0 else [complex(p[v]).real, complex(p[v]).imag] for v in V_VARS]}
