"""Truncated q-series, Eisenstein series, arithmetic functions and modular equations.

The Eisenstein triple is used in the normalization
``(g1, g2, g3) = (E2/12, E4/12, E6/216)`` which solves the Ramanujan system for
the derivation ``q d/dq`` with rational coefficients only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .polycore import ExactMatrix, MultiPoly, PolyRing, Q, fmt_rational, nullspace_rational
from .vfield import VectorField, foliation_v


class PrecisionError(ValueError):
    pass


class QSeries:
    """``sum c_n q^n + O(q^(order+1))`` with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[object], order: Optional[int] = None):
        c = [Q(x) for x in coeffs]
        if order is not None:
            if order < 0:
                raise PrecisionError("negative order")
            c = (c + [mpq(0)] * (order + 1 - len(c)))[: order + 1]
        if not c:
            raise PrecisionError("a series needs at least one coefficient")
        self.coeffs = c

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def const(cls, c, order: int) -> "QSeries":
        return cls([c], order)

    @classmethod
    def q(cls, order: int) -> "QSeries":
        return cls([0, 1], order)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return "QSeries(%s)" % self.to_text(6)

    def to_text(self, limit: Optional[int] = None) -> str:
        parts = []
        for n, c in enumerate(self.coeffs if limit is None else self.coeffs[:limit]):
            if c == 0:
                continue
            s = fmt_rational(c)
            parts.append(s if n == 0 else ("%s*q" % s if n == 1 else "%s*q^%d" % (s, n)))
        parts.append("O(q^%d)" % (self.order + 1))
        return " + ".join(parts)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def valuation(self) -> Optional[int]:
        for n, c in enumerate(self.coeffs):
            if c != 0:
                return n
        return None

    def truncate(self, order: int) -> "QSeries":
        if order > self.order:
            raise PrecisionError("cannot raise precision from %d to %d" % (self.order, order))
        return QSeries(self.coeffs[: order + 1])

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        return QSeries.const(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        n = min(self.order, o.order)
        return QSeries([a + b for a, b in zip(self.coeffs[: n + 1], o.coeffs[: n + 1])])

    __radd__ = __add__

    def __neg__(self):
        return QSeries([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            c = Q(other)
            return QSeries([a * c for a in self.coeffs])
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        va = next((k for k in range(n + 1) if a[k] != 0), n + 1)
        vb = next((k for k in range(n + 1) if b[k] != 0), n + 1)
        out = [mpq(0)] * (n + 1)
        for k in range(va, n + 1 - vb):
            ak = a[k]
            if ak == 0:
                continue
            for j in range(vb, n + 1 - k):
                out[k + j] += ak * b[j]
        return QSeries(out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = QSeries.const(1, self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def inverse(self) -> "QSeries":
        a = self.coeffs
        if a[0] == 0:
            raise PrecisionError("series with zero constant term is not invertible")
        n = self.order
        inv0 = 1 / a[0]
        b = [inv0] + [mpq(0)] * n
        for k in range(1, n + 1):
            s = mpq(0)
            for j in range(1, k + 1):
                if a[j] != 0:
                    s += a[j] * b[k - j]
            b[k] = -s * inv0
        return QSeries(b)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.inverse()
        return self * (1 / Q(other))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __eq__(self, other):
        if isinstance(other, QSeries):
            n = min(self.order, other.order)
            return self.coeffs[: n + 1] == other.coeffs[: n + 1]
        return NotImplemented

    __hash__ = None

    def spread(self, d: int, order: Optional[int] = None) -> "QSeries":
        """f(q) -> f(q^d), truncated to ``order`` (default: own order)."""
        if d < 1:
            raise ValueError("spreading factor must be positive")
        order = self.order if order is None else order
        if order > d * (self.order + 1) - 1:
            raise PrecisionError("not enough terms to spread to order %d" % order)
        out = [mpq(0)] * (order + 1)
        for n, c in enumerate(self.coeffs):
            if d * n > order:
                break
            out[d * n] = c
        return QSeries(out)

    def qderiv(self) -> "QSeries":
        """q d/dq."""
        return QSeries([n * c for n, c in enumerate(self.coeffs)])

    def evaluate(self, q0):
        """Numeric value at q0 (float or complex) using all stored terms."""
        total = 0
        p = 1
        for c in self.coeffs:
            total += float(c) * p
            p *= q0
        return total

    def to_json(self):
        return {"order": self.order, "coeffs": [fmt_rational(c) for c in self.coeffs]}


# ---------------------------------------------------------------------------
# arithmetic functions


@lru_cache(maxsize=None)
def _bernoulli_signed(n: int):
    """Classical B_n with B_1 = -1/2, by the standard recurrence."""
    from math import comb

    B = [mpq(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, k) * B[k] for k in range(m)) / mpq(m + 1))
    return tuple(B)


def bernoulli(k: int):
    """Old-style Bernoulli numbers: B_1 = 1/6, B_2 = 1/30, B_3 = 1/42 (= |B_2k|)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return abs(_bernoulli_signed(2 * k)[2 * k])


def divisors(n: int) -> List[int]:
    if n < 1:
        raise ValueError("n must be >= 1")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def sigma(k: int, n: int) -> int:
    return sum(d ** k for d in divisors(n))


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(1 for a in range(1, n + 1) if gcd(a, n) == 1)


def prime_factors(n: int) -> List[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def dedekind_psi(d: int) -> int:
    if d < 1:
        raise ValueError("d must be >= 1")
    r = mpq(d)
    for p in prime_factors(d):
        r *= mpq(p + 1, p)
    assert r.denominator == 1
    return int(r)


def cusp_count(d: int) -> int:
    """Number of cusps of X_0(d): sum over a | d of phi(gcd(a, d/a))."""
    return sum(euler_phi(gcd(a, d // a)) for a in divisors(d))


def cusp_count_bruteforce(d: int) -> int:
    """Orbits of q -> q + 1 acting on P^1(Z/dZ) (right cosets of Gamma_0(d) modulo the stabilizer of infinity)."""
    if d == 1:
        return 1
    units = [u for u in range(1, d) if gcd(u, d) == 1]

    def canon(c, e):
        return min(((u * c) % d, (u * e) % d) for u in units)

    points = {canon(c, e) for c in range(d) for e in range(d) if gcd(gcd(c, e), d) == 1}
    seen, orbits = set(), 0
    for p in points:
        if p in seen:
            continue
        orbits += 1
        stack = [p]
        while stack:
            c, e = stack.pop()
            if (c, e) in seen:
                continue
            seen.add((c, e))
            for nxt in (canon(c, (e + c) % d), canon(c, (e - c) % d)):
                if nxt not in seen:
                    stack.append(nxt)
    return orbits


def projective_line_size(d: int) -> int:
    """|P^1(Z/dZ)| by enumeration (equals psi(d))."""
    if d == 1:
        return 1
    units = [u for u in range(1, d) if gcd(u, d) == 1]
    return len({min(((u * c) % d, (u * e) % d) for u in units) for c in range(d) for e in range(d) if gcd(gcd(c, e), d) == 1})


def coset_reps(d: int, primitive: bool = True) -> List[Tuple[int, int, int]]:
    """Triples (a, b, e) with ab = d, 0 <= e < b (and gcd(a, b, e) = 1 if ``primitive``)."""
    out = []
    for a in reversed(divisors(d)):
        b = d // a
        for e in range(b):
            if not primitive or gcd(gcd(a, b), e) == 1:
                out.append((a, b, e))
    return out


# ---------------------------------------------------------------------------
# Eisenstein series


def eisenstein(weight: int, N: int) -> QSeries:
    """E_2, E_4 or E_6 to O(q^(N+1))."""
    if weight not in (2, 4, 6):
        raise ValueError("weight must be 2, 4 or 6")
    k = weight // 2
    factor = (-1) ** k * mpq(4 * k) / bernoulli(k)
    coeffs = [mpq(1)] + [factor * sigma(2 * k - 1, n) for n in range(1, N + 1)]
    return QSeries(coeffs)


@dataclass
class EisensteinBasis:
    g1: QSeries
    g2: QSeries
    g3: QSeries

    @property
    def order(self) -> int:
        return self.g1.order

    def as_tuple(self):
        return self.g1, self.g2, self.g3


@lru_cache(maxsize=32)
def _eisenstein_basis_cached(N: int) -> EisensteinBasis:
    return EisensteinBasis(eisenstein(2, N) / 12, eisenstein(4, N) / 12, eisenstein(6, N) / 216)


def eisenstein_basis(N: int) -> EisensteinBasis:
    return _eisenstein_basis_cached(N)


def ramanujan_defects(basis: EisensteinBasis) -> Tuple[QSeries, QSeries, QSeries]:
    """Left minus right side of the Ramanujan system for q d/dq (all zero when it holds)."""
    g1, g2, g3 = basis.as_tuple()
    return (
        g1.qderiv() - (g1 * g1 - g2 / 12),
        g2.qderiv() - (4 * (g1 * g2) - 6 * g3),
        g3.qderiv() - (6 * (g1 * g3) - (g2 * g2) / 3),
    )


def isogenous_basis(d: int, N: int) -> EisensteinBasis:
    """(d g1(q^d), d^2 g2(q^d), d^3 g3(q^d)), again a solution of the Ramanujan system."""
    b = eisenstein_basis(N)
    return EisensteinBasis(b.g1.spread(d) * d, b.g2.spread(d) * d ** 2, b.g3.spread(d) * d ** 3)


# ---------------------------------------------------------------------------
# the leaf S_0(d) in the chart y1 = 1


@dataclass
class LeafParam:
    d: int
    N: int
    x2: QSeries
    x3: QSeries
    y2: QSeries
    y3: QSeries
    y1series: QSeries

    def chart(self) -> Dict[str, QSeries]:
        return {"x2": self.x2, "x3": self.x3, "y2": self.y2, "y3": self.y3}

    def constant_terms(self):
        return tuple(s[0] for s in (self.x2, self.x3, self.y2, self.y3))


def leaf_param(d: int, N: int) -> LeafParam:
    if d <= 1:
        raise ValueError("leaf_param needs d >= 2 (the denominator vanishes for d = 1)")
    b = eisenstein_basis(N)
    s = isogenous_basis(d, N)
    Y = b.g1 - s.g1
    Yi = Y.inverse()
    Yi2 = Yi * Yi
    Yi3 = Yi2 * Yi
    return LeafParam(d, N, b.g2 * Yi2, b.g3 * Yi3, s.g2 * Yi2, -(s.g3 * Yi3), Y)


def cusp_values(d: int):
    """Constant terms of leaf_param(d): the cusp g([1:-d]) in the chart."""
    one = mpq(1 - d)
    return (12 / one ** 2, 8 / one ** 3, 12 * mpq(d) ** 2 / one ** 2, -8 * mpq(d) ** 3 / one ** 3)


def tangency_minors(d: int, N: int, V: Optional[VectorField] = None) -> List[QSeries]:
    """Six 2x2 minors of [v(P(q)); q dP/dq], truncated to order N - 2."""
    V = V or foliation_v()
    P = leaf_param(d, N).chart()
    rows_v = [c.evaluate(P) for c in V.components]
    rows_d = [P[n].qderiv() for n in V.variables]
    return minors_2x2(rows_v, rows_d, N - 2)


def minors_2x2(r1: Sequence[QSeries], r2: Sequence[QSeries], order: int) -> List[QSeries]:
    out = []
    n = len(r1)
    for a in range(n):
        for b in range(a + 1, n):
            out.append((r1[a] * r2[b] - r1[b] * r2[a]).truncate(order))
    return out


# ---------------------------------------------------------------------------
# modular equations by linear algebra on q-expansions


def degree_matched_exponents(d: int, i: int) -> List[Tuple[int, int, int]]:
    """(a1, a2, a3) with i*psi(d) = i*a1 + 2*a2 + 3*a3, lexicographically descending."""
    if i not in (1, 2, 3):
        raise ValueError("i must be 1, 2 or 3")
    total = i * dedekind_psi(d)
    out = []
    for a1 in range(total // i, -1, -1):
        rest = total - i * a1
        for a2 in range(rest // 2, -1, -1):
            r3 = rest - 2 * a2
            if r3 % 3 == 0:
                out.append((a1, a2, r3 // 3))
    return out


def modeq_ring(i: int) -> PolyRing:
    return PolyRing(["y%d" % i, "x2", "x3"], [i, 2, 3])


def default_terms(d: int, i: int) -> int:
    m = len(degree_matched_exponents(d, i))
    return max(3 * i * dedekind_psi(d), m + 15)


def modular_form_arguments(d: int, i: int, N: int) -> Dict[str, QSeries]:
    """Series substituted into Q_{d,i}: y_i-argument, g2(q), g3(q)."""
    b = eisenstein_basis(N)
    s = isogenous_basis(d, N)
    if i == 1:
        yi = s.g1 - b.g1
    elif i == 2:
        yi = s.g2
    else:
        yi = s.g3
    return {"y%d" % i: yi, "x2": b.g2, "x3": b.g3}


def _monomial_series(args: Dict[str, QSeries], names: Sequence[str], exps: Sequence[Tuple[int, int, int]]) -> List[QSeries]:
    cache: Dict[Tuple[str, int], QSeries] = {}

    def pw(n, k):
        key = (n, k)
        if key not in cache:
            cache[key] = args[n] ** k
        return cache[key]

    out = []
    for e in exps:
        s = None
        for n, k in zip(names, e):
            if k:
                s = pw(n, k) if s is None else s * pw(n, k)
        if s is None:
            s = QSeries.const(1, next(iter(args.values())).order)
        out.append(s)
    return out


def modeq_solve(d: int, i: int, N: Optional[int] = None) -> MultiPoly:
    """Q_{d,i} in the modular-form convention, leading coefficient of y_i^psi(d) equal to 1."""
    if d < 2:
        raise ValueError("modeq_solve needs d >= 2")
    exps = degree_matched_exponents(d, i)
    m = len(exps)
    if N is None:
        N = default_terms(d, i)
    if N < m + 10:
        raise PrecisionError("need N >= m + 10 = %d terms" % (m + 10))
    ring = modeq_ring(i)
    args = modular_form_arguments(d, i, N)
    cols = _monomial_series(args, ring.names, exps)
    M = ExactMatrix([[c[n] for c in cols] for n in range(N + 1)])
    kernel = nullspace_rational(M)
    if not kernel:
        raise PrecisionError("precision too low: kernel is trivial at N=%d" % N)
    if len(kernel) > 1:
        raise PrecisionError("underdetermined - increase N (kernel dimension %d at N=%d)" % (len(kernel), N))
    vec = kernel[0]
    lead = vec[0]
    if lead == 0:
        raise PrecisionError("kernel vector has no y_%d^psi term" % i)
    vec = [c / lead for c in vec]
    return MultiPoly(ring, {e: c for e, c in zip(exps, vec)})


def to_chart_convention(Qpoly: MultiPoly) -> MultiPoly:
    """Translate y1 -> -y1 (i = 1) or y3 -> -y3 (i = 3); identity for i = 2."""
    yname = Qpoly.ring.names[0]
    if yname == "y2":
        return Qpoly
    y = Qpoly.ring.var(yname)
    return Qpoly.compose({yname: -y}, Qpoly.ring)


def modeq_residual(Qpoly: MultiPoly, d: int, N: int) -> QSeries:
    """Q evaluated on the modular-form series to order N (zero for a true modular equation)."""
    yname = Qpoly.ring.names[0]
    i = int(yname[1:])
    if Qpoly.is_zero():
        return QSeries.const(0, N)
    args = modular_form_arguments(d, i, N)
    return Qpoly.evaluate(args) + QSeries.const(0, N)


@dataclass
class ModularEquation:
    d: int
    i: int
    psi: int
    m: int
    N: int
    poly: MultiPoly
    chart_poly: MultiPoly
    verified_at: int

    @property
    def coefficients(self) -> List[object]:
        return [self.poly.terms.get(e, mpq(0)) for e in degree_matched_exponents(self.d, self.i)]

    @property
    def chart_coefficients(self) -> List[object]:
        return [self.chart_poly.terms.get(e, mpq(0)) for e in degree_matched_exponents(self.d, self.i)]

    def to_json(self):
        return {
            "d": self.d,
            "i": self.i,
            "psi": self.psi,
            "m": self.m,
            "N": self.N,
            "verified_at": self.verified_at,
            "convention": "modular-form",
            "polynomial": self.poly.to_text(),
            "coefficients": [fmt_rational(c) for c in self.coefficients],
            "chart_polynomial": self.chart_poly.to_text(),
            "chart_coefficients": [fmt_rational(c) for c in self.chart_coefficients],
            "monomials": [list(e) for e in degree_matched_exponents(self.d, self.i)],
        }


def modular_equation(d: int, i: int, N: Optional[int] = None) -> ModularEquation:
    """Solve, then re-check the residual at twice the precision."""
    N = default_terms(d, i) if N is None else N
    poly = modeq_solve(d, i, N)
    res = modeq_residual(poly, d, 2 * N)
    if not res.is_zero():
        raise PrecisionError("solution at N=%d fails the residual check at %d" % (N, 2 * N))
    m = len(degree_matched_exponents(d, i))
    return ModularEquation(d, i, dedekind_psi(d), m, N, poly, to_chart_convention(poly), 2 * N)
