"""Exact rational arithmetic, sparse weighted polynomials and fraction-free linear algebra.

Coefficients are ``gmpy2.mpq`` values (arbitrary precision, always reduced).
A :class:`PolyRing` fixes the variable names and their integer weights; every
:class:`MultiPoly` belongs to exactly one ring and is immutable.
"""

from __future__ import annotations

from itertools import permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from gmpy2 import mpq

Exponent = Tuple[int, ...]


def Q(x, y=None):
    """Coerce ``x`` (or ``x/y``) to an exact rational."""
    if y is not None:
        return mpq(x, y)
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


def fmt_rational(c) -> str:
    c = mpq(c)
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


class PolyError(ValueError):
    pass


class PolyRing:
    """Ordered variable names with weights. Rings compare by value."""

    __slots__ = ("names", "weights", "_index")

    def __init__(self, names: Sequence[str], weights: Optional[Sequence[int]] = None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise PolyError("duplicate variable names")
        if weights is None:
            weights = (1,) * len(names)
        weights = tuple(int(w) for w in weights)
        if len(weights) != len(names):
            raise PolyError("weights and names differ in length")
        self.names = names
        self.weights = weights
        self._index = {n: k for k, n in enumerate(names)}

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.names == other.names and self.weights == other.weights

    def __hash__(self):
        return hash((self.names, self.weights))

    def __repr__(self):
        return "PolyRing(%r, %r)" % (list(self.names), list(self.weights))

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PolyError("unknown variable %r" % name) from None

    def var(self, name: str) -> "MultiPoly":
        e = [0] * self.nvars
        e[self.index(name)] = 1
        return MultiPoly(self, {tuple(e): mpq(1)})

    def gens(self) -> List["MultiPoly"]:
        return [self.var(n) for n in self.names]

    def const(self, c) -> "MultiPoly":
        c = Q(c)
        if c == 0:
            return MultiPoly(self, {})
        return MultiPoly(self, {(0,) * self.nvars: c})

    def zero(self) -> "MultiPoly":
        return MultiPoly(self, {})

    def one(self) -> "MultiPoly":
        return self.const(1)

    def monomial(self, exps: Sequence[int], coeff=1) -> "MultiPoly":
        exps = tuple(int(e) for e in exps)
        if len(exps) != self.nvars or min(exps, default=0) < 0:
            raise PolyError("bad exponent vector %r" % (exps,))
        return MultiPoly(self, {exps: Q(coeff)} if coeff != 0 else {})

    def parse(self, text: str) -> "MultiPoly":
        return parse_poly(self, text)


def _mono_weight(weights: Sequence[int], e: Exponent) -> int:
    return sum(w * k for w, k in zip(weights, e))


class MultiPoly:
    """Sparse polynomial: map from exponent tuples to nonzero mpq coefficients."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: Mapping[Exponent, object], _trusted: bool = False):
        self.ring = ring
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            n = ring.nvars
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != n:
                    raise PolyError("exponent arity %d != %d" % (len(e), n))
                c = Q(c)
                if c != 0:
                    clean[e] = c
            self.terms = clean
        self._hash = None

    # -- basic predicates -------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self):
        return self.terms.get((0,) * self.ring.nvars, mpq(0))

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            if other.ring != self.ring:
                return (self - other.to_ring(self.ring)).is_zero() if set(other.variables_used()) <= set(self.ring.names) else False
            return self.terms == other.terms
        try:
            c = Q(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == ({(0,) * self.ring.nvars: c} if c != 0 else {})

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.ring != self.ring:
                raise PolyError("ring mismatch: %r vs %r" % (self.ring.names, other.ring.names))
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e)
            if s is None:
                t[e] = c
            else:
                s = s + c
                if s == 0:
                    del t[e]
                else:
                    t[e] = s
        return MultiPoly(self.ring, t, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.ring, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "MultiPoly":
        c = Q(c)
        if c == 0:
            return self.ring.zero()
        return MultiPoly(self.ring, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        other = self._coerce(other)
        if len(self.terms) > len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        t: Dict[Exponent, object] = {}
        get = t.get
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = get(e)
                t[e] = ca * cb if s is None else s + ca * cb
        return MultiPoly(self.ring, {e: c for e, c in t.items() if c != 0}, _trusted=True)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, MultiPoly):
            if other.is_constant() and not other.is_zero():
                return self.scale(1 / other.constant_term())
            return self.exact_div(other)
        c = Q(other)
        if c == 0:
            raise ZeroDivisionError("division by zero")
        return self.scale(1 / c)

    def __pow__(self, n: int):
        if n < 0:
            raise PolyError("negative power")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- structure ---------------------------------------------------------
    def variables_used(self) -> List[str]:
        used = [False] * self.ring.nvars
        for e in self.terms:
            for k, x in enumerate(e):
                if x:
                    used[k] = True
        return [n for n, u in zip(self.ring.names, used) if u]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        k = self.ring.index(name)
        return max((e[k] for e in self.terms), default=-1)

    def weighted_degrees(self) -> set:
        w = self.ring.weights
        return {_mono_weight(w, e) for e in self.terms}

    def diff(self, name: str) -> "MultiPoly":
        k = self.ring.index(name)
        t = {}
        for e, c in self.terms.items():
            p = e[k]
            if p:
                ne = e[:k] + (p - 1,) + e[k + 1:]
                t[ne] = c * p
        return MultiPoly(self.ring, t, _trusted=True)

    def to_ring(self, ring: PolyRing) -> "MultiPoly":
        """Re-embed into a ring that contains every variable actually used."""
        if ring == self.ring:
            return self
        src = self.ring.names
        pos = [ring.index(n) for n in src]
        t = {}
        for e, c in self.terms.items():
            ne = [0] * ring.nvars
            for k, x in enumerate(e):
                if x:
                    ne[pos[k]] = x
            t[tuple(ne)] = c
        return MultiPoly(ring, t, _trusted=True)

    def leading(self) -> Tuple[Exponent, object]:
        """Lexicographically largest term."""
        if not self.terms:
            raise PolyError("zero polynomial has no leading term")
        e = max(self.terms)
        return e, self.terms[e]

    def coefficients_in_z_1_6(self) -> bool:
        return all(_is_2a3b(c.denominator) for c in self.terms.values())

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at numbers (any type supporting + * and int powers)."""
        vals = [point[n] if n in point else None for n in self.ring.names]
        used = self.variables_used()
        for n in used:
            if point.get(n) is None:
                raise PolyError("no value for variable %r" % n)
        powcache: Dict[Tuple[int, int], object] = {}
        total = 0
        for e, c in self.terms.items():
            term = c
            for k, x in enumerate(e):
                if x:
                    key = (k, x)
                    p = powcache.get(key)
                    if p is None:
                        p = vals[k] ** x
                        powcache[key] = p
                    term = term * p
            total = total + term
        return total

    def partial_substitute(self, values: Mapping[str, object]) -> "MultiPoly":
        """Substitute rational constants for some variables, staying in the same ring."""
        idx = {self.ring.index(n): Q(v) for n, v in values.items()}
        t: Dict[Exponent, object] = {}
        for e, c in self.terms.items():
            ne = list(e)
            for k, v in idx.items():
                if e[k]:
                    c = c * v ** e[k]
                    ne[k] = 0
            ne = tuple(ne)
            t[ne] = t.get(ne, 0) + c
        return MultiPoly(self.ring, t)

    def compose(self, images: Mapping[str, "MultiPoly"], target: PolyRing) -> "MultiPoly":
        """Polynomial substitution ``var -> images[var]`` into ``target``.

        Variables missing from ``images`` must also exist in ``target``; they map to themselves.
        """
        gens = []
        for n in self.ring.names:
            if n in images:
                g = images[n]
                if not isinstance(g, MultiPoly):
                    g = target.const(g)
                elif g.ring != target:
                    g = g.to_ring(target)
                gens.append(g)
            else:
                gens.append(target.var(n) if n in target.names else None)
        powcache: Dict[Tuple[int, int], MultiPoly] = {}

        def power(k, x):
            key = (k, x)
            p = powcache.get(key)
            if p is None:
                if gens[k] is None:
                    raise PolyError("no image for variable %r" % self.ring.names[k])
                p = gens[k] ** x if x > 1 else gens[k]
                powcache[key] = p
            return p

        acc: Dict[Exponent, object] = {}
        for e, c in self.terms.items():
            term = target.const(c)
            for k, x in enumerate(e):
                if x:
                    term = term * power(k, x)
            for te, tc in term.terms.items():
                acc[te] = acc.get(te, 0) + tc
        return MultiPoly(target, acc)

    # -- division ------------------------------------------------------------
    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Exact quotient; raises PolyError when ``other`` does not divide ``self``."""
        q, r = self.divmod_lex(other)
        if not r.is_zero():
            raise PolyError("inexact division")
        return q

    def divmod_lex(self, other: "MultiPoly", stop_on_failure: bool = True):
        """Multivariate division by a single polynomial in lex order.

        With ``stop_on_failure`` the loop returns as soon as the remainder's leading
        term is not divisible (enough to decide exactness).
        """
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        le, lc = other.leading()
        rem = dict(self.terms)
        quo: Dict[Exponent, object] = {}
        oterms = list(other.terms.items())
        import heapq

        heap = [tuple(-x for x in e) for e in rem]
        heapq.heapify(heap)
        rest: Dict[Exponent, object] = {}
        while heap:
            key = heapq.heappop(heap)
            e = tuple(-x for x in key)
            c = rem.pop(e, None)
            if c is None or c == 0:
                continue
            # discard duplicates that may remain in heap
            qe = tuple(a - b for a, b in zip(e, le))
            if min(qe) < 0:
                if stop_on_failure:
                    rem[e] = c
                    rest.update(rem)
                    return MultiPoly(self.ring, quo), MultiPoly(self.ring, rest)
                rest[e] = c
                continue
            qc = c / lc
            quo[qe] = qc
            for oe, oc in oterms:
                if oe == le:
                    continue
                te = tuple(a + b for a, b in zip(qe, oe))
                v = rem.get(te)
                if v is None:
                    rem[te] = -qc * oc
                    heapq.heappush(heap, tuple(-x for x in te))
                else:
                    v = v - qc * oc
                    rem[te] = v
        return MultiPoly(self.ring, quo), MultiPoly(self.ring, rest)

    # -- text ------------------------------------------------------------------
    def sorted_terms(self) -> List[Tuple[Exponent, object]]:
        """Canonical order: weighted degree descending, then exponents lex ascending."""
        w = self.ring.weights
        return sorted(self.terms.items(), key=lambda ec: (-_mono_weight(w, ec[0]), ec[0]))

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = [fmt_rational(c)]
            for name, x in zip(self.ring.names, e):
                if x == 1:
                    factors.append(name)
                elif x > 1:
                    factors.append("%s^%d" % (name, x))
            parts.append("*".join(factors))
        return " + ".join(parts)

    __str__ = to_text

    def __repr__(self):
        return "MultiPoly(%s)" % self.to_text()


def _is_2a3b(n: int) -> bool:
    n = int(n)
    for p in (2, 3):
        while n % p == 0:
            n //= p
    return n == 1


def parse_poly(ring: PolyRing, text: str) -> MultiPoly:
    """Parse the canonical text format (and the same format with '-' signs)."""
    text = text.strip()
    if text == "0":
        return ring.zero()
    text = text.replace(" - ", " + -")
    terms: Dict[Exponent, object] = {}
    for chunk in text.split(" + "):
        chunk = chunk.strip()
        if not chunk:
            continue
        e = [0] * ring.nvars
        c = mpq(1)
        for fac in chunk.split("*"):
            fac = fac.strip()
            if fac.startswith("-") and not _is_number(fac):
                c = -c
                fac = fac[1:]
            if _is_number(fac):
                c = c * Q(fac)
            else:
                name, _, p = fac.partition("^")
                e[ring.index(name)] += int(p) if p else 1
        e = tuple(e)
        terms[e] = terms.get(e, 0) + c
    return MultiPoly(ring, terms)


def _is_number(s: str) -> bool:
    try:
        mpq(s)
        return True
    except (ValueError, TypeError):
        return False


def weighted_degree(p: MultiPoly) -> Union[int, str]:
    """Common weighted degree of all terms, or ``"inhomogeneous"``."""
    if p.is_zero():
        raise PolyError("undefined degree")
    degs = p.weighted_degrees()
    if len(degs) == 1:
        return degs.pop()
    return "inhomogeneous"


# ---------------------------------------------------------------------------
# rational functions


class RationalFunction:
    """``num/den`` kept unreduced; equality by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: Optional[MultiPoly] = None):
        if den is None:
            den = num.ring.one()
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.ring != den.ring:
            raise PolyError("ring mismatch")
        self.num = num
        self.den = den

    @property
    def ring(self) -> PolyRing:
        return self.num.ring

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, MultiPoly):
            return RationalFunction(other)
        return RationalFunction(self.ring.const(other))

    def __add__(self, other):
        o = self._coerce(other)
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __pow__(self, n: int):
        if n < 0:
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num ** n, self.den ** n)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    __hash__ = None

    def diff(self, name: str) -> "RationalFunction":
        return RationalFunction(self.num.diff(name) * self.den - self.num * self.den.diff(name), self.den * self.den)

    def as_poly(self) -> MultiPoly:
        """Exact polynomial value; PolyError if the denominator does not divide."""
        if self.den.is_constant():
            return self.num.scale(1 / self.den.constant_term())
        return self.num.exact_div(self.den)

    def reduce(self) -> "RationalFunction":
        """Best-effort cancellation: constants, and exact division by the denominator."""
        if self.den.is_constant():
            return RationalFunction(self.num.scale(1 / self.den.constant_term()))
        try:
            return RationalFunction(self.num.exact_div(self.den))
        except PolyError:
            return self

    def evaluate(self, point):
        d = self.den.evaluate(point)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at point")
        return self.num.evaluate(point) / d

    def __repr__(self):
        return "RationalFunction((%s)/(%s))" % (self.num, self.den)


def substitute(p: MultiPoly, assignment: Mapping[str, object], target: Optional[PolyRing] = None) -> RationalFunction:
    """Compose ``p`` with rational functions; the result lives over ``target``."""
    for n in p.variables_used():
        if n not in assignment:
            raise PolyError("assignment does not cover variable %r" % n)
    if target is None:
        for v in assignment.values():
            if isinstance(v, (RationalFunction, MultiPoly)):
                target = v.ring
                break
        else:
            target = p.ring
    rfs = {}
    for n, v in assignment.items():
        if isinstance(v, RationalFunction):
            rfs[n] = v if v.ring == target else RationalFunction(v.num.to_ring(target), v.den.to_ring(target))
        elif isinstance(v, MultiPoly):
            rfs[n] = RationalFunction(v.to_ring(target))
        else:
            rfs[n] = RationalFunction(target.const(v))
    # common denominator per variable: p = sum c * prod (num_k/den_k)^e_k
    used = p.variables_used()
    maxdeg = {n: p.degree_in(n) for n in used}
    den = target.one()
    for n in used:
        den = den * rfs[n].den ** maxdeg[n]
    if den.is_zero():
        raise ZeroDivisionError("identically zero denominator")
    numpow: Dict[Tuple[str, int], MultiPoly] = {}
    denpow: Dict[Tuple[str, int], MultiPoly] = {}

    def npow(n, k):
        key = (n, k)
        if key not in numpow:
            numpow[key] = rfs[n].num ** k
        return numpow[key]

    def dpow(n, k):
        key = (n, k)
        if key not in denpow:
            denpow[key] = rfs[n].den ** k
        return denpow[key]

    num = target.zero()
    for e, c in p.terms.items():
        term = target.const(c)
        for name, x in zip(p.ring.names, e):
            if name not in maxdeg:
                continue
            if x:
                term = term * npow(name, x)
            if maxdeg[name] - x:
                term = term * dpow(name, maxdeg[name] - x)
        num = num + term
    return RationalFunction(num, den)


# ---------------------------------------------------------------------------
# matrices and elimination


class ExactMatrix:
    """Rectangular matrix whose entries are all mpq or all MultiPoly."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[object]]):
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise PolyError("empty matrix")
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise PolyError("ragged matrix")
        kinds = {isinstance(x, MultiPoly) for r in rows for x in r}
        if len(kinds) != 1:
            raise PolyError("mixed entry kinds")
        if kinds == {False}:
            rows = [[Q(x) for x in r] for r in rows]
        self.rows = len(rows)
        self.cols = cols
        self.entries = rows

    @property
    def is_poly(self) -> bool:
        return isinstance(self.entries[0][0], MultiPoly)

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r][c]

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.entries == other.entries

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([[self.entries[r][c] for r in range(self.rows)] for c in range(self.cols)])

    def apply(self, vec: Sequence[object]) -> list:
        if len(vec) != self.cols:
            raise PolyError("vector length %d != %d columns" % (len(vec), self.cols))
        out = []
        for r in self.entries:
            s = 0
            for a, b in zip(r, vec):
                s = a * b + s
            out.append(s)
        return out

    def map(self, fn) -> "ExactMatrix":
        return ExactMatrix([[fn(x) for x in r] for r in self.entries])

    def to_json(self):
        return [[x.to_text() if isinstance(x, MultiPoly) else fmt_rational(x) for x in r] for r in self.entries]

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[mpq(int(i == j)) for j in range(n)] for i in range(n)])

    def __repr__(self):
        return "ExactMatrix(%dx%d)" % (self.rows, self.cols)


def _exact_quotient(a, b):
    if isinstance(a, MultiPoly):
        if b.is_constant():
            return a.scale(1 / b.constant_term())
        return a.exact_div(b)
    if isinstance(a, int):
        q, r = divmod(a, b)
        assert r == 0, "inexact integer Bareiss step"
        return q
    return a / b


def bareiss(entries: List[List[object]], zero, is_zero=lambda x: x == 0):
    """In-place fraction-free elimination with row pivoting.

    Returns ``(rank, sign, last_pivot)``; for a full-rank square input
    ``sign * last_pivot`` is the determinant.
    """
    rows = len(entries)
    cols = len(entries[0]) if rows else 0
    prev = None
    sign = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = None
        for k in range(r, rows):
            if not is_zero(entries[k][c]):
                piv = k
                break
        if piv is None:
            continue
        if piv != r:
            entries[r], entries[piv] = entries[piv], entries[r]
            sign = -sign
        p = entries[r][c]
        for k in range(r + 1, rows):
            rk = entries[k]
            a = rk[c]
            for j in range(c + 1, cols):
                v = p * rk[j] - a * entries[r][j]
                rk[j] = v if prev is None else _exact_quotient(v, prev)
            rk[c] = zero
        prev = p
        r += 1
    return r, sign, prev


def bareiss_det(M: ExactMatrix):
    """Determinant by Bareiss elimination (MultiPoly entries give a MultiPoly)."""
    if M.rows != M.cols:
        raise PolyError("determinant of a non-square %dx%d matrix" % (M.rows, M.cols))
    work = [list(r) for r in M.entries]
    if M.is_poly:
        ring = work[0][0].ring
        zero = ring.zero()
        isz = MultiPoly.is_zero
    else:
        zero = mpq(0)
        isz = lambda x: x == 0
    rank, sign, last = bareiss(work, zero, isz)
    if rank < M.rows:
        return zero
    return last * sign if not M.is_poly else last.scale(sign)


def cofactor_det(M: ExactMatrix):
    """Leibniz expansion; exponential, used as a test oracle for small matrices."""
    if M.rows != M.cols:
        raise PolyError("non-square")
    n = M.rows
    total = M.entries[0][0].ring.zero() if M.is_poly else mpq(0)
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = None
        for i in range(n):
            x = M.entries[i][perm[i]]
            term = x if term is None else term * x
        total = total - term if inv % 2 else total + term
    return total


def subset_det(entries: Sequence[Sequence[object]], one, zero):
    """Division-free determinant by expansion over column subsets, O(n 2^n) products.

    Works over any commutative ring (used for truncated power series).
    """
    n = len(entries)
    prev = {0: one}
    for r in range(n):
        cur: Dict[int, object] = {}
        row = entries[n - 1 - r]
        for mask, val in prev.items():
            # sign: columns already used to the left of c
            for c in range(n):
                bit = 1 << c
                if mask & bit:
                    continue
                x = row[c]
                if _is_zero_generic(x):
                    continue
                left = bin(mask & (bit - 1)).count("1")
                term = x * val
                if left % 2:
                    term = -term
                nm = mask | bit
                cur[nm] = term if nm not in cur else cur[nm] + term
        prev = cur
    return prev.get((1 << n) - 1, zero)


def _is_zero_generic(x):
    if hasattr(x, "is_zero"):
        return x.is_zero()
    return x == 0


def _integer_rows(M: ExactMatrix) -> List[List[int]]:
    out = []
    for r in M.entries:
        lcm = 1
        for x in r:
            d = int(x.denominator)
            if d != 1:
                lcm = lcm * d // _gcd(lcm, d)
        out.append([int(x.numerator) * (lcm // int(x.denominator)) for x in r])
    return out


def _gcd(a, b):
    from math import gcd

    return gcd(a, b)


def rank_rational(M: ExactMatrix) -> int:
    """Exact rank via integer Bareiss after clearing row denominators."""
    if M.is_poly:
        return rank_poly(M)
    work = _integer_rows(M)
    rank, _, _ = bareiss(work, 0)
    return rank


def rank_poly(M: ExactMatrix) -> int:
    """Rank over the fraction field of the polynomial ring."""
    work = [list(r) for r in M.entries]
    ring = work[0][0].ring
    rank, _, _ = bareiss(work, ring.zero(), MultiPoly.is_zero)
    return rank


def rref_rational(M: ExactMatrix):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    A = [list(r) for r in M.entries]
    rows, cols = M.rows, M.cols
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((k for k in range(r, rows) if A[k][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for k in range(rows):
            if k != r and A[k][c] != 0:
                f = A[k][c]
                A[k] = [x - f * y for x, y in zip(A[k], A[r])]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def nullspace_rational(M: ExactMatrix) -> List[List[object]]:
    """Basis of the right kernel, one vector per free column, scaled so the first nonzero entry is 1."""
    if M.is_poly:
        raise PolyError("nullspace_rational needs rational entries")
    R, pivots = rref_rational(M)
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [mpq(0)] * M.cols
        v[f] = mpq(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        lead = next(x for x in v if x != 0)
        basis.append([x / lead for x in v])
    return basis
