"""Polynomial vector fields as derivations, the built-in fields and the self-join.

A :class:`VectorField` differentiates with respect to its own ``variables``; its
components may live in a larger ring whose extra variables act as parameters
(the symbolic Halphen exponents ``a1, a2, a3`` for instance).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

from gmpy2 import mpq

from .polycore import (
    ExactMatrix,
    MultiPoly,
    PolyError,
    PolyRing,
    Q,
    RationalFunction,
    substitute,
)


class FieldError(ValueError):
    pass


class VectorField:
    def __init__(self, variables: Sequence[str], components: Sequence[MultiPoly], name: str = ""):
        variables = tuple(variables)
        components = list(components)
        if len(variables) != len(components):
            raise FieldError("%d variables but %d components" % (len(variables), len(components)))
        ring = components[0].ring
        for c in components:
            if c.ring != ring:
                raise FieldError("components live in different rings")
        for v in variables:
            ring.index(v)
        self.variables = variables
        self.components = components
        self.ring = ring
        self.name = name

    def __getitem__(self, var: str) -> MultiPoly:
        return self.components[self.variables.index(var)]

    def __eq__(self, other):
        return (
            isinstance(other, VectorField)
            and self.variables == other.variables
            and all(a == b for a, b in zip(self.components, other.components))
        )

    def __neg__(self):
        return VectorField(self.variables, [-c for c in self.components], "-" + self.name if self.name else "")

    def __add__(self, other):
        _check_same(self, other)
        return VectorField(self.variables, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "VectorField":
        return VectorField(self.variables, [x.scale(c) for x in self.components])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def to_ring(self, ring: PolyRing) -> "VectorField":
        return VectorField(self.variables, [c.to_ring(ring) for c in self.components], self.name)

    def __call__(self, p):
        return apply_derivation(self, p)

    def evaluate(self, point: Mapping[str, object]) -> list:
        return [c.evaluate(point) for c in self.components]

    def to_text(self) -> str:
        return "\n".join("%s' = %s" % (v, c.to_text()) for v, c in zip(self.variables, self.components))

    def __repr__(self):
        return "VectorField(%s)" % ", ".join(self.variables)


def _check_same(V: VectorField, W: VectorField):
    if V.variables != W.variables or V.ring != W.ring:
        raise FieldError("vector fields over different variables")


def apply_derivation(V: VectorField, p):
    """``sum_i V_i * dp/dvar_i`` for a polynomial or rational function ``p``."""
    if isinstance(p, RationalFunction):
        num = apply_derivation(V, p.num)
        den = apply_derivation(V, p.den)
        return RationalFunction(num * p.den - p.num * den, p.den * p.den)
    if p.ring != V.ring:
        raise FieldError("polynomial ring %r does not match field ring %r" % (p.ring.names, V.ring.names))
    out = V.ring.zero()
    for var, comp in zip(V.variables, V.components):
        d = p.diff(var)
        if not d.is_zero():
            out = out + comp * d
    return out


def iterate_derivation(V: VectorField, p: MultiPoly, r: int) -> MultiPoly:
    if r < 0:
        raise FieldError("negative iteration count")
    for _ in range(r):
        p = apply_derivation(V, p)
    return p


def lie_bracket(V: VectorField, W: VectorField) -> VectorField:
    _check_same(V, W)
    comps = [apply_derivation(V, w) - apply_derivation(W, v) for v, w in zip(V.components, W.components)]
    return VectorField(V.variables, comps)


def invariance_cofactor(V: VectorField, P: MultiPoly) -> MultiPoly:
    """Polynomial ``K`` with ``V(P) = K*P``; raises FieldError otherwise."""
    image = apply_derivation(V, P)
    try:
        return image.exact_div(P)
    except PolyError:
        raise FieldError("not invariant") from None


def linear_part(V: VectorField, at: Mapping[str, object]) -> ExactMatrix:
    """Jacobian ``[dV_i/dvar_j]`` at a singular point of ``V``."""
    point = {k: Q(v) for k, v in at.items()}
    vals = V.evaluate(point)
    if any(x != 0 for x in vals):
        raise FieldError("point is not a singular point of the field")
    return ExactMatrix([[c.diff(v).evaluate(point) for v in V.variables] for c in V.components])


def charpoly(M: ExactMatrix, var: str = "lam") -> MultiPoly:
    """Characteristic polynomial det(lam*I - M) of a rational matrix."""
    from .polycore import bareiss_det

    ring = PolyRing([var])
    lam = ring.var(var)
    n = M.rows
    A = ExactMatrix([[(lam if i == j else ring.zero()) - ring.const(M[i, j]) for j in range(n)] for i in range(n)])
    return bareiss_det(A)


def linearized_field(V: VectorField, at: Mapping[str, object]) -> VectorField:
    """Linear vector field ``x -> J x`` (point shifted to the origin)."""
    J = linear_part(V, at)
    gens = [V.ring.var(v) for v in V.variables]
    comps = []
    for i in range(J.rows):
        c = V.ring.zero()
        for j, g in enumerate(gens):
            if J[i, j] != 0:
                c = c + g.scale(J[i, j])
        comps.append(c)
    return VectorField(V.variables, comps, "linear part")


# ---------------------------------------------------------------------------
# built-in fields

RAMANUJAN_VARS = ("t1", "t2", "t3")
V_VARS = ("x2", "x3", "y2", "y3")
V_WEIGHTS = (2, 3, 2, 3)
HALPHEN_VARS = ("t1", "t2", "t3")
PICARD_VARS = ("a", "b", "c")


def t_ring() -> PolyRing:
    return PolyRing(RAMANUJAN_VARS, (1, 2, 3))


def chart_ring() -> PolyRing:
    return PolyRing(V_VARS, V_WEIGHTS)


def sl2_triple(ring: Optional[PolyRing] = None) -> Dict[str, VectorField]:
    R = ring or t_ring()
    t1, t2, t3 = (R.var(n) for n in RAMANUJAN_VARS)
    f = VectorField(
        RAMANUJAN_VARS,
        [-(t1 * t1 - t2.scale(mpq(1, 12))), -(4 * t1 * t2 - 6 * t3), -(6 * t1 * t3 - (t2 * t2).scale(mpq(1, 3)))],
        "f",
    )
    h = VectorField(RAMANUJAN_VARS, [-2 * t1, -4 * t2, -6 * t3], "h")
    e = VectorField(RAMANUJAN_VARS, [R.one(), R.zero(), R.zero()], "e")
    return {"f": f, "e": e, "h": h}


def ramanujan(ring: Optional[PolyRing] = None) -> VectorField:
    R = -sl2_triple(ring)["f"]
    R.name = "R"
    return R


def foliation_v(ring: Optional[PolyRing] = None) -> VectorField:
    R = ring or chart_ring()
    x2, x3, y2, y3 = (R.var(n) for n in V_VARS)
    sixth, third, quarter = mpq(1, 6), mpq(1, 3), mpq(1, 4)
    comps = [
        2 * x2 - 6 * x3 + ((x2 - y2) * x2).scale(sixth),
        3 * x3 - (x2 * x2).scale(third) + ((x2 - y2) * x3).scale(quarter),
        -(2 * y2 - 6 * y3 + ((y2 - x2) * y2).scale(sixth)),
        -(3 * y3 - (y2 * y2).scale(third) + ((y2 - x2) * y3).scale(quarter)),
    ]
    return VectorField(V_VARS, comps, "v")


def halphen(alpha: Sequence[object], ring: Optional[PolyRing] = None) -> VectorField:
    """Halphen system with finite exponents; entries of ``alpha`` are rationals or polynomials."""
    R = ring or t_ring()
    t = [R.var(n) for n in HALPHEN_VARS]
    comps = []
    for k in range(3):
        a = alpha[k]
        if not isinstance(a, MultiPoly):
            a = R.const(a)
        i, j = [x for x in range(3) if x != k]
        sym = t[k] * t[i] + t[k] * t[j] - t[i] * t[j]
        comps.append((1 - a) * sym + a * t[k] * t[k])
    return VectorField(HALPHEN_VARS, comps, "H")


def picard_ring() -> PolyRing:
    return PolyRing(PICARD_VARS, (2, 3, 4))


def picard_field(ring: Optional[PolyRing] = None) -> VectorField:
    R = ring or picard_ring()
    a, b, c = (R.var(n) for n in PICARD_VARS)
    comps = [
        2 * c - 24 * a * a + 6 * a * b + 6 * b,
        -(3 * c - 36 * a * a + 36 * a * b - 9 * b * b),
        12 * c * a + 12 * c * b - 144 * a ** 3 + 36 * b * b,
    ]
    return VectorField(PICARD_VARS, comps, "picard")


def builtin_fields(alpha: Sequence[object] = (0, 0, 0)) -> Dict[str, VectorField]:
    out = dict(sl2_triple())
    out["R"] = ramanujan()
    out["v"] = foliation_v()
    out["halphen"] = halphen(alpha)
    out["picard"] = picard_field()
    return out


# ---------------------------------------------------------------------------
# singular curve


def singular_curve_point(t, s):
    """Affine image (chart y1=1) of g([t:s]) = [3t^2 : t^3 : 3s^2 : s^3 : (s+t)/2].

    Returns the string ``"at infinity"`` when s + t = 0.
    """
    t, s = Q(t), Q(s)
    if t == 0 and s == 0:
        raise FieldError("[0:0] is not a point of P^1")
    y1 = (s + t) / 2
    if y1 == 0:
        return "at infinity"
    return {"x2": 3 * t * t / y1 ** 2, "x3": t ** 3 / y1 ** 3, "y2": 3 * s * s / y1 ** 2, "y3": s ** 3 / y1 ** 3}


# ---------------------------------------------------------------------------
# self-join


@dataclass
class ChartSpec:
    """Chart on the quotient of the doubled space.

    ``functions`` maps each new variable to a rational function in the source
    ring; ``slice`` fixes some source variables; ``inverse`` expresses the
    remaining source variables on the slice through the new variables.
    """

    source: PolyRing
    functions: Dict[str, RationalFunction]
    divisor: MultiPoly
    slice: Dict[str, object]
    inverse: Dict[str, MultiPoly]
    target: PolyRing
    label: str = ""
    meta: Dict[str, str] = field(default_factory=dict)


def _doubled_field(V: VectorField, source: PolyRing) -> VectorField:
    """``V(t) + V(s)`` on the source ring; V lives on t1,t2,t3 (plus parameters)."""
    ren = {}
    for n in V.variables:
        ren[n] = "s" + n[1:]
    comps_t = [c.to_ring(source) for c in V.components]
    # substitute t -> s in each component for the second copy
    images = {n: source.var(ren[n]) for n in V.variables}
    for n in V.ring.names:
        if n not in images:
            images[n] = source.var(n)
    comps_s = [c.compose(images, source) for c in V.components]
    variables = list(V.variables) + [ren[n] for n in V.variables]
    return VectorField(variables, comps_t + comps_s)


def self_join(V: VectorField, chart: ChartSpec) -> VectorField:
    """Quotient field of ``V + V`` in ``chart``, verified as an identity of rational functions."""
    src = chart.source
    W = _doubled_field(V, src)
    div_on_slice = chart.divisor.partial_substitute(chart.slice)
    if div_on_slice.is_zero():
        raise FieldError("not divisor-divisible: divisor vanishes on the slice")
    raw: Dict[str, RationalFunction] = {}
    for name, phi in chart.functions.items():
        raw[name] = apply_derivation(W, phi) / RationalFunction(chart.divisor)
    # restrict to slice, then express through the new variables
    tgt = chart.target
    images: Dict[str, object] = {}
    for n in src.names:
        if n in chart.slice:
            images[n] = Q(chart.slice[n])
        elif n in chart.inverse:
            images[n] = chart.inverse[n].to_ring(tgt)
        else:
            images[n] = tgt.var(n)
    comps = []
    for name in chart.functions:
        rf = raw[name]
        num = rf.num.compose(images, tgt)
        den = rf.den.compose(images, tgt)
        try:
            comps.append(RationalFunction(num, den).as_poly())
        except (PolyError, ZeroDivisionError):
            raise FieldError("not divisor-divisible: %s does not restrict to a polynomial" % name) from None
    out = VectorField(tuple(chart.functions), comps, "self-join")
    _verify_self_join(out, raw, chart)
    return out


def _verify_self_join(out: VectorField, raw: Mapping[str, RationalFunction], chart: ChartSpec):
    """Composite of the answer with the chart must equal the pre-slice expression."""
    src = chart.source
    assign = {n: chart.functions[n] for n in chart.functions}
    for n in out.ring.names:
        if n not in assign:
            assign[n] = RationalFunction(src.var(n)) if n in src.names else None
    for name, comp in zip(out.variables, out.components):
        lifted = substitute(comp, assign, target=src)
        if not (lifted == raw[name]):
            raise FieldError("chart not invariant: component %s fails the rational identity" % name)


def _source_ring(params: Sequence[str] = ()) -> PolyRing:
    names = ["t1", "t2", "t3", "s1", "s2", "s3"] + list(params)
    weights = [1, 2, 3, 1, 2, 3] + [0] * len(params)
    return PolyRing(names, weights)


def ramanujan_chart(divisor: str = "t1-s1") -> ChartSpec:
    """x2 = t2/(t1-s1)^2, x3 = t3/(t1-s1)^3, y2 = s2/(s1-t1)^2, y3 = s3/(s1-t1)^3; slice t1=1, s1=0."""
    S = _source_ring()
    t1, t2, t3, s1, s2, s3 = S.gens()
    d = t1 - s1
    fns = {
        "x2": RationalFunction(t2, d ** 2),
        "x3": RationalFunction(t3, d ** 3),
        "y2": RationalFunction(s2, (-d) ** 2),
        "y3": RationalFunction(s3, (-d) ** 3),
    }
    tgt = chart_ring()
    inverse = {"t2": tgt.var("x2"), "t3": tgt.var("x3"), "s2": tgt.var("y2"), "s3": -tgt.var("y3")}
    divisor_poly = d if divisor == "t1-s1" else -d
    return ChartSpec(S, fns, divisor_poly, {"t1": 1, "s1": 0}, inverse, tgt, "ramanujan", {"divisor": divisor})


HALPHEN_CHART_VARS = ("x1", "x2", "y1", "y2")


def halphen_chart(divisor: str = "s1-t1", y2_numerator: str = "s3-s1", params: Sequence[str] = ()) -> ChartSpec:
    """x1 = (t2-t1)/(s1-t1), x2 = (t3-t1)/(s1-t1), y1 = (s2-s1)/(t1-s1), y2 = (s3-s2 | s3-s1)/(t1-s1).

    Slice t1=0, s1=1.
    """
    S = _source_ring(params)
    t1, t2, t3, s1, s2, s3 = (S.var(n) for n in ("t1", "t2", "t3", "s1", "s2", "s3"))
    if y2_numerator == "s3-s2":
        y2num = s3 - s2
    elif y2_numerator == "s3-s1":
        y2num = s3 - s1
    else:
        raise FieldError("unknown y2 numerator %r" % y2_numerator)
    fns = {
        "x1": RationalFunction(t2 - t1, s1 - t1),
        "x2": RationalFunction(t3 - t1, s1 - t1),
        "y1": RationalFunction(s2 - s1, t1 - s1),
        "y2": RationalFunction(y2num, t1 - s1),
    }
    tgt = PolyRing(list(HALPHEN_CHART_VARS) + list(params), [1, 1, 1, 1] + [0] * len(params))
    x1, x2, y1, y2 = (tgt.var(n) for n in HALPHEN_CHART_VARS)
    if y2_numerator == "s3-s2":
        s3_inv = 1 - y1 - y2
    else:
        s3_inv = 1 - y2
    inverse = {"t2": x1, "t3": x2, "s2": 1 - y1, "s3": s3_inv}
    divisor_poly = s1 - t1 if divisor == "s1-t1" else t1 - s1
    return ChartSpec(
        S, fns, divisor_poly, {"t1": 0, "s1": 1}, inverse, tgt, "halphen",
        {"divisor": divisor, "y2_numerator": y2_numerator},
    )


def halphen_for_join(alpha: Sequence[object], params: Sequence[str] = ()) -> VectorField:
    """Halphen field over t1,t2,t3 plus optional symbolic parameter variables."""
    R = PolyRing(list(HALPHEN_VARS) + list(params), [1, 1, 1] + [0] * len(params))
    al = [R.var(a) if isinstance(a, str) else a for a in alpha]
    return halphen(al, R)


def dup_halphen_target(alpha: Sequence[object], params: Sequence[str] = ()) -> VectorField:
    """The self-joined Halphen system written out by hand (reference for tests)."""
    R = PolyRing(list(HALPHEN_CHART_VARS) + list(params), [1, 1, 1, 1] + [0] * len(params))
    x1, x2, y1, y2 = (R.var(n) for n in HALPHEN_CHART_VARS)
    a1, a2, a3 = [R.var(a) if isinstance(a, str) else R.const(a) for a in alpha]
    cx = x1 * x2 - y1 * y2
    cy = y1 * y2 - x1 * x2
    comps = [
        x1 * (a2 * x1 + (2 - a2 - a1) * x2 - (1 - a1) * cx - 1),
        x2 * (a3 * x2 + (2 - a3 - a1) * x1 - (1 - a1) * cx - 1),
        -(y1 * (a2 * y1 + (2 - a2 - a1) * y2 - (1 - a1) * cy - 1)),
        -(y2 * (a3 * y2 + (2 - a3 - a1) * y1 - (1 - a1) * cy - 1)),
    ]
    return VectorField(HALPHEN_CHART_VARS, comps, "dup-halphen")
