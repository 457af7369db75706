"""Picard's moduli example in P(1,2,3,4): discriminant, the alpha matrix and its kernel field.

The alpha matrix is a fixture typed in exactly as displayed, row factors
included; ``kernel_check`` contracts it against the field and reports whatever
comes out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

from gmpy2 import mpq

from .polycore import ExactMatrix, MultiPoly, PolyRing, Q, rank_poly, weighted_degree
from .vfield import PICARD_VARS, VectorField, picard_field as _picard_field, picard_ring

__all__ = [
    "PicardPoint",
    "alpha_matrix",
    "alpha_text",
    "homogeneity_report",
    "homogenized_components",
    "kernel_check",
    "picard_discriminant",
    "picard_field",
]

# rows: da, db, dc; columns: alpha_1, alpha_2.  Each entry is (printed factor, polynomial).
_ALPHA_TEXT = (
    (
        ("1", "3*c^2 - 36*c*a^2 + 45*c*a*b - 108*a^3*b + 27*b^3"),
        ("-1/2", "9*c^2*a + 3*c^2*b - 144*c*a^3 + 54*c*a^2*b + 9*c*b^2 + 432*a^5 - 216*a^4*b"
                 " - 108*a^2*b^2 + 54*a*b^3"),
    ),
    (
        ("1", "2*c^2 - 30*c*a^2 + 6*c*b + 72*a^4 - 18*a*b^2"),
        ("-1", "2*c^2*a - 30*c*a^3 + 9*c*a*b + 3*c*b^2 + 72*a^5 - 36*a^3*b - 18*a^2*b^2 + 9*b^3"),
    ),
    (
        ("-1/2", "3*c*a + 3*c*b - 36*a^3 + 9*b^2"),
        ("1/4", "c^2 - 18*c*a^2 + 9*c*a*b + 72*a^4 - 36*a^3*b - 18*a*b^2 + 9*b^3"),
    ),
)


def alpha_text():
    return [["%s*(%s)" % e if e[0] != "1" else e[1] for e in row] for row in _ALPHA_TEXT]


def alpha_matrix(ring: PolyRing = None) -> ExactMatrix:
    """The 3x2 matrix alpha_{j,i} with alpha_i = sum_j alpha_{j,i} d(a,b,c)_j."""
    R = ring or picard_ring()
    return ExactMatrix([[R.parse(body).scale(Q(fac)) for fac, body in row] for row in _ALPHA_TEXT])


def picard_field(ring: PolyRing = None) -> VectorField:
    return _picard_field(ring)


def kernel_check() -> Dict[str, object]:
    """residual_i = sum_j alpha_{j,i} v_j (i = 1, 2) and the rank of alpha over Q(a,b,c)."""
    A = alpha_matrix()
    v = picard_field()
    res: List[MultiPoly] = []
    for i in range(2):
        acc = A[0, i] * v.components[0]
        for j in (1, 2):
            acc = acc + A[j, i] * v.components[j]
        res.append(acc)
    rank = rank_poly(A)
    return {
        "residual1": res[0],
        "residual2": res[1],
        "rank": rank,
        "ok": res[0].is_zero() and res[1].is_zero() and rank == 2,
    }


def homogenized_components():
    """Components of the field with the chart variable s (weight 1) restored.

    On the chart s = 1 the components are not weighted-homogeneous in (a, b, c);
    multiplying each term by the power of s that lifts it to the top degree
    gives polynomials of degrees 5, 6, 7 in (s, a, b, c): the field is
    homogeneous of degree 3 once s is put back.
    """
    R = PolyRing(("s",) + tuple(PICARD_VARS), (1, 2, 3, 4))
    out = []
    for comp in picard_field().components:
        degs = [sum(w * e for w, e in zip((2, 3, 4), exps)) for exps in comp.terms]
        top = max(degs)
        p = R.zero()
        for exps, c in comp.terms.items():
            k = top - sum(w * e for w, e in zip((2, 3, 4), exps))
            p = p + R.monomial((k,) + tuple(exps)).scale(c)
        out.append(p)
    return out


def homogeneity_report():
    plain = []
    for comp in picard_field().components:
        plain.append(weighted_degree(comp))
    return {"chart_components": plain, "homogenized": [weighted_degree(p) for p in homogenized_components()]}


@dataclass(frozen=True)
class PicardPoint:
    s: object
    a: object
    b: object
    c: object

    def __post_init__(self):
        for name in ("s", "a", "b", "c"):
            object.__setattr__(self, name, Q(getattr(self, name)))


def picard_discriminant(p) -> mpq:
    """27(-b^2 + 4a^3 - ca)^2 - c^3; accepts a PicardPoint or an (a, b, c) triple."""
    if isinstance(p, PicardPoint):
        a, b, c = p.a, p.b, p.c
    else:
        a, b, c = (Q(x) for x in p)
    return 27 * (-b * b + 4 * a ** 3 - c * a) ** 2 - c ** 3
