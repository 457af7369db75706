"""Invariant suites behind ``mflab verify``; each returns a JSON-ready dict with an ``ok`` flag."""

from __future__ import annotations

from typing import Dict

from .polycore import PolyRing
from .vfield import (
    FieldError,
    charpoly,
    foliation_v,
    invariance_cofactor,
    lie_bracket,
    linear_part,
    sl2_triple,
)

ALL = ["sl2", "delta", "linearpart", "tangency", "picard"]


def check_sl2() -> Dict[str, object]:
    F = sl2_triple()
    f, e, h = F["f"], F["e"], F["h"]
    rel = {
        "[h,e]": ("2e", lie_bracket(h, e) == e.scale(2)),
        "[h,f]": ("-2f", lie_bracket(h, f) == f.scale(-2)),
        "[e,f]": ("h", lie_bracket(e, f) == h),
    }
    out = {k: v[0] for k, v in rel.items()}
    out["holds"] = {k: v[1] for k, v in rel.items()}
    out["ok"] = all(v[1] for v in rel.values())
    return out


def delta_components():
    v = foliation_v()
    R = v.ring
    x2, x3, y2, y3 = (R.var(n) for n in v.variables)
    return 27 * x3 * x3 - x2 ** 3, 27 * y3 * y3 - y2 ** 3


def check_delta() -> Dict[str, object]:
    v = foliation_v()
    out = {"ok": True, "components": []}
    for P in delta_components():
        entry = {"P": P.to_text()}
        try:
            entry["cofactor"] = invariance_cofactor(v, P).to_text()
        except FieldError as exc:
            entry["error"] = str(exc)
            out["ok"] = False
        out["components"].append(entry)
    return out


def expected_linear_charpoly():
    R = PolyRing(["lam"])
    lam = R.var("lam")
    return (lam * lam - 5 * lam + 6) * (lam * lam + 5 * lam + 6)


def check_linearpart() -> Dict[str, object]:
    v = foliation_v()
    J = linear_part(v, {n: 0 for n in v.variables})
    cp = charpoly(J)
    exp = expected_linear_charpoly()
    return {"matrix": J.to_json(), "charpoly": cp.to_text(), "expected": exp.to_text(), "ok": cp == exp}


def check_tangency(ds=(2, 3, 4, 5), N: int = 40) -> Dict[str, object]:
    from .qmod import tangency_minors

    out = {"N": N, "through": N - 2, "ok": True, "d": {}}
    for d in ds:
        minors = tangency_minors(d, N)
        vals = [m.valuation() for m in minors]
        good = all(x is None for x in vals)
        out["d"][str(d)] = {"ok": good, "first_nonzero": vals}
        out["ok"] = out["ok"] and good
    return out


def check_picard() -> Dict[str, object]:
    from .picard import homogeneity_report, kernel_check

    r = kernel_check()
    return {
        "residual1": r["residual1"].to_text(),
        "residual2": r["residual2"].to_text(),
        "rank": r["rank"],
        "homogeneity": homogeneity_report(),
        "ok": r["ok"],
    }


SUITES = {
    "sl2": check_sl2,
    "delta": check_delta,
    "linearpart": check_linearpart,
    "tangency": check_tangency,
    "picard": check_picard,
}


def run(name: str) -> Dict[str, object]:
    return SUITES[name]()
