"""Command-line front end: ``mflab <command> ...`` prints JSON.

Exit status is 0 on success, 1 when a verification fails and 2 on a usage error.
Expensive exact results are cached under ``<cachedir>/<command>/<sha256>.json``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from typing import Callable, Dict, List, Optional, Sequence

from . import __version__
from .polycore import Q, fmt_rational

SCHEMA_VERSION = 1
TERMS_ENV = "MFLAB_TERMS"
CACHE_ENV = "MFLAB_CACHE_DIR"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# cache


class ResultCache:
    """Content-addressed JSON store; writes go through a temp file and os.replace."""

    def __init__(self, root: str, enabled: bool = True, warn: Callable[[str], None] = None):
        self.root = root
        self.enabled = enabled
        self.warn = warn or (lambda msg: print("mflab: warning: " + msg, file=sys.stderr))

    @staticmethod
    def key(command: str, params: Dict[str, object]) -> str:
        blob = json.dumps({"command": command, "params": params, "version": __version__}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def path(self, command: str, key: str) -> str:
        return os.path.join(self.root, command, key + ".json")

    def get(self, command: str, params: Dict[str, object]):
        if not self.enabled:
            return None
        path = self.path(command, self.key(command, params))
        if not os.path.exists(path):
            return None
        try:
            with open(path) as fh:
                stored = json.load(fh)
            if stored.get("params") != params or "result" not in stored:
                raise ValueError("key mismatch")
            return stored["result"]
        except (OSError, ValueError) as exc:
            self.warn("corrupted cache entry %s (%s); recomputing" % (path, exc))
            return None

    def put(self, command: str, params: Dict[str, object], result) -> Optional[str]:
        if not self.enabled:
            return None
        path = self.path(command, self.key(command, params))
        folder = os.path.dirname(path)
        try:
            os.makedirs(folder, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=folder, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                json.dump({"params": params, "result": result, "version": __version__}, fh, sort_keys=True)
            os.replace(tmp, path)
        except OSError as exc:
            self.warn("cache write failed for %s: %s" % (path, exc))
            return None
        return path


def default_cache_dir() -> str:
    return os.environ.get(CACHE_ENV) or os.path.join(os.path.expanduser("~"), ".cache", "mflab")


# ---------------------------------------------------------------------------
# parsing helpers


def _rational(text: str):
    try:
        return Q(text)
    except (ValueError, TypeError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("not a rational number: %r" % text)


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError("not a complex number: %r" % text)


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("not an integer: %r" % text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1: %r" % text)
    return n


def _cplx_json(z) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def _terms(args, fallback: Optional[int]) -> Optional[int]:
    """--terms beats MFLAB_TERMS, which beats the built-in default."""
    if getattr(args, "terms", None) is not None:
        return args.terms
    env = os.environ.get(TERMS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError("%s must be an integer, got %r" % (TERMS_ENV, env))
        if n < 1:
            raise UsageError("%s must be positive" % TERMS_ENV)
        return n
    return fallback


def _check_i(i: int):
    if i not in (1, 2, 3):
        raise UsageError("i must be 1, 2 or 3")


def _tolerances(args):
    from .leafnum import DEFAULT_TOL, Tolerances

    tol = getattr(args, "tol", None)
    if tol is None:
        return DEFAULT_TOL
    if tol <= 0:
        raise UsageError("--tol must be positive")
    return Tolerances(legendre=tol, imag_part=tol, basis_invariance=tol)


# ---------------------------------------------------------------------------
# commands; each returns (payload, ok)


def cmd_psi(args, cache):
    from .qmod import dedekind_psi

    return {"d": args.d, "psi": dedekind_psi(args.d)}, True


def cmd_cusps(args, cache):
    from .qmod import cusp_count, cusp_count_bruteforce

    n = cusp_count(args.d)
    out = {"d": args.d, "cusps": n}
    if args.check:
        b = cusp_count_bruteforce(args.d)
        out["bruteforce"] = b
        return out, b == n
    return out, True


def cmd_cosets(args, cache):
    from .qmod import coset_reps, dedekind_psi

    reps = coset_reps(args.d)
    psi = dedekind_psi(args.d)
    return {"d": args.d, "count": len(reps), "psi": psi, "reps": [list(r) for r in reps]}, len(reps) == psi


def cmd_monomials(args, cache):
    from .bmat import monomial_count_recount, monomials

    _check_i(args.i)
    B = monomials(args.d, args.i)
    return {
        "d": args.d,
        "i": args.i,
        "m": B.size,
        "recount": monomial_count_recount(args.d, args.i),
        "monomials": B.labels(),
        "exponents": [list(e) for e in B.exponents],
    }, True


def _cached(cache, meta, command, params, compute):
    hit = cache.get(command, params)
    if hit is not None:
        meta["cache"] = "hit"
        return hit
    meta["cache"] = "miss" if cache.enabled else "disabled"
    result = compute()
    cache.put(command, params, result)
    return result


def cmd_bmatrix(args, cache, meta):
    from .bmat import bmatrix

    _check_i(args.i)

    def compute():
        B = bmatrix(args.d, args.i)
        return {"d": args.d, "i": args.i, "m": B.m, "monomials": B.basis.labels(), "matrix": B.matrix.to_json()}

    return _cached(cache, meta, "bmatrix", {"d": args.d, "i": args.i}, compute), True


def cmd_jdet(args, cache, meta):
    from .bmat import BMatrixError, jdet, jdet_on_leaf, monomials

    _check_i(args.i)
    if args.on_leaf:
        N = _terms(args, 52)
        params = {"d": args.d, "i": args.i, "N": N, "on_leaf": True}

        def compute():
            s = jdet_on_leaf(args.d, args.i, N)
            order = N - 2
            first = s.truncate(order).valuation()
            return {
                "d": args.d,
                "i": args.i,
                "m": monomials(args.d, args.i).size,
                "N": N,
                "checked_through": order,
                "vanishes": first is None,
                "first_nonzero": first,
            }

        res = _cached(cache, meta, "jdet", params, compute)
        return res, res["vanishes"]
    params = {"d": args.d, "i": args.i, "size_cap": args.size_cap}

    def compute_sym():
        try:
            J = jdet(args.d, args.i, size_cap=args.size_cap)
        except BMatrixError as exc:
            raise UsageError(str(exc))
        return {"d": args.d, "i": args.i, "terms": len(J.terms), "polynomial": J.to_text()}

    return _cached(cache, meta, "jdet", params, compute_sym), True


def _modeq_json(d, i, N, cache, meta):
    from .qmod import default_terms, modular_equation

    N = default_terms(d, i) if N is None else N
    return _cached(cache, meta, "modeq", {"d": d, "i": i, "N": N}, lambda: modular_equation(d, i, N).to_json())


def cmd_modeq(args, cache, meta):
    _check_i(args.i)
    if args.d < 2:
        raise UsageError("modeq needs d >= 2")
    return _modeq_json(args.d, args.i, _terms(args, None), cache, meta), True


def cmd_residual(args, cache, meta):
    from .qmod import modeq_residual, modeq_ring

    _check_i(args.i)
    if args.d < 2:
        raise UsageError("residual needs d >= 2")
    eq = _modeq_json(args.d, args.i, _terms(args, None), cache, meta)
    poly = modeq_ring(args.i).parse(eq["polynomial"])
    order = args.order or 2 * eq["N"]
    res = modeq_residual(poly, args.d, order)
    first = res.valuation()
    return {"d": args.d, "i": args.i, "order": order, "zero": first is None, "first_nonzero": first}, first is None


def cmd_selfjoin(args, cache):
    from .vfield import (
        dup_halphen_target,
        halphen_chart,
        halphen_for_join,
        ramanujan,
        ramanujan_chart,
        foliation_v,
        self_join,
    )

    if args.field == "ramanujan":
        W = self_join(ramanujan(), ramanujan_chart())
        target = foliation_v()
    else:
        if args.alpha is None:
            params = ("a1", "a2", "a3")
            alpha = params
        else:
            params = ()
            alpha = tuple(args.alpha)
        W = self_join(halphen_for_join(alpha, params), halphen_chart(params=params, y2_numerator=args.y2_numerator))
        target = dup_halphen_target(alpha, params)
    out = {
        "field": args.field,
        "variables": list(W.variables),
        "components": [c.to_text() for c in W.components],
        "matches_reference": W == target,
    }
    if args.field == "halphen":
        out["alpha"] = ["a1", "a2", "a3"] if args.alpha is None else [fmt_rational(a) for a in args.alpha]
        out["y2_numerator"] = args.y2_numerator
    return out, out["matches_reference"]


def cmd_cusp_matrix(args, cache, meta):
    from .bmat import BMatrixError, cusp_matrix, cusp_rank_report
    from .polycore import rank_rational

    _check_i(args.i)
    if args.report:
        return cusp_rank_report(args.d, args.i), True
    try:
        M = cusp_matrix(args.d, args.i, args.a, args.b, args.fourth, args.point)
    except BMatrixError as exc:
        raise UsageError(str(exc))
    out = {
        "d": args.d,
        "i": args.i,
        "a": args.a,
        "b": args.b,
        "fourth": args.fourth,
        "point": args.point,
        "matrix": M.to_json(),
        "rank": rank_rational(M),
    }
    if args.d >= 2:
        eq = _modeq_json(args.d, args.i, _terms(args, None), cache, meta)
        C = [Q(c) for c in eq["chart_coefficients"]]
        out["annihilates_C"] = all(x == 0 for x in M.apply(C))
    return out, out.get("annihilates_C", True)


def cmd_isogeny_point(args, cache, meta):
    from .bmat import (
        BMatrixError,
        IsogenyInput,
        coefficient_check,
        equation_at_point,
        isogeny_point,
        point_to_json,
        relative_check,
        two_isogeny,
    )
    from .qmod import modeq_ring

    exact = args.mode == "exact"
    try:
        if args.two_isogeny:
            inp = two_isogeny(args.two_isogeny[0], args.two_isogeny[1], exact)
        else:
            if not args.values or len(args.values) != 6:
                raise UsageError("isogeny-point needs T2 T3 S2 S3 K KP or --two-isogeny X0 A")
            vals = list(args.values) if exact else [float(v) for v in args.values]
            inp = IsogenyInput(*vals)
        p = isogeny_point(inp)
    except BMatrixError as exc:
        raise UsageError(str(exc))
    out = point_to_json(p, args.mode)
    ok = True
    if args.check:
        d = args.check
        checks = []
        for i in (1, 2, 3):
            eq = _modeq_json(d, i, None, cache, meta)
            poly = modeq_ring(i).parse(eq["chart_polynomial"])
            C = [Q(c) for c in eq["chart_coefficients"]]
            val = equation_at_point(poly, p)
            if exact:
                bc = coefficient_check(d, i, p, C)
                good = val == 0 and all(x == 0 for x in bc)
                checks.append({"i": i, "Q": fmt_rational(val), "BC_zero": all(x == 0 for x in bc), "ok": good})
            else:
                rel = relative_check(d, i, p, C)
                good = abs(complex(val)) <= args.tol_point and rel <= args.tol_point
                checks.append({"i": i, "Q": _cplx_json(val), "BC_relative": rel, "ok": good})
            ok = ok and good
        out["checks"] = checks
    return out, ok


def cmd_periods(args, cache):
    from .leafnum import LeafNumError, periods, perdomain_sign

    tol = _tolerances(args)
    try:
        P = periods(args.t, tol)
    except LeafNumError as exc:
        raise UsageError(str(exc))
    out = P.to_json()
    out["tau"] = _cplx_json(P.tau)
    out["det"] = _cplx_json(P.det)
    out["perdomain_im"] = perdomain_sign(P)
    return out, P.legendre_residual <= tol.legendre


def cmd_first_integral(args, cache):
    from .leafnum import LeafNumError, first_integral, point_from_q

    tol = _tolerances(args)
    try:
        if args.q0 is not None:
            t, s = point_from_q(args.q0, args.d, tol=tol)
        else:
            if not (args.t and args.s):
                raise UsageError("first-integral needs --t and --s, or --q0")
            t, s = args.t, args.s
        fi = first_integral(t, s, tol)
    except LeafNumError as exc:
        raise UsageError(str(exc))
    out = fi.to_json()
    out["t"] = [_cplx_json(z) for z in t]
    out["s"] = [_cplx_json(z) for z in s]
    ok = abs(fi.imag) <= tol.imag_part
    if args.q0 is not None:
        out["expected"] = 1.0
        ok = ok and abs(fi.B - 1) <= tol.b_on_isogeny
    return out, ok


def _named_field(name: str, alpha):
    from .vfield import builtin_fields, halphen

    fields = builtin_fields()
    if name == "halphen":
        return halphen(alpha or (0, 0, 0))
    if name not in fields:
        raise UsageError("unknown field %r (choose from %s)" % (name, ", ".join(sorted(fields))))
    return fields[name]


def cmd_integrate(args, cache):
    from .leafnum import LeafNumError, b_along_trajectory, leaf_start, rk4_integrate

    V = _named_field(args.field, args.alpha)
    if args.leaf_q0 is not None:
        if args.field != "v":
            raise UsageError("--leaf-q0 starts on a leaf of v")
        start = leaf_start(args.leaf_q0, args.leaf_d)
    else:
        start = args.start
        if not start or len(start) != len(V.variables):
            raise UsageError("field %s needs %d start coordinates" % (args.field, len(V.variables)))
    try:
        tr = rk4_integrate(V, start, args.time, args.step, samples=args.samples)
    except LeafNumError as exc:
        raise UsageError(str(exc))
    out = tr.to_json()
    out["field"] = args.field
    out["variables"] = list(V.variables)
    ok = not tr.blew_up
    if args.track_b:
        if args.field != "v":
            raise UsageError("--track-B needs the field v")
        tol = _tolerances(args)
        bs = b_along_trajectory(tr, tol)
        out["B"] = bs
        out["B_drift"] = max(abs(b - bs[0]) for b in bs)
        ok = ok and out["B_drift"] <= tol.leaf_drift
    return out, ok


def cmd_verify(args, cache):
    from . import checks

    names = checks.ALL if args.target == "all" else [args.target]
    report = {}
    ok = True
    for name in names:
        r = checks.run(name)
        report[name] = r
        ok = ok and r["ok"]
    return {"target": args.target, "ok": ok, "checks": report}, ok


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mflab",
        description="Exact computations on the modular foliation: fields, B matrices, modular equations, periods.",
        epilog="Environment: %s sets the default q-series precision (flags win); %s sets the cache directory."
        % (TERMS_ENV, CACHE_ENV),
    )
    p.add_argument("--version", action="version", version="mflab " + __version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--cache-dir", default=None, help="cache root (default $%s or ~/.cache/mflab)" % CACHE_ENV)
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, description=help_text, parents=[common])

    s = add("psi", "Dedekind psi(d)")
    s.add_argument("d", type=_positive_int)
    s = add("cusps", "number of cusps of X0(d)")
    s.add_argument("d", type=_positive_int)
    s.add_argument("--check", action="store_true", help="compare against brute-force orbit enumeration")
    s = add("cosets", "coset representatives (a, b, c) of Gamma A_d Gamma")
    s.add_argument("d", type=_positive_int)
    for name, text in (("monomials", "degree-matched monomials of B_{d,i}"), ("bmatrix", "the matrix B_{d,i}")):
        s = add(name, text)
        s.add_argument("d", type=_positive_int)
        s.add_argument("i", type=int)
    s = add("jdet", "J_{d,i} = det B_{d,i}, symbolic or on the leaf S0(d)")
    s.add_argument("d", type=_positive_int)
    s.add_argument("i", type=int)
    s.add_argument("--size-cap", type=int, default=8, help="largest m for a symbolic determinant (default 8)")
    s.add_argument("--on-leaf", action="store_true", help="evaluate on the q-expansion of S0(d) instead")
    s.add_argument("--terms", type=_positive_int, help="q-series precision")
    for name, text in (("modeq", "modular equation Q_{d,i}"), ("residual", "Q_{d,i} on the modular forms at higher order")):
        s = add(name, text)
        s.add_argument("d", type=_positive_int)
        s.add_argument("i", type=int)
        s.add_argument("--terms", type=_positive_int, help="q-series precision used to solve")
        if name == "residual":
            s.add_argument("--order", type=_positive_int, help="check order (default twice the solve precision)")
    s = add("selfjoin", "self-join of the Ramanujan or Halphen field")
    s.add_argument("field", choices=("ramanujan", "halphen"))
    s.add_argument("--alpha", nargs=3, type=_rational, metavar=("A1", "A2", "A3"), help="numeric Halphen exponents (default symbolic)")
    s.add_argument("--y2-numerator", choices=("s3-s1", "s3-s2"), default="s3-s1")
    s = add("cusp-matrix", "first-order cusp combination of partial derivatives of B_{d,i}")
    s.add_argument("d", type=_positive_int)
    s.add_argument("i", type=int)
    s.add_argument("a", type=_positive_int, nargs="?")
    s.add_argument("b", type=_positive_int, nargs="?")
    s.add_argument("--fourth", choices=("y3", "x3"), default="y3")
    s.add_argument("--point", choices=("leaf", "swapped"), default="leaf")
    s.add_argument("--report", action="store_true", help="rank report for (a, b) = (d, 1) under every reading")
    s.add_argument("--terms", type=_positive_int)
    s = add("isogeny-point", "point of S0(d) from isogeny data (t, s, k, k')")
    s.add_argument("values", nargs="*", type=_rational, metavar="T2 T3 S2 S3 K KP")
    s.add_argument("--two-isogeny", nargs=2, type=_rational, metavar=("X0", "A"), help="use the 2-isogeny with kernel (X0, 0) on y^2=4x^3+... (oracle)")
    s.add_argument("--mode", choices=("exact", "numeric"), default="exact")
    s.add_argument("--check", type=_positive_int, metavar="D", help="evaluate Q_{D,i} and B_{D,i} C_{D,i} there")
    s.add_argument("--tol-point", type=float, default=1e-8)
    s = add("periods", "period matrix of y^2 = 4(x-t1)^3 - t2(x-t1) - t3")
    s.add_argument("t", nargs=3, type=_complex, metavar=("T1", "T2", "T3"))
    s.add_argument("--tol", type=float)
    s = add("first-integral", "the real first integral B at a pair (t, s)")
    s.add_argument("--t", nargs=3, type=_complex, metavar=("T1", "T2", "T3"))
    s.add_argument("--s", nargs=3, type=_complex, metavar=("S1", "S2", "S3"))
    s.add_argument("--q0", type=_complex, help="use the isogenous pair at q0 instead")
    s.add_argument("--d", type=_positive_int, default=2)
    s.add_argument("--tol", type=float)
    s = add("integrate", "RK4 trajectory of a built-in field")
    s.add_argument("field")
    s.add_argument("start", nargs="*", type=_complex)
    s.add_argument("--time", type=float, default=1.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--samples", type=_positive_int, default=10)
    s.add_argument("--alpha", nargs=3, type=_rational)
    s.add_argument("--leaf-q0", type=_complex, help="start on S0(d) at this q (field v only)")
    s.add_argument("--leaf-d", type=_positive_int, default=2)
    s.add_argument("--track-B", dest="track_b", action="store_true", help="evaluate B along the lifted trajectory")
    s.add_argument("--tol", type=float)
    s = add("verify", "run an invariant suite")
    s.add_argument("target", choices=("tangency", "delta", "sl2", "linearpart", "picard", "all"))
    return p


PLAIN = {
    "psi": cmd_psi,
    "cusps": cmd_cusps,
    "cosets": cmd_cosets,
    "monomials": cmd_monomials,
    "selfjoin": cmd_selfjoin,
    "periods": cmd_periods,
    "first-integral": cmd_first_integral,
    "integrate": cmd_integrate,
    "verify": cmd_verify,
}
CACHED = {
    "bmatrix": cmd_bmatrix,
    "jdet": cmd_jdet,
    "modeq": cmd_modeq,
    "residual": cmd_residual,
    "cusp-matrix": cmd_cusp_matrix,
    "isogeny-point": cmd_isogeny_point,
}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    cache = ResultCache(args.cache_dir or default_cache_dir(), enabled=not args.no_cache)
    try:
        if args.command in CACHED:
            meta: Dict[str, object] = {}
            payload, ok = CACHED[args.command](args, cache, meta)
            if meta:
                payload = dict(payload)
                payload["meta"] = dict(meta, schema=SCHEMA_VERSION)
        else:
            payload, ok = PLAIN[args.command](args, cache)
    except UsageError as exc:
        print("mflab %s: error: %s" % (args.command, exc), file=sys.stderr)
        return 2
    text = dumps(payload)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print("mflab: cannot write %s: %s" % (args.out, exc), file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
