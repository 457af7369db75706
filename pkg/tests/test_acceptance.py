"""One test per acceptance criterion; each prints a single PASS/FAIL line with its timing."""

import cmath
import random
import time

from gmpy2 import mpq

from conftest import ACCEPTANCE_LINES
from mflab.bmat import coefficient_check, cusp_matrix, cusp_rank_report, equation_at_point, isogeny_point, jdet_on_leaf, monomials, relative_check, two_isogeny
from mflab.checks import check_sl2
from mflab.leafnum import (
    b_along_trajectory,
    convergence_factor,
    first_integral,
    leaf_start,
    periods,
    point_from_q,
    rk4_integrate,
)
from mflab.picard import kernel_check
from mflab.polycore import weighted_degree
from mflab.qmod import (
    coset_reps,
    cusp_count,
    cusp_count_bruteforce,
    dedekind_psi,
    eisenstein_basis,
    modeq_residual,
    modular_equation,
    ramanujan_defects,
    tangency_minors,
)
from mflab.vfield import (
    charpoly,
    dup_halphen_target,
    foliation_v,
    halphen_chart,
    halphen_for_join,
    invariance_cofactor,
    linear_part,
    ramanujan,
    ramanujan_chart,
    self_join,
    singular_curve_point,
)


def report(capsys, n, ok, elapsed, limit=None, detail=""):
    within = limit is None or elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    budget = "" if limit is None else " (limit %gs)" % limit
    line = "ACCEPTANCE %d: %s  %.2fs%s  %s" % (n, status, elapsed, budget, detail)
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, detail
    assert within, "took %.1fs, limit %gs" % (elapsed, limit)


def _rational(rng):
    return mpq(rng.randint(-20, 20), rng.randint(1, 9))


def _is_2a3b(n):
    for p in (2, 3):
        while n % p == 0:
            n //= p
    return n == 1


def test_criterion_01_sl2(capsys):
    t0 = time.perf_counter()
    out = check_sl2()
    report(capsys, 1, out["ok"], time.perf_counter() - t0, 1, "[h,e]=2e [h,f]=-2f [e,f]=h")


def test_criterion_02_self_join(capsys):
    t0 = time.perf_counter()
    ok = self_join(ramanujan(), ramanujan_chart()) == foliation_v()
    P = ("a1", "a2", "a3")
    ok &= self_join(halphen_for_join(P, P), halphen_chart(params=P)) == dup_halphen_target(P, P)
    rng = random.Random(14)
    for _ in range(5):
        alpha = tuple(_rational(rng) for _ in range(3))
        ok &= self_join(halphen_for_join(alpha), halphen_chart()) == dup_halphen_target(alpha)
    report(capsys, 2, ok, time.perf_counter() - t0, 10, "Ramanujan -> v; Halphen symbolic + 5 rational alpha")


def test_criterion_03_delta_invariance(capsys):
    t0 = time.perf_counter()
    v = foliation_v()
    x2, x3, y2, y3 = v.ring.gens()
    K1 = invariance_cofactor(v, 27 * x3 * x3 - x2 ** 3)
    K2 = invariance_cofactor(v, 27 * y3 * y3 - y2 ** 3)
    report(capsys, 3, True, time.perf_counter() - t0, 1, "cofactors %s | %s" % (K1.to_text(), K2.to_text()))


def test_criterion_04_singular_curve(capsys):
    t0 = time.perf_counter()
    v = foliation_v()
    rng = random.Random(4)
    ok, n = True, 0
    while n < 20:
        t, s = _rational(rng), _rational(rng)
        if t + s == 0:
            continue
        ok &= all(c == 0 for c in v.evaluate(singular_curve_point(t, s)))
        n += 1
    report(capsys, 4, ok, time.perf_counter() - t0, None, "v = 0 at 20 random rational points")


def test_criterion_05_linear_part(capsys):
    t0 = time.perf_counter()
    v = foliation_v()
    cp = charpoly(linear_part(v, {n: 0 for n in v.variables}))
    lam = cp.ring.var("lam")
    ok = cp == (lam * lam - 5 * lam + 6) * (lam * lam + 5 * lam + 6)
    report(capsys, 5, ok, time.perf_counter() - t0, None, "charpoly %s" % cp.to_text())


def test_criterion_06_ramanujan_system(capsys):
    t0 = time.perf_counter()
    ok = all(dfc.truncate(199).is_zero() for dfc in ramanujan_defects(eisenstein_basis(200)))
    report(capsys, 6, ok, time.perf_counter() - t0, 5, "defects vanish through q^199 at N=200")


def test_criterion_07_tangency(capsys):
    t0 = time.perf_counter()
    ok = all(m.order >= 38 and m.truncate(38).is_zero() for d in (2, 3, 4, 5) for m in tangency_minors(d, 40))
    report(capsys, 7, ok, time.perf_counter() - t0, 60, "6 minors x d=2..5 vanish through q^38")


def test_criterion_08_monomial_counts(capsys):
    t0 = time.perf_counter()
    counts = [len(monomials(d, 2)) for d in (2, 3, 4, 5)]
    report(capsys, 8, counts == [5, 7, 12, 12], time.perf_counter() - t0, None, "m_{d,2} = %s" % counts)


def test_criterion_09_modular_equations(capsys):
    t0 = time.perf_counter()
    ok = True
    for d in (2, 3):
        for i in (1, 2, 3):
            E = modular_equation(d, i)  # raises unless the kernel is one-dimensional
            P = E.poly
            ok &= weighted_degree(P) == i * dedekind_psi(d)
            ok &= P.terms[(dedekind_psi(d), 0, 0)] == 1
            ok &= modeq_residual(P, d, 2 * E.N).is_zero()
            for c in list(P.terms.values()) + list(E.chart_poly.terms.values()):
                ok &= _is_2a3b(int(c.denominator))
    report(capsys, 9, ok, time.perf_counter() - t0, 300, "(d,i) in {2,3}x{1,2,3}")


def test_criterion_10_jdet_on_leaf(capsys):
    t0 = time.perf_counter()
    cases = [(d, i) for d in (2, 3, 4, 5) for i in (1, 2, 3) if len(monomials(d, i)) <= 8]
    ok = True
    for d, i in cases:
        J = jdet_on_leaf(d, i, 52)
        ok &= J.truncate(50).is_zero()
    report(capsys, 10, ok, time.perf_counter() - t0, 600, "J_{d,i} = O(q^51) on the leaf for %s" % cases)


def test_criterion_11_cusp_identity_and_ranks(capsys):
    t0 = time.perf_counter()
    ok = True
    for d in (2, 3):
        for i in (1, 2, 3):
            C = modular_equation(d, i).chart_coefficients
            for a in range(2, d + 1):
                if d % a == 0 and d // a < a:
                    ok &= all(x == 0 for x in cusp_matrix(d, i, a, d // a).apply(C))
    reports = [cusp_rank_report(d) for d in (2, 3, 4, 5)]
    ranks = [r["rank"] for r in reports]
    ok &= ranks == [1, 3, 3, 3]
    others = {k: [r[k] for r in reports] for k in ("rank[y3,leaf]", "rank[x3,leaf]", "rank[x3,swapped]", "raw_B_rank")}
    report(capsys, 11, ok, time.perf_counter() - t0, None, "identity at d=2,3; ranks %s; other readings %s" % (ranks, others))


def test_criterion_12_isogeny_point(capsys):
    t0 = time.perf_counter()
    ok = True
    worst = 0.0
    for i in (1, 2, 3):
        E = modular_equation(2, i)
        p = isogeny_point(two_isogeny(1, 2))
        ok &= equation_at_point(E.chart_poly, p) == 0
        ok &= all(x == 0 for x in coefficient_check(2, i, p, E.chart_coefficients))
        pn = isogeny_point(two_isogeny(1, 2, exact=False))
        worst = max(worst, abs(complex(equation_at_point(E.chart_poly, pn))), relative_check(2, i, pn, E.chart_coefficients))
    ok &= worst <= 1e-8
    report(capsys, 12, ok, time.perf_counter() - t0, None, "exact Q=0 and B.C=0; numeric residual %.1e" % worst)


def test_criterion_13_numerics(capsys):
    t0 = time.perf_counter()
    rng = random.Random(13)
    leg = 0.0
    for _ in range(100):
        while True:
            t = (complex(rng.uniform(-2, 2), rng.uniform(-2, 2)), complex(rng.uniform(-5, 5), rng.uniform(-5, 5)),
                 complex(rng.uniform(-5, 5), rng.uniform(-5, 5)))
            if abs(27 * t[2] ** 2 - t[1] ** 3) > 1e-2:
                break
        leg = max(leg, periods(t).legendre_residual)
    b_err = imag = 0.0
    for d in (1, 2, 3):
        # real q0 give real period matrices; the complex ones exercise the conjugation
        for q0 in (0.005, 0.01, 0.02, 0.01 * cmath.exp(0.7j), 0.02j):
            out = first_integral(*point_from_q(q0, d))
            b_err, imag = max(b_err, abs(out.B - 1)), max(imag, abs(out.imag))
    traj = rk4_integrate(foliation_v(), leaf_start(0.01), 1.0, 1e-3)
    drift = max(abs(b - 1) for b in b_along_trajectory(traj))
    fac = convergence_factor(foliation_v(), leaf_start(0.01), 1.0, 0.02)
    ok = leg <= 1e-9 and b_err <= 1e-6 and imag <= 1e-9 and drift <= 1e-5 and 12 <= fac <= 20 and not traj.blew_up
    report(capsys, 13, ok, time.perf_counter() - t0, 120,
           "legendre %.1e, |B-1| %.1e, Im B %.1e, drift %.1e, RK4 factor %.2f" % (leg, b_err, imag, drift, fac))


def test_criterion_14_picard(capsys):
    t0 = time.perf_counter()
    out = kernel_check()
    ok = out["residual1"].is_zero() and out["residual2"].is_zero() and out["rank"] == 2
    report(capsys, 14, ok, time.perf_counter() - t0, 5, "residuals 0, 0; rank %d" % out["rank"])


def test_criterion_15_arithmetic(capsys):
    t0 = time.perf_counter()
    ok = all(len(coset_reps(d)) == dedekind_psi(d) and cusp_count(d) == cusp_count_bruteforce(d) for d in range(1, 51))
    report(capsys, 15, ok, time.perf_counter() - t0, 10, "d = 1..50")
