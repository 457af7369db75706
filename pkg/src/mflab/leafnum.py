"""Floating-point side: elliptic periods, the map F = pm(s) pm(t)^-1, the real first integral B,
points of the isogeny locus built from q-expansions, and RK4 integration of polynomial fields.

Curves are E_t : y^2 = 4(x - t1)^3 - t2 (x - t1) - t3.  After u = x - t1 this is
y^2 = 4u^3 - t2 u - t3, and the integral of x dx/y over a cycle equals the
integral of u du/y plus t1 times the period of du/y.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .qmod import eisenstein_basis
from .vfield import VectorField

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold used by this module, in one place."""

    legendre: float = 1e-9
    imag_part: float = 1e-9
    identity: float = 1e-8
    b_on_isogeny: float = 1e-6
    basis_invariance: float = 1e-9
    leaf_drift: float = 1e-5
    series_tail: float = 1e-14
    q0_max: float = 0.05
    quad_rel: float = 1e-15
    quad_max_nodes: int = 4096
    blowup: float = 1e12
    convergence_factor: Tuple[float, float] = (12.0, 20.0)


DEFAULT_TOL = Tolerances()


class LeafNumError(ValueError):
    pass


def _cpoint(coords, n: int) -> Tuple[complex, ...]:
    c = tuple(complex(x) for x in coords)
    if len(c) != n:
        raise LeafNumError("expected %d coordinates, got %d" % (n, len(c)))
    for x in c:
        if not (math.isfinite(x.real) and math.isfinite(x.imag)):
            raise LeafNumError("non-finite coordinate")
    return c


def discriminant(t) -> complex:
    _, t2, t3 = _cpoint(t, 3)
    return 27 * t3 * t3 - t2 ** 3


# ---------------------------------------------------------------------------
# periods


@dataclass
class PeriodMatrix:
    """Rows are the cycles (delta, gamma), columns the integrals of dx/y and x dx/y."""

    entries: np.ndarray
    legendre_residual: float
    nodes: int = 0

    @property
    def det(self) -> complex:
        m = self.entries
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    @property
    def tau(self) -> complex:
        """omega_gamma / omega_delta."""
        return complex(self.entries[1, 0] / self.entries[0, 0])

    def transformed(self, A) -> "PeriodMatrix":
        """Change of cycle basis by an integer matrix A (rows recombine)."""
        A = np.asarray(A, dtype=float)
        return PeriodMatrix(A @ self.entries, self.legendre_residual, self.nodes)

    def to_json(self):
        return {
            "entries": [[[complex(z).real, complex(z).imag] for z in row] for row in self.entries],
            "legendre_residual": self.legendre_residual,
        }


def _cubic_roots(t2: complex, t3: complex) -> List[complex]:
    return [complex(r) for r in np.roots([4.0, 0.0, -t2, -t3])]


def _polish(r: complex, t2: complex, t3: complex) -> complex:
    for _ in range(3):
        f = 4 * r ** 3 - t2 * r - t3
        df = 12 * r * r - t2
        if df == 0:
            break
        r = r - f / df
    return r


_GL_CACHE: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = ((x + 1) * (math.pi / 2), w * (math.pi / 2))
    return _GL_CACHE[n]


def _edge_integrals(ei: complex, ej: complex, ek: complex, tol: Tolerances):
    """(int du/y, int u du/y) from ei to ej along the straight segment.

    With u = ei + (ej - ei)(1 - cos th)/2 the square-root singularities at both
    ends cancel and du/y = -i/2 dth / sqrt(u - ek).  Writing
    u - ek = (ei - ek) w, w runs along the segment from 1 to (ej - ek)/(ei - ek)
    and never meets the branch cut of the principal root, because ek is not on
    the segment.
    """
    base = cmath.sqrt(ei - ek)
    z = (ej - ek) / (ei - ek)
    prev = None
    n = 32
    while True:
        th, wts = _gauss_legendre(n)
        s = (1 - np.cos(th)) / 2
        w = 1 + (z - 1) * s
        f = 1 / np.sqrt(w.astype(complex))
        u = ei + (ej - ei) * s
        I0 = complex(np.sum(wts * f))
        I1 = complex(np.sum(wts * f * u))
        cur = (I0, I1)
        if prev is not None:
            err = max(abs(cur[0] - prev[0]) / max(abs(cur[0]), 1e-300), abs(cur[1] - prev[1]) / max(abs(cur[1]), abs(cur[0]), 1e-300))
            if err <= tol.quad_rel * 100 or n >= tol.quad_max_nodes:
                break
        prev = cur
        n *= 2
    k = -0.5j / base
    return k * cur[0], k * cur[1], n


def periods(t, tol: Tolerances = DEFAULT_TOL) -> PeriodMatrix:
    """Period matrix of E_t on a symplectic basis, oriented so that the Legendre
    determinant omega_delta * X_gamma - X_delta * omega_gamma equals +2 pi i."""
    t1, t2, t3 = _cpoint(t, 3)
    delta = 27 * t3 * t3 - t2 ** 3
    scale = max(abs(t2) ** 3, abs(t3) ** 2, 1e-300)
    if abs(delta) <= 1e-13 * scale:
        raise LeafNumError("degenerate curve: 27 t3^2 - t2^3 = 0")
    roots = [_polish(r, t2, t3) for r in _cubic_roots(t2, t3)]
    # cycles around the two shorter edges; they share a vertex and form a basis
    edges = [(0, 1, 2), (1, 2, 0), (0, 2, 1)]
    edges.sort(key=lambda e: abs(roots[e[0]] - roots[e[1]]))
    rows = []
    nodes = 0
    for i, j, k in edges[:2]:
        w0, w1, n = _edge_integrals(roots[i], roots[j], roots[k], tol)
        nodes = max(nodes, n)
        om = 2 * w0
        rows.append([om, 2 * w1 + t1 * om])
    M = np.array(rows, dtype=complex)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det + TWO_PI_I) < abs(det - TWO_PI_I):
        M = M[::-1].copy()
        det = -det
    return PeriodMatrix(M, float(abs(det - TWO_PI_I)), nodes)


def perdomain_sign(P: PeriodMatrix) -> float:
    """Im(x1 * conj(x3)) for the period matrix read as [[x1, x2], [x3, x4]]."""
    return float((P.entries[0, 0] * np.conj(P.entries[1, 0])).imag)


# ---------------------------------------------------------------------------
# F and B


def transcendental_F(t, s, tol: Tolerances = DEFAULT_TOL, A_t=None, A_s=None) -> np.ndarray:
    """pm(s) pm(t)^-1 from raw period matrices; optional integer basis changes on either side."""
    Pt, Ps = periods(t, tol), periods(s, tol)
    if A_t is not None:
        Pt = Pt.transformed(A_t)
    if A_s is not None:
        Ps = Ps.transformed(A_s)
    return Ps.entries @ np.linalg.inv(Pt.entries)


@dataclass
class FirstIntegral:
    B: float
    imag: float
    F: np.ndarray = field(repr=False)

    def to_json(self):
        return {"B": self.B, "imag": self.imag, "F": [[[z.real, z.imag] for z in row] for row in self.F.tolist()]}


def first_integral(t, s, tol: Tolerances = DEFAULT_TOL, A_t=None, A_s=None) -> FirstIntegral:
    F = transcendental_F(t, s, tol, A_t, A_s)
    M = F @ np.linalg.inv(np.conj(F))
    tr = complex(np.trace(M)) / 2
    return FirstIntegral(tr.real, tr.imag, F)


def first_integral_B(t, s, tol: Tolerances = DEFAULT_TOL) -> float:
    """B = Tr(F conj(F)^-1) / 2; the imaginary part is available from ``first_integral``."""
    return first_integral(t, s, tol).B


# ---------------------------------------------------------------------------
# points of the isogeny locus


def series_tail_bound(q0: float, N: int) -> float:
    """Bound for the omitted terms of g1, g2, g3 beyond q^N.

    Coefficients are at most 2 sigma_{k-1}(n) |E_k coefficient| / normalization,
    and sigma_{k-1}(n) <= zeta(k-1) n^(k-1) <= 2 n^(k-1) for k = 4, 6; for k = 2
    sigma_1(n) <= n(1 + log n).  The weight 6 term dominates: 504/216 * 2 n^5.
    """
    q0 = abs(q0)
    total = 0.0
    n = N
    while True:
        term = max(24 / 12 * n * (1 + math.log(n)), 240 / 12 * 2 * n ** 3, 504 / 216 * 2 * n ** 5) * q0 ** n
        total += term
        if term < 1e-30 * max(total, 1e-300) or n > N + 5000:
            break
        n += 1
    return total


def _g_values(q0: float, N: int):
    b = eisenstein_basis(N)
    return tuple(s.evaluate(q0) for s in b.as_tuple())


def point_from_q(q0: float, d: int, N: int = 80, tol: Tolerances = DEFAULT_TOL):
    """t = (g1, g2, g3)(q0), s = (d g1, d^2 g2, d^3 g3)(q0^d).

    q0 may be complex; only 0 < |q0| <= q0_max is required.
    """
    if d < 1:
        raise LeafNumError("d must be >= 1")
    if not (0 < abs(q0) <= tol.q0_max):
        raise LeafNumError("q0 too large for tail bound: need 0 < |q0| <= %g" % tol.q0_max)
    if series_tail_bound(q0, N) > tol.series_tail:
        raise LeafNumError("q0 too large for tail bound with %d terms" % N)
    g = _g_values(q0, N)
    h = _g_values(q0 ** d, N)
    t = tuple(complex(x) for x in g)
    s = (complex(d * h[0]), complex(d ** 2 * h[1]), complex(d ** 3 * h[2]))
    return t, s


def chart_from_pair(t, s) -> Tuple[complex, complex, complex, complex]:
    """(x2, x3, y2, y3) = (t2, t3, s2, -s3) / (t1 - s1)^(2, 3, 2, 3)."""
    t1, t2, t3 = _cpoint(t, 3)
    s1, s2, s3 = _cpoint(s, 3)
    mu = t1 - s1
    if mu == 0:
        raise LeafNumError("chart at infinity: t1 = s1")
    return (t2 / mu ** 2, t3 / mu ** 3, s2 / mu ** 2, -s3 / mu ** 3)


def lift_chart(p):
    """Slice t1 = 1, s1 = 0 over a chart point."""
    x2, x3, y2, y3 = _cpoint(p, 4)
    return (1 + 0j, x2, x3), (0j, y2, -y3)


# ---------------------------------------------------------------------------
# RK4


def compile_field(V: VectorField, params: Optional[Dict[str, complex]] = None):
    """Float evaluator for V; ring variables outside V.variables are fixed by ``params``."""
    names = V.ring.names
    params = dict(params or {})
    pos = {v: k for k, v in enumerate(V.variables)}
    for nm in names:
        if nm not in pos and nm not in params:
            raise LeafNumError("parameter %r needs a value" % nm)
    compiled = []
    for comp in V.components:
        terms = []
        for exps, c in comp.terms.items():
            coeff = complex(float(c))
            idx = []
            for nm, e in zip(names, exps):
                if not e:
                    continue
                if nm in pos:
                    idx.append((pos[nm], e))
                else:
                    coeff *= complex(params[nm]) ** e
            terms.append((coeff, tuple(idx)))
        compiled.append(terms)

    def f(x):
        out = []
        for terms in compiled:
            acc = 0j
            for coeff, idx in terms:
                m = coeff
                for k, e in idx:
                    m *= x[k] ** e if e > 1 else x[k]
                acc += m
            out.append(acc)
        return out

    return f


@dataclass
class Trajectory:
    times: List[float]
    points: List[Tuple[complex, ...]]
    blew_up: bool = False

    def to_json(self):
        return {
            "blew_up": self.blew_up,
            "times": self.times,
            "points": [[[z.real, z.imag] for z in p] for p in self.points],
        }


def rk4_integrate(
    V: VectorField,
    start,
    T: float,
    h: float,
    samples: Optional[int] = None,
    params: Optional[Dict[str, complex]] = None,
    tol: Tolerances = DEFAULT_TOL,
) -> Trajectory:
    """Classical RK4 for dx/dtime = V(x) from ``start`` over [0, T].

    Returns every ``samples``-th point (all when None) plus the endpoint; stops
    early and sets ``blew_up`` if a coordinate leaves the finite range.
    """
    if h <= 0:
        raise LeafNumError("step h must be positive")
    f = compile_field(V, params)
    n = len(V.variables)
    x = list(_cpoint(start, n))
    steps = int(math.floor(T / h + 1e-9))
    sizes = [h] * steps
    if T - steps * h > 1e-12 * h:
        sizes.append(T - steps * h)
    stride = max(1, len(sizes) // samples) if samples else 1
    traj = Trajectory([0.0], [tuple(x)])
    now = 0.0
    for k, dt in enumerate(sizes, 1):
        k1 = f(x)
        k2 = f([a + dt / 2 * b for a, b in zip(x, k1)])
        k3 = f([a + dt / 2 * b for a, b in zip(x, k2)])
        k4 = f([a + dt * b for a, b in zip(x, k3)])
        x = [a + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4)]
        now = T if k > steps else k * h
        if not all(math.isfinite(z.real) and math.isfinite(z.imag) and abs(z) < tol.blowup for z in x):
            traj.blew_up = True
            break
        if k % stride == 0 or k == len(sizes):
            traj.times.append(now)
            traj.points.append(tuple(x))
    return traj


def convergence_factor(V: VectorField, start, T: float, h: float, params=None) -> float:
    """|x_h - x_ref| / |x_{h/2} - x_ref| with x_ref from step h/16; about 16 for a 4th-order method."""
    def end(step):
        tr = rk4_integrate(V, start, T, step, samples=1, params=params)
        if tr.blew_up:
            raise LeafNumError("trajectory blew up")
        return np.array(tr.points[-1])

    ref = end(h / 16)
    e1 = np.linalg.norm(end(h) - ref)
    e2 = np.linalg.norm(end(h / 2) - ref)
    return float(e1 / e2)


def leaf_start(q0: float, d: int = 2):
    """Chart point of the leaf S_0(d) at q0, computed from the (t, s) pair."""
    t, s = point_from_q(q0, d)
    return chart_from_pair(t, s)


def b_along_trajectory(traj: Trajectory, tol: Tolerances = DEFAULT_TOL, count: int = 10) -> List[float]:
    """B composed with the slice lift at ``count`` evenly spread trajectory samples."""
    idx = np.linspace(0, len(traj.points) - 1, count).round().astype(int)
    out = []
    for k in idx:
        t, s = lift_chart(traj.points[k])
        out.append(first_integral_B(t, s, tol))
    return out
