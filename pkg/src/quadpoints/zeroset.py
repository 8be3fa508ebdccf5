"""
Zero curves on the torus, their free homotopy classes, and the common zeros
of ``(f_uuu + f_u, f_vvv + f_v)``.

Curves are extracted with marching squares on a periodic ``n x n`` grid
(``u`` along axis 0, ``v`` along axis 1).  Crossing points on cell edges
are polished by a bracketed Newton iteration when the function is a
:class:`TrigPoly2`, and linearly interpolated for sampled fields.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (DegenerateAlpha, DegenerateCurve, GridTooCoarse, IdenticallyZero,
                     IdenticallyZeroSystem, MixedClasses)
from .trigpoly import TrigPoly2

log = logging.getLogger(__name__)

TWO_PI = 2 * np.pi
DEFAULT_GRID = 256
MAX_GRID = 2048
GRAD_TOL = 1e-6
DEDUP_TOL = 1e-6
RESIDUAL_TOL = 1e-10
JAC_TOL = 1e-8


def wrap(t):
    return np.mod(t, TWO_PI)


def circ_diff(a, b):
    """Signed circular difference ``a - b`` in ``(-pi, pi]``."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi
    return d


def torus_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.max(np.abs(circ_diff(p, q)), axis=-1)


def canonical_class(p: int, q: int) -> tuple[int, int]:
    """Winding pair up to overall sign: ``p > 0``, or ``p == 0`` and ``q > 0``."""
    if p < 0 or (p == 0 and q < 0):
        return -p, -q
    return p, q


@dataclass
class TorusCurve:
    """Closed polylines on ``[0, 2pi)^2`` with their winding pairs."""

    components: list = field(default_factory=list)
    windings: list = field(default_factory=list)
    grid_n: int = 0

    def __len__(self):
        return len(self.components)

    @property
    def classes(self) -> list[tuple[int, int]]:
        return [canonical_class(*w) for w in self.windings]

    def homotopy_type(self) -> tuple[int, tuple[int, int]]:
        """``(n, (p, q))`` when all components share one class."""
        cls = set(self.classes)
        if len(cls) != 1:
            raise MixedClasses(f"components in classes {sorted(cls)}")
        return len(self.components), cls.pop()

    def label(self) -> str:
        try:
            n, (p, q) = self.homotopy_type()
        except MixedClasses:
            return "+".join(f"({p},{q})" for p, q in self.classes)
        return f"{n}x({p},{q})"


def _edge_roots(g: TrigPoly2 | None, Z, i0, j0, i1, j1, n, axis):
    """Crossing parameter along edges from grid node 0 to node 1.

    ``axis`` 0 means the edge runs in ``u``.  Returns points ``(u, v)``
    (unwrapped, on the edge) of the zero.
    """
    z0 = Z[i0, j0]
    z1 = Z[i1, j1]
    t = z0 / (z0 - z1)
    h = TWO_PI / n
    u0 = i0 * h
    v0 = j0 * h
    if g is None or t.size == 0:
        return (u0 + t * h, v0) if axis == 0 else (u0, v0 + t * h)
    d = g.diff(1, 0) if axis == 0 else g.diff(0, 1)
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    s0 = np.sign(z0)
    for _ in range(60):
        uu = u0 + t * h if axis == 0 else u0
        vv = v0 if axis == 0 else v0 + t * h
        val = g(uu, vv)
        der = d(uu, vv) * h
        same = np.sign(val) == s0
        lo = np.where(same, t, lo)
        hi = np.where(same, hi, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = t - val / der
        bad = ~np.isfinite(tn) | (tn <= lo) | (tn >= hi)
        tn = np.where(bad, 0.5 * (lo + hi), tn)
        if np.max(np.abs(tn - t)) < 1e-15:
            t = tn
            break
        t = tn
    return (u0 + t * h, v0) if axis == 0 else (u0, v0 + t * h)


def trace_sampled(Z: np.ndarray, g: TrigPoly2 | None = None) -> TorusCurve:
    """Marching squares on periodic samples ``Z[i, j] = g(2 pi i/n, 2 pi j/n)``."""
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0]
    if Z.shape != (n, n):
        raise ValueError("expected a square periodic grid")
    Z = np.where(Z == 0.0, np.finfo(float).tiny, Z)
    pos = Z > 0
    idx = np.arange(n)
    ip = (idx + 1) % n
    # u-edges: (i, j) -> (i+1, j); v-edges: (i, j) -> (i, j+1)
    cu = pos != pos[ip, :]
    cv = pos != pos[:, ip]
    # cell (i, j) has edges: u-edge (i, j), u-edge (i, j+1), v-edge (i, j), v-edge (i+1, j)
    cnt = (cu.astype(int) + cu[:, ip] + cv + cv[ip, :])
    if np.any(cnt == 4):
        raise GridTooCoarse(f"saddle cell on a {n} grid")
    ui, uj = np.nonzero(cu)
    vi, vj = np.nonzero(cv)
    pu = _edge_roots(g, Z, ui, uj, ip[ui], uj, n, 0)
    pv = _edge_roots(g, Z, vi, vj, vi, ip[vj], n, 1)
    pts = np.concatenate([np.stack(pu, -1).reshape(-1, 2), np.stack(pv, -1).reshape(-1, 2)])
    if g is not None and len(pts):
        gu = g.diff(1, 0)(pts[:, 0], pts[:, 1])
        gv = g.diff(0, 1)(pts[:, 0], pts[:, 1])
        if np.min(np.hypot(gu, gv)) < GRAD_TOL:
            raise DegenerateCurve("zero of the function with vanishing gradient")
    nu = len(ui)
    uid = -np.ones((n, n), dtype=int)
    vid = -np.ones((n, n), dtype=int)
    uid[ui, uj] = np.arange(nu)
    vid[vi, vj] = nu + np.arange(len(vi))
    # link the two crossings of each cell
    nbr = [[] for _ in range(len(pts))]
    ci, cj = np.nonzero(cnt == 2)
    for i, j in zip(ci, cj):
        e = [uid[i, j], uid[i, ip[j]], vid[i, j], vid[ip[i], j]]
        e = [x for x in e if x >= 0]
        nbr[e[0]].append(e[1])
        nbr[e[1]].append(e[0])
    seen = np.zeros(len(pts), dtype=bool)
    comps, winds = [], []
    for start in range(len(pts)):
        if seen[start]:
            continue
        order = [start]
        seen[start] = True
        prev, cur = -1, start
        while True:
            nxt = [x for x in nbr[cur] if x != prev]
            if len(nbr[cur]) != 2:
                raise GridTooCoarse("open curve end while stitching")
            nxt = nxt[0] if nxt else nbr[cur][0]
            if nxt == start:
                break
            if seen[nxt]:
                raise GridTooCoarse("curve stitching revisited a crossing")
            seen[nxt] = True
            order.append(nxt)
            prev, cur = cur, nxt
        poly = wrap(pts[order])
        closed = np.vstack([poly, poly[:1]])
        steps = circ_diff(closed[1:], closed[:-1])
        total = steps.sum(axis=0) / TWO_PI
        w = np.rint(total).astype(int)
        comps.append(poly)
        winds.append((int(w[0]), int(w[1])))
    return TorusCurve(comps, winds, n)


def trace_zero_curve(g: TrigPoly2, grid_n: int = DEFAULT_GRID, max_grid: int = MAX_GRID) -> TorusCurve:
    """All components of ``{g = 0}``; the grid is doubled on ambiguity."""
    if g.is_zero():
        raise IdenticallyZero("cannot trace the zero set of the zero function")
    n = grid_n
    while True:
        t = np.arange(n) * TWO_PI / n
        try:
            return trace_sampled(g.evaluate_grid(t, t), g)
        except GridTooCoarse:
            if 2 * n > max_grid:
                raise
            log.info("grid %d too coarse, retrying with %d", n, 2 * n)
            n *= 2


def homotopy_intersection_bound(c1, c2) -> int:
    """``n n' |p q' - q p'|`` for curves (or ``(n, (p, q))`` tuples) of uniform class."""
    n1, (p1, q1) = c1.homotopy_type() if isinstance(c1, TorusCurve) else c1
    n2, (p2, q2) = c2.homotopy_type() if isinstance(c2, TorusCurve) else c2
    return int(n1 * n2 * abs(p1 * q2 - q1 * p2))


# -- system (2) ---------------------------------------------------------------

@dataclass
class SystemSolution:
    """A common zero of a pair of functions on the torus."""

    u: float
    v: float
    ru: float
    rv: float
    jac: float
    signature: tuple | None = None

    @property
    def point(self) -> tuple[float, float]:
        return (self.u, self.v)

    @property
    def simple(self) -> bool:
        return abs(self.jac) > JAC_TOL

    def as_row(self) -> dict:
        s1, s2 = self.signature if self.signature else (0, 0)
        return {"u": self.u, "v": self.v, "ru": self.ru, "rv": self.rv,
                "jac": self.jac, "s1": s1, "s2": s2}


#: the same record doubles as a located quadratic point
QuadraticPoint = SystemSolution


def sturm_pair(f: TrigPoly2) -> tuple[TrigPoly2, TrigPoly2]:
    Lu = f.sturm_operator("u")
    Lv = f.sturm_operator("v")
    if Lu.is_zero() or Lv.is_zero():
        raise IdenticallyZeroSystem("f_uuu + f_u or f_vvv + f_v vanishes identically")
    return Lu, Lv


def _newton(F: Callable, Jac: Callable, pts: np.ndarray, iters: int = 50):
    """Damped Newton on many seeds at once; returns points and a converged mask."""
    x = pts.copy()
    r = F(x)
    nr = np.linalg.norm(r, axis=-1)
    done = nr < 1e-15
    for _ in range(iters):
        if np.all(done):
            break
        J = Jac(x)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.abs(det) > 1e-300
        safe = np.where(ok, det, 1.0)
        dx = np.stack([(J[:, 1, 1] * r[:, 0] - J[:, 0, 1] * r[:, 1]) / safe,
                       (-J[:, 1, 0] * r[:, 0] + J[:, 0, 0] * r[:, 1]) / safe], -1)
        dx = np.where(ok[:, None], dx, 0.0)
        step = np.ones(len(x))
        active = ~done
        for _ in range(12):
            xn = x - step[:, None] * dx
            rn = F(xn)
            nn = np.linalg.norm(rn, axis=-1)
            better = (nn < nr) | ~active
            if np.all(better):
                break
            step = np.where(better, step, step / 2)
        upd = active & (nn < nr)
        x = np.where(upd[:, None], xn, x)
        r = np.where(upd[:, None], rn, r)
        stalled = active & ~upd
        nr = np.where(upd, nn, nr)
        done = done | stalled | (nr < 1e-15)
    return x, r


def solve_pair(g1: TrigPoly2, g2: TrigPoly2, grid_n: int = DEFAULT_GRID,
               tol: float = RESIDUAL_TOL) -> list[SystemSolution]:
    """Common zeros of two trigonometric polynomials on the torus."""
    n = grid_n
    t = np.arange(n) * TWO_PI / n
    G1 = g1.evaluate_grid(t, t) > 0
    G2 = g2.evaluate_grid(t, t) > 0

    def changes(P):
        # sign change anywhere in the 3x3 block of nodes around each cell pair
        anyp = np.zeros_like(P)
        anyn = np.zeros_like(P)
        for di in (0, 1, 2):
            for dj in (0, 1, 2):
                Q = np.roll(np.roll(P, -di, 0), -dj, 1)
                anyp |= Q
                anyn |= ~Q
        return anyp & anyn

    ci, cj = np.nonzero(changes(G1) & changes(G2))
    if len(ci) == 0:
        return []
    h = TWO_PI / n
    seeds = np.stack([(ci + 1) * h, (cj + 1) * h], -1)
    d1u, d1v, d2u, d2v = g1.diff(1, 0), g1.diff(0, 1), g2.diff(1, 0), g2.diff(0, 1)

    def F(x):
        return np.stack([g1(x[:, 0], x[:, 1]), g2(x[:, 0], x[:, 1])], -1)

    def Jac(x):
        u, v = x[:, 0], x[:, 1]
        return np.stack([np.stack([d1u(u, v), d1v(u, v)], -1),
                         np.stack([d2u(u, v), d2v(u, v)], -1)], -2)

    x, r = _newton(F, Jac, seeds)
    scale = max(1.0, g1.max_abs(), g2.max_abs())
    good = np.max(np.abs(r), axis=-1) < tol * scale
    if np.any(~good):
        log.debug("%d seeds did not converge", int(np.sum(~good)))
    x = wrap(x[good])
    sols = _dedup(x)
    J = Jac(sols) if len(sols) else np.zeros((0, 2, 2))
    R = F(sols) if len(sols) else np.zeros((0, 2))
    out = []
    for k in range(len(sols)):
        out.append(SystemSolution(float(sols[k, 0]), float(sols[k, 1]), float(R[k, 0]),
                                  float(R[k, 1]), float(np.linalg.det(J[k]))))
    return out


def _dedup(x: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    keep: list[np.ndarray] = []
    for p in x[np.lexsort((x[:, 1], x[:, 0]))]:
        if all(torus_distance(p, q) >= tol for q in keep):
            keep.append(p)
    if not keep:
        return np.zeros((0, 2))
    k = np.array(keep)
    # points near 2pi are represented near 0
    k = np.where(np.abs(k - TWO_PI) < tol, 0.0, k)
    return k[np.lexsort((k[:, 1], k[:, 0]))]


def solve_system(f: TrigPoly2, grid_n: int = DEFAULT_GRID, tol: float = RESIDUAL_TOL,
                 max_grid: int = MAX_GRID) -> list[SystemSolution]:
    """Common zeros of ``f_uuu + f_u`` and ``f_vvv + f_v``, sorted by ``(u, v)``."""
    Lu, Lv = sturm_pair(f)
    return solve_pair(Lu, Lv, grid_n, tol)


def nonsimple(solutions: Sequence[SystemSolution]) -> list[SystemSolution]:
    return [s for s in solutions if not s.simple]


# -- homogeneous second harmonics --------------------------------------------

def homogeneous_second(alpha) -> TrigPoly2:
    """``cos2u (a11 cos2v + a12 sin2v) + sin2u (a21 cos2v + a22 sin2v)``."""
    a = np.asarray(alpha, dtype=float)
    C, Sn = TrigPoly2.cos, TrigPoly2.sin
    # products of (cos2u or sin2u) with (cos2v or sin2v) via sums of angles
    cc = (C(2, 2) + C(2, -2)) * 0.5
    cs = (Sn(2, 2) - Sn(2, -2)) * 0.5
    sc = (Sn(2, 2) + Sn(2, -2)) * 0.5
    ss = (C(2, -2) - C(2, 2)) * 0.5
    return cc * a[0, 0] + cs * a[0, 1] + sc * a[1, 0] + ss * a[1, 1]


def homogeneous_quadratic(alpha) -> tuple[float, float, float]:
    """Coefficients ``(A, -B, -A)`` of ``A t^2 - B t - A`` in ``t = tan 2v``."""
    a = np.asarray(alpha, dtype=float)
    A = a[0, 0] * a[0, 1] + a[1, 0] * a[1, 1]
    B = a[1, 1] ** 2 - a[1, 0] ** 2 + a[0, 1] ** 2 - a[0, 0] ** 2
    return A, -B, -A


def homogeneous_discriminant(alpha) -> float:
    A, mB, _ = homogeneous_quadratic(alpha)
    return mB * mB + 4 * A * A


def closed_form_homogeneous(alpha, tol: float = 1e-12) -> list[SystemSolution]:
    """The 32 solutions of system (2) for a homogeneous second harmonic.

    ``f_uuu + f_u = 0`` gives ``tan 2u = (a21 c + a22 s)/(a11 c + a12 s)`` with
    ``c, s = cos 2v, sin 2v``; substituting into the second equation leaves
    ``A t^2 - B t - A = 0`` in ``t = tan 2v``, i.e. ``tan 4v = -2A/B``.
    """
    a = np.asarray(alpha, dtype=float)
    A, mB, _ = homogeneous_quadratic(a)
    scale = max(1.0, np.max(np.abs(a))) ** 2
    if abs(A) < tol * scale and abs(mB) < tol * scale:
        raise DegenerateAlpha("all coefficients of the quadratic in tan 2v vanish")
    theta = np.arctan2(2 * A, mB)
    vs = wrap(theta / 4 + np.arange(8) * np.pi / 4)
    pts = []
    for v in vs:
        c, s = np.cos(2 * v), np.sin(2 * v)
        num = a[1, 0] * c + a[1, 1] * s
        den = a[0, 0] * c + a[0, 1] * s
        if np.hypot(num, den) < tol * scale:
            raise DegenerateAlpha("f_uuu + f_u vanishes on a whole circle")
        phi = np.arctan2(num, den)
        for j in range(4):
            pts.append((wrap(phi / 2 + j * np.pi / 2), v))
    x = np.array(pts)
    x = x[np.lexsort((x[:, 1], x[:, 0]))]
    f = homogeneous_second(a)
    Lu, Lv = f.sturm_operator("u"), f.sturm_operator("v")
    out = []
    for u, v in x:
        J = np.array([[Lu.diff(1, 0)(u, v), Lu.diff(0, 1)(u, v)],
                      [Lv.diff(1, 0)(u, v), Lv.diff(0, 1)(u, v)]])
        out.append(SystemSolution(float(u), float(v), float(Lu(u, v)), float(Lv(u, v)),
                                  float(np.linalg.det(J))))
    return out


def match_solutions(a: Sequence[SystemSolution], b: Sequence[SystemSolution]) -> float:
    """Largest torus distance from a point of ``a`` to its nearest point of ``b``."""
    if not a:
        return 0.0
    B = np.array([s.point for s in b])
    return float(max(np.min(torus_distance(np.array(s.point), B)) for s in a))
