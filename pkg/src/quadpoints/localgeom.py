"""
Local projective geometry of a parametrized hyperbolic surface: adapted
4-jets, the expansion coefficients ``a, b, c, d``, quadratic points, their
signature, and flecnodal curves.

A :class:`SurfacePatch` supplies the partial derivatives of a lift
``(u, v) -> R^4`` up to order 4.  The adapted chart at a point uses the
frame ``(X, X_u, X_v, N)`` with ``N`` orthogonal to ``X, X_u, X_v``, regraphs
the surface over the tangent plane, and takes the two asymptotic
directions as axes.

Axis rule.  Let ``q`` be the quadratic part of the height function (``N`` is
signed by the coorientation flag: ``det[X, X_u, X_v, N]`` has the sign of
the flag, so a graph ``(1, x, y, z)`` with flag +1 gets ``N = +z``).  Take null directions ``e1, e2`` of ``q``
with ``det(e1, e2)`` of the sign of the orientation flag; if the polar form
``q(e1, e2)`` is negative replace ``(e1, e2)`` by ``(e2, -e1)``.  Then the
surface lies above the tangent plane in the positive sector from ``e1`` to
``e2``, so sweeping positively from a point where it lies below, the first
asymptotic direction crossed is ``e1``: that is the x-axis.  Flipping the
coorientation alone swaps the axes; flipping both flags negates ``a`` and
``b`` near every point, which maps a signature ``s`` to ``-s``.  The overall
sign of the pair ``(e1, e2)`` is fixed by ``e1 . ref > 0`` for a reference
direction ``ref`` in the parameter plane, which keeps frames continuous on
a neighbourhood.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from math import factorial
from typing import Callable

import numpy as np

from . import series as S
from . import zeroset
from .errors import (DegenerateCurve, InconsistentSignature, NonTransversal, NotHyperbolic)
from .jets import QUADRATIC, Jet4, normal_form

log = logging.getLogger(__name__)

QUAD_TOL = 1e-10
SIGN_RADIUS = 1e-2
TANGENCY_ANGLE = 1e-3


@dataclass(frozen=True)
class SurfacePatch:
    """A lift with derivatives: ``derivatives(u, v)`` has shape ``(..., 5, 5, 4)``
    with entry ``[..., j, k, :] = d^j/du^j d^k/dv^k X`` for ``j + k <= 4``."""

    derivatives: Callable[..., np.ndarray]
    orientation: int = 1
    coorientation: int = 1
    periodic: bool = True
    name: str = ""

    def flipped(self, orientation: bool = False, coorientation: bool = False) -> "SurfacePatch":
        return replace(self,
                       orientation=-self.orientation if orientation else self.orientation,
                       coorientation=-self.coorientation if coorientation else self.coorientation)

    def point(self, u, v) -> np.ndarray:
        return self.derivatives(u, v)[..., 0, 0, :]

    @classmethod
    def from_hyperboloid(cls, surface, **kw) -> "SurfacePatch":
        """Patch of a :class:`~quadpoints.hyperboloid.PerturbedHyperboloid` (exact derivatives).

        The default coorientation is -1: with it the adapted x-axis follows
        ``+d/du`` and ``a ~ eps (f_uuu + f_u)``, matching
        :func:`~quadpoints.hyperboloid.first_order_chart_expansion`.
        """
        kw.setdefault("coorientation", -1)
        return cls(surface.derivatives, name=f"hyperboloid(eps={surface.eps})", **kw)

    @classmethod
    def from_jet(cls, jet: Jet4, **kw) -> "SurfacePatch":
        """The polynomial graph ``(1, x, y, jet(x, y))`` near ``(0, 0)``."""
        c = jet.array

        def deriv(u, v):
            u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
            out = np.zeros(u.shape + (5, 5, 4))
            out[..., 0, 0, 0] = 1.0
            out[..., 0, 0, 1] = u
            out[..., 1, 0, 1] = 1.0
            out[..., 0, 0, 2] = v
            out[..., 0, 1, 2] = 1.0
            for j in range(5):
                for k in range(5 - j):
                    # d^j_u d^k_v of sum c_pq u^p v^q
                    acc = 0.0
                    for p in range(j, 5):
                        for q in range(k, 5 - p):
                            if c[p, q] == 0.0:
                                continue
                            w = factorial(p) / factorial(p - j) * factorial(q) / factorial(q - k)
                            acc = acc + c[p, q] * w * u ** (p - j) * v ** (q - k)
                    out[..., j, k, 3] = acc
            return out

        kw.setdefault("periodic", False)
        return cls(deriv, name="jet", **kw)

    @classmethod
    def from_function(cls, X: Callable, h: float = 1e-2, **kw) -> "SurfacePatch":
        """Derivatives of ``X(u, v) -> (..., 4)`` by finite differences.

        Tensor-product central stencil on the 9 offsets ``-4h..4h`` in each
        variable (weights from the Vandermonde system), which is exact for
        polynomials of degree 8 per variable.
        """
        offs = np.arange(-4, 5)
        V = np.vander(offs, increasing=True).T.astype(float)
        W = np.zeros((5, 9))
        for k in range(5):
            rhs = np.zeros(9)
            rhs[k] = factorial(k)
            W[k] = np.linalg.solve(V, rhs) / h ** k

        def deriv(u, v):
            u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
            uu = u[..., None, None] + offs[:, None] * h
            vv = v[..., None, None] + offs[None, :] * h
            vals = np.asarray(X(uu, vv))
            return np.einsum("ja,kb,...abc->...jkc", W, W, vals) * S.MASK[..., None]

        return cls(deriv, name="sampled", **kw)


# -- adapted frames -----------------------------------------------------------

@dataclass
class AdaptedFrame:
    """Adapted jets at a batch of points.

    ``axes[..., :, 0]`` and ``axes[..., :, 1]`` are the parameter-plane
    directions of the adapted x- and y-axes (to first order).
    """

    jets: np.ndarray
    axes: np.ndarray
    normal: np.ndarray
    discriminant: np.ndarray

    def jet(self, index=()) -> Jet4:
        return Jet4(self.jets[index])

    @property
    def cubic(self):
        c = self.jets
        return 3 * c[..., 3, 0], 3 * c[..., 0, 3], 2 * c[..., 2, 1], 2 * c[..., 1, 2]


def _unit_normal(X, Xu, Xv):
    A = np.stack([X, Xu, Xv], -2)
    _, _, vt = np.linalg.svd(A)
    return vt[..., -1, :]


def _null_directions(A, B, C):
    """Null directions of ``A x^2 + B xy + C y^2`` (hyperbolic)."""
    H = np.stack([np.stack([A, B / 2], -1), np.stack([B / 2, C], -1)], -2)
    w, V = np.linalg.eigh(H)
    lneg, lpos = w[..., 0], w[..., 1]
    pn = V[..., :, 0] / np.sqrt(-lneg)[..., None]
    pp = V[..., :, 1] / np.sqrt(lpos)[..., None]
    return H, pp + pn, pp - pn


def adapt_frames(patch: SurfacePatch, u, v, ref=None) -> AdaptedFrame:
    """Adapted jets at many points at once (broadcast over ``u, v``)."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    D = patch.derivatives(u, v)
    X, Xu, Xv = D[..., 0, 0, :], D[..., 1, 0, :], D[..., 0, 1, :]
    N = _unit_normal(X, Xu, Xv)
    M = np.stack([X, Xu, Xv, N], -1)
    sgn = np.sign(np.linalg.det(np.stack([X, Xu, Xv, N], -1))) * patch.coorientation
    N = N * sgn[..., None]
    M[..., 3] = N
    # surface series X(u + s, v + t) in the frame basis
    Y = S.from_taylor(np.moveaxis(D, -1, -3))
    Wc = np.einsum("...ij,...jkl->...ikl", np.linalg.inv(M), Y)
    inv0 = S.reciprocal(Wc[..., 0, :, :])
    xi = S.mul(Wc[..., 1, :, :], inv0)
    eta = S.mul(Wc[..., 2, :, :], inv0)
    zeta = S.mul(Wc[..., 3, :, :], inv0)
    P, Q = S.invert(xi, eta)
    G = S.compose(zeta, P, Q)
    A, B, C = G[..., 2, 0], G[..., 1, 1], G[..., 0, 2]
    disc = B * B - 4 * A * C
    if np.any(disc <= 0):
        raise NotHyperbolic("second fundamental form is not indefinite")
    H, e1, e2 = _null_directions(A, B, C)
    o = patch.orientation
    flip = (e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]) * o < 0
    e2 = np.where(flip[..., None], -e2, e2)
    pol = np.einsum("...i,...ij,...j->...", e1, H, e2)
    swap = pol < 0
    e1, e2 = np.where(swap[..., None], e2, e1), np.where(swap[..., None], -e1, e2)
    pol = np.abs(pol)
    r = np.array([1.0, 0.0]) if ref is None else np.asarray(ref, float)
    neg = np.einsum("...i,...i->...", e1, r) < 0
    e1 = np.where(neg[..., None], -e1, e1)
    e2 = np.where(neg[..., None], -e2, e2)
    scale = 1.0 / np.sqrt(2 * pol)
    E1 = e1 * scale[..., None]
    E2 = e2 * scale[..., None]
    L = np.stack([E1, E2], -1)
    J = S.linear_substitute(G, L)
    J[..., 2, 0] = 0.0
    J[..., 0, 2] = 0.0
    J[..., 1, 1] = 1.0
    J[..., S.DEGREE < 2] = 0.0
    # parameter directions: (s, t) = (P, Q)(xi, eta) has identity linear part
    axes = np.einsum("...ij,...jk->...ik", S.linear_part(P, Q), L)
    return AdaptedFrame(J, axes, N, disc)


def adapt(patch: SurfacePatch, u: float, v: float, ref=None) -> Jet4:
    """Adapted 4-jet ``z = xy + ...`` of the surface at ``(u, v)``."""
    return adapt_frames(patch, u, v, ref).jet()


def expansion_coefficients(jet: Jet4) -> tuple[float, float, float, float]:
    return jet.expansion_coefficients()


def is_quadratic(jet: Jet4, tol: float = QUAD_TOL) -> bool:
    a, b, _, _ = jet.expansion_coefficients()
    scale = max(1.0, float(np.max(np.abs(jet.array))))
    return abs(a) < tol * scale and abs(b) < tol * scale


@dataclass
class QuadricFamily:
    """Quadrics ``z = xy + (gamma xz + delta yz + eps z^2)/2`` tangent to the jet.

    ``dimension`` is 1 at a quadratic point (the hyperosculating family,
    ``gamma = c``, ``delta = d`` fixed) and 3 otherwise (osculating only).
    """

    dimension: int
    fixed: dict = field(default_factory=dict)
    hyperosculating: bool = False


def osculating_quadrics(jet: Jet4, tol: float = QUAD_TOL) -> QuadricFamily:
    if is_quadratic(jet, tol):
        _, _, c, d = jet.expansion_coefficients()
        return QuadricFamily(1, {"gamma": c, "delta": d}, True)
    return QuadricFamily(3, {}, False)


# -- signature ----------------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    s1: int
    s2: int

    @property
    def parity(self) -> str:
        return "even" if self.s1 == self.s2 else "odd"

    def reversed(self) -> "Signature":
        return Signature(-self.s1, -self.s2)

    def as_tuple(self) -> tuple[int, int]:
        return (self.s1, self.s2)


def _wrap_param(patch, p):
    return zeroset.wrap(p) if patch.periodic else p


def sampled_signature(patch: SurfacePatch, u: float, v: float,
                      r: float = SIGN_RADIUS) -> Signature:
    """Signs of ``a x`` and ``b y`` sampled along the asymptotic axes at radii r and r/2."""
    fr = adapt_frames(patch, u, v)
    E1, E2 = fr.axes[:, 0], fr.axes[:, 1]
    signs = []
    for k, E in enumerate((E1, E2)):
        d = E / np.linalg.norm(E)
        offs = np.array([r, -r, r / 2, -r / 2])
        pts = np.array([u, v]) + offs[:, None] * d
        pts = _wrap_param(patch, pts)
        cub = adapt_frames(patch, pts[:, 0], pts[:, 1], ref=E1).cubic[k]
        s = np.sign(cub) * np.sign(offs)
        if np.any(s == 0) or np.any(s != s[0]):
            raise NonTransversal(f"{'ab'[k]} does not change sign across the point")
        signs.append(int(s[0]))
    return Signature(*signs)


def signature(patch: SurfacePatch, u: float, v: float, r: float = SIGN_RADIUS,
              check: bool = True) -> Signature:
    """Signature at a quadratic point, cross-checked against the normal form.

    The sampled signs must agree with ``(sgn Ib, sgn Jb)`` of the oriented
    quadratic normal form of the adapted jet.
    """
    s = sampled_signature(patch, u, v, r)
    if check:
        nf = normal_form(adapt(patch, u, v), oriented=True, case=QUADRATIC)
        t = Signature(int(np.sign(nf.invariants[0])), int(np.sign(nf.invariants[1])))
        if t != s:
            raise InconsistentSignature(f"sampled {s.as_tuple()} vs normal form {t.as_tuple()}")
    return s


def jet_signature(jet: Jet4) -> Signature:
    """``(sgn Ib, sgn Jb)`` of a jet at a quadratic point."""
    nf = normal_form(jet, oriented=True, case=QUADRATIC)
    return Signature(int(np.sign(nf.invariants[0])), int(np.sign(nf.invariants[1])))


# -- fields a, b and quadratic points ------------------------------------------

def cubic_fields(patch: SurfacePatch, grid_n: int, ref=None, chunk: int = 4096):
    """``a`` and ``b`` on the periodic grid ``2 pi i / n``."""
    t = np.arange(grid_n) * zeroset.TWO_PI / grid_n
    U, V = np.meshgrid(t, t, indexing="ij")
    u, v = U.ravel(), V.ravel()
    a = np.empty(u.shape)
    b = np.empty(u.shape)
    for s in range(0, len(u), chunk):
        fr = adapt_frames(patch, u[s:s + chunk], v[s:s + chunk], ref)
        ca = fr.cubic
        a[s:s + chunk], b[s:s + chunk] = ca[0], ca[1]
    return a.reshape(U.shape), b.reshape(U.shape)


def flecnodal_curves(patch: SurfacePatch, grid_n: int = 64, tol: float = QUAD_TOL):
    """Zero curves of ``a`` and ``b`` traced from grid samples."""
    a, b = cubic_fields(patch, grid_n)
    for name, F in (("a", a), ("b", b)):
        if np.max(np.abs(F)) < tol:
            raise DegenerateCurve(f"{name} vanishes on the whole grid (quadric?)")
    return zeroset.trace_sampled(a), zeroset.trace_sampled(b)


def locate_quadratic_point(patch: SurfacePatch, u: float, v: float, tol: float = 1e-13,
                           h: float = 1e-6, iters: int = 30):
    """Newton on ``(a, b)`` from a nearby seed; returns a :class:`QuadraticPoint`."""
    x = np.array([u, v], dtype=float)
    ref = adapt_frames(patch, u, v).axes[:, 0]

    def F(p):
        fr = adapt_frames(patch, p[..., 0], p[..., 1], ref)
        return np.stack([fr.cubic[0], fr.cubic[1]], -1)

    steps = np.array([[h, 0], [-h, 0], [0, h], [0, -h]])
    r = F(x)
    for _ in range(iters):
        vals = F(x + steps)
        J = np.stack([(vals[0] - vals[1]) / (2 * h), (vals[2] - vals[3]) / (2 * h)], -1)
        dx = np.linalg.solve(J, r)
        lam = 1.0
        for _ in range(20):
            xn = x - lam * dx
            rn = F(xn)
            if np.linalg.norm(rn) < np.linalg.norm(r):
                break
            lam /= 2
        else:
            break
        x, r = xn, rn
        if np.max(np.abs(r)) < tol:
            break
    vals = F(x + steps)
    J = np.stack([(vals[0] - vals[1]) / (2 * h), (vals[2] - vals[3]) / (2 * h)], -1)
    x = _wrap_param(patch, x)
    return zeroset.QuadraticPoint(float(x[0]), float(x[1]), float(r[0]), float(r[1]),
                                  float(np.linalg.det(J)))


def quadratic_points(patch: SurfacePatch, seeds, with_signature: bool = False,
                     tol: float = 1e-13) -> list:
    """Quadratic points found by Newton from ``seeds`` (pairs or solutions)."""
    out = []
    for s in seeds:
        u, v = s.point if hasattr(s, "point") else s
        qp = locate_quadratic_point(patch, u, v, tol)
        if with_signature:
            qp.signature = signature(patch, qp.u, qp.v).as_tuple()
        out.append(qp)
    return out


# -- asymptotic lines ------------------------------------------------------------

def asymptotic_direction(patch: SurfacePatch, u, v, which: int = 0, ref=None):
    """Unit parameter-plane direction of the x- (0) or y-asymptotic line."""
    fr = adapt_frames(patch, u, v, ref)
    d = fr.axes[..., :, which]
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def asymptotic_line(patch: SurfacePatch, u: float, v: float, which: int = 0,
                    length: float = 0.05, steps: int = 40) -> np.ndarray:
    """RK4 trace of an asymptotic line through ``(u, v)`` in both directions.

    Returns parameter points ordered along the line, the base point in the
    middle (index ``steps``).
    """
    h = length / steps
    base = asymptotic_direction(patch, u, v, which)

    def walk(sign):
        pts = [np.array([u, v], float)]
        prev = base * sign
        for _ in range(steps):
            p = pts[-1]

            def fld(q, prev=prev):
                d = asymptotic_direction(patch, q[0], q[1], which, ref=base)
                return d if d @ prev >= 0 else -d

            k1 = fld(p)
            k2 = fld(p + h / 2 * k1)
            k3 = fld(p + h / 2 * k2)
            k4 = fld(p + h * k3)
            step = (k1 + 2 * k2 + 2 * k3 + k4) / 6
            pts.append(p + h * step)
            prev = step
        return pts

    fwd = walk(1.0)
    bwd = walk(-1.0)
    return np.array(bwd[::-1] + fwd[1:])


def chart_coordinates(patch: SurfacePatch, u: float, v: float, params: np.ndarray) -> np.ndarray:
    """Adapted chart coordinates ``(x, y, z)`` at ``(u, v)`` of surface points.

    Uses the same frame as :func:`adapt_frames`: affine chart of the basis
    ``(X, X_u, X_v, N)`` followed by the linear axis change (z rescaled so the
    cross term is 1).
    """
    fr = adapt_frames(patch, u, v)
    D = patch.derivatives(u, v)
    X, Xu, Xv = D[0, 0], D[1, 0], D[0, 1]
    M = np.stack([X, Xu, Xv, fr.normal], -1)
    pts = patch.point(params[:, 0], params[:, 1])
    w = np.linalg.solve(M, pts.T).T
    xi, eta, zeta = w[:, 1] / w[:, 0], w[:, 2] / w[:, 0], w[:, 3] / w[:, 0]
    # invert the axis matrix of the (xi, eta) plane
    # the (xi, eta) -> (s, t) linear part is the identity, so fr.axes is L itself
    L = fr.axes
    xy = np.linalg.solve(L, np.stack([xi, eta]))
    # z-scaling: the jet was divided by nothing; the quadratic part of zeta in the
    # new axes is already xy after substituting L
    return np.stack([xy[0], xy[1], zeta], -1)


def inflection_defect(patch: SurfacePatch, u: float, v: float, which: int = 0,
                      length: float = 0.02, steps: int = 40) -> float:
    """``y''(0)`` (resp. ``x''(0)``) of an asymptotic line in the adapted chart.

    In the chart ``z = xy + (a x^3 + b y^3)/3 + ...`` the x-asymptotic line is
    ``y = -a x^2 / 2 + O(x^3)``, so this returns approximately ``-a`` (resp.
    ``-b``).  It vanishes exactly on the flecnodal curve, where the
    asymptotic line has an inflection.
    """
    line = asymptotic_line(patch, u, v, which, length, steps)
    xyz = chart_coordinates(patch, u, v, line)
    s = xyz[:, which]
    w = xyz[:, 1 - which]
    # quartic fit of the transverse coordinate against the along coordinate
    c = np.polynomial.polynomial.polyfit(s, w, 4)
    return 2 * c[2]


def flecnodal_transversality(patch: SurfacePatch, u: float, v: float, h: float = 1e-5):
    """Angles between the flecnodal curves and the asymptotic directions at a point.

    Returns ``(angle(grad a, x-dir normal), angle(grad b, y-dir normal))``
    expressed as angles between the curve tangent and the transverse
    asymptotic direction; the point is flagged when either is below
    :data:`TANGENCY_ANGLE`.
    """
    fr = adapt_frames(patch, u, v)
    ref = fr.axes[:, 0]
    steps = np.array([[h, 0], [-h, 0], [0, h], [0, -h]]) + np.array([u, v])
    c = adapt_frames(patch, steps[:, 0], steps[:, 1], ref).cubic
    out = []
    for k in (0, 1):
        g = np.array([(c[k][0] - c[k][1]) / (2 * h), (c[k][2] - c[k][3]) / (2 * h)])
        tangent = np.array([-g[1], g[0]])
        d = fr.axes[:, k]
        cosang = abs(tangent @ d) / (np.linalg.norm(tangent) * np.linalg.norm(d))
        out.append(float(np.arccos(np.clip(cosang, -1, 1))))
    if min(out) < TANGENCY_ANGLE:
        log.warning("flecnodal curve nearly tangent to an asymptotic direction at (%g, %g)", u, v)
    return tuple(out)
