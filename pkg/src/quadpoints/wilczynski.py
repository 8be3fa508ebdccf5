"""
Canonical lift and Wilczynski coefficients of a surface given in asymptotic
coordinates.

The lift is normalized by ``|det[X, X_u, X_v, X_uv]| = 1``; the coefficients
are read off from

    X_uu + a X_v + alpha X = 0,     X_vv + b X_u + beta X = 0,

by expressing ``X_uu`` and ``X_vv`` in the frame ``(X, X_u, X_v, X_uv)``.
A raw lift ``x`` is rescaled by ``lam = |D|^(-1/4)``, ``D = det[x, x_u, x_v, x_uv]``.
No real rescaling changes ``sign(D)``; when it is negative the lift is also
composed with the reflection ``x3 -> -x3``.  That is a projective map, so the
coefficients do not see it, and the sign is kept in ``det_sign``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from .errors import DegenerateFrame, NonMonotone, NotAsymptotic
from .trigpoly import TrigPoly2

log = logging.getLogger(__name__)

FORBIDDEN_TOL = 1e-7
TWO_PI = 2 * np.pi

# frame columns as derivative multi-indices
_FRAME = ((0, 0), (1, 0), (0, 1), (1, 1))


def _det_derivative(D, cols, du: int, dv: int):
    """``d^du/du d^dv/dv det[D[cols]]`` by the Leibniz rule on columns."""
    if du == 0 and dv == 0:
        return np.linalg.det(np.stack([D[..., j, k, :] for j, k in cols], -1))
    if du > 0:
        step, rest = (1, 0), (du - 1, dv)
    else:
        step, rest = (0, 1), (du, dv - 1)
    total = 0.0
    for i in range(4):
        new = list(cols)
        new[i] = (cols[i][0] + step[0], cols[i][1] + step[1])
        if len(set(new)) < 4:
            continue
        total = total + _det_derivative(D, tuple(new), *rest)
    return total


@dataclass
class CanonicalLift:
    """Canonical lift data at a set of points (arrays broadcast over the grid).

    ``frame`` is ``(X, X_u, X_v, X_uv)`` stacked on axis -1 and ``X_uu``,
    ``X_vv`` the second derivatives, all of the normalized lift.
    ``det_sign`` is the sign of the raw determinant (-1 means the reflection
    was applied).
    """

    u: np.ndarray
    v: np.ndarray
    frame: np.ndarray
    Xuu: np.ndarray
    Xvv: np.ndarray
    lam: np.ndarray
    det_sign: np.ndarray

    @property
    def X(self):
        return self.frame[..., 0]

    def determinant(self) -> np.ndarray:
        return np.linalg.det(self.frame)


def canonical_lift(derivatives: Callable, u, v) -> CanonicalLift:
    """Normalize a raw lift given by its derivative array (see ``SurfacePatch``).

    ``lam = |D|^(-1/4)`` is positive, so the sign branch is the same at every
    point and the lift is continuous wherever the raw one is.
    """
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    D = derivatives(u, v)
    d0 = _det_derivative(D, _FRAME, 0, 0)
    if np.any(np.abs(d0) < 1e-14):
        raise DegenerateFrame("det[x, x_u, x_v, x_uv] vanishes")
    du = _det_derivative(D, _FRAME, 1, 0)
    dv = _det_derivative(D, _FRAME, 0, 1)
    duu = _det_derivative(D, _FRAME, 2, 0)
    dvv = _det_derivative(D, _FRAME, 0, 2)
    duv = _det_derivative(D, _FRAME, 1, 1)
    lam = np.abs(d0) ** -0.25
    lu = -lam * du / (4 * d0)
    lv = -lam * dv / (4 * d0)
    luu = lam * (5 / 16 * (du / d0) ** 2 - duu / (4 * d0))
    lvv = lam * (5 / 16 * (dv / d0) ** 2 - dvv / (4 * d0))
    luv = lam * (5 / 16 * du * dv / d0 ** 2 - duv / (4 * d0))

    def e(x):
        return x[..., None]

    x, xu, xv, xuv = (D[..., j, k, :] for j, k in _FRAME)
    xuu, xvv = D[..., 2, 0, :], D[..., 0, 2, :]
    X = e(lam) * x
    Xu = e(lu) * x + e(lam) * xu
    Xv = e(lv) * x + e(lam) * xv
    Xuv = e(luv) * x + e(lu) * xv + e(lv) * xu + e(lam) * xuv
    Xuu = e(luu) * x + 2 * e(lu) * xu + e(lam) * xuu
    Xvv = e(lvv) * x + 2 * e(lv) * xv + e(lam) * xvv
    frame = np.stack([X, Xu, Xv, Xuv], -1)
    sign = np.sign(d0)
    flip = np.ones(sign.shape + (4,))
    flip[..., 3] = sign
    frame = frame * flip[..., None]
    return CanonicalLift(u, v, frame, Xuu * flip, Xvv * flip, lam, sign)


@dataclass
class WilczynskiData:
    """Coefficient fields on a grid (``u`` along axis 0) and diagnostics."""

    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    forbidden: float
    det_error: float
    det_sign: int
    residuals: tuple = field(default=())

    def rows(self):
        for idx in np.ndindex(self.a.shape):
            yield (float(self.u[idx]), float(self.v[idx]), float(self.a[idx]),
                   float(self.b[idx]), float(self.alpha[idx]), float(self.beta[idx]))


def extract_coefficients(derivatives: Callable, u, v, tol: float | None = FORBIDDEN_TOL,
                         grid: bool = True) -> WilczynskiData:
    """Wilczynski coefficients at the points ``(u, v)`` (a meshgrid if ``grid``).

    ``tol`` bounds the forbidden components (``X_u``, ``X_uv`` in ``X_uu``;
    ``X_v``, ``X_uv`` in ``X_vv``); pass ``None`` to skip the check, e.g. for
    coordinates that are asymptotic only to first order.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if grid:
        u, v = np.meshgrid(u, v, indexing="ij")
    L = canonical_lift(derivatives, u, v)
    cu = np.linalg.solve(L.frame, L.Xuu[..., None])[..., 0]
    cv = np.linalg.solve(L.frame, L.Xvv[..., None])[..., 0]
    forb = float(max(np.max(np.abs(cu[..., [1, 3]])), np.max(np.abs(cv[..., [2, 3]]))))
    if tol is not None and forb > tol:
        raise NotAsymptotic(f"coordinates are not asymptotic: forbidden component {forb:.3g}")
    det = L.determinant()
    sign = np.unique(L.det_sign)
    return WilczynskiData(u, v, a=-cu[..., 2], b=-cv[..., 1], alpha=-cu[..., 0],
                          beta=-cv[..., 0], forbidden=forb,
                          det_error=float(np.max(np.abs(np.abs(det) - 1))),
                          det_sign=int(sign[0]) if len(sign) == 1 else 0)


def lift_monodromy(derivatives: Callable, u0: float = 0.0, v0: float = 0.0) -> tuple[int, int]:
    """Signs picked up by the canonical lift around the two torus cycles.

    ``lam`` is positive, so the lift inherits the monodromy of the raw lift;
    for the half-angle parametrization of the hyperboloid both are -1.
    """
    u = np.array([u0, u0 + TWO_PI, u0])
    v = np.array([v0, v0, v0 + TWO_PI])
    X = canonical_lift(derivatives, u, v).X
    return tuple(int(np.sign(np.dot(X[0], X[i]))) for i in (1, 2))


def coefficient_zeros(derivatives: Callable, seeds, tol: float | None = None,
                      h: float = 1e-6, iters: int = 30) -> np.ndarray:
    """Newton's method on ``(a, b) = 0`` from each seed, finite-difference Jacobian."""
    def ab(p):
        d = extract_coefficients(derivatives, p[:, 0], p[:, 1], tol, grid=False)
        return np.stack([d.a, d.b], -1)

    p = np.atleast_2d(np.asarray(seeds, float)).copy()
    for _ in range(iters):
        F = ab(p)
        Ju = (ab(p + [h, 0]) - ab(p - [h, 0])) / (2 * h)
        Jv = (ab(p + [0, h]) - ab(p - [0, h])) / (2 * h)
        J = np.stack([Ju, Jv], -1)
        step = np.linalg.solve(J, F[..., None])[..., 0]
        p -= step
        if np.max(np.abs(step)) < 1e-13:
            break
    return np.mod(p, TWO_PI)


def torus_grid(n: int) -> np.ndarray:
    return np.arange(n) * TWO_PI / n


def _pd(F, h, axis, order):
    """Periodic second-order central difference."""
    if order == 1:
        return (np.roll(F, -1, axis) - np.roll(F, 1, axis)) / (2 * h)
    return (np.roll(F, -1, axis) - 2 * F + np.roll(F, 1, axis)) / h ** 2


def integrability_residuals(W: WilczynskiData) -> tuple[float, float, float]:
    """Max norms of the three integrability relations on a periodic grid.

    Derivatives by second-order central differences, so the residuals are
    ``O(h^2)`` for an exact Wilczynski system.
    """
    n_u, n_v = W.a.shape
    hu, hv = TWO_PI / n_u, TWO_PI / n_v
    a, b, al, be = W.a, W.b, W.alpha, W.beta

    def Du(F, k=1):
        return _pd(F, hu, 0, k)

    def Dv(F, k=1):
        return _pd(F, hv, 1, k)

    r1 = Dv(al, 2) + b * Du(al) + 2 * Du(b) * al - Du(be, 2) - 2 * Dv(a) * be - a * Dv(be)
    r2 = a * Dv(b) + 2 * Dv(a) * b + Du(b, 2) + 2 * Du(be)
    r3 = b * Du(a) + 2 * Du(b) * a + Dv(a, 2) + 2 * Dv(al)
    res = tuple(float(np.max(np.abs(r))) for r in (r1, r2, r3))
    W.residuals = res
    return res


# -- reparametrizations -------------------------------------------------------------

@dataclass(frozen=True)
class Reparam:
    """A circle reparametrization ``t -> T(t)`` with derivatives up to order 4.

    ``derivs(t)`` returns an array ``(5, ...)``: ``T, T', T'', T''', T''''``.
    """

    derivs: Callable
    name: str = ""

    @classmethod
    def identity(cls):
        return cls(lambda t: np.stack([t, np.ones_like(t)] + [np.zeros_like(t)] * 3), "id")

    @classmethod
    def shift(cls, s: float):
        return cls(lambda t: np.stack([t + s, np.ones_like(t)] + [np.zeros_like(t)] * 3),
                   f"t+{s}")

    @classmethod
    def sine(cls, c: float, k: int = 1):
        """``t + c sin(k t)``; monotone iff ``|c k| < 1``."""
        def d(t):
            s, co = np.sin(k * t), np.cos(k * t)
            return np.stack([t + c * s, 1 + c * k * co, -c * k ** 2 * s,
                             -c * k ** 3 * co, c * k ** 4 * s])
        return cls(d, f"t+{c}sin({k}t)")


def _bell(d):
    """Faa di Bruno matrix ``B[j, p]``: ``d^j/dt^j F(T(t)) = sum_p B[j, p] F^(p)(T)``."""
    T1, T2, T3, T4 = d[1], d[2], d[3], d[4]
    z = np.zeros_like(T1)
    one = np.ones_like(T1)
    return np.stack([
        np.stack([one, z, z, z, z]),
        np.stack([z, T1, z, z, z]),
        np.stack([z, T2, T1 ** 2, z, z]),
        np.stack([z, T3, 3 * T1 * T2, T1 ** 3, z]),
        np.stack([z, T4, 4 * T1 * T3 + 3 * T2 ** 2, 6 * T1 ** 2 * T2, T1 ** 4]),
    ])


def reparametrized(derivatives: Callable, U: Reparam, V: Reparam) -> Callable:
    """Derivative array of ``(u, v) -> X(U(u), V(v))``."""
    def deriv(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        du, dv = U.derivs(u), V.derivs(v)
        if np.any(du[1] <= 0) or np.any(dv[1] <= 0):
            raise NonMonotone("reparametrization is not strictly increasing")
        D = derivatives(du[0], dv[0])
        Bu = np.moveaxis(_bell(du), (0, 1), (-2, -1))
        Bv = np.moveaxis(_bell(dv), (0, 1), (-2, -1))
        out = np.einsum("...jp,...kq,...pqc->...jkc", Bu, Bv, D)
        mask = (np.add.outer(np.arange(5), np.arange(5)) <= 4)[..., None]
        return out * mask
    return deriv


def tensor_transform_check(derivatives: Callable, U: Reparam, V: Reparam, u, v,
                           tol: float | None = FORBIDDEN_TOL) -> float:
    """Max of ``|a_new - a(U,V) U'^2/V'|`` and ``|b_new - b(U,V) V'^2/U'|`` on a grid."""
    uu, vv = np.meshgrid(np.asarray(u, float), np.asarray(v, float), indexing="ij")
    du, dv = U.derivs(uu), V.derivs(vv)
    if np.any(du[1] <= 0) or np.any(dv[1] <= 0):
        raise NonMonotone("reparametrization is not strictly increasing")
    new = extract_coefficients(reparametrized(derivatives, U, V), uu, vv, tol, grid=False)
    old = extract_coefficients(derivatives, du[0], dv[0], tol, grid=False)
    ra = new.a - old.a * du[1] ** 2 / dv[1]
    rb = new.b - old.b * dv[1] ** 2 / du[1]
    return float(max(np.max(np.abs(ra)), np.max(np.abs(rb))))


# -- test surfaces in exact asymptotic coordinates ----------------------------------

class RuledTorus:
    """Ruled torus ``Z(u, v) = e^(iv/2) m(u) psi(u)`` in ``C^2 = R^4``.

    ``psi = (cos u/2, sin u/2 (1 + i eps h(u)))`` and ``m = W^(-1/2)`` with
    ``W = psi1' psi2 - psi1 psi2'``.  Then ``det_C(phi, phi')`` is constant for
    ``phi = m psi``, hence ``phi''`` is a complex multiple of ``phi``: the
    ``u``-lines are asymptotic, the ``v``-lines are projective lines, the
    raw determinant is constant, ``b = 0`` and ``a = 2 Im(-phi''/phi)`` is a
    nonzero function of ``u`` for ``eps != 0``.  ``eps = 0`` gives a quadric.

    Derivatives in ``u`` are spectral: ``e^(-iu/2) phi(u)`` is 2pi-periodic and
    is expanded by FFT on ``modes`` points.
    """

    def __init__(self, eps: float = 0.2, h: TrigPoly2 | None = None, modes: int = 256):
        self.eps = eps
        self.h = h if h is not None else TrigPoly2.cos(1, 0) + TrigPoly2.sin(2, 0, 0.5)
        t = np.arange(modes) * TWO_PI / modes
        hv = np.asarray(self.h(t, 0.0))
        hd = np.asarray(self.h.diff(1, 0)(t, 0.0))
        c, s = np.cos(t / 2), np.sin(t / 2)
        p1 = c + 0j
        p2 = s * (1 + 1j * eps * hv)
        d1 = -s / 2 + 0j
        d2 = c / 2 * (1 + 1j * eps * hv) + s * 1j * eps * hd
        W = d1 * p2 - p1 * d2
        # W stays near -1/2: take the principal root of -W and absorb the i
        m = 1j * (-W) ** -0.5
        phi = np.stack([m * p1, m * p2]) * np.exp(-0.5j * t)
        coef = np.fft.fft(phi, axis=-1) / modes
        k = np.fft.fftfreq(modes, 1.0 / modes)
        keep = np.abs(k) < modes // 2 - 1
        self._freq = k[keep] + 0.5
        self._coef = coef[:, keep]

    def phi(self, u, order: int = 0):
        u = np.asarray(u, float)
        w = (1j * self._freq) ** order
        E = np.exp(1j * np.multiply.outer(u, self._freq))
        return np.einsum("...k,ck->...c", E * w, self._coef)

    def derivatives(self, u, v) -> np.ndarray:
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.zeros(u.shape + (5, 5, 4))
        ev = np.exp(0.5j * v)[..., None]
        for j in range(5):
            ph = self.phi(u, j)
            for k in range(5 - j):
                Z = (0.5j) ** k * ev * ph
                out[..., j, k, :] = np.stack([Z[..., 0].real, Z[..., 0].imag,
                                              Z[..., 1].real, Z[..., 1].imag], -1)
        return out

    def point(self, u, v):
        return self.derivatives(u, v)[..., 0, 0, :]


def first_order_asymptotic(surface) -> Callable:
    """Derivatives of ``X + eps (f X_uv - f_v X_u / 2 - f_u X_v / 2)``.

    To first order in ``eps`` this is the perturbed hyperboloid
    ``X + eps f X_uv`` reparametrized by ``(u, v) -> (u - eps f_v/2, v - eps f_u/2)``,
    and its coordinate lines are asymptotic up to ``O(eps^2)``.
    """
    from .hyperboloid import param_derivative

    f, eps = surface.f, surface.eps
    terms = ((f, (1, 1), 1.0), (f.diff(0, 1), (1, 0), -0.5), (f.diff(1, 0), (0, 1), -0.5))

    def deriv(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.zeros(u.shape + (5, 5, 4))
        cache = {}
        for j in range(5):
            for k in range(5 - j):
                val = param_derivative(u, v, j, k)
                for g, (p, q), w in terms:
                    for i in range(j + 1):
                        for l in range(k + 1):
                            key = (id(g), i, l)
                            if key not in cache:
                                cache[key] = np.asarray(g.diff(i, l)(u, v))[..., None]
                            val = val + (eps * w * comb(j, i) * comb(k, l)) * cache[key] * \
                                param_derivative(u, v, j - i + p, k - l + q)
                out[..., j, k, :] = val
        return out

    return deriv
