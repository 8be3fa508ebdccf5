"""
The hyperboloid ``x0 x3 = x1 x2`` in RP^3, its torus parametrization and
the first-order family ``X + eps f X_uv``.

Parametrization: ``X(u, v) = c(u) (x) c(v)`` with ``c(t) = (cos t/2, sin t/2)``,
so ``X = (cos cos, cos sin, sin cos, sin sin)`` of the half angles.  A torus
translation acts by the orthogonal matrix ``R(u0/2) (x) R(v0/2)``, which is
how charts are based at an arbitrary point.

Two charts appear here.  :func:`affine_chart` is ``(x1/x0, x2/x0, x3/x0)``,
i.e. ``x = tan v/2``, ``y = tan u/2``.  Jets are taken in the swapped chart
``(x2/x0, x1/x0, x3/x0)`` so that the jet's x-axis is the u-direction and the
cubic coefficient ``a`` is paired with ``f_uuu + f_u``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import series as S
from .errors import ChartSingular
from .jets import Jet4
from .trigpoly import TrigPoly2

CHART_TOL = 1e-12


def _half(t, k: int = 0):
    """k-th derivative of ``(cos t/2, sin t/2)``, stacked on the last axis."""
    t = np.asarray(t, dtype=float)
    ph = t / 2 + k * np.pi / 2
    return np.stack([np.cos(ph), np.sin(ph)], -1) / 2.0 ** k


def _kron(a, b):
    out = a[..., :, None] * b[..., None, :]
    return out.reshape(out.shape[:-2] + (4,))


def param(u, v) -> np.ndarray:
    """Homogeneous coordinates ``(x0, x1, x2, x3)`` of the point ``(u, v)``."""
    return _kron(_half(u), _half(v))


def param_derivative(u, v, j: int, k: int) -> np.ndarray:
    """``d^j/du^j d^k/dv^k X``."""
    return _kron(_half(u, j), _half(v, k))


def normal_field(u, v) -> np.ndarray:
    """The transversal field ``X_uv``."""
    return param_derivative(u, v, 1, 1)


def quadric(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0] * x[..., 3] - x[..., 1] * x[..., 2]


def _rot(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s], [s, c]])


def translation_matrix(u0: float, v0: float) -> np.ndarray:
    """Projective map sending ``X(u, v)`` to ``X(u + u0, v + v0)``."""
    return np.kron(_rot(u0 / 2), _rot(v0 / 2))


def affine_chart(u, v):
    """``(x1/x0, x2/x0, x3/x0) = (tan v/2, tan u/2, tan u/2 tan v/2)``."""
    X = param(u, v)
    if np.any(np.abs(X[..., 0]) < CHART_TOL):
        raise ChartSingular("chart x0 = 0 (u = pi or v = pi)")
    return X[..., 1] / X[..., 0], X[..., 2] / X[..., 0], X[..., 3] / X[..., 0]


def chart_point(x, y, z) -> np.ndarray:
    """Homogeneous point ``(1, x, y, z)``."""
    x, y, z = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x, y, z)))
    return np.stack([np.ones_like(x), x, y, z], -1)


@dataclass(frozen=True)
class PerturbedHyperboloid:
    """The surface ``X + eps f X_uv``."""

    f: TrigPoly2
    eps: float = 0.0

    def point(self, u, v) -> np.ndarray:
        return param(u, v) + self.eps * np.asarray(self.f(u, v))[..., None] * normal_field(u, v)

    def residual(self, u, v) -> np.ndarray:
        """``x0 x3 - x1 x2 - (eps/4) f`` on the unnormalized lift."""
        return quadric(self.point(u, v)) - self.eps / 4 * np.asarray(self.f(u, v))

    def derivatives(self, u, v, order: int = S.ORDER) -> np.ndarray:
        """Array ``D[..., j, k, :] = d^j/du^j d^k/dv^k`` of the lift, ``j + k <= order``."""
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.zeros(u.shape + (order + 1, order + 1, 4))
        fd = {}
        if self.eps != 0.0:
            for i in range(order + 1):
                for l in range(order + 1 - i):
                    fd[i, l] = np.asarray(self.f.diff(i, l)(u, v))
        for j in range(order + 1):
            for k in range(order + 1 - j):
                val = param_derivative(u, v, j, k)
                if self.eps != 0.0:
                    for i in range(j + 1):
                        for l in range(k + 1):
                            w = comb(j, i) * comb(k, l) * self.eps
                            val = val + w * fd[i, l][..., None] * param_derivative(
                                u, v, j - i + 1, k - l + 1)
                out[..., j, k, :] = val
        return out

    def translated(self, u0: float, v0: float) -> "PerturbedHyperboloid":
        """The same surface reparametrized so that ``(u0, v0)`` becomes ``(0, 0)``."""
        return PerturbedHyperboloid(self.f.translate(u0, v0), self.eps)


def perturbed_point(s: PerturbedHyperboloid, u, v) -> np.ndarray:
    return s.point(u, v)


def _atan_series() -> tuple[np.ndarray, np.ndarray]:
    """``2 atan x`` and ``2 atan y`` as truncated series."""
    U = S.zeros()
    U[1, 0], U[3, 0] = 2.0, -2.0 / 3
    V = U.T.copy()
    return U, V


def first_order_chart_jet(f: TrigPoly2, eps: float, u0: float = 0.0, v0: float = 0.0) -> Jet4:
    """Raw (unadapted) 4-jet of ``z = xy + eps h`` at ``(u0, v0)``.

    In the chart ``x = tan u/2, y = tan v/2, z = x3/x0`` based at the point,
    the perturbed surface is ``z = xy + eps h + O(eps^2)`` with
    ``h = f (1 + x^2)(1 + y^2) / 4``.  Returns the full series of the right
    hand side including its constant and linear part.
    """
    g = f.translate(u0, v0)
    d = np.zeros((S.SIZE, S.SIZE))
    for j in range(S.SIZE):
        for k in range(S.SIZE - j):
            d[j, k] = float(g.diff(j, k)(0.0, 0.0))
    U, V = _atan_series()
    F = S.compose(S.from_taylor(d), U, V)
    w = S.zeros()
    w[0, 0], w[2, 0], w[0, 2], w[2, 2] = 0.25, 0.25, 0.25, 0.25
    h = S.mul(F, w)
    out = eps * h
    out[1, 1] += 1.0
    return out


def first_order_chart_expansion(s: PerturbedHyperboloid, u0: float = 0.0,
                                v0: float = 0.0) -> Jet4:
    """Adapted 4-jet of the first-order surface ``z = xy + eps h`` at ``(u0, v0)``.

    Built from exact Fourier derivatives of ``f``: the affine part of ``eps h``
    is subtracted (an affine map of the chart), then the quadratic part is
    brought to ``xy`` by a linear change of ``(x, y)`` and a rescaling of
    ``z``.  Both moves are exact on the truncated series, so the cubic
    coefficients satisfy ``a = eps (f_uuu + f_u) + O(eps^2)`` and
    ``b = eps (f_vvv + f_v) + O(eps^2)``.
    """
    z = first_order_chart_jet(s.f, s.eps, u0, v0)
    z[S.DEGREE < 2] = 0.0
    return adapt_graph(z)


def adapt_graph(z: np.ndarray) -> Jet4:
    """Adapt a graph series with hyperbolic quadratic part, keeping the x-axis
    close to the old x-axis.

    The null lines of ``q = A x^2 + B xy + C y^2`` are used as new axes,
    oriented so the linear change is close to the identity when ``q`` is
    close to ``xy``, and ``z`` is rescaled so the cross term is 1.
    """
    A, B, C = z[2, 0], z[1, 1], z[0, 2]
    disc = B * B - 4 * A * C
    if disc <= 0:
        raise ValueError("quadratic part is not hyperbolic")
    r = np.sqrt(disc)
    # null directions (1, s) and (t, 1), taking the small roots
    s = (-2 * A) / (B + np.copysign(r, B))
    t = (-2 * C) / (B + np.copysign(r, B))
    L = np.array([[1.0, t], [s, 1.0]])
    z2 = S.linear_substitute(z, L)
    k = z2[1, 1]
    return Jet4(S.truncate(z2 / k))
