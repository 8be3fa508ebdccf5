"""
Truncated bivariate power series of total order <= 4.

A series is an array of shape ``(..., 5, 5)`` whose entry ``[..., j, k]`` is
the coefficient of ``x**j * y**k``; entries with ``j + k > ORDER`` are kept
at zero.  Leading axes are batch axes, so every routine below works on
many series at once.
"""

from __future__ import annotations

import numpy as np

ORDER = 4
SIZE = ORDER + 1

_J, _K = np.indices((SIZE, SIZE))
MASK = (_J + _K) <= ORDER
DEGREE = _J + _K


def zeros(batch=()) -> np.ndarray:
    return np.zeros(tuple(batch) + (SIZE, SIZE))


def truncate(a: np.ndarray) -> np.ndarray:
    return np.where(MASK, a, 0.0)


def constant(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    out = zeros(c.shape)
    out[..., 0, 0] = c
    return out


def variable(which: int, batch=()) -> np.ndarray:
    out = zeros(batch)
    if which == 0:
        out[..., 1, 0] = 1.0
    else:
        out[..., 0, 1] = 1.0
    return out


def _product_matrix() -> np.ndarray:
    # maps flattened outer products a_i b_j onto truncated product coefficients
    P = np.zeros((SIZE ** 4, SIZE * SIZE))
    for j1, k1 in zip(*np.nonzero(MASK)):
        for j2, k2 in zip(*np.nonzero(MASK)):
            j, k = j1 + j2, k1 + k2
            if j + k <= ORDER:
                P[(j1 * SIZE + k1) * SIZE * SIZE + j2 * SIZE + k2, j * SIZE + k] = 1.0
    return P


_PRODUCT = _product_matrix()


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.broadcast_arrays(a, b)
    batch = a.shape[:-2]
    n = int(np.prod(batch)) if batch else 1
    if n <= 32:
        outer = (a.reshape(batch + (-1, 1)) * b.reshape(batch + (1, -1)))
        return (outer.reshape(batch + (-1,)) @ _PRODUCT).reshape(a.shape)
    out = np.zeros(a.shape)
    for j in range(SIZE):
        for k in range(SIZE - j):
            coef = a[..., j, k]
            out[..., j:, k:] += coef[..., None, None] * b[..., :SIZE - j, :SIZE - k]
    return truncate(out)


def power_list(a: np.ndarray, n: int) -> list[np.ndarray]:
    """``[1, a, a**2, ..., a**n]`` (truncated)."""
    out = [constant(np.ones(a.shape[:-2]))]
    for _ in range(n):
        out.append(mul(out[-1], a))
    return out


def reciprocal(a: np.ndarray) -> np.ndarray:
    """``1 / a`` for a series with non-vanishing constant term."""
    a0 = a[..., 0, 0]
    t = a / a0[..., None, None]
    t = t.copy()
    t[..., 0, 0] = 0.0
    out = constant(np.ones(a.shape[:-2]))
    term = out.copy()
    for _ in range(ORDER):
        term = -mul(term, t)
        out = out + term
    return out / a0[..., None, None]


def compose(f: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``f(X, Y)`` where X and Y have zero constant term."""
    px = power_list(X, ORDER)
    py = power_list(Y, ORDER)
    out = zeros(np.broadcast_shapes(f.shape[:-2], X.shape[:-2], Y.shape[:-2]))
    for j in range(SIZE):
        for k in range(SIZE - j):
            coef = f[..., j, k]
            if not np.any(coef):
                continue
            out = out + coef[..., None, None] * mul(px[j], py[k])
    return out


def linear_part(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Jacobian at the origin of the map ``(X, Y)``, shape ``(..., 2, 2)``."""
    return np.stack([np.stack([X[..., 1, 0], X[..., 0, 1]], -1),
                     np.stack([Y[..., 1, 0], Y[..., 0, 1]], -1)], -2)


def invert(X: np.ndarray, Y: np.ndarray, check: bool = True):
    """Inverse of the map ``(x, y) -> (X, Y)`` as a pair of series.

    Uses the fixed-point iteration ``p = A^{-1} (q - N(p))`` where ``A`` is
    the linear part and ``N`` the nonlinear remainder.  Each sweep fixes one
    more order, so ``ORDER`` sweeps give the exact truncated inverse; with
    ``check`` a further sweep is asserted to change nothing.
    """
    A = linear_part(X, Y)
    Ainv = np.linalg.inv(A)
    NX = X.copy()
    NY = Y.copy()
    for N in (NX, NY):
        N[..., 1, 0] = 0.0
        N[..., 0, 1] = 0.0
        N[..., 0, 0] = 0.0
    batch = X.shape[:-2]
    qx = variable(0, batch)
    qy = variable(1, batch)

    def sweep(P, Q):
        rx = qx - compose(NX, P, Q)
        ry = qy - compose(NY, P, Q)
        newP = Ainv[..., 0, 0, None, None] * rx + Ainv[..., 0, 1, None, None] * ry
        newQ = Ainv[..., 1, 0, None, None] * rx + Ainv[..., 1, 1, None, None] * ry
        return newP, newQ

    P = Ainv[..., 0, 0, None, None] * qx + Ainv[..., 0, 1, None, None] * qy
    Q = Ainv[..., 1, 0, None, None] * qx + Ainv[..., 1, 1, None, None] * qy
    for _ in range(ORDER):
        P, Q = sweep(P, Q)
    if check:
        P2, Q2 = sweep(P, Q)
        scale = 1.0 + np.max(np.abs(P)) + np.max(np.abs(Q))
        drift = max(np.max(np.abs(P2 - P)), np.max(np.abs(Q2 - Q)))
        assert drift <= 1e-9 * scale, f"series inversion did not settle: {drift}"
    return P, Q


def linear_substitute(f: np.ndarray, L: np.ndarray) -> np.ndarray:
    """``f(L @ (x, y))`` for a batch of 2x2 matrices ``L``."""
    X = zeros(L.shape[:-2])
    Y = zeros(L.shape[:-2])
    X[..., 1, 0] = L[..., 0, 0]
    X[..., 0, 1] = L[..., 0, 1]
    Y[..., 1, 0] = L[..., 1, 0]
    Y[..., 0, 1] = L[..., 1, 1]
    return compose(f, X, Y)


def evaluate(f: np.ndarray, x, y):
    """Evaluate the polynomial at numeric points (batch broadcast)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = 0.0
    for j in range(SIZE):
        for k in range(SIZE - j):
            out = out + f[..., j, k] * x ** j * y ** k
    return out


def from_taylor(derivs: np.ndarray) -> np.ndarray:
    """Series from partial derivatives ``d[..., j, k] = d^{j+k} / du^j dv^k``."""
    from math import factorial
    fact = np.array([[1.0 / (factorial(j) * factorial(k)) for k in range(SIZE)]
                     for j in range(SIZE)])
    return truncate(derivs * fact)
