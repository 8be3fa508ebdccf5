"""
Surface 4-jets, their projective regraphing, and normal forms at a point.

A jet is the truncated graph ``z = sum c_jk x^j y^k`` (``2 <= j + k <= 4``) in
the affine chart ``x = x1/x0, y = x2/x0, z = x3/x0``.  Projective maps are
4x4 matrices acting on homogeneous coordinates and must fix the origin
``(1:0:0:0)``.

The normal forms reached by :func:`normal_form` are

* generic point:     ``z = xy + (x^3 + y^3)/3 + (I x^4 + J y^4)/12``
* on ``a = 0`` only: ``z = xy + (y^3 +- x^3 y)/3 + It x^4/12``
* quadratic point:   ``z = xy +- (x^3 y +- x y^3)/3 + (Ib x^4 + Jb y^4)/12``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from . import series as S
from .errors import DegenerateQuadraticPoint, NotAdapted, NotAGraph, OriginNotFixed

ADAPT_TOL = 1e-10

QUARTIC_KEYS = ((4, 0), (3, 1), (2, 2), (1, 3), (0, 4))


class Jet4:
    """Truncated graph ``z = sum_{2 <= j+k <= 4} c_jk x^j y^k``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[tuple[int, int], float] | np.ndarray | None = None):
        c = np.zeros((S.SIZE, S.SIZE))
        if isinstance(coeffs, np.ndarray):
            c[...] = coeffs
        elif coeffs:
            for (j, k), val in coeffs.items():
                if j + k > S.ORDER or j < 0 or k < 0:
                    raise ValueError(f"monomial x^{j} y^{k} outside the 4-jet")
                c[j, k] = val
        c = S.truncate(c)
        if np.any(c[S.DEGREE < 2] != 0):
            raise ValueError("a jet has no constant or linear terms")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_expansion(cls, a=0.0, b=0.0, c=0.0, d=0.0, quartic=(0, 0, 0, 0, 0)):
        """``z = xy + (a x^3 + b y^3)/3 + (c x^2 y + d x y^2)/2 + Q4``."""
        co = {(1, 1): 1.0, (3, 0): a / 3, (0, 3): b / 3, (2, 1): c / 2, (1, 2): d / 2}
        for key, q in zip(QUARTIC_KEYS, quartic):
            co[key] = q
        return cls(co)

    @classmethod
    def generic_normal(cls, I: float, J: float) -> "Jet4":
        return cls.from_expansion(a=1, b=1, quartic=(I / 12, 0, 0, 0, J / 12))

    @classmethod
    def flecnodal_normal(cls, sign: int, It: float) -> "Jet4":
        return cls.from_expansion(b=1, quartic=(It / 12, sign / 3, 0, 0, 0))

    @classmethod
    def quadratic_normal(cls, signs: tuple[int, int], Ib: float, Jb: float) -> "Jet4":
        sx, sy = signs
        return cls.from_expansion(quartic=(Ib / 12, sx / 3, 0, sx * sy / 3, Jb / 12))

    @property
    def array(self) -> np.ndarray:
        return self._c

    def __getitem__(self, jk) -> float:
        return float(self._c[jk])

    @property
    def quartic(self) -> np.ndarray:
        """``(alpha, beta, gamma, delta, epsilon)`` of ``x^4, x^3y, x^2y^2, xy^3, y^4``."""
        return np.array([self._c[k] for k in QUARTIC_KEYS])

    def is_adapted(self, tol: float = ADAPT_TOL) -> bool:
        c = self._c
        return abs(c[2, 0]) < tol and abs(c[0, 2]) < tol and abs(c[1, 1] - 1) < tol

    def expansion_coefficients(self) -> tuple[float, float, float, float]:
        """``(a, b, c, d) = (3 c30, 3 c03, 2 c21, 2 c12)``."""
        if not self.is_adapted():
            raise NotAdapted("jet is not in adapted form z = xy + O(3)")
        c = self._c
        return 3 * c[3, 0], 3 * c[0, 3], 2 * c[2, 1], 2 * c[1, 2]

    def allclose(self, other: "Jet4", atol: float = 1e-10) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0, atol=atol))

    def __call__(self, x, y):
        return S.evaluate(self._c, x, y)

    def __repr__(self):
        terms = {(int(j), int(k)): float(self._c[j, k])
                 for j, k in zip(*np.nonzero(self._c))}
        return f"Jet4({terms})"


def projective_normalize(T: np.ndarray) -> np.ndarray:
    """Scale a 4x4 matrix so its largest-magnitude entry is +-1."""
    T = np.asarray(T, dtype=float)
    if abs(np.linalg.det(T)) < 1e-300:
        raise ValueError("singular projective map")
    return T / np.max(np.abs(T))


def regraph(jet: Jet4, T: np.ndarray, tol: float = 1e-12) -> Jet4:
    """4-jet of the image of the graph of ``jet`` under the projective map ``T``.

    The parametrized graph ``(1, x, y, z(x, y))`` is pushed through ``T``, the
    affine chart is taken by dividing the series by the 0th component, and
    the image is regraphed over the new ``(x, y)`` by series inversion.
    """
    T = np.asarray(T, dtype=float)
    scale = np.max(np.abs(T))
    if np.any(np.abs(T[1:, 0]) > tol * scale) or abs(T[0, 0]) <= tol * scale:
        raise OriginNotFixed("map does not fix the chart origin")
    one = S.constant(1.0)
    coords = [one, S.variable(0), S.variable(1), jet.array]
    W = [sum(T[i, j] * coords[j] for j in range(4)) for i in range(4)]
    inv0 = S.reciprocal(W[0])
    X, Y, Z = (S.mul(W[i], inv0) for i in (1, 2, 3))
    A = S.linear_part(X, Y)
    if abs(np.linalg.det(A)) <= tol * max(1.0, np.max(np.abs(A))) ** 2:
        raise NotAGraph("image tangent plane contains the z-direction")
    if abs(Z[1, 0]) > 1e-9 or abs(Z[0, 1]) > 1e-9:
        raise NotAGraph("image tangent plane is not z = 0")
    P, Q = S.invert(X, Y)
    Zt = S.compose(Z, P, Q)
    Zt[S.DEGREE < 2] = 0.0
    return Jet4(Zt)


# -- the 7-dimensional stabilizer of the 2-jet z = xy -------------------------

def _unit(i, j):
    E = np.zeros((4, 4))
    E[i, j] = 1.0
    return E


#: Matrix realizations (acting on (x0, x1, x2, x3)) of
#: x d/dx + z d/dz, y d/dy + z d/dz, z d/dx, z d/dy, xE, yE, zE.
GENERATORS = (
    np.diag([0.0, 1.0, 0.0, 1.0]),
    np.diag([0.0, 0.0, 1.0, 1.0]),
    _unit(1, 3),
    _unit(2, 3),
    -_unit(0, 1),
    -_unit(0, 2),
    -_unit(0, 3),
)

GENERATOR_NAMES = ("x_dx+z_dz", "y_dy+z_dz", "z_dx", "z_dy", "xE", "yE", "zE")


@dataclass(frozen=True)
class StabilizerParams:
    """Coefficients on the seven stabilizer generators."""

    lam1: float = 0.0
    lam2: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    nu1: float = 0.0
    nu2: float = 0.0
    nu3: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.lam1, self.lam2, self.mu1, self.mu2,
                         self.nu1, self.nu2, self.nu3])

    @classmethod
    def from_array(cls, p) -> "StabilizerParams":
        return cls(*[float(x) for x in p])


def algebra_element(params) -> np.ndarray:
    p = params.as_array() if isinstance(params, StabilizerParams) else np.asarray(params, float)
    return sum(pi * G for pi, G in zip(p, GENERATORS))


def stabilizer_flow(params) -> np.ndarray:
    """Time-one flow of the stabilizer element with the given coefficients."""
    return projective_normalize(expm(algebra_element(params)))


def diagonal_map(p: float, q: float) -> np.ndarray:
    """``(x, y, z) -> (p x, q y, p q z)``."""
    return np.diag([1.0, p, q, p * q])


def inversion_map(lam: float, mu: float, nu: float) -> np.ndarray:
    """``(x, y, z) -> (x, y, z) / (1 - lam x - mu y - nu z)``."""
    T = np.eye(4)
    T[0, 1:] = -lam, -mu, -nu
    return T


def shear_map(lam: float, mu: float) -> np.ndarray:
    """Flow of ``lam (z d/dx - yE) + mu (z d/dy - xE)``."""
    return expm(lam * (GENERATORS[2] - GENERATORS[5]) + mu * (GENERATORS[3] - GENERATORS[4]))


# -- normal forms ----------------------------------------------------------

GENERIC, FLECNODAL, QUADRATIC = "generic", "flecnodal", "quadratic"


@dataclass
class NormalForm:
    """Result of the normal-form reduction.

    ``invariants`` holds ``(I, J)``, ``(It,)`` or ``(Ib, Jb)`` by case;
    ``signs`` is ``(sign,)`` of the ``x^3 y`` term in the flecnodal case and the
    sign pair of ``(x^3 y, x y^3)`` in the quadratic case.  ``transform`` maps
    the input jet to ``reduced``.
    """

    case: str
    invariants: tuple
    signs: tuple = ()
    transform: np.ndarray = field(default_factory=lambda: np.eye(4))
    reduced: Jet4 | None = None
    oriented: bool = True

    @property
    def I(self):
        return self.invariants[0]

    @property
    def J(self):
        return self.invariants[-1]


def _cubic(jet: Jet4):
    c = jet.array
    return 3 * c[3, 0], 3 * c[0, 3], 2 * c[2, 1], 2 * c[1, 2]


def _polish(jet, T, targets, build, x0, iters=8):
    """Newton on group parameters so that selected coefficients vanish.

    ``build(params)`` returns a matrix, ``targets(jet)`` the coefficients to
    kill.  The starting guess comes from the closed-form infinitesimal
    solve; the finite actions used here are affine in the parameters up to
    rounding, so this converges in one or two steps.
    """
    x = np.asarray(x0, dtype=float)
    for _ in range(iters):
        M = build(x)
        r = targets(regraph(jet, M))
        if np.max(np.abs(r)) < 1e-14:
            break
        h = 1e-6
        Jm = np.empty((len(r), len(x)))
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = h
            Jm[:, i] = (targets(regraph(jet, build(x + e)))
                        - targets(regraph(jet, build(x - e)))) / (2 * h)
        x = x - np.linalg.solve(Jm, r)
    M = build(x)
    return regraph(jet, M), M @ T


def classify(jet: Jet4, tol: float = ADAPT_TOL) -> str:
    a, b, c, d = _cubic(jet)
    scale = max(1.0, abs(a), abs(b), abs(c), abs(d))
    za = abs(a) < tol * scale
    zb = abs(b) < tol * scale
    if za and zb:
        return QUADRATIC
    if za or zb:
        return FLECNODAL
    return GENERIC


def normal_form(jet: Jet4, oriented: bool = True, case: str | None = None,
                tol: float = ADAPT_TOL) -> NormalForm:
    """Reduce an adapted jet to its projective normal form.

    Stages: kill ``c, d`` with ``xE, yE``; rescale with a diagonal map; kill
    the ``x^2 y^2`` coefficient with ``zE``; kill the remaining reducible
    quartic coefficients with the flows of ``z d/dx - yE`` and ``z d/dy - xE``.

    With ``oriented`` only coorientation-preserving rescalings (``p q > 0``)
    are used, so the signs of the flecnodal and quadratic invariants are
    meaningful; otherwise they are normalized to ``It >= 0`` resp. ``Ib >= 0``.
    ``case`` forces the classification (the cubic coefficients that must
    vanish are then set to zero), which is how callers that located a
    quadratic point numerically avoid the tolerance test.
    """
    if not jet.is_adapted(tol * 100):
        raise NotAdapted("normal_form expects z = xy + O(3)")
    case = case or classify(jet, tol)
    arr = jet.array.copy()
    arr[2, 0] = arr[0, 2] = 0.0
    arr[1, 1] = 1.0
    if case == QUADRATIC:
        arr[3, 0] = arr[0, 3] = 0.0
    elif case == FLECNODAL:
        a, b = 3 * arr[3, 0], 3 * arr[0, 3]
        if abs(a) > abs(b):
            # put the vanishing coefficient on x: swap axes (x, y) -> (y, x)
            arr = arr.T.copy()
            swapped = True
        else:
            swapped = False
        arr[3, 0] = 0.0
    jet0 = Jet4(arr)
    T = np.eye(4)
    if case == FLECNODAL and swapped:
        T = np.array([[1.0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])

    # stage 1: kill c and d exactly (their change under (x,y,z)/(1-lx-my) is -2l, -2m)
    _, _, c, d = _cubic(jet0)
    M = inversion_map(c / 2, d / 2, 0.0)
    j1 = regraph(jet0, M)
    T = M @ T
    a, b, _, _ = _cubic(j1)
    al, be, ga, de, ep = j1.quartic

    # stage 2: diagonal rescaling (x, y, z) -> (p x, q y, p q z)
    if case == GENERIC:
        p = np.cbrt(a * a * b)
        q = np.cbrt(a * b * b)
    elif case == FLECNODAL:
        if abs(be) < tol:
            raise DegenerateQuadraticPoint("x^3 y coefficient vanishes on the flecnodal curve")
        p = np.sign(b) * np.sqrt(3 * abs(be))
        q = np.sqrt(b * p)
        if not oriented and al * q / p ** 3 < 0:
            q = -q
        elif oriented:
            q = q * np.sign(p)
    else:
        if abs(be * de) < tol * tol or abs(be) < tol or abs(de) < tol:
            raise DegenerateQuadraticPoint("beta * delta = 0: normal form does not exist")
        p = np.sqrt(3 * abs(be))
        q = np.sqrt(3 * abs(de))
        if not oriented and al * q / p ** 3 < 0:
            q = -q
    D = diagonal_map(p, q)
    j2 = regraph(j1, D)
    T = D @ T

    # stage 3: kill x^2 y^2 with zE (exact shift by -nu)
    Z = inversion_map(0.0, 0.0, j2.quartic[2])
    j3 = regraph(j2, Z)
    T = Z @ T

    # stage 4: remaining reducible quartic terms
    if case == GENERIC:
        _, be3, ga3, de3, _ = j3.quartic
        x0 = [1.5 * be3, 1.5 * de3, ga3]

        def build(x):
            return inversion_map(0, 0, x[2]) @ shear_map(x[0], x[1])

        def targets(j):
            return j.quartic[[1, 2, 3]]

        j4, T = _polish(j3, T, targets, build, x0)
    elif case == FLECNODAL:
        _, _, ga3, de3, ep3 = j3.quartic
        x0 = [-3 * ep3, 1.5 * de3, ga3]

        def build(x):
            return inversion_map(0, 0, x[2]) @ shear_map(x[0], x[1])

        def targets(j):
            return j.quartic[[2, 3, 4]]

        j4, T = _polish(j3, T, targets, build, x0)
    else:
        j4 = j3

    q4 = j4.quartic
    T = projective_normalize(T)
    if case == GENERIC:
        return NormalForm(GENERIC, (12 * q4[0], 12 * q4[4]), (), T, j4, oriented)
    if case == FLECNODAL:
        return NormalForm(FLECNODAL, (12 * q4[0],), (int(np.sign(q4[1])),), T, j4, oriented)
    sx = int(np.sign(q4[1]))
    sy = int(np.sign(q4[3])) * sx
    return NormalForm(QUADRATIC, (12 * q4[0], 12 * q4[4]), (sx, sy), T, j4, oriented)


def orientation_flip(axis: str) -> np.ndarray:
    """``(x, z) -> (-x, -z)`` for axis 'x', ``(y, z) -> (-y, -z)`` for 'y'."""
    if axis == "x":
        return diagonal_map(-1.0, 1.0)
    return diagonal_map(1.0, -1.0)
