"""
Bivariate real trigonometric polynomials on the torus [0, 2pi)^2.

A polynomial is stored as a dense complex coefficient table
``c[n + N, m + M]`` for frequencies ``|n| <= N``, ``|m| <= M`` so that

    f(u, v) = sum_{n, m} c_{n, m} exp(i (n u + m v)),

with Hermitian symmetry ``c_{-n, -m} = conj(c_{n, m})``.  All operations
used downstream (differentiation, the operators ``d^3 + d`` in either
variable, projections onto harmonic subspaces, translations) act
coefficient-wise and are exact.
"""

from __future__ import annotations

import enum
import json
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import brentq

from .errors import IdenticallyZero

ZERO_TOL = 1e-14

U, V = "u", "v"


def _normalize_axis(axis) -> str:
    a = str(axis).lower()
    if a not in (U, V):
        raise ValueError(f"axis must be 'u' or 'v', got {axis!r}")
    return a


class HarmonicSubspace(enum.Enum):
    """Coordinate subspaces of the Fourier coefficient space."""

    FIRST = "first"            # |n|, |m| <= 1
    SECOND = "second"          # |n|, |m| <= 2
    MIXED_A = "mixed_a"        # |n|, |m| <= 2 without the corners (+-2, +-2)
    HOMOGENEOUS_SECOND = "homogeneous_second"  # only the corners (+-2, +-2)

    def contains(self, n: int, m: int) -> bool:
        n, m = abs(n), abs(m)
        if self is HarmonicSubspace.FIRST:
            return n <= 1 and m <= 1
        if self is HarmonicSubspace.SECOND:
            return n <= 2 and m <= 2
        if self is HarmonicSubspace.MIXED_A:
            return n <= 2 and m <= 2 and not (n == 2 and m == 2)
        return n == 2 and m == 2

    def indices(self) -> list[tuple[int, int]]:
        return [(n, m) for n in range(-2, 3) for m in range(-2, 3)
                if self.contains(n, m)]

    @property
    def dimension(self) -> int:
        """Real dimension of the space of real polynomials in the subspace."""
        return len(self.indices())

    @property
    def dimension_mod_first(self) -> int:
        """Real dimension after quotienting by the first harmonics it contains."""
        first = sum(1 for n, m in self.indices() if abs(n) <= 1 and abs(m) <= 1)
        return self.dimension - first


class TrigPoly2:
    """Real-valued bivariate trigonometric polynomial.

    Parameters
    ----------
    coeffs : mapping (n, m) -> complex, optional
        Fourier coefficients.  Entries whose conjugate partner ``(-n, -m)``
        is absent are mirrored; afterwards the table is symmetrized by
        averaging each pair, so slightly non-Hermitian input is accepted.
    """

    __slots__ = ("_c", "_N", "_M")

    def __init__(self, coeffs: Mapping[tuple[int, int], complex] | None = None):
        coeffs = dict(coeffs or {})
        filled = dict(coeffs)
        for (n, m), val in coeffs.items():
            if (-n, -m) not in coeffs:
                filled[(-n, -m)] = np.conj(val)
        N = max([abs(n) for n, _ in filled] + [0])
        M = max([abs(m) for _, m in filled] + [0])
        c = np.zeros((2 * N + 1, 2 * M + 1), dtype=complex)
        for (n, m), val in filled.items():
            c[n + N, m + M] += complex(val)
        self._set(c)

    def _set(self, c: np.ndarray) -> None:
        c = 0.5 * (c + np.conj(c[::-1, ::-1]))
        c.setflags(write=False)
        self._c = c
        self._N = (c.shape[0] - 1) // 2
        self._M = (c.shape[1] - 1) // 2

    @classmethod
    def from_array(cls, c: np.ndarray) -> "TrigPoly2":
        """Build from a centred ``(2N+1, 2M+1)`` coefficient table."""
        c = np.asarray(c, dtype=complex)
        if c.ndim != 2 or c.shape[0] % 2 == 0 or c.shape[1] % 2 == 0:
            raise ValueError("coefficient table must have odd shape (2N+1, 2M+1)")
        obj = cls.__new__(cls)
        obj._set(c.copy())
        return obj

    @classmethod
    def cos(cls, n: int, m: int, amp: float = 1.0) -> "TrigPoly2":
        """``amp * cos(n u + m v)``."""
        if n == 0 and m == 0:
            return cls({(0, 0): amp})
        return cls({(n, m): amp / 2, (-n, -m): amp / 2})

    @classmethod
    def sin(cls, n: int, m: int, amp: float = 1.0) -> "TrigPoly2":
        """``amp * sin(n u + m v)``."""
        if n == 0 and m == 0:
            return cls()
        return cls({(n, m): -0.5j * amp, (-n, -m): 0.5j * amp})

    @classmethod
    def constant(cls, value: float) -> "TrigPoly2":
        return cls({(0, 0): value})

    @classmethod
    def from_real_terms(cls, terms: Iterable[tuple[str, int, int, float]]) -> "TrigPoly2":
        """Sum of ``(kind, n, m, amp)`` terms with kind ``'cos'`` or ``'sin'``."""
        out = cls()
        for kind, n, m, amp in terms:
            if kind == "cos":
                out = out + cls.cos(n, m, amp)
            elif kind == "sin":
                out = out + cls.sin(n, m, amp)
            else:
                raise ValueError(f"unknown term kind {kind!r}")
        return out

    # -- inspection ---------------------------------------------------------

    @property
    def degree(self) -> tuple[int, int]:
        return self._N, self._M

    @property
    def table(self) -> np.ndarray:
        return self._c

    def coeff(self, n: int, m: int) -> complex:
        if abs(n) > self._N or abs(m) > self._M:
            return 0j
        return complex(self._c[n + self._N, m + self._M])

    @property
    def coeffs(self) -> dict[tuple[int, int], complex]:
        """Non-zero coefficients as a sparse mapping."""
        out = {}
        for i, j in zip(*np.nonzero(np.abs(self._c) > 0)):
            out[(int(i) - self._N, int(j) - self._M)] = complex(self._c[i, j])
        return out

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._c))) if self._c.size else 0.0

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return self.max_abs() < tol

    def trimmed(self, tol: float = 0.0) -> "TrigPoly2":
        """Drop outer frequency rows/columns whose coefficients are <= tol."""
        c = self._c
        mag = np.abs(c) > tol
        if not mag.any():
            return TrigPoly2()
        rows = np.nonzero(mag.any(axis=1))[0] - self._N
        cols = np.nonzero(mag.any(axis=0))[0] - self._M
        N = int(np.max(np.abs(rows)))
        M = int(np.max(np.abs(cols)))
        return TrigPoly2.from_array(
            c[self._N - N:self._N + N + 1, self._M - M:self._M + M + 1])

    def _padded(self, N: int, M: int) -> np.ndarray:
        out = np.zeros((2 * N + 1, 2 * M + 1), dtype=complex)
        out[N - self._N:N + self._N + 1, M - self._M:M + self._M + 1] = self._c
        return out

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TrigPoly2):
            other = TrigPoly2.constant(float(other))
        N = max(self._N, other._N)
        M = max(self._M, other._M)
        return TrigPoly2.from_array(self._padded(N, M) + other._padded(N, M))

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly2.from_array(-self._c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TrigPoly2):
            from scipy.signal import convolve2d
            return TrigPoly2.from_array(convolve2d(self._c, other._c))
        return TrigPoly2.from_array(self._c * float(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TrigPoly2):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self):
        return f"TrigPoly2(degree={self.degree}, coeffs={self.coeffs})"

    # -- evaluation ---------------------------------------------------------

    def __call__(self, u, v):
        return self.evaluate(u, v)

    def evaluate(self, u, v):
        """Value at ``(u, v)``; broadcasts over array arguments."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        n = np.arange(-self._N, self._N + 1)
        m = np.arange(-self._M, self._M + 1)
        eu = np.exp(1j * u[..., None] * n)
        ev = np.exp(1j * v[..., None] * m)
        val = np.einsum("...n,nm,...m->...", eu, self._c, ev)
        return val.real if val.ndim else float(val.real)

    def evaluate_grid(self, us, vs) -> np.ndarray:
        """Values on the tensor grid ``us x vs``; result indexed ``[i_u, i_v]``."""
        n = np.arange(-self._N, self._N + 1)
        m = np.arange(-self._M, self._M + 1)
        eu = np.exp(1j * np.outer(np.asarray(us, dtype=float), n))
        ev = np.exp(1j * np.outer(np.asarray(vs, dtype=float), m))
        return (eu @ self._c @ ev.T).real

    # -- exact operators ----------------------------------------------------

    def _multiplier(self, fu, fv) -> "TrigPoly2":
        n = np.arange(-self._N, self._N + 1)[:, None]
        m = np.arange(-self._M, self._M + 1)[None, :]
        return TrigPoly2.from_array(self._c * fu(n) * fv(m))

    def diff(self, du: int = 0, dv: int = 0) -> "TrigPoly2":
        """Partial derivative of order ``du`` in u and ``dv`` in v."""
        return self._multiplier(lambda n: (1j * n) ** du, lambda m: (1j * m) ** dv)

    def sturm_operator(self, axis) -> "TrigPoly2":
        """``f_uuu + f_u`` (axis 'u') or ``f_vvv + f_v`` (axis 'v')."""
        axis = _normalize_axis(axis)
        mult = lambda k: (1j * k) ** 3 + 1j * k  # noqa: E731
        one = lambda k: np.ones_like(k)  # noqa: E731
        if axis == U:
            return self._multiplier(mult, one)
        return self._multiplier(one, mult)

    def project(self, subspace: HarmonicSubspace) -> "TrigPoly2":
        n = np.arange(-self._N, self._N + 1)[:, None]
        m = np.arange(-self._M, self._M + 1)[None, :]
        mask = np.vectorize(subspace.contains)(n, m)
        return TrigPoly2.from_array(np.where(mask, self._c, 0))

    def in_subspace(self, subspace: HarmonicSubspace, tol: float = ZERO_TOL) -> bool:
        return (self - self.project(subspace)).is_zero(tol)

    def translate(self, u0: float, v0: float) -> "TrigPoly2":
        """The polynomial ``(u, v) -> f(u + u0, v + v0)``."""
        return self._multiplier(lambda n: np.exp(1j * n * u0),
                                lambda m: np.exp(1j * m * v0))

    def transpose(self) -> "TrigPoly2":
        """The polynomial ``(u, v) -> f(v, u)``."""
        return TrigPoly2.from_array(self._c.T)

    def depends_on_v(self, tol: float = ZERO_TOL) -> bool:
        mask = np.ones(self._c.shape, bool)
        mask[:, self._M] = False
        return bool(np.any(np.abs(self._c[mask]) >= tol))

    # -- serialization ------------------------------------------------------

    def to_records(self) -> list[dict]:
        """Coefficient records ``{"n", "m", "re", "im"}`` (all non-zero entries)."""
        return [{"n": n, "m": m, "re": c.real, "im": c.imag}
                for (n, m), c in sorted(self.coeffs.items())]

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "TrigPoly2":
        coeffs: dict[tuple[int, int], complex] = {}
        for r in records:
            key = (int(r["n"]), int(r["m"]))
            coeffs[key] = coeffs.get(key, 0) + complex(float(r.get("re", 0.0)),
                                                       float(r.get("im", 0.0)))
        return cls(coeffs)

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_json(cls, text: str) -> "TrigPoly2":
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("coeffs", data.get("f"))
        return cls.from_records(data)


def random_real(subspace: HarmonicSubspace, rng: np.random.Generator,
                low: float = -1.0, high: float = 1.0) -> TrigPoly2:
    """Real polynomial in ``subspace`` with cos/sin amplitudes uniform on ``[low, high]``.

    Amplitudes are drawn in a fixed order (``n`` then ``m``, cos before sin)
    so a seeded generator gives a reproducible polynomial.
    """
    terms = []
    for n, m in subspace.indices():
        if n < 0 or (n == 0 and m < 0):
            continue
        terms.append(("cos", n, m, rng.uniform(low, high)))
        if (n, m) != (0, 0):
            terms.append(("sin", n, m, rng.uniform(low, high)))
    return TrigPoly2.from_real_terms(terms)


def evaluate(f: TrigPoly2, p) -> float:
    """Value of ``f`` at the torus point ``p = (u, v)``."""
    return float(f.evaluate(p[0], p[1]))


def sturm_operator(f: TrigPoly2, axis) -> TrigPoly2:
    return f.sturm_operator(axis)


def project(f: TrigPoly2, subspace: HarmonicSubspace) -> TrigPoly2:
    return f.project(subspace)


def circle_poly(cos: Mapping[int, float] | None = None,
                sin: Mapping[int, float] | None = None) -> TrigPoly2:
    """Univariate polynomial in u: ``sum a_k cos(k u) + sum b_k sin(k u)``."""
    out = TrigPoly2()
    for k, a in (cos or {}).items():
        out = out + TrigPoly2.cos(k, 0, a)
    for k, b in (sin or {}).items():
        out = out + TrigPoly2.sin(k, 0, b)
    return out


def circle_zeros(g: TrigPoly2, samples: int | None = None) -> np.ndarray:
    """Distinct zeros of a univariate polynomial in u on [0, 2pi).

    The circle is scanned on a uniform grid and every sign change is
    refined by bisection (Brent).  Grid samples that hit zero exactly are
    reported as roots.  Zeros of even multiplicity are not detected.
    """
    if g.depends_on_v():
        raise ValueError("circle_zeros expects a polynomial in u only")
    if g.is_zero():
        raise IdenticallyZero("polynomial vanishes identically")
    K = g.degree[0]
    S = samples or max(4096, 64 * (2 * K + 1))
    xs = 2 * np.pi * np.arange(S + 1) / S
    vals = g.evaluate(xs, 0.0)
    vals[-1] = vals[0]
    roots = []
    for i in range(S):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(xs[i])
        elif a * b < 0:
            roots.append(brentq(lambda x: float(g.evaluate(x, 0.0)), xs[i], xs[i + 1],
                                xtol=1e-14))
    return np.mod(np.array(sorted(roots)), 2 * np.pi)


def circle_zero_count(g: TrigPoly2, samples: int | None = None) -> int:
    """Number of distinct zeros of ``g`` on the circle."""
    return int(len(circle_zeros(g, samples)))
