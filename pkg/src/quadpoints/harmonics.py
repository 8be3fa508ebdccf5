"""
Polynomials in the homogeneous coordinates restricted to the hyperboloid.

The coordinates ``x = c(u) (x) c(v)``, ``c(t) = (cos t/2, sin t/2)``, are
expanded as Laurent polynomials in ``w = e^(iu/2)``, ``z = e^(iv/2)``, so the
restriction of a monomial of even degree ``d`` is an exact trigonometric
polynomial of bidegree ``<= (d/2, d/2)`` with dyadic coefficients.  The
evaluation matrix of degree ``d`` has one column per monomial and one row per
real Fourier coordinate (real and imaginary parts of ``c_{n,m}``).

Degree 2 gives the first harmonics (rank 9, kernel the quadric
``x0 x3 - x1 x2``), degree 4 the second harmonics (rank 25).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb

import numpy as np
from scipy.signal import convolve2d

from .errors import NotFirstHarmonic, NotSecondHarmonic
from .trigpoly import HarmonicSubspace, TrigPoly2

RANK_TOL = 1e-8
FIT_TOL = 1e-10

# Laurent coefficients of (cos t/2, sin t/2) in e^(it/2), exponents -1, 0, 1
_COS = np.array([0.5, 0.0, 0.5], dtype=complex)
_SIN = np.array([0.5j, 0.0, -0.5j], dtype=complex)
_COORD = [np.outer(a, b) for a in (_COS, _SIN) for b in (_COS, _SIN)]


@dataclass(frozen=True)
class MonomialBasis:
    """Degree-``d`` monomials in ``x0..x3``, as sorted index tuples."""

    degree: int

    @property
    def monomials(self) -> list[tuple[int, ...]]:
        return list(combinations_with_replacement(range(4), self.degree))

    @property
    def dimension(self) -> int:
        return len(self.monomials)

    @staticmethod
    def expected_dimension(d: int) -> int:
        return comb(d + 3, 3)

    def index(self, mono) -> int:
        return self.monomials.index(tuple(sorted(mono)))

    def label(self, mono) -> str:
        return "*".join(f"x{i}" for i in mono)


def laurent(mono) -> np.ndarray:
    """Laurent coefficients of a monomial, indexed by exponents ``-d..d``."""
    out = np.ones((1, 1), dtype=complex)
    for i in mono:
        out = convolve2d(out, _COORD[i])
    return out


@dataclass
class EvaluationMatrix:
    """Exact evaluation map from degree-``d`` forms to Fourier coefficients.

    ``complex_matrix[k, j]`` is the coefficient ``c_{n,m}`` (``(n, m)`` from
    ``frequencies[k]``) of monomial ``j``; ``matrix`` stacks real and imaginary
    parts so ranks are real ranks.
    """

    basis: MonomialBasis
    frequencies: list[tuple[int, int]]
    complex_matrix: np.ndarray

    @classmethod
    def build(cls, degree: int) -> "EvaluationMatrix":
        if degree % 2:
            raise ValueError("odd-degree forms are not functions on the torus")
        basis = MonomialBasis(degree)
        h = degree // 2
        freqs = [(n, m) for n in range(-h, h + 1) for m in range(-h, h + 1)]
        M = np.zeros((len(freqs), basis.dimension), dtype=complex)
        for j, mono in enumerate(basis.monomials):
            L = laurent(mono)
            # exponents -d..d in steps of 1, only even ones occur
            M[:, j] = [L[2 * n + degree, 2 * m + degree] for n, m in freqs]
        return cls(basis, freqs, M)

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.complex_matrix.real, self.complex_matrix.imag])

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def rank(self, tol: float = RANK_TOL) -> int:
        return numeric_rank(self.singular_values(), tol)

    def kernel(self, tol: float = RANK_TOL) -> np.ndarray:
        """Orthonormal kernel basis, one form per row."""
        _, s, Vt = np.linalg.svd(self.matrix)
        r = numeric_rank(s, tol)
        return Vt[r:]

    def target(self, f: TrigPoly2) -> np.ndarray:
        c = np.array([f.coeff(n, m) for n, m in self.frequencies])
        return np.concatenate([c.real, c.imag])

    def apply(self, coeffs) -> TrigPoly2:
        c = self.complex_matrix @ np.asarray(coeffs, dtype=float)
        return TrigPoly2({nm: v for nm, v in zip(self.frequencies, c)})


def numeric_rank(s, tol: float = RANK_TOL) -> int:
    s = np.asarray(s)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def spectral_gap(s, tol: float = RANK_TOL) -> float:
    """Orders of magnitude between the last kept and first dropped singular value."""
    s = np.asarray(s)
    r = numeric_rank(s, tol)
    if r == len(s):
        return np.inf
    return float(np.log10(s[r - 1] / max(s[r], 1e-300)))


_EVAL: dict[int, EvaluationMatrix] = {}


def evaluation_matrix(degree: int) -> EvaluationMatrix:
    if degree not in _EVAL:
        _EVAL[degree] = EvaluationMatrix.build(degree)
    return _EVAL[degree]


def _solve(E: EvaluationMatrix, f: TrigPoly2) -> tuple[np.ndarray, float]:
    y = E.target(f)
    coef, *_ = np.linalg.lstsq(E.matrix, y, rcond=None)
    res = float(np.max(np.abs(E.matrix @ coef - y))) if y.size else 0.0
    return coef, res


def form_matrix(coeffs) -> np.ndarray:
    """Symmetric matrix of a quadratic form given by monomial coefficients."""
    A = np.zeros((4, 4))
    for c, (i, j) in zip(coeffs, MonomialBasis(2).monomials):
        if i == j:
            A[i, i] = c
        else:
            A[i, j] = A[j, i] = c / 2
    return A


def form_coefficients(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return np.array([A[i, j] if i == j else 2 * A[i, j]
                     for i, j in MonomialBasis(2).monomials])


QUADRIC = form_matrix([1.0 if m == (0, 3) else -1.0 if m == (1, 2) else 0.0
                       for m in MonomialBasis(2).monomials])
SPHERE = np.eye(4)


def fit_quadratic_form(f: TrigPoly2, tol: float = FIT_TOL) -> np.ndarray:
    """Least-norm symmetric ``A`` with ``f = x^T A x`` on the parametrized torus.

    The solution is unique up to multiples of :data:`QUADRIC`.
    """
    if not f.in_subspace(HarmonicSubspace.FIRST):
        raise NotFirstHarmonic("f has harmonics outside bidegree (1, 1)")
    coef, res = _solve(evaluation_matrix(2), f)
    if res > tol:
        raise NotFirstHarmonic(f"no quadratic form fits (residual {res:.3g})")
    return form_matrix(coef)


def quadratic_form_function(A) -> TrigPoly2:
    """The restriction ``x^T A x`` as a trigonometric polynomial."""
    return evaluation_matrix(2).apply(form_coefficients(A))


def equal_modulo_quadric(A, B, tol: float = 1e-12) -> bool:
    """Whether ``A - B`` is a multiple of the hyperboloid's form."""
    D = np.asarray(A, float) - np.asarray(B, float)
    t = np.sum(D * QUADRIC) / np.sum(QUADRIC * QUADRIC)
    return bool(np.max(np.abs(D - t * QUADRIC)) < tol)


def quartic_membership(f: TrigPoly2, tol: float = FIT_TOL) -> np.ndarray:
    """Least-norm quartic coefficients (over ``MonomialBasis(4)``) restricting to ``f``."""
    if not f.in_subspace(HarmonicSubspace.SECOND):
        raise NotSecondHarmonic("f has harmonics outside bidegree (2, 2)")
    coef, res = _solve(evaluation_matrix(4), f)
    if res > tol:
        raise NotSecondHarmonic(f"no quartic form fits (residual {res:.3g})")
    return coef


# -- polynomials as monomial-coefficient vectors -------------------------------------

def poly_product(p: dict, q: dict) -> dict:
    out: dict = {}
    for a, ca in p.items():
        for b, cb in q.items():
            key = tuple(sorted(a + b))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def poly_vector(p: dict, degree: int) -> np.ndarray:
    basis = MonomialBasis(degree)
    v = np.zeros(basis.dimension)
    for mono, c in p.items():
        v[basis.index(mono)] += c
    return v


QUADRIC_POLY = {(0, 3): 1.0, (1, 2): -1.0}
SPHERE_POLY = {(i, i): 1.0 for i in range(4)}


def ideal_component(generators=(QUADRIC_POLY, SPHERE_POLY), degree: int = 4) -> np.ndarray:
    """Spanning set (rows) of the degree-``degree`` part of an ideal of quadrics."""
    rows = []
    for g in generators:
        for mono in MonomialBasis(degree - 2).monomials:
            rows.append(poly_vector(poly_product(g, {mono: 1.0}), degree))
    return np.array(rows)


@dataclass
class DimensionReport:
    rank2: int
    rank4: int
    kernel2: int
    kernel4: int
    ideal4: int
    moduli_from_functions: int
    moduli_from_ideal: int
    dim2: int
    dim4: int
    gap2: float
    gap4: float
    gap_ideal: float
    kernel2_generator_error: float
    kernel4_contains_quadric_multiples: bool

    def as_dict(self) -> dict:
        return {k: (v if not isinstance(v, float) else round(v, 6))
                for k, v in self.__dict__.items()}


def dimension_report(tol: float = RANK_TOL) -> DimensionReport:
    """Ranks of the evaluation maps, the ideal ``<x0x3 - x1x2, sum x_i^2>`` in degree 4,
    and the two counts of the quartic moduli."""
    E2, E4 = evaluation_matrix(2), evaluation_matrix(4)
    s2, s4 = E2.singular_values(), E4.singular_values()
    r2, r4 = numeric_rank(s2, tol), numeric_rank(s4, tol)
    I = ideal_component()
    sI = np.linalg.svd(I, compute_uv=False)
    rI = numeric_rank(sI, tol)
    # x0x3 - x1x2 evaluates to zero exactly
    gen_err = float(np.max(np.abs(E2.matrix @ form_coefficients(QUADRIC))))
    # every quadric multiple lies in the degree-4 kernel
    qm = ideal_component((QUADRIC_POLY,))
    contains = bool(np.max(np.abs(E4.matrix @ qm.T)) < 1e-14)
    d2, d4 = E2.basis.dimension, E4.basis.dimension
    return DimensionReport(
        rank2=r2, rank4=r4, kernel2=d2 - r2, kernel4=d4 - r4, ideal4=rI,
        moduli_from_functions=r4 - r2 - 1, moduli_from_ideal=d4 - rI - 1,
        dim2=d2, dim4=d4, gap2=spectral_gap(s2, tol), gap4=spectral_gap(s4, tol),
        gap_ideal=spectral_gap(sI, tol), kernel2_generator_error=gen_err,
        kernel4_contains_quadric_multiples=contains)
