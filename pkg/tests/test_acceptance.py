"""Acceptance suite: one test per criterion, each recorded as PASS or FAIL in the
terminal summary."""

import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import ACCEPTANCE
from quadpoints import harmonics as H
from quadpoints import localgeom as LG
from quadpoints import wilczynski as W
from quadpoints import zeroset as Z
from quadpoints.hyperboloid import PerturbedHyperboloid
from quadpoints.jets import (FLECNODAL, GENERATORS, GENERIC, QUADRATIC, QUARTIC_KEYS, Jet4,
                             StabilizerParams, normal_form, regraph, stabilizer_flow)
from quadpoints.trigpoly import HarmonicSubspace, TrigPoly2, circle_poly, circle_zero_count, \
    random_real

C, S = TrigPoly2.cos, TrigPoly2.sin
EPSILONS = (1e-3, 5e-4)


@contextmanager
def criterion(n, label):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        ACCEPTANCE[n] = ("FAIL", label, time.perf_counter() - t0)
        raise
    ACCEPTANCE[n] = ("PASS", label, time.perf_counter() - t0)


def _patch(f, eps):
    return LG.SurfacePatch.from_hyperboloid(PerturbedHyperboloid(f, eps))


def _example_c(eps_c=0.1):
    return C(2, -1) + C(2, -2, eps_c)


# -- 1 -------------------------------------------------------------------------------

def test_criterion_1_example_c():
    with criterion(1, "example C: 8 simple solutions at the hand-derived points"):
        hand = np.array([(u, v) for u in np.arange(4) * np.pi / 2 for v in (0.0, np.pi)])
        t0 = time.perf_counter()
        sols = Z.solve_system(_example_c())
        elapsed = time.perf_counter() - t0
        assert len(sols) == 8 and all(s.simple for s in sols)
        assert elapsed < 5.0
        # shrinking the perturbation keeps the same 8 points
        for eps_c in (0.1, 1e-2, 1e-3, 1e-4):
            pts = np.array([s.point for s in Z.solve_system(_example_c(eps_c))])
            assert len(pts) == 8
            assert max(min(Z.torus_distance(p, h) for h in hand) for p in pts) < 1e-8


# -- 2 -------------------------------------------------------------------------------

def test_criterion_2_homogeneous_second_harmonics():
    with criterion(2, "homogeneous second harmonics: 32 solutions, closed form, discriminants"):
        rng = np.random.default_rng(2)
        t0 = time.perf_counter()
        for _ in range(50):
            alpha = rng.uniform(-1, 1, (2, 2))
            sols = Z.solve_system(Z.homogeneous_second(alpha))
            assert len(sols) == 32
            assert Z.match_solutions(sols, Z.closed_form_homogeneous(alpha)) < 1e-8
        disc = [Z.homogeneous_discriminant(rng.uniform(-1, 1, (2, 2))) for _ in range(1000)]
        assert min(disc) > 0
        assert time.perf_counter() - t0 < 60.0


# -- 3 -------------------------------------------------------------------------------

LU_SETS = {"2x(1,2)", "2x(1,-2)", "4x(0,1)"}
LV_SETS = {"2x(2,1)", "2x(2,-1)", "4x(1,0)"}


def test_criterion_3_mixed_second_harmonics():
    with criterion(3, "mixed second harmonics: >= 12 solutions, classes, bounds"):
        rng = np.random.default_rng(3)
        t0 = time.perf_counter()
        bounds = set()
        for _ in range(50):
            f = random_real(HarmonicSubspace.MIXED_A, rng)
            sols = Z.solve_system(f)
            assert len(sols) >= 12
            Lu, Lv = Z.sturm_pair(f)
            cu, cv = Z.trace_zero_curve(Lu), Z.trace_zero_curve(Lv)
            assert cu.label() in LU_SETS and cv.label() in LV_SETS
            b = Z.homotopy_intersection_bound(cu, cv)
            assert b in (12, 16, 20)
            bounds.add(b)
        # nn'|pq' - qp'| over all nine class pairs gives the tabulated values
        table = {_tabulated_bound(lu, lv) for lu in LU_SETS for lv in LV_SETS}
        assert table == {12, 16, 20}
        assert bounds <= {12, 16, 20}
        assert time.perf_counter() - t0 < 120.0


def _tabulated_bound(lu, lv):
    def parse(label):
        n, pq = label.split("x")
        p, q = pq.strip("()").split(",")
        return int(n), int(p), int(q)

    n, p, q = parse(lu)
    m, r, s = parse(lv)
    return n * m * abs(p * s - q * r)


# -- 4 -------------------------------------------------------------------------------

def test_criterion_4_dimensions():
    with criterion(4, "dimension suite: ranks 9, 25; dim R4 = 19; moduli 15 = 15"):
        H._EVAL.clear()
        t0 = time.perf_counter()
        r = H.dimension_report()
        elapsed = time.perf_counter() - t0
        assert (r.rank2, r.rank4) == (9, 25)
        assert (r.kernel2, r.kernel4) == (1, 10)
        assert r.ideal4 == 19
        assert r.moduli_from_functions == r.moduli_from_ideal == 15
        assert min(r.gap2, r.gap4, r.gap_ideal) >= 6
        assert elapsed < 1.0


# -- 5 -------------------------------------------------------------------------------

def _linearization_distances(f, epsilons=EPSILONS):
    sols = Z.solve_system(f)
    out = []
    for eps in epsilons:
        qps = LG.quadratic_points(_patch(f, eps), sols)
        out.append(max(Z.torus_distance(q.point, s.point) for q, s in zip(qps, sols)))
    return out


@pytest.mark.xfail(strict=True, reason=(
    "degenerate instance: every mode of f has u-frequency 2 and the quadratic points "
    "coincide with the zeros of (L_u f, L_v f) to rounding, so d(eps) is noise"))
def test_criterion_5_linearization():
    with criterion(5, "linearization d(1e-3)/d(5e-4) in [1.6, 2.4] for the stated f"):
        d = _linearization_distances(C(2, -2) + S(2, -1, 0.7))
        assert 1.6 <= d[0] / d[1] <= 2.4


def test_linearization_generic_companion():
    # same measurement where the linearization is not exact
    f = C(2, -2) + S(2, -1, 0.7) + C(1, 1, 0.5) + S(2, 2, 0.3)
    d = _linearization_distances(f)
    assert d[1] > 1e-8
    assert 1.6 <= d[0] / d[1] <= 2.4
    # the stated f: the distances are at rounding level
    assert max(_linearization_distances(C(2, -2) + S(2, -1, 0.7))) < 1e-10


# -- 6 -------------------------------------------------------------------------------

def _params(rng, mag=0.3):
    return stabilizer_flow(StabilizerParams.from_array(rng.uniform(-mag, mag, 7)))


def _away_from_zero(rng, size=None):
    return rng.choice([-1.0, 1.0], size) * rng.uniform(0.2, 2.0, size)


def _lie(jet, X, t=1e-5):
    a = regraph(jet, expm(-t * X)).array
    b = regraph(jet, expm(t * X)).array
    d = (a - b) / (2 * t)
    return np.array([3 * d[3, 0], 3 * d[0, 3], 2 * d[2, 1], 2 * d[1, 2]]), \
        np.array([d[k] for k in QUARTIC_KEYS])


def test_criterion_6_normal_forms():
    with criterion(6, "normal-form round trips and infinitesimal actions"):
        rng = np.random.default_rng(6)
        for _ in range(100):
            I, J = _away_from_zero(rng, 2)
            nf = normal_form(regraph(Jet4.generic_normal(I, J), _params(rng)))
            assert nf.case == GENERIC
            assert np.allclose(nf.invariants, (I, J), atol=1e-8)

            It = _away_from_zero(rng)
            nf = normal_form(regraph(Jet4.flecnodal_normal(1, It), _params(rng)))
            assert nf.case == FLECNODAL
            assert abs(abs(nf.invariants[0]) - abs(It)) < 1e-8

            signs = tuple(rng.choice([-1, 1], 2))
            Ib, Jb = _away_from_zero(rng, 2)
            nf = normal_form(regraph(Jet4.quadratic_normal(signs, Ib, Jb), _params(rng)))
            assert nf.case == QUADRATIC
            # (Ib, Jb) up to a simultaneous sign
            s = np.sign(nf.invariants[0] * Ib)
            assert np.allclose(s * np.array(nf.invariants), (Ib, Jb), atol=1e-8)

        tol = 1e-3
        lam, mu, nu = 0.5, -0.8, 0.3
        # inversions shift c and d
        j = Jet4.from_expansion(0.7, -1.2, 0.3, 0.5, (0.1, 0.2, 0.3, 0.4, 0.5))
        cub, _ = _lie(j, lam * GENERATORS[4] + mu * GENERATORS[5])
        assert np.allclose(cub, [0, 0, 2 * lam, 2 * mu], atol=tol)
        # diagonal fields at a quadratic point
        al, be, ga, de, ep = 0.1, 0.2, 0.3, 0.4, 0.5
        j = Jet4.from_expansion(quartic=(al, be, ga, de, ep))
        _, q = _lie(j, lam * GENERATORS[0] + mu * GENERATORS[1])
        assert np.allclose(q, [(3 * lam - mu) * al, 2 * lam * be, (lam + mu) * ga,
                               2 * mu * de, (3 * mu - lam) * ep], atol=tol)
        # shears and zE at the generic normal form
        X = lam * (GENERATORS[2] - GENERATORS[5]) + mu * (GENERATORS[3] - GENERATORS[4]) \
            + nu * GENERATORS[6]
        _, q = _lie(Jet4.generic_normal(0.3, 0.4), X)
        assert np.allclose(q, [-mu / 3, 2 * lam / 3, nu, 2 * mu / 3, -lam / 3], atol=tol)


# -- 7 -------------------------------------------------------------------------------

def test_criterion_7_wilczynski():
    with criterion(7, "Wilczynski suite: quadric, determinant, integrability, tensor law"):
        t = W.torus_grid(32)
        d = W.extract_coefficients(PerturbedHyperboloid(C(1, 1), 0.0).derivatives, t, t)
        assert max(np.max(np.abs(d.a)), np.max(np.abs(d.b))) < 1e-9
        assert d.det_error < 1e-9

        torus = W.RuledTorus()
        R = W.reparametrized(torus.derivatives, W.Reparam.sine(0.3), W.Reparam.sine(0.2, 2))
        res = []
        for n in (32, 64, 128):
            g = W.torus_grid(n)
            res.append(W.integrability_residuals(W.extract_coefficients(R, g, g)))
        res = np.array(res)
        assert np.all(res[:, 1] < 1e-10)
        ratios = res[:-1, [0, 2]] / res[1:, [0, 2]]
        assert np.all((ratios > 3) & (ratios < 5))

        g = W.torus_grid(16)
        U, V = W.Reparam.sine(0.3), W.Reparam.identity()
        assert W.tensor_transform_check(torus.derivatives, U, V, g, g) < 1e-6
        # also on first-order asymptotic coordinates of a perturbed hyperboloid
        D = W.first_order_asymptotic(PerturbedHyperboloid(C(2, -1) + S(1, 2, 0.4), 1e-4))
        assert W.tensor_transform_check(D, U, V, g, g, tol=None) < 1e-6


# -- 8 -------------------------------------------------------------------------------

def _signature_points(f, eps=1e-3):
    patch = _patch(f, eps)
    out = []
    for s in Z.solve_system(f):
        qp = LG.locate_quadratic_point(patch, *s.point)
        out.append((patch, qp.u, qp.v))
    return out


def test_criterion_8_signatures():
    with criterion(8, "signature cross-check in experiments B and C, orientation reversal"):
        f_b = Z.homogeneous_second(np.random.default_rng(7).uniform(-1, 1, (2, 2)))
        points = _signature_points(f_b) + _signature_points(_example_c())
        assert len(points) == 32 + 8
        seen = set()
        for patch, u, v in points:
            s = LG.sampled_signature(patch, u, v)
            assert s == LG.jet_signature(LG.adapt(patch, u, v))
            # reversing the orientation of the surface: (+,+) <-> (-,-), (+,-) <-> (-,+)
            r = LG.sampled_signature(patch.flipped(orientation=True, coorientation=True), u, v)
            assert r == s.reversed()
            assert r.parity == s.parity
            seen.add(s.as_tuple())
        assert seen == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


# -- 9 -------------------------------------------------------------------------------

def test_criterion_9_sturm_hurwitz():
    with criterion(9, "f''' + f' has at least 4 zeros on the circle"):
        rng = np.random.default_rng(9)
        for _ in range(100):
            K = int(rng.integers(2, 7))
            cos = {k: rng.uniform(-1, 1) for k in range(0, K + 1)}
            sin = {k: rng.uniform(-1, 1) for k in range(1, K + 1)}
            f = circle_poly(cos, sin)
            assert any(abs(cos[k]) + abs(sin[k]) > 0 for k in range(2, K + 1))
            assert circle_zero_count(f.sturm_operator("u")) >= 4
