import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadpoints.errors import IdenticallyZero
from quadpoints.trigpoly import (HarmonicSubspace, TrigPoly2, circle_poly, circle_zero_count,
                                 circle_zeros, evaluate, project, random_real, sturm_operator)

from conftest import random_poly

C, S = TrigPoly2.cos, TrigPoly2.sin


def test_evaluate_examples():
    assert evaluate(C(2, -1), (0.0, 0.0)) == pytest.approx(1.0)
    f = S(1, 0) * S(0, 1)
    assert evaluate(f, (np.pi / 2, np.pi / 2)) == pytest.approx(1.0)
    g = C(2, -2) + C(2, -1, 0.1)
    assert evaluate(g, (np.pi / 4, 0.0)) == pytest.approx(0.0, abs=1e-15)


def test_evaluate_is_real_and_periodic(rng):
    f = random_poly(rng, 2, 2)
    u, v = rng.uniform(-10, 10, (2, 50))
    val = f.evaluate(u, v)
    assert np.isrealobj(val)
    assert np.allclose(val, f.evaluate(u + 2 * np.pi, v - 4 * np.pi), atol=1e-12)


def test_hermitian_symmetrization():
    f = TrigPoly2({(1, 2): 1 + 2j, (-1, -2): 1 - 1j})
    assert f.coeff(-1, -2) == np.conj(f.coeff(1, 2))
    assert f.coeff(1, 2) == pytest.approx(1 + 1.5j)


def test_sturm_operator_examples():
    f = C(2, -1)
    assert (sturm_operator(f, "u") - S(2, -1, 6.0)).is_zero()
    assert sturm_operator(f, "v").is_zero()
    for ax in "uv":
        assert sturm_operator(C(1, 1), ax).is_zero()


def _fd(f, u, v, axis, h=1e-2):
    # sixth-order central stencils for the first and third derivatives
    w1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60
    w3 = np.array([1, -8, 13, 0, -13, 8, -1]) / 8
    k = np.arange(-3, 4) * h
    vals = f(u + k, v + 0 * k) if axis == "u" else f(u + 0 * k, v + k)
    return (w3 @ vals) / h ** 3 + (w1 @ vals) / h


def test_sturm_operator_against_finite_differences(rng):
    f = random_poly(rng, 2, 2)
    for axis in "uv":
        L = sturm_operator(f, axis)
        for u, v in rng.uniform(0, 2 * np.pi, (10, 2)):
            assert L(u, v) == pytest.approx(_fd(f, u, v, axis), abs=1e-6)


def test_derivative_is_exact():
    f = C(3, -2, 0.5)
    assert (f.diff(1, 0) - S(3, -2, -1.5)).is_zero()
    assert (f.diff(0, 2) - C(3, -2, -2.0)).is_zero()


def test_project_examples(rng):
    assert project(C(3, 0), HarmonicSubspace.SECOND).is_zero()
    g = project(C(2, -2) + C(1, 0), HarmonicSubspace.FIRST)
    assert (g - C(1, 0)).is_zero()
    f = random_poly(rng, 3, 3)
    for s in HarmonicSubspace:
        once = f.project(s)
        assert (once.project(s) - once).is_zero()


def test_sturm_kills_first_harmonics(rng):
    f = random_poly(rng, 3, 3)
    for ax in "uv":
        assert sturm_operator(project(f, HarmonicSubspace.FIRST), ax).is_zero()


def test_sturm_commutes_with_translation(rng):
    f = random_poly(rng, 2, 2)
    for u0, v0 in rng.uniform(0, 2 * np.pi, (10, 2)):
        for ax in "uv":
            lhs = sturm_operator(f.translate(u0, v0), ax)
            rhs = sturm_operator(f, ax).translate(u0, v0)
            assert np.allclose(lhs.table, rhs.table, atol=1e-13)


def test_subspace_dimensions():
    H = HarmonicSubspace
    assert H.FIRST.dimension == 9
    assert H.SECOND.dimension == 25
    assert H.HOMOGENEOUS_SECOND.dimension == 4
    assert H.MIXED_A.dimension == 21
    assert H.MIXED_A.dimension_mod_first == 12


def test_random_real_is_seeded_and_in_subspace():
    a = random_real(HarmonicSubspace.MIXED_A, np.random.default_rng(3))
    b = random_real(HarmonicSubspace.MIXED_A, np.random.default_rng(3))
    assert a == b
    assert a.in_subspace(HarmonicSubspace.MIXED_A)
    assert a.coeff(2, 2) == 0 and a.coeff(2, -2) == 0


def test_circle_zero_count_examples():
    assert circle_zero_count(circle_poly(sin={2: 1.0})) == 4
    f = circle_poly(cos={2: 1.0, 3: 0.3})
    assert circle_zero_count(f.diff(3, 0) + f.diff(1, 0)) >= 4
    assert circle_zero_count(circle_poly(sin={1: 1.0, 3: 0.1})) >= 2


def test_circle_zeros_are_roots():
    g = circle_poly(cos={1: 0.3, 2: -1.0}, sin={3: 0.4})
    z = circle_zeros(g)
    assert np.all(np.abs(g(z, 0.0)) < 1e-10)
    assert np.all((z >= 0) & (z < 2 * np.pi))


def test_circle_zero_count_rejects_zero():
    with pytest.raises(IdenticallyZero):
        circle_zero_count(TrigPoly2())


def test_json_round_trip(rng):
    f = random_poly(rng, 2, 1)
    g = TrigPoly2.from_json(f.to_json())
    assert np.allclose(f.table, g.table)
    # omitted conjugates are filled in
    h = TrigPoly2.from_json(json.dumps([{"n": 1, "m": 0, "re": 0.5, "im": 0.0}]))
    assert (h - C(1, 0)).is_zero()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_product_matches_pointwise(vals):
    f = C(1, 0, vals[0]) + S(1, -1, vals[1]) + C(0, 0, vals[2])
    g = C(2, 1, vals[3]) + S(0, 1, vals[4]) + C(0, 0, vals[5])
    u, v = 0.37, 2.1
    assert (f * g)(u, v) == pytest.approx(f(u, v) * g(u, v), abs=1e-12)
