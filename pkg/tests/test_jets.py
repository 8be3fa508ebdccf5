import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from quadpoints import jets as J
from quadpoints.errors import (DegenerateQuadraticPoint, NotAdapted, NotAGraph, OriginNotFixed)
from quadpoints.jets import (FLECNODAL, GENERIC, GENERATORS, QUADRATIC, Jet4, StabilizerParams,
                             diagonal_map, inversion_map, normal_form, orientation_flip, regraph,
                             stabilizer_flow)


def _random_params(rng, mag=0.3):
    return StabilizerParams.from_array(rng.uniform(-mag, mag, 7))


def _random_jet(rng):
    c = {(1, 1): 1.0}
    for j in range(5):
        for k in range(5 - j):
            if j + k >= 3:
                c[(j, k)] = rng.uniform(-1, 1)
    return Jet4(c)


def test_jet_rejects_low_order_terms():
    with pytest.raises(ValueError):
        Jet4({(1, 0): 1.0})


def test_regraph_identity(rng):
    j = _random_jet(rng)
    assert regraph(j, np.eye(4)).allclose(j, 1e-14)


def test_regraph_ze_example():
    j = Jet4({(1, 1): 1.0})
    T = inversion_map(0, 0, 1.0)            # (x, y, z) / (1 - z)
    out = regraph(j, T)
    assert out.allclose(Jet4({(1, 1): 1.0, (2, 2): -1.0}), 1e-14)
    assert np.allclose(J.projective_normalize(expm(GENERATORS[6])),
                       J.projective_normalize(T))
    assert np.allclose(stabilizer_flow(StabilizerParams(nu3=1.0)), J.projective_normalize(T))


def test_regraph_ze_example_by_sampling():
    # oracle: map surface points and fit z~ = x~ y~ + g x~^2 y~^2
    j = Jet4({(1, 1): 1.0})
    pts = np.array([(x, y) for x in np.linspace(-0.05, 0.05, 5) for y in np.linspace(-0.05, 0.05, 4)])
    x, y = pts.T
    z = x * y
    xt, yt, zt = x / (1 - z), y / (1 - z), z / (1 - z)
    g = np.linalg.lstsq(((xt * yt) ** 2)[:, None], zt - xt * yt, rcond=None)[0][0]
    assert g == pytest.approx(-1.0, abs=1e-3)
    assert regraph(j, inversion_map(0, 0, 1.0))[2, 2] == -1.0


def test_regraph_parity_example():
    j = Jet4.generic_normal(0.0, 0.0)
    out = regraph(j, diagonal_map(-1.0, -1.0))
    assert out.allclose(Jet4.from_expansion(a=-1, b=-1), 1e-15)


def test_regraph_is_right_action(rng):
    j = _random_jet(rng)
    for _ in range(5):
        T1 = stabilizer_flow(_random_params(rng, 0.2))
        T2 = stabilizer_flow(_random_params(rng, 0.2))
        assert regraph(regraph(j, T1), T2).allclose(regraph(j, T2 @ T1), 1e-10)


def test_regraph_errors():
    j = Jet4({(1, 1): 1.0})
    T = np.eye(4)
    T[1, 0] = 1.0          # moves the origin
    with pytest.raises(OriginNotFixed):
        regraph(j, T)
    P = np.eye(4)[[0, 1, 3, 2]]   # swaps y and z: tangent plane becomes vertical
    with pytest.raises(NotAGraph):
        regraph(j, P)


def test_stabilizer_flow_examples():
    assert np.allclose(stabilizer_flow(StabilizerParams()), np.eye(4))
    T = stabilizer_flow(StabilizerParams(lam1=np.log(2)))
    assert np.allclose(T / T[0, 0], np.diag([1.0, 2.0, 1.0, 2.0]))
    # oracle: integrate x' = x, z' = z (the field x d/dx + z d/dz) to t = 1
    p0 = np.array([0.3, -0.2, 0.5])
    sol = solve_ivp(lambda t, p: np.array([p[0], 0.0, p[2]]), (0, np.log(2)), p0,
                    rtol=1e-11, atol=1e-12)
    h = T @ np.r_[1.0, p0]
    assert np.allclose(h[1:] / h[0], sol.y[:, -1], atol=1e-8)


def test_stabilizer_flows_fix_second_order(rng):
    j = Jet4({(1, 1): 1.0})
    for _ in range(5):
        out = regraph(j, stabilizer_flow(_random_params(rng)))
        assert out.is_adapted(1e-12)


# -- infinitesimal actions -----------------------------------------------------

def _lie(jet, X, t=1e-5):
    """Coefficient velocities under the pull-back by the flow of X."""
    a = regraph(jet, expm(-t * X)).array
    b = regraph(jet, expm(t * X)).array
    d = (a - b) / (2 * t)
    return np.array([3 * d[3, 0], 3 * d[0, 3], 2 * d[2, 1], 2 * d[1, 2]]), \
        np.array([d[k] for k in J.QUARTIC_KEYS])


def test_inversion_fields_shift_c_and_d():
    j = Jet4.from_expansion(0.7, -1.2, 0.3, 0.5, (0.1, 0.2, 0.3, 0.4, 0.5))
    lam, mu = 0.8, -0.3
    cub, _ = _lie(j, lam * GENERATORS[4] + mu * GENERATORS[5])
    assert np.allclose(cub, [0, 0, 2 * lam, 2 * mu], atol=1e-3)


def test_diagonal_action_on_quartic_at_quadratic_point():
    al, be, ga, de, ep = 0.1, 0.2, 0.3, 0.4, 0.5
    j = Jet4.from_expansion(quartic=(al, be, ga, de, ep))
    lam, mu = 0.7, -0.4
    cub, q = _lie(j, lam * GENERATORS[0] + mu * GENERATORS[1])
    expected = [(3 * lam - mu) * al, 2 * lam * be, (lam + mu) * ga, 2 * mu * de,
                (3 * mu - lam) * ep]
    assert np.allclose(cub, 0, atol=1e-3)
    assert np.allclose(q, expected, atol=1e-3)


def test_diagonal_action_on_cubic_finite():
    # finite map (x, y, z) -> (p x, q y, p q z): a' = a q / p^2, b' = b p / q^2
    j = Jet4.from_expansion(a=0.7, b=-1.2)
    p, q = 1.3, 0.6
    a, b, _, _ = regraph(j, diagonal_map(p, q)).expansion_coefficients()
    assert a == pytest.approx(0.7 * q / p ** 2)
    assert b == pytest.approx(-1.2 * p / q ** 2)


def test_shear_and_ze_actions_at_generic_normal_form():
    j = Jet4.generic_normal(0.3, 0.4)
    lam, mu, nu = 0.5, -0.8, 0.3
    X = lam * (GENERATORS[2] - GENERATORS[5]) + mu * (GENERATORS[3] - GENERATORS[4]) \
        + nu * GENERATORS[6]
    cub, q = _lie(j, X)
    assert np.allclose(cub, 0, atol=1e-3)
    # computed action: the beta and delta labels are exchanged relative to the printed list
    assert np.allclose(q, [-mu / 3, 2 * lam / 3, nu, 2 * mu / 3, -lam / 3], atol=1e-3)


def test_actions_at_flecnodal_normal_form():
    j = Jet4.flecnodal_normal(1, 0.5)
    lam, mu = 0.5, -0.8
    _, q = _lie(j, lam * (GENERATORS[2] - GENERATORS[5]) + mu * (GENERATORS[3] - GENERATORS[4]))
    assert np.allclose(q, [0, 0, 0, 2 * mu / 3, -lam / 3], atol=1e-3)
    D = np.diag([0.0, 2 / 3, 1 / 3, 1.0])
    _, q = _lie(j, D)
    al, be = j.quartic[:2]
    assert np.allclose(q, [5 / 3 * al, 4 / 3 * be, 0, 0, 0], atol=1e-3)


def test_shears_are_trivial_at_quadratic_normal_form():
    j = Jet4.quadratic_normal((1, 1), 0.7, -0.2)
    for X in (GENERATORS[2] - GENERATORS[5], GENERATORS[3] - GENERATORS[4]):
        cub, q = _lie(j, X)
        assert np.allclose(cub, 0, atol=1e-3) and np.allclose(q, 0, atol=1e-3)


# -- normal forms ---------------------------------------------------------------

def test_generic_normal_form_is_fixed():
    nf = normal_form(Jet4.generic_normal(2.0, -3.0))
    assert nf.case == GENERIC
    assert nf.invariants == pytest.approx((2.0, -3.0), abs=1e-12)
    assert np.allclose(nf.transform / nf.transform[0, 0], np.eye(4), atol=1e-12)


def test_generic_round_trip(rng):
    j0 = Jet4.generic_normal(2.0, -3.0)
    for _ in range(5):
        j = regraph(j0, stabilizer_flow(_random_params(rng)))
        nf = normal_form(j)
        assert nf.invariants == pytest.approx((2.0, -3.0), abs=1e-8)
        assert regraph(j, nf.transform).allclose(nf.reduced, 1e-9)
        assert nf.reduced.allclose(j0, 1e-8)


def test_quadratic_normal_form_example():
    nf = normal_form(Jet4.quadratic_normal((1, 1), 1.0, 1.0))
    assert nf.case == QUADRATIC
    assert nf.signs == (1, 1)
    assert nf.invariants == pytest.approx((1.0, 1.0), abs=1e-12)


@pytest.mark.parametrize("signs", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
def test_quadratic_all_sign_combinations(signs, rng):
    j = regraph(Jet4.quadratic_normal(signs, 0.8, -1.4), stabilizer_flow(_random_params(rng)))
    nf = normal_form(j)
    assert nf.case == QUADRATIC
    # (Ib, Jb) up to simultaneous sign; the reduced sign pair is recovered
    assert nf.signs[1] == signs[1]
    assert abs(nf.invariants[0]) == pytest.approx(0.8, abs=1e-8)
    assert abs(nf.invariants[1]) == pytest.approx(1.4, abs=1e-8)
    assert np.sign(nf.invariants[0] * nf.invariants[1]) == -1


def test_flecnodal_example(rng):
    j0 = Jet4.flecnodal_normal(1, 0.5)
    j = regraph(j0, stabilizer_flow(_random_params(rng)))
    nf = normal_form(j)
    assert nf.case == FLECNODAL
    assert nf.signs == (1,)
    assert nf.invariants[0] == pytest.approx(0.5, abs=1e-8)


def test_flecnodal_with_b_zero_is_swapped():
    j = Jet4.from_expansion(a=3.0, quartic=(0.0, 0.0, 0.0, 1 / 3, 0.5 / 12))
    nf = normal_form(j)
    assert nf.case == FLECNODAL
    assert nf.reduced.expansion_coefficients()[:2] == pytest.approx((0.0, 1.0))


def test_orientation_flip_flecnodal():
    j = Jet4.flecnodal_normal(1, 0.5)
    flipped = regraph(j, orientation_flip("y"))
    assert normal_form(flipped).invariants[0] == pytest.approx(-0.5, abs=1e-10)
    assert normal_form(flipped, oriented=False).invariants[0] == pytest.approx(0.5, abs=1e-10)


def test_orientation_flip_quadratic():
    j = Jet4.quadratic_normal((1, 1), 0.8, -1.4)
    for axis in "xy":
        nf = normal_form(regraph(j, orientation_flip(axis)))
        assert nf.invariants == pytest.approx((-0.8, 1.4), abs=1e-10)


def test_degenerate_quadratic_point():
    with pytest.raises(DegenerateQuadraticPoint):
        normal_form(Jet4.from_expansion(quartic=(0.1, 0.0, 0.2, 1 / 3, 0.3)))


def test_not_adapted():
    with pytest.raises(NotAdapted):
        normal_form(Jet4({(1, 1): 1.0, (2, 0): 0.5}))
    with pytest.raises(NotAdapted):
        Jet4({(1, 1): 2.0}).expansion_coefficients()


def test_expansion_coefficients():
    assert Jet4.from_expansion(2, 3, 0, 0).expansion_coefficients() == pytest.approx((2, 3, 0, 0))
    j = Jet4({(1, 1): 1.0, (2, 1): 0.5, (1, 2): -0.5})
    assert j.expansion_coefficients() == pytest.approx((0, 0, 1, -1))
