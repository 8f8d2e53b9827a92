import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dubins_synthesis.core import InvalidParameterError
from dubins_synthesis.dynamics import (
    Covector,
    Direction,
    adjoint_flow,
    bang_flow,
    control_from_switching,
    fundamental_loci,
    hamiltonian,
    maximized_control,
    reduced_rhs,
    rk4_flow,
    switching_values,
)

P2, P1 = Direction.P2, Direction.P1
coord = st.floats(-10, 10, allow_nan=False)


def test_bang_flow_m_arc():
    q = bang_flow((0.0, -1.0), -1.0, 2.0, math.pi / 2, P2)
    assert q == pytest.approx((-3.0, 2.0), abs=1e-12)
    # closed form x = -3 sin t, y = 2 - 3 cos t
    assert rk4_flow((0.0, -1.0), -1.0, 2.0, math.pi / 2, 10000, P2) == pytest.approx((-3.0, 2.0), abs=1e-8)


@pytest.mark.parametrize("dt", [0.0, 0.3, 10.0])
def test_equilibrium(dt):
    assert bang_flow((0.0, -1.0), 1.0, 1.0, dt, P2) == pytest.approx((0.0, -1.0), abs=1e-12)
    assert rk4_flow((0.0, -1.0), 1.0, 1.0, dt or 1.0, 100, P2) == pytest.approx((0.0, -1.0), abs=1e-10)


def test_turnpike_translation():
    s5 = math.sqrt(5)
    assert bang_flow((-s5, 0.0), 0.0, 2.0, 1.0, P2) == pytest.approx((-s5 - 2.0, 0.0), abs=1e-12)
    assert rk4_flow((-s5, 0.0), 0.0, 2.0, 1.0, 3, P2) == pytest.approx((-s5 - 2.0, 0.0), abs=1e-12)


def test_rotation_centre():
    # fixed point of the flow is (0, -v/u) in both directions
    for d in (P1, P2):
        for u, v in ((1, 2), (-1, 2), (1, 1), (-1, 1)):
            c = (0.0, -v / u)
            assert bang_flow(c, u, v, 1.234, d) == pytest.approx(c, abs=1e-12)
            assert reduced_rhs(c, u, v, d) == pytest.approx((0.0, 0.0), abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(coord, coord, st.sampled_from([-1.0, 0.0, 1.0]), st.floats(1, 3), st.floats(0, 5))
def test_p1_reverses_p2(x, y, u, v, dt):
    q = bang_flow((x, y), u, v, dt, P2)
    back = bang_flow(q, u, v, dt, P1)
    assert back == pytest.approx((x, y), abs=1e-9 * max(1, abs(x), abs(y)))


def test_adjoint_examples():
    assert adjoint_flow((1.0, 0.0), 1.0, math.pi / 2) == pytest.approx((0.0, 1.0), abs=1e-15)
    assert adjoint_flow((0.6, 0.8), 0.0, 5.0) == (0.6, 0.8)
    a = 3 * math.pi / 4
    p = adjoint_flow((math.cos(a), -math.sin(a)), -1.0, math.pi)
    assert p == pytest.approx((math.sqrt(2) / 2, math.sqrt(2) / 2), abs=1e-15)
    with pytest.raises(InvalidParameterError):
        adjoint_flow((0.0, 0.0), 1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-1, 1), st.floats(0, 50))
def test_adjoint_norm(px, py, u, dt):
    if math.hypot(px, py) < 1e-6:
        return
    p = adjoint_flow((px, py), u, dt)
    assert abs(math.hypot(*p) - math.hypot(px, py)) < 1e-13 * max(1, math.hypot(px, py))


def test_switching_values_examples():
    a = 1.5 * math.pi
    assert switching_values((0.0, -1.0), (math.cos(a), -math.sin(a))) == pytest.approx((0.0, 0.0), abs=1e-15)
    # direct formula (p_y x - p_x y, -p_x): phi_u = -1 here; phi_u vanishes for this
    # covector only on the turnpike y = 0
    assert switching_values((0.0, -1.0), (-1.0, 0.0)) == (-1.0, 1.0)
    assert switching_values((-3.0, 0.0), (-1.0, 0.0)) == (0.0, 1.0)


def test_hamiltonian_examples():
    assert hamiltonian((0.0, -1.0), (-1.0, 0.0), 0.0, 2.0) == 2.0
    assert hamiltonian((0.0, -1.0), (0.0, 1.0), 1.0, 1.0) == 0.0
    for t in np.linspace(0, 2 * math.pi, 50):
        q = (-2 * math.sin(t), 1 - 2 * math.cos(t))
        p = (math.cos(t + 1.5 * math.pi), -math.sin(t + 1.5 * math.pi))
        assert abs(hamiltonian(q, p, -1.0, 1.0)) < 1e-14


def test_maximized_control_examples():
    c = control_from_switching(-0.3, 0.5, 2.0)
    assert (c.u, c.v, c.u_tie, c.v_tie) == (-1.0, 2.0, False, False)
    c = control_from_switching(0.0, 0.5, 2.0)
    assert c.u_tie and c.u is None and c.v == 2.0
    c = control_from_switching(0.2, -0.1, 2.0)
    assert (c.u, c.v) == (1.0, 1.0)
    c = maximized_control((-3.0, 0.0), (-1.0, 0.0), 2.0)
    assert c.u_tie and c.v == 2.0


@settings(max_examples=200, deadline=None)
@given(coord, coord, st.floats(-1, 1), st.floats(-1, 1))
def test_maximized_control_maximizes(x, y, px, py):
    if math.hypot(px, py) < 1e-3:
        return
    c = maximized_control((x, y), (px, py), 2.0)
    best = max(hamiltonian((x, y), (px, py), u, v) for u in (-1, 0, 1) for v in (1, 2))
    u = 0.0 if c.u is None else c.u
    v = 1.0 if c.v is None else c.v
    assert hamiltonian((x, y), (px, py), u, v) >= best - 1e-9


@pytest.mark.parametrize("q, expected", [
    ((2.0, 3.0), (-2.0, 3.0, 1.0, -1.5, 0.5)),
    ((1.0, 0.0), (-1.0, 0.0, 1.0, 0.0, 1.0)),
])
def test_fundamental_loci(q, expected):
    loc = fundamental_loci(q)
    assert (loc.dA, loc.dBu, loc.dBv, loc.f, loc.g) == pytest.approx(expected)
    assert loc.defined


def test_fundamental_loci_axis():
    loc = fundamental_loci((0.0, 5.0))
    assert (loc.dA, loc.dBu, loc.dBv) == (0.0, 5.0, 1.0)
    assert loc.f is None and loc.g is None and not loc.defined


def test_rk4_requires_steps():
    with pytest.raises(InvalidParameterError):
        rk4_flow((0, 0), 1, 1, 1.0, 0)


@pytest.mark.parametrize("eta", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("u, fast", [(-1.0, False), (1.0, False), (-1.0, True), (1.0, True)])
def test_bang_flow_vs_rk4(eta, u, fast):
    v = eta if fast else 1.0
    rng = np.random.default_rng(1)
    for q in rng.uniform(-3, 3, (3, 2)):
        for dt in np.linspace(0, 2 * math.pi, 5):
            a = bang_flow(q, u, v, dt, P2)
            b = rk4_flow(q, u, v, dt, 4000, P2) if dt > 0 else q
            assert math.hypot(a[0] - b[0], a[1] - b[1]) < 1e-8


def test_covector_type():
    assert Covector(1.0, 2.0).py == 2.0
