import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dubins_synthesis.core import (
    TARGET,
    ControlLetter,
    FullState,
    InvalidParameterError,
    NormalizedParams,
    PhysicalParams,
    ReducedPoint,
    normalize,
    reduce,
    unreduce,
    wrap_angle,
)

finite = st.floats(-50, 50, allow_nan=False)
angle = st.floats(-20, 20, allow_nan=False)


def test_normalize_identity():
    n = normalize(PhysicalParams(1.0, 1.0, 2.0))
    assert (n.eta, n.space_scale, n.time_scale) == (2.0, 1.0, 1.0)


def test_normalize_scaled():
    n = normalize(PhysicalParams(2.0, 4.0, 8.0))
    assert n.eta == pytest.approx(2.0)
    assert n.space_scale == pytest.approx(0.5)
    assert n.time_scale == pytest.approx(2.0)


def test_normalize_constant_speed():
    n = normalize(PhysicalParams(1.0, 3.0, 3.0))
    assert n.eta == 1.0
    assert n.space_scale == pytest.approx(1.0 / 3.0)
    assert n.time_scale == 1.0


@pytest.mark.parametrize("args", [(0.0, 1.0, 2.0), (1.0, 0.0, 2.0), (1.0, -1.0, 2.0), (1.0, 2.0, 1.0),
                                  (math.nan, 1.0, 2.0), (1.0, 1.0, math.inf)])
def test_physical_params_rejected(args):
    with pytest.raises(InvalidParameterError):
        PhysicalParams(*args)


def test_normalize_rejects_other_types():
    with pytest.raises(InvalidParameterError):
        normalize((1.0, 1.0, 2.0))


def test_r_min():
    assert PhysicalParams(2.0, 4.0, 8.0).r_min == 2.0


def test_normalized_box():
    assert NormalizedParams(2.0).control_box == ((-1.0, 1.0), (1.0, 2.0))
    with pytest.raises(InvalidParameterError):
        NormalizedParams(0.5)


@pytest.mark.parametrize("state, expected", [
    ((0.0, -1.0, 0.0), (0.0, -1.0)),
    ((1.0, 0.0, math.pi / 2), (0.0, -1.0)),
    ((2.0, 0.0, math.pi / 2), (0.0, -2.0)),
])
def test_reduce_examples(state, expected):
    q = reduce(FullState(*state), 1.0)
    # oracle: explicit rotation matrix
    x, y, th = state
    R = np.array([[math.cos(th), math.sin(th)], [-math.sin(th), math.cos(th)]])
    assert np.allclose(R @ [x, y], expected, atol=1e-12)
    assert q.xt == pytest.approx(expected[0], abs=1e-12)
    assert q.yt == pytest.approx(expected[1], abs=1e-12)


@pytest.mark.parametrize("q, th, expected", [
    ((0.0, -1.0), 0.0, (0.0, -1.0, 0.0)),
    ((0.0, -1.0), math.pi / 2, (1.0, 0.0, math.pi / 2)),
    ((0.0, -2.0), math.pi, (0.0, 2.0, math.pi)),
])
def test_unreduce_examples(q, th, expected):
    s = unreduce(ReducedPoint(*q), th)
    assert (s.x, s.y, s.theta) == pytest.approx(expected, abs=1e-12)


def test_reduce_rejects_bad_rmin():
    with pytest.raises(InvalidParameterError):
        reduce(FullState(0, 0, 0), 0.0)


def test_fullstate_wraps_and_validates():
    assert FullState(0, 0, -math.pi / 2).theta == pytest.approx(1.5 * math.pi)
    assert 0.0 <= wrap_angle(-1e-300) < 2 * math.pi
    with pytest.raises(InvalidParameterError):
        FullState(math.nan, 0, 0)


def test_control_letters():
    eta = 2.0
    table = {"m": (-1, 1), "p": (1, 1), "M": (-1, eta), "P": (1, eta), "s": (0, eta)}
    for k, uv in table.items():
        assert ControlLetter(k).control(eta) == uv


@settings(max_examples=1000, deadline=None)
@given(finite, finite, angle, st.floats(0.01, 10))
def test_round_trip(x, y, th, r_min):
    s = FullState(x, y, th)
    back = unreduce(reduce(s, r_min), s.theta)
    assert abs(back.x - x) < 1e-12 * max(1.0, abs(x), abs(y))
    assert abs(back.y - y) < 1e-12 * max(1.0, abs(x), abs(y))


@settings(max_examples=100, deadline=None)
@given(angle, st.floats(0.01, 10))
def test_target_collapse(th, r_min):
    s = FullState(r_min * math.sin(th), -r_min * math.cos(th), th)
    q = reduce(s, r_min)
    assert abs(q.xt) < 1e-12 * max(1, r_min) and abs(q.yt + r_min) < 1e-12 * max(1, r_min)


def _rk4_dubins(state, u, v, T, n=2000):
    def f(z):
        return np.array([v * math.cos(z[2]), v * math.sin(z[2]), u])

    z = np.array(state, dtype=float)
    h = T / n
    for _ in range(n):
        k1 = f(z)
        k2 = f(z + h / 2 * k1)
        k3 = f(z + h / 2 * k2)
        k4 = f(z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 1), st.floats(0, 1), finite, finite, angle)
def test_scaling_consistency(su, sv, x, y, th):
    # physical (u_max=2, v_min=4, v_max=8): integrate then normalize == normalize then integrate
    phys = PhysicalParams(2.0, 4.0, 8.0)
    n = normalize(phys)
    u, v = su * phys.u_max, phys.v_min + sv * (phys.v_max - phys.v_min)
    T = 1.0
    a = _rk4_dubins((x, y, th), u, v, T)
    a_n = (a[0] * n.space_scale, a[1] * n.space_scale, a[2])
    un, vn = u / n.time_scale, v * n.space_scale / n.time_scale
    b = _rk4_dubins((x * n.space_scale, y * n.space_scale, th), un, vn, n.time_to_normalized(T))
    assert np.allclose(a_n, b, atol=1e-8)
    assert n.control_to_physical(un, vn) == pytest.approx((u, v))


def test_target_constant():
    assert TARGET == (0.0, -1.0)
