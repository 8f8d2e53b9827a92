import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dubins_synthesis.core import (
    FullState,
    InvalidParameterError,
    PhysicalParams,
    normalize,
    reduce,
    unreduce,
)
from dubins_synthesis.lift import (
    delta_for_epsilon,
    simulate_closed_loop,
    solve_p,
    stability_bound,
    stability_check,
)

from conftest import dist


def _on_target(s):
    return abs(math.hypot(s.x, s.y) - 1.0) < 1e-5


def test_already_on_target(syn):
    ft = solve_p(syn, FullState(1.0, 0.0, math.pi / 2))
    assert ft.duration == 0.0
    assert ft.letters == ""
    assert len(ft.samples) == 1


def test_singular_segment_straight(syn):
    s0 = unreduce((-5.0, 0.0), 0.7)
    ft = solve_p(syn, s0, dt=0.01)
    assert ft.letters == "sM"
    arr = ft.array()
    seg = arr[arr[:, 4] == 0.0]
    assert len(seg) > 10
    p0, p1 = seg[0, 1:3], seg[-1, 1:3]
    d = (p1 - p0) / np.linalg.norm(p1 - p0)
    for row in seg:
        w = row[1:3] - p0
        assert abs(w[0] * d[1] - w[1] * d[0]) < 1e-8
    # the straight segment is headed at the centre of the target circle
    assert abs(p0[0] * d[1] - p0[1] * d[0]) < 1e-8
    assert np.dot(-p0, d) > 0
    end = ft.samples[-1].state
    assert _on_target(end)


def test_m_arc_against_rk4(syn):
    theta = -0.4
    s0 = unreduce((-3.0, 2.0), theta)
    ft = solve_p(syn, s0, dt=0.01)
    assert ft.letters == "M"
    assert ft.duration == pytest.approx(math.pi / 2, abs=1e-9)
    assert all(s.control == (-1.0, 2.0) for s in ft.samples)

    def f(z):
        return np.array([2.0 * math.cos(z[2]), 2.0 * math.sin(z[2]), -1.0])

    z = np.array([s0.x, s0.y, s0.theta])
    n = 4000
    h = ft.duration / n
    for _ in range(n):
        k1 = f(z)
        k2 = f(z + 0.5 * h * k1)
        k3 = f(z + 0.5 * h * k2)
        k4 = f(z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    end = ft.samples[-1].state
    assert end.x == pytest.approx(z[0], abs=1e-8)
    assert end.y == pytest.approx(z[1], abs=1e-8)
    assert end.theta == pytest.approx(z[2], abs=1e-8)
    assert _on_target(end)


def test_physical_units(syn):
    p = PhysicalParams(0.5, 3.0, 6.0)
    n = normalize(p)
    s_norm = unreduce((-3.0, 2.0), 0.2)
    s_phys = n.state_to_physical(s_norm)
    ft = solve_p(syn, s_phys, p)
    assert ft.physical
    assert ft.duration == pytest.approx(n.time_to_physical(math.pi / 2), abs=1e-9)
    end = ft.samples[-1].state
    assert math.hypot(end.x, end.y) == pytest.approx(n.length_to_physical(1.0), abs=1e-5)
    with pytest.raises(InvalidParameterError):
        solve_p(syn, s_phys, PhysicalParams(1.0, 1.0, 3.0))


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.2, 8.0), a=st.floats(0, 2 * math.pi), theta=st.floats(-math.pi, math.pi))
def test_reduce_lift_identity(syn, r, a, theta):
    q = (r * math.cos(a), r * math.sin(a))
    s0 = unreduce(q, theta)
    ft = solve_p(syn, s0, dt=0.05)
    traj = ft.reduced
    for s in ft.samples:
        assert dist(reduce(s.state), traj.point_at(s.t)) < 1e-8
    assert ft.duration == pytest.approx(syn.value(q), abs=1e-8)
    assert _on_target(ft.samples[-1].state)


def test_stability_bound_values():
    assert stability_bound(1.0, 2.0) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert stability_bound(0.5, 2.0) == pytest.approx(math.sqrt(1.25), abs=1e-12)
    assert stability_bound(1e-12, 2.0) < 1e-5
    assert delta_for_epsilon(1.0, 2.0) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    for d in (0.1, 0.5, 1.0):
        assert delta_for_epsilon(stability_bound(d, 2.0), 2.0) == pytest.approx(d, abs=1e-12)


@pytest.mark.parametrize("delta", [0.0, -0.1, 1.5, math.nan])
def test_stability_bound_range(delta):
    with pytest.raises(InvalidParameterError):
        stability_bound(delta, 2.0)


def test_closed_loop_target(syn):
    res = simulate_closed_loop(syn, (0.0, -1.0), h=0.01)
    assert res.sup_norm == 0.0
    assert res.arrival_time == 0.0
    assert res.reached


def test_closed_loop_exact(syn):
    res = simulate_closed_loop(syn, (-5.0, 0.0))
    assert res.reached
    assert res.letters == "sM"
    assert res.arrival_time == pytest.approx(syn.value((-5.0, 0.0)), abs=1e-9)


@pytest.mark.parametrize("q0", [(-5.0, 0.0), (-3.0, 2.0), (2.0, 1.0), (0.3, -1.5)])
def test_closed_loop_sampled(syn, q0):
    h = 0.01
    res = simulate_closed_loop(syn, q0, h=h)
    assert res.reached
    assert res.arrival_time == pytest.approx(syn.value(q0), abs=10 * h)


@pytest.mark.parametrize("delta", [0.1, 0.5, 1.0])
def test_stability_empirical(syn, delta):
    rep = stability_check(syn, delta, n=200, seed=1)
    assert rep.all_reached
    assert rep.empirical_sup <= rep.bound + 1e-3


def test_sampled_stability(syn):
    h = 1e-3
    rng = np.random.default_rng(5)
    for ang in rng.uniform(0, 2 * math.pi, 10):
        q0 = (0.5 * math.cos(ang), -1.0 + 0.5 * math.sin(ang))
        res = simulate_closed_loop(syn, q0, h=h)
        assert res.reached
        assert res.sup_norm <= stability_bound(0.5, 2.0) + 1e-3


def test_only_fast_right_arcs_increase_distance(syn):
    """Along closed-loop traces starting within the slow speed of the target,
    the distance to the target grows only on (1, VM) arcs."""
    rng = np.random.default_rng(11)
    starts = [(0.05, -0.95)]
    for _ in range(200):
        r, a = rng.uniform(0, 1), rng.uniform(0, 2 * math.pi)
        starts.append((r * math.cos(a), -1.0 + r * math.sin(a)))
    grew = set()
    for q0 in starts:
        grew |= simulate_closed_loop(syn, q0).increasing_letters
    assert grew <= {"P"}
