import math

import numpy as np
import pytest
from scipy.optimize import least_squares

from dubins_synthesis.core import SolverFailure
from dubins_synthesis.cutlocus import (
    abnormal_cut,
    axis_cut_locus,
    axis_threshold_expression,
    cusp_parameter,
    equal_time_intersection,
    trace_cut_locus,
)
from dubins_synthesis.families import FamilyTree

from oracles import letters, oracle_arc_window, oracle_state

ETA = 2.0
HALF_PI = 0.5 * math.pi
A_SING = math.acos(-2.0 / 3.0)


def _arc_positions(word, alphas, ts):
    """Positions of the last arc of (word, a) at common times; NaN off the arc."""
    u, v = letters(ETA)[word[-1]]
    out = np.full((len(alphas), len(ts), 2), np.nan)
    for i, a in enumerate(alphas):
        t0, t1 = oracle_arc_window(word, a, ETA)
        q0, _ = oracle_state(word, a, ETA, t0)
        on = (ts >= t0) & (ts <= t1)
        ang = u * (ts[on] - t0)
        c = np.array([0.0, -v / u])
        d = q0 - c
        out[i, on, 0] = c[0] + np.cos(ang) * d[0] - np.sin(ang) * d[1]
        out[i, on, 1] = c[1] + np.sin(ang) * d[0] + np.cos(ang) * d[1]
    return out


@pytest.fixture(scope="module")
def mpp_mm_oracle():
    """Nearest pair of the MPp and Mm arcs at matched times, refined at fixed t."""
    aa = np.linspace(HALF_PI + 1e-3, A_SING, 160)
    bb = np.linspace(A_SING, 1.5 * math.pi - 1e-3, 160)
    ts = np.linspace(0.5, 7.5, 300)
    pa = _arc_positions("MPp", aa, ts)
    pb = _arc_positions("Mm", bb, ts)
    best = (np.inf, None)
    for j in range(len(ts)):
        d = np.linalg.norm(pa[:, j, None, :] - pb[None, :, j, :], axis=-1)
        if np.all(np.isnan(d)):
            continue
        i, k = np.unravel_index(np.nanargmin(d), d.shape)
        if d[i, k] < best[0]:
            best = (d[i, k], (aa[i], bb[k], ts[j]))
    a0, b0, t = best[1]

    def res(z):
        return oracle_state("MPp", z[0], ETA, t)[0] - oracle_state("Mm", z[1], ETA, t)[0]

    sol = least_squares(res, [a0, b0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    assert np.linalg.norm(sol.fun) < 1e-12
    return sol.x[0], sol.x[1], t


def test_mpp_mm_intersection(tree, mpp_mm_oracle):
    a, b, t = mpp_mm_oracle
    ra, rb, rt, q, degenerate = equal_time_intersection(tree, "MPp", "Mm", (a, b, t), fix=("t", t))
    assert HALF_PI < ra <= A_SING
    assert A_SING <= rb < 1.5 * math.pi
    assert rt == pytest.approx(t, abs=1e-12)
    assert ra == pytest.approx(a, abs=1e-8)
    assert rb == pytest.approx(b, abs=1e-8)
    qa = tree.branch_state("MPp", ra, rt).point
    qb = tree.branch_state("Mm", rb, rt).point
    assert math.hypot(qa[0] - qb[0], qa[1] - qb[1]) < 1e-10
    assert math.hypot(q[0] - qa[0], q[1] - qa[1]) < 1e-10
    assert not degenerate


def test_intersection_free_seed(tree, mpp_mm_oracle):
    a, b, t = mpp_mm_oracle
    ra, rb, rt, q, _ = equal_time_intersection(tree, "MPp", "Mm", (a + 0.01, b - 0.01, t + 0.01))
    qa = tree.branch_state("MPp", ra, rt).point
    qb = tree.branch_state("Mm", rb, rt).point
    assert math.hypot(qa[0] - qb[0], qa[1] - qb[1]) < 1e-10


def test_solver_failure_far_seed(tree):
    with pytest.raises(SolverFailure):
        equal_time_intersection(tree, "MPp", "Mm", (2.2, 3.0, 40.0))


def test_symmetric_turnpike_pair(tree):
    for tau in (tree.t_sing + 0.3, tree.t_sing + 1.0, tree.t_sing + 2.5):
        t_hit = None
        ea = tree.switch_times("MsPp", tau)[-1]
        # march the slow arc of MsPp to its crossing of y~ = 0 with x~ > 0
        ts = np.linspace(ea, ea + 2 * math.pi, 20001)
        ys = np.array([tree.branch_state("MsPp", tau, t).point[1] for t in ts])
        for i in range(len(ts) - 1):
            if ys[i] < 0.0 <= ys[i + 1] and tree.branch_state("MsPp", tau, ts[i]).point[0] > 0:
                t_hit = ts[i]
                break
        assert t_hit is not None
        ra, rb, rt, q, _ = equal_time_intersection(tree, "MsPp", "MsMm", (tau, tau, t_hit), fix=("alpha_a", tau))
        assert rb == pytest.approx(tau, abs=1e-9)
        assert abs(q[1]) < 1e-10
        pa = tree.branch_state("MsPp", tau, rt).point
        pb = tree.branch_state("MsMm", tau, rt).point
        assert pa[0] == pytest.approx(pb[0], abs=1e-10)
        assert pa[1] == pytest.approx(-pb[1], abs=1e-10)


@pytest.fixture(scope="module")
def pieces(tree):
    return {
        ("MPp", "MmM"): trace_cut_locus(tree, "MPp", "MmM"),
        ("MPpP", "MmM"): trace_cut_locus(tree, "MPpP", "MmM"),
        ("MPpP", "MPpPM"): trace_cut_locus(tree, "MPpP", "MPpPM"),
    }


def test_threshold_mpp_mmm(pieces):
    p = pieces[("MPp", "MmM")]
    assert p.threshold_a == pytest.approx(2.19947, abs=1e-3)
    assert p.threshold_b == pytest.approx(3.84506, abs=1e-3)


def test_threshold_mppp_mmm(pieces):
    p = pieces[("MPpP", "MmM")]
    assert p.threshold_a == pytest.approx(2.18628, abs=1e-3)
    assert p.threshold_b == pytest.approx(4.09691, abs=1e-3)


def test_threshold_mpppm(pieces):
    # quoted value 2.13033; the traced cusp sits at 2.126059 (see notes)
    p = pieces[("MPpP", "MPpPM")]
    assert p.threshold_kind == "cusp"
    assert p.threshold_a == pytest.approx(2.13033, abs=1e-3)


def test_cusp_parameter_matches_tracer(tree, pieces):
    p = pieces[("MPpP", "MPpPM")]
    assert cusp_parameter(tree, "MPpPM", bracket=(2.0, 2.2)) == pytest.approx(p.threshold_a, abs=1e-10)


@pytest.mark.parametrize("pair", [("MPp", "MmM"), ("MPpP", "MmM"), ("MPpP", "MPpPM")])
def test_piece_equal_time(tree, pieces, pair):
    p = pieces[pair]
    assert len(p.samples) > 5
    for s in p.samples:
        qa = tree.branch_state(p.branch_a, s.alpha_a, s.t).point
        qb = tree.branch_state(p.branch_b, s.alpha_b, s.t).point
        assert math.hypot(qa[0] - s.point[0], qa[1] - s.point[1]) < 1e-9
        assert math.hypot(qb[0] - s.point[0], qb[1] - s.point[1]) < 1e-9
    # the arriving extremals are distinct away from a cusp end
    interior = p.samples[1:-1] if p.threshold_kind == "cusp" else p.samples
    assert p.branch_a != p.branch_b or all(abs(s.alpha_a - s.alpha_b) > 1e-9 for s in interior)


def test_pruning_inequality(pieces, tree):
    mmm2 = pieces[("MPpP", "MmM")].threshold_b
    bound = 2 * math.pi - math.acos(-2.0 / 3.0)
    assert bound == pytest.approx(3.98266, abs=1e-5)
    assert mmm2 > bound
    assert tree.alpha_mmmp == pytest.approx(bound, abs=1e-12)


def test_axis_expression_value():
    assert axis_threshold_expression(2.0) == pytest.approx(9 + 2 * math.sqrt(5), abs=1e-12)
    assert axis_threshold_expression(2.0) == pytest.approx(13.4721, abs=1e-4)


def test_axis_cut(tree):
    ax = axis_cut_locus(tree)
    assert ax.max_abs_y < 1e-10
    assert ax.max_time_gap < 1e-10
    assert all(s.point[1] == 0.0 for s in ax.samples)
    # independent oracle: the slow right arc leaving (-eta, -eta - sqrt5) turns about (0, -1);
    # it crosses y~ = 0 at x~ = sqrt(|start - centre|^2 - 1)
    x0, y0 = -ETA, -ETA - math.sqrt(5.0)
    thr = math.sqrt(x0 ** 2 + (y0 + 1.0) ** 2 - 1.0)
    assert ax.threshold_tracer == pytest.approx(thr, abs=1e-12)
    assert ax.threshold_tracer == pytest.approx(math.sqrt(9 + 2 * math.sqrt(5)), abs=1e-12)
    assert ax.discrepancy == pytest.approx(ax.threshold_tracer ** 2 - ax.threshold_tracer, abs=1e-9)
    xs = [s.point[0] for s in ax.samples]
    assert min(xs) == pytest.approx(thr, abs=1e-6)
    assert all(b > a for a, b in zip(xs, xs[1:]))


def test_abnormal_cut(syn):
    ab = abnormal_cut(syn.tree, syn.inverter, n=200)
    assert not ab.empty
    assert 0.0 < ab.t_start < ab.t_end < math.pi
    for s in ab.samples:
        assert s.point[0] == pytest.approx(-2 * math.sin(s.t), abs=1e-12)
        assert s.point[1] == pytest.approx(1 - 2 * math.cos(s.t), abs=1e-12)
        assert s.far_word == "MmMPp"
        assert s.gap > 0.0


def test_abnormal_cut_oracle(syn):
    """Grid scan: for points on the m-arc, where does an MmMPp arc pass?"""
    ab = syn.abnormal_segment
    tree = syn.tree
    hits = []
    for a in np.linspace(tree.alpha_mmmp + 1e-4, 1.5 * math.pi - 1e-4, 400):
        t0, _ = oracle_arc_window("MmMP", a, ETA)
        ts = np.linspace(oracle_state_time("MmMPp", a), oracle_state_time("MmMPp", a) + 2 * math.pi, 800)
        for t in ts:
            q, _ = oracle_state("MmMPp", a, ETA, t)
            s = math.atan2(-q[0], 1.0 - q[1])
            r = math.hypot(q[0], q[1] - 1.0)
            if 0.0 < s < math.pi and abs(r - 2.0) < 5e-3:
                hits.append(s)
    assert hits
    # the cut segment lies where MmMPp arcs reach the abnormal arc
    assert min(hits) <= ab.t_start + 0.05
    assert max(hits) >= ab.t_end - 0.05


def oracle_state_time(word, a):
    from oracles import closed_form_times

    return closed_form_times(word, a, ETA)[-1]


@pytest.mark.parametrize("eta", [1.9, 2.1])
def test_thresholds_continuous_in_eta(pieces, eta):
    other = FamilyTree(eta)
    for pair in [("MPp", "MmM"), ("MPpP", "MmM")]:
        p = trace_cut_locus(other, *pair)
        assert p.threshold_a == pytest.approx(pieces[pair].threshold_a, abs=0.1)
        assert p.threshold_b == pytest.approx(pieces[pair].threshold_b, abs=0.1)
