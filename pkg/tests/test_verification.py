import math

import numpy as np
import pytest

from dubins_synthesis.core import ControlLetter
from dubins_synthesis.verification import GridSpec, axis_crossings, check_trajectory, verify


def test_small_grid_clean(syn):
    rep = verify(syn, GridSpec(-8, 8, 30))
    assert rep.ok, rep.counts()
    assert rep.n_trajectories > 0
    assert rep.n_u_switches > 0 and rep.n_v_switches > 0
    assert rep.max_terminal_error < 1e-6
    assert rep.max_hamiltonian_drift < 1e-9


def test_singular_arcs_not_switches(syn):
    # starts on the turnpike: a singular arc then M, with no u-switch counted
    pts = [(-4.0, 0.0), (-6.0, 0.0), (-9.0, 0.0)]
    for q in pts:
        fb = syn.locate(q)
        tr = syn.trajectory_from_arrival(np.array(q), fb.arrival)
        assert tr.arcs[0].letter is ControlLetter.s
        assert tr.arcs[0].u == 0.0
        assert check_trajectory(syn, tr, fb.value) == []
    rep = verify(syn, GridSpec(-8, 8, 9))
    assert rep.ok


def test_fault_detected(syn):
    bad = syn.with_fault("MPp", "M")
    rep = verify(bad, GridSpec(-8, 8, 30))
    assert not rep.ok
    assert len(rep.violations) >= 1
    v = rep.violations[0]
    assert len(v.start) == 2 and len(v.location) == 2 and v.rule


def test_grid_spec():
    pts = GridSpec(-1, 1, 3).points()
    assert pts.shape == (9, 2)
    assert GridSpec(0, 2, 1).points().tolist() == [[1.0, 1.0]]


def test_axis_crossings_circle():
    # slow right turn about (0, -1) in (P1): x~ = cos, y~ = -1 + sin about that centre
    start = (1.0, -1.0)
    xc, yc = axis_crossings(start, 1.0, 1.0, 2 * math.pi - 0.1)
    assert len(xc) == 2
    assert len(yc) == 0  # the unit circle about (0, -1) only touches y~ = 0


def test_axis_crossings_line():
    xc, yc = axis_crossings((-3.0, 0.0), 0.0, 2.0, 2.0)
    assert xc == [pytest.approx(1.5)]
    assert yc == []
