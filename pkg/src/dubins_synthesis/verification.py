"""Structural verification of a built synthesis along its optimal (P1) trajectories.

Two families of checks run on every trajectory of a grid:

* switch-direction rules. Along forward trajectories f = -y~/x~ and
  g = 1/x~, so inside one open quadrant a u-switch may only go from 1 to -1
  (quadrants 1 and 3) or from -1 to 1 (quadrants 2 and 4), and inside one
  open half-plane a v-switch may only go from fast to slow (x~ > 0) or slow
  to fast (x~ < 0); in either case at most once per connected piece.
* maximum-principle residuals along the reversed extremal: constant
  Hamiltonian, non-negative Hamiltonian, and the reported control
  maximizing u*phi_u + v*phi_v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import TARGET, InvalidParameterError, ReducedPoint
from .dynamics import switching_values
from .synthesis import Synthesis, Trajectory

__all__ = ["GridSpec", "Violation", "VerificationReport", "verify", "check_trajectory", "axis_crossings"]

TWO_PI = 2.0 * math.pi
_EDGE = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform n x n grid of [lo, hi]^2."""

    lo: float = -8.0
    hi: float = 8.0
    n: int = 100

    def __post_init__(self) -> None:
        if not (self.hi > self.lo) or self.n < 1:
            raise InvalidParameterError("grid needs hi > lo and n >= 1")

    def points(self) -> np.ndarray:
        xs = np.linspace(self.lo, self.hi, self.n) if self.n > 1 else np.array([0.5 * (self.lo + self.hi)])
        X, Y = np.meshgrid(xs, xs)
        return np.c_[X.ravel(), Y.ravel()]


@dataclass(frozen=True)
class Violation:
    start: tuple[float, float]
    rule: str
    location: tuple[float, float]
    detail: str = ""

    def as_dict(self) -> dict:
        return {"start": list(self.start), "rule": self.rule, "location": list(self.location),
                "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    n_points: int
    n_trajectories: int
    n_u_switches: int
    n_v_switches: int
    n_singular_arcs: int
    n_switches_on_axes: int
    violations: tuple[Violation, ...] = ()
    max_terminal_error: float = 0.0
    max_hamiltonian_drift: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.violations:
            out[v.rule] = out.get(v.rule, 0) + 1
        return dict(sorted(out.items()))

    def as_dict(self, max_listed: int = 50) -> dict:
        return {
            "ok": self.ok,
            "n_points": self.n_points,
            "n_trajectories": self.n_trajectories,
            "n_u_switches": self.n_u_switches,
            "n_v_switches": self.n_v_switches,
            "n_singular_arcs": self.n_singular_arcs,
            "n_switches_on_axes": self.n_switches_on_axes,
            "max_terminal_error": self.max_terminal_error,
            "max_hamiltonian_drift": self.max_hamiltonian_drift,
            "violation_counts": self.counts(),
            "violations": [v.as_dict() for v in self.violations[:max_listed]],
        }

    def summary(self) -> str:
        head = (f"{self.n_trajectories} trajectories, {self.n_u_switches} u-switches, "
                f"{self.n_v_switches} v-switches, {self.n_singular_arcs} singular arcs: ")
        if self.ok:
            return head + "no violations"
        return head + f"{len(self.violations)} violations " + str(self.counts())


def axis_crossings(start, u: float, v: float, duration: float) -> tuple[list[float], list[float]]:
    """Interior times where a (P1) arc crosses x~ = 0 and y~ = 0."""
    x0, y0 = float(start[0]), float(start[1])
    if u == 0.0:
        # translation along +x~ at speed v
        xs = [-x0 / v] if x0 < 0.0 < x0 + v * duration else []
        return [s for s in xs if _EDGE < s < duration - _EDGE], []
    cy = -v / u
    r = math.hypot(x0, y0 - cy)
    phi0 = math.atan2(y0 - cy, x0)

    def times(psi: float) -> list[float]:
        s = (u * (phi0 - psi)) % TWO_PI
        out = []
        while s < duration - _EDGE:
            if s > _EDGE:
                out.append(s)
            s += TWO_PI
        return out

    xc = times(0.5 * math.pi) + times(-0.5 * math.pi)
    yc: list[float] = []
    if r > abs(cy):
        b = math.asin(-cy / r)
        yc = times(b) + times(math.pi - b)
    return sorted(xc), sorted(yc)


@dataclass
class _Tally:
    u: int = 0
    v: int = 0
    singular: int = 0
    on_axes: int = 0
    terminal: float = 0.0
    drift: float = 0.0
    violations: list = field(default_factory=list)


def check_trajectory(syn: Synthesis, traj: Trajectory, value: float | None = None,
                     pmp: bool = True, tally: _Tally | None = None) -> list[Violation]:
    """All rule violations along one trajectory."""
    tally = tally if tally is not None else _Tally()
    start = (float(traj.start[0]), float(traj.start[1]))
    out: list[Violation] = []
    arcs = traj.arcs
    if not arcs:
        return out
    # piece boundaries in (P1) time
    cuts_u: list[float] = []
    cuts_v: list[float] = []
    t0 = 0.0
    bounds = []
    for arc in arcs:
        if arc.u == 0.0:
            tally.singular += 1
            cuts_u += [t0, t0 + arc.duration]
            cuts_v += [t0, t0 + arc.duration]
        else:
            xc, yc = axis_crossings(arc.start, arc.u, arc.v, arc.duration)
            cuts_u += [t0 + s for s in xc + yc]
            cuts_v += [t0 + s for s in xc]
        t0 += arc.duration
        bounds.append(t0)
    cuts_u.sort()
    cuts_v.sort()
    u_pieces: dict[int, int] = {}
    v_pieces: dict[int, int] = {}
    for i in range(len(arcs) - 1):
        a, b = arcs[i], arcs[i + 1]
        T = bounds[i]
        X = a.end
        x, y = float(X[0]), float(X[1])
        loc = (x, y)
        if a.u * b.u == -1.0:
            tally.u += 1
            if abs(x) < _EDGE or abs(y) < _EDGE:
                tally.on_axes += 1
            else:
                quadrant_odd = (x > 0.0) == (y > 0.0)  # quadrants 1 and 3
                allowed = (1.0, -1.0) if quadrant_odd else (-1.0, 1.0)
                if (a.u, b.u) != allowed:
                    out.append(Violation(start, "u_direction", loc,
                                         f"{a.letter.value}->{b.letter.value} in quadrant "
                                         f"{_quadrant(x, y)}"))
                piece = int(np.searchsorted(cuts_u, T))
                u_pieces[piece] = u_pieces.get(piece, 0) + 1
                if u_pieces[piece] == 2:
                    out.append(Violation(start, "u_count", loc, f"second u-switch in quadrant {_quadrant(x, y)}"))
        if a.v != b.v:
            tally.v += 1
            if abs(x) < _EDGE:
                tally.on_axes += 1
            else:
                fast_to_slow = a.v > b.v
                if (x > 0.0) != fast_to_slow:
                    out.append(Violation(start, "v_direction", loc,
                                         f"{a.letter.value}->{b.letter.value} with x~ {'>' if x > 0 else '<'} 0"))
                piece = int(np.searchsorted(cuts_v, T))
                v_pieces[piece] = v_pieces.get(piece, 0) + 1
                if v_pieces[piece] == 2:
                    out.append(Violation(start, "v_count", loc, "second v-switch in one half-plane"))
    end = traj.end
    err = math.hypot(end[0] - TARGET.xt, end[1] - TARGET.yt)
    tally.terminal = max(tally.terminal, err)
    if err > 1e-6:
        out.append(Violation(start, "terminal", (float(end[0]), float(end[1])), f"misses the target by {err:.3e}"))
    if value is not None and abs(traj.duration - value) > 1e-8:
        out.append(Violation(start, "duration", start, f"duration {traj.duration} vs value {value}"))
    if pmp:
        out += _pmp_residuals(syn, traj, tally)
    return out


def _quadrant(x: float, y: float) -> int:
    if x > 0.0:
        return 1 if y > 0.0 else 4
    return 2 if y > 0.0 else 3


def _pmp_residuals(syn: Synthesis, traj: Trajectory, tally: _Tally, tol: float = 1e-9) -> list[Violation]:
    tree = syn.tree
    start = (float(traj.start[0]), float(traj.start[1]))
    total = traj.duration
    hs = []
    out: list[Violation] = []
    s0 = 0.0
    for arc in traj.arcs:
        for frac in (0.05, 0.5, 0.95):
            s = s0 + frac * arc.duration
            bp = tree.branch_state(traj.arc_word, traj.param, max(total - s, 0.0))
            q = arc.point_at(frac * arc.duration)
            if math.hypot(q[0] - bp.point[0], q[1] - bp.point[1]) > 1e-7:
                out.append(Violation(start, "state", (q[0], q[1]), "trajectory leaves its extremal"))
                return out
            pu, pv = switching_values(bp.point, bp.covector)
            hs.append(arc.u * pu + arc.v * pv)
            fast = arc.v > 1.0
            if arc.u * pu < -tol or (pv < -tol if fast else pv > tol):
                out.append(Violation(start, "maximum_condition", (q[0], q[1]),
                                     f"letter {arc.letter.value} with phi_u={pu:.3e}, phi_v={pv:.3e}"))
                return out
        s0 += arc.duration
    drift = max(hs) - min(hs)
    tally.drift = max(tally.drift, drift)
    if drift > 1e-8:
        out.append(Violation(start, "hamiltonian_drift", start, f"H varies by {drift:.3e}"))
    if min(hs) < -tol:
        out.append(Violation(start, "hamiltonian_sign", start, f"H = {min(hs):.3e} < 0"))
    return out


def verify(syn: Synthesis, grid: GridSpec | None = None, pmp: bool = True) -> VerificationReport:
    """Run every check on the optimal trajectories from the grid points inside the radius."""
    grid = grid or GridSpec()
    pts = grid.points()
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= syn.radius]
    feedback = syn.locate_many(pts)
    tally = _Tally()
    n_traj = 0
    for q, fb in zip(pts, feedback):
        if fb.arrival is None:
            continue
        traj = syn.trajectory_from_arrival(q, fb.arrival)
        n_traj += 1
        tally.violations += check_trajectory(syn, traj, fb.value, pmp, tally)
    return VerificationReport(
        n_points=int(pts.shape[0]),
        n_trajectories=n_traj,
        n_u_switches=tally.u,
        n_v_switches=tally.v,
        n_singular_arcs=tally.singular,
        n_switches_on_axes=tally.on_axes,
        violations=tuple(tally.violations),
        max_terminal_error=tally.terminal,
        max_hamiltonian_drift=tally.drift,
    )
