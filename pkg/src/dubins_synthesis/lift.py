"""Lift to the full (x, y, theta) problem, closed-loop simulation and the stability bound.

A reduced (P1) trajectory is lifted arc by arc: theta grows linearly with
slope u and the position follows the exact Dubins arc, so the reduced image
of the lifted trajectory is the (P1) trajectory itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TARGET,
    ControlLetter,
    FullState,
    InvalidParameterError,
    NormalizedParams,
    PhysicalParams,
    ReducedPoint,
    normalize,
    reduce,
)
from .dynamics import Direction, bang_flow
from .synthesis import Arc, Synthesis, Trajectory

__all__ = [
    "FullSample",
    "FullTrajectory",
    "ClosedLoopResult",
    "StabilityReport",
    "solve_p",
    "lift_trajectory",
    "simulate_closed_loop",
    "arc_sup_distance",
    "stability_bound",
    "delta_for_epsilon",
    "stability_check",
    "ARRIVAL_TOL",
]

ARRIVAL_TOL = 1e-7


@dataclass(frozen=True)
class FullSample:
    t: float
    state: FullState
    control: tuple[float, float]


@dataclass(frozen=True)
class FullTrajectory:
    """Samples (t, state, control); times, lengths and controls are physical when ``physical``."""

    samples: tuple[FullSample, ...]
    duration: float
    reduced: Trajectory
    physical: bool = False

    @property
    def letters(self) -> str:
        return self.reduced.letters

    def array(self) -> np.ndarray:
        """Rows (t, x, y, theta, u, v)."""
        rows = [(s.t, s.state.x, s.state.y, s.state.theta, s.control[0], s.control[1]) for s in self.samples]
        return np.array(rows, dtype=float).reshape(-1, 6)


def _dubins_arc(x0: float, y0: float, th0: float, u: float, v: float, t: float) -> tuple[float, float, float]:
    if u == 0.0:
        return x0 + v * t * math.cos(th0), y0 + v * t * math.sin(th0), th0
    th = th0 + u * t
    return x0 + v / u * (math.sin(th) - math.sin(th0)), y0 - v / u * (math.cos(th) - math.cos(th0)), th


def lift_trajectory(state0: FullState, traj: Trajectory, dt: float = 0.01) -> list[tuple[float, float, float, float, float, float]]:
    """Rows (t, x, y, theta_unwrapped, u, v) in normalized units; arc endpoints always included."""
    rows = []
    x, y, th = state0.x, state0.y, state0.theta
    t0 = 0.0
    for arc in traj.arcs:
        n = max(1, int(math.ceil(arc.duration / dt)))
        for s in np.linspace(0.0, arc.duration, n + 1):
            xs, ys, ths = _dubins_arc(x, y, th, arc.u, arc.v, float(s))
            rows.append((t0 + float(s), xs, ys, ths, arc.u, arc.v))
        x, y, th = _dubins_arc(x, y, th, arc.u, arc.v, arc.duration)
        t0 += arc.duration
    return rows


def solve_p(syn: Synthesis, state0: FullState, params: PhysicalParams | NormalizedParams | None = None,
            dt: float = 0.01) -> FullTrajectory:
    """Time-optimal steering of the pose ``state0`` onto the target circle.

    With ``PhysicalParams`` the pose and the result are in physical units;
    the speed ratio of ``params`` must match the synthesis.
    """
    norm = None
    if isinstance(params, PhysicalParams):
        norm = normalize(params)
    elif isinstance(params, NormalizedParams):
        norm = params
    elif params is not None:
        raise InvalidParameterError("params must be PhysicalParams, NormalizedParams or None")
    if norm is not None and abs(norm.eta - syn.eta) > 1e-12 * syn.eta:
        raise InvalidParameterError(f"speed ratio {norm.eta} differs from the synthesis eta {syn.eta}")
    s0 = norm.state_to_normalized(state0) if norm is not None else state0
    q = reduce(s0)
    traj = syn.optimal_trajectory_p1(q)
    rows = lift_trajectory(s0, traj, dt)
    samples = []
    for t, x, y, th, u, v in rows:
        st = FullState(x, y, th)
        if norm is not None:
            samples.append(FullSample(norm.time_to_physical(t), norm.state_to_physical(st),
                                      norm.control_to_physical(u, v)))
        else:
            samples.append(FullSample(t, st, (u, v)))
    duration = traj.duration if norm is None else norm.time_to_physical(traj.duration)
    if not samples:
        u, v = 0.0, 0.0
        samples.append(FullSample(0.0, state0, (u, v)))
    return FullTrajectory(tuple(samples), duration, traj, norm is not None)


# -- closed loop -----------------------------------------------------------

def arc_sup_distance(start, u: float, v: float, duration: float, centre=TARGET) -> float:
    """Exact max over a (P1) arc of the distance to ``centre``."""
    x0, y0 = float(start[0]), float(start[1])
    end = bang_flow((x0, y0), u, v, duration, Direction.P1)
    best = max(math.hypot(x0 - centre[0], y0 - centre[1]), math.hypot(end[0] - centre[0], end[1] - centre[1]))
    if u == 0.0:
        return best
    cy = -v / u
    r = math.hypot(x0, y0 - cy)
    phi0 = math.atan2(y0 - cy, x0)
    # farthest point of the circle from the centre
    dx, dy = -centre[0], cy - centre[1]
    far = math.atan2(dy, dx) if (dx or dy) else None
    if far is None:
        return best
    s = (u * (phi0 - far)) % (2.0 * math.pi)
    if s <= duration:
        best = max(best, math.hypot(dx, dy) + r)
    return best


@dataclass(frozen=True)
class ClosedLoopResult:
    trace: np.ndarray  # rows (t, x~, y~, u, v)
    sup_norm: float
    arrival_time: float
    reached: bool
    letters: str
    increasing_letters: frozenset  # letters along which |X - X0| grew


def _increasing_letters(arcs: list[Arc]) -> set[str]:
    out = set()
    for arc in arcs:
        prev = None
        for s in np.linspace(0.0, arc.duration, 9):
            q = arc.point_at(float(s))
            d = math.hypot(q[0] - TARGET.xt, q[1] - TARGET.yt)
            if prev is not None and d > prev + 1e-12:
                out.add(arc.letter.value)
                break
            prev = d
    return out


def _sliding_letter(syn: Synthesis, q, w: float) -> ControlLetter | None:
    """Letter of a sliding curve within ``w`` of ``q``, if any.

    The turnpike and the root arc M are approached from both sides by
    controls that point toward them, so a held feedback would chatter
    across them; inside this band the curve's own control is used.
    """
    tree = syn.tree
    x, y = float(q[0]), float(q[1])
    if abs(y) <= w and x <= tree.x_turnpike - w:
        return ControlLetter.s
    eta = tree.eta
    r = math.hypot(x, y - eta)
    if abs(r - (eta + 1.0)) <= w:
        t = (-0.5 * math.pi - math.atan2(y - eta, x)) % (2.0 * math.pi)
        if t <= 1.5 * math.pi - tree.alpha_sing + w:
            return ControlLetter.M
    return None


def simulate_closed_loop(syn: Synthesis, q0, h: float = 0.0, t_max: float | None = None,
                         record_dt: float = 0.01, snap: bool = True) -> ClosedLoopResult:
    """Closed-loop (P1) motion under the synthesized feedback.

    ``h = 0`` switches exactly at the boundary crossings (the optimal
    trajectory). ``h > 0`` holds each feedback value for ``h`` and stops
    within ``10 h`` of the target; with ``snap`` the feedback keeps the
    sliding curves (turnpike, root arc M) within a band of width eta*h.
    """
    q0 = np.asarray(q0, dtype=float).reshape(2)
    if h < 0.0 or not math.isfinite(h):
        raise InvalidParameterError(f"h must be a finite number >= 0, got {h}")
    d0 = math.hypot(q0[0] - TARGET.xt, q0[1] - TARGET.yt)
    if d0 < ARRIVAL_TOL:
        return ClosedLoopResult(np.array([[0.0, q0[0], q0[1], 0.0, 0.0]]), 0.0, 0.0, True, "", frozenset())
    if h == 0.0:
        traj = syn.optimal_trajectory_p1(q0)
        sup = max((arc_sup_distance(a.start, a.u, a.v, a.duration) for a in traj.arcs), default=d0)
        end = traj.end
        reached = math.hypot(end[0] - TARGET.xt, end[1] - TARGET.yt) < 1e-6
        return ClosedLoopResult(traj.sample(record_dt), sup, traj.duration, reached, traj.letters,
                                frozenset(_increasing_letters(list(traj.arcs))))
    v0 = syn.value(q0)
    t_max = v0 + 100.0 * h + 1.0 if t_max is None else t_max
    q = ReducedPoint(float(q0[0]), float(q0[1]))
    t = 0.0
    rows = []
    sup = d0
    letters = []
    arcs = []
    tol = max(10.0 * h, ARRIVAL_TOL)
    reached = False
    while t < t_max:
        d = math.hypot(q[0] - TARGET.xt, q[1] - TARGET.yt)
        if d <= tol:
            reached = True
            break
        letter = _sliding_letter(syn, q, syn.eta * h) if snap else None
        if letter is None:
            fb = syn.locate(q)
            if fb.letter is None:
                reached = True
                break
            letter = fb.letter
        u, v = letter.control(syn.eta)
        rows.append((t, q[0], q[1], u, v))
        if not letters or letters[-1] != letter.value:
            letters.append(letter.value)
        step = min(h, t_max - t)
        sup = max(sup, arc_sup_distance(q, u, v, step))
        nq = bang_flow(q, u, v, step, Direction.P1)
        arcs.append(Arc(letter, u, v, step, q, nq))
        q = nq
        t += step
    rows.append((t, q[0], q[1], 0.0, 0.0))
    return ClosedLoopResult(np.array(rows), sup, t, reached, "".join(letters),
                            frozenset(_increasing_letters(arcs)))


# -- stability bound -------------------------------------------------------

def _check_eta(eta: float) -> float:
    if not (math.isfinite(eta) and eta >= 1.0):
        raise InvalidParameterError(f"eta must be a finite number >= 1, got {eta}")
    return float(eta)


def stability_bound(delta: float, eta: float) -> float:
    """Upper bound sqrt(delta (2 (eta - 1) + delta)) on the excursion from a start within delta."""
    eta = _check_eta(eta)
    if not (math.isfinite(delta) and 0.0 < delta <= 1.0):
        raise InvalidParameterError(f"delta must lie in (0, 1] (the slow speed), got {delta}")
    return math.sqrt(delta * (2.0 * (eta - 1.0) + delta))


def delta_for_epsilon(eps: float, eta: float) -> float:
    """Largest start radius whose excursion bound equals ``eps``: sqrt((eta-1)^2 + eps^2) - (eta-1)."""
    eta = _check_eta(eta)
    if not (math.isfinite(eps) and eps > 0.0):
        raise InvalidParameterError(f"epsilon must be positive, got {eps}")
    a = eta - 1.0
    return math.hypot(a, eps) - a


@dataclass(frozen=True)
class StabilityReport:
    delta: float
    bound: float
    n: int
    empirical_sup: float
    worst_start: tuple[float, float]
    all_reached: bool
    increasing_letters: frozenset

    @property
    def ok(self) -> bool:
        return self.all_reached and self.empirical_sup <= self.bound + 1e-3

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "bound": self.bound,
            "n": self.n,
            "empirical_sup": self.empirical_sup,
            "worst_start": list(self.worst_start),
            "all_reached": self.all_reached,
            "increasing_letters": sorted(self.increasing_letters),
            "ok": self.ok,
        }


def stability_check(syn: Synthesis, delta: float, n: int = 1000, seed: int = 0) -> StabilityReport:
    """Empirical sup of |X - X0| over closed-loop runs from ``n`` random starts at distance ``delta``."""
    bound = stability_bound(delta, syn.eta)
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0.0, 2.0 * math.pi, n)
    pts = np.c_[TARGET.xt + delta * np.cos(ang), TARGET.yt + delta * np.sin(ang)]
    worst, where = 0.0, (math.nan, math.nan)
    reached = True
    inc: set[str] = set()
    for q, traj in zip(pts, syn.optimal_trajectories_p1(pts)):
        sup = max((arc_sup_distance(a.start, a.u, a.v, a.duration) for a in traj.arcs), default=delta)
        end = traj.end
        reached &= math.hypot(end[0] - TARGET.xt, end[1] - TARGET.yt) < 1e-6
        inc |= _increasing_letters(list(traj.arcs))
        if sup > worst:
            worst, where = sup, (float(q[0]), float(q[1]))
    return StabilityReport(float(delta), bound, n, worst, where, bool(reached), frozenset(inc))
