"""Assembly of the optimal synthesis, point location and optimal (P1) trajectories.

The synthesis is built in the order of the construction: admissible start
arcs, the three extremal families, then the equal-time intersections that
close each family. Each structural claim is checked as it is used, and a
failure aborts the build.

The value at a point is the earliest arrival over every extremal arc of the
tree (see :mod:`.inversion`); ties within ``BOUNDARY_TOL`` are broken by
the lexicographically smallest arc word, which is the arc ending at the
point when the point sits on a switching curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    ControlLetter,
    CoverageError,
    InvalidParameterError,
    ReducedPoint,
    SolverFailure,
    StructuralCheckError,
    TARGET,
)
from .cutlocus import (
    AbnormalCut,
    AxisCut,
    CutLocusPiece,
    CutSample,
    abnormal_cut,
    axis_cut_locus,
    trace_cut_locus,
)
from .dynamics import Direction, bang_flow, hamiltonian, switching_values
from .families import (
    DORMANT_WORDS,
    HALF_PI,
    THREE_HALF_PI,
    WORDS,
    FamilyTree,
    Window,
    family_of,
    owner_word,
    sample_window,
)
from .inversion import Arrival, Inverter

__all__ = [
    "BOUNDARY_TOL",
    "CUT_PAIRS",
    "THRESHOLD_NAMES",
    "Check",
    "BuildReport",
    "BranchRecord",
    "SwitchingCurveRecord",
    "BoundaryFlags",
    "Alternative",
    "FeedbackResult",
    "Arc",
    "Trajectory",
    "Synthesis",
    "build",
]

BOUNDARY_TOL = 1e-9

# Pairs of arcs whose equal-time loci form the cut locus at eta = 2.
# (MPpPM, MPpPMm) is a second fold inside the u-first family.
CUT_PAIRS = (
    ("MPp", "Mm"),
    ("MPp", "MmM"),
    ("MPpP", "MmM"),
    ("MPpP", "MPpPM"),
    ("MPpPM", "MPpPMm"),
    ("MPpP", "MmMP"),
    ("MPpPM", "MmMP"),
    ("MPpPMm", "MmMP"),
    ("MPpPMm", "MmMPp"),
)

# Threshold name -> (pair, side) of the traced piece that defines it.
THRESHOLD_NAMES = ("MPp", "MmM", "MPpP", "MmM'", "MPpPM")
_THRESHOLD_SOURCE = {
    "MPp": (("MPp", "MmM"), "a"),
    "MmM": (("MPp", "MmM"), "b"),
    "MPpP": (("MPpP", "MmM"), "a"),
    "MmM'": (("MPpP", "MmM"), "b"),
    "MPpPM": (("MPpP", "MPpPM"), "a"),
}

# (arc word, next letter) of every switch used by the synthesis.
_SWITCHES = (
    ("M", "P"), ("MP", "p"), ("MPp", "P"), ("MPpP", "M"), ("MPpPM", "m"),
    ("M", "m"), ("Mm", "M"), ("MmM", "P"), ("MmMP", "p"),
    ("Ms", "P"), ("Ms", "M"), ("MsP", "p"), ("MsM", "m"),
)


# -- report types ----------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class BuildReport:
    checks: tuple[Check, ...]
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"checks": [c.as_dict() for c in self.checks], "warnings": list(self.warnings)}

    @classmethod
    def from_dict(cls, d: dict) -> "BuildReport":
        return cls(tuple(Check(c["name"], bool(c["passed"]), c.get("detail", "")) for c in d["checks"]),
                   tuple(d.get("warnings", ())))


@dataclass(frozen=True)
class BranchRecord:
    """A word of the synthesis with its extremal and reduced parameter windows."""

    word: str
    param_kind: str
    extremal_window: Window
    window: Window
    dormant: bool = False


@dataclass(frozen=True)
class SwitchingCurveRecord:
    """Optimal portion of a switching curve, sampled in the switched word's parameter."""

    word: str
    next_letter: str
    kind: str
    params: tuple[float, ...]
    points: tuple[ReducedPoint, ...]

    @property
    def switched_word(self) -> str:
        return self.word + self.next_letter


# -- feedback --------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryFlags:
    switching_curve: bool = False
    cut_locus: bool = False
    turnpike: bool = False
    target: bool = False

    @property
    def any(self) -> bool:
        return self.switching_curve or self.cut_locus or self.turnpike or self.target


@dataclass(frozen=True)
class Alternative:
    """Another extremal reaching the point at (numerically) the same time."""

    arc_word: str
    param: float | None
    value: float


@dataclass(frozen=True)
class FeedbackResult:
    letter: ControlLetter | None
    control: tuple[float, float] | None
    value: float
    word: str
    arc_word: str
    param: float | None
    arc_time: float  # time already spent on the current arc of the (P2) extremal
    on_boundary: BoundaryFlags
    alternatives: tuple[Alternative, ...] = ()
    arrival: Arrival | None = None


@dataclass(frozen=True)
class Arc:
    """One constant-control arc of a (P1) trajectory."""

    letter: ControlLetter
    u: float
    v: float
    duration: float
    start: ReducedPoint
    end: ReducedPoint

    def point_at(self, s: float) -> ReducedPoint:
        return bang_flow(self.start, self.u, self.v, min(max(s, 0.0), self.duration), Direction.P1)


@dataclass(frozen=True)
class Trajectory:
    """Timed (P1) arcs from ``start`` to the target, and the extremal they reverse."""

    start: ReducedPoint
    arcs: tuple[Arc, ...]
    word: str
    arc_word: str
    param: float | None

    @property
    def duration(self) -> float:
        return float(sum(a.duration for a in self.arcs))

    @property
    def end(self) -> ReducedPoint:
        return self.arcs[-1].end if self.arcs else self.start

    @property
    def letters(self) -> str:
        return "".join(a.letter.value for a in self.arcs)

    def sample(self, dt: float = 0.01) -> np.ndarray:
        """Rows (t, x~, y~, u, v); every arc contributes its endpoints."""
        rows = []
        t0 = 0.0
        for arc in self.arcs:
            n = max(1, int(math.ceil(arc.duration / dt)))
            for s in np.linspace(0.0, arc.duration, n + 1):
                q = arc.point_at(float(s))
                rows.append((t0 + float(s), q.xt, q.yt, arc.u, arc.v))
            t0 += arc.duration
        return np.array(rows, dtype=float).reshape(-1, 5)

    def point_at(self, t: float) -> ReducedPoint:
        for arc in self.arcs:
            if t <= arc.duration:
                return arc.point_at(t)
            t -= arc.duration
        return self.end


# -- the synthesis ---------------------------------------------------------

@dataclass(frozen=True)
class Synthesis:
    eta: float
    radius: float
    branches: tuple[BranchRecord, ...]
    thresholds: dict
    switching_curves: tuple[SwitchingCurveRecord, ...]
    cut_loci: tuple[CutLocusPiece, ...]
    axis_cut: AxisCut
    turnpike: tuple[ReducedPoint, ReducedPoint]
    abnormal_segment: AbnormalCut
    build_report: BuildReport
    faults: tuple[tuple[str, str], ...] = ()
    inverter_table: int = 3000

    @cached_property
    def tree(self) -> FamilyTree:
        return FamilyTree(self.eta)

    @cached_property
    def inverter(self) -> Inverter:
        return Inverter(self.tree, self.radius, n_table=self.inverter_table)

    def branch(self, word: str) -> BranchRecord:
        for b in self.branches:
            if b.word == word:
                return b
        raise InvalidParameterError(f"no branch {word!r} in the synthesis")

    def with_fault(self, arc_word: str, letter: str) -> "Synthesis":
        """Copy whose feedback reports ``letter`` on the arc ``arc_word`` (for testing the checks)."""
        ControlLetter(letter)
        return replace(self, faults=self.faults + ((arc_word, letter),))

    # -- location -----------------------------------------------------------
    def _check_points(self, pts: np.ndarray) -> None:
        if not np.all(np.isfinite(pts)):
            raise InvalidParameterError("query points must be finite")

    def locate_many(self, points) -> list[FeedbackResult]:
        """Feedback at each point; raises :class:`CoverageError` at the first uncovered point."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self._check_points(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        outside = np.nonzero(r > self.radius * (1.0 + 1e-12))[0]
        if outside.size:
            q = pts[outside[0]]
            raise CoverageError(f"point ({q[0]}, {q[1]}) lies outside the synthesis radius {self.radius}")
        arrivals = self.inverter.arrivals_many(pts)
        return [self._feedback(pts[i], arrivals[i]) for i in range(pts.shape[0])]

    def locate(self, q) -> FeedbackResult:
        return self.locate_many([q])[0]

    def value(self, q) -> float:
        return self.locate(q).value

    def values(self, points) -> np.ndarray:
        return np.array([r.value for r in self.locate_many(points)])

    def _feedback(self, q: np.ndarray, lst: list[Arrival]) -> FeedbackResult:
        if not lst:
            raise CoverageError(f"no extremal of the synthesis reaches ({q[0]}, {q[1]})")
        t_min = lst[0].t
        tied = [r for r in lst if r.t <= t_min + BOUNDARY_TOL]
        best = min(tied, key=lambda r: (r.arc_word, r.t))
        alternatives: list[Arrival] = []
        for r in tied:
            if r is best or r.same_extremal(best, 1e-6):
                continue
            if any(r.same_extremal(o, 1e-6) for o in alternatives):
                continue
            alternatives.append(r)
        tree = self.tree
        at_target = math.hypot(q[0] - TARGET.xt, q[1] - TARGET.yt) < BOUNDARY_TOL
        on_turnpike = abs(q[1]) < BOUNDARY_TOL and q[0] <= tree.x_turnpike + BOUNDARY_TOL
        on_switch = False
        for r in tied:
            if r.arc_word in ("M", "m", "Ms") and r.param is None:
                continue
            if (r.elapsed < BOUNDARY_TOL and r.arc_index > 0) or (
                    r.remaining < BOUNDARY_TOL and tree.continuations(r.arc_word)):
                on_switch = True
        if at_target:
            flags = BoundaryFlags(target=True)
            return FeedbackResult(None, None, 0.0, "M", "M", None, 0.0, flags, (), None)
        flags = BoundaryFlags(bool(on_switch), bool(alternatives), bool(on_turnpike), False)
        param = best.param
        if best.arc_word == "M" and param is None:
            # any root extremal still on its first arc; pick the one switching last
            param = max(tree.alpha_sing, min(THREE_HALF_PI - best.t, THREE_HALF_PI - 1e-12))
            best = replace(best, param=param)
        letter = self._letter(best.arc_word, best.arc_index)
        return FeedbackResult(
            letter,
            letter.control(self.eta),
            float(best.t),
            owner_word(best.arc_word),
            best.arc_word,
            param,
            float(best.elapsed),
            flags,
            tuple(Alternative(a.arc_word, a.param, a.t) for a in alternatives),
            best,
        )

    def _letter(self, arc_word: str, k: int) -> ControlLetter:
        for w, letter in self.faults:
            if arc_word[: k + 1] == w:
                return ControlLetter(letter)
        return ControlLetter(arc_word[k])

    # -- trajectories -------------------------------------------------------
    def trajectory_from_arrival(self, q, r: Arrival) -> Trajectory:
        """Reverse the (P2) extremal described by ``r`` into a (P1) trajectory from ``q``."""
        tree = self.tree
        word, k = r.arc_word, r.arc_index
        param = r.param
        if k == 0:
            ts = [0.0]
        else:
            ts = list(tree.switch_times(word, param))
        durations = [r.elapsed] + [ts[j + 1] - ts[j] for j in range(k - 1, -1, -1)]
        indices = list(range(k, -1, -1))
        arcs = []
        cur = ReducedPoint(float(q[0]), float(q[1]))
        for j, d in zip(indices, durations):
            d = max(float(d), 0.0)
            if d <= 0.0:
                continue
            true_u, true_v = tree.letters[word[j]]
            end = bang_flow(cur, true_u, true_v, d, Direction.P1)
            letter = self._letter(word, j)
            u, v = letter.control(self.eta)
            arcs.append(Arc(letter, u, v, d, cur, end))
            cur = end
        return Trajectory(ReducedPoint(float(q[0]), float(q[1])), tuple(arcs), owner_word(word), word, param)

    def optimal_trajectory_p1(self, q0) -> Trajectory:
        return self.optimal_trajectories_p1([q0])[0]

    def optimal_trajectories_p1(self, points) -> list[Trajectory]:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        out = []
        for q, fb in zip(pts, self.locate_many(pts)):
            if fb.arrival is None:
                out.append(Trajectory(ReducedPoint(float(q[0]), float(q[1])), (), "M", "M", None))
            else:
                out.append(self.trajectory_from_arrival(q, fb.arrival))
        return out

    def all_optimal_trajectories_p1(self, q0) -> list[Trajectory]:
        """Every minimizer at ``q0``: one on a region, two or more on the cut locus."""
        q = np.asarray(q0, dtype=float).reshape(2)
        fb = self.locate(q)
        if fb.arrival is None:
            return [Trajectory(ReducedPoint(float(q[0]), float(q[1])), (), "M", "M", None)]
        out = [self.trajectory_from_arrival(q, fb.arrival)]
        lst = self.inverter.arrivals_many(q[None, :])[0]
        for alt in fb.alternatives:
            for r in lst:
                if r.arc_word == alt.arc_word and r.param == alt.param:
                    out.append(self.trajectory_from_arrival(q, r))
                    break
        return out

    def loss_time(self, word: str, param: float) -> float:
        """Time at which the extremal (word, param) stops being optimal, within the radius.

        Sampled along the extremal: the first time another extremal reaches
        the current point strictly earlier, refined by bisection.
        """
        tree = self.tree
        end = tree.next_switch(word, param)
        t_hi = end if math.isfinite(end) else 60.0
        ts = np.linspace(0.0, t_hi, 400)[1:]
        pts = np.array([tree.branch_state(word, param, float(t)).point for t in ts])
        keep = np.hypot(pts[:, 0], pts[:, 1]) <= self.radius
        if not keep.all():
            n = int(np.argmin(keep))
            ts, pts = ts[:n], pts[:n]
        if ts.size == 0:
            return 0.0
        arr = self.inverter.arrivals_many(pts)

        def loses(t, lst) -> bool:
            return bool(lst) and lst[0].t < t - BOUNDARY_TOL

        bad = [i for i, (t, lst) in enumerate(zip(ts, arr)) if loses(t, lst)]
        if not bad:
            return float(end)
        i = bad[0]
        lo = float(ts[i - 1]) if i > 0 else 0.0
        hi = float(ts[i])
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            p = tree.branch_state(word, param, mid).point
            if loses(mid, self.inverter.arrivals_many([p])[0]):
                hi = mid
            else:
                lo = mid
        return lo


# -- build -----------------------------------------------------------------

def _reduced_windows(tree: FamilyTree, th: dict) -> dict[str, Window]:
    a_s = tree.alpha_sing
    w = {
        "m": tree.extremal_window("m"),
        "M": tree.extremal_window("M"),
        "Ms": tree.extremal_window("Ms"),
        "MsPp": tree.extremal_window("MsPp"),
        "MsMm": tree.extremal_window("MsMm"),
        "MP": Window(HALF_PI, a_s, False, True),
        "MPp": Window(HALF_PI, a_s, False, True),
        "MPpP": Window(HALF_PI, th["MPp"], False, False),
        "MPpPM": Window(HALF_PI, th["MPpP"], False, False),
        "MPpPMm": Window(HALF_PI, th["MPpPM"], False, False),
        "Mm": Window(a_s, THREE_HALF_PI, True, False),
        "MmM": Window(a_s, THREE_HALF_PI, True, False),
        "MmMP": Window(th["MmM'"], THREE_HALF_PI, False, False),
        "MmMPp": Window(th["MmM'"], THREE_HALF_PI, False, False),
    }
    return w


def _structural_checks(tree: FamilyTree, n: int = 60) -> list[Check]:
    checks = []
    adm = tree.start_arc_admissibility()
    checks.append(Check(
        "start_arcs", adm.ok,
        f"P start rejected: {adm.p_start_rejected}; unique m start alpha: {adm.m_start_unique_alpha}",
    ))
    # switch times strictly increasing over every window
    worst = math.inf
    where = ""
    for word in WORDS:
        if len(word) < 2 or word == "Ms":
            continue
        win = tree.extremal_window(word)
        for a in sample_window(win, n, inf_span=5.0):
            ts = tree.switch_times(word, float(a))
            gaps = np.diff(ts)
            if gaps.size and gaps.min() < worst:
                worst, where = float(gaps.min()), f"{word} at {a:.6f}"
    checks.append(Check("switch_ordering", worst > 0.0, f"smallest gap {worst:.3e} ({where})"))
    # family 2 ordering gap
    err = 0.0
    for a in sample_window(tree.extremal_window("MPpP"), n):
        ts = tree.switch_times("MPpP", float(a))
        gap = math.acos((tree.eta + 1.0) / tree.eta * math.cos(a)) + HALF_PI
        err = max(err, abs((ts[3] - ts[1]) - gap))
    checks.append(Check("family2_gap", err < 1e-10, f"max error {err:.3e}"))
    # switching functions vanish at switches; u-switches happen at full speed
    res = 0.0
    slow_u = 0
    for word in WORDS:
        if len(word) < 2 or word == "Ms":
            continue
        for a in sample_window(tree.extremal_window(word), 12, inf_span=5.0):
            ts = tree.switch_times(word, float(a))
            for k in range(1, len(word)):
                if word[k] == "s":
                    continue
                bp = tree.switch_point(word, float(a), k)
                pu, pv = switching_values(bp.point, bp.covector)
                u0 = tree.letters[word[k - 1]][0]
                u1 = tree.letters[word[k]][0]
                if u0 != u1:
                    res = max(res, abs(pu))
                    if not pv > 0.0:
                        slow_u += 1
                else:
                    res = max(res, abs(pv))
    checks.append(Check("switching_functions_vanish", res < 1e-9, f"max |phi| at switches {res:.3e}"))
    checks.append(Check("u_switch_at_full_speed", slow_u == 0, f"{slow_u} u-switches with phi_v <= 0"))
    # maximum condition along every word
    worst_h = 0.0
    worst_sign = 0.0
    for word in WORDS:
        if word in ("Ms",):
            continue
        win = tree.extremal_window(word)
        for a in sample_window(win, 8, inf_span=5.0):
            a = float(a)
            end = tree.next_switch(word, a)
            end = min(end, 20.0)
            h0 = None
            for t in np.linspace(0.0, end, 25):
                bp = tree.branch_state(word, a, float(t))
                u, v = tree.letters[bp.letter.value]
                pu, pv = switching_values(bp.point, bp.covector)
                h = u * pu + v * pv
                h0 = h if h0 is None else h0
                worst_h = max(worst_h, abs(h - h0))
                worst_sign = min(worst_sign, u * pu, (1.0 if v > 1.0 else -1.0) * pv)
    checks.append(Check("hamiltonian_constant", worst_h < 1e-9, f"max drift {worst_h:.3e}"))
    checks.append(Check("maximum_condition", worst_sign > -1e-9, f"min signed switching value {worst_sign:.3e}"))
    return checks


def _dominance(inverter: Inverter, a: str, b: str) -> Callable[[CutSample], bool]:
    """True when a third extremal reaches the cut sample strictly earlier."""

    def mine(r: Arrival, word: str, alpha: float) -> bool:
        if not (r.arc_word.startswith(word) or word.startswith(r.arc_word)):
            return False
        return r.param is None or abs(r.param - alpha) < 1e-6

    def dominated(s: CutSample) -> bool:
        for r in inverter.arrivals_many([s.point])[0]:
            if r.t >= s.t - BOUNDARY_TOL:
                return False
            if mine(r, a, s.alpha_a) or mine(r, b, s.alpha_b):
                continue
            return True
        return False

    return dominated


def _optimal_runs(inverter: Inverter, tree: FamilyTree, word: str, nxt: str, win: Window,
                  radius: float, n: int) -> list[tuple[list[float], list[ReducedPoint]]]:
    """Sampled runs of a switching curve where the switching extremal is still optimal."""
    switched = word + nxt
    hi = win.hi
    if math.isinf(hi):
        hi = inverter.tau_max
    params = sample_window(Window(win.lo, hi, win.lo_closed, win.hi_closed), n)

    def evaluate(a: float):
        T = tree.switch_times(switched, a)[-1]
        p = tree.switch_point(switched, a).point
        return T, p

    def optimal(a: float) -> bool:
        T, p = evaluate(a)
        if math.hypot(*p) > radius:
            return False
        lst = inverter.arrivals_many([p])[0]
        return not lst or lst[0].t >= T - BOUNDARY_TOL

    pts = []
    Ts = []
    for a in params:
        T, p = evaluate(float(a))
        pts.append(p)
        Ts.append(T)
    arr = np.array(pts)
    inside = np.hypot(arr[:, 0], arr[:, 1]) <= radius
    lists = inverter.arrivals_many(arr)
    ok = [bool(inside[i]) and (not lists[i] or lists[i][0].t >= Ts[i] - BOUNDARY_TOL)
          for i in range(len(params))]
    runs = []
    i = 0
    while i < len(params):
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(params) and ok[j + 1]:
            j += 1
        lo_a, hi_a = float(params[i]), float(params[j])
        # refine the run ends by bisection against the neighbouring failing sample
        if i > 0:
            good, bad = lo_a, float(params[i - 1])
            for _ in range(40):
                mid = 0.5 * (good + bad)
                if optimal(mid):
                    good = mid
                else:
                    bad = mid
            lo_a = good
        if j + 1 < len(params):
            good, bad = hi_a, float(params[j + 1])
            for _ in range(40):
                mid = 0.5 * (good + bad)
                if optimal(mid):
                    good = mid
                else:
                    bad = mid
            hi_a = good
        ps = [lo_a] + [float(a) for a in params[i:j + 1] if lo_a < a < hi_a] + [hi_a]
        if hi_a <= lo_a:
            ps = [lo_a]
        runs.append((ps, [evaluate(a)[1] for a in ps]))
        i = j + 1
    return runs


def _coverage(inverter: Inverter, radius: float, n: int) -> tuple[Check, Check, dict]:
    xs = np.linspace(-radius, radius, n)
    X, Y = np.meshgrid(xs, xs)
    pts = np.c_[X.ravel(), Y.ravel()]
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= radius * (1.0 - 1e-9)]
    arr = inverter.arrivals_many(pts)
    uncovered = [i for i, lst in enumerate(arr) if not lst]
    owners: dict[str, int] = {}
    boundary = 0
    for lst in arr:
        if not lst:
            continue
        t0 = lst[0].t
        tied = [r for r in lst if r.t <= t0 + BOUNDARY_TOL and not r.same_extremal(lst[0], 1e-6)]
        if tied:
            boundary += 1
            continue
        best = min((r for r in lst if r.t <= t0 + BOUNDARY_TOL), key=lambda r: r.arc_word)
        w = owner_word(best.arc_word)
        owners[w] = owners.get(w, 0) + 1
    detail = f"{len(pts)} grid points, {len(uncovered)} uncovered, {boundary} on boundaries"
    if uncovered:
        q = pts[uncovered[0]]
        detail += f"; first uncovered ({q[0]:.4f}, {q[1]:.4f})"
    cov = Check("coverage", not uncovered, detail)
    return cov, Check("coverage_owners", True, ", ".join(f"{k}:{v}" for k, v in sorted(owners.items()))), owners


def build(eta: float, radius: float = 12.0, *, coverage_n: int = 61, curve_samples: int = 160,
          inverter_table: int = 3000, strict: bool = True) -> Synthesis:
    """Construct the synthesis for the speed ratio ``eta``.

    With ``strict`` (the default) the first failed structural check raises
    :class:`StructuralCheckError`; otherwise failures are only reported.
    """
    if not (isinstance(radius, (int, float)) and math.isfinite(radius) and radius > 1.0):
        raise InvalidParameterError(f"radius must be a finite number > 1, got {radius!r}")
    tree = FamilyTree(eta)
    radius = float(radius)
    checks = _structural_checks(tree)
    warnings: list[str] = []

    def require(check: Check) -> None:
        checks.append(check)
        if strict and not check.passed:
            raise StructuralCheckError(check.name, check.detail)

    for c in list(checks):
        if strict and not c.passed:
            raise StructuralCheckError(c.name, c.detail)

    inverter = Inverter(tree, radius, n_table=inverter_table)

    # thresholds from the raw equal-time loci
    raw: dict[tuple[str, str], CutLocusPiece] = {}
    for pair in {src for src, _ in _THRESHOLD_SOURCE.values()}:
        try:
            raw[pair] = trace_cut_locus(tree, pair[0], pair[1], radius=radius)
        except SolverFailure as exc:
            require(Check(f"trace_{pair[0]}_{pair[1]}", False, str(exc)))
    expected_kind = {("MPp", "MmM"): "end_a", ("MPpP", "MmM"): "end_b", ("MPpP", "MPpPM"): "cusp"}
    thresholds: dict[str, float] = {}
    for name in THRESHOLD_NAMES:
        pair, side = _THRESHOLD_SOURCE[name]
        piece = raw.get(pair)
        if piece is None:
            continue
        kinds = [ep.kind for ep in piece.endpoints]
        if expected_kind[pair] not in kinds:
            require(Check(f"threshold_{name}", False, f"{pair} ends with {kinds}"))
            continue
        ep = next(ep for ep in piece.endpoints if ep.kind == expected_kind[pair])
        thresholds[name] = float(ep.sample.alpha_a if side == "a" else ep.sample.alpha_b)
    if len(thresholds) != len(THRESHOLD_NAMES):
        require(Check("thresholds", False, f"only {sorted(thresholds)} found"))
    a_s = tree.alpha_sing
    th = thresholds
    require(Check(
        "threshold_order",
        HALF_PI < th["MPpPM"] < th["MPpP"] < th["MPp"] < a_s < th["MmM"] < th["MmM'"] < THREE_HALF_PI,
        ", ".join(f"{k}={v:.6f}" for k, v in th.items()),
    ))
    a_mmm2 = th["MmM'"]
    pruning = a_mmm2 > tree.alpha_mmmp
    checks.append(Check("pruning_inequality", pruning,
                        f"MmM' threshold {a_mmm2:.6f} vs 2*pi - alpha_sing {tree.alpha_mmmp:.6f}"))
    if not pruning:
        warnings.append("pruning inequality fails: the dormant branch MmMm is activated")

    # threshold points are reached first by the two branches that define them
    for name, pair in (("MPp", ("MPp", "MmM")), ("MPpP", ("MPpP", "MmM"))):
        piece = raw[pair]
        ep = next(ep for ep in piece.endpoints if ep.kind == expected_kind[pair])
        dom = _dominance(inverter, *pair)(ep.sample)
        require(Check(f"threshold_{name}_not_dominated", not dom, f"point {tuple(round(c, 6) for c in ep.sample.point)}"))

    windows = _reduced_windows(tree, th)
    branches = []
    for w in WORDS:
        branches.append(BranchRecord(w, tree.param_kind(w), tree.extremal_window(w), windows[w], False))
    if not pruning:
        for w in DORMANT_WORDS:
            ew = tree.extremal_window(w)
            branches.append(BranchRecord(w, tree.param_kind(w), ew, ew, True))

    # cut locus pieces clipped where a third extremal arrives earlier
    pieces = []
    for a, b in CUT_PAIRS:
        try:
            pieces.append(trace_cut_locus(tree, a, b, dominated=_dominance(inverter, a, b), radius=radius))
        except SolverFailure as exc:
            require(Check(f"trace_{a}_{b}", False, str(exc)))
    worst = max((abs(s.t - _arrival_on_arc(tree, p.branch_b, s.alpha_b, s.point))
                 for p in pieces for s in p.samples), default=0.0)
    require(Check("cut_equal_time", worst < 1e-9, f"max arrival-time difference {worst:.3e}"))

    axis = axis_cut_locus(tree, radius)
    require(Check("axis_symmetry", axis.max_abs_y < 1e-10, f"max |y| {axis.max_abs_y:.3e}"))
    checks.append(Check(
        "axis_threshold_expression", abs(axis.discrepancy) < 1e-6,
        f"tracer {axis.threshold_tracer:.9f}, printed expression {axis.threshold_expression:.6f}",
    ))
    ab = abnormal_cut(tree, inverter)
    checks.append(Check(
        "abnormal_cut", not ab.empty,
        f"t in [{ab.t_start:.6f}, {ab.t_end:.6f}], min value gap {ab.min_gap:.6f}",
    ))

    curves = []
    for word, nxt in _SWITCHES:
        switched = word + nxt
        win = windows.get(switched) or windows.get(owner_word(switched)) or tree.extremal_window(switched)
        kind = "u" if tree.letters[word[-1]][0] != tree.letters[nxt][0] else "v"
        for ps, qs in _optimal_runs(inverter, tree, word, nxt, win, radius, curve_samples):
            curves.append(SwitchingCurveRecord(word, nxt, kind, tuple(ps), tuple(qs)))

    cov, owners_check, _ = _coverage(inverter, radius, coverage_n)
    require(cov)
    checks.append(owners_check)

    syn = Synthesis(
        eta=tree.eta,
        radius=radius,
        branches=tuple(branches),
        thresholds=dict(thresholds),
        switching_curves=tuple(curves),
        cut_loci=tuple(pieces),
        axis_cut=axis,
        turnpike=(ReducedPoint(tree.x_turnpike, 0.0), ReducedPoint(-radius, 0.0)),
        abnormal_segment=ab,
        build_report=BuildReport(tuple(checks), tuple(warnings)),
        inverter_table=inverter_table,
    )
    syn.__dict__["inverter"] = inverter
    syn.__dict__["tree"] = tree
    return syn


def _arrival_on_arc(tree: FamilyTree, word: str, alpha: float, point) -> float:
    """Time at which the last arc of (word, alpha) passes ``point`` (angle on its circle)."""
    from .cutlocus import ArcEvaluator

    e = ArcEvaluator(tree, word)
    T, x, y, _, _ = e.start_alpha(alpha)
    u, v = tree.letters[word[-1]]
    if u == 0.0:
        return T + (x - point[0]) / v
    cy = -v / u
    d = (u * (math.atan2(point[1] - cy, point[0]) - math.atan2(y - cy, x))) % (2.0 * math.pi)
    if 2.0 * math.pi - d < 1e-9:
        d -= 2.0 * math.pi
    return T + d
