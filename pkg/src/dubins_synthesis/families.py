"""The extremal family tree: words, windows, switching times, states and switching curves.

Every extremal leaves the target X0 = (0, -1) of the backward system (P2)
with a slow or fast left turn. With the covector started at
p(0) = (cos a, -sin a) three families appear:

* Family 1 (turnpike): the fast left turn started at ``a = alpha_sing`` reaches
  the x~ axis tangentially at ``t_sing`` and may follow it with u = 0 until an
  exit time ``tau``, after which it turns (P or M) and switches to the slow
  speed a quarter turn later.
* Family 2 (``a`` in (pi/2, alpha_sing]): u-switch first, words MP, MPp, ...
* Family 3 (``a`` in [alpha_sing, 3*pi/2)): v-switch first, words Mm, MmM, ...

The slow left turn is only extremal for ``a = 3*pi/2`` (the abnormal word m).
States are produced by composing exact flows from the switching times, which
are available in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import (
    TARGET,
    ControlLetter,
    DomainError,
    InvalidParameterError,
    OutOfWindowError,
    ReducedPoint,
    UnsupportedParameterError,
)
from .dynamics import (
    Covector,
    adjoint_flow,
    bang_flow,
    hamiltonian,
    switching_values,
)

HALF_PI = 0.5 * math.pi
THREE_HALF_PI = 1.5 * math.pi

WORDS = (
    "m", "M", "Ms", "MsPp", "MsMm",
    "MP", "MPp", "MPpP", "MPpPM", "MPpPMm",
    "Mm", "MmM", "MmMP", "MmMPp",
)
DORMANT_WORDS = ("MmMm",)

# Every arc of the tree is identified by the word ending with it.
ARC_WORDS = (
    "m", "M", "Ms", "MsP", "MsPp", "MsM", "MsMm",
    "MP", "MPp", "MPpP", "MPpPM", "MPpPMm",
    "Mm", "MmM", "MmMP", "MmMPp", "MmMm",
)

_FAMILY_U_FIRST = "MPpPMm"
_FAMILY_V_FIRST = "MmMPp"

__all__ = [
    "WORDS",
    "DORMANT_WORDS",
    "ARC_WORDS",
    "Window",
    "BranchPoint",
    "ExtremalBranch",
    "SwitchingCurvePiece",
    "AdmissibilityReport",
    "FamilyTree",
    "alpha_sing",
    "t_sing",
    "family_of",
    "owner_word",
]


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not math.isfinite(eta):
        raise InvalidParameterError(f"eta must be finite, got {eta}")
    if eta < 1.0:
        raise UnsupportedParameterError(f"eta = {eta} < 1 would need v_max < v_min; the family tree requires eta > 1")
    if eta == 1.0:
        raise UnsupportedParameterError(
            "eta = 1 (v_min = v_max) is the constant-speed Dubins problem; "
            "the family tree requires v_max > v_min"
        )
    return eta


def alpha_sing(eta: float) -> float:
    """Covector angle of the extremal that reaches the turnpike: arccos(-eta/(eta+1))."""
    eta = _check_eta(eta)
    return math.acos(-eta / (eta + 1.0))


def t_sing(eta: float) -> float:
    """Time at which the singular extremal touches the x~ axis: pi - alpha_sing."""
    return math.pi - alpha_sing(eta)


def family_of(word: str) -> str:
    """Family label: 'abnormal', 'root', 'turnpike', 'u_first' or 'v_first'."""
    if word == "m":
        return "abnormal"
    if word == "M":
        return "root"
    if word.startswith("Ms"):
        return "turnpike"
    if word.startswith("MP"):
        return "u_first"
    if word.startswith("Mm"):
        return "v_first"
    raise InvalidParameterError(f"unknown word {word!r}")


def owner_word(arc_word: str) -> str:
    """Word of the synthesis that owns the arc ending ``arc_word``."""
    if arc_word in ("MsP", "MsM"):
        return arc_word + arc_word[-1].lower()
    return arc_word


def _validate_word(word: str) -> None:
    if word not in ARC_WORDS:
        raise InvalidParameterError(f"unknown word {word!r}")


@dataclass(frozen=True)
class Window:
    """Interval of a branch parameter with explicit endpoint closure."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x: float, tol: float = 0.0) -> bool:
        if x < self.lo - tol or x > self.hi + tol:
            return False
        if x == self.lo and not self.lo_closed and tol == 0.0:
            return False
        if x == self.hi and not self.hi_closed and tol == 0.0:
            return False
        return True

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def clip(self, lo: float | None = None, hi: float | None = None,
             lo_closed: bool | None = None, hi_closed: bool | None = None) -> "Window":
        return Window(
            self.lo if lo is None else lo,
            self.hi if hi is None else hi,
            self.lo_closed if lo_closed is None else lo_closed,
            self.hi_closed if hi_closed is None else hi_closed,
        )

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}

    @classmethod
    def from_dict(cls, d: dict) -> "Window":
        return cls(float(d["lo"]), float(d["hi"]), bool(d["lo_closed"]), bool(d["hi_closed"]))

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{self.lo:.6f}, {self.hi:.6f}{']' if self.hi_closed else ')'}"


class BranchPoint(NamedTuple):
    point: ReducedPoint
    covector: Covector
    letter: ControlLetter
    arc_index: int


@dataclass(frozen=True)
class ExtremalBranch:
    """One word of the tree with its parameter window and evaluators."""

    word: str
    param_kind: str
    param_window: Window
    tree: "FamilyTree"
    dormant: bool = False

    def switch_times(self, param: float | None) -> tuple[float, ...]:
        return self.tree.switch_times(self.word, param)

    def state(self, param: float | None, t: float) -> BranchPoint:
        return self.tree.branch_state(self.word, param, t)

    def end_time(self, param: float | None) -> float:
        return self.tree.next_switch(self.word, param)


@dataclass(frozen=True)
class SwitchingCurvePiece:
    """Locus of the switch ending the last arc of ``branch``.

    ``next_letter`` is the letter that starts at the curve and ``kind`` is
    'u' or 'v' according to which control changes.
    """

    branch: str
    next_letter: str
    kind: str
    param_window: Window
    evaluator: Callable[[float], ReducedPoint]
    params: tuple[float, ...] = ()
    points: tuple[ReducedPoint, ...] = ()

    def eval(self, param: float) -> ReducedPoint:
        return self.evaluator(param)

    @property
    def switched_word(self) -> str:
        return self.branch + self.next_letter


@dataclass(frozen=True)
class AdmissibilityReport:
    p_start_rejected: bool
    p_start_max_phi_u0: float
    p_start_details: tuple[tuple[float, float], ...]
    m_start_unique_alpha: float | None
    m_start_rejected_alphas: tuple[float, ...]
    m_start_phi_residual: float
    m_start_zero_at_pi: tuple[float, float]

    @property
    def ok(self) -> bool:
        return self.p_start_rejected and self.m_start_unique_alpha is not None


class _Scalar:
    cos = staticmethod(math.cos)
    sin = staticmethod(math.sin)

    @staticmethod
    def arccos(c):
        if abs(c) > 1.0:
            if abs(c) - 1.0 < 1e-12:
                c = math.copysign(1.0, c)
            else:
                raise DomainError(f"arccos argument {c!r} outside [-1, 1]")
        return math.acos(c)

    @staticmethod
    def arcsin(c):
        if abs(c) > 1.0:
            if abs(c) - 1.0 < 1e-12:
                c = math.copysign(1.0, c)
            else:
                raise DomainError(f"arcsin argument {c!r} outside [-1, 1]")
        return math.asin(c)


class _Array:
    cos = staticmethod(np.cos)
    sin = staticmethod(np.sin)

    @staticmethod
    def arccos(c):
        return np.arccos(np.clip(c, -1.0, 1.0))

    @staticmethod
    def arcsin(c):
        return np.arcsin(np.clip(c, -1.0, 1.0))


class FamilyTree:
    """Closed-form evaluators for every word at a fixed speed ratio ``eta``."""

    def __init__(self, eta: float):
        self.eta = _check_eta(eta)
        self.alpha_sing = math.acos(-self.eta / (self.eta + 1.0))
        self.t_sing = math.pi - self.alpha_sing
        # lower end of the MmMP window, where the u-switch first appears
        self.alpha_mmmp = 2.0 * math.pi - self.alpha_sing
        self.x_turnpike = -math.sqrt(2.0 * self.eta + 1.0)
        self.letters = {ch: ControlLetter(ch).control(self.eta) for ch in "mpMPs"}

    # -- windows ---------------------------------------------------------
    def param_kind(self, word: str) -> str:
        return "tau" if family_of(word) == "turnpike" else "alpha"

    def extremal_window(self, word: str) -> Window:
        """Parameters for which ``word`` is an extremal of the tree."""
        _validate_word(word)
        fam = family_of(word)
        if fam == "abnormal":
            return Window(THREE_HALF_PI, THREE_HALF_PI, True, True)
        if fam == "root":
            return Window(HALF_PI, THREE_HALF_PI)
        if fam == "turnpike":
            return Window(self.t_sing, math.inf)
        if fam == "u_first":
            return Window(HALF_PI, self.alpha_sing, False, True)
        if word == "MmMm":
            return Window(self.alpha_sing, self.alpha_mmmp, True, True)
        if word in ("MmMP", "MmMPp"):
            return Window(self.alpha_mmmp, THREE_HALF_PI, True, False)
        return Window(self.alpha_sing, THREE_HALF_PI, True, False)

    def branch(self, word: str) -> ExtremalBranch:
        return ExtremalBranch(word, self.param_kind(word), self.extremal_window(word), self,
                              dormant=word in DORMANT_WORDS)

    def _check_param(self, word: str, param: float | None) -> float | None:
        fam = family_of(word)
        if fam == "abnormal":
            if param is not None and abs(param - THREE_HALF_PI) > 1e-12:
                raise OutOfWindowError(f"the abnormal word only exists for alpha = 3*pi/2, got {param}")
            return THREE_HALF_PI
        if word == "Ms" and param is None:
            # the exit time of a pure turnpike arc is irrelevant
            return self.t_sing + 1.0
        if param is None:
            raise OutOfWindowError(f"word {word!r} requires a parameter")
        win = self.extremal_window(word)
        if not win.contains(param):
            raise OutOfWindowError(f"parameter {param!r} outside window {win} of {word!r}")
        return float(param)

    # -- switching times -------------------------------------------------
    def _times(self, xp, word: str, a):
        """Start times of every arc of ``word`` (first entry 0); no window checks."""
        fam = family_of(word)
        n = len(word)
        zero = a * 0.0
        if fam in ("abnormal", "root"):
            return [zero]
        if fam == "turnpike":
            ts = [zero, zero + self.t_sing, a, a + HALF_PI]
            return ts[:n]
        c = (self.eta + 1.0) / self.eta * xp.cos(a)
        if fam == "u_first":
            A = xp.arccos(c)
            ts = [zero, -a + A, -HALF_PI - a + 2 * A, HALF_PI - a + 2 * A, -a + 3 * A, -a - HALF_PI + 4 * A]
            return ts[:n]
        ts = [zero, THREE_HALF_PI - a, 2.5 * math.pi - a]
        if n > 3:
            if word[3] == "m":
                ts.append(3.5 * math.pi - a)
            else:
                B = xp.arcsin(c)
                ts.append(2.5 * math.pi - a - B)
                if n > 4:
                    ts.append(2.5 * math.pi - a - 2 * B)
        return ts[:n]

    def switch_times(self, word: str, param: float | None) -> tuple[float, ...]:
        """Start time of each arc of ``word``; entry k is the time of the k-th switch."""
        _validate_word(word)
        a = self._check_param(word, param)
        return tuple(float(t) for t in self._times(_Scalar, word, a))

    def switching_time(self, word: str, arc_index: int, param: float | None) -> float:
        ts = self.switch_times(word, param)
        if not 0 <= arc_index < len(ts):
            raise InvalidParameterError(f"arc index {arc_index} invalid for {word!r}")
        return ts[arc_index]

    def _next_switch(self, xp, word: str, a):
        """Time at which the last arc of ``word`` stops being extremal."""
        fam = family_of(word)
        if fam == "abnormal":
            return a * 0.0 + math.pi
        if fam == "root":
            c = (self.eta + 1.0) / self.eta * xp.cos(a)
            if xp is _Scalar:
                return -a + xp.arccos(c) if a <= self.alpha_sing else THREE_HALF_PI - a
            return np.where(a <= self.alpha_sing, -a + xp.arccos(c), THREE_HALF_PI - a)
        if word == "Ms":
            return a * 0.0 + math.inf
        if fam == "turnpike":
            if len(word) == 3:
                return a + HALF_PI
            return a + 1.5 * math.pi
        if fam == "u_first":
            if len(word) < len(_FAMILY_U_FIRST):
                return self._times(xp, _FAMILY_U_FIRST[: len(word) + 1], a)[-1]
            return self._times(xp, word, a)[-1] + math.pi
        # v_first
        if word == "Mm":
            return 2.5 * math.pi - a
        if word == "MmM":
            c = (self.eta + 1.0) / self.eta * xp.cos(a)
            if xp is _Scalar:
                return 2.5 * math.pi - a - xp.arcsin(c) if a >= self.alpha_mmmp else 3.5 * math.pi - a
            return np.where(a >= self.alpha_mmmp, 2.5 * math.pi - a - xp.arcsin(c), 3.5 * math.pi - a)
        if word == "MmMP":
            return self._times(xp, "MmMPp", a)[-1]
        return self._times(xp, word, a)[-1] + math.pi

    def next_switch(self, word: str, param: float | None) -> float:
        _validate_word(word)
        a = self._check_param(word, param)
        if word == "Ms":
            return math.inf
        return float(self._next_switch(_Scalar, word, a))

    # -- states ----------------------------------------------------------
    def _initial_alpha(self, word: str, a):
        fam = family_of(word)
        if fam == "turnpike":
            return self.alpha_sing
        return a

    def _compose(self, xp, word: str, a, k: int):
        """State and covector at the start of arc ``k`` of ``word``."""
        ts = self._times(xp, word, a)
        a0 = self._initial_alpha(word, a)
        x = a * 0.0 + TARGET.xt
        y = a * 0.0 + TARGET.yt
        px = a * 0.0 + xp.cos(a0)
        py = a * 0.0 - xp.sin(a0)
        for j in range(k):
            nxt = word[j + 1]
            if nxt == "s":
                # exact junction with the turnpike
                x = a * 0.0 + self.x_turnpike
                y = a * 0.0
                px = a * 0.0 - 1.0
                py = a * 0.0
                continue
            u, v = self.letters[word[j]]
            dt = ts[j + 1] - ts[j]
            x, y, px, py = self._flow(xp, x, y, px, py, u, v, dt)
        return ts[k], x, y, px, py

    @staticmethod
    def _flow(xp, x, y, px, py, u, v, dt):
        if u == 0.0:
            return x - v * dt, y, px, py
        cy = -v / u
        ang = u * dt
        c, s = xp.cos(ang), xp.sin(ang)
        dy = y - cy
        return c * x - s * dy, cy + s * x + c * dy, c * px - s * py, s * px + c * py

    def arc_start(self, word: str, params):
        """Vectorized (T, x, y, px, py) at the start of the last arc of ``word``."""
        _validate_word(word)
        a = np.asarray(params, dtype=float)
        return self._compose(_Array, word, a, len(word) - 1)

    def arc_end_time(self, word: str, params):
        """Vectorized end time of the last arc of ``word``."""
        _validate_word(word)
        a = np.asarray(params, dtype=float)
        return self._next_switch(_Array, word, a)

    def branch_state(self, word: str, param: float | None, t: float) -> BranchPoint:
        """State, covector and letter of ``word`` at time ``t`` (right-continuous at switches).

        Past the end of the last arc the last letter is continued; the
        result is then an admissible trajectory but no longer an extremal.
        """
        _validate_word(word)
        if t < 0.0:
            raise InvalidParameterError(f"t must be non-negative, got {t}")
        a = self._check_param(word, param)
        ts = self._times(_Scalar, word, a)
        k = 0
        for j in range(1, len(ts)):
            if t >= ts[j]:
                k = j
        if word == "Ms":
            if k == 0:
                q, p = self._start_only("M", self.alpha_sing, t)
                return BranchPoint(q, p, ControlLetter.M, 0)
            x = self.x_turnpike - self.eta * (t - self.t_sing)
            return BranchPoint(ReducedPoint(x, 0.0), Covector(-1.0, 0.0), ControlLetter.s, 1)
        T, x, y, px, py = self._compose(_Scalar, word, a, k)
        u, v = self.letters[word[k]]
        dt = t - T
        if u == 0.0:
            return BranchPoint(ReducedPoint(x - v * dt, y), Covector(px, py), ControlLetter.s, k)
        q = bang_flow((x, y), u, v, dt)
        p = adjoint_flow((px, py), u, dt)
        return BranchPoint(q, p, ControlLetter(word[k]), k)

    def _start_only(self, letter: str, a: float, t: float):
        u, v = self.letters[letter]
        q = bang_flow(TARGET, u, v, t)
        p = adjoint_flow((math.cos(a), -math.sin(a)), u, t)
        return q, p

    def switch_point(self, word: str, param: float | None, k: int | None = None) -> BranchPoint:
        """State and covector at the start of arc ``k`` (default: last arc)."""
        _validate_word(word)
        a = self._check_param(word, param)
        k = len(word) - 1 if k is None else k
        T, x, y, px, py = self._compose(_Scalar, word, a, k)
        return BranchPoint(ReducedPoint(x, y), Covector(px, py), ControlLetter(word[k]), k)

    # -- switching curves ------------------------------------------------
    def continuations(self, word: str) -> tuple[str, ...]:
        """Letters that may follow the last arc of ``word`` inside the tree."""
        out = []
        for w in ARC_WORDS:
            if len(w) == len(word) + 1 and w.startswith(word):
                out.append(w[-1])
        return tuple(out)

    def switching_curve(self, word: str, n_samples: int = 200,
                        next_letter: str | None = None) -> SwitchingCurvePiece | None:
        """Curve where the last arc of ``word`` switches to ``next_letter``.

        Returns ``None`` when the last arc of ``word`` never switches inside
        the tree (for instance MPpPMm or MsPp).
        """
        _validate_word(word)
        nexts = self.continuations(word)
        if word in ("MmM",) and next_letter is None:
            next_letter = "P"
        if next_letter is None:
            if not nexts:
                return None
            if len(nexts) > 1:
                raise InvalidParameterError(
                    f"word {word!r} continues with {nexts}; pass next_letter"
                )
            next_letter = nexts[0]
        if next_letter not in nexts:
            return None
        switched = word + next_letter
        if switched == "Ms":
            return None
        win = self.extremal_window(switched)
        u0 = self.letters[word[-1]][0]
        u1 = self.letters[next_letter][0]
        kind = "u" if u0 != u1 else "v"

        def evaluator(param: float, _w=switched) -> ReducedPoint:
            return self.switch_point(_w, param).point

        params = tuple(float(a) for a in sample_window(win, n_samples))
        pts = tuple(evaluator(a) for a in params)
        return SwitchingCurvePiece(word, next_letter, kind, win, evaluator, params, pts)

    def turnpike_entry(self) -> ReducedPoint:
        return ReducedPoint(self.x_turnpike, 0.0)

    # -- start arcs ------------------------------------------------------
    def start_arc_admissibility(self, n: int = 721) -> AdmissibilityReport:
        """Check which start arcs are compatible with the maximum condition.

        P start: with u = +1 the covector starts at (cos a, sin a) and
        phi_u(0) = cos a must be non-negative while phi_v(0) = -cos a > 0
        requires cos a < 0; every a in [pi/2, 3*pi/2] with cos a < 0 gives
        phi_u(0) < 0, so the P start is rejected.
        m start: p(0) = (cos a, -sin a) must give phi_v = -cos a <= 0 and
        phi_u = cos a >= 0 at t = 0+; only a = 3*pi/2 keeps both compatible
        on an initial interval.
        """
        eta = self.eta
        details = []
        max_phi = -math.inf
        for a in np.linspace(HALF_PI, THREE_HALF_PI, n):
            # phi_u at the start of a P arc with u0 = +1, p(0) = (cos a, sin a)
            phi0 = switching_values(TARGET, (math.cos(a), math.sin(a)))[0]
            details.append((float(a), phi0))
            max_phi = max(max_phi, phi0)
        p_rejected = all(phi <= 1e-15 for _, phi in details) and min(phi for _, phi in details) < 0.0

        rejected = []
        accepted = []
        eps = 1e-3
        for a in np.linspace(HALF_PI, THREE_HALF_PI, n):
            ok = True
            for t in (eps, 2 * eps, 5 * eps):
                q = bang_flow(TARGET, -1.0, 1.0, t)
                p = adjoint_flow((math.cos(a), -math.sin(a)), -1.0, t)
                phi_u, phi_v = switching_values(q, p)
                if phi_u > 1e-12 or phi_v > 1e-12:
                    ok = False
            if ok:
                accepted.append(float(a))
            else:
                rejected.append(float(a))
        unique = accepted[0] if len(accepted) == 1 else None
        # abnormal switching functions against -sin t
        resid = 0.0
        a = THREE_HALF_PI
        for t in np.linspace(0.0, math.pi, 101):
            q = bang_flow(TARGET, -1.0, 1.0, t)
            p = adjoint_flow((math.cos(a), -math.sin(a)), -1.0, t)
            phi_u, phi_v = switching_values(q, p)
            resid = max(resid, abs(phi_u + math.sin(t)), abs(phi_v + math.sin(t)))
        q = bang_flow(TARGET, -1.0, 1.0, math.pi)
        p = adjoint_flow((0.0, 1.0), -1.0, math.pi)
        at_pi = switching_values(q, p)
        return AdmissibilityReport(
            p_rejected, max_phi, tuple(details), unique, tuple(rejected), resid,
            (float(at_pi[0]), float(at_pi[1])),
        )

    def hamiltonian_along(self, word: str, param: float | None, t: float) -> float:
        bp = self.branch_state(word, param, t)
        u, v = self.letters[bp.letter.value]
        return hamiltonian(bp.point, bp.covector, u, v)


def sample_window(win: Window, n: int, inf_span: float = 10.0) -> np.ndarray:
    """``n`` parameters inside ``win``, staying a hair away from open ends."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    lo, hi = win.lo, win.hi
    if math.isinf(hi):
        hi = lo + inf_span
    if lo == hi:
        return np.array([lo])
    eps = 1e-9 * max(1.0, hi - lo)
    a = lo if win.lo_closed else lo + eps
    b = hi if (win.hi_closed and not math.isinf(win.hi)) else hi - eps
    if n == 1:
        return np.array([0.5 * (a + b)])
    return np.linspace(a, b, n)
