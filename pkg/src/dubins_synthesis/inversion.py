"""Point inversion: every extremal arc that passes through a query point, and when.

Along an arc with u != 0 the state rotates about a fixed centre C, so the
arc started at S(a) reaches q iff |S(a) - C| = |q - C|. The parameter is
found by a sign-change scan of a cached table of S(a) followed by a
vectorized Illinois refinement; the arc duration then follows from the
angle between S(a) - C and q - C. The root arcs M and m, and the turnpike,
do not depend on the parameter and are handled as single curves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .families import HALF_PI, THREE_HALF_PI, FamilyTree, Window, family_of

TWO_PI = 2.0 * math.pi

# Arcs swept by a one-parameter family (the parameter moves the arc).
SWEPT_ARCS = (
    "MP", "MPp", "MPpP", "MPpPM", "MPpPMm",
    "Mm", "MmM", "MmMP", "MmMPp", "MmMm",
    "MsP", "MsPp", "MsM", "MsMm",
)


@dataclass(frozen=True)
class Arrival:
    """One extremal arc reaching a point: arc word, parameter, arrival time."""

    t: float
    arc_word: str
    param: float | None
    arc_index: int
    elapsed: float  # time spent on the arc
    remaining: float  # time left before the arc ends

    def same_extremal(self, other: "Arrival", tol: float = 1e-7) -> bool:
        """True when both describe one trajectory (e.g. either side of its own switch)."""
        a, b = self.arc_word, other.arc_word
        if not (a.startswith(b) or b.startswith(a)):
            return False
        if self.param is None or other.param is None:
            return True
        return abs(self.param - other.param) <= tol


def _cluster(lo: float, hi: float, n: int, lo_open: bool, hi_open: bool) -> np.ndarray:
    """Uniform samples plus geometric clustering toward open ends."""
    base = np.linspace(lo, hi, n)
    extra = []
    span = hi - lo
    geo = np.geomspace(1e-12, 2.0 / n, 40) * span
    if lo_open:
        extra.append(lo + geo)
    if hi_open:
        extra.append(hi - geo)
    pts = np.unique(np.concatenate([base] + extra))
    return pts[(pts > lo) | (not lo_open)]


class ArcTable:
    """Cached start points of a swept arc over its parameter window."""

    def __init__(self, tree: FamilyTree, arc_word: str, window: Window, n: int):
        self.tree = tree
        self.word = arc_word
        self.window = window
        self.k = len(arc_word) - 1
        self.u, self.v = tree.letters[arc_word[-1]]
        self.cy = -self.v / self.u
        lo, hi = window.lo, window.hi
        a = _cluster(lo, hi, n, not window.lo_closed, not window.hi_closed)
        if not window.lo_closed:
            a = a[a > lo]
        if not window.hi_closed:
            a = a[a < hi]
        self.params = a
        T, x, y, _, _ = tree.arc_start(arc_word, a)
        self.T = np.asarray(T, dtype=float)
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.end = np.asarray(tree.arc_end_time(arc_word, a), dtype=float)
        self.radius = np.hypot(self.x, self.y - self.cy)

    def radius_at(self, a: np.ndarray) -> np.ndarray:
        _, x, y, _, _ = self.tree.arc_start(self.word, a)
        return np.hypot(x, y - self.cy)

    def solve(self, qx: np.ndarray, qy: np.ndarray, tol: float = 1e-12):
        """All (point index, param, start time, elapsed, remaining) with the arc through q."""
        r = np.hypot(qx, qy - self.cy)
        out_i, out_a = [], []
        chunk = max(1, 2_000_000 // max(1, self.params.size))
        rad = self.radius
        for s in range(0, r.size, chunk):
            g = rad[None, :] - r[s:s + chunk, None]
            sg = np.sign(g)
            hit = (sg[:, :-1] * sg[:, 1:]) <= 0.0
            ii, jj = np.nonzero(hit)
            out_i.append(ii + s)
            out_a.append(jj)
        ii = np.concatenate(out_i) if out_i else np.zeros(0, int)
        jj = np.concatenate(out_a) if out_a else np.zeros(0, int)
        if ii.size == 0:
            return ii, np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0)
        a0 = self.params[jj].copy()
        a1 = self.params[jj + 1].copy()
        target = r[ii]
        g0 = rad[jj] - target
        g1 = rad[jj + 1] - target
        a = self._illinois(a0, a1, g0, g1, target, tol)
        T, x, y, _, _ = self.tree.arc_start(self.word, a)
        T = np.asarray(T, dtype=float)
        end = np.asarray(self.tree.arc_end_time(self.word, a), dtype=float)
        ang_q = np.arctan2(qy[ii] - self.cy, qx[ii])
        ang_s = np.arctan2(y - self.cy, x)
        d = np.mod(self.u * (ang_q - ang_s), TWO_PI)
        d = np.where(TWO_PI - d < 1e-11, 0.0, d)
        # reject spurious brackets (radius mismatch after refinement)
        rr = np.hypot(x, y - self.cy)
        good = np.abs(rr - target) < 1e-9 * max(1.0, float(np.max(target)) if target.size else 1.0)
        rem = end - (T + d)
        keep = good & (rem >= -1e-11)
        return ii[keep], a[keep], T[keep], d[keep], np.maximum(rem[keep], 0.0)

    def _illinois(self, a0, a1, g0, g1, target, tol):
        a0 = a0.copy(); a1 = a1.copy(); g0 = g0.copy(); g1 = g1.copy()
        exact0 = g0 == 0.0
        exact1 = g1 == 0.0
        side = np.zeros(a0.shape, int)
        for _ in range(100):
            denom = g1 - g0
            with np.errstate(divide="ignore", invalid="ignore"):
                c = np.where(denom != 0.0, a1 - g1 * (a1 - a0) / denom, 0.5 * (a0 + a1))
            bad = ~np.isfinite(c) | (c <= np.minimum(a0, a1)) | (c >= np.maximum(a0, a1))
            c = np.where(bad, 0.5 * (a0 + a1), c)
            gc = self.radius_at(c) - target
            left = np.sign(gc) == np.sign(g0)
            # root between c and a1
            a0 = np.where(left, c, a0)
            g0n = np.where(left, gc, g0)
            g1n = np.where(left & (side == 1), 0.5 * g1, g1)
            # root between a0 and c
            a1 = np.where(~left, c, a1)
            g1n = np.where(~left, gc, g1n)
            g0n = np.where(~left & (side == -1), 0.5 * g0n, g0n)
            side = np.where(left, 1, -1)
            g0, g1 = g0n, g1n
            if np.all((np.abs(a1 - a0) <= tol * np.maximum(1.0, np.abs(a0))) | (gc == 0.0)):
                break
        res = np.where(np.abs(g0) < np.abs(g1), a0, a1)
        return np.where(exact0, a0, np.where(exact1, a1, res))


class Inverter:
    """All arrivals of tree extremals at query points."""

    def __init__(self, tree: FamilyTree, radius: float = 12.0, n_table: int = 3000,
                 include_dormant: bool = True):
        self.tree = tree
        self.radius = float(radius)
        eta = tree.eta
        self.tau_max = tree.t_sing + (2.0 * self.radius + eta + 2.0) / eta
        words = [w for w in SWEPT_ARCS if include_dormant or w != "MmMm"]
        self.tables = []
        for w in words:
            win = tree.extremal_window(w)
            if family_of(w) == "turnpike":
                win = Window(win.lo, self.tau_max, False, True)
            self.tables.append(ArcTable(tree, w, win, n_table))
        # the root arc M lasts at most until the latest of its switches
        self.m_root_end = THREE_HALF_PI - tree.alpha_sing

    def arrivals_many(self, points) -> list[list[Arrival]]:
        """For each point, every arrival sorted by time."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        qx, qy = pts[:, 0], pts[:, 1]
        out: list[list[Arrival]] = [[] for _ in range(pts.shape[0])]
        for tab in self.tables:
            ii, a, T, d, rem = tab.solve(qx, qy)
            for i, ai, Ti, di, ri in zip(ii.tolist(), a.tolist(), T.tolist(), d.tolist(), rem.tolist()):
                out[i].append(Arrival(Ti + di, tab.word, ai, tab.k, di, ri))
        self._curves(qx, qy, out)
        for lst in out:
            lst.sort(key=lambda r: (r.t, r.arc_word))
        return out

    def _curves(self, qx, qy, out, tol: float = 1e-9) -> None:
        tree = self.tree
        eta = tree.eta
        # target
        at_target = np.hypot(qx, qy + 1.0) < tol
        for i in np.nonzero(at_target)[0]:
            out[i].append(Arrival(0.0, "M", None, 0, 0.0, self.m_root_end))
        # root fast arc: circle about (0, eta) of radius eta + 1, clockwise in P2
        r = np.hypot(qx, qy - eta)
        on = (np.abs(r - (eta + 1.0)) < tol) & ~at_target
        ang = np.mod(-math.pi / 2.0 - np.arctan2(qy - eta, qx), TWO_PI)
        for i in np.nonzero(on & (ang <= self.m_root_end + tol))[0]:
            t = float(ang[i])
            out[i].append(Arrival(t, "M", None, 0, t, max(self.m_root_end - t, 0.0)))
        # abnormal arc: circle about (0, 1) of radius 2
        r = np.hypot(qx, qy - 1.0)
        on = (np.abs(r - 2.0) < tol) & ~at_target
        ang = np.mod(-math.pi / 2.0 - np.arctan2(qy - 1.0, qx), TWO_PI)
        for i in np.nonzero(on & (ang <= math.pi + tol))[0]:
            t = float(ang[i])
            out[i].append(Arrival(t, "m", THREE_HALF_PI, 0, t, max(math.pi - t, 0.0)))
        # turnpike
        on = (np.abs(qy) < tol) & (qx <= tree.x_turnpike + tol)
        for i in np.nonzero(on)[0]:
            d = max((tree.x_turnpike - qx[i]) / eta, 0.0)
            out[i].append(Arrival(tree.t_sing + d, "Ms", None, 1, d, math.inf))
