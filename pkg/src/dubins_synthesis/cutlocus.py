"""Cut loci: points reached at the same time by two distinct extremals.

A cut between the last arcs of two words solves, in (a, b, t),

    X_A(a, t) = X_B(b, t),

two equations in three unknowns, so solutions form curves. They are
seeded from a coarse scan, followed by pseudo-arclength continuation and
terminated at events: an arc starting or ending (the locus meets a
switching curve), a parameter window end, a third extremal arriving
earlier, or, for two consecutive arcs of one family, the cusp where the
nontrivial branch rejoins the trivial solution a = b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import DomainError, ReducedPoint, SolverFailure
from .families import FamilyTree, Window, _Array, _Scalar, family_of

RESIDUAL_TOL = 1e-10
EQUAL_TIME_TOL = 1e-9

__all__ = [
    "CutSample",
    "CutEndpoint",
    "CutLocusPiece",
    "AxisCut",
    "AbnormalCut",
    "ArcEvaluator",
    "equal_time_intersection",
    "seed_intersections",
    "trace_cut_locus",
    "cusp_parameter",
    "axis_cut_locus",
    "abnormal_cut",
    "axis_threshold_expression",
]


@dataclass(frozen=True)
class CutSample:
    point: ReducedPoint
    t: float
    alpha_a: float
    alpha_b: float


@dataclass(frozen=True)
class CutEndpoint:
    """How a traced piece ends: 'end_a', 'start_b', 'cusp', 'dominated', 'window_a', ..."""

    kind: str
    sample: CutSample


@dataclass(frozen=True)
class CutLocusPiece:
    branch_a: str
    branch_b: str
    samples: tuple[CutSample, ...]
    endpoints: tuple[CutEndpoint, CutEndpoint]
    threshold_a: float | None = None
    threshold_b: float | None = None
    threshold_kind: str | None = None
    degenerate: tuple[int, ...] = ()

    @property
    def points(self) -> list[ReducedPoint]:
        return [s.point for s in self.samples]


class ArcEvaluator:
    """Smooth evaluation of the last arc of ``word`` beyond its own time range.

    The tracer works in an internal parameter ``s`` that removes the square
    root singularities of the switching times: s = arccos((eta+1)/eta cos a)
    for the u-first family, s = arcsin((eta+1)/eta cos a) for MmMP and
    MmMPp, and s = a otherwise.
    """

    def __init__(self, tree: FamilyTree, word: str):
        self.tree = tree
        self.word = word
        self.k = len(word) - 1
        self.u, self.v = tree.letters[word[-1]]
        self.window = tree.extremal_window(word)
        self.kappa = tree.eta / (tree.eta + 1.0)
        if family_of(word) == "u_first":
            self.mode = "acos"
        elif word in ("MmMP", "MmMPp"):
            self.mode = "asin"
        else:
            self.mode = "id"
        w = self.window
        lo = self.param(w.lo) if not (self.mode == "id" and math.isinf(w.lo)) else w.lo
        hi = self.param(w.hi) if math.isfinite(w.hi) else w.hi
        self.s_window = Window(lo, hi, w.lo_closed, w.hi_closed)

    def alpha(self, s: float) -> float:
        if self.mode == "acos":
            return math.acos(max(-1.0, min(1.0, self.kappa * math.cos(s))))
        if self.mode == "asin":
            return 2.0 * math.pi - math.acos(max(-1.0, min(1.0, self.kappa * math.sin(s))))
        return s

    def param(self, a: float) -> float:
        if self.mode == "id":
            return a
        c = max(-1.0, min(1.0, math.cos(a) / self.kappa))
        return math.acos(c) if self.mode == "acos" else math.asin(c)

    def start(self, s: float) -> tuple[float, float, float, float, float]:
        return self.tree._compose(_Scalar, self.word, self.alpha(s), self.k)

    def start_alpha(self, a: float) -> tuple[float, float, float, float, float]:
        return self.tree._compose(_Scalar, self.word, a, self.k)

    def end(self, s: float) -> float:
        return float(self.tree._next_switch(_Scalar, self.word, self.alpha(s)))

    def pos(self, s: float, t: float) -> tuple[float, float]:
        T, x, y, _, _ = self.start(s)
        return _advance(x, y, self.u, self.v, t - T)

    def velocity(self, x: float, y: float) -> tuple[float, float]:
        return -self.v - self.u * y, self.u * x

    def events(self, s: float, t: float) -> dict[str, float]:
        """Signed margins; all are non-negative while (s, t) is on the arc inside its window."""
        win = self.s_window
        ev = {"window_lo": s - win.lo}
        if math.isfinite(win.hi):
            ev["window_hi"] = win.hi - s
        try:
            ev["start"] = t - self.start(s)[0]
            ev["end"] = self.end(s) - t
        except DomainError:
            ev["window_lo"] = min(ev["window_lo"], -1.0)
        return ev

    def table(self, params: np.ndarray):
        T, x, y, _, _ = self.tree._compose(_Array, self.word, params, self.k)
        E = self.tree._next_switch(_Array, self.word, params)
        return np.asarray(T, float), np.asarray(x, float), np.asarray(y, float), np.asarray(E, float)


def _advance(x, y, u, v, dt):
    if u == 0.0:
        return x - v * dt, y
    cy = -v / u
    c, s = math.cos(u * dt), math.sin(u * dt)
    dy = y - cy
    return c * x - s * dy, cy + s * x + c * dy


def _residual(ea: ArcEvaluator, eb: ArcEvaluator, z) -> np.ndarray:
    a, b, t = z
    xa, ya = ea.pos(a, t)
    xb, yb = eb.pos(b, t)
    return np.array([xa - xb, ya - yb])


def _dpos(e: ArcEvaluator, a: float, t: float, h: float) -> np.ndarray:
    """Parameter derivative of the arc position; one-sided next to a window edge."""
    try:
        p1 = e.pos(a + h, t); p0 = e.pos(a - h, t)
        return np.array([(p1[0] - p0[0]) / (2 * h), (p1[1] - p0[1]) / (2 * h)])
    except DomainError:
        pass
    p = e.pos(a, t)
    try:
        p0 = e.pos(a - h, t)
        return np.array([(p[0] - p0[0]) / h, (p[1] - p0[1]) / h])
    except DomainError:
        p1 = e.pos(a + h, t)
        return np.array([(p1[0] - p[0]) / h, (p1[1] - p[1]) / h])


def _jacobian(ea: ArcEvaluator, eb: ArcEvaluator, z, h: float = 1e-7) -> np.ndarray:
    a, b, t = z
    J = np.empty((2, 3))
    J[:, 0] = _dpos(ea, a, t, h)
    J[:, 1] = -_dpos(eb, b, t, h)
    xa, ya = ea.pos(a, t)
    xb, yb = eb.pos(b, t)
    va = ea.velocity(xa, ya)
    vb = eb.velocity(xb, yb)
    J[:, 2] = [va[0] - vb[0], va[1] - vb[1]]
    return J


def _newton(ea, eb, z0, extra=None, max_iter: int = 40, tol: float = RESIDUAL_TOL):
    """Newton on F = 0 (min-norm steps) or on [F; extra] = 0 when a constraint is given.

    ``extra`` is a pair (g, grad) with g(z) scalar and grad(z) its gradient.
    Returns (z, residual); raises SolverFailure on divergence.
    """
    z = np.array(z0, dtype=float)
    best = (math.inf, z.copy())
    for _ in range(max_iter):
        try:
            F = _residual(ea, eb, z)
        except (ValueError, ArithmeticError) as exc:
            raise SolverFailure(f"evaluation failed: {exc}", best[0], best[1]) from None
        r = float(np.hypot(*F))
        g = extra[0](z) if extra is not None else 0.0
        tot = max(r, abs(g))
        if tot < best[0]:
            best = (tot, z.copy())
        if r < tol and abs(g) < tol:
            return z, r
        J = _jacobian(ea, eb, z)
        if extra is None:
            JJ = J @ J.T
            try:
                step = J.T @ np.linalg.solve(JJ, F)
            except np.linalg.LinAlgError:
                raise SolverFailure("rank-deficient Jacobian", r, z) from None
        else:
            A = np.vstack([J, extra[1](z)])
            rhs = np.concatenate([F, [g]])
            try:
                step = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                raise SolverFailure("singular constrained Jacobian", r, z) from None
        # damping: halve until the residual decreases
        lam = 1.0
        for _ in range(30):
            zn = z - lam * step
            try:
                Fn = _residual(ea, eb, zn)
                gn = extra[0](zn) if extra is not None else 0.0
                if max(float(np.hypot(*Fn)), abs(gn)) < tot or lam < 1e-6:
                    break
            except (ValueError, ArithmeticError):
                pass
            lam *= 0.5
        z = zn
    F = _residual(ea, eb, z)
    r = float(np.hypot(*F))
    if r < tol:
        return z, r
    raise SolverFailure(f"Newton did not converge (residual {best[0]:.3e})", best[0], best[1])


def equal_time_intersection(tree: FamilyTree, branch_a: str, branch_b: str,
                            seed: Sequence[float], fix: tuple[str, float] | None = None,
                            tol: float = RESIDUAL_TOL):
    """Refine a seed (a, b, t) to an equal-time meeting point of the last arcs.

    ``fix`` optionally pins one unknown, e.g. ('t', 3.0) or ('alpha_a', 2.1);
    otherwise the nearest solution in the minimum-norm sense is returned.
    Returns (a, b, t, point, degenerate) where ``degenerate`` flags a
    tangential intersection (nearly rank-deficient Jacobian).
    """
    ea, eb = ArcEvaluator(tree, branch_a), ArcEvaluator(tree, branch_b)
    z0 = (ea.param(seed[0]), eb.param(seed[1]), float(seed[2]))
    if fix is not None:
        name, val = fix
        val = {"alpha_a": ea.param, "alpha_b": eb.param}.get(name, float)(val)
        fix = (name, val)
    z, degenerate = _refine(ea, eb, z0, fix, tol)
    x, y = ea.pos(z[0], z[2])
    return ea.alpha(z[0]), eb.alpha(z[1]), float(z[2]), ReducedPoint(x, y), degenerate


def _refine(ea: ArcEvaluator, eb: ArcEvaluator, z0, fix=None, tol: float = RESIDUAL_TOL):
    """Newton refinement in internal parameters; validates windows and distinctness."""
    extra = None
    if fix is not None:
        idx = {"alpha_a": 0, "alpha_b": 1, "t": 2}[fix[0]]
        val = float(fix[1])
        grad = np.zeros(3)
        grad[idx] = 1.0
        extra = (lambda z: z[idx] - val, lambda z: grad)
    z, _ = _newton(ea, eb, z0, extra, tol=tol)
    for name, e, p in (("a", ea, z[0]), ("b", eb, z[1])):
        if not e.s_window.contains(p, tol=1e-12):
            raise SolverFailure(f"solution parameter {name}={e.alpha(p):.6f} outside window {e.window}", 0.0, z)
    if ea.word == eb.word and abs(z[0] - z[1]) < 1e-8:
        raise SolverFailure("converged to the trivial solution a = b", 0.0, z)
    sv = np.linalg.svd(_jacobian(ea, eb, z), compute_uv=False)
    degenerate = bool(sv[-1] < 1e-8 * max(1.0, sv[0]))
    return z, degenerate


def seed_intersections(tree: FamilyTree, branch_a: str, branch_b: str, n: int = 200,
                       n_t: int = 200, tau_span: float = 8.0, max_seeds: int = 12):
    """Coarse (a x b) scan at matched times; returns candidate seeds sorted by gap."""
    ea, eb = ArcEvaluator(tree, branch_a), ArcEvaluator(tree, branch_b)

    def grid(e):
        w = e.s_window
        hi = w.hi if math.isfinite(w.hi) else w.lo + tau_span
        eps = 1e-6 * (hi - w.lo)
        return np.array([e.alpha(v) for v in np.linspace(w.lo + eps, hi - eps, n)])

    A, B = grid(ea), grid(eb)
    Ta, xa, ya, Ea = ea.table(A)
    Tb, xb, yb, Eb = eb.table(B)
    t_lo = max(Ta.min(), Tb.min())
    t_hi = min(np.minimum(Ea, Ta + 2 * math.pi).max(), np.minimum(Eb, Tb + 2 * math.pi).max())
    if not t_hi > t_lo:
        return []
    ts = np.linspace(t_lo, t_hi, n_t)
    same = family_of(branch_a) == family_of(branch_b)
    cands = []
    for t in ts:
        va = (Ta <= t) & (t <= Ea)
        vb = (Tb <= t) & (t <= Eb)
        if not va.any() or not vb.any():
            continue
        pa = _advance_arr(xa[va], ya[va], ea.u, ea.v, t - Ta[va])
        pb = _advance_arr(xb[vb], yb[vb], eb.u, eb.v, t - Tb[vb])
        d = np.hypot(pa[0][:, None] - pb[0][None, :], pa[1][:, None] - pb[1][None, :])
        if same:
            d = np.where(np.abs(A[va][:, None] - B[vb][None, :]) < 0.02, np.inf, d)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        cands.append((float(d[i, j]), float(A[va][i]), float(B[vb][j]), float(t)))
    cands.sort()
    # keep local minima that are spread out in (a, b, t)
    out = []
    for c in cands:
        if all(abs(c[1] - o[1]) + abs(c[2] - o[2]) + abs(c[3] - o[3]) > 0.05 for o in out):
            out.append(c)
        if len(out) >= max_seeds:
            break
    return [(a, b, t) for _, a, b, t in out]


def _advance_arr(x, y, u, v, dt):
    if u == 0.0:
        return x - v * dt, y + 0.0 * dt
    cy = -v / u
    c, s = np.cos(u * dt), np.sin(u * dt)
    dy = y - cy
    return c * x - s * dy, cy + s * x + c * dy


def cusp_parameter(tree: FamilyTree, word: str, bracket: tuple[float, float] | None = None,
                   h: float = 1e-6) -> float:
    """Parameter where arcs of ``word`` meet arcs of its own prefix at equal times.

    Pulling the last arcs of ``word`` back along their common rotation gives a
    planar curve Y(a); two arcs of the prefix family and of ``word`` at nearby
    parameters coincide when Y stalls, i.e. at the cusp Y'(a) = 0. Since
    Y'(a) is always orthogonal to the switching covector, the cusp is the root
    of the scalar lam(a) = Y'(a) . p_perp.
    """
    from scipy.optimize import brentq

    e = ArcEvaluator(tree, word)

    def lam(a: float) -> float:
        T1, x1, y1, _, _ = e.start_alpha(a + h)
        T0, x0, y0, _, _ = e.start_alpha(a - h)
        T, x, y, px, py = e.start_alpha(a)
        dS = ((x1 - x0) / (2 * h), (y1 - y0) / (2 * h))
        dT = (T1 - T0) / (2 * h)
        vx, vy = e.velocity(x, y)
        w = (dS[0] - dT * vx, dS[1] - dT * vy)
        n = math.hypot(px, py)
        return (w[0] * (-py) + w[1] * px) / n

    win = e.window
    lo, hi = bracket if bracket is not None else (win.lo + 1e-4, win.hi - 1e-4)
    grid = np.linspace(lo, hi, 401)
    vals = [lam(a) for a in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] * vals[i + 1] < 0.0:
            return float(brentq(lam, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
    raise SolverFailure(f"no cusp found for {word!r} in [{lo}, {hi}]")


@dataclass
class _Tracer:
    tree: FamilyTree
    ea: ArcEvaluator
    eb: ArcEvaluator
    dominated: Callable[[CutSample], bool] | None
    radius: float
    max_step: float
    max_steps: int
    same_adjacent: bool
    degenerate: list = field(default_factory=list)

    def sample(self, z) -> CutSample:
        x, y = self.ea.pos(z[0], z[2])
        return CutSample(ReducedPoint(x, y), float(z[2]), self.ea.alpha(z[0]), self.eb.alpha(z[1]))

    def margins(self, z) -> dict[str, float]:
        ev = {}
        for tag, e, p in (("a", self.ea, z[0]), ("b", self.eb, z[1])):
            for k, val in e.events(p, z[2]).items():
                ev[f"{k}_{tag}"] = val
        try:
            x, y = self.ea.pos(z[0], z[2])
            ev["radius"] = self.radius - math.hypot(x, y)
        except DomainError:
            pass
        if self.ea.word == self.eb.word or self.same_adjacent:
            ev["trivial"] = abs(z[0] - z[1]) - 1e-7
        return ev

    def tangent(self, z, prev=None) -> np.ndarray:
        J = _jacobian(self.ea, self.eb, z)
        tvec = np.cross(J[0], J[1])
        nrm = np.linalg.norm(tvec)
        if nrm == 0.0:
            raise SolverFailure("zero tangent", 0.0, z)
        tvec /= nrm
        if prev is not None and float(tvec @ prev) < 0.0:
            tvec = -tvec
        return tvec

    def correct(self, zp, tvec, z_ref, ds):
        """Pseudo-arclength corrector: F = 0 and (z - z_ref) . tvec = ds."""
        extra = (lambda z: float((z - z_ref) @ tvec) - ds, lambda z: tvec)
        z, _ = _newton(self.ea, self.eb, zp, extra, max_iter=25)
        return z

    def walk(self, z0, direction: float):
        """Continue from z0 in one direction until an event; returns (points, endpoint)."""
        pts = [np.array(z0, float)]
        tvec = direction * self.tangent(z0)
        h = 0.25 * self.max_step
        z = pts[0]
        for _ in range(self.max_steps):
            scale = max(abs(tvec[0]), abs(tvec[1]), 1e-12)
            hh = min(h, self.max_step / scale)
            try:
                zn = self.correct(z + hh * tvec, tvec, z, hh)
            except SolverFailure:
                over = [k for k, v in self.margins(z + hh * tvec).items()
                        if v < 0.0 and k.startswith("window")]
                if over and h < 1e-3 * self.max_step:
                    zb, kind = self.locate(z, None, tvec, hh, over, False)
                    pts.append(zb)
                    return pts, (kind, zb)
                h *= 0.5
                if h < 1e-10:
                    # stalled against a window corner: name the nearly active window
                    near = sorted((v, k) for k, v in self.margins(z).items() if k.startswith("window"))
                    if near and near[0][0] < 1e-4:
                        return pts, ("window_" + near[0][1][-1], z)
                    return pts, ("solver", z)
                continue
            ev = self.margins(zn)
            bad = [k for k, v in ev.items() if v < 0.0]
            dom = False
            if not bad and self.dominated is not None:
                dom = self.dominated(self.sample(zn))
            if bad or dom:
                zb, kind = self.locate(z, zn, tvec, hh, bad, dom)
                pts.append(zb)
                return pts, (kind, zb)
            pts.append(zn)
            try:
                tnew = self.tangent(zn, tvec)
            except SolverFailure:
                return pts, ("degenerate", zn)
            sv = np.linalg.svd(_jacobian(self.ea, self.eb, zn), compute_uv=False)
            if sv[-1] < 1e-8 * max(1.0, sv[0]):
                self.degenerate.append(len(pts) - 1)
            tvec = tnew
            z = zn
            h = min(2.0 * h, self.max_step)
        return pts, ("max_steps", z)

    def locate(self, z, zn, tvec, hh, bad, dom):
        """Bisect the step to the first event; name it after the violated margin."""
        lo, hi = 0.0, hh
        z_lo = z

        def violated(zz):
            ev = self.margins(zz)
            names = [k for k, v in ev.items() if v < 0.0]
            if not names and self.dominated is not None and self.dominated(self.sample(zz)):
                names = ["dominated"]
            return names

        names = bad or ["dominated"]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            try:
                zm = self.correct(z + mid * tvec, tvec, z, mid)
            except SolverFailure:
                hi = mid
                continue
            v = violated(zm)
            if v:
                hi, names = mid, v
            else:
                lo, z_lo = mid, zm
            if hi - lo < 1e-13:
                break
        kind = names[0]
        if kind.startswith("window_"):
            kind = "window_" + kind[-1]
        return z_lo, kind


def _threshold_from(endpoints: Sequence[CutEndpoint]):
    for pref in ("cusp", "end_a", "end_b"):
        for ep in endpoints:
            if ep.kind == pref:
                return ep.sample.alpha_a, ep.sample.alpha_b, pref
    return None, None, None


def trace_cut_locus(tree: FamilyTree, branch_a: str, branch_b: str,
                    seed: Sequence[float] | None = None,
                    dominated: Callable[[CutSample], bool] | None = None,
                    radius: float = 12.0, max_step: float = 0.01,
                    max_steps: int = 4000) -> CutLocusPiece:
    """Trace the equal-time locus of the last arcs of two words.

    Without a seed, candidates from :func:`seed_intersections` are refined in
    turn and the first one that lies on both arcs (and is not dominated) is
    used. The piece runs between two events; its thresholds are the
    parameters where it meets a switching curve (an arc ending) or a cusp.
    """
    ea, eb = ArcEvaluator(tree, branch_a), ArcEvaluator(tree, branch_b)
    same_adjacent = (family_of(branch_a) == family_of(branch_b)
                     and (branch_b.startswith(branch_a) or branch_a.startswith(branch_b)))
    tr = _Tracer(tree, ea, eb, dominated, radius, max_step, max_steps, same_adjacent)
    z0 = None
    seeds = [tuple(seed)] if seed is not None else seed_intersections(tree, branch_a, branch_b)
    last_err: Exception | None = None
    for s in seeds:
        try:
            z, _ = _refine(ea, eb, (ea.param(s[0]), eb.param(s[1]), float(s[2])))
        except SolverFailure as exc:
            last_err = exc
            continue
        if any(v < 0.0 for v in tr.margins(z).values()):
            continue
        if dominated is not None and dominated(tr.sample(z)):
            continue
        z0 = z
        break
    if z0 is None:
        raise SolverFailure(
            f"no equal-time intersection between {branch_a!r} and {branch_b!r}"
            + (f" ({last_err})" if last_err else ""),
            getattr(last_err, "residual", math.nan),
        )
    fwd, end_f = tr.walk(z0, 1.0)
    bwd, end_b = tr.walk(z0, -1.0)
    zs = list(reversed(bwd)) + fwd[1:]
    offset = len(bwd) - 1
    degenerate = tuple(sorted({i + offset for i in tr.degenerate if 0 <= i + offset < len(zs)}))
    endpoints = []
    for kind, z in (end_b, end_f):
        kind = "cusp" if kind == "trivial" else kind
        endpoints.append(CutEndpoint(kind, tr.sample(z)))
    # a cusp is where the nontrivial branch rejoins a = b; refine it exactly
    for i, ep in enumerate(endpoints):
        if ep.kind == "cusp" or (same_adjacent and {ep.kind} & {"end_a", "start_b", "end_b", "start_a"}
                                  and abs(ep.sample.alpha_a - ep.sample.alpha_b) < 1e-3):
            longer = branch_a if len(branch_a) > len(branch_b) else branch_b
            try:
                ac = cusp_parameter(tree, longer, bracket=(ep.sample.alpha_a - 0.05, ep.sample.alpha_a + 0.05))
            except SolverFailure:
                continue
            T, x, y, _, _ = ArcEvaluator(tree, longer).start_alpha(ac)
            endpoints[i] = CutEndpoint("cusp", CutSample(ReducedPoint(x, y), T, ac, ac))
    samples = [tr.sample(z) for z in zs]
    if endpoints[0].kind == "cusp":
        samples[0] = endpoints[0].sample
    if endpoints[1].kind == "cusp":
        samples[-1] = endpoints[1].sample
    ta, tb, tkind = _threshold_from(endpoints)
    return CutLocusPiece(branch_a, branch_b, tuple(samples), (endpoints[0], endpoints[1]),
                         ta, tb, tkind, degenerate)


# -- Family 1 axis cut -----------------------------------------------------

def axis_threshold_expression(eta: float) -> float:
    """The closed-form axis threshold as printed: eta^2 - 1 + (1 - eta - sqrt(2 eta + 1))^2."""
    return eta * eta - 1.0 + (1.0 - eta - math.sqrt(2.0 * eta + 1.0)) ** 2


@dataclass(frozen=True)
class AxisCut:
    threshold_tracer: float
    threshold_expression: float
    samples: tuple[CutSample, ...]
    max_abs_y: float
    max_time_gap: float

    @property
    def discrepancy(self) -> float:
        return self.threshold_expression - self.threshold_tracer


def _axis_hit(tree: FamilyTree, tau: float):
    """First crossing of y~ = 0 by the slow arc of MsPp, and the mirrored MsMm arrival."""
    ea = ArcEvaluator(tree, "MsPp")
    T, x, y, _, _ = ea.start(tau)
    # slow left arc about (0, -1) counterclockwise; x~ > 0 crossing of y~ = 0
    r2 = x * x + (y + 1.0) ** 2
    xh = math.sqrt(r2 - 1.0)
    ang0 = math.atan2(y + 1.0, x)
    ang1 = math.atan2(1.0, xh)
    dt = (ang1 - ang0) % (2 * math.pi)
    t = T + dt
    eb = ArcEvaluator(tree, "MsMm")
    xb, yb = eb.pos(tau, t)
    return t, xh, (xb, yb), ea.end(tau)


def axis_cut_locus(tree: FamilyTree, radius: float = 12.0, n: int = 200) -> AxisCut:
    """Where the mirror-image words MsPp and MsMm meet on the x~ axis."""
    ts = tree.t_sing
    # parameterize by the arrival abscissa up to the radius
    taus = ts + np.concatenate([[1e-12], np.geomspace(1e-9, 1.0, n // 4),
                                np.linspace(1.0, (radius + tree.eta + 2.0) / tree.eta, n)[1:]])
    samples = []
    max_y = 0.0
    gap = 0.0
    for tau in taus:
        t, xh, (xb, yb), end = _axis_hit(tree, float(tau))
        if t > end or xh > radius:
            break
        samples.append(CutSample(ReducedPoint(xh, 0.0), t, float(tau), float(tau)))
        max_y = max(max_y, abs(yb))
        gap = max(gap, abs(xb - xh))
    # tau -> t_sing+ limit: the slow arc starting from (-eta, -eta - sqrt(2 eta + 1))
    x0 = -tree.eta
    y0 = -tree.eta + tree.x_turnpike
    thr = math.sqrt(x0 * x0 + (y0 + 1.0) ** 2 - 1.0)
    return AxisCut(thr, axis_threshold_expression(tree.eta), tuple(samples), max_y, gap)


# -- abnormal segment ------------------------------------------------------

@dataclass(frozen=True)
class AbnormalSample:
    t: float
    point: ReducedPoint
    far_time: float
    far_word: str
    far_param: float | None

    @property
    def gap(self) -> float:
        return self.far_time - self.t


@dataclass(frozen=True)
class AbnormalCut:
    """Part of the abnormal arc where MmMPp extremals arrive and are cut.

    The abnormal arc is reached at time t along itself; across it the value
    jumps to the earliest arrival from the far side, so the two arrival
    times differ by ``gap`` (bounded away from 0).
    """

    t_start: float
    t_end: float
    samples: tuple[AbnormalSample, ...]
    far_words: tuple[tuple[float, float, str], ...]
    diagnostic: str = ""

    @property
    def empty(self) -> bool:
        return not self.samples

    @property
    def min_gap(self) -> float:
        return min((s.gap for s in self.samples), default=math.nan)


def abnormal_cut(tree: FamilyTree, inverter, n: int = 400, word: str = "MmMPp") -> AbnormalCut:
    """Scan the abnormal arc and keep the part where ``word`` is the earliest other arrival."""
    ts = np.linspace(0.0, math.pi, n + 2)[1:-1]
    pts = np.c_[-2.0 * np.sin(ts), 1.0 - 2.0 * np.cos(ts)]
    arr = inverter.arrivals_many(pts)
    owners = []
    for t, lst in zip(ts, arr):
        far = [r for r in lst if r.t > t + 1e-6 and r.arc_word not in ("m", "Mm")]
        owners.append(far[0] if far else None)
    runs = []
    for i, (t, o) in enumerate(zip(ts, owners)):
        w = o.arc_word if o is not None else "-"
        if not runs or runs[-1][2] != w:
            runs.append([float(t), float(t), w])
        else:
            runs[-1][1] = float(t)
    idx = [i for i, o in enumerate(owners) if o is not None and o.arc_word == word]
    if not idx:
        return AbnormalCut(math.nan, math.nan, (), tuple(map(tuple, runs)),
                           f"no {word} arrival on the abnormal arc")
    # contiguous run and refined ends
    i0, i1 = idx[0], idx[-1]

    def owner_is(t: float) -> bool:
        q = np.array([[-2.0 * math.sin(t), 1.0 - 2.0 * math.cos(t)]])
        lst = inverter.arrivals_many(q)[0]
        far = [r for r in lst if r.t > t + 1e-6 and r.arc_word not in ("m", "Mm")]
        return bool(far) and far[0].arc_word == word

    def refine(inside: float, outside: float) -> float:
        for _ in range(50):
            mid = 0.5 * (inside + outside)
            if owner_is(mid):
                inside = mid
            else:
                outside = mid
        return inside

    t0 = refine(ts[i0], ts[i0 - 1]) if i0 > 0 else float(ts[i0])
    t1 = refine(ts[i1], ts[i1 + 1]) if i1 + 1 < len(ts) else float(ts[i1])
    samples = []
    for i in range(i0, i1 + 1):
        o = owners[i]
        if o is None or o.arc_word != word:
            continue
        samples.append(AbnormalSample(float(ts[i]), ReducedPoint(*pts[i]), o.t, o.arc_word, o.param))
    return AbnormalCut(t0, t1, tuple(samples), tuple(map(tuple, runs)))
