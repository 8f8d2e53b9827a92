"""Command-line front end.

Subcommands: synthesize, query, trajectory, render, verify, stability, fault.
Every file is written atomically. Lengths and times are normalized
(v_min = u_max = 1) unless the physical flags --umax/--vmin/--vmax are given,
in which case they are converted at this boundary only.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import serialization
from .core import (
    FullState,
    InvalidParameterError,
    NormalizedParams,
    PhysicalParams,
    ReducedPoint,
    SynthesisError,
    normalize,
    reduce,
)
from .families import ARC_WORDS
from .lift import lift_trajectory, stability_check
from .render import RenderSpec, render_synthesis, render_trajectories
from .synthesis import FeedbackResult, Synthesis, Trajectory, build
from .verification import GridSpec, verify

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_FAIL = 1  # a check or verification failed
EXIT_ERROR = 2  # bad input, unsupported parameters, I/O or schema errors


class CliError(Exception):
    pass


# -- argument helpers ------------------------------------------------------

def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(s) for s in text.split(","))
    except ValueError:
        raise CliError(f"{what} must be {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise CliError(f"{what} must be {n} comma-separated finite numbers, got {text!r}")
    return vals


def _physical(args) -> NormalizedParams | None:
    given = [getattr(args, k, None) is not None for k in ("umax", "vmin", "vmax")]
    if not any(given):
        return None
    if not all(given):
        raise CliError("--umax, --vmin and --vmax must be given together")
    return normalize(PhysicalParams(args.umax, args.vmin, args.vmax))


def _add_physical(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("physical units")
    g.add_argument("--umax", type=float, help="maximum turn rate")
    g.add_argument("--vmin", type=float, help="minimum speed")
    g.add_argument("--vmax", type=float, help="maximum speed")


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--synthesis", "-s", metavar="FILE", help="synthesis JSON written by 'synthesize'")
    p.add_argument("--eta", type=float, help="build a synthesis in memory instead of loading one")
    p.add_argument("--radius", type=float, default=12.0, help="coverage radius for --eta (default 12)")


def _load(args, norm: NormalizedParams | None = None) -> Synthesis:
    if args.synthesis and args.eta is not None:
        raise CliError("give either --synthesis or --eta, not both")
    if args.synthesis:
        syn = serialization.load(args.synthesis)
    else:
        eta = args.eta if args.eta is not None else (norm.eta if norm is not None else None)
        if eta is None:
            raise CliError("a synthesis is required: pass --synthesis FILE or --eta")
        syn = build(eta, args.radius)
    if norm is not None and abs(norm.eta - syn.eta) > 1e-12 * syn.eta:
        raise CliError(f"vmax/vmin = {norm.eta} does not match the synthesis eta {syn.eta}")
    return syn


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out and out != "-":
        serialization.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _num(x: float | None):
    return None if x is None or not math.isfinite(x) else float(x)


# -- synthesize ------------------------------------------------------------

def cmd_synthesize(args) -> int:
    norm = _physical(args)
    if args.eta is not None and norm is not None:
        raise CliError("give either --eta or the physical flags, not both")
    eta = args.eta if args.eta is not None else (norm.eta if norm is not None else None)
    if eta is None:
        raise CliError("--eta (or --umax/--vmin/--vmax) is required")
    syn = build(eta, args.radius, coverage_n=args.coverage_n)
    serialization.save(syn, args.out)
    rep = syn.build_report
    if args.json:
        print(json.dumps({"out": args.out, "eta": syn.eta, "radius": syn.radius,
                          "thresholds": syn.thresholds, "build_report": rep.as_dict()}, indent=1))
    else:
        print(f"wrote {args.out}: eta = {syn.eta:g}, radius = {syn.radius:g}")
        for k, v in syn.thresholds.items():
            print(f"  alpha^{k:<6} = {v:.9f}")
        for c in rep.checks:
            if not c.passed:
                print(f"  note: check {c.name} not satisfied: {c.detail}")
        for w in rep.warnings:
            print(f"  warning: {w}")
    return EXIT_OK


# -- query -----------------------------------------------------------------

def _feedback_dict(fb: FeedbackResult, norm: NormalizedParams | None) -> dict:
    d = {
        "letter": fb.letter.value if fb.letter is not None else None,
        "control": list(fb.control) if fb.control is not None else None,
        "value": fb.value,
        "word": fb.word,
        "arc_word": fb.arc_word,
        "param": _num(fb.param),
        "arc_time": fb.arc_time,
        "on_boundary": {
            "switching_curve": fb.on_boundary.switching_curve,
            "cut_locus": fb.on_boundary.cut_locus,
            "turnpike": fb.on_boundary.turnpike,
            "target": fb.on_boundary.target,
        },
        "alternatives": [{"arc_word": a.arc_word, "param": _num(a.param), "value": a.value}
                         for a in fb.alternatives],
    }
    if norm is not None:
        d["physical"] = {
            "value": norm.time_to_physical(fb.value),
            "control": list(norm.control_to_physical(*fb.control)) if fb.control is not None else None,
        }
    return d


def _start(args, norm: NormalizedParams | None) -> tuple[ReducedPoint, FullState | None]:
    """Reduced start point and, with --pose, the normalized pose."""
    if (args.point is None) == (args.pose is None):
        raise CliError("give exactly one of --point and --pose")
    if args.pose is not None:
        x, y, th = _floats(args.pose, 3, "--pose")
        st = FullState(x, y, th)
        if norm is not None:
            st = norm.state_to_normalized(st)
        return reduce(st), st
    x, y = _floats(args.point, 2, "--point")
    if norm is not None:
        x, y = norm.length_to_normalized(x), norm.length_to_normalized(y)
    return ReducedPoint(x, y), None


def cmd_query(args) -> int:
    norm = _physical(args)
    syn = _load(args, norm)
    q, pose = _start(args, norm)
    fb = syn.locate(q)
    d = {"reduced_point": list(q), **_feedback_dict(fb, norm)}
    if pose is not None:
        d["pose_normalized"] = {"x": pose.x, "y": pose.y, "theta": pose.theta}
    if args.json:
        print(json.dumps(d, indent=1))
        return EXIT_OK
    flags = [k for k, v in d["on_boundary"].items() if v]
    print(f"point      ({q.xt:.12g}, {q.yt:.12g})")
    if fb.letter is None:
        print("letter     none (target)")
    else:
        print(f"letter     {fb.letter.value}  (u, v) = ({fb.control[0]:g}, {fb.control[1]:g})")
    print(f"value      {fb.value:.12g}")
    print(f"word       {fb.word}  (extremal {fb.arc_word}, param {fb.param if fb.param is not None else '-'})")
    print(f"boundary   {', '.join(flags) if flags else 'none'}")
    for a in fb.alternatives:
        print(f"also       {a.arc_word} at {a.value:.12g}")
    if norm is not None:
        pv = d["physical"]
        ctrl = pv["control"]
        print(f"physical   value {pv['value']:.12g}" +
              (f", control ({ctrl[0]:g}, {ctrl[1]:g})" if ctrl else ""))
    return EXIT_OK


# -- trajectory ------------------------------------------------------------

_REDUCED_COLUMNS = ("trajectory", "t", "x~", "y~", "u", "v")
_POSE_COLUMNS = ("trajectory", "t", "x", "y", "theta", "u", "v")


def _rows(trajs: Sequence[Trajectory], pose: FullState | None, norm: NormalizedParams | None,
          dt: float) -> list[list[float]]:
    rows = []
    for k, traj in enumerate(trajs):
        if pose is None:
            block = traj.sample(dt).tolist() if traj.arcs else []
            if norm is not None:
                block = [[norm.time_to_physical(t), norm.length_to_physical(x), norm.length_to_physical(y),
                          *norm.control_to_physical(u, v)] for t, x, y, u, v in block]
        else:
            block = [list(r) for r in lift_trajectory(pose, traj, dt)]
            if norm is not None:
                block = [[norm.time_to_physical(t), norm.length_to_physical(x), norm.length_to_physical(y), th,
                          *norm.control_to_physical(u, v)] for t, x, y, th, u, v in block]
        rows += [[k] + r for r in block]
    return rows


def _csv(columns: Sequence[str], rows: list[list[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([str(int(r[0]))] + [f"{float(x):.17g}" for x in r[1:]])
    return buf.getvalue()


def cmd_trajectory(args) -> int:
    norm = _physical(args)
    syn = _load(args, norm)
    if args.dt <= 0.0 or not math.isfinite(args.dt):
        raise CliError("--dt must be positive")
    q, pose = _start(args, norm)
    trajs = syn.all_optimal_trajectories_p1(q)
    if args.format == "svg":
        spec = RenderSpec(bounds=_bounds(args.bounds) if args.bounds else _auto_bounds(trajs),
                          width_px=args.width)
        text = render_trajectories(trajs, spec, dt=args.dt)
    else:
        cols = _POSE_COLUMNS if pose is not None else _REDUCED_COLUMNS
        rows = _rows(trajs, pose, norm, args.dt)
        if args.format == "csv":
            text = _csv(cols, rows)
        else:
            doc = {
                "start": list(q),
                "physical": norm is not None,
                "columns": list(cols),
                "trajectories": [{"word": t.word, "arc_word": t.arc_word, "param": _num(t.param),
                                  "letters": t.letters,
                                  "duration": norm.time_to_physical(t.duration) if norm else t.duration}
                                 for t in trajs if t.arcs],
                "rows": rows,
            }
            text = json.dumps(doc, indent=1) + "\n"
    _emit(args, text)
    if args.out and args.out != "-":
        n = sum(1 for t in trajs if t.arcs)
        print(f"wrote {args.out}: {n} optimal trajector{'y' if n == 1 else 'ies'}"
              + (f" ({', '.join(t.letters for t in trajs if t.arcs)})" if n else ""), file=sys.stderr)
    return EXIT_OK


def _auto_bounds(trajs: Sequence[Trajectory]) -> tuple[float, float, float, float]:
    pts = [(0.0, -1.0)]
    for t in trajs:
        if t.arcs:
            pts += [tuple(r[1:3]) for r in t.sample(0.05)]
        else:
            pts.append(tuple(t.start))
    a = np.array(pts)
    lo, hi = a.min(axis=0), a.max(axis=0)
    pad = 0.1 * max(float((hi - lo).max()), 1.0)
    return (float(lo[0] - pad), float(hi[0] + pad), float(lo[1] - pad), float(hi[1] + pad))


def _bounds(text: str) -> tuple[float, float, float, float]:
    return _floats(text, 4, "--bounds")  # type: ignore[return-value]


# -- render ----------------------------------------------------------------

def cmd_render(args) -> int:
    syn = _load(args)
    spec = RenderSpec(bounds=_bounds(args.bounds), resolution=args.resolution, width_px=args.width)
    _emit(args, render_synthesis(syn, spec))
    return EXIT_OK


# -- verify and stability --------------------------------------------------

def cmd_verify(args) -> int:
    syn = _load(args)
    rep = verify(syn, GridSpec(args.lo, args.hi, args.n), pmp=not args.no_pmp)
    if args.json:
        print(json.dumps(rep.as_dict(), indent=1))
    else:
        print(rep.summary())
        print(f"max terminal error {rep.max_terminal_error:.3e}, "
              f"max Hamiltonian drift {rep.max_hamiltonian_drift:.3e}")
        for v in rep.violations[: args.max_listed]:
            print(f"  {v.rule}: start ({v.start[0]:.6g}, {v.start[1]:.6g}) "
                  f"at ({v.location[0]:.6g}, {v.location[1]:.6g}) {v.detail}")
        if len(rep.violations) > args.max_listed:
            print(f"  ... {len(rep.violations) - args.max_listed} more")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_stability(args) -> int:
    syn = _load(args)
    reports = [stability_check(syn, d, n=args.n, seed=args.seed) for d in args.delta]
    if args.json:
        print(json.dumps([r.as_dict() for r in reports], indent=1))
    else:
        print(f"{'delta':>8} {'empirical sup':>14} {'bound':>10}  status")
        for r in reports:
            print(f"{r.delta:>8.4g} {r.empirical_sup:>14.4f} {r.bound:>10.4f}  {'ok' if r.ok else 'FAIL'}")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def cmd_fault(args) -> int:
    syn = serialization.load(args.synthesis)
    if args.arc not in ARC_WORDS:
        raise CliError(f"unknown extremal word {args.arc!r}")
    serialization.save(syn.with_fault(args.arc, args.letter), args.out)
    print(f"wrote {args.out}: letter {args.letter} on extremal {args.arc}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dubins-synthesis",
                                description="Time-optimal synthesis for a variable-speed Dubins vehicle "
                                            "steering onto its minimum-radius circle.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synthesize", help="build a synthesis and write it as JSON")
    s.add_argument("--eta", type=float, help="speed ratio vmax / vmin (> 1)")
    s.add_argument("--radius", type=float, default=12.0, help="coverage radius (default 12)")
    s.add_argument("--coverage-n", type=int, default=61, help="coverage grid size per axis")
    s.add_argument("--out", "-o", required=True)
    s.add_argument("--json", action="store_true")
    _add_physical(s)
    s.set_defaults(func=cmd_synthesize)

    q = sub.add_parser("query", help="optimal feedback at a point or pose")
    _add_source(q)
    q.add_argument("--point", help="reduced point 'x,y'")
    q.add_argument("--pose", help="pose 'x,y,theta'")
    q.add_argument("--json", action="store_true")
    _add_physical(q)
    q.set_defaults(func=cmd_query)

    t = sub.add_parser("trajectory", help="optimal trajectories from a point or pose")
    _add_source(t)
    t.add_argument("--from", dest="point", help="reduced start point 'x,y'")
    t.add_argument("--pose", help="start pose 'x,y,theta'")
    t.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    t.add_argument("--dt", type=float, default=0.01, help="sampling step (normalized time)")
    t.add_argument("--bounds", help="SVG bounds 'xmin,xmax,ymin,ymax' (default: fit)")
    t.add_argument("--width", type=int, default=800, help="SVG width in pixels")
    t.add_argument("--out", "-o", help="output file (default stdout)")
    _add_physical(t)
    t.set_defaults(func=cmd_trajectory)

    r = sub.add_parser("render", help="SVG figure of a synthesis")
    _add_source(r)
    r.add_argument("--bounds", default="-8,8,-8,8", help="'xmin,xmax,ymin,ymax' (default -8,8,-8,8)")
    r.add_argument("--resolution", type=int, default=120, help="region cells along x")
    r.add_argument("--width", type=int, default=800, help="width in pixels")
    r.add_argument("--out", "-o", help="output file (default stdout)")
    r.set_defaults(func=cmd_render)

    v = sub.add_parser("verify", help="check switch rules and the maximum principle on a grid")
    _add_source(v)
    v.add_argument("--lo", type=float, default=-8.0)
    v.add_argument("--hi", type=float, default=8.0)
    v.add_argument("--n", type=int, default=100, help="grid points per axis")
    v.add_argument("--no-pmp", action="store_true", help="skip the maximum-principle residuals")
    v.add_argument("--max-listed", type=int, default=20)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    st = sub.add_parser("stability", help="empirical excursion from starts near the target vs the bound")
    _add_source(st)
    st.add_argument("--delta", type=float, nargs="+", default=[0.1, 0.5, 1.0])
    st.add_argument("--n", type=int, default=1000, help="starts per delta")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--json", action="store_true")
    st.set_defaults(func=cmd_stability)

    f = sub.add_parser("fault", help="copy a synthesis with a wrong letter on one extremal arc")
    f.add_argument("--synthesis", "-s", required=True)
    f.add_argument("--arc", required=True, help="extremal prefix whose last arc is relabelled, e.g. MPp")
    f.add_argument("--letter", required=True, choices=("m", "p", "M", "P", "s"))
    f.add_argument("--out", "-o", required=True)
    f.set_defaults(func=cmd_fault)
    return p


_VALUE_FLAGS = ("--point", "--pose", "--from", "--bounds")


def _join_negative(argv: Sequence[str]) -> list[str]:
    """Let '--point -3,2' through: argparse would read '-3,2' as an option."""
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(a)
            elif nxt.startswith("-") and "," in nxt:
                out.append(f"{a}={nxt}")
            else:
                out += [a, nxt]
        else:
            out.append(a)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative(argv))
    try:
        return args.func(args)
    except (CliError, SynthesisError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
