"""Versioned JSON documents for a built synthesis.

The layout is fixed by ``data/synthesis.schema.json``. Loading validates the
schema and then re-checks the invariants against a fresh evaluation of the
family tree, so a hand-edited or truncated file is rejected instead of
silently producing a wrong feedback.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .core import ReducedPoint, SchemaError, SynthesisError
from .cutlocus import AbnormalCut, AbnormalSample, AxisCut, CutEndpoint, CutLocusPiece, CutSample
from .families import ARC_WORDS, DORMANT_WORDS, WORDS, FamilyTree, Window
from .synthesis import (
    THRESHOLD_NAMES,
    BranchRecord,
    BuildReport,
    Synthesis,
    SwitchingCurveRecord,
    _arrival_on_arc,
    _reduced_windows,
)

__all__ = ["FORMAT", "VERSION", "schema", "to_dict", "from_dict", "dumps", "loads", "save", "load", "atomic_write"]

FORMAT = "dubins-synthesis"
VERSION = 1


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("dubins_synthesis").joinpath("data/synthesis.schema.json").read_text()
    return json.loads(text)


def _num(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _window(w: Window) -> dict:
    return {"lo": float(w.lo), "hi": _num(w.hi), "lo_closed": bool(w.lo_closed), "hi_closed": bool(w.hi_closed)}


def _window_from(d: dict) -> Window:
    hi = math.inf if d["hi"] is None else float(d["hi"])
    return Window(float(d["lo"]), hi, bool(d["lo_closed"]), bool(d["hi_closed"]))


def _sample(s: CutSample) -> list[float]:
    return [float(s.point[0]), float(s.point[1]), float(s.t), float(s.alpha_a), float(s.alpha_b)]


def _sample_from(v) -> CutSample:
    return CutSample(ReducedPoint(float(v[0]), float(v[1])), float(v[2]), float(v[3]), float(v[4]))


def to_dict(syn: Synthesis) -> dict:
    tree = syn.tree
    ab = syn.abnormal_segment
    return {
        "format": FORMAT,
        "version": VERSION,
        "eta": float(syn.eta),
        "radius": float(syn.radius),
        "inverter_table": int(syn.inverter_table),
        "singular": {
            "alpha_sing": tree.alpha_sing,
            "t_sing": tree.t_sing,
            "x_turnpike": tree.x_turnpike,
        },
        "thresholds": {k: float(syn.thresholds[k]) for k in THRESHOLD_NAMES},
        "branches": [
            {
                "word": b.word,
                "param_kind": b.param_kind,
                "extremal_window": _window(b.extremal_window),
                "window": _window(b.window),
                "dormant": bool(b.dormant),
            }
            for b in syn.branches
        ],
        "switching_curves": [
            {
                "word": c.word,
                "next_letter": c.next_letter,
                "kind": c.kind,
                "params": [float(a) for a in c.params],
                "points": [[float(p[0]), float(p[1])] for p in c.points],
            }
            for c in syn.switching_curves
        ],
        "cut_loci": [
            {
                "branch_a": p.branch_a,
                "branch_b": p.branch_b,
                "samples": [_sample(s) for s in p.samples],
                "endpoints": [{"kind": e.kind, "sample": _sample(e.sample)} for e in p.endpoints],
                "threshold_a": None if p.threshold_a is None else float(p.threshold_a),
                "threshold_b": None if p.threshold_b is None else float(p.threshold_b),
                "threshold_kind": p.threshold_kind,
                "degenerate": [int(i) for i in p.degenerate],
            }
            for p in syn.cut_loci
        ],
        "axis_cut": {
            "threshold_tracer": float(syn.axis_cut.threshold_tracer),
            "threshold_expression": float(syn.axis_cut.threshold_expression),
            "max_abs_y": float(syn.axis_cut.max_abs_y),
            "max_time_gap": float(syn.axis_cut.max_time_gap),
            "samples": [_sample(s) for s in syn.axis_cut.samples],
        },
        "turnpike": [[float(p[0]), float(p[1])] for p in syn.turnpike],
        "abnormal_segment": {
            "t_start": _num(ab.t_start),
            "t_end": _num(ab.t_end),
            "diagnostic": ab.diagnostic,
            "far_words": [[float(a), float(b), str(w)] for a, b, w in ab.far_words],
            "samples": [
                [float(s.t), float(s.point[0]), float(s.point[1]), float(s.far_time), s.far_word,
                 None if s.far_param is None else float(s.far_param)]
                for s in ab.samples
            ],
        },
        "build_report": syn.build_report.as_dict(),
        "faults": [[w, letter] for w, letter in syn.faults],
    }


def _fail(msg: str) -> None:
    raise SchemaError(msg)


def _close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def _same_window(a: Window, b: Window, tol: float = 1e-12) -> bool:
    return (_close(a.lo, b.lo, tol) and _close(a.hi, b.hi, tol)
            and a.lo_closed == b.lo_closed and a.hi_closed == b.hi_closed)


def _check_invariants(d: dict, tree: FamilyTree) -> None:
    sing = d["singular"]
    for key, ref in (("alpha_sing", tree.alpha_sing), ("t_sing", tree.t_sing), ("x_turnpike", tree.x_turnpike)):
        if not _close(sing[key], ref, 1e-12):
            _fail(f"singular.{key} = {sing[key]} does not match eta (expected {ref})")
    th = d["thresholds"]
    if not (math.pi / 2 < th["MPpPM"] < th["MPpP"] < th["MPp"] < tree.alpha_sing
            < th["MmM"] < th["MmM'"] < 1.5 * math.pi):
        _fail("thresholds are not ordered as the construction requires")
    words = [b["word"] for b in d["branches"]]
    if len(set(words)) != len(words):
        _fail("duplicate branch words")
    extra = set(words) - set(WORDS) - set(DORMANT_WORDS)
    if extra:
        _fail(f"unknown branch words {sorted(extra)}")
    if set(WORDS) - set(words):
        _fail(f"missing branch words {sorted(set(WORDS) - set(words))}")
    dormant_active = any(w in DORMANT_WORDS for w in words)
    if dormant_active == (th["MmM'"] > tree.alpha_mmmp):
        _fail("dormant branch presence contradicts the pruning inequality")
    expected = _reduced_windows(tree, th)
    for b in d["branches"]:
        w = b["word"]
        ew = _window_from(b["extremal_window"])
        if not _same_window(ew, tree.extremal_window(w)):
            _fail(f"extremal window of {w} does not match the family tree")
        win = _window_from(b["window"])
        ref = expected.get(w, tree.extremal_window(w))
        if not _same_window(win, ref):
            _fail(f"reduced window of {w} is inconsistent with the thresholds")
        if b["param_kind"] != tree.param_kind(w):
            _fail(f"parameter kind of {w} must be {tree.param_kind(w)}")
    for c in d["switching_curves"]:
        switched = c["word"] + c["next_letter"]
        if switched not in ARC_WORDS:
            _fail(f"unknown switching curve {c['word']}->{c['next_letter']}")
        kind = "u" if tree.letters[c["word"][-1]][0] != tree.letters[c["next_letter"]][0] else "v"
        if c["kind"] != kind:
            _fail(f"switching curve {c['word']}->{c['next_letter']} must be of kind {kind}")
        if len(c["params"]) != len(c["points"]):
            _fail("switching curve params and points differ in length")
        n = len(c["params"])
        for i in sorted({0, n // 2, n - 1}):
            p = tree.switch_point(switched, c["params"][i]).point
            q = c["points"][i]
            if math.hypot(p[0] - q[0], p[1] - q[1]) > 1e-8:
                _fail(f"switching curve {c['word']}->{c['next_letter']} point {i} is off the curve")
    for piece in d["cut_loci"]:
        a, b = piece["branch_a"], piece["branch_b"]
        if a not in ARC_WORDS or b not in ARC_WORDS:
            _fail(f"unknown cut-locus branches {a}, {b}")
        n = len(piece["samples"])
        for i in sorted({0, n // 2, n - 1}):
            s = _sample_from(piece["samples"][i])
            for w, al in ((a, s.alpha_a), (b, s.alpha_b)):
                try:
                    t = _arrival_on_arc(tree, w, al, s.point)
                except SynthesisError as exc:
                    _fail(f"cut-locus sample of ({a}, {b}) cannot be evaluated: {exc}")
                if abs(t - s.t) > 1e-8:
                    _fail(f"cut-locus sample {i} of ({a}, {b}) is not an equal-time point")
    for w, letter in d["faults"]:
        if w not in ARC_WORDS:
            _fail(f"fault on unknown arc {w}")


def from_dict(d: dict) -> Synthesis:
    try:
        jsonschema.validate(d, schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"schema validation failed at '{path}': {exc.message}") from None
    try:
        tree = FamilyTree(d["eta"])
    except SynthesisError as exc:
        raise SchemaError(f"invalid eta: {exc}") from None
    _check_invariants(d, tree)
    ab = d["abnormal_segment"]
    ax = d["axis_cut"]
    syn = Synthesis(
        eta=float(d["eta"]),
        radius=float(d["radius"]),
        branches=tuple(
            BranchRecord(b["word"], b["param_kind"], _window_from(b["extremal_window"]),
                         _window_from(b["window"]), bool(b["dormant"]))
            for b in d["branches"]
        ),
        thresholds={k: float(d["thresholds"][k]) for k in THRESHOLD_NAMES},
        switching_curves=tuple(
            SwitchingCurveRecord(c["word"], c["next_letter"], c["kind"], tuple(float(a) for a in c["params"]),
                                 tuple(ReducedPoint(float(p[0]), float(p[1])) for p in c["points"]))
            for c in d["switching_curves"]
        ),
        cut_loci=tuple(
            CutLocusPiece(
                p["branch_a"], p["branch_b"],
                tuple(_sample_from(s) for s in p["samples"]),
                tuple(CutEndpoint(e["kind"], _sample_from(e["sample"])) for e in p["endpoints"]),
                p["threshold_a"], p["threshold_b"], p["threshold_kind"], tuple(p["degenerate"]),
            )
            for p in d["cut_loci"]
        ),
        axis_cut=AxisCut(float(ax["threshold_tracer"]), float(ax["threshold_expression"]),
                         tuple(_sample_from(s) for s in ax["samples"]), float(ax["max_abs_y"]),
                         float(ax["max_time_gap"])),
        turnpike=tuple(ReducedPoint(float(p[0]), float(p[1])) for p in d["turnpike"]),
        abnormal_segment=AbnormalCut(
            math.nan if ab["t_start"] is None else float(ab["t_start"]),
            math.nan if ab["t_end"] is None else float(ab["t_end"]),
            tuple(AbnormalSample(float(s[0]), ReducedPoint(float(s[1]), float(s[2])), float(s[3]), s[4],
                                 None if s[5] is None else float(s[5])) for s in ab["samples"]),
            tuple((float(a), float(b), str(w)) for a, b, w in ab["far_words"]),
            ab["diagnostic"],
        ),
        build_report=BuildReport.from_dict(d["build_report"]),
        faults=tuple((w, letter) for w, letter in d["faults"]),
        inverter_table=int(d.get("inverter_table", 3000)),
    )
    syn.__dict__["tree"] = tree
    return syn


def dumps(syn: Synthesis) -> str:
    return json.dumps(to_dict(syn), indent=1, allow_nan=False) + "\n"


def loads(text: str) -> Synthesis:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a JSON document: {exc}") from None
    if not isinstance(d, dict):
        raise SchemaError("a synthesis document must be a JSON object")
    return from_dict(d)


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def save(syn: Synthesis, path: str | os.PathLike) -> None:
    atomic_write(path, dumps(syn))


def load(path: str | os.PathLike) -> Synthesis:
    return loads(Path(path).read_text())
