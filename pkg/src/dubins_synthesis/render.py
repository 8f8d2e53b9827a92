"""Deterministic SVG figures of a synthesis and of trajectories.

Coordinates are written in the reduced plane itself (the y axis is flipped
by a group transform), rounded to a fixed number of decimals, so identical
inputs give byte-identical files and the curves can be read back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import InvalidParameterError, TARGET
from .synthesis import Synthesis, Trajectory

__all__ = ["COLORS", "LEGEND", "RenderSpec", "render_synthesis", "render_trajectories"]

# Table 2 of the construction: arc letters, then curve kinds.
COLORS = {
    "m": "#1f4fd1",  # (-1, vm) blue
    "p": "#ff8c00",  # (1, vm) orange
    "M": "#8a2be2",  # (-1, VM) purple
    "P": "#d62728",  # (1, VM) red
    "s": "#ff00ff",  # singular, magenta
    "u_switch": "#000000",  # dashed black
    "v_switch": "#808080",  # gray
    "cut": "#00a000",  # green
    "abnormal_cut": "#00bfbf",  # cyan
}

LEGEND = (
    ("m", "(-1, vm) arcs"),
    ("p", "(1, vm) arcs"),
    ("M", "(-1, VM) arcs"),
    ("P", "(1, VM) arcs"),
    ("s", "singular arcs"),
    ("u_switch", "u-switching curves"),
    ("v_switch", "v-switching curves"),
    ("cut", "cut locus"),
    ("abnormal_cut", "abnormal cut locus"),
)

_DEC = 5


def _f(x: float) -> str:
    s = f"{x:.{_DEC}f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass(frozen=True)
class RenderSpec:
    bounds: tuple[float, float, float, float] = (-8.0, 8.0, -8.0, 8.0)  # xmin, xmax, ymin, ymax
    resolution: int = 120  # region cells along x
    width_px: int = 800
    color_map: dict = field(default_factory=lambda: dict(COLORS))

    def __post_init__(self) -> None:
        xmin, xmax, ymin, ymax = self.bounds
        if not all(math.isfinite(v) for v in self.bounds) or not (xmax > xmin and ymax > ymin):
            raise InvalidParameterError(f"bounds must be finite with xmax > xmin and ymax > ymin, got {self.bounds}")
        if self.resolution < 1:
            raise InvalidParameterError("resolution must be >= 1")
        missing = [k for k, _ in LEGEND if k not in self.color_map]
        if missing:
            raise InvalidParameterError(f"color map misses legend entries {missing}")

    @property
    def cells(self) -> tuple[int, int]:
        xmin, xmax, ymin, ymax = self.bounds
        nx = self.resolution
        ny = max(1, int(round(nx * (ymax - ymin) / (xmax - xmin))))
        return nx, ny


def _header(spec: RenderSpec, title: str) -> list[str]:
    xmin, xmax, ymin, ymax = spec.bounds
    w = xmax - xmin
    h = ymax - ymin
    legend_h = 0.06 * h * (len(LEGEND) + 1)
    hpx = int(round(spec.width_px * (h + legend_h) / w))
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width_px}" height="{hpx}" '
        f'viewBox="{_f(xmin)} {_f(-ymax)} {_f(w)} {_f(h + legend_h)}">',
        f"<title>{title}</title>",
        f'<rect x="{_f(xmin)}" y="{_f(-ymax)}" width="{_f(w)}" height="{_f(h + legend_h)}" fill="#ffffff"/>',
        f'<defs><clipPath id="plot"><rect x="{_f(xmin)}" y="{_f(ymin)}" width="{_f(w)}" height="{_f(h)}"/>'
        "</clipPath></defs>",
    ]


def _polyline(points: Iterable, color: str, width: float, cls: str, attrs: str = "", dashed: bool = False,
              px: float = 1.0) -> str:
    """``width`` is in pixels; ``px`` is the size of one pixel in plane units."""
    pts = " ".join(f"{_f(p[0])},{_f(p[1])}" for p in points)
    dash = f' stroke-dasharray="{_f(6 * px)} {_f(4 * px)}"' if dashed else ""
    return (f'<polyline class="{cls}"{attrs} points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{_f(width * px)}" stroke-linejoin="round"{dash}/>')


def _legend(spec: RenderSpec) -> list[str]:
    xmin, xmax, ymin, ymax = spec.bounds
    h = ymax - ymin
    step = 0.06 * h
    out = ['<g class="legend" font-family="sans-serif" font-size="%s">' % _f(0.7 * step)]
    y0 = -ymin + 0.5 * step
    for i, (key, label) in enumerate(LEGEND):
        y = y0 + i * step
        x = xmin + 0.02 * (xmax - xmin)
        c = spec.color_map[key]
        px = (xmax - xmin) / spec.width_px
        dash = f' stroke-dasharray="{_f(6 * px)} {_f(4 * px)}"' if key == "u_switch" else ""
        out.append(f'<line x1="{_f(x)}" y1="{_f(y)}" x2="{_f(x + 2 * step)}" y2="{_f(y)}" stroke="{c}" '
                   f'stroke-width="{_f(3 * px)}"{dash}/>')
        out.append(f'<text x="{_f(x + 2.5 * step)}" y="{_f(y + 0.25 * step)}">{label}</text>')
    out.append("</g>")
    return out


def _regions(syn: Synthesis, spec: RenderSpec) -> list[str]:
    xmin, xmax, ymin, ymax = spec.bounds
    nx, ny = spec.cells
    dx = (xmax - xmin) / nx
    dy = (ymax - ymin) / ny
    xc = xmin + dx * (np.arange(nx) + 0.5)
    yc = ymin + dy * (np.arange(ny) + 0.5)
    X, Y = np.meshgrid(xc, yc)
    pts = np.c_[X.ravel(), Y.ravel()]
    inside = np.hypot(pts[:, 0], pts[:, 1]) <= syn.radius
    letters = np.full(pts.shape[0], "", dtype=object)
    idx = np.nonzero(inside)[0]
    if idx.size:
        for i, fb in zip(idx, syn.locate_many(pts[idx])):
            letters[i] = fb.letter.value if fb.letter is not None else ""
    grid = letters.reshape(ny, nx)
    out = ['<g class="regions" fill-opacity="0.35" shape-rendering="crispEdges">']
    for j in range(ny):
        i = 0
        while i < nx:
            c = grid[j, i]
            k = i
            while k + 1 < nx and grid[j, k + 1] == c:
                k += 1
            if c:
                # cell rows in flipped coordinates: y runs upward
                out.append(f'<rect class="region-{c}" x="{_f(xmin + i * dx)}" y="{_f(ymin + j * dy)}" '
                           f'width="{_f((k - i + 1) * dx)}" height="{_f(dy)}" fill="{spec.color_map[c]}"/>')
            i = k + 1
    out.append("</g>")
    return out


def _abnormal_points(t0: float, t1: float, n: int = 80) -> list[tuple[float, float]]:
    return [(-2.0 * math.sin(t), 1.0 - 2.0 * math.cos(t)) for t in np.linspace(t0, t1, n)]


def render_synthesis(syn: Synthesis, spec: RenderSpec | None = None) -> str:
    """SVG of the synthesis: regions colored by feedback letter, curves by kind."""
    spec = spec or RenderSpec()
    cm = spec.color_map
    px = (spec.bounds[1] - spec.bounds[0]) / spec.width_px
    out = _header(spec, f"Time-optimal synthesis, eta = {_f(syn.eta)}")
    out.append('<g transform="scale(1,-1)"><g clip-path="url(#plot)">')
    out += _regions(syn, spec)
    out.append('<g class="curves">')
    # abnormal arc itself (an m trajectory) and its cut sub-segment
    out.append(_polyline(_abnormal_points(0.0, math.pi), cm["m"], 1.5, "abnormal-arc", px=px))
    ab = syn.abnormal_segment
    if not ab.empty:
        out.append(_polyline(_abnormal_points(ab.t_start, ab.t_end), cm["abnormal_cut"], 3, "abnormal-cut",
                             f' data-t="{_f(ab.t_start)} {_f(ab.t_end)}"', px=px))
    for c in syn.switching_curves:
        if c.kind == "u":
            out.append(_polyline(c.points, cm["u_switch"], 1.5, "u-switch",
                                 f' data-word="{c.word}" data-next="{c.next_letter}"', dashed=True, px=px))
        else:
            out.append(_polyline(c.points, cm["v_switch"], 2, "v-switch",
                                 f' data-word="{c.word}" data-next="{c.next_letter}"', px=px))
    for p in syn.cut_loci:
        out.append(_polyline(p.points, cm["cut"], 2.5, "cut",
                             f' data-branches="{p.branch_a} {p.branch_b}"', px=px))
    axis = [s.point for s in syn.axis_cut.samples]
    if axis:
        out.append(_polyline(axis, cm["cut"], 2.5, "cut", ' data-branches="MsPp MsMm"', px=px))
    out.append(_polyline(syn.turnpike, cm["s"], 3, "turnpike", px=px))
    out.append(f'<circle class="target" cx="{_f(TARGET.xt)}" cy="{_f(TARGET.yt)}" r="{_f(0.008 * (spec.bounds[1] - spec.bounds[0]))}" fill="#000000"/>')
    out.append("</g></g></g>")
    out += _legend(spec)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_trajectories(trajectories: Sequence[Trajectory], spec: RenderSpec | None = None,
                        dt: float = 0.01) -> str:
    """SVG of (P1) trajectories, each arc in the color of its control letter."""
    spec = spec or RenderSpec()
    cm = spec.color_map
    px = (spec.bounds[1] - spec.bounds[0]) / spec.width_px
    out = _header(spec, "Optimal trajectories")
    out.append('<g transform="scale(1,-1)"><g clip-path="url(#plot)">')
    for k, traj in enumerate(trajectories):
        out.append(f'<g class="trajectory" data-index="{k}" data-word="{traj.word}">')
        for arc in traj.arcs:
            n = max(2, int(math.ceil(arc.duration / dt)) + 1)
            pts = [arc.point_at(float(s)) for s in np.linspace(0.0, arc.duration, n)]
            out.append(_polyline(pts, cm[arc.letter.value], 2.5, f"arc-{arc.letter.value}", px=px))
        out.append(f'<circle class="start" cx="{_f(traj.start[0])}" cy="{_f(traj.start[1])}" '
                   f'r="{_f(0.006 * (spec.bounds[1] - spec.bounds[0]))}" fill="#000000"/>')
        out.append("</g>")
    out.append(f'<circle class="target" cx="{_f(TARGET.xt)}" cy="{_f(TARGET.yt)}" r="{_f(0.008 * (spec.bounds[1] - spec.bounds[0]))}" fill="#000000"/>')
    out.append("</g></g>")
    out += _legend(spec)
    out.append("</svg>")
    return "\n".join(out) + "\n"
