import re
import xml.etree.ElementTree as ET

import pytest

from dubins_synthesis.core import InvalidParameterError
from dubins_synthesis.render import COLORS, LEGEND, RenderSpec, render_synthesis, render_trajectories

NS = {"s": "http://www.w3.org/2000/svg"}

TABLE2 = {
    "m": "#1f4fd1", "p": "#ff8c00", "M": "#8a2be2", "P": "#d62728", "s": "#ff00ff",
    "u_switch": "#000000", "v_switch": "#808080", "cut": "#00a000", "abnormal_cut": "#00bfbf",
}


@pytest.fixture(scope="module")
def svg(syn):
    return render_synthesis(syn, RenderSpec(resolution=40))


def _polylines(svg, cls):
    root = ET.fromstring(svg)
    return [e for e in root.iter("{http://www.w3.org/2000/svg}polyline") if e.get("class") == cls]


def test_color_map():
    assert COLORS == TABLE2
    assert [k for k, _ in LEGEND] == list(TABLE2)


def test_structure(svg):
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    for cls, color in (("u-switch", "#000000"), ("v-switch", "#808080"), ("cut", "#00a000"),
                       ("abnormal-cut", "#00bfbf"), ("turnpike", "#ff00ff")):
        els = _polylines(svg, cls)
        assert els, cls
        assert all(e.get("stroke") == color for e in els)
    assert all(e.get("stroke-dasharray") for e in _polylines(svg, "u-switch"))
    assert not any(e.get("stroke-dasharray") for e in _polylines(svg, "v-switch"))
    texts = [t.text for t in root.iter("{http://www.w3.org/2000/svg}text")]
    assert texts == [label for _, label in LEGEND]
    regions = {r.get("class") for r in root.iter("{http://www.w3.org/2000/svg}rect") if r.get("class")}
    assert {"region-M", "region-P", "region-m", "region-p"} <= regions


def test_byte_stable(syn, svg):
    assert render_synthesis(syn, RenderSpec(resolution=40)) == svg
    assert "date" not in svg.lower()


def test_resolution_one(syn):
    out = render_synthesis(syn, RenderSpec(resolution=1))
    root = ET.fromstring(out)
    cells = [r for r in root.iter("{http://www.w3.org/2000/svg}rect") if (r.get("class") or "").startswith("region-")]
    assert len(cells) <= 1


def test_bad_spec():
    with pytest.raises(InvalidParameterError):
        RenderSpec(bounds=(1, 0, 0, 1))
    with pytest.raises(InvalidParameterError):
        RenderSpec(resolution=0)
    with pytest.raises(InvalidParameterError):
        RenderSpec(color_map={"m": "#000000"})


def test_trajectories(syn):
    trajs = [syn.optimal_trajectory_p1((-5.0, 0.0))]
    out = render_trajectories(trajs, RenderSpec(bounds=(-6, 2, -4, 4)))
    assert out == render_trajectories(trajs, RenderSpec(bounds=(-6, 2, -4, 4)))
    assert [e.get("stroke") for e in _polylines(out, "arc-s")] == ["#ff00ff"]
    assert [e.get("stroke") for e in _polylines(out, "arc-M")] == ["#8a2be2"]


def _points(el):
    return [tuple(map(float, p.split(","))) for p in el.get("points").split()]


def _ends(svg, cls):
    return [pt for e in _polylines(svg, cls) for pt in (_points(e)[0], _points(e)[-1])]


def _near(q, pts):
    return min(((q[0] - x) ** 2 + (q[1] - y) ** 2) ** 0.5 for x, y in pts)


def test_junctions_at_thresholds(syn, svg):
    """Cut-locus pieces end where the thresholds put them: on switching curves
    (an arc ending) or at the cusp of MPpPM, and those curves end there too."""
    tree = syn.tree
    th = syn.thresholds
    cut_ends = _ends(svg, "cut")
    switch_ends = _ends(svg, "u-switch") + _ends(svg, "v-switch")
    for word, name in (("MPpP", "MPp"), ("MmMP", "MmM'"), ("MPpPM", "MPpPM")):
        q = tree.switch_point(word, th[name]).point
        assert _near(q, cut_ends) < 1e-2, name
        assert _near(q, switch_ends) < 1e-2, name
