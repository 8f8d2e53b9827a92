import json

import pytest

from dubins_synthesis import dumps, load, loads, save
from dubins_synthesis.core import SchemaError
from dubins_synthesis.serialization import FORMAT, VERSION, schema


def test_round_trip_idempotent(syn, syn_file):
    text = syn_file.read_text()
    assert text == dumps(syn)
    again = load(syn_file)
    assert dumps(again) == text
    assert dumps(loads(dumps(again))) == text


def test_loaded_answers_match(syn, syn_file):
    other = load(syn_file)
    for q in [(-3.0, 2.0), (-5.0, 0.0), (2.0, 2.0), (0.5, -3.0)]:
        assert other.value(q) == pytest.approx(syn.value(q), abs=1e-12)


def test_header(syn_file):
    d = json.loads(syn_file.read_text())
    assert d["format"] == FORMAT
    assert d["version"] == VERSION
    assert schema()["type"] == "object"


def _tampered(syn_file, edit):
    d = json.loads(syn_file.read_text())
    edit(d)
    return json.dumps(d)


def test_not_json():
    with pytest.raises(SchemaError):
        loads("{not json")


def test_truncated(syn_file):
    with pytest.raises(SchemaError):
        loads(syn_file.read_text()[:1000])


def test_missing_key(syn_file):
    with pytest.raises(SchemaError):
        loads(_tampered(syn_file, lambda d: d.pop("thresholds")))


def test_threshold_tampered(syn_file):
    def edit(d):
        d["thresholds"]["MPpP"] += 0.01
    with pytest.raises(SchemaError):
        loads(_tampered(syn_file, edit))


def test_curve_kind_swapped(syn_file):
    def edit(d):
        c = d["switching_curves"][0]
        c["kind"] = "v" if c["kind"] == "u" else "u"
    with pytest.raises(SchemaError):
        loads(_tampered(syn_file, edit))


def test_eta_tampered(syn_file):
    def edit(d):
        d["eta"] = 3.0
    with pytest.raises(SchemaError):
        loads(_tampered(syn_file, edit))


def test_save_atomic(syn, tmp_path):
    p = tmp_path / "x.json"
    save(syn, p)
    assert p.read_text() == dumps(syn)
    assert [f.name for f in tmp_path.iterdir()] == ["x.json"]
