from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from satcfk.bimodule import build_bimodule, builtin_pattern, default_window
from satcfk.chain import FreeComplex
from satcfk.companion import builtin_companion, companion_to_json, load_companion
from satcfk.io import (SchemaError, bimodule_text, bimodule_to_json, complex_from_json, complex_to_json,
                       h_table_text, load_json, pattern_from_json, pattern_to_json, to_dot, to_text)

from helpers import rht, satellite

PIPELINE = [("torus2q", "trefoil-rh", -1, {"q": 2}), ("whitehead", "trefoil-rh", 1, {}),
            ("mazur", "unknot", 0, {}), ("cable", "figure-eight", 0, {"p": 3, "q": 2})]


def _roundtrip(C: FreeComplex) -> FreeComplex:
    return complex_from_json(json.loads(json.dumps(complex_to_json(C))))


def _same(a: FreeComplex, b: FreeComplex) -> bool:
    return a.generators == b.generators and set(a.arrows()) == set(b.arrows())


@pytest.mark.parametrize("pattern,companion,n,kw", PIPELINE)
def test_complex_roundtrip_pipeline(pattern: str, companion: str, n: int, kw: dict) -> None:
    C = satellite(pattern, companion, n, **kw)
    assert _same(_roundtrip(C), C)


def test_complex_roundtrip_tuple_ids() -> None:
    from satcfk.assembly import build_grid

    grid = build_grid(builtin_pattern("whitehead"), builtin_companion("trefoil-rh"), 0)
    assert _same(_roundtrip(grid.complex), grid.complex)


@given(st.sampled_from(PIPELINE))
def test_complex_json_is_fixed_point(case) -> None:
    pattern, companion, n, kw = case
    doc = complex_to_json(satellite(pattern, companion, n, **kw))
    assert complex_to_json(complex_from_json(doc)) == doc


@pytest.mark.parametrize("name,kw", [("torus2q", {"q": 3}), ("whitehead", {}), ("mazur", {}),
                                     ("cable", {"p": 3, "q": 2})])
def test_pattern_roundtrip(name: str, kw: dict) -> None:
    P = builtin_pattern(name, **kw)
    doc = json.loads(json.dumps(pattern_to_json(P)))
    Q = pattern_from_json(doc)
    assert (Q.l, Q.delta_l.coeffs, Q.delta_p.coeffs) == (P.l, P.delta_l.coeffs, P.delta_p.coeffs)
    assert pattern_to_json(Q) == pattern_to_json(P)


@pytest.mark.parametrize("name", ["unknot", "trefoil-rh", "figure-eight"])
def test_companion_roundtrip(name: str) -> None:
    K = builtin_companion(name)
    doc = json.loads(json.dumps(companion_to_json(K)))
    assert companion_to_json(load_companion(doc)) == companion_to_json(K)


@pytest.mark.parametrize("doc", [
    {},
    {"generators": [{"id": "a", "grw": 0}]},
    {"generators": [{"id": "a", "grw": 0, "grz": 0}], "arrows": [{"from": "a", "to": "b", "coef": "1"}]},
    {"generators": [{"id": "a", "grw": 0, "grz": 0}], "arrows": [{"from": "a", "to": "a", "coef": "Q"}]},
    {"generators": [{"id": {"x": 1}, "grw": 0, "grz": 0}]},
])
def test_complex_schema_errors(doc: dict) -> None:
    with pytest.raises(SchemaError):
        complex_from_json(doc)


def test_pattern_schema_error() -> None:
    with pytest.raises(SchemaError):
        pattern_from_json({"lk": 1, "terms": [{"a1": "x", "a2": 0, "c": 1}], "deltaP": {}})


def test_load_json_errors(tmp_path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_json(str(bad))
    with pytest.raises(OSError):
        load_json(str(tmp_path / "missing.json"))


def test_emitters_pure_and_deterministic() -> None:
    C = satellite("whitehead", "trefoil-rh", 1)
    before = complex_to_json(C)
    assert to_dot(C, "w") == to_dot(C, "w")
    assert to_text(C) == to_text(C)
    assert complex_to_json(C) == before
    shuffled = FreeComplex(tuple(reversed(C.generators)), C.diff)
    assert to_text(shuffled) == to_text(C)


def test_text_and_dot_shape() -> None:
    C = rht()
    text = to_text(C)
    assert text.splitlines()[0] == "3 generators, 2 arrows"
    assert "a -> b  Z" in text and "a -> c  W" in text
    dot = to_dot(C, "rht")
    assert dot.startswith('digraph "rht" {') and dot.rstrip().endswith("}")
    assert dot.count("->") == 2


def test_h_table_text() -> None:
    B = build_bimodule(builtin_pattern("torus2q", q=3), window=(-9, 9))
    lines = h_table_text(B.H, -5, 5, -3, 3).splitlines()
    assert lines[0].split() == ["t\\s", "-5/2", "-3/2", "-1/2", "1/2", "3/2", "5/2"]
    assert lines[1].split() == ["3/2", "4", "3", "2", "1", "0", "0"]
    assert lines[-1].split() == ["-3/2", "4", "3", "3", "3", "3", "3"]


def test_bimodule_json_and_text() -> None:
    P = builtin_pattern("whitehead")
    B = build_bimodule(P, window=default_window(P))
    doc = bimodule_to_json(B)
    assert json.loads(json.dumps(doc)) == doc
    assert [complex_to_json(B.C(s)) for s in B.s_values()] == [c["C"] for c in doc["columns"]]
    assert any(c["maps"].get("hZW") for c in doc["columns"])
    text = bimodule_text(B)
    assert text.startswith("pattern whitehead")
    assert "hZW:" in text


def test_figure_eight_companion_json_keeps_boxes() -> None:
    K = builtin_companion("figure-eight")
    L = load_companion(json.loads(json.dumps(companion_to_json(K))))
    assert len(L.cfk) == len(K.cfk) == 5
    assert L.boxes == K.boxes == 1
