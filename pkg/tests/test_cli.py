from __future__ import annotations

import json

import pytest

from satcfk.chain import iso_check
from satcfk.cli import EXIT_OK, EXIT_SCHEMA, EXIT_VALIDATION, main
from satcfk.io import complex_from_json
from satcfk.selftest import load_fixture

from helpers import satellite


def _run(capsys, *argv: str) -> tuple[int, str, str]:
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_hfunction_torus2q_matches_fixture(capsys) -> None:
    rc, out, _ = _run(capsys, "hfunction", "--pattern", "torus2q", "--q", "3", "--window=-5/2,3/2",
                      "--format", "json")
    assert rc == EXIT_OK
    got = {(s, t): v for s, t, v in json.loads(out)["cells"]}
    want = {(s, t): v for s, t, v in load_fixture("h_torus2q_3.json")["cells"]}
    shared = got.keys() & want.keys()
    assert len(shared) >= 12
    assert all(got[k] == want[k] for k in shared)


@pytest.mark.parametrize("name", ["whitehead", "mazur"])
def test_hfunction_text_matches_fixture(capsys, name: str) -> None:
    rc, out, _ = _run(capsys, "hfunction", "--pattern", name, "--format", "json")
    assert rc == EXIT_OK
    got = {(s, t): v for s, t, v in json.loads(out)["cells"]}
    want = {(s, t): v for s, t, v in load_fixture(f"h_{name}.json")["cells"]}
    shared = got.keys() & want.keys()
    assert len(shared) >= 9
    assert all(got[k] == want[k] for k in shared)
    rc, text, _ = _run(capsys, "hfunction", "--pattern", name)
    assert rc == EXIT_OK and text.splitlines()[0].split()[0] == "t\\s"


def test_hfunction_bad_window(capsys) -> None:
    rc, _, err = _run(capsys, "hfunction", "--pattern", "whitehead", "--window=2,-2")
    assert rc == EXIT_SCHEMA and "window" in err


def test_bimodule_formats(capsys) -> None:
    rc, text, _ = _run(capsys, "bimodule", "--pattern", "whitehead")
    assert rc == EXIT_OK and text.startswith("pattern whitehead")
    rc, out, _ = _run(capsys, "bimodule", "--pattern", "whitehead", "--window=-1,1", "--format", "json")
    assert rc == EXIT_OK
    assert [c["s"] for c in json.loads(out)["columns"]] == [-1, 0, 1]


def test_satellite_unknot_single_generator(capsys) -> None:
    rc, out, _ = _run(capsys, "satellite", "--pattern", "torus2q", "--q", "2", "--companion", "unknot",
                      "--framing", "0", "--format", "json")
    assert rc == EXIT_OK
    assert len(complex_from_json(json.loads(out))) == 1


def test_satellite_cable_json_matches_pipeline(capsys) -> None:
    rc, out, _ = _run(capsys, "satellite", "--pattern", "torus2q", "--q", "2", "--framing", "-1",
                      "--format", "json")
    assert rc == EXIT_OK
    assert iso_check(complex_from_json(json.loads(out)), satellite("torus2q", "trefoil-rh", -1, q=2))


def test_satellite_check_passes(capsys) -> None:
    rc, _, err = _run(capsys, "satellite", "--pattern", "whitehead", "--framing", "2", "--check")
    assert rc == EXIT_OK and "checks passed" in err


def test_satellite_check_failure_exit_code(capsys, monkeypatch) -> None:
    import satcfk.selftest as selftest

    monkeypatch.setattr(selftest, "property_violations", lambda *a, **k: ["forced"])
    rc, _, err = _run(capsys, "satellite", "--pattern", "whitehead", "--framing", "1", "--check")
    assert rc == EXIT_VALIDATION and "forced" in err


def test_satellite_dot_and_out(capsys, tmp_path) -> None:
    target = tmp_path / "w.dot"
    rc, out, _ = _run(capsys, "satellite", "--pattern", "whitehead", "--framing", "1", "--format", "dot",
                      "--out", str(target))
    assert rc == EXIT_OK and out == ""
    assert target.read_text().startswith("digraph")


def test_satellite_no_reduce_is_larger(capsys) -> None:
    _, reduced, _ = _run(capsys, "satellite", "--pattern", "torus2q", "--q", "2", "--framing", "1",
                         "--format", "json")
    _, raw, _ = _run(capsys, "satellite", "--pattern", "torus2q", "--q", "2", "--framing", "1",
                     "--format", "json", "--no-reduce")
    assert len(json.loads(raw)["generators"]) > len(json.loads(reduced)["generators"]) == 5


def test_satellite_companion_file(capsys, tmp_path) -> None:
    from satcfk.companion import builtin_companion, companion_to_json

    path = tmp_path / "k.json"
    path.write_text(json.dumps(companion_to_json(builtin_companion("trefoil-rh"))))
    rc, out, _ = _run(capsys, "satellite", "--pattern", "torus2q", "--q", "2", "--companion", str(path),
                      "--framing", "1", "--format", "json")
    assert rc == EXIT_OK and len(json.loads(out)["generators"]) == 5


def test_schema_errors(capsys, tmp_path) -> None:
    rc, _, err = _run(capsys, "satellite", "--pattern", "nope")
    assert rc == EXIT_SCHEMA and "unknown pattern" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    rc, _, _ = _run(capsys, "satellite", "--pattern", "whitehead", "--companion", str(bad))
    assert rc == EXIT_SCHEMA
    rc, _, _ = _run(capsys, "hfunction", "--pattern", str(tmp_path / "missing.json"))
    assert rc == EXIT_SCHEMA


def test_selftest_command(capsys) -> None:
    rc, out, _ = _run(capsys, "selftest")
    assert rc == EXIT_OK
    assert out.splitlines()[-1] == "11/11 criteria passed"
