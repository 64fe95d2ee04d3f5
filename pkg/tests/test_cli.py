import json
import re

import pytest

from elevate.cli import main
from support import CORPUS

DIAG = re.compile(r"^E-[A-Z-]+ \S+:\d+:\d+-\d+:\d+ .+$")


@pytest.fixture(autouse=True)
def no_color(monkeypatch):
    monkeypatch.setenv("ELEVATE_COLOR", "never")


def write(tmp_path, text, name="prog.elv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def corpus(name):
    return str(CORPUS / f"{name}.elv")


def test_check_ok(capsys):
    assert main(["check", corpus("combinators")]) == 0
    out, err = capsys.readouterr()
    assert out == "" and err == ""


def test_empty_file_is_fine(tmp_path, capsys):
    assert main(["run", write(tmp_path, "")]) == 0
    assert capsys.readouterr() == ("", "")


def test_type_error_exit_and_format(capsys):
    assert main(["check", corpus("reduce_then_map_seq")]) == 1
    err = capsys.readouterr().err
    first = err.splitlines()[0]
    assert first.startswith("E-UNIFY ") and DIAG.match(first)


def test_parse_error_exit(tmp_path, capsys):
    assert main(["check", write(tmp_path, "let x = (lam y = y\n")]) == 2
    assert DIAG.match(capsys.readouterr().err.splitlines()[0])


def test_fuel_exhaustion_exit(capsys):
    assert main(["run", corpus("diverge"), "--fuel", "50"]) == 3
    assert capsys.readouterr().err.startswith("E-FUEL")


def test_fuel_must_be_positive(capsys):
    assert main(["run", corpus("value"), "--fuel", "0"]) == 2


def test_run_prints_value(capsys):
    assert main(["run", corpus("value")]) == 0
    assert capsys.readouterr().out.strip() == "Success {Name: 0}"


def test_infer_lists_schemes(capsys):
    assert main(["infer", corpus("combinators")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert any(l.startswith("id : ") for l in lines)


def test_json_output_is_one_object_per_line(capsys):
    assert main(["infer", corpus("combinators"), "--json"]) == 0
    out, err = capsys.readouterr()
    records = [json.loads(l) for l in out.splitlines()]
    assert {"name", "scheme", "kinds"} <= set(records[0]) and err == ""


def test_json_diagnostics_stay_on_stderr(capsys):
    assert main(["check", corpus("nonlinear"), "--json"]) == 1
    out, err = capsys.readouterr()
    assert out == ""
    diag = json.loads(err.splitlines()[0])
    assert diag["code"] == "E-NONLINEAR" and diag["severity"] == "error"


def test_json_run(capsys):
    assert main(["run", corpus("value"), "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == {"value": "Success {Name: 0}"}


def test_warnings_do_not_fail(capsys):
    assert main(["check", corpus("silent_removal")]) == 0
    err = capsys.readouterr().err
    assert err.startswith("E-DEAD-BRANCH ") and DIAG.match(err.splitlines()[0])


def test_elaborate_nonlinear(capsys):
    assert main(["elaborate", corpus("nonlinear")]) == 1
    assert "E-NONLINEAR" in capsys.readouterr().err


def test_elaborate_identity_match_is_let(capsys):
    assert main(["elaborate", corpus("identity_match")]) == 0
    out = capsys.readouterr().out
    assert "let w = v in" in out and "match" not in out


def test_color_always(monkeypatch, capsys):
    monkeypatch.setenv("ELEVATE_COLOR", "always")
    main(["check", corpus("nonlinear")])
    assert "\x1b[" in capsys.readouterr().err


def test_color_never(capsys):
    main(["check", corpus("nonlinear")])
    assert "\x1b[" not in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["check", "/nonexistent/x.elv"]) == 1
