import pytest

from elevate.cli import main
from elevate.diagnostics import ElevateError
from elevate.evaluate import Stepped, step
from elevate.infer import infer_term, is_instance, scheme_equal_alpha
from elevate.parser import parse_term
from elevate.pipeline import check_file
from elevate.syntax import strip_rhs
from support import canon, corpus_expectations, corpus_files

FILES = corpus_files()


@pytest.mark.parametrize("path", FILES, ids=lambda p: p.stem)
def test_golden(path, capsys, monkeypatch):
    monkeypatch.setenv("ELEVATE_COLOR", "never")
    expect = corpus_expectations(path)
    assert main(["run", str(path)]) == int(expect["exit"])
    out, err = capsys.readouterr()
    codes = [line.split()[0] for line in err.splitlines() if not line.startswith(" ")]
    if "code" in expect:
        assert expect["code"] in codes
    if "warning" in expect:
        assert expect["warning"] in codes
    if "value" in expect:
        assert canon(parse_term(out.strip())) == canon(parse_term(expect["value"]))


def _typed_programs():
    for path in FILES:
        result = check_file(path)
        if result.ok and result.core.as_term() is not None:
            yield pytest.param(result.core.as_term(), id=path.stem)


@pytest.mark.parametrize("term", list(_typed_programs()))
def test_corpus_preserves_types(term):
    term = strip_rhs(term)
    # programs that rely on dead-branch pruning are checked in that mode
    try:
        before, prune = infer_term(term, dead_branches=False), False
    except ElevateError:
        before, prune = infer_term(term), True
    for _ in range(2_000):
        out = step(term)
        if not isinstance(out, Stepped):
            break
        term = out.term
        after = infer_term(term, dead_branches=prune)
        assert scheme_equal_alpha(before, after) or is_instance(before, after), out.rule
        before = after


def test_every_corpus_file_has_an_exit_expectation():
    for path in FILES:
        assert "exit" in corpus_expectations(path), path.name
