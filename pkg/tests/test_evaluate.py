import pytest

from elevate.diagnostics import FuelExhausted, Stuck
from elevate.elaborate import elaborate_term
from elevate.evaluate import AlreadyValue, Stepped, StuckAt, evaluate, is_value, step
from elevate.parser import parse_term
from elevate.syntax import UNIT, App, Fix, LabelApp, Lam, Record, RecordExt, RecordMod, Var
from support import well_typed_terms


def core(text):
    return elaborate_term(parse_term(text))


def run(text, fuel=10_000):
    return evaluate(core(text), fuel)


@pytest.mark.parametrize(
    "text, expected",
    [("lam x = x", True), ("Success {}", True), ("fix", True), ("{A: lam y = y}", True), ("x", False), ("(lam x = x) {}", False)],
)
def test_is_value(text, expected):
    assert is_value(parse_term(text)) is expected


def test_identity_application():
    out = step(core("(lam x = x) (Success {})"))
    assert out == Stepped(LabelApp("Success", UNIT), "ST-App")


def test_values_do_not_step():
    assert isinstance(step(UNIT), AlreadyValue)


def test_match_on_label():
    assert run("match A {} with < A x => x | y => y >") == UNIT
    assert run("match B {} with < A x => x | y => y >") == LabelApp("B", UNIT)


def test_field_operations():
    assert run("{A: {} | B: {}}.-A") == Record((("B", UNIT),))
    assert run("{A: B | C: {}}.A") == LabelApp("B", UNIT)
    assert run("{A: B}.{A: C}") == Record((("A", LabelApp("C", UNIT)),))
    assert run("{A: B}.+{C: {}}") == Record((("A", LabelApp("B", UNIT)), ("C", UNIT)))


def test_record_runtime_checks():
    rec = Record((("A", UNIT),))
    assert isinstance(step(RecordMod(rec, (("B", UNIT),))), StuckAt)
    assert isinstance(step(RecordExt(rec, (("A", UNIT),))), StuckAt)


def test_function_before_argument_and_fields_left_to_right():
    rules = []
    evaluate(core("{A: (lam x = x) {} | B: let y = {} in y}"), on_step=lambda t, r: rules.append(r))
    assert rules == ["ST-App", "ST-Let"]
    rules.clear()
    evaluate(core("(let f = lam x = x in f) ((lam y = y) {})"), on_step=lambda t, r: rules.append(r))
    assert rules == ["ST-Let", "ST-App", "ST-App"]


def test_fix_unrolls():
    t = App(App(Fix(), Lam("f", Lam("x", Var("x")))), UNIT)
    out = step(t)
    assert out.rule == "ST-Fix"
    assert evaluate(t) == UNIT


def test_divergence_exhausts_fuel():
    with pytest.raises(FuelExhausted):
        run("fix (lam f = lam x = f x) {}", fuel=100)


def test_value_evaluates_to_itself():
    v = parse_term("Success {Name: 0}")
    assert evaluate(v, 1) == v


def test_substitution_avoids_capture():
    # the argument is a value whose free `y` must not be captured
    out = step(core("(lam x = lam y = x) (lam z = y)"))
    assert isinstance(out.term, Lam) and out.term.param != "y"
    assert out.term.body == Lam("z", Var("y"))


def test_free_variable_is_stuck():
    with pytest.raises(Stuck):
        evaluate(Var("x"))


def test_void_match_is_stuck():
    with pytest.raises(Stuck):
        run("match A with < >")


def test_fuel_must_be_positive():
    with pytest.raises(ValueError):
        evaluate(UNIT, 0)


def test_step_is_deterministic():
    for t in well_typed_terms(60, seed=3):
        for _ in range(50):
            a, b = step(t), step(t)
            assert a == b
            if not isinstance(a, Stepped):
                break
            t = a.term
