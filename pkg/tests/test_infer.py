import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elevate.diagnostics import ElevateError, KindViolation, TypeError_
from elevate.elaborate import elaborate_term
from elevate.infer import (
    Scheme,
    build_type,
    close_over,
    free_type_vars,
    generalize,
    infer_term,
    instantiate,
    is_instance,
    scheme_equal_alpha,
    scheme_of_type,
)
from elevate.kinds import TYPE, RowKind
from elevate.parser import parse_term, parse_type
from elevate.pipeline import check_source
from elevate.syntax import Row, TArrow, TRecord, TVar, TVariant
from elevate.types import (
    Unifier,
    arrow,
    find,
    flatten_row,
    record,
    row_cons,
    row_empty,
    row_of,
    rowvar,
    tvar,
    variant,
)
from support import CORPUS as CORPUS_DIR
from support import corpus_files


def scheme(text: str) -> Scheme:
    t, kinds = parse_type(text)
    return scheme_of_type(t, kinds)


def infer(text: str) -> Scheme:
    return infer_term(elaborate_term(parse_term(text)))


UNIT_T = lambda: record(row_empty())  # noqa: E731


# ----------------------------------------------------------------- unify


def test_unify_fills_open_tail():
    r = rowvar(RowKind.neg("True"))
    left = variant(row_cons("True", UNIT_T(), r))
    right = variant(row_of([("True", UNIT_T()), ("Apple", UNIT_T())]))
    Unifier().unify(left, right)
    fields, tail = flatten_row(r)
    assert [l for l, _ in fields] == ["Apple"] and tail.tag == "rowempty"


def test_unify_respects_positive_kind():
    r = rowvar(RowKind.pos("False"))
    left = variant(row_cons("True", UNIT_T(), r))
    right = variant(row_of([("True", UNIT_T()), ("Apple", UNIT_T())]))
    with pytest.raises(TypeError_):
        Unifier().unify(left, right)


def test_unify_reflexive():
    t = arrow(variant(row_of([("A", UNIT_T())])), UNIT_T())
    Unifier().unify(t, t)
    assert find(t) is t


def test_unify_rigid_variables_stay_distinct():
    a, b = tvar(rigid=True), tvar(rigid=True)
    with pytest.raises(TypeError_):
        Unifier().unify(a, b)


def test_equi_recursive_types_unify_by_unrolling():
    once = scheme("t as <A: t | *>")
    twice = scheme("<A: (t as <A: t | *>) | *>")
    Unifier().unify(instantiate(once), instantiate(twice))
    assert scheme_equal_alpha(once, twice)


# ------------------------------------------------------- schemes and envs


def test_instantiate_gives_fresh_variables():
    s = scheme("p -> <Success: p | *>")
    t1, t2 = instantiate(s), instantiate(s)
    assert free_type_vars(t1).isdisjoint(free_type_vars(t2))
    assert scheme_equal_alpha(close_over(t1), s)


def test_instantiated_row_may_become_empty():
    s = scheme("<L: {*} | r: ~{L}>")
    _, tail = flatten_row(instantiate(s).children[0])
    Unifier().unify(tail, row_empty())


def test_instantiated_row_rejects_excluded_label():
    s = scheme("<L: {*} | r: ~{L}>")
    _, tail = flatten_row(instantiate(s).children[0])
    with pytest.raises(KindViolation):
        Unifier().unify(tail, row_of([("L", UNIT_T())]))


def test_generalize_skips_environment_variables():
    a, r = tvar(), rowvar(RowKind.neg("Success"))
    t = arrow(a, variant(row_cons("Success", a, r)))
    assert generalize({}, t).generics == {a, r}
    assert generalize({"x": Scheme.mono(a)}, t).generics == {r}


def test_free_type_vars_of_arrow():
    a, b = tvar(), tvar()
    assert free_type_vars(arrow(a, b)) == {a, b}


def test_generalize_recursive_alias_keeps_binder():
    result = check_source(
        "type Rise = t as <Id: {Name: <0: {*} | *> | *} | App: {Fun: t | Arg: t | *} | *>\n"
        "let rise : Rise -> Rise = lam x = x\n"
    )
    assert result.ok
    assert " as " in result.types.scheme("rise").pretty()


# ------------------------------------------------------------- inference


def test_infer_id():
    assert scheme_equal_alpha(infer("lam expr = Success expr"), scheme("p -> <Success: p | r: ~{Success}>"))


def test_infer_failure():
    assert scheme_equal_alpha(infer("Failure"), scheme("<Failure: {*} | r: ~{Failure}>"))


def test_infer_record_operations():
    s = infer("lam r = r.-A.+{B: r.A}")
    assert scheme_equal_alpha(s, scheme("{A: p | r: ~{A, B}} -> {B: p | r: ~{A, B}}"))
    assert scheme_equal_alpha(infer("lam r = r.{A: {}}"), scheme("{A: {*} | r} -> {A: {*} | r}"))


def test_record_modification_keeps_field_types():
    with pytest.raises(TypeError_):
        infer("{A: {}}.{A: B}")


def test_infer_fix():
    assert scheme_equal_alpha(infer("fix"), scheme("((a -> b) -> a -> b) -> a -> b"))


def test_unbound_variable():
    with pytest.raises(ElevateError):
        infer("lam x = y")


def test_occurs_free_rows_rejected():
    with pytest.raises(TypeError_):
        infer("lam r = (lam f = f r) (lam s = s.+{A: {}}).+{A: {}}")


def test_match_narrows_remainder():
    s = infer("lam x = match x with < A => B | y => y >")
    assert scheme_equal_alpha(s, scheme("<A: {*} | B: {*} | r: ~{A, B}> -> <B: {*} | r: ~{A, B}>"))


def test_scheme_alpha_examples():
    assert scheme_equal_alpha(scheme("p -> <Success: p | r>"), scheme("q -> <Success: q | s>"))
    assert not scheme_equal_alpha(
        scheme("p -> <Success: p | r: ~{Success}>"), scheme("p -> <Success: p | r: ~{Success, Failure}>")
    )
    assert not scheme_equal_alpha(scheme("p -> q"), scheme("p -> p"))


def test_instance_relation():
    general = scheme("p -> p")
    assert is_instance(scheme("{*} -> {*}"), general)
    assert not is_instance(general, scheme("{*} -> {*}"))


# ----------------------------------------------------------- dead branches


def _codes(source):
    result = check_source(source)
    return [e.code for e in result.errors], [w.code for w in result.warnings]


def test_repeated_label_is_dead():
    errors, _ = _codes("let f = lam x = match x with < A => {} | y => match y with < A => {} | B => {} > >")
    assert errors == ["E-REDUNDANT"]


def test_kind_excluded_label_is_dead():
    errors, _ = _codes(
        "let f : <B: {*} | r: ~{A, B}> -> {*} = lam x = match x with < A => {} | y => {} >"
    )
    assert errors == ["E-REDUNDANT"]


def test_unused_tail_is_closed():
    errors, _ = _codes("let v = match True with < False => {} | y => {} >")
    assert errors == ["E-REDUNDANT"]


def test_declarative_mode_keeps_dead_branches():
    t = parse_term("match True with < False => {} | y => {} >")
    infer_term(elaborate_term(t), dead_branches=False)


def test_silent_removal_is_only_a_warning():
    source = (CORPUS_DIR / "silent_removal.elv").read_text()
    errors, warnings = _codes(source)
    assert errors == [] and warnings == ["E-DEAD-BRANCH"]


# ----------------------------------------------------------- properties

ROW_KINDS = {"r": RowKind.neg("A", "B", "C"), "s": RowKind.pos("D", "E")}
ENV = {"a": TYPE, "b": TYPE, **ROW_KINDS}

field_labels = st.sampled_from(["A", "B", "C"])


def _row(sub):
    fields = st.lists(st.tuples(field_labels, sub), max_size=2, unique_by=lambda p: p[0]).map(tuple)
    return st.builds(Row, fields, st.sampled_from([None, "r", "s"]))


types = st.recursive(
    st.builds(TVar, st.sampled_from(["a", "b"])) | st.just(TRecord(Row())),
    lambda sub: st.builds(TArrow, sub, sub) | st.builds(TVariant, _row(sub)) | st.builds(TRecord, _row(sub)),
    max_leaves=8,
)


def _unify_pair(t1, t2, swap):
    names: dict = {}
    n1 = build_type(t1, ENV, False, names)
    n2 = build_type(t2, ENV, False, names)
    u = Unifier()
    try:
        if swap:
            u.unify(n2, n1)
        else:
            u.unify(n1, n2)
    except TypeError_:
        return False, None, u
    return True, close_over(arrow(n1, n2)), u


@settings(max_examples=300, deadline=None)
@given(types, types)
def test_unify_is_symmetric(t1, t2):
    ok1, s1, u1 = _unify_pair(t1, t2, False)
    ok2, s2, u2 = _unify_pair(t1, t2, True)
    assert ok1 == ok2
    if ok1:
        assert scheme_equal_alpha(s1, s2)
        assert u1.audit() == [] and u2.audit() == []


@settings(max_examples=200, deadline=None)
@given(types, types, types)
def test_unify_is_transitive(t1, t2, t3):
    names: dict = {}
    n1, n2, n3 = (build_type(t, ENV, False, names) for t in (t1, t2, t3))
    u = Unifier()
    try:
        u.unify(n1, n2)
        u.unify(n2, n3)
    except TypeError_:
        return
    u.unify(n1, n3)
    assert scheme_equal_alpha(close_over(n1), close_over(n3))



@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.stem)
def test_inference_is_deterministic_and_kind_preserving(path):
    first = check_source(path.read_text(), str(path))
    second = check_source(path.read_text(), str(path))
    if first.types is None:
        return
    assert first.types.audit == []
    for d1, d2 in zip(first.types.decls, second.types.decls):
        assert (d1.scheme is None) == (d2.scheme is None)
        if d1.scheme is not None:
            assert scheme_equal_alpha(d1.scheme, d2.scheme)
            assert d1.scheme.pretty() == d2.scheme.pretty()
