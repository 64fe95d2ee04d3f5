"""Small-step call-by-value semantics for core terms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .diagnostics import FuelExhausted, Stuck
from .syntax import (
    App,
    Case,
    FieldAccess,
    FieldDel,
    Fix,
    LabelApp,
    Lam,
    Let,
    Match,
    Record,
    RecordExt,
    RecordMod,
    Rhs,
    Term,
    UnitMatch,
    Var,
    VoidMatch,
    free_vars,
    strip_rhs,
    substitute,
)

DEFAULT_FUEL = 100_000

RULES = (
    "ST-App",
    "ST-Let",
    "ST-Fix",
    "ST-FieldAccess",
    "ST-FieldDel",
    "ST-RecordMod",
    "ST-RecordExt",
    "ST-Match-Unit",
    "ST-Match-Match",
    "ST-Match-Skip",
)


def is_value(e: Term) -> bool:
    while isinstance(e, Rhs):
        e = e.body
    if isinstance(e, (Lam, Fix)):
        return True
    if isinstance(e, LabelApp):
        return is_value(e.arg)
    if isinstance(e, Record):
        return all(is_value(v) for _, v in e.fields)
    return False


@dataclass(frozen=True)
class Stepped:
    term: Term
    rule: str


@dataclass(frozen=True)
class AlreadyValue:
    term: Term


@dataclass(frozen=True)
class StuckAt:
    reason: str
    term: Term
    span: object = None


StepOutcome = Union[Stepped, AlreadyValue, StuckAt]


def _fresh(base: str, avoid: set[str]) -> str:
    name, i = base, 0
    while name in avoid:
        i += 1
        name = f"{base}{i}"
    return name


def step(e: Term) -> StepOutcome:
    """One reduction at the position chosen by the evaluation contexts."""
    if is_value(e):
        return AlreadyValue(e)
    return _step(e)


def _step(e: Term) -> StepOutcome:
    if isinstance(e, Rhs):
        return _step(e.body)
    if isinstance(e, App):
        if not is_value(e.fn):
            return _inside(e.fn, lambda t: App(t, e.arg, span=e.span))
        if not is_value(e.arg):
            return _inside(e.arg, lambda t: App(e.fn, t, span=e.span))
        fn = strip_rhs(e.fn)
        if isinstance(fn, Lam):
            return Stepped(substitute(fn.body, {fn.param: e.arg}), "ST-App")
        if isinstance(fn, Fix):
            x = _fresh("x", free_vars(e.arg))
            unrolled = Lam(x, App(App(Fix(), e.arg), Var(x)))
            return Stepped(App(e.arg, unrolled, span=e.span), "ST-Fix")
        return StuckAt("application of a non-function value", e, e.span)
    if isinstance(e, Let):
        if not is_value(e.value):
            return _inside(e.value, lambda t: Let(e.name, t, e.body, e.annotation, span=e.span))
        return Stepped(substitute(e.body, {e.name: e.value}), "ST-Let")
    if isinstance(e, LabelApp):
        return _inside(e.arg, lambda t: LabelApp(e.label, t, span=e.span))
    if isinstance(e, Record):
        return _first_field(e.fields, lambda fs: Record(fs, span=e.span))
    if isinstance(e, (FieldAccess, FieldDel)):
        if not is_value(e.record):
            return _inside(e.record, lambda t: type(e)(t, e.label, span=e.span))
        rec = strip_rhs(e.record)
        if not isinstance(rec, Record) or e.label not in dict(rec.fields):
            return StuckAt(f"no field {e.label} to access", e, e.span)
        if isinstance(e, FieldAccess):
            return Stepped(rec.get(e.label), "ST-FieldAccess")
        kept = tuple((l, v) for l, v in rec.fields if l != e.label)
        return Stepped(Record(kept), "ST-FieldDel")
    if isinstance(e, (RecordMod, RecordExt)):
        if not is_value(e.record):
            return _inside(e.record, lambda t: type(e)(t, e.fields, span=e.span))
        if not all(is_value(v) for _, v in e.fields):
            return _first_field(e.fields, lambda fs: type(e)(e.record, fs, span=e.span))
        rec = strip_rhs(e.record)
        if not isinstance(rec, Record):
            return StuckAt("record operation on a non-record", e, e.span)
        present = dict(rec.fields)
        updates = dict(e.fields)
        if isinstance(e, RecordMod):
            missing = [l for l in updates if l not in present]
            if missing:
                return StuckAt(f"cannot modify absent field {missing[0]}", e, e.span)
            fields = tuple((l, updates.get(l, v)) for l, v in rec.fields)
            return Stepped(Record(fields), "ST-RecordMod")
        clash = [l for l in updates if l in present]
        if clash:
            return StuckAt(f"cannot extend with existing field {clash[0]}", e, e.span)
        return Stepped(Record(rec.fields + tuple(e.fields)), "ST-RecordExt")
    if isinstance(e, Case):
        if not is_value(e.subject):
            return _inside(
                e.subject,
                lambda t: Case(t, e.label, e.bound, e.then, e.rest, e.otherwise, span=e.span),
            )
        subj = strip_rhs(e.subject)
        if not isinstance(subj, LabelApp):
            return StuckAt("match on a value that is not a label application", e, e.span)
        if subj.label == e.label:
            return Stepped(substitute(e.then, {e.bound: subj.arg}), "ST-Match-Match")
        return Stepped(substitute(e.otherwise, {e.rest: subj}), "ST-Match-Skip")
    if isinstance(e, UnitMatch):
        if not is_value(e.subject):
            return _inside(e.subject, lambda t: UnitMatch(t, e.body, span=e.span))
        subj = strip_rhs(e.subject)
        if isinstance(subj, Record) and not subj.fields:
            return Stepped(e.body, "ST-Match-Unit")
        return StuckAt("unit match on a non-empty value", e, e.span)
    if isinstance(e, VoidMatch):
        if not is_value(e.subject):
            return _inside(e.subject, lambda t: VoidMatch(t, span=e.span))
        return StuckAt("no branch matches the value", e, e.span)
    if isinstance(e, Var):
        return StuckAt(f"free variable `{e.name}`", e, e.span)
    if isinstance(e, Match):
        return StuckAt("match expression was not elaborated", e, e.span)
    return StuckAt(f"no rule for {type(e).__name__}", e, getattr(e, "span", None))


def _inside(sub: Term, rebuild: Callable[[Term], Term]) -> StepOutcome:
    out = _step(sub)
    if isinstance(out, Stepped):
        return Stepped(rebuild(out.term), out.rule)
    return out


def _first_field(fields, rebuild) -> StepOutcome:
    for i, (label, v) in enumerate(fields):
        if not is_value(v):
            def put(t, i=i, label=label):
                return rebuild(fields[:i] + ((label, t),) + fields[i + 1 :])

            return _inside(v, put)
    raise AssertionError("all fields are values")


def evaluate(
    e: Term,
    fuel: int = DEFAULT_FUEL,
    on_step: Optional[Callable[[Term, str], None]] = None,
) -> Term:
    """Reduce to a value; raises :class:`FuelExhausted` or :class:`Stuck`."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    term = strip_rhs(e)
    for _ in range(fuel):
        out = step(term)
        if isinstance(out, AlreadyValue):
            return term
        if isinstance(out, StuckAt):
            raise Stuck(out.reason, out.term, out.span)
        term = out.term
        if on_step is not None:
            on_step(term, out.rule)
    if is_value(term):
        return term
    raise FuelExhausted(term, fuel)
