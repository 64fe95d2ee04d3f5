"""Abstract syntax for terms, patterns, types and programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def to(self, other: Optional["Span"]) -> "Span":
        if other is None:
            return self
        return Span(self.line, self.col, other.end_line, other.end_col)

    def __str__(self) -> str:
        return f"{self.line}:{self.col}-{self.end_line}:{self.end_col}"


def _span():
    return field(default=None, compare=False, repr=False)


def normalize_label(text: str) -> str:
    if text.isdigit():
        return str(int(text))
    return text


def is_label(name: str) -> bool:
    return bool(name) and (name[0].isupper() or name[0].isdigit())


# --------------------------------------------------------------------- terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Lam(Term):
    param: str
    body: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Let(Term):
    name: str
    value: Term
    body: Term
    annotation: Optional["Annotation"] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Fix(Term):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LabelApp(Term):
    label: str
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Record(Term):
    fields: tuple[tuple[str, Term], ...] = ()
    span: Optional[Span] = _span()

    def get(self, label: str) -> Optional[Term]:
        for lab, value in self.fields:
            if lab == label:
                return value
        return None


@dataclass(frozen=True)
class FieldAccess(Term):
    record: Term
    label: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FieldDel(Term):
    record: Term
    label: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordMod(Term):
    record: Term
    fields: tuple[tuple[str, Term], ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordExt(Term):
    record: Term
    fields: tuple[tuple[str, Term], ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Match(Term):
    """Surface match over complex patterns; zero branches is the void match."""

    subject: Term
    branches: tuple[tuple["Pattern", Term], ...]
    span: Optional[Span] = _span()
    branch_spans: tuple = field(default=(), compare=False, repr=False)


# Core (post-elaboration) match forms.


@dataclass(frozen=True)
class Case(Term):
    """``match subject with < label bound => then | rest => otherwise >``"""

    subject: Term
    label: str
    bound: str
    then: Term
    rest: str
    otherwise: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class UnitMatch(Term):
    subject: Term
    body: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class VoidMatch(Term):
    subject: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Rhs(Term):
    """Transparent marker around an elaborated right-hand side.

    ``key`` identifies the elaborated match, ``index`` the source branch.
    Only inference looks at it; it is stripped before evaluation.
    """

    body: Term
    key: int
    index: int
    span: Optional[Span] = _span()


UNIT = Record(())


# ------------------------------------------------------------------ patterns


class Pattern:
    __slots__ = ()


@dataclass(frozen=True)
class PVar(Pattern):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PLabel(Pattern):
    """``l`` when ``arg`` is None, otherwise ``l arg``."""

    label: str
    arg: Optional[Pattern] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PRecord(Pattern):
    fields: tuple[tuple[str, Pattern], ...] = ()
    span: Optional[Span] = _span()


def pattern_vars(p: Pattern) -> list[PVar]:
    if isinstance(p, PVar):
        return [p]
    if isinstance(p, PLabel):
        return pattern_vars(p.arg) if p.arg is not None else []
    out: list[PVar] = []
    for _, sub in p.fields:
        out.extend(pattern_vars(sub))
    return out


# --------------------------------------------------------------------- types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class TVar(Type):
    name: str


@dataclass(frozen=True)
class TArrow(Type):
    param: Type
    result: Type


@dataclass(frozen=True, eq=False)
class Row:
    """Label/type pairs plus a tail.

    ``tail`` is a row variable name, or None for the empty row. ``fresh``
    marks the ``| >`` syntax where the tail is an implicit fresh variable.
    Equality ignores field order.
    """

    fields: tuple[tuple[str, Type], ...] = ()
    tail: Optional[str] = None
    fresh: bool = False

    def labels(self) -> list[str]:
        return [lab for lab, _ in self.fields]

    def __eq__(self, other):
        if not isinstance(other, Row):
            return NotImplemented
        return (
            dict(self.fields) == dict(other.fields)
            and len(self.fields) == len(other.fields)
            and self.tail == other.tail
            and self.fresh == other.fresh
        )

    def __hash__(self):
        return hash((frozenset(self.fields), self.tail, self.fresh))


@dataclass(frozen=True)
class TRecord(Type):
    row: Row


@dataclass(frozen=True)
class TVariant(Type):
    row: Row


@dataclass(frozen=True)
class TRec(Type):
    """``var as body``"""

    var: str
    body: Type


@dataclass(frozen=True)
class TAlias(Type):
    name: str
    args: tuple[Type, ...] = ()


# ------------------------------------------------------------------ programs


@dataclass(frozen=True)
class Annotation:
    type: Type
    kinds: tuple[tuple[str, object], ...] = ()  # (var, Kind) pairs
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class TypeDecl:
    name: str
    params: tuple[str, ...]
    body: Type
    kinds: tuple[tuple[str, object], ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LetDecl:
    name: str
    value: Term
    annotation: Optional[Annotation] = None
    span: Optional[Span] = _span()


Decl = Union[TypeDecl, LetDecl]


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...] = ()
    main: Optional[Term] = None

    def lets(self) -> list[LetDecl]:
        return [d for d in self.decls if isinstance(d, LetDecl)]

    def aliases(self) -> dict[str, TypeDecl]:
        return {d.name: d for d in self.decls if isinstance(d, TypeDecl)}

    def as_term(self) -> Optional[Term]:
        """Nest the value declarations around the final expression."""
        if self.main is None:
            return None
        body = self.main
        for d in reversed(self.lets()):
            body = Let(d.name, d.value, body, span=d.span)
        return body


# ------------------------------------------------------------------- helpers


def free_vars(e: Term) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, App):
        return free_vars(e.fn) | free_vars(e.arg)
    if isinstance(e, Lam):
        return free_vars(e.body) - {e.param}
    if isinstance(e, Let):
        return free_vars(e.value) | (free_vars(e.body) - {e.name})
    if isinstance(e, Fix):
        return set()
    if isinstance(e, LabelApp):
        return free_vars(e.arg)
    if isinstance(e, Record):
        out: set[str] = set()
        for _, v in e.fields:
            out |= free_vars(v)
        return out
    if isinstance(e, (FieldAccess, FieldDel)):
        return free_vars(e.record)
    if isinstance(e, (RecordMod, RecordExt)):
        out = free_vars(e.record)
        for _, v in e.fields:
            out |= free_vars(v)
        return out
    if isinstance(e, Case):
        return (
            free_vars(e.subject)
            | (free_vars(e.then) - {e.bound})
            | (free_vars(e.otherwise) - {e.rest})
        )
    if isinstance(e, UnitMatch):
        return free_vars(e.subject) | free_vars(e.body)
    if isinstance(e, VoidMatch):
        return free_vars(e.subject)
    if isinstance(e, Rhs):
        return free_vars(e.body)
    if isinstance(e, Match):
        out = free_vars(e.subject)
        for pat, rhs in e.branches:
            out |= free_vars(rhs) - {v.name for v in pattern_vars(pat)}
        return out
    raise TypeError(f"not a term: {e!r}")


def term_size(e: Term) -> int:
    if isinstance(e, (Var, Fix)):
        return 1
    if isinstance(e, App):
        return 1 + term_size(e.fn) + term_size(e.arg)
    if isinstance(e, Lam):
        return 1 + term_size(e.body)
    if isinstance(e, Let):
        return 1 + term_size(e.value) + term_size(e.body)
    if isinstance(e, LabelApp):
        return 1 + term_size(e.arg)
    if isinstance(e, Record):
        return 1 + sum(term_size(v) for _, v in e.fields)
    if isinstance(e, (FieldAccess, FieldDel)):
        return 1 + term_size(e.record)
    if isinstance(e, (RecordMod, RecordExt)):
        return 1 + term_size(e.record) + sum(term_size(v) for _, v in e.fields)
    if isinstance(e, Case):
        return 1 + term_size(e.subject) + term_size(e.then) + term_size(e.otherwise)
    if isinstance(e, UnitMatch):
        return 1 + term_size(e.subject) + term_size(e.body)
    if isinstance(e, VoidMatch):
        return 1 + term_size(e.subject)
    if isinstance(e, Rhs):
        return term_size(e.body)
    if isinstance(e, Match):
        return 1 + term_size(e.subject) + sum(term_size(r) for _, r in e.branches)
    raise TypeError(f"not a term: {e!r}")


def strip_rhs(e: Term) -> Term:
    """Remove every :class:`Rhs` marker."""
    return map_children(e, strip_rhs) if not isinstance(e, Rhs) else strip_rhs(e.body)


def map_children(e: Term, f) -> Term:
    """Rebuild ``e`` with ``f`` applied to each immediate subterm."""
    if isinstance(e, (Var, Fix)):
        return e
    if isinstance(e, App):
        return App(f(e.fn), f(e.arg), span=e.span)
    if isinstance(e, Lam):
        return Lam(e.param, f(e.body), span=e.span)
    if isinstance(e, Let):
        return Let(e.name, f(e.value), f(e.body), e.annotation, span=e.span)
    if isinstance(e, LabelApp):
        return LabelApp(e.label, f(e.arg), span=e.span)
    if isinstance(e, Record):
        return Record(tuple((l, f(v)) for l, v in e.fields), span=e.span)
    if isinstance(e, FieldAccess):
        return FieldAccess(f(e.record), e.label, span=e.span)
    if isinstance(e, FieldDel):
        return FieldDel(f(e.record), e.label, span=e.span)
    if isinstance(e, RecordMod):
        return RecordMod(f(e.record), tuple((l, f(v)) for l, v in e.fields), span=e.span)
    if isinstance(e, RecordExt):
        return RecordExt(f(e.record), tuple((l, f(v)) for l, v in e.fields), span=e.span)
    if isinstance(e, Case):
        return Case(f(e.subject), e.label, e.bound, f(e.then), e.rest, f(e.otherwise), span=e.span)
    if isinstance(e, UnitMatch):
        return UnitMatch(f(e.subject), f(e.body), span=e.span)
    if isinstance(e, VoidMatch):
        return VoidMatch(f(e.subject), span=e.span)
    if isinstance(e, Rhs):
        return Rhs(f(e.body), e.key, e.index, span=e.span)
    if isinstance(e, Match):
        return Match(
            f(e.subject),
            tuple((p, f(r)) for p, r in e.branches),
            span=e.span,
            branch_spans=e.branch_spans,
        )
    raise TypeError(f"not a term: {e!r}")


_rename_counter = [0]


def _fresh_like(name: str, avoid: set[str]) -> str:
    base = name.split("'")[0]
    while True:
        _rename_counter[0] += 1
        candidate = f"{base}'{_rename_counter[0]}"
        if candidate not in avoid:
            return candidate


def substitute(e: Term, mapping: dict[str, Term]) -> Term:
    """Capture-avoiding simultaneous substitution of terms for variables."""
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Lam):
        param, body, inner = _enter_binder(e.param, e.body, mapping)
        return Lam(param, substitute(body, inner), span=e.span)
    if isinstance(e, Let):
        name, body, inner = _enter_binder(e.name, e.body, mapping)
        return Let(name, substitute(e.value, mapping), substitute(body, inner), e.annotation, span=e.span)
    if isinstance(e, Case):
        bound, then, inner1 = _enter_binder(e.bound, e.then, mapping)
        rest, other, inner2 = _enter_binder(e.rest, e.otherwise, mapping)
        return Case(
            substitute(e.subject, mapping),
            e.label,
            bound,
            substitute(then, inner1),
            rest,
            substitute(other, inner2),
            span=e.span,
        )
    if isinstance(e, Match):
        branches = []
        for pat, rhs in e.branches:
            inner = dict(mapping)
            for pv in pattern_vars(pat):
                inner.pop(pv.name, None)
            clash = _replacement_fvs(inner) & {pv.name for pv in pattern_vars(pat)}
            if clash:
                avoid = _replacement_fvs(inner) | free_vars(rhs)
                renames = {n: _fresh_like(n, avoid) for n in clash}
                pat = _rename_pattern(pat, renames)
                rhs = substitute(rhs, {n: Var(m) for n, m in renames.items()})
            branches.append((pat, substitute(rhs, inner)))
        return Match(substitute(e.subject, mapping), tuple(branches), span=e.span, branch_spans=e.branch_spans)
    return map_children(e, lambda sub: substitute(sub, mapping))


def _replacement_fvs(mapping: dict[str, Term]) -> set[str]:
    out: set[str] = set()
    for t in mapping.values():
        out |= free_vars(t)
    return out


def _enter_binder(name: str, body: Term, mapping: dict[str, Term]):
    inner = {k: v for k, v in mapping.items() if k != name}
    if not inner:
        return name, body, inner
    fvs = _replacement_fvs(inner)
    if name in fvs:
        new = _fresh_like(name, fvs | free_vars(body) | set(inner))
        body = substitute(body, {name: Var(new)})
        name = new
    return name, body, inner


def _rename_pattern(p: Pattern, renames: dict[str, str]) -> Pattern:
    if isinstance(p, PVar):
        return PVar(renames.get(p.name, p.name), span=p.span)
    if isinstance(p, PLabel):
        return PLabel(p.label, None if p.arg is None else _rename_pattern(p.arg, renames), span=p.span)
    return PRecord(tuple((l, _rename_pattern(s, renames)) for l, s in p.fields), span=p.span)


def rename_pattern(p: Pattern, renames: dict[str, str]) -> Pattern:
    return _rename_pattern(p, renames)
