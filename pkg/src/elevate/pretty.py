"""Printers for terms, patterns, types and programs.

Output re-parses to an equal AST (spans aside).
"""

from __future__ import annotations

from typing import Mapping, Optional

from .kinds import RowKind, label_sort_key
from .syntax import (
    UNIT,
    Annotation,
    App,
    Case,
    FieldAccess,
    FieldDel,
    Fix,
    LabelApp,
    Lam,
    Let,
    LetDecl,
    Match,
    PLabel,
    PRecord,
    PVar,
    Pattern,
    Program,
    Record,
    RecordExt,
    RecordMod,
    Rhs,
    Row,
    TAlias,
    TArrow,
    TRec,
    TRecord,
    TVar,
    TVariant,
    Term,
    Type,
    TypeDecl,
    UnitMatch,
    Var,
    VoidMatch,
)

# contexts, loosest to tightest
TOP, FN, ARG = 0, 1, 2


def pretty_term(e: Term, ctx: int = TOP) -> str:
    if isinstance(e, Rhs):
        return pretty_term(e.body, ctx)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Fix):
        return "fix"
    if isinstance(e, Record):
        return _fields(e.fields)
    if isinstance(e, FieldAccess):
        return f"{_postfix_base(e.record)}.{e.label}"
    if isinstance(e, FieldDel):
        return f"{_postfix_base(e.record)}.-{e.label}"
    if isinstance(e, RecordMod):
        return f"{_postfix_base(e.record)}.{_fields(e.fields)}"
    if isinstance(e, RecordExt):
        return f"{_postfix_base(e.record)}.+{_fields(e.fields)}"
    if isinstance(e, LabelApp):
        text = e.label if e.arg == UNIT else f"{e.label} {_label_arg(e.arg)}"
        return text if ctx == TOP else f"({text})"
    if isinstance(e, App):
        text = f"{pretty_term(e.fn, FN)} {pretty_term(e.arg, ARG)}"
        return text if ctx in (TOP, FN) else f"({text})"
    if isinstance(e, Lam):
        text = f"lam {e.param} = {pretty_term(e.body)}"
    elif isinstance(e, Let):
        ann = f": {pretty_annotation(e.annotation)}" if e.annotation is not None else ""
        text = f"let {e.name}{ann} = {pretty_term(e.value)} in {pretty_term(e.body)}"
    elif isinstance(e, Match):
        branches = " | ".join(f"{pretty_pattern(p)} => {pretty_term(r)}" for p, r in e.branches)
        text = f"match {pretty_term(e.subject)} with < {branches} >" if branches else f"match {pretty_term(e.subject)} with < >"
    elif isinstance(e, Case):
        text = (
            f"match {pretty_term(e.subject)} with < {e.label} {e.bound} => {pretty_term(e.then)}"
            f" | {e.rest} => {pretty_term(e.otherwise)} >"
        )
    elif isinstance(e, UnitMatch):
        text = f"match {pretty_term(e.subject)} with < {{}} => {pretty_term(e.body)} >"
    elif isinstance(e, VoidMatch):
        text = f"match {pretty_term(e.subject)} with < >"
    else:
        raise TypeError(f"not a term: {e!r}")
    return text if ctx == TOP else f"({text})"


def _fields(fields) -> str:
    if not fields:
        return "{}"
    return "{" + " | ".join(f"{lab}: {pretty_term(v)}" for lab, v in fields) + "}"


def _is_postfix_atom(e: Term) -> bool:
    while isinstance(e, Rhs):
        e = e.body
    return isinstance(e, (Var, Fix, Record, FieldAccess, FieldDel, RecordMod, RecordExt))


def _postfix_base(e: Term) -> str:
    return pretty_term(e) if _is_postfix_atom(e) else f"({pretty_term(e)})"


def _label_arg(e: Term) -> str:
    while isinstance(e, Rhs):
        e = e.body
    if isinstance(e, LabelApp):
        return pretty_term(e) if e.arg == UNIT else f"({pretty_term(e)})"
    return _postfix_base(e)


def pretty_pattern(p: Pattern) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PLabel):
        if p.arg is None:
            return p.label
        return f"{p.label} {pretty_pattern(p.arg)}"
    if isinstance(p, PRecord):
        if not p.fields:
            return "{}"
        return "{" + " | ".join(f"{lab}: {pretty_pattern(s)}" for lab, s in p.fields) + "}"
    raise TypeError(f"not a pattern: {p!r}")


# --------------------------------------------------------------------- types

T_TOP, T_ARROW_LEFT, T_ARG = 0, 1, 2


def sorted_fields(fields):
    return sorted(fields, key=lambda f: label_sort_key(f[0]))


def pretty_type(t: Type, kinds: Optional[Mapping[str, RowKind]] = None, ctx: int = T_TOP) -> str:
    kinds = kinds or {}
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TArrow):
        text = f"{pretty_type(t.param, kinds, T_ARROW_LEFT)} -> {pretty_type(t.result, kinds, T_TOP)}"
        return text if ctx == T_TOP else f"({text})"
    if isinstance(t, TRecord):
        return "{" + _row(t.row, kinds) + "}"
    if isinstance(t, TVariant):
        return "<" + _row(t.row, kinds) + ">"
    if isinstance(t, TRec):
        text = f"{t.var} as {pretty_type(t.body, kinds, T_TOP)}"
        return text if ctx == T_TOP else f"({text})"
    if isinstance(t, TAlias):
        if not t.args:
            return t.name
        text = " ".join([t.name] + [pretty_type(a, kinds, T_ARG) for a in t.args])
        return text if ctx != T_ARG else f"({text})"
    raise TypeError(f"not a type: {t!r}")


def _row(row: Row, kinds) -> str:
    parts = [f"{lab}: {pretty_type(ft, kinds)}" for lab, ft in sorted_fields(row.fields)]
    if row.tail is not None:
        kind = kinds.get(row.tail)
        parts.append(row.tail if kind is None else f"{row.tail}: {kind}")
    elif row.fresh:
        return " | ".join(parts) + " | " if parts else " | "
    else:
        parts.append("*")
    return " | ".join(parts)


def pretty_annotation(a: Annotation) -> str:
    return pretty_type(a.type, dict(a.kinds))


def pretty_decl(d) -> str:
    if isinstance(d, TypeDecl):
        params = f"forall {' '.join(d.params)}. " if d.params else ""
        return f"type {d.name} = {params}{pretty_type(d.body, dict(d.kinds))}"
    if isinstance(d, LetDecl):
        ann = f": {pretty_annotation(d.annotation)}" if d.annotation is not None else ""
        return f"let {d.name}{ann} = {pretty_term(d.value)}"
    raise TypeError(f"not a declaration: {d!r}")


def pretty_program(p: Program) -> str:
    chunks = [pretty_decl(d) for d in p.decls]
    if p.main is not None:
        chunks.append(pretty_term(p.main))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def pretty(x) -> str:
    """Dispatch on the kind of syntax object."""
    if isinstance(x, Term):
        return pretty_term(x)
    if isinstance(x, Type):
        return pretty_type(x)
    if isinstance(x, Pattern):
        return pretty_pattern(x)
    if isinstance(x, Program):
        return pretty_program(x)
    if isinstance(x, Annotation):
        return pretty_annotation(x)
    if isinstance(x, (TypeDecl, LetDecl)):
        return pretty_decl(x)
    to_text = getattr(x, "pretty", None)
    if to_text is not None:
        return to_text()
    raise TypeError(f"cannot print {x!r}")
