"""Row kinds and the kinding (well-formedness) judgment for types.

A row kind describes which labels may appear in a row: positive kinds are
finite label sets, negative kinds are cofinite (everything except a set).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .diagnostics import KindError
from .syntax import Row, TAlias, TArrow, TRec, TRecord, TVar, TVariant, Type


class TypeKind:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TYPE"

    def __str__(self) -> str:
        return "Type"


TYPE = TypeKind()


@dataclass(frozen=True)
class RowKind:
    labels: frozenset = frozenset()
    negative: bool = False

    @classmethod
    def pos(cls, *labels: str) -> "RowKind":
        return cls(frozenset(labels), False)

    @classmethod
    def neg(cls, *labels: str) -> "RowKind":
        return cls(frozenset(labels), True)

    def admits(self, label: str) -> bool:
        return (label in self.labels) != self.negative

    def __str__(self) -> str:
        inner = ", ".join(sorted(self.labels, key=label_sort_key))
        return ("~{" if self.negative else "{") + inner + "}"


Kind = Union[TypeKind, RowKind]

EMPTY_ROW_KIND = RowKind.pos()


class IllFormedRow(Exception):
    def __init__(self, kind: RowKind, label: str):
        super().__init__(f"label {label} cannot extend a row of kind {kind}")
        self.kind = kind
        self.label = label


def label_sort_key(label: str):
    return (0, int(label), "") if label.isdigit() else (1, 0, label)


def row_kind_subset(k1: RowKind, k2: RowKind) -> bool:
    if not k1.negative and not k2.negative:
        return k1.labels <= k2.labels
    if k1.negative and k2.negative:
        return k2.labels <= k1.labels
    if not k1.negative and k2.negative:
        return not (k1.labels & k2.labels)
    # a cofinite set never fits inside a finite one
    return False


def row_kind_extend(k: RowKind, label: str) -> RowKind:
    if not k.negative:
        if label in k.labels:
            raise IllFormedRow(k, label)
        return RowKind(k.labels | {label}, False)
    if label not in k.labels:
        raise IllFormedRow(k, label)
    return RowKind(k.labels - {label}, True)


def row_kind_meet(k1: RowKind, k2: RowKind) -> RowKind:
    """Kind denoting the intersection of both label sets."""
    if not k1.negative and not k2.negative:
        return RowKind(k1.labels & k2.labels, False)
    if k1.negative and k2.negative:
        return RowKind(k1.labels | k2.labels, True)
    pos, neg = (k1, k2) if not k1.negative else (k2, k1)
    return RowKind(pos.labels - neg.labels, False)


def row_kind_remove(k: RowKind, labels) -> RowKind:
    """Kind denoting ``k`` minus ``labels``."""
    labels = frozenset(labels)
    if k.negative:
        return RowKind(k.labels | labels, True)
    return RowKind(k.labels - labels, False)


# ------------------------------------------------------------------- kinding


def check_contractive(binder: str, body: Type) -> None:
    if not isinstance(body, (TArrow, TRecord, TVariant)):
        raise KindError(f"recursive type `{binder} as ...` is not contractive")


def kind_of(env: Mapping[str, Kind], t: Union[Type, Row]) -> Kind:
    """Kind of ``t`` under ``env``; raises :class:`KindError` if ill-formed.

    Implicit fresh tails get the most permissive kind that keeps the row
    well formed: everything except the labels already present.
    """
    if isinstance(t, Row):
        return _row_kind(env, t)
    if isinstance(t, TVar):
        if t.name not in env:
            raise KindError(f"unbound type variable `{t.name}`")
        return env[t.name]
    if isinstance(t, TArrow):
        _expect_type(env, t.param)
        _expect_type(env, t.result)
        return TYPE
    if isinstance(t, (TRecord, TVariant)):
        _row_kind(env, t.row)
        return TYPE
    if isinstance(t, TRec):
        check_contractive(t.var, t.body)
        inner = dict(env)
        inner[t.var] = TYPE
        _expect_type(inner, t.body)
        return TYPE
    if isinstance(t, TAlias):
        raise KindError(f"unresolved type alias `{t.name}`")
    raise KindError(f"not a type: {t!r}")


def _expect_type(env: Mapping[str, Kind], t: Type) -> None:
    k = kind_of(env, t)
    if k is not TYPE:
        raise KindError(f"expected an ordinary type, found a row of kind {k}")


def _row_kind(env: Mapping[str, Kind], row: Row) -> RowKind:
    labels = row.labels()
    if row.tail is not None:
        if row.tail not in env:
            raise KindError(f"unbound row variable `{row.tail}`")
        kind = env[row.tail]
        if not isinstance(kind, RowKind):
            raise KindError(f"`{row.tail}` is an ordinary type but is used as a row tail")
    elif row.fresh:
        kind = RowKind(frozenset(labels), True)
    else:
        kind = EMPTY_ROW_KIND
    for label, field_type in reversed(row.fields):
        _expect_type(env, field_type)
        try:
            kind = row_kind_extend(kind, label)
        except IllFormedRow as exc:
            raise KindError(f"ill-formed row: duplicate or excluded label {label}") from exc
    return kind
