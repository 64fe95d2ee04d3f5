"""Mutable type graphs with union-find, plus unification.

Types are nodes; recursive types are simply cyclic graphs.  Row variables
carry a :class:`RowKind`, ordinary variables carry ``TYPE``.  Variables
introduced from annotations are *rigid*: they are never bound and never
have their kind narrowed.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from .diagnostics import (
    ConstructorMismatch,
    KindViolation,
    MissingLabel,
    OccursFreeViolation,
)
from .kinds import TYPE, Kind, RowKind, row_kind_meet, row_kind_remove, row_kind_subset

VAR, ARROW, RECORD, VARIANT, ROWCONS, ROWEMPTY = "var", "arrow", "record", "variant", "rowcons", "rowempty"

_ids = itertools.count(1)


class TNode:
    __slots__ = ("id", "tag", "parent", "kind", "rigid", "label", "children", "hint")

    def __init__(self, tag: str, children=(), label: Optional[str] = None, kind: Optional[Kind] = None, rigid: bool = False, hint: str = ""):
        self.id = next(_ids)
        self.tag = tag
        self.parent: Optional[TNode] = None
        self.kind = kind
        self.rigid = rigid
        self.label = label
        self.children = list(children)
        self.hint = hint

    def __repr__(self) -> str:
        n = find(self)
        if n.tag == VAR:
            return f"<{'!' if n.rigid else ''}{n.hint or 'v'}{n.id}:{n.kind}>"
        return f"<{n.tag}{n.id}{' ' + n.label if n.label else ''}>"


def find(n: TNode) -> TNode:
    root = n
    while root.parent is not None:
        root = root.parent
    while n.parent is not None and n.parent is not root:
        nxt = n.parent
        n.parent = root
        n = nxt
    return root


# ---------------------------------------------------------------- builders


def tvar(kind: Kind = TYPE, rigid: bool = False, hint: str = "") -> TNode:
    return TNode(VAR, kind=kind, rigid=rigid, hint=hint)


def rowvar(kind: RowKind, rigid: bool = False, hint: str = "") -> TNode:
    return TNode(VAR, kind=kind, rigid=rigid, hint=hint)


def arrow(a: TNode, b: TNode) -> TNode:
    return TNode(ARROW, (a, b))


def record(row: TNode) -> TNode:
    return TNode(RECORD, (row,))


def variant(row: TNode) -> TNode:
    return TNode(VARIANT, (row,))


def row_empty() -> TNode:
    return TNode(ROWEMPTY)


def row_cons(label: str, field: TNode, rest: TNode) -> TNode:
    return TNode(ROWCONS, (field, rest), label=label)


def row_of(fields: Iterable[tuple[str, TNode]], tail: Optional[TNode] = None) -> TNode:
    row = tail if tail is not None else row_empty()
    for label, t in reversed(list(fields)):
        row = row_cons(label, t, row)
    return row


def flatten_row(row: TNode) -> tuple[list[tuple[str, TNode]], TNode]:
    """Field list and final tail (a var or empty-row node)."""
    fields = []
    n = find(row)
    while n.tag == ROWCONS:
        fields.append((n.label, n.children[0]))
        n = find(n.children[1])
    return fields, n


def row_kind_of(row: TNode) -> RowKind:
    fields, tail = flatten_row(row)
    labels = frozenset(l for l, _ in fields)
    if tail.tag == ROWEMPTY:
        return RowKind(labels, False)
    k = tail.kind
    if k.negative:
        return RowKind(k.labels - labels, True)
    return RowKind(k.labels | labels, False)


# ---------------------------------------------------------------- unifier


class Unifier:
    """Huet-style unification: union first, then unify children."""

    def __init__(self, describe=None):
        self.describe = describe or (lambda n: repr(n))
        # (declared kind, row) for every row variable solved, for auditing
        self.solved: list[tuple[RowKind, TNode]] = []

    def unify(self, a: TNode, b: TNode) -> None:
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            x, y = find(x), find(y)
            if x is y:
                continue
            if x.tag == VAR or y.tag == VAR:
                self._bind(x, y)
                continue
            if x.tag != y.tag:
                self._mismatch(x, y)
            if x.tag == ROWEMPTY:
                y.parent = x
            elif x.tag == ROWCONS:
                field, rest = self._extract(y, x.label, avoid=x.children[1])
                y.parent = x
                stack.append((x.children[1], rest))
                stack.append((x.children[0], field))
            else:
                y.parent = x
                for cx, cy in reversed(list(zip(x.children, y.children))):
                    stack.append((cx, cy))

    def _mismatch(self, x: TNode, y: TNode):
        if {x.tag, y.tag} == {ROWCONS, ROWEMPTY}:
            cons = x if x.tag == ROWCONS else y
            raise MissingLabel(cons.label, "*")
        raise ConstructorMismatch(
            f"cannot unify {self.describe(x)} with {self.describe(y)}"
        )

    def _extract(self, row: TNode, label: str, avoid: TNode) -> tuple[TNode, TNode]:
        """Rewrite ``row`` as ``(label: t | rest)``; returns ``(t, rest)``."""
        before = []
        n = find(row)
        while n.tag == ROWCONS:
            if n.label == label:
                return n.children[0], row_of(before, n.children[1])
            before.append((n.label, n.children[0]))
            n = find(n.children[1])
        if n.tag == ROWEMPTY:
            raise MissingLabel(label, self.describe(row))
        if n.rigid:
            raise MissingLabel(label, f"{self.describe(row)} (rigid row variable)")
        if not n.kind.admits(label):
            raise KindViolation(
                f"label {label} is excluded by the kind {n.kind} of row variable {self.describe(n)}"
            )
        _, avoid_tail = flatten_row(avoid)
        if avoid_tail is n:
            raise OccursFreeViolation(
                f"row variable {self.describe(n)} would have to contain itself"
            )
        field = tvar()
        tail = rowvar(row_kind_remove(n.kind, {label}))
        self.solved.append((n.kind, row_cons(label, field, tail)))
        n.parent = self.solved[-1][1]
        return field, row_of(before, tail)

    def _bind(self, x: TNode, y: TNode) -> None:
        if x.tag == VAR and y.tag == VAR:
            self._bind_vars(x, y)
            return
        v, t = (x, y) if x.tag == VAR else (y, x)
        if v.rigid:
            raise ConstructorMismatch(
                f"rigid type variable {self.describe(v)} cannot be unified with {self.describe(t)}"
            )
        if isinstance(v.kind, RowKind):
            if t.tag not in (ROWCONS, ROWEMPTY):
                raise ConstructorMismatch(f"row variable cannot be unified with {self.describe(t)}")
            self._bind_row(v, t)
        else:
            if t.tag in (ROWCONS, ROWEMPTY):
                raise ConstructorMismatch(f"type variable cannot be unified with a row")
            v.parent = t

    def _bind_row(self, v: TNode, row: TNode) -> None:
        fields, tail = flatten_row(row)
        labels = {l for l, _ in fields}
        for l in labels:
            if not v.kind.admits(l):
                raise KindViolation(f"label {l} is not allowed by kind {v.kind}")
        if tail.tag == VAR:
            if tail is v:
                raise OccursFreeViolation(
                    f"row variable {self.describe(v)} would have to contain itself"
                )
            allowed = row_kind_remove(v.kind, labels)
            if tail.rigid:
                if not row_kind_subset(tail.kind, allowed):
                    raise KindViolation(
                        f"row of kind {tail.kind} does not fit kind {allowed}"
                    )
            else:
                tail.kind = row_kind_meet(tail.kind, allowed)
        self.solved.append((v.kind, row))
        v.parent = row

    def _bind_vars(self, x: TNode, y: TNode) -> None:
        if isinstance(x.kind, RowKind) != isinstance(y.kind, RowKind):
            raise ConstructorMismatch("cannot unify a row variable with a type variable")
        if x.rigid and y.rigid:
            raise ConstructorMismatch(
                f"rigid type variables {self.describe(x)} and {self.describe(y)} differ"
            )
        if x.rigid or y.rigid:
            r, f = (x, y) if x.rigid else (y, x)
            if isinstance(r.kind, RowKind) and not row_kind_subset(r.kind, f.kind):
                raise KindViolation(f"row of kind {r.kind} does not fit kind {f.kind}")
            if isinstance(f.kind, RowKind):
                self.solved.append((f.kind, r))
            f.parent = r
            return
        if isinstance(x.kind, RowKind):
            self.solved.append((y.kind, x))
            x.kind = row_kind_meet(x.kind, y.kind)
        y.parent = x


    def audit(self) -> list[str]:
        """Solved rows whose kind, recomputed now, escapes the declared kind."""
        return [
            f"row of kind {row_kind_of(row)} solved a variable of kind {kind}"
            for kind, row in self.solved
            if not row_kind_subset(row_kind_of(row), kind)
        ]


def unify(a: TNode, b: TNode, describe=None) -> None:
    Unifier(describe).unify(a, b)


# ------------------------------------------------------------ traversals


def reachable_vars(roots: Iterable[TNode]) -> list[TNode]:
    """Unsolved variables reachable from ``roots``, in first-visit order."""
    out: list[TNode] = []
    seen: set[int] = set()
    stack = [find(r) for r in roots]
    stack.reverse()
    while stack:
        n = find(stack.pop())
        if n.id in seen:
            continue
        seen.add(n.id)
        if n.tag == VAR:
            out.append(n)
            continue
        for c in reversed(n.children):
            stack.append(c)
    return out


def copy_graph(root: TNode, replace) -> TNode:
    """Copy the graph under ``root``; ``replace(var)`` decides each variable.

    ``replace`` returns a substitute node or ``None`` to share the variable.
    Cycles are preserved through the memo table.
    """
    memo: dict[int, TNode] = {}

    def go(n: TNode) -> TNode:
        n = find(n)
        hit = memo.get(n.id)
        if hit is not None:
            return hit
        if n.tag == VAR:
            new = replace(n) or n
            memo[n.id] = new
            return new
        new = TNode(n.tag, label=n.label)
        memo[n.id] = new
        new.children = [go(c) for c in n.children]
        return new

    return go(root)
