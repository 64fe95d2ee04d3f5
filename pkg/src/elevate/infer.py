"""Row-polymorphic type inference over elaborated core terms.

Algorithm W over the mutable graphs of :mod:`elevate.types`.  Matches are
typed with the two-branch rule: the subject is split into the payload of
one label and the remainder row, and both are generalized.  In the default
mode branches whose label cannot occur are dropped during inference; the
declarative mode types every branch as written.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .diagnostics import (
    DeadBranch,
    ElevateError,
    KindError,
    RedundantPatterns,
    TypeError_,
    UnboundVariable,
)
from .kinds import TYPE, Kind, RowKind, kind_of, label_sort_key, row_kind_subset
from .syntax import (
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
    Program,
    Record,
    RecordExt,
    RecordMod,
    Rhs,
    Row,
    TAlias,
    TArrow,
    Term,
    TRec,
    TRecord,
    TVar,
    TVariant,
    Type,
    TypeDecl,
    UnitMatch,
    Var,
    VoidMatch,
    map_children,
)
from .types import (
    ARROW,
    RECORD,
    ROWCONS,
    ROWEMPTY,
    VAR,
    VARIANT,
    TNode,
    Unifier,
    arrow,
    copy_graph,
    find,
    flatten_row,
    reachable_vars,
    record,
    row_cons,
    row_empty,
    row_kind_of,
    row_of,
    rowvar,
    tvar,
    variant,
)

# ------------------------------------------------------------------ schemes


@dataclass(frozen=True, eq=False)
class Scheme:
    """``forall generics. body``; the body is a (possibly cyclic) graph."""

    generics: frozenset
    body: TNode

    @staticmethod
    def mono(t: TNode) -> "Scheme":
        return Scheme(frozenset(), t)

    def to_type(self) -> tuple[Type, dict[str, RowKind]]:
        return node_to_type(self.body)

    def pretty(self) -> str:
        from .pretty import pretty_type

        t, kinds = self.to_type()
        return pretty_type(t, kinds)

    def kinds_text(self) -> dict[str, str]:
        _, kinds = self.to_type()
        return {name: str(k) for name, k in kinds.items()}

    def __str__(self) -> str:
        return self.pretty()


def node_to_type(root: TNode) -> tuple[Type, dict[str, RowKind]]:
    """Read a graph back as syntax; back-edges become ``as`` binders."""
    names: dict[int, str] = {}
    kinds: dict[str, RowKind] = {}
    counters = Counter()
    binders: dict[int, str] = {}
    on_path: set[int] = set()

    def fresh(base: str) -> str:
        n = counters[base]
        counters[base] += 1
        return base if n == 0 else f"{base}{n}"

    def var_name(n: TNode) -> str:
        if n.id not in names:
            if isinstance(n.kind, RowKind):
                names[n.id] = fresh("r")
                kinds[names[n.id]] = n.kind
            else:
                names[n.id] = fresh("p")
        return names[n.id]

    def row(n: TNode) -> Row:
        fields, tail = flatten_row(n)
        fields = sorted(fields, key=lambda f: label_sort_key(f[0]))
        out = tuple((l, go(t)) for l, t in fields)
        if tail.tag == ROWEMPTY:
            return Row(out, None)
        return Row(out, var_name(tail))

    def go(n: TNode) -> Type:
        n = find(n)
        if n.tag == VAR:
            return TVar(var_name(n))
        if n.id in on_path:
            if n.id not in binders:
                binders[n.id] = fresh("t")
            return TVar(binders[n.id])
        on_path.add(n.id)
        if n.tag == ARROW:
            out: Type = TArrow(go(n.children[0]), go(n.children[1]))
        elif n.tag == RECORD:
            out = TRecord(row(n.children[0]))
        elif n.tag == VARIANT:
            out = TVariant(row(n.children[0]))
        else:
            raise ValueError(f"row node {n!r} in type position")
        on_path.discard(n.id)
        if n.id in binders:
            out = TRec(binders.pop(n.id), out)
        return out

    return go(root), kinds


def describe(n: TNode) -> str:
    from .pretty import pretty_type

    n = find(n)
    if n.tag in (ROWCONS, ROWEMPTY):
        return "<" + _describe_row(n) + ">"
    t, kinds = node_to_type(n)
    return pretty_type(t, kinds)


def _describe_row(n: TNode) -> str:
    from .pretty import _row

    t, kinds = node_to_type(variant(n))
    return _row(t.row, kinds)


def free_type_vars(x: Union[TNode, Scheme, Mapping[str, Scheme]]) -> set[TNode]:
    """Unsolved variables of a type, a scheme, or an environment."""
    if isinstance(x, TNode):
        return set(reachable_vars([x]))
    if isinstance(x, Scheme):
        return {v for v in reachable_vars([x.body]) if v not in x.generics}
    out: set[TNode] = set()
    for s in x.values():
        out |= free_type_vars(s)
    return out


def instantiate(s: Scheme) -> TNode:
    if not s.generics:
        return s.body

    def replace(v: TNode) -> Optional[TNode]:
        if v in s.generics:
            return tvar(v.kind, hint=v.hint)
        return None

    return copy_graph(s.body, replace)


def generalize(env: Mapping[str, Scheme], t: TNode, env_vars: Optional[set] = None) -> Scheme:
    if env_vars is None:
        env_vars = free_type_vars(env)
    gen = frozenset(v for v in reachable_vars([t]) if v not in env_vars and not v.rigid)
    return Scheme(gen, t)


def close_over(t: TNode) -> Scheme:
    """Quantify every variable, rigid or not."""
    return Scheme(frozenset(reachable_vars([t])), t)


# ------------------------------------------------------------------ comparison


def scheme_equal_alpha(s1: Scheme, s2: Scheme) -> bool:
    """Equality up to renaming, row order and unfolding of recursive types.

    Free (non-quantified) variables are compared by identity; quantified
    ones through a bijection that must also preserve kinds.
    """
    fwd: dict[int, TNode] = {}
    bwd: dict[int, TNode] = {}
    seen: set[tuple[int, int]] = set()
    stack = [(s1.body, s2.body)]
    while stack:
        a, b = stack.pop()
        a, b = find(a), find(b)
        if (a.id, b.id) in seen:
            continue
        seen.add((a.id, b.id))
        if a.tag != b.tag:
            return False
        if a.tag == VAR:
            ga, gb = a in s1.generics, b in s2.generics
            if ga != gb:
                return False
            if not ga:
                if a is not b:
                    return False
                continue
            if a.kind != b.kind:
                return False
            if fwd.setdefault(a.id, b) is not b or bwd.setdefault(b.id, a) is not a:
                return False
            continue
        if a.tag in (RECORD, VARIANT):
            fa, ta = flatten_row(a.children[0])
            fb, tb = flatten_row(b.children[0])
            da, db = dict(fa), dict(fb)
            if da.keys() != db.keys() or ta.tag != tb.tag:
                return False
            stack.extend((da[l], db[l]) for l in da)
            stack.append((ta, tb))
            continue
        if a.tag == ARROW:
            stack.extend(zip(a.children, b.children))
            continue
        if a.tag == ROWEMPTY:
            continue
        return False
    return True


def is_instance(specific: Scheme, general: Scheme) -> bool:
    """Whether ``specific`` is obtained from ``general`` by instantiation."""

    def skolem(v: TNode) -> Optional[TNode]:
        if v in specific.generics:
            return tvar(v.kind, rigid=True, hint=v.hint)
        return None

    target = copy_graph(specific.body, skolem)
    try:
        Unifier(describe).unify(instantiate(general), target)
    except TypeError_:
        return False
    return True


def schemes_equivalent(s1: Scheme, s2: Scheme) -> bool:
    return scheme_equal_alpha(s1, s2) or (is_instance(s1, s2) and is_instance(s2, s1))


# ------------------------------------------------------------------ aliases


class AliasEnv:
    """Type aliases, expanded structurally before kinding."""

    def __init__(self, decls: Iterable[TypeDecl] = ()):
        self.decls: dict[str, TypeDecl] = {}
        self._ids = itertools.count(1)
        for d in decls:
            self.add(d)

    def add(self, decl: TypeDecl) -> None:
        self.decls[decl.name] = decl

    def check(self, decl: TypeDecl) -> None:
        """Kind-check a declaration in isolation."""
        try:
            kinds: dict[str, Kind] = {}
            body = self.expand(TAlias(decl.name, tuple(TVar(p) for p in decl.params)), kinds)
            env = annotation_kinds(body, kinds)
            for p in decl.params:
                env.setdefault(p, TYPE)
            kind_of(env, body)
        except ElevateError as err:
            raise err.with_span(decl.span)

    def expand(self, t: Type, kinds: dict, stack: tuple = ()) -> Type:
        if isinstance(t, TVar):
            return t
        if isinstance(t, TArrow):
            return TArrow(self.expand(t.param, kinds, stack), self.expand(t.result, kinds, stack))
        if isinstance(t, (TRecord, TVariant)):
            return type(t)(self._expand_row(t.row, kinds, stack))
        if isinstance(t, TRec):
            return TRec(t.var, self.expand(t.body, kinds, stack))
        if isinstance(t, TAlias):
            return self._expand_alias(t, kinds, stack)
        raise KindError(f"not a type: {t!r}")

    def _expand_row(self, row: Row, kinds, stack) -> Row:
        fields = tuple((l, self.expand(ft, kinds, stack)) for l, ft in row.fields)
        return Row(fields, row.tail, row.fresh)

    def _expand_alias(self, t: TAlias, kinds, stack) -> Type:
        decl = self.decls.get(t.name)
        if decl is None:
            raise KindError(f"unknown type `{t.name}`")
        if t.name in stack:
            chain = " -> ".join(stack + (t.name,))
            raise KindError(f"cyclic type alias: {chain}")
        if len(t.args) > len(decl.params):
            raise KindError(
                f"type `{t.name}` takes {len(decl.params)} argument(s), given {len(t.args)}"
            )
        n = next(self._ids)
        args = [self.expand(a, kinds, stack) for a in t.args]
        mapping: dict[str, Type] = {}
        for i, p in enumerate(decl.params):
            mapping[p] = args[i] if i < len(args) else TVar(f"{p}#{n}")
        decl_kinds = dict(decl.kinds)
        for name in _type_names(decl.body):
            if name not in mapping:
                mapping[name] = TVar(f"{name}#{n}")
        for name, k in decl_kinds.items():
            target = mapping.get(name)
            if isinstance(target, TVar):
                kinds[target.name] = k
            elif target is not None:
                raise KindError(f"parameter `{name}` of `{t.name}` is a row and cannot take a type")
        body = _rename_type(decl.body, mapping, t.name)
        return self.expand(body, kinds, stack + (t.name,))


def _type_names(t: Type) -> set[str]:
    if isinstance(t, TVar):
        return {t.name}
    if isinstance(t, TArrow):
        return _type_names(t.param) | _type_names(t.result)
    if isinstance(t, (TRecord, TVariant)):
        out = {t.row.tail} if t.row.tail else set()
        for _, ft in t.row.fields:
            out |= _type_names(ft)
        return out
    if isinstance(t, TRec):
        return {t.var} | _type_names(t.body)
    if isinstance(t, TAlias):
        out = set()
        for a in t.args:
            out |= _type_names(a)
        return out
    return set()


def _rename_type(t: Type, mapping: dict[str, Type], alias: str) -> Type:
    if isinstance(t, TVar):
        return mapping.get(t.name, t)
    if isinstance(t, TArrow):
        return TArrow(_rename_type(t.param, mapping, alias), _rename_type(t.result, mapping, alias))
    if isinstance(t, (TRecord, TVariant)):
        tail = t.row.tail
        if tail is not None:
            target = mapping.get(tail, TVar(tail))
            if not isinstance(target, TVar):
                raise KindError(f"parameter `{tail}` of `{alias}` is used as a row tail")
            tail = target.name
        fields = tuple((l, _rename_type(ft, mapping, alias)) for l, ft in t.row.fields)
        return type(t)(Row(fields, tail, t.row.fresh))
    if isinstance(t, TRec):
        binder = mapping[t.var]
        return TRec(binder.name, _rename_type(t.body, mapping, alias))
    if isinstance(t, TAlias):
        return TAlias(t.name, tuple(_rename_type(a, mapping, alias) for a in t.args))
    return t


def annotation_kinds(t: Type, explicit: Mapping[str, Kind]) -> dict[str, Kind]:
    """Kinding environment for an expanded annotation.

    Row variables without an explicit kind default to excluding every
    label that precedes them in the rows where they appear.
    """
    env: dict[str, Kind] = {}
    row_labels: dict[str, set] = {}
    bound: set[str] = set()

    def walk(t: Type) -> None:
        if isinstance(t, TVar):
            env.setdefault(t.name, TYPE)
        elif isinstance(t, TArrow):
            walk(t.param)
            walk(t.result)
        elif isinstance(t, (TRecord, TVariant)):
            for _, ft in t.row.fields:
                walk(ft)
            if t.row.tail is not None:
                row_labels.setdefault(t.row.tail, set()).update(t.row.labels())
        elif isinstance(t, TRec):
            bound.add(t.var)
            walk(t.body)

    walk(t)
    for name, labels in row_labels.items():
        if env.get(name) is TYPE:
            raise KindError(f"`{name}` is used both as a type and as a row")
        env[name] = explicit.get(name, RowKind(frozenset(labels), True))
    for name, k in explicit.items():
        if name in env and isinstance(k, RowKind) and env[name] is TYPE:
            raise KindError(f"`{name}` has a row kind but is used as a type")
    for name in bound:
        env.pop(name, None)
    return env


def build_type(t: Type, env: Mapping[str, Kind], rigid: bool, names: Optional[dict] = None) -> TNode:
    """Turn kinded syntax into a graph; free variables are created on demand."""
    names = {} if names is None else names

    def var(name: str) -> TNode:
        if name not in names:
            names[name] = tvar(env.get(name, TYPE), rigid=rigid, hint=name.split("#")[0])
        return names[name]

    def go(t: Type, local: dict) -> TNode:
        if isinstance(t, TVar):
            return local.get(t.name) or var(t.name)
        if isinstance(t, TArrow):
            return arrow(go(t.param, local), go(t.result, local))
        if isinstance(t, (TRecord, TVariant)):
            row = t.row
            if row.tail is not None:
                tail = var(row.tail)
            elif row.fresh:
                tail = rowvar(RowKind(frozenset(row.labels()), True), rigid=rigid)
            else:
                tail = row_empty()
            node = row_of([(l, go(ft, local)) for l, ft in row.fields], tail)
            return record(node) if isinstance(t, TRecord) else variant(node)
        if isinstance(t, TRec):
            hole = tvar()
            inner = dict(local)
            inner[t.var] = hole
            body = go(t.body, inner)
            hole.parent = find(body)
            return body
        raise KindError(f"unresolved type {t!r}")

    return go(t, {})


def scheme_of_type(t: Type, kinds: Mapping[str, Kind] = (), aliases: Optional[AliasEnv] = None) -> Scheme:
    """Closed scheme for a written type (all variables quantified)."""
    aliases = aliases or AliasEnv()
    extra: dict[str, Kind] = dict(kinds)
    expanded = aliases.expand(t, extra)
    env = annotation_kinds(expanded, extra)
    kind_of(env, expanded)
    return close_over(build_type(expanded, env, rigid=False))


# ------------------------------------------------------------------ inference


def count_rhs(e: Term, counts: Optional[Counter] = None) -> Counter:
    """Occurrences of each right-hand-side marker in an elaborated term."""
    counts = Counter() if counts is None else counts

    def visit(sub: Term) -> Term:
        if isinstance(sub, Rhs):
            counts[(sub.key, sub.index)] += 1
        count_rhs(sub, counts)
        return sub

    map_children(e, visit)
    return counts


def outermost_rhs(e: Term) -> list[Rhs]:
    if isinstance(e, Rhs):
        return [e]
    out: list[Rhs] = []

    def visit(sub: Term) -> Term:
        out.extend(outermost_rhs(sub))
        return sub

    map_children(e, visit)
    return out


Env = dict


class Inferencer:
    """One inference session: a store of graphs plus branch bookkeeping."""

    def __init__(self, aliases: Optional[AliasEnv] = None, dead_branches: bool = True):
        self.aliases = aliases or AliasEnv()
        self.dead_branches = dead_branches
        self.unifier = Unifier(describe)
        self.counts: Counter = Counter()
        self.warnings: list[DeadBranch] = []
        self.match_spans: dict[int, tuple] = {}

    # -- helpers

    def unify(self, a: TNode, b: TNode) -> None:
        self.unifier.unify(a, b)

    def audit(self) -> list[str]:
        return self.unifier.audit()

    def prepare(self, e: Term) -> None:
        count_rhs(e, self.counts)

    def annotation(self, ann: Annotation, rigid: bool) -> TNode:
        try:
            kinds: dict[str, Kind] = dict(ann.kinds)
            expanded = self.aliases.expand(ann.type, kinds)
            env = annotation_kinds(expanded, kinds)
            kind_of(env, expanded)
            return build_type(expanded, env, rigid=rigid)
        except ElevateError as err:
            raise err.with_span(ann.span)

    # -- entry points

    def infer_closed(self, e: Term, env: Optional[Env] = None) -> Scheme:
        env = dict(env or {})
        self.prepare(e)
        t = self.infer(env, e)
        return generalize(env, t)

    def infer(self, env: Env, e: Term) -> TNode:
        try:
            return self._infer(env, e, None)
        except ElevateError as err:
            raise err.with_span(getattr(e, "span", None))

    def check(self, env: Env, e: Term, expected: TNode) -> None:
        try:
            self._infer(env, e, expected)
        except ElevateError as err:
            raise err.with_span(getattr(e, "span", None))

    def _result(self, t: TNode, expected: Optional[TNode]) -> TNode:
        if expected is not None:
            self.unify(t, expected)
            return expected
        return t

    def _infer(self, env: Env, e: Term, expected: Optional[TNode]) -> TNode:
        if isinstance(e, Rhs):
            return self._infer(env, e.body, expected)
        if isinstance(e, Var):
            s = env.get(e.name)
            if s is None:
                raise UnboundVariable(f"unbound variable `{e.name}`", e.span)
            return self._result(instantiate(s), expected)
        if isinstance(e, Lam):
            if expected is not None:
                exp = find(expected)
                if exp.tag == ARROW:
                    inner = dict(env)
                    inner[e.param] = Scheme.mono(exp.children[0])
                    self.check(inner, e.body, exp.children[1])
                    return expected
            a = tvar()
            inner = dict(env)
            inner[e.param] = Scheme.mono(a)
            return self._result(arrow(a, self.infer(inner, e.body)), expected)
        if isinstance(e, App):
            tf = self.infer(env, e.fn)
            ta = self.infer(env, e.arg)
            res = expected if expected is not None else tvar()
            self.unify(tf, arrow(ta, res))
            return res
        if isinstance(e, Let):
            scheme = self.let_scheme(env, e.value, e.annotation)
            inner = dict(env)
            inner[e.name] = scheme
            return self._infer_in(inner, e.body, expected)
        if isinstance(e, Fix):
            a, b = tvar(), tvar()
            f = arrow(a, b)
            return self._result(arrow(arrow(f, f), f), expected)
        if isinstance(e, LabelApp):
            t = self.infer(env, e.arg)
            return self._result(variant(row_cons(e.label, t, rowvar(RowKind.neg(e.label)))), expected)
        if isinstance(e, Record):
            fields = [(l, self.infer(env, v)) for l, v in e.fields]
            return self._result(record(row_of(fields)), expected)
        if isinstance(e, (FieldAccess, FieldDel)):
            t = self.infer(env, e.record)
            a, rest = tvar(), rowvar(RowKind.neg(e.label))
            self.unify(t, record(row_cons(e.label, a, rest)))
            return self._result(a if isinstance(e, FieldAccess) else record(rest), expected)
        if isinstance(e, RecordMod):
            t = self.infer(env, e.record)
            labels = [l for l, _ in e.fields]
            # fields keep their types: the new values must match the old ones
            fields = [(l, self.infer(env, v)) for l, v in e.fields]
            self.unify(t, record(row_of(fields, rowvar(RowKind.neg(*labels)))))
            return self._result(t, expected)
        if isinstance(e, RecordExt):
            t = self.infer(env, e.record)
            labels = [l for l, _ in e.fields]
            rest = rowvar(RowKind.neg(*labels))
            self.unify(t, record(rest))
            fields = [(l, self.infer(env, v)) for l, v in e.fields]
            return self._result(record(row_of(fields, rest)), expected)
        if isinstance(e, Case):
            return self.case(env, e, expected)
        if isinstance(e, UnitMatch):
            self.unify(self.infer(env, e.subject), record(row_empty()))
            return self._infer_in(env, e.body, expected)
        if isinstance(e, VoidMatch):
            self.unify(self.infer(env, e.subject), variant(row_empty()))
            return expected if expected is not None else tvar()
        if isinstance(e, Match):
            raise TypeError_("match expression was not elaborated", e.span)
        raise TypeError_(f"cannot type {e!r}")

    def _infer_in(self, env: Env, e: Term, expected: Optional[TNode]) -> TNode:
        if expected is None:
            return self.infer(env, e)
        self.check(env, e, expected)
        return expected

    def let_scheme(self, env: Env, value: Term, ann: Optional[Annotation]) -> Scheme:
        if ann is None:
            return generalize(env, self.infer(env, value))
        expected = self.annotation(ann, rigid=True)
        self.check(env, value, expected)
        return close_over(self.annotation(ann, rigid=False))

    # -- matches

    def case(self, env: Env, e: Case, expected: Optional[TNode]) -> TNode:
        ts = self.infer(env, e.subject)
        if self.dead_branches:
            reason = self.dead_reason(env, ts, e.label)
            if reason is not None:
                self.drop(e, reason)
                inner = dict(env)
                inner[e.rest] = generalize(env, ts)
                return self._infer_in(inner, e.otherwise, expected)
        payload, rest = tvar(), rowvar(RowKind.neg(e.label))
        self.unify(ts, variant(row_cons(e.label, payload, rest)))
        env_vars = free_type_vars(env)
        if self.dead_branches:
            _, tail = flatten_row(rest)
            if tail.tag == VAR and not tail.rigid and tail not in env_vars:
                self.unify(tail, row_empty())
        then_env = dict(env)
        then_env[e.bound] = generalize(env, payload, env_vars)
        else_env = dict(env)
        else_env[e.rest] = generalize(env, variant(rest), env_vars)
        result = expected if expected is not None else tvar()
        self.check(then_env, e.then, result)
        self.check(else_env, e.otherwise, result)
        return result

    def dead_reason(self, env: Env, ts: TNode, label: str) -> Optional[str]:
        n = find(ts)
        if n.tag != VARIANT:
            return None
        fields, tail = flatten_row(n.children[0])
        if any(l == label for l, _ in fields):
            return None
        if tail.tag == ROWEMPTY:
            return "the subject's variant type has no such case"
        if not tail.kind.admits(label):
            return f"the row kind {tail.kind} excludes it"
        if not tail.rigid and tail not in free_type_vars(env):
            return "the subject's open row is not shared with the context"
        return None

    def drop(self, e: Case, reason: str) -> None:
        markers = outermost_rhs(e.then)
        span = markers[0].span if markers else e.span
        dead = []
        for m in markers:
            key = (m.key, m.index)
            self.counts[key] -= 1
            if self.counts[key] <= 0:
                dead.append(m)
        if dead:
            first = dead[0]
            raise RedundantPatterns([first.index], first.span or span)
        self.warnings.append(DeadBranch(e.label, reason, span))


# ------------------------------------------------------------------ drivers


@dataclass
class DeclResult:
    name: str
    scheme: Optional[Scheme]
    error: Optional[ElevateError] = None
    span: object = None


@dataclass
class ProgramTypes:
    decls: list[DeclResult] = field(default_factory=list)
    main: Optional[Scheme] = None
    main_error: Optional[ElevateError] = None
    errors: list[ElevateError] = field(default_factory=list)
    warnings: list[DeadBranch] = field(default_factory=list)
    # solved rows whose kind escaped the variable they solved; always empty
    audit: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def scheme(self, name: str) -> Optional[Scheme]:
        for d in reversed(self.decls):
            if d.name == name:
                return d.scheme
        return None


def infer_program(program: Program, dead_branches: bool = True, skip: Iterable[int] = ()) -> ProgramTypes:
    """Type every declaration in order; failures bind the name to ``forall a. a``.

    Declarations whose index is in ``skip`` already failed upstream and are
    bound to ``forall a. a`` without being typed.
    """
    skip = set(skip)
    aliases = AliasEnv(d for d in program.decls if isinstance(d, TypeDecl))
    out = ProgramTypes()
    env: Env = {}
    for i, d in enumerate(program.decls):
        if i in skip:
            env[d.name] = close_over(tvar())
            continue
        if isinstance(d, TypeDecl):
            try:
                aliases.check(d)
            except ElevateError as err:
                out.errors.append(err)
            continue
        inf = Inferencer(aliases, dead_branches)
        try:
            inf.prepare(d.value)
            scheme = inf.let_scheme(env, d.value, d.annotation)
            out.decls.append(DeclResult(d.name, scheme, span=d.span))
        except ElevateError as err:
            err.with_span(d.span)
            out.errors.append(err)
            out.decls.append(DeclResult(d.name, None, err, d.span))
            scheme = close_over(tvar())
        out.warnings.extend(inf.warnings)
        out.audit.extend(inf.audit())
        env[d.name] = scheme
    if program.main is not None:
        inf = Inferencer(aliases, dead_branches)
        try:
            out.main = inf.infer_closed(program.main, env)
        except ElevateError as err:
            out.main_error = err
            out.errors.append(err)
        out.warnings.extend(inf.warnings)
        out.audit.extend(inf.audit())
    return out


def infer_term(e: Term, env: Optional[Env] = None, aliases: Optional[AliasEnv] = None, dead_branches: bool = True) -> Scheme:
    return Inferencer(aliases, dead_branches).infer_closed(e, env)
