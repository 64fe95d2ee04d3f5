"""Pattern elaboration: compile complex patterns into simple-pattern matches.

The pipeline per match expression is::

    desugar(refine(id, foldl1(merge, [sort(pat_expn(i, ...)) for each branch])))

Every right-hand side is a leaf tagged with its branch index; a ledger
counts how many copies of each leaf survive merging.  Branches whose count
drops to zero are reported as redundant.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .diagnostics import NonLinearPattern, RedundantPatterns
from .syntax import (
    UNIT,
    App,
    Case,
    FieldAccess,
    LabelApp,
    Lam,
    Let,
    LetDecl,
    Match,
    Pattern,
    PLabel,
    PRecord,
    PVar,
    Program,
    RecordExt,
    RecordMod,
    Rhs,
    Span,
    Term,
    UnitMatch,
    Var,
    VoidMatch,
    FieldDel,
    free_vars,
    map_children,
    pattern_vars,
    rename_pattern,
    substitute,
)

MatchId = tuple[int, ...]


@dataclass(frozen=True)
class FieldAccessForm:
    """One of ``x``, ``x.l``, ``x.{}`` or ``x.l.{}``."""

    root: str
    label: Optional[str] = None
    unit: bool = False

    def to_term(self) -> Term:
        t: Term = Var(self.root)
        if self.label is not None:
            t = FieldAccess(t, self.label)
        if self.unit:
            t = RecordMod(t, ())
        return t

    def with_unit(self) -> "FieldAccessForm":
        return FieldAccessForm(self.root, self.label, True)

    def rename(self, mapping: dict[str, str]) -> "FieldAccessForm":
        return FieldAccessForm(mapping.get(self.root, self.root), self.label, self.unit)

    def __str__(self) -> str:
        text = self.root
        if self.label is not None:
            text += f".{self.label}"
        if self.unit:
            text += ".{}"
        return text


# Simple patterns reuse the surface classes: PVar(x), PLabel(l), PLabel(l, PVar(x)).


def is_simple(p: Pattern) -> bool:
    if isinstance(p, PVar):
        return True
    return isinstance(p, PLabel) and (p.arg is None or isinstance(p.arg, PVar))


@dataclass
class Leaf:
    term: Term
    rhs: int  # branch index within the source match


@dataclass
class Node:
    mid: MatchId
    subject: FieldAccessForm
    branches: list = field(default_factory=list)  # [(simple pattern, chain)]

    def var_branch(self) -> Optional[PVar]:
        if self.branches and isinstance(self.branches[-1][0], PVar):
            return self.branches[-1][0]
        return None


MatchChain = Union[Leaf, Node]


def leaves(c: MatchChain) -> Iterator[Leaf]:
    if isinstance(c, Leaf):
        yield c
        return
    for _, sub in c.branches:
        yield from leaves(sub)


class RhsLedger:
    """Occurrence counts of right-hand sides, keyed by branch index."""

    def __init__(self, n: int = 0):
        self.counts: Counter = Counter({i: 1 for i in range(n)})
        self.events: list[tuple[str, int, int]] = []

    def duplicate(self, chain: MatchChain, times: int) -> None:
        if times <= 0:
            return
        for leaf in leaves(chain):
            self.counts[leaf.rhs] += times
            self.events.append(("dup", leaf.rhs, times))

    def remove(self, chain: MatchChain) -> None:
        for leaf in leaves(chain):
            self.counts[leaf.rhs] -= 1
            self.events.append(("del", leaf.rhs, 1))

    def dead(self) -> list[int]:
        return sorted(i for i, n in self.counts.items() if n <= 0)


# ----------------------------------------------------------------- linearity


def linearity_check(p: Pattern) -> None:
    seen: dict[str, Optional[Span]] = {}
    for v in pattern_vars(p):
        if v.name == "_":
            continue
        if v.name in seen:
            raise NonLinearPattern(v.name, seen[v.name], v.span)
        seen[v.name] = v.span


# ---------------------------------------------------------------- expansion


class Fresh:
    def __init__(self):
        self._counters: dict[str, itertools.count] = {}

    def __call__(self, base: str) -> str:
        counter = self._counters.setdefault(base, itertools.count(1))
        return f"#{base}{next(counter)}"


def _pattern_term(p: Pattern) -> Term:
    if isinstance(p, PVar):
        return Var(p.name)
    if p.arg is None:
        return LabelApp(p.label, UNIT)
    return LabelApp(p.label, Var(p.arg.name))


def pat_expn(rhs, mid: MatchId, u: Optional[str], subject: FieldAccessForm, pattern: Pattern, fresh: Fresh) -> MatchChain:
    """Expand one branch into a single-path match chain.

    ``rhs`` is either a :class:`Leaf` or a placeholder leaf to be replaced
    later; ``u`` is the variable whose record fields are being visited.
    """
    if isinstance(pattern, PVar):
        return Node(mid, subject, [(pattern, rhs)])
    if isinstance(pattern, PLabel):
        if pattern.arg is None or isinstance(pattern.arg, PVar):
            return Node(mid, subject, [(pattern, rhs)])
        x = fresh("x")
        inner = pat_expn(rhs, mid + (0,), x, FieldAccessForm(x), pattern.arg, fresh)
        return Node(mid, subject, [(PLabel(pattern.label, PVar(x)), inner)])
    assert isinstance(pattern, PRecord)
    if not pattern.fields:
        return Node(mid, subject.with_unit(), [(PVar(fresh("x")), rhs)])
    plain = subject.label is None and not subject.unit and subject.root == u
    if plain:
        (label, first), rest = pattern.fields[0], pattern.fields[1:]
        access = FieldAccessForm(subject.root, label)
        if not rest:
            return pat_expn(rhs, mid, u, access, first, fresh)
        placeholder = Leaf(Var(fresh("v")), -1)
        head = pat_expn(placeholder, mid, u, access, first, fresh)
        nxt = mid[:-1] + (mid[-1] + 1,)
        tail = pat_expn(rhs, nxt, u, subject, PRecord(rest), fresh)
        return _replace_leaf(head, placeholder, tail)
    x = fresh("x")
    inner = pat_expn(rhs, mid + (0,), x, FieldAccessForm(x), pattern, fresh)
    return Node(mid, subject.with_unit(), [(PVar(x), inner)])


def _replace_leaf(c: MatchChain, target: Leaf, new: MatchChain) -> MatchChain:
    if c is target:
        return new
    if isinstance(c, Leaf):
        return c
    return Node(c.mid, c.subject, [(p, _replace_leaf(s, target, new)) for p, s in c.branches])


# -------------------------------------------------------------------- sorting


def _spine(c: MatchChain) -> tuple[list[Node], Optional[Leaf]]:
    nodes = []
    while isinstance(c, Node):
        if len(c.branches) != 1:
            return nodes + [c], None
        nodes.append(c)
        c = c.branches[0][1]
    return nodes, c


def sort(c: MatchChain) -> MatchChain:
    """Defer irrefutable variable bindings past the label tests.

    A variable node moves to the end of the chain when no later node
    inspects the variable it binds.  The relative order inside each group
    is preserved, so the result is deterministic.
    """
    nodes, leaf = _spine(c)
    if leaf is None or len(nodes) < 2:
        return c
    tests, deferred = [], []
    for i, node in enumerate(nodes):
        pat = node.branches[0][0]
        if isinstance(pat, PVar) and all(n.subject.root != pat.name for n in nodes[i + 1 :]):
            deferred.append(node)
        else:
            tests.append(node)
    chain: MatchChain = leaf
    for node in reversed(tests + deferred):
        chain = Node(node.mid, node.subject, [(node.branches[0][0], chain)])
    return chain


# -------------------------------------------------------------------- merging


def subst_chain(c: MatchChain, var: str, pat: Pattern) -> MatchChain:
    """``c[var ↦ pat]``: leaves get the pattern as a term, subjects a rename."""
    term = _pattern_term(pat)
    rename = {var: pat.name} if isinstance(pat, PVar) else {}
    return _subst_chain(c, var, term, rename)


def _subst_chain(c, var, term, rename):
    if isinstance(c, Leaf):
        return Leaf(substitute(c.term, {var: term}), c.rhs)
    branches = []
    for p, sub in c.branches:
        if var in _binds(p):
            branches.append((p, sub))
        else:
            branches.append((p, _subst_chain(sub, var, term, rename)))
    return Node(c.mid, c.subject.rename(rename), branches)


def _binds(p: Pattern) -> set[str]:
    return {v.name for v in pattern_vars(p)}


class Merger:
    def __init__(self, ledger: RhsLedger, fresh: Fresh):
        self.ledger = ledger
        self.fresh = fresh

    def merge(self, a: MatchChain, b: MatchChain) -> MatchChain:
        if isinstance(a, Leaf):
            self.ledger.remove(b)
            return a
        if isinstance(b, Leaf) or len(a.mid) != len(b.mid) or a.subject != b.subject:
            wrapped = Node(a.mid, a.subject, [(PVar(self.fresh("x")), b)])
            return self.merge(a, wrapped)
        assert len(b.branches) == 1, "merge expects a single-branch chain on the right"
        pb, cb = b.branches[0]
        xa = a.var_branch()
        fixed = a.branches[:-1] if xa is not None else a.branches
        if isinstance(pb, PVar):
            out = []
            for pi, ci in fixed:
                out.append((pi, self.merge(ci, subst_chain(cb, pb.name, pi))))
            if xa is not None:
                ca = a.branches[-1][1]
                out.append((xa, self.merge(ca, subst_chain(cb, pb.name, xa))))
                self.ledger.duplicate(cb, len(fixed))
            else:
                out.append((pb, cb))
                self.ledger.duplicate(cb, len(fixed))
            return Node(a.mid, b.subject, out)
        for i, (pi, ci) in enumerate(fixed):
            if isinstance(pi, PLabel) and pi.label == pb.label and (pi.arg is None) == (pb.arg is None):
                if pb.arg is None:
                    merged = self.merge(ci, cb)
                else:
                    merged = self.merge(ci, subst_chain(cb, pb.arg.name, pi.arg))
                out = list(a.branches)
                out[i] = (pi, merged)
                return Node(a.mid, b.subject, out)
        if xa is not None:
            ca = a.branches[-1][1]
            pushed = Node(b.mid, FieldAccessForm(xa.name), [(pb, cb)])
            return Node(a.mid, a.subject, fixed + [(xa, self.merge(ca, pushed))])
        return Node(a.mid, b.subject, a.branches + [(pb, cb)])


def merge(a: MatchChain, b: MatchChain, ledger: Optional[RhsLedger] = None, fresh: Optional[Fresh] = None) -> MatchChain:
    return Merger(ledger or RhsLedger(), fresh or Fresh()).merge(a, b)


# ------------------------------------------------------------------- refining


def refine(subst: list, c: MatchChain) -> MatchChain:
    """Push what each branch learned about its subject into the leaves.

    ``subst`` is a list of single-variable substitutions applied in order,
    outermost first.
    """
    if isinstance(c, Leaf):
        term = c.term
        for var, replacement in subst:
            if var != replacement:
                term = substitute(term, {var: replacement})
        return Leaf(term, c.rhs)
    branches = []
    for p, sub in c.branches:
        known = _pattern_term(p)
        if c.subject.label is not None:
            root = Var(c.subject.root)
            known = RecordExt(FieldDel(root, c.subject.label), ((c.subject.label, known),))
        step = (c.subject.root, known)
        branches.append((p, refine(subst + [step], sub)))
    return Node(c.mid, c.subject, branches)


# ------------------------------------------------------------------ desugaring


def desugar(c: MatchChain, key: int, fresh: Fresh, spans=()) -> Term:
    if isinstance(c, Leaf):
        span = spans[c.rhs] if c.rhs < len(spans) else None
        return Rhs(c.term, key, c.rhs, span=span)
    subject = c.subject.to_term()
    if not c.branches:
        return VoidMatch(subject)
    (p, sub), rest = c.branches[0], c.branches[1:]
    if isinstance(p, PVar):
        return Let(p.name, subject, desugar(sub, key, fresh, spans))
    r = fresh("r")
    remainder = desugar(Node(c.mid, FieldAccessForm(r), rest), key, fresh, spans)
    if p.arg is None:
        x = fresh("x")
        then = UnitMatch(Var(x), desugar(sub, key, fresh, spans))
        return Case(subject, p.label, x, then, r, remainder)
    return Case(subject, p.label, p.arg.name, desugar(sub, key, fresh, spans), r, remainder)


# ----------------------------------------------------------------- the driver


@dataclass
class ElaboratedMatch:
    chain: MatchChain
    term: Term
    ledger: RhsLedger


def _prepare_branches(subject: str, branches) -> list[tuple[Pattern, Term]]:
    """Rename wildcards, and pattern variables that would clash across branches."""
    for pat, _ in branches:
        linearity_check(pat)
    prepared = []
    for i, (pat, rhs) in enumerate(branches):
        others: set[str] = {subject}
        for j, (p2, r2) in enumerate(branches):
            if j != i:
                others |= _binds(p2) | free_vars(r2)
        renames = {}
        for v in pattern_vars(pat):
            if v.name == "_":
                continue
            if v.name in others:
                renames[v.name] = f"#{v.name}_{i}"
        wild = itertools.count()

        def unwild(p):
            if isinstance(p, PVar):
                if p.name == "_":
                    return PVar(f"#_{i}_{next(wild)}", span=p.span)
                return PVar(renames.get(p.name, p.name), span=p.span)
            if isinstance(p, PLabel):
                return PLabel(p.label, None if p.arg is None else unwild(p.arg), span=p.span)
            return PRecord(tuple((l, unwild(s)) for l, s in p.fields), span=p.span)

        pat = unwild(pat)
        if renames:
            rhs = substitute(rhs, {old: Var(new) for old, new in renames.items()})
        prepared.append((pat, rhs))
    return prepared


def pat_elab(subject: str, branches, key: int = 0, fresh: Optional[Fresh] = None, spans=(), span=None) -> ElaboratedMatch:
    fresh = fresh or Fresh()
    branches = _prepare_branches(subject, branches)
    ledger = RhsLedger(len(branches))
    root = FieldAccessForm(subject)
    chains = [
        sort(pat_expn(Leaf(rhs, i), (0,), None, root, pat, fresh))
        for i, (pat, rhs) in enumerate(branches)
    ]
    if not chains:
        merged: MatchChain = Node((0,), root, [])
    else:
        merger = Merger(ledger, fresh)
        merged = chains[0]
        for nxt in chains[1:]:
            merged = merger.merge(merged, nxt)
    dead = ledger.dead()
    if dead:
        raise RedundantPatterns(
            dead,
            spans[dead[0]] if dead[0] < len(spans) else span,
            [spans[i] for i in dead if i < len(spans)],
        )
    refined = refine([], merged)
    return ElaboratedMatch(refined, desugar(refined, key, fresh, spans), ledger)


class Elaborator:
    """Elaborates whole terms bottom-up, right-hand sides first."""

    def __init__(self):
        self.fresh = Fresh()
        self.keys = itertools.count()
        self.matches: dict[int, ElaboratedMatch] = {}
        self.match_spans: dict[int, tuple] = {}

    def term(self, e: Term) -> Term:
        if isinstance(e, Match):
            subject = self.term(e.subject)
            branches = [(p, self.term(r)) for p, r in e.branches]
            key = next(self.keys)
            if isinstance(subject, Var):
                name, wrap = subject.name, None
            else:
                name, wrap = self.fresh("s"), subject
            spans = tuple(e.branch_spans)
            result = pat_elab(name, branches, key, self.fresh, spans, e.span)
            self.matches[key] = result
            self.match_spans[key] = spans
            out = result.term
            if wrap is not None:
                out = Let(name, wrap, out, span=e.span)
            return out
        return map_children(e, self.term)

    def program(self, p: Program) -> Program:
        decls = []
        for d in p.decls:
            if isinstance(d, LetDecl):
                decls.append(LetDecl(d.name, self.term(d.value), d.annotation, span=d.span))
            else:
                decls.append(d)
        main = self.term(p.main) if p.main is not None else None
        return Program(tuple(decls), main)


def elaborate_term(e: Term) -> Term:
    return Elaborator().term(e)


def elaborate_program(p: Program) -> Program:
    return Elaborator().program(p)


def is_core(e: Term) -> bool:
    """True when no surface match remains."""
    if isinstance(e, Match):
        return False
    ok = [True]

    def visit(sub):
        if not is_core(sub):
            ok[0] = False
        return sub

    map_children(e, visit)
    return ok[0]


def chain_str(c: MatchChain, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(c, Leaf):
        from .pretty import pretty_term

        return f"{pad}[{c.rhs}] {pretty_term(c.term)}"
    lines = [f"{pad}match{list(c.mid)} {c.subject} with"]
    for p, sub in c.branches:
        from .pretty import pretty_pattern

        lines.append(f"{pad}  {pretty_pattern(p)} =>")
        lines.append(chain_str(sub, indent + 2))
    return "\n".join(lines)
