"""Shared helpers: corpus access, the reference matcher and term generators."""

from __future__ import annotations

import random
import re
from pathlib import Path
from typing import Optional

import elevate
from elevate.diagnostics import ElevateError
from elevate.infer import infer_term
from elevate.syntax import (
    UNIT,
    App,
    Case,
    FieldAccess,
    FieldDel,
    Fix,
    LabelApp,
    Lam,
    Let,
    PLabel,
    PRecord,
    PVar,
    Record,
    RecordExt,
    RecordMod,
    Rhs,
    Term,
    UnitMatch,
    Var,
    VoidMatch,
    free_vars,
    map_children,
    substitute,
    term_size,
)

CORPUS = Path(elevate.__file__).parent / "corpus"

_HEADER = re.compile(r"^--\s*expect-(exit|code|value|warning):\s*(.*?)\s*$")


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.elv"))


def corpus_expectations(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text().splitlines():
        m = _HEADER.match(line)
        if m:
            out[m.group(1)] = m.group(2)
    return out


def canon(e: Term) -> Term:
    """Drop markers and sort record fields, so comparison ignores field order."""
    if isinstance(e, Rhs):
        return canon(e.body)
    if isinstance(e, Record):
        return Record(tuple(sorted((l, canon(v)) for l, v in e.fields)))
    return map_children(e, canon)


# ------------------------------------------------------- reference matcher

ORACLE_LABELS = ("A", "B", "C", "D", "E")


def gen_schema(rng: random.Random, depth: int):
    """A value shape: ("unit",), ("variant", {l: s}) or ("record", {l: s})."""
    if depth == 0 or rng.random() < 0.2:
        return ("unit",)
    kind = rng.choice(("variant", "variant", "record"))
    labels = rng.sample(ORACLE_LABELS, rng.randint(1, 3))
    return (kind, {l: gen_schema(rng, depth - 1) for l in labels})


def gen_value(rng: random.Random, schema) -> Term:
    if schema[0] == "unit":
        return UNIT
    if schema[0] == "variant":
        label = rng.choice(sorted(schema[1]))
        return LabelApp(label, gen_value(rng, schema[1][label]))
    return Record(tuple((l, gen_value(rng, s)) for l, s in sorted(schema[1].items())))


class PatternGen:
    def __init__(self, rng: random.Random, bare_units: bool):
        self.rng = rng
        self.bare_units = bare_units
        self.count = 0

    def var(self) -> PVar:
        self.count += 1
        return PVar(f"v{self.count}")

    def pattern(self, schema, depth: int):
        rng = self.rng
        if depth == 0 or rng.random() < 0.25:
            return self.var()
        if schema[0] == "unit":
            return PRecord(()) if rng.random() < 0.5 else self.var()
        if schema[0] == "variant":
            label = rng.choice(sorted(schema[1]))
            payload = schema[1][label]
            if payload[0] == "unit" and self.bare_units:
                return PLabel(label)
            return PLabel(label, self.pattern(payload, depth - 1))
        labels = sorted(schema[1])
        chosen = rng.sample(labels, rng.randint(0, len(labels)))
        return PRecord(tuple((l, self.pattern(schema[1][l], depth - 1)) for l in chosen))


def oracle_case(rng: random.Random, max_depth: int = 4):
    schema = gen_schema(rng, max_depth)
    bare = rng.random() < 0.5
    branches = []
    for i in range(rng.randint(1, 4)):
        pat = PatternGen(rng, bare).pattern(schema, max_depth)
        names = [v.name for v in _pvars(pat)]
        rhs = LabelApp(f"B{i}", Record(tuple((n.upper(), Var(n)) for n in names)))
        branches.append((pat, rhs))
    return schema, branches, gen_value(rng, schema)


def _pvars(p):
    if isinstance(p, PVar):
        return [p]
    if isinstance(p, PLabel):
        return _pvars(p.arg) if p.arg is not None else []
    return [v for _, s in p.fields for v in _pvars(s)]


def match_pattern(p, v: Term) -> Optional[dict]:
    """Direct matcher over values; ``None`` when the pattern does not match."""
    if isinstance(p, PVar):
        return {p.name: v}
    if isinstance(p, PLabel):
        if not isinstance(v, LabelApp) or v.label != p.label:
            return None
        if p.arg is None:
            return {} if v.arg == UNIT else None
        return match_pattern(p.arg, v.arg)
    if not isinstance(v, Record):
        return None
    env: dict = {}
    fields = dict(v.fields)
    for label, sub in p.fields:
        if label not in fields:
            return None
        got = match_pattern(sub, fields[label])
        if got is None:
            return None
        env.update(got)
    return env


def reference_match(branches, v: Term) -> Optional[Term]:
    for pat, rhs in branches:
        env = match_pattern(pat, v)
        if env is not None:
            return substitute(rhs, env)
    return None


# --------------------------------------------------- well-typed term generator

GEN_LABELS = ("A", "B", "C")


class TermGen:
    """Random closed terms; callers keep only those that type-check."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"x{self.n}"

    def leaf(self, scope) -> Term:
        rng = self.rng
        options = ["unit", "label", "lam"]
        if scope:
            options += ["var", "var"]
        pick = rng.choice(options)
        if pick == "var":
            return Var(rng.choice(scope))
        if pick == "label":
            return LabelApp(rng.choice(GEN_LABELS), UNIT)
        if pick == "lam":
            x = self.fresh()
            return Lam(x, Var(x))
        return UNIT

    def record(self, d: int, scope) -> tuple[Term, list[str]]:
        labels = sorted(self.rng.sample(GEN_LABELS, self.rng.randint(1, 2)))
        return Record(tuple((l, self.term(d - 1, scope)) for l in labels)), labels

    def term(self, d: int, scope) -> Term:
        rng = self.rng
        if d <= 0:
            return self.leaf(scope)
        pick = rng.choice(
            "label record lam app let access del mod ext case unit fix void leaf".split()
        )
        if pick == "label":
            return LabelApp(rng.choice(GEN_LABELS), self.term(d - 1, scope))
        if pick == "record":
            return self.record(d, scope)[0]
        if pick == "lam":
            x = self.fresh()
            return Lam(x, self.term(d - 1, scope + [x]))
        if pick == "app":
            x = self.fresh()
            return App(Lam(x, self.term(d - 1, scope + [x])), self.term(d - 1, scope))
        if pick == "let":
            x = self.fresh()
            return Let(x, self.term(d - 1, scope), self.term(d - 1, scope + [x]))
        if pick in ("access", "del", "mod", "ext"):
            rec, labels = self.record(d, scope)
            label = rng.choice(labels)
            if pick == "access":
                return FieldAccess(rec, label)
            if pick == "del":
                return FieldDel(rec, label)
            if pick == "mod":
                return RecordMod(rec, ((label, self.term(d - 1, scope)),))
            absent = [l for l in GEN_LABELS if l not in labels]
            return RecordExt(rec, ((absent[0], self.term(d - 1, scope)),))
        if pick == "case":
            x, r = self.fresh(), self.fresh()
            subject = LabelApp(rng.choice(GEN_LABELS), self.term(d - 1, scope))
            then = self.term(d - 1, scope + [x])
            other = self.term(d - 1, scope + [r])
            return Case(subject, rng.choice(GEN_LABELS), x, then, r, other)
        if pick == "unit":
            return UnitMatch(UNIT, self.term(d - 1, scope))
        if pick == "fix":
            f, x = self.fresh(), self.fresh()
            body = self.term(d - 1, scope + [x])
            return App(App(Fix(), Lam(f, Lam(x, body))), self.term(d - 1, scope))
        if pick == "void":
            x = self.fresh()
            return Lam(x, VoidMatch(Var(x)))
        return self.leaf(scope)


def well_typed_terms(count: int, seed: int = 7, max_size: int = 30) -> list[Term]:
    rng = random.Random(seed)
    gen = TermGen(rng)
    out: list[Term] = []
    seen = set()
    while len(out) < count:
        t = gen.term(rng.randint(1, 4), [])
        if free_vars(t) or term_size(t) > max_size or repr(t) in seen:
            continue
        try:
            infer_term(t, dead_branches=False)
        except ElevateError:
            continue
        seen.add(repr(t))
        out.append(t)
    return out


# ----------------------------------------------------- cascade comparison


def cascade(e: Term) -> list[tuple[str, str]]:
    """The (subject, pattern) spine of a single-branch elaborated match.

    ``l x`` followed by a unit match on ``x`` reads back as the bare label.
    Remainder branches must all be void matches.
    """
    from elevate.pretty import pretty_term

    steps = []
    while True:
        if isinstance(e, Rhs):
            return steps
        if isinstance(e, Lam):
            e = e.body
        elif isinstance(e, Let):
            steps.append((pretty_term(e.value), e.name))
            e = e.body
        elif isinstance(e, Case):
            assert isinstance(e.otherwise, VoidMatch), "remainder branch is not void"
            assert e.otherwise.subject == Var(e.rest)
            then = e.then
            if isinstance(then, UnitMatch) and then.subject == Var(e.bound):
                steps.append((pretty_term(e.subject), e.label))
                e = then.body
            else:
                steps.append((pretty_term(e.subject), f"{e.label} {e.bound}"))
                e = then
        else:
            raise AssertionError(f"unexpected node in cascade: {type(e).__name__}")


def normalize_fresh(steps: list[tuple[str, str]]) -> list[tuple[str, str]]:
    names: dict[str, str] = {}

    def rename(text: str) -> str:
        def sub(m):
            return names.setdefault(m.group(0), f"#{len(names) + 1}")

        return re.sub(r"#[A-Za-z_][A-Za-z0-9_]*", sub, text)

    return [(rename(s), rename(p)) for s, p in steps]


def parse_cascade_text(text: str, subject: str) -> list[tuple[str, str]]:
    """Read ``PAT => match SUBJ with <`` lines into (subject, pattern) pairs."""
    steps = []
    for line in text.strip().splitlines():
        m = re.match(r"\s*(.+?)\s*=>\s*(?:match\s+(\S+)\s+with\s*<)?", line)
        if not m:
            continue
        steps.append((subject, m.group(1)))
        subject = m.group(2)
    return steps
