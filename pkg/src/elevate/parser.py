"""Lexer and recursive-descent parser for ``.elv`` source text."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .diagnostics import ParseError
from .kinds import RowKind
from .syntax import (
    UNIT,
    Annotation,
    App,
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
    Program,
    Record,
    RecordExt,
    RecordMod,
    Row,
    Span,
    TAlias,
    TArrow,
    TRec,
    TRecord,
    TVar,
    TVariant,
    Type,
    TypeDecl,
    Var,
    normalize_label,
)

KEYWORDS = {"lam", "let", "in", "match", "with", "fix", "type", "forall", "as"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<num>[0-9]+)
  | (?P<ident>\#?[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>=>|->|\.-|\.\+|[=<>{}()|:.,~*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, label, kw, sym, eof
    text: str
    span: Span


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {source[pos]!r}", Span(line, col, line, col)
            )
        text = m.group()
        kind = m.lastgroup
        end_line, end_col = line, col + len(text) - 1
        if kind == "ws":
            pass
        elif kind == "num":
            tokens.append(Token("label", normalize_label(text), Span(line, col, end_line, end_col)))
        elif kind == "ident":
            if text in KEYWORDS:
                tok_kind = "kw"
            elif text[0].isupper():
                tok_kind = "label"
            else:
                tok_kind = "ident"
            tokens.append(Token(tok_kind, text, Span(line, col, end_line, end_col)))
        else:
            tokens.append(Token(kind, text, Span(line, col, end_line, end_col)))
        newlines = text.count("\n") if kind == "ws" else 0
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(m.group())
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, col, line, col)))
    return tokens


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else f"`{tok.text}`"


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        # per-annotation bookkeeping for type variables
        self._kinds: dict[str, RowKind] = {}
        self._row_vars: dict[str, Span] = {}
        self._type_vars: dict[str, Span] = {}

    # ------------------------------------------------------------ plumbing

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"`{text}`")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.error(what)
        return self.advance()

    def error(self, *expected: str):
        exp = ", ".join(expected)
        raise ParseError(
            f"expected {exp}, found {_describe(self.tok)}", self.tok.span, expected
        )

    def prev_span(self) -> Span:
        return self.tokens[max(self.pos - 1, 0)].span

    # ------------------------------------------------------------- program

    def program(self) -> Program:
        decls = []
        main = None
        while self.tok.kind != "eof":
            if self.at("type"):
                decls.append(self.type_decl())
            elif self.at("let"):
                decl, main = self.top_let()
                if main is not None:
                    break
                decls.append(decl)
            else:
                main = self.expr()
                break
        if self.tok.kind != "eof":
            self.error("end of input")
        return Program(tuple(decls), main)

    def type_decl(self) -> TypeDecl:
        start = self.expect("type").span
        name = self.expect_kind("label", "a type name").text
        params = []
        while self.tok.kind == "ident":
            params.append(self.advance().text)
        self.expect("=")
        extra, body, kinds = self.annotation_type()
        params.extend(extra)
        return TypeDecl(name, tuple(params), body, kinds, span=start.to(self.prev_span()))

    def annotation_type(self) -> tuple[list, Type, tuple]:
        """A type with an optional leading ``forall`` and inline kinds."""
        self._kinds, self._row_vars, self._type_vars = {}, {}, {}
        params = []
        if self.at("forall"):
            self.advance()
            while self.tok.kind == "ident":
                params.append(self.advance().text)
            self.expect(".")
        body = self.type_()
        for var, span in self._type_vars.items():
            if var in self._row_vars:
                raise ParseError(
                    f"type variable `{var}` is used both as a type and as a row", span
                )
        kinds = tuple(sorted(self._kinds.items()))
        return params, body, kinds

    def top_let(self):
        start = self.expect("let").span
        name_tok = self.expect_kind("ident", "a variable name")
        annotation = None
        if self.at(":"):
            self.advance()
            ann_start = self.tok.span
            _, t, kinds = self.annotation_type()
            annotation = Annotation(t, kinds, span=ann_start.to(self.prev_span()))
        self.expect("=")
        value = self.expr()
        if self.at("in"):
            self.advance()
            body = self.expr()
            return None, Let(name_tok.text, value, body, annotation, span=start.to(self.prev_span()))
        return LetDecl(name_tok.text, value, annotation, span=start.to(self.prev_span())), None

    # ---------------------------------------------------------------- terms

    def expr(self):
        start = self.tok.span
        if self.at("lam"):
            self.advance()
            param = self.binder()
            self.expect("=")
            body = self.expr()
            return Lam(param, body, span=start.to(self.prev_span()))
        if self.at("let"):
            self.advance()
            name = self.binder()
            annotation = None
            if self.at(":"):
                self.advance()
                ann_start = self.tok.span
                _, t, kinds = self.annotation_type()
                annotation = Annotation(t, kinds, span=ann_start.to(self.prev_span()))
            self.expect("=")
            value = self.expr()
            self.expect("in")
            body = self.expr()
            return Let(name, value, body, annotation, span=start.to(self.prev_span()))
        if self.at("match"):
            return self.match()
        return self.application()

    def binder(self) -> str:
        tok = self.tok
        if tok.kind != "ident":
            self.error("a variable name")
        self.advance()
        return tok.text

    def match(self):
        start = self.expect("match").span
        subject = self.expr()
        self.expect("with")
        self.expect("<")
        branches = []
        spans = []
        if self.at("|"):
            self.advance()
        if not self.at(">"):
            while True:
                b_start = self.tok.span
                pat = self.pattern()
                self.expect("=>")
                rhs = self.expr()
                branches.append((pat, rhs))
                spans.append(b_start.to(self.prev_span()))
                if self.at("|"):
                    self.advance()
                    continue
                break
        self.expect(">")
        return Match(subject, tuple(branches), span=start.to(self.prev_span()), branch_spans=tuple(spans))

    def starts_atom(self) -> bool:
        tok = self.tok
        if tok.kind in ("ident", "label"):
            return True
        return tok.kind in ("sym", "kw") and tok.text in ("(", "{", "fix")

    def application(self):
        start = self.tok.span
        if not self.starts_atom():
            self.error("an expression")
        fn = self.unary()
        while self.starts_atom():
            arg = self.unary()
            fn = App(fn, arg, span=start.to(self.prev_span()))
        return fn

    def unary(self):
        if self.tok.kind == "label":
            tok = self.advance()
            if self.tok.kind == "label":
                arg = self.unary()
            elif self.starts_atom():
                arg = self.postfix()
            else:
                return LabelApp(tok.text, UNIT, span=tok.span)
            return LabelApp(tok.text, arg, span=tok.span.to(self.prev_span()))
        return self.postfix()

    def postfix(self):
        start = self.tok.span
        e = self.atom()
        while True:
            if self.at("."):
                self.advance()
                if self.at("{"):
                    fields = self.record_fields()
                    e = RecordMod(e, fields, span=start.to(self.prev_span()))
                else:
                    lab = self.expect_kind("label", "a field label").text
                    e = FieldAccess(e, lab, span=start.to(self.prev_span()))
            elif self.at(".-"):
                self.advance()
                lab = self.expect_kind("label", "a field label").text
                e = FieldDel(e, lab, span=start.to(self.prev_span()))
            elif self.at(".+"):
                self.advance()
                fields = self.record_fields()
                e = RecordExt(e, fields, span=start.to(self.prev_span()))
            else:
                return e

    def atom(self):
        tok = self.tok
        if tok.kind == "ident":
            self.advance()
            if tok.text == "_":
                raise ParseError("`_` cannot be used as an expression", tok.span)
            return Var(tok.text, span=tok.span)
        if self.at("fix"):
            self.advance()
            return Fix(span=tok.span)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("{"):
            fields = self.record_fields()
            return Record(fields, span=tok.span.to(self.prev_span()))
        if tok.kind == "label":
            return self.unary()
        self.error("an expression")

    def record_fields(self) -> tuple:
        self.expect("{")
        fields = []
        seen: dict[str, Span] = {}
        if not self.at("}"):
            while True:
                lab_tok = self.expect_kind("label", "a field label")
                if lab_tok.text in seen:
                    raise ParseError(f"duplicate label {lab_tok.text} in record", lab_tok.span)
                seen[lab_tok.text] = lab_tok.span
                self.expect(":")
                fields.append((lab_tok.text, self.expr()))
                if self.at("|") or self.at(","):
                    self.advance()
                    continue
                break
        self.expect("}")
        return tuple(fields)

    # ------------------------------------------------------------- patterns

    def pattern(self):
        tok = self.tok
        if tok.kind == "ident":
            self.advance()
            return PVar(tok.text, span=tok.span)
        if tok.kind == "label":
            self.advance()
            nxt = self.tok
            if nxt.kind in ("ident", "label") or self.at("{") or self.at("("):
                arg = self.pattern()
                return PLabel(tok.text, arg, span=tok.span.to(self.prev_span()))
            return PLabel(tok.text, None, span=tok.span)
        if self.at("("):
            self.advance()
            p = self.pattern()
            self.expect(")")
            return p
        if self.at("{"):
            self.advance()
            fields = []
            seen = set()
            if not self.at("}"):
                while True:
                    lab_tok = self.expect_kind("label", "a field label")
                    if lab_tok.text in seen:
                        raise ParseError(f"duplicate label {lab_tok.text} in record pattern", lab_tok.span)
                    seen.add(lab_tok.text)
                    self.expect(":")
                    fields.append((lab_tok.text, self.pattern()))
                    if self.at("|") or self.at(","):
                        self.advance()
                        continue
                    break
            self.expect("}")
            return PRecord(tuple(fields), span=tok.span.to(self.prev_span()))
        self.error("a pattern")

    # ---------------------------------------------------------------- types

    def type_(self) -> Type:
        if self.tok.kind == "ident" and self.peek().kind == "kw" and self.peek().text == "as":
            var_tok = self.advance()
            self.advance()
            body = self.type_()
            return TRec(var_tok.text, body)
        lhs = self.type_app()
        if self.at("->"):
            self.advance()
            return TArrow(lhs, self.type_())
        return lhs

    def starts_atype(self) -> bool:
        return self.tok.kind in ("ident", "label") or self.at("(") or self.at("{") or self.at("<")

    def type_app(self) -> Type:
        if self.tok.kind == "label":
            name = self.advance().text
            args = []
            while self.starts_atype():
                args.append(self.atype())
            return TAlias(name, tuple(args))
        return self.atype()

    def atype(self) -> Type:
        tok = self.tok
        if tok.kind == "ident":
            self.advance()
            self._type_vars.setdefault(tok.text, tok.span)
            return TVar(tok.text)
        if tok.kind == "label":
            self.advance()
            return TAlias(tok.text, ())
        if self.at("("):
            self.advance()
            t = self.type_()
            self.expect(")")
            return t
        if self.at("{"):
            self.advance()
            row = self.row("}")
            return TRecord(row)
        if self.at("<"):
            self.advance()
            row = self.row(">")
            return TVariant(row)
        self.error("a type")

    def row(self, close: str) -> Row:
        fields = []
        seen = set()
        tail: Optional[str] = None
        fresh = False
        if self.at("|") and self.peek().text == close:
            # `< | >`: no fields, implicit tail
            self.advance()
            self.expect(close)
            return Row((), None, True)
        while True:
            if self.at(close):
                fresh = bool(fields)
                break
            if self.at("*"):
                self.advance()
                break
            if self.tok.kind == "ident":
                tail_tok = self.advance()
                tail = tail_tok.text
                self._row_vars.setdefault(tail, tail_tok.span)
                if self.at(":"):
                    self.advance()
                    kind = self.row_kind()
                    old = self._kinds.get(tail)
                    if old is not None and old != kind:
                        raise ParseError(f"conflicting kinds for row variable `{tail}`", tail_tok.span)
                    self._kinds[tail] = kind
                break
            lab_tok = self.expect_kind("label", "a row label")
            if lab_tok.text in seen:
                raise ParseError(f"duplicate label {lab_tok.text} in row", lab_tok.span)
            seen.add(lab_tok.text)
            self.expect(":")
            fields.append((lab_tok.text, self.type_()))
            if self.at("|"):
                self.advance()
                continue
            break
        self.expect(close)
        return Row(tuple(fields), tail, fresh)

    def row_kind(self) -> RowKind:
        negative = False
        if self.at("~"):
            self.advance()
            negative = True
        self.expect("{")
        labels = []
        if not self.at("}"):
            while True:
                labels.append(self.expect_kind("label", "a label").text)
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect("}")
        return RowKind(frozenset(labels), negative)


def parse(source: str) -> Program:
    return Parser(source).program()


def parse_term(source: str):
    p = Parser(source)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error("end of input")
    return e


def parse_type(source: str) -> tuple[Type, dict]:
    """Parse a standalone type; returns the type and its inline row kinds."""
    p = Parser(source)
    _, t, kinds = p.annotation_type()
    if p.tok.kind != "eof":
        p.error("end of input")
    return t, dict(kinds)
