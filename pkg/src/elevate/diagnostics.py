"""Error classes and the diagnostic record printed by the CLI."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from .syntax import Span


class ElevateError(Exception):
    code = "E-INTERNAL"

    def __init__(self, message: str, span: Optional[Span] = None, notes=()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.notes = list(notes)

    def with_span(self, span: Optional[Span]) -> "ElevateError":
        if self.span is None:
            self.span = span
        return self


class ParseError(ElevateError):
    code = "E-PARSE"

    def __init__(self, message: str, span: Optional[Span] = None, expected=()):
        super().__init__(message, span)
        self.expected = tuple(expected)


class KindError(ElevateError):
    code = "E-KIND"


class NonLinearPattern(ElevateError):
    code = "E-NONLINEAR"

    def __init__(self, name: str, first: Optional[Span], second: Optional[Span]):
        super().__init__(f"variable `{name}` occurs more than once in a pattern", second)
        self.name = name
        self.first = first
        if first is not None:
            self.notes.append(f"first occurrence at {first}")


class RedundantPatterns(ElevateError):
    code = "E-REDUNDANT"

    def __init__(self, branches, span: Optional[Span] = None, branch_spans=()):
        idx = ", ".join(str(b + 1) for b in branches)
        super().__init__(f"redundant patterns: branch {idx} can never be reached", span)
        self.branches = tuple(branches)
        self.branch_spans = tuple(branch_spans)


class TypeError_(ElevateError):
    """Base of unification and inference failures."""

    code = "E-UNIFY"


class ConstructorMismatch(TypeError_):
    pass


class MissingLabel(TypeError_):
    def __init__(self, label: str, row: str = "", span=None):
        super().__init__(f"label {label} is not allowed in row {row}".rstrip(), span)
        self.label = label


class KindViolation(TypeError_):
    def __init__(self, message: str, span=None):
        super().__init__(message, span)


class OccursFreeViolation(TypeError_):
    pass


class UnboundVariable(TypeError_):
    code = "E-UNBOUND"


class DeadBranch(ElevateError):
    code = "E-DEAD-BRANCH"

    def __init__(self, label: str, reason: str, span=None):
        super().__init__(f"branch for label {label} is dead: {reason}", span)
        self.label = label
        self.reason = reason


class FuelExhausted(ElevateError):
    code = "E-FUEL"

    def __init__(self, term, steps: int):
        super().__init__(f"evaluation did not finish within {steps} steps")
        self.term = term


class Stuck(ElevateError):
    code = "E-STUCK"

    def __init__(self, reason: str, term=None, span=None):
        super().__init__(reason, span)
        self.term = term


@dataclass
class Diagnostic:
    severity: str
    code: str
    message: str
    file: str = "<input>"
    span: Optional[Span] = None
    notes: list = field(default_factory=list)

    @classmethod
    def from_error(cls, err: ElevateError, file: str = "<input>", severity: str = "error"):
        return cls(severity, err.code, err.message, file, err.span, list(err.notes))

    def location(self) -> str:
        span = self.span or Span(1, 1, 1, 1)
        return f"{self.file}:{span.line}:{span.col}-{span.end_line}:{span.end_col}"

    def format(self, color: bool = False) -> str:
        code = self.code
        if color:
            tint = "31" if self.severity == "error" else "33"
            code = f"\x1b[1;{tint}m{code}\x1b[0m"
        lines = [f"{code} {self.location()} {self.message}"]
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)

    def to_json(self) -> str:
        span = self.span
        return json.dumps(
            {
                "severity": self.severity,
                "code": self.code,
                "message": self.message,
                "file": self.file,
                "span": None
                if span is None
                else {"start": [span.line, span.col], "end": [span.end_line, span.end_col]},
                "notes": self.notes,
            }
        )


def use_color(stream=None) -> bool:
    mode = os.environ.get("ELEVATE_COLOR", "auto").lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    stream = stream or sys.stderr
    return hasattr(stream, "isatty") and stream.isatty()
