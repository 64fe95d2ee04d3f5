"""Parse, elaborate and type a whole source file, collecting diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Diagnostic, ElevateError, ParseError
from .elaborate import Elaborator
from .infer import ProgramTypes, infer_program
from .parser import parse
from .syntax import LetDecl, Program

EXIT_OK, EXIT_TYPE, EXIT_PARSE, EXIT_FUEL = 0, 1, 2, 3


@dataclass
class Checked:
    file: str
    surface: Optional[Program] = None
    core: Optional[Program] = None
    types: Optional[ProgramTypes] = None
    errors: list[ElevateError] = field(default_factory=list)
    warnings: list[ElevateError] = field(default_factory=list)
    parse_failed: bool = False
    main_failed: bool = False

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def exit_code(self) -> int:
        if self.parse_failed:
            return EXIT_PARSE
        return EXIT_TYPE if self.errors else EXIT_OK

    def diagnostics(self) -> list[Diagnostic]:
        out = [Diagnostic.from_error(e, self.file) for e in self.errors]
        out += [Diagnostic.from_error(w, self.file, "warning") for w in self.warnings]
        return sorted(out, key=lambda d: (d.span.line, d.span.col) if d.span else (0, 0))


def check_source(source: str, file: str = "<input>", infer: bool = True) -> Checked:
    """Run the front end; each declaration fails independently."""
    out = Checked(file)
    try:
        out.surface = parse(source)
    except ParseError as err:
        out.errors.append(err)
        out.parse_failed = True
        return out
    elab = Elaborator()
    decls, skip = [], []
    for i, d in enumerate(out.surface.decls):
        if isinstance(d, LetDecl):
            try:
                d = LetDecl(d.name, elab.term(d.value), d.annotation, span=d.span)
            except ElevateError as err:
                err.with_span(d.span)
                out.errors.append(err)
                skip.append(i)
        decls.append(d)
    main = out.surface.main
    if main is not None:
        try:
            main = elab.term(main)
        except ElevateError as err:
            err.with_span(main.span)
            out.errors.append(err)
            out.main_failed = True
            main = None
    out.core = Program(tuple(decls), main)
    if infer:
        out.types = infer_program(out.core, skip=skip)
        out.errors += out.types.errors
        out.warnings += out.types.warnings
        out.main_failed = out.main_failed or out.types.main_error is not None
    return out


def check_file(path: str, infer: bool = True) -> Checked:
    with open(path, encoding="utf-8") as fh:
        return check_source(fh.read(), path, infer)
