"""The ``elevate`` command-line driver."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .diagnostics import Diagnostic, ElevateError, FuelExhausted, use_color
from .evaluate import DEFAULT_FUEL, evaluate
from .pipeline import EXIT_FUEL, EXIT_OK, EXIT_PARSE, EXIT_TYPE, Checked, check_source
from .pretty import pretty_program, pretty_term
from .syntax import LetDecl, Program


def _report(diags: list[Diagnostic], as_json: bool) -> None:
    color = use_color(sys.stderr)
    for d in diags:
        print(d.to_json() if as_json else d.format(color), file=sys.stderr)


def _load(path: str) -> Optional[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        print(f"elevate: cannot read {path}: {err.strerror}", file=sys.stderr)
        return None


def cmd_check(path: str, as_json: bool = False) -> int:
    source = _load(path)
    if source is None:
        return EXIT_TYPE
    result = check_source(source, path)
    _report(result.diagnostics(), as_json)
    return result.exit_code


def cmd_infer(path: str, as_json: bool = False) -> int:
    source = _load(path)
    if source is None:
        return EXIT_TYPE
    result = check_source(source, path)
    _report(result.diagnostics(), as_json)
    if result.types is not None:
        for d in result.types.decls:
            if d.scheme is None:
                continue
            if as_json:
                record = {"name": d.name, "scheme": d.scheme.pretty(), "kinds": d.scheme.kinds_text()}
                print(json.dumps(record))
            else:
                print(f"{d.name} : {d.scheme.pretty()}")
    return result.exit_code


def cmd_elaborate(path: str, as_json: bool = False) -> int:
    source = _load(path)
    if source is None:
        return EXIT_TYPE
    result = check_source(source, path, infer=False)
    _report(result.diagnostics(), as_json)
    if not result.ok:
        return result.exit_code
    if as_json:
        for d in result.core.decls:
            if isinstance(d, LetDecl):
                print(json.dumps({"name": d.name, "core": pretty_term(d.value)}))
        if result.core.main is not None:
            print(json.dumps({"name": None, "core": pretty_term(result.core.main)}))
    else:
        sys.stdout.write(pretty_program(result.core))
    return EXIT_OK


def cmd_run(path: str, fuel: int = DEFAULT_FUEL, as_json: bool = False) -> int:
    source = _load(path)
    if source is None:
        return EXIT_TYPE
    result: Checked = check_source(source, path)
    _report(result.diagnostics(), as_json)
    if not result.ok:
        return result.exit_code
    program: Program = result.core
    term = program.as_term()
    if term is None:
        return EXIT_OK
    try:
        value = evaluate(term, fuel)
    except FuelExhausted as err:
        _report([Diagnostic.from_error(err.with_span(program.main.span), path)], as_json)
        return EXIT_FUEL
    except ElevateError as err:
        _report([Diagnostic.from_error(err, path)], as_json)
        return EXIT_TYPE
    text = pretty_term(value)
    print(json.dumps({"value": text}) if as_json else text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elevate", description="Type-check and run ELEVATE strategy programs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "parse, elaborate and type-check a file"),
        ("infer", "print the inferred scheme of every top-level let"),
        ("elaborate", "print the program with patterns compiled to core matches"),
        ("run", "type-check, then evaluate the final expression"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file")
        p.add_argument("--json", action="store_true", help="machine-readable output; diagnostics stay on stderr")
        if name == "run":
            p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="maximum number of reduction steps")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        if args.fuel <= 0:
            print("elevate: --fuel must be positive", file=sys.stderr)
            return EXIT_PARSE
        return cmd_run(args.file, args.fuel, args.json)
    commands = {"check": cmd_check, "infer": cmd_infer, "elaborate": cmd_elaborate}
    return commands[args.command](args.file, args.json)


if __name__ == "__main__":
    sys.exit(main())
