"""A typed core calculus for rewriting strategies with row-polymorphic variants."""

from .diagnostics import Diagnostic, ElevateError
from .elaborate import elaborate_program, elaborate_term
from .evaluate import evaluate, is_value, step
from .infer import Scheme, infer_program, infer_term, is_instance, scheme_equal_alpha
from .parser import parse, parse_term, parse_type
from .pipeline import check_file, check_source
from .pretty import pretty

__all__ = [
    "Diagnostic",
    "ElevateError",
    "Scheme",
    "check_file",
    "check_source",
    "elaborate_program",
    "elaborate_term",
    "evaluate",
    "infer_program",
    "infer_term",
    "is_instance",
    "is_value",
    "parse",
    "parse_term",
    "parse_type",
    "pretty",
    "scheme_equal_alpha",
    "step",
]
