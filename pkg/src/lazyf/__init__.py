"""LazyF: System F with a lazily bound existential, checked and run call-by-need."""

from __future__ import annotations

from .checker import CheckResult, check_program
from .diagnostics import CompileError, Diagnostic, EvalError, LazyFError
from .evaluator import EvalConfig, eval_main
from .loader import Loader, check_file
from .parser import parse_expr, parse_pattern, parse_program, parse_type
from .pretty import pretty_print

__all__ = [
    "CheckResult",
    "CompileError",
    "Diagnostic",
    "EvalConfig",
    "EvalError",
    "LazyFError",
    "Loader",
    "check_file",
    "check_program",
    "eval_main",
    "parse_expr",
    "parse_pattern",
    "parse_program",
    "parse_type",
    "pretty_print",
]
