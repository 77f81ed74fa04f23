"""Public face of the checker: program checking plus the bidirectional core."""

from __future__ import annotations

from .checker import (  # noqa: F401
    BUILTIN_VALUES,
    CheckResult,
    Checker,
    Globals,
    TypingEnv,
    check_program,
    printable,
)
from .diagnostics import Diagnostic  # noqa: F401
from .loader import Loader, check_file  # noqa: F401


def new_env(glob: Globals = None) -> TypingEnv:
    return TypingEnv(glob or Globals())


def infer(env: TypingEnv, e, checker: Checker = None):
    """Infer the type of e; metas left unsolved are shown as ``_N``."""
    checker = checker or Checker(env.glob)
    return checker.report_type(checker.normalize(env, checker.infer(env, e)))


def check(env: TypingEnv, e, expected, checker: Checker = None) -> None:
    """Check e against expected; raises TypeCheckError on failure."""
    (checker or Checker(env.glob)).check(env, e, expected)


def discover_witness(env: TypingEnv, binder: str, body, checker: Checker = None):
    return (checker or Checker(env.glob)).discover_witness(env, binder, body)


def check_pattern(env: TypingEnv, p, t, refine: bool = False, checker: Checker = None) -> TypingEnv:
    return (checker or Checker(env.glob)).check_pattern(env, p, t, refine)
