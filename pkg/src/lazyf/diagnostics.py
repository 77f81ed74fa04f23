"""Diagnostic records and the exceptions that carry them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    @classmethod
    def point(cls, file: str, line: int, col: int) -> "SourceSpan":
        return cls(file, line, col, line, col)

    def to(self, other: "SourceSpan") -> "SourceSpan":
        return SourceSpan(self.file, self.line, self.col, other.end_line, other.end_col)

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NO_SPAN = SourceSpan("<builtin>", 1, 1, 1, 1)

# Codes that always carry an expected/actual pair.
MISMATCH_CODES = frozenset({"TypeMismatch", "WitnessMismatch"})

CODES = frozenset(
    {
        "SyntaxError",
        "ImportError",
        "UnboundTypeVar",
        "UnknownTypeName",
        "ArityMismatch",
        "TypeMismatch",
        "CannotInfer",
        "UnboundVariable",
        "WitnessMismatch",
        "StrictMatchOnExistential",
        "NoPackFound",
        "AmbiguousWitness",
        "UnpackOfFunction",
        "UnknownConstructor",
        "RefinementFailure",
        "NotQuantified",
        "NotExBar",
        "ContravariantExBar",
        "MissingSignature",
        "DuplicateDefinition",
        "AlternativeArity",
        "InvalidPattern",
        "NotPrintable",
    }
)


@dataclass
class Diagnostic:
    code: str
    message: str
    span: SourceSpan
    expected: Any = None  # TypeExpr
    actual: Any = None
    rule: Optional[str] = None

    def sort_key(self):
        return (self.span.file, self.span.line, self.span.col, self.code, self.message)

    def format(self) -> str:
        from .pretty import show_type

        out = f"{self.span}: error[{self.code}]: {self.message}"
        if self.expected is not None:
            out += f"\n  expected: {show_type(self.expected)}"
        if self.actual is not None:
            out += f"\n  actual:   {show_type(self.actual)}"
        return out

    def to_json(self) -> dict:
        from .pretty import show_type

        return {
            "code": self.code,
            "message": self.message,
            "file": self.span.file,
            "line": self.span.line,
            "col": self.span.col,
            "expected": None if self.expected is None else show_type(self.expected),
            "actual": None if self.actual is None else show_type(self.actual),
            "rule": self.rule,
        }


class LazyFError(Exception):
    """Base class for every error raised by the toolchain."""


class CompileError(LazyFError):
    """A static failure (syntax, import or typing) carrying one or more diagnostics."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))

    @property
    def diagnostic(self) -> Diagnostic:
        return self.diagnostics[0]

    @property
    def code(self) -> str:
        return self.diagnostics[0].code


class ParseError(CompileError):
    pass


class TypeCheckError(CompileError):
    pass


class EvalError(LazyFError):
    """Runtime failure of an evaluated program."""

    code = "RuntimeError"


class StepLimitExceeded(EvalError):
    code = "StepLimitExceeded"


class CycleDetected(EvalError):
    code = "CycleDetected"


class PatternMatchFailure(EvalError):
    code = "PatternMatchFailure"


class PrimitiveError(EvalError):
    code = "PrimitiveError"
