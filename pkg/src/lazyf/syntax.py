"""Abstract syntax of terms, patterns and programs.

Every node carries a ``span`` that is excluded from equality, so two parses
of equivalent text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple, Union

from .diagnostics import NO_SPAN, SourceSpan
from .types import TypeExpr

_SPAN = dict(default=NO_SPAN, compare=False, repr=False)


class Term:
    __slots__ = ()


class Pattern:
    __slots__ = ()


# --- patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class PVar(Pattern):
    name: str
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class PWild(Pattern):
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class PTuple(Pattern):
    items: Tuple[Pattern, ...]
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class PCon(Pattern):
    con: str
    args: Tuple[Pattern, ...] = ()
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class PLazy(Pattern):
    inner: Pattern
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class PUnpack(Pattern):
    """``pack t p``: binds a fresh type name for t, then matches p lazily."""

    binder: str
    inner: Pattern
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class PLit(Pattern):
    value: Union[int, str]
    kind: str  # "int" | "char" | "string"
    span: SourceSpan = field(**_SPAN)


# --- terms ------------------------------------------------------------------


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class TyApp(Term):
    fun: Term
    type_arg: TypeExpr
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Param:
    pattern: Pattern
    ann: Optional[TypeExpr] = None


@dataclass(frozen=True)
class Lam(Term):
    params: Tuple[Param, ...]
    body: Term
    guard: Optional[Term] = None
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class ExBarIntro(Term):
    binder: str
    body: Term
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Pack(Term):
    binder: str
    witness: TypeExpr
    payload: Term
    ann: Optional[TypeExpr] = None  # body annotation: ``as sigma``
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Choice(Term):
    alts: Tuple[Term, ...]
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Binding:
    pattern: Pattern
    rhs: Term
    sig: Optional[TypeExpr] = None
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class LetGroup(Term):
    bindings: Tuple[Binding, ...]
    body: Term
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Branch:
    pattern: Pattern
    body: Term
    guard: Optional[Term] = None
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Case(Term):
    scrutinee: Term
    branches: Tuple[Branch, ...]
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class ConApp(Term):
    con: str
    args: Tuple[Term, ...] = ()
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Lit(Term):
    value: Union[int, str]
    kind: str  # "int" | "char" | "string"
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Prim(Term):
    op: str
    args: Tuple[Term, ...]
    span: SourceSpan = field(**_SPAN)


# --- programs ---------------------------------------------------------------


@dataclass(frozen=True)
class CtorDecl:
    name: str
    sig: TypeExpr  # closed scheme: forall params . fields -> T idx
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class DataDecl:
    name: str
    params: Tuple[str, ...]
    ctors: Tuple[CtorDecl, ...]
    gadt: bool = False
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class TopBinding:
    name: str
    sig: Optional[TypeExpr]
    body: Term
    span: SourceSpan = field(**_SPAN)
    sig_span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Import:
    module: str
    span: SourceSpan = field(**_SPAN)


@dataclass(frozen=True)
class Program:
    file: str = field(compare=False)
    imports: Tuple[Import, ...]
    datas: Tuple[DataDecl, ...]
    bindings: Tuple[TopBinding, ...]

    def binding(self, name: str) -> Optional[TopBinding]:
        for b in self.bindings:
            if b.name == name:
                return b
        return None

    @property
    def main(self) -> Optional[TopBinding]:
        return self.binding("main")


# --- helpers ----------------------------------------------------------------


def pattern_vars(p: Pattern) -> Iterator[str]:
    if isinstance(p, PVar):
        yield p.name
    elif isinstance(p, PTuple):
        for q in p.items:
            yield from pattern_vars(q)
    elif isinstance(p, PCon):
        for q in p.args:
            yield from pattern_vars(q)
    elif isinstance(p, (PLazy, PUnpack)):
        yield from pattern_vars(p.inner)


def unpack_binders(p: Pattern) -> Iterator[PUnpack]:
    """PUnpack nodes at the top of p or directly under its top-level tuple."""
    if isinstance(p, PUnpack):
        yield p
        yield from unpack_binders(p.inner)
    elif isinstance(p, PTuple):
        for q in p.items:
            if isinstance(q, PUnpack):
                yield q
                yield from unpack_binders(q.inner)


def app_spine(t: Term):
    """Split nested App/TyApp into (head, [arg, ...]); type args stay TypeExpr."""
    args = []
    while isinstance(t, (App, TyApp)):
        args.append(t.arg if isinstance(t, App) else t.type_arg)
        t = t.fun
    args.reverse()
    return t, args


def strip_exbar(t: Term) -> Term:
    while isinstance(t, ExBarIntro):
        t = t.body
    return t


def lam_arity(t: Term) -> Optional[int]:
    t = strip_exbar(t)
    if isinstance(t, Lam):
        return len(t.params)
    return None
