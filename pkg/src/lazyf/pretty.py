"""Pretty printing of types, terms, patterns and programs.

Output is valid surface syntax: for parsed input, ``parse(show(x)) == x``.
"""

from __future__ import annotations

from typing import List

from .syntax import (
    App,
    Binding,
    Case,
    Choice,
    ConApp,
    DataDecl,
    ExBarIntro,
    Lam,
    LetGroup,
    Lit,
    PCon,
    PLazy,
    PLit,
    PTuple,
    PUnpack,
    PVar,
    PWild,
    Pack,
    Param,
    Pattern,
    Prim,
    Program,
    Term,
    TopBinding,
    TyApp,
    Var,
)
from .types import (
    Arrow,
    ExBar,
    Forall,
    Meta,
    Packed,
    TCon,
    TName,
    TVar,
    TypeExpr,
    is_tuple_con,
)

_OP_PREC = {".": (9, "right"), "*": (7, "left"), "+": (6, "left"), "-": (6, "left"),
            "==": (4, "none"), "<": (4, "none"), "<=": (4, "none")}
_UNESCAPE = {"\n": "\\n", "\t": "\\t", "\\": "\\\\", "\0": "\\0"}


# --- types ------------------------------------------------------------------


def show_type(t: TypeExpr, prec: int = 0) -> str:
    """prec 0: anything; 1: left of an arrow; 2: constructor argument."""
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TName):
        return f"{t.hint}#{t.ident}"
    if isinstance(t, Meta):
        return f"?{t.ident}"
    if isinstance(t, Arrow):
        s = f"{show_type(t.dom, 1)} -> {show_type(t.cod, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, (Forall, ExBar)):
        kind = type(t)
        binders = []
        while isinstance(t, kind):
            binders.append(t.binder)
            t = t.body
        word = "forall" if kind is Forall else "exbar"
        s = f"{word} {' '.join(binders)} . {show_type(t, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, Packed):
        return f"<({t.binder} = {show_type(t.witness)}), {show_type(t.body)}>"
    if isinstance(t, TCon):
        if t.name == "()" and not t.args:
            return "()"
        if is_tuple_con(t.name) and len(t.args) == len(t.name) - 1:
            return "(" + ", ".join(show_type(a) for a in t.args) + ")"
        if t.name == "List" and len(t.args) == 1:
            return f"[{show_type(t.args[0])}]"
        if not t.args:
            return t.name
        s = t.name + " " + " ".join(show_type(a, 2) for a in t.args)
        return f"({s})" if prec >= 2 else s
    raise TypeError(f"not a type: {t!r}")


# --- patterns ---------------------------------------------------------------


def show_pattern(p: Pattern, atomic: bool = False) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PWild):
        return "_"
    if isinstance(p, PLit):
        return show_literal(p.value, p.kind)
    if isinstance(p, PTuple):
        return "(" + ", ".join(show_pattern(q) for q in p.items) + ")"
    if isinstance(p, PLazy):
        return "~" + show_pattern(p.inner, True)
    if isinstance(p, PCon):
        if not p.args:
            return p.con
        s = p.con + " " + " ".join(show_pattern(q, True) for q in p.args)
        return f"({s})" if atomic else s
    if isinstance(p, PUnpack):
        s = f"pack {p.binder} {show_pattern(p.inner, True)}"
        return f"({s})" if atomic else s
    raise TypeError(f"not a pattern: {p!r}")


def show_literal(value, kind: str) -> str:
    if kind == "int":
        return str(value)
    quote = "'" if kind == "char" else '"'
    body = "".join(_UNESCAPE.get(c, "\\" + c if c == quote else c) for c in value)
    return quote + body + quote


def show_param(prm: Param) -> str:
    if prm.ann is not None:
        return f"({show_pattern(prm.pattern)} :: {show_type(prm.ann)})"
    return show_pattern(prm.pattern, True)


# --- terms ------------------------------------------------------------------

_BLOCK = (Lam, LetGroup, Case, ExBarIntro, Pack, Choice)


def show_term(e: Term, prec: int = 0) -> str:
    """prec 0: anything; 1..9: operand of an operator; 10: function; 11: argument."""
    if isinstance(e, _BLOCK):
        s = _show_block(e)
        return f"({s})" if prec > 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        return show_literal(e.value, e.kind)
    if isinstance(e, App):
        s = f"{show_term(e.fun, 10)} {show_term(e.arg, 11)}"
        return f"({s})" if prec > 10 else s
    if isinstance(e, TyApp):
        s = f"{show_term(e.fun, 10)} [{show_type(e.type_arg)}]"
        return f"({s})" if prec > 10 else s
    if isinstance(e, ConApp):
        if not e.args:
            return e.con
        if is_tuple_con(e.con) and len(e.args) == len(e.con) - 1:
            return "(" + ", ".join(show_term(a) for a in e.args) + ")"
        s = e.con + " " + " ".join(show_term(a, 11) for a in e.args)
        return f"({s})" if prec > 10 else s
    if isinstance(e, Prim):
        level, assoc = _OP_PREC[e.op]
        lp = level if assoc == "left" else level + 1
        rp = level if assoc == "right" else level + 1
        s = f"{show_term(e.args[0], lp)} {e.op} {show_term(e.args[1], rp)}"
        return f"({s})" if prec > level else s
    raise TypeError(f"not a term: {e!r}")


def _show_block(e: Term) -> str:
    if isinstance(e, Lam):
        params = " ".join(show_param(p) for p in e.params)
        guard = f" | {show_term(e.guard, 1)}" if e.guard is not None else ""
        return f"\\{params}{guard} -> {show_term(e.body)}"
    if isinstance(e, LetGroup):
        items = " ; ".join(show_binding(b) for b in e.bindings)
        return f"let {{ {items} }} in {show_term(e.body)}"
    if isinstance(e, Case):
        branches = []
        for b in e.branches:
            guard = f" | {show_term(b.guard, 1)}" if b.guard is not None else ""
            branches.append(f"{show_pattern(b.pattern)}{guard} -> {show_term(b.body)}")
        return f"case {show_term(e.scrutinee)} of {{ {' ; '.join(branches)} }}"
    if isinstance(e, ExBarIntro):
        return f"exbar {e.binder} . {show_term(e.body)}"
    if isinstance(e, Pack):
        s = f"pack ({e.binder} = {show_type(e.witness)}) {show_term(e.payload, 11)}"
        if e.ann is not None:
            s += f" as {show_type(e.ann)}"
        return s
    if isinstance(e, Choice):
        return " ||| ".join(show_term(a) for a in e.alts)
    raise TypeError(e)


def show_binding(b: Binding) -> str:
    rhs = show_term(b.rhs)
    if isinstance(b.pattern, PVar):
        head = b.pattern.name
        if b.sig is not None:
            return f"{head} : {show_type(b.sig)} ; {head} = {rhs}"
        return f"{head} = {rhs}"
    return f"{show_pattern(b.pattern)} = {rhs}"


# --- programs ---------------------------------------------------------------


def show_data(d: DataDecl) -> str:
    head = " ".join([d.name, *d.params])
    if d.gadt:
        ctors = " ; ".join(f"{c.name} : {show_type(c.sig)}" for c in d.ctors)
        return f"data {head} where {{ {ctors} }} ;"
    if not d.ctors:
        return f"data {head} ;"
    alts = []
    for c in d.ctors:
        t = c.sig
        for _ in d.params:
            t = t.body
        fields = []
        while isinstance(t, Arrow):
            fields.append(show_type(t.dom, 2))
            t = t.cod
        alts.append(" ".join([c.name, *fields]))
    return f"data {head} = {' | '.join(alts)} ;"


def show_top(b: TopBinding) -> str:
    lines = []
    if b.sig is not None:
        lines.append(f"{b.name} : {show_type(b.sig)} ;")
    lines.append(f"{b.name} = {show_term(b.body)} ;")
    return "\n".join(lines)


def pretty_print(node) -> str:
    if isinstance(node, Program):
        parts: List[str] = [f"import {i.module} ;" for i in node.imports]
        parts += [show_data(d) for d in node.datas]
        parts += [show_top(b) for b in node.bindings]
        return "\n\n".join(parts) + "\n"
    if isinstance(node, TypeExpr):
        return show_type(node)
    if isinstance(node, Pattern):
        return show_pattern(node)
    if isinstance(node, Term):
        return show_term(node)
    if isinstance(node, Binding):
        return show_binding(node)
    raise TypeError(f"cannot pretty-print {type(node).__name__}")
