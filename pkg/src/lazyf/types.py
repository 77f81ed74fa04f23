"""Type expressions and the pure type-level operations the checker builds on."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union

from .diagnostics import CompileError, Diagnostic, NO_SPAN, SourceSpan


class TypeExpr:
    """Base of the type grammar."""

    __slots__ = ()

    def __str__(self) -> str:
        from .pretty import show_type

        return show_type(self)


@dataclass(frozen=True, eq=True)
class TVar(TypeExpr):
    name: str


@dataclass(frozen=True, eq=True)
class TName(TypeExpr):
    """Opaque rigid type constant; identity is the counter value."""

    ident: int
    hint: str = field(default="", compare=False)


@dataclass(frozen=True, eq=True)
class Arrow(TypeExpr):
    dom: TypeExpr
    cod: TypeExpr


@dataclass(frozen=True, eq=True)
class Forall(TypeExpr):
    binder: str
    body: TypeExpr


@dataclass(frozen=True, eq=True)
class ExBar(TypeExpr):
    binder: str
    body: TypeExpr


@dataclass(frozen=True, eq=True)
class Packed(TypeExpr):
    """``<(binder = witness), body>``; the binder stays bound in body."""

    binder: str
    witness: TypeExpr
    body: TypeExpr


@dataclass(frozen=True, eq=True)
class TCon(TypeExpr):
    name: str
    args: Tuple[TypeExpr, ...] = ()


@dataclass(frozen=True, eq=True)
class Meta(TypeExpr):
    ident: int


Binder = Union[Forall, ExBar]

INT = TCon("Int")
BOOL = TCon("Bool")
CHAR = TCon("Char")
STRING = TCon("String")
UNIT = TCon("()")

BUILTIN_TYPES: Dict[str, int] = {"Int": 0, "Bool": 0, "Char": 0, "String": 0, "()": 0}


def tuple_con(n: int) -> str:
    return "(" + "," * (n - 1) + ")"


def is_tuple_con(name: str) -> bool:
    return len(name) >= 3 and name[0] == "(" and name[-1] == ")" and set(name[1:-1]) == {","}


def tuple_type(items: Iterable[TypeExpr]) -> TypeExpr:
    items = tuple(items)
    if not items:
        return UNIT
    if len(items) == 1:
        return items[0]
    return TCon(tuple_con(len(items)), items)


def arrows(args: Iterable[TypeExpr], result: TypeExpr) -> TypeExpr:
    for a in reversed(list(args)):
        result = Arrow(a, result)
    return result


def split_arrows(t: TypeExpr) -> Tuple[List[TypeExpr], TypeExpr]:
    doms = []
    while isinstance(t, Arrow):
        doms.append(t.dom)
        t = t.cod
    return doms, t


def forall_many(binders: Iterable[str], body: TypeExpr) -> TypeExpr:
    for b in reversed(list(binders)):
        body = Forall(b, body)
    return body


class NameSupply:
    """Monotone counter for rigid names; safe to share between threads."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)
        self._lock = threading.Lock()

    def fresh(self, hint: str) -> TName:
        with self._lock:
            return TName(next(self._counter), hint)


# ---------------------------------------------------------------------------
# traversal helpers


def free_vars(t: TypeExpr) -> frozenset:
    """Free type variables (TVar names)."""
    if isinstance(t, TVar):
        return frozenset((t.name,))
    if isinstance(t, Arrow):
        return free_vars(t.dom) | free_vars(t.cod)
    if isinstance(t, (Forall, ExBar)):
        return free_vars(t.body) - {t.binder}
    if isinstance(t, Packed):
        return free_vars(t.witness) | (free_vars(t.body) - {t.binder})
    if isinstance(t, TCon):
        out = frozenset()
        for a in t.args:
            out |= free_vars(a)
        return out
    return frozenset()


def all_var_names(t: TypeExpr) -> set:
    """Every variable name appearing anywhere in t, bound or free."""
    out = set()

    def go(t):
        if isinstance(t, TVar):
            out.add(t.name)
        elif isinstance(t, Arrow):
            go(t.dom)
            go(t.cod)
        elif isinstance(t, (Forall, ExBar)):
            out.add(t.binder)
            go(t.body)
        elif isinstance(t, Packed):
            out.add(t.binder)
            go(t.witness)
            go(t.body)
        elif isinstance(t, TCon):
            for a in t.args:
                go(a)

    go(t)
    return out


def iter_nodes(t: TypeExpr) -> Iterator[TypeExpr]:
    yield t
    if isinstance(t, Arrow):
        yield from iter_nodes(t.dom)
        yield from iter_nodes(t.cod)
    elif isinstance(t, (Forall, ExBar)):
        yield from iter_nodes(t.body)
    elif isinstance(t, Packed):
        yield from iter_nodes(t.witness)
        yield from iter_nodes(t.body)
    elif isinstance(t, TCon):
        for a in t.args:
            yield from iter_nodes(a)


def names_in(t: TypeExpr) -> set:
    return {n.ident for n in iter_nodes(t) if isinstance(n, TName)}


def metas_in(t: TypeExpr) -> set:
    return {n.ident for n in iter_nodes(t) if isinstance(n, Meta)}


def map_leaves(t: TypeExpr, fn: Callable[[TypeExpr], Optional[TypeExpr]]) -> TypeExpr:
    """Rebuild t, replacing each TName/Meta leaf for which fn returns a type."""
    if isinstance(t, (TName, Meta)):
        r = fn(t)
        return t if r is None else r
    if isinstance(t, Arrow):
        return Arrow(map_leaves(t.dom, fn), map_leaves(t.cod, fn))
    if isinstance(t, Forall):
        return Forall(t.binder, map_leaves(t.body, fn))
    if isinstance(t, ExBar):
        return ExBar(t.binder, map_leaves(t.body, fn))
    if isinstance(t, Packed):
        return Packed(t.binder, map_leaves(t.witness, fn), map_leaves(t.body, fn))
    if isinstance(t, TCon):
        if not t.args:
            return t
        return TCon(t.name, tuple(map_leaves(a, fn) for a in t.args))
    return t


def _fresh_binder(base: str, avoid: set) -> str:
    n = base + "'"
    while n in avoid:
        n += "'"
    return n


def subst_type(t: TypeExpr, binder: str, replacement: TypeExpr) -> TypeExpr:
    """Capture-avoiding substitution of ``replacement`` for free ``binder``."""
    if binder not in free_vars(t):
        return t
    return _subst(t, binder, replacement, free_vars(replacement))


def _subst(t, binder, repl, repl_fv):
    if isinstance(t, TVar):
        return repl if t.name == binder else t
    if isinstance(t, Arrow):
        return Arrow(_subst(t.dom, binder, repl, repl_fv), _subst(t.cod, binder, repl, repl_fv))
    if isinstance(t, TCon):
        if not t.args:
            return t
        return TCon(t.name, tuple(_subst(a, binder, repl, repl_fv) for a in t.args))
    if isinstance(t, (Forall, ExBar, Packed)):
        witness = _subst(t.witness, binder, repl, repl_fv) if isinstance(t, Packed) else None
        b, body = t.binder, t.body
        if b != binder and binder in free_vars(body):
            if b in repl_fv:
                nb = _fresh_binder(b, repl_fv | all_var_names(body) | {binder})
                body = _subst(body, b, TVar(nb), frozenset((nb,)))
                b = nb
            body = _subst(body, binder, repl, repl_fv)
        if isinstance(t, Packed):
            return Packed(b, witness, body)
        return type(t)(b, body)
    return t


def subst_many(t: TypeExpr, mapping: Dict[str, TypeExpr]) -> TypeExpr:
    for k, v in mapping.items():
        t = subst_type(t, k, v)
    return t


def replace_name(t: TypeExpr, ident: int, replacement: TypeExpr) -> TypeExpr:
    return map_leaves(t, lambda leaf: replacement if isinstance(leaf, TName) and leaf.ident == ident else None)


def alpha_equal(a: TypeExpr, b: TypeExpr) -> bool:
    """Equality up to renaming of Forall/ExBar/Packed binders; names by identity."""
    return _aeq(a, b, {}, {}, 0)


def _aeq(a, b, env_a, env_b, depth) -> bool:
    if isinstance(a, TVar) and isinstance(b, TVar):
        ia, ib = env_a.get(a.name), env_b.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if type(a) is not type(b):
        return False
    if isinstance(a, (TName, Meta)):
        return a.ident == b.ident
    if isinstance(a, Arrow):
        return _aeq(a.dom, b.dom, env_a, env_b, depth) and _aeq(a.cod, b.cod, env_a, env_b, depth)
    if isinstance(a, TCon):
        return (
            a.name == b.name
            and len(a.args) == len(b.args)
            and all(_aeq(x, y, env_a, env_b, depth) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, Packed) and not _aeq(a.witness, b.witness, env_a, env_b, depth):
        return False
    if isinstance(a, (Forall, ExBar, Packed)):
        na = dict(env_a)
        nb = dict(env_b)
        na[a.binder] = depth
        nb[b.binder] = depth
        return _aeq(a.body, b.body, na, nb, depth + 1)
    return False


def rename_binder(t: Union[Forall, ExBar, Packed], new: str):
    """Alpha-rename the outer binder of t to ``new``."""
    if t.binder == new:
        return t
    body = t.body
    if new in free_vars(body):
        raise ValueError(f"renaming {t.binder} to {new} would capture")
    body = subst_type(body, t.binder, TVar(new))
    if isinstance(t, Packed):
        return Packed(new, t.witness, body)
    return type(t)(new, body)


# ---------------------------------------------------------------------------
# the two "push" operations on exbar types


def _push(body: TypeExpr, binder: str, witness: TypeExpr) -> TypeExpr:
    if isinstance(body, Arrow):
        return Arrow(subst_type(body.dom, binder, witness), _push(body.cod, binder, witness))
    return Packed(binder, witness, body)


def eliminate_exbar(t: TypeExpr, name: TypeExpr) -> TypeExpr:
    """Instantiate an exbar type at ``name``.

    Argument positions receive the name; the final codomain becomes a packed
    existential recording the name as witness with the binder still bound.
    """
    if not isinstance(t, ExBar):
        raise CompileError(
            Diagnostic("NotExBar", f"cannot eliminate non-exbar type {t}", NO_SPAN, rule="E.E")
        )
    return _push(t.body, t.binder, name)


def intro_shape(body: TypeExpr, binder: str, witness: TypeExpr) -> TypeExpr:
    """Checking target for the body of an exbar introduction at ``witness``."""
    return _push(body, binder, witness)


def reabstract(t: TypeExpr, name: TName, binder: str) -> TypeExpr:
    """Inverse of eliminate_exbar: turn ``name`` back into the binder."""
    def go(t):
        if isinstance(t, Arrow):
            return Arrow(replace_name(t.dom, name.ident, TVar(binder)), go(t.cod))
        if isinstance(t, Packed):
            return rename_binder(t, binder).body
        raise ValueError("not the result of an exbar elimination")

    return ExBar(binder, go(t))


def exbar_domain_flags(body: TypeExpr, binder: str) -> List[bool]:
    """For each arrow domain of body, whether it mentions binder."""
    flags = []
    while isinstance(body, Arrow):
        flags.append(binder in free_vars(body.dom))
        body = body.cod
    return flags


# ---------------------------------------------------------------------------
# well-formedness


def well_formed(env, t: TypeExpr, span: SourceSpan = NO_SPAN, bound: Iterable[str] = ()) -> None:
    """Raise CompileError unless t is well formed in env.

    ``env`` must expose ``data_arities`` (name -> arity), ``names`` (ident ->
    registration) and optionally ``type_scope`` (identifier -> type).
    """
    scope = set(bound) | set(getattr(env, "type_scope", {}) or {})
    _wf(env, t, scope, span)


def _wf(env, t, scope, span):
    if isinstance(t, TVar):
        if t.name not in scope:
            raise CompileError(Diagnostic("UnboundTypeVar", f"type variable '{t.name}' is not in scope", span))
    elif isinstance(t, TName):
        if t.ident not in env.names:
            raise CompileError(Diagnostic("UnknownTypeName", f"type name {t.hint}#{t.ident} is not registered", span))
    elif isinstance(t, Arrow):
        _wf(env, t.dom, scope, span)
        _wf(env, t.cod, scope, span)
    elif isinstance(t, (Forall, ExBar)):
        _wf(env, t.body, scope | {t.binder}, span)
    elif isinstance(t, Packed):
        _wf(env, t.witness, scope, span)
        _wf(env, t.body, scope | {t.binder}, span)
    elif isinstance(t, TCon):
        if is_tuple_con(t.name):
            arity = len(t.name) - 1
        elif t.name in env.data_arities:
            arity = env.data_arities[t.name]
        else:
            raise CompileError(Diagnostic("UnknownTypeName", f"unknown type constructor '{t.name}'", span))
        if arity != len(t.args):
            raise CompileError(
                Diagnostic(
                    "ArityMismatch",
                    f"type constructor '{t.name}' expects {arity} argument(s), got {len(t.args)}",
                    span,
                )
            )
        for a in t.args:
            _wf(env, a, scope, span)
    elif isinstance(t, Meta):
        pass


@dataclass
class SimpleTypeEnv:
    """Minimal environment for calling well_formed outside the checker."""

    data_arities: Dict[str, int] = field(default_factory=lambda: dict(BUILTIN_TYPES))
    names: Dict[int, object] = field(default_factory=dict)
    type_scope: Dict[str, TypeExpr] = field(default_factory=dict)
