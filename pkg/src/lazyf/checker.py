"""Bidirectional, annotation-driven type checker.

Top-level bindings carry signatures; local bindings and lambda parameters
may be left for unification.  Metas are first-order unification variables
with an occurs check; rigid names come from skolemising a quantifier or from
unpacking an existential.  Matching a GADT constructor may refine rigid
names, which is recorded in the environment's equation store.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .diagnostics import CompileError, Diagnostic, NO_SPAN, SourceSpan, TypeCheckError
from .syntax import (
    App,
    Binding,
    Branch,
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
    Pattern,
    Prim,
    Program,
    Term,
    TyApp,
    Var,
    app_spine,
    lam_arity,
    pattern_vars,
    unpack_binders,
)
from .types import (
    BOOL,
    BUILTIN_TYPES,
    CHAR,
    INT,
    STRING,
    UNIT,
    Arrow,
    ExBar,
    Forall,
    Meta,
    NameSupply,
    Packed,
    TCon,
    TName,
    TVar,
    TypeExpr,
    alpha_equal,
    eliminate_exbar,
    exbar_domain_flags,
    free_vars,
    intro_shape,
    is_tuple_con,
    map_leaves,
    rename_binder,
    subst_type,
    tuple_con,
    tuple_type,
    well_formed,
)

LIT_TYPES = {"int": INT, "char": CHAR, "string": STRING}

# Named primitives are ordinary variables with fixed types.
BUILTIN_VALUES: Dict[str, TypeExpr] = {
    "min": Arrow(INT, Arrow(INT, INT)),
    "show": Arrow(INT, STRING),
    "ord": Arrow(CHAR, INT),
    "chr": Arrow(INT, CHAR),
    "strEq": Arrow(STRING, Arrow(STRING, BOOL)),
    "error": Forall("a", Arrow(STRING, TVar("a"))),
}

BUILTIN_CTORS = {
    "True": ("Bool", BOOL),
    "False": ("Bool", BOOL),
}


class _UnifyFail(Exception):
    def __init__(self, reason: str = "", code: str = "TypeMismatch"):
        super().__init__(reason)
        self.reason = reason
        self.code = code


@dataclass
class CtorInfo:
    name: str
    sig: TypeExpr  # closed scheme
    data: str
    arity: int
    gadt: bool
    span: SourceSpan = NO_SPAN


@dataclass
class NameInfo:
    name: TName
    span: SourceSpan
    origin: str  # "skolem" | "unpack" | "existential"


@dataclass
class Globals:
    """State shared by every environment of one program check."""

    data_arities: Dict[str, int] = field(default_factory=lambda: dict(BUILTIN_TYPES))
    datas: Dict[str, DataDecl] = field(default_factory=dict)
    ctors: Dict[str, CtorInfo] = field(default_factory=dict)
    names: Dict[int, NameInfo] = field(default_factory=dict)
    supply: NameSupply = field(default_factory=NameSupply)

    def register(self, hint: str, span: SourceSpan, origin: str) -> TName:
        n = self.supply.fresh(hint)
        if n.ident in self.names:  # the supply is monotone, so this is a bug
            raise AssertionError(f"type name {n.ident} registered twice")
        self.names[n.ident] = NameInfo(n, span, origin)
        return n

    def ctor(self, name: str) -> Optional[CtorInfo]:
        info = self.ctors.get(name)
        if info is not None:
            return info
        if name == "()":
            return CtorInfo("()", UNIT, "()", 0, False)
        if is_tuple_con(name):
            n = len(name) - 1
            vs = [f"t{i}" for i in range(n)]
            sig: TypeExpr = TCon(name, tuple(TVar(v) for v in vs))
            for v in reversed(vs):
                sig = Arrow(TVar(v), sig)
            for v in reversed(vs):
                sig = Forall(v, sig)
            return CtorInfo(name, sig, name, n, False)
        if name in BUILTIN_CTORS:
            data, t = BUILTIN_CTORS[name]
            return CtorInfo(name, t, data, 0, False)
        return None


@dataclass
class TypingEnv:
    glob: Globals
    terms: Dict[str, TypeExpr] = field(default_factory=dict)
    type_scope: Dict[str, TypeExpr] = field(default_factory=dict)
    eqs: Dict[int, TypeExpr] = field(default_factory=dict)

    # duck-typed interface for types.well_formed
    @property
    def data_arities(self):
        return self.glob.data_arities

    @property
    def names(self):
        return self.glob.names

    def bind(self, name: str, t: TypeExpr) -> "TypingEnv":
        terms = dict(self.terms)
        terms[name] = t
        return replace(self, terms=terms)

    def bind_type(self, ident: str, t: TypeExpr) -> "TypingEnv":
        scope = dict(self.type_scope)
        scope[ident] = t
        return replace(self, type_scope=scope)

    def fork(self) -> "TypingEnv":
        return replace(self, terms=dict(self.terms), type_scope=dict(self.type_scope), eqs=dict(self.eqs))

    def lookup(self, name: str) -> Optional[TypeExpr]:
        t = self.terms.get(name)
        if t is None:
            t = BUILTIN_VALUES.get(name)
        return t


@dataclass
class CheckResult:
    program: Program
    types: Dict[str, TypeExpr]  # own top-level bindings, in source order
    diagnostics: List[Diagnostic]
    globals: Globals
    env_types: Dict[str, TypeExpr]  # every visible top-level binding, imports included
    modules: List[Program] = field(default_factory=list)  # imports, dependency order

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def _is_refutable(p: Pattern) -> bool:
    return isinstance(p, (PCon, PLit, PTuple))


def contravariant_exbar(t: TypeExpr, in_domain: bool = False) -> bool:
    """Whether an exbar quantifier occurs inside an arrow domain of t."""
    if isinstance(t, Arrow):
        return contravariant_exbar(t.dom, True) or contravariant_exbar(t.cod, in_domain)
    if isinstance(t, ExBar):
        return in_domain or contravariant_exbar(t.body, in_domain)
    if isinstance(t, Forall):
        return contravariant_exbar(t.body, in_domain)
    if isinstance(t, Packed):
        return contravariant_exbar(t.witness, in_domain) or contravariant_exbar(t.body, in_domain)
    return False


class Checker:
    def __init__(self, glob: Optional[Globals] = None, file: str = "<input>"):
        self.glob = glob or Globals()
        self.file = file
        self._metas = itertools.count()
        self.solutions: Dict[int, TypeExpr] = {}
        self.diagnostics: List[Diagnostic] = []
        self.use_log: List[int] = []  # idents of names resolved from user-written types
        self.unpack_witness: Dict[int, Tuple[TypeExpr, SourceSpan]] = {}
        self.pending_unpack: Set[int] = set()  # names registered ahead for a let group

    # -- metas --------------------------------------------------------------

    def fresh_meta(self) -> Meta:
        return Meta(next(self._metas))

    def zonk(self, t: TypeExpr) -> TypeExpr:
        def leaf(x):
            if isinstance(x, Meta) and x.ident in self.solutions:
                return self.zonk(self.solutions[x.ident])
            return None

        return map_leaves(t, leaf)

    def report_type(self, t: TypeExpr) -> TypeExpr:
        """Zonk and replace leftover metas by readable placeholders."""
        return map_leaves(self.zonk(t), lambda x: TVar(f"_{x.ident}") if isinstance(x, Meta) else None)

    def whnf(self, env: TypingEnv, t: TypeExpr) -> TypeExpr:
        while True:
            if isinstance(t, Meta) and t.ident in self.solutions:
                t = self.solutions[t.ident]
            elif isinstance(t, TName) and t.ident in env.eqs:
                t = env.eqs[t.ident]
            else:
                return t

    def normalize(self, env: TypingEnv, t: TypeExpr) -> TypeExpr:
        """Zonk and rewrite with the equation store everywhere in t."""
        def leaf(x):
            y = self.whnf(env, x)
            if y is x:
                return None
            return self.normalize(env, y)

        return map_leaves(t, leaf)

    # -- errors -------------------------------------------------------------

    def error(self, code: str, message: str, span: SourceSpan, expected=None, actual=None, rule=None):
        if expected is not None:
            expected = self.report_type(expected)
        if actual is not None:
            actual = self.report_type(actual)
        raise TypeCheckError(Diagnostic(code, message, span, expected, actual, rule))

    def record(self, err: CompileError) -> None:
        for d in err.diagnostics:
            key = (d.span, d.code, d.message)
            if all((x.span, x.code, x.message) != key for x in self.diagnostics):
                self.diagnostics.append(d)

    # -- unification --------------------------------------------------------

    def occurs(self, m: Meta, t: TypeExpr) -> bool:
        t = self.zonk(t)
        return any(isinstance(x, Meta) and x.ident == m.ident for x in _iter(t))

    def unify(self, env: TypingEnv, a: TypeExpr, b: TypeExpr, refine: bool = False) -> None:
        a = self.whnf(env, a)
        b = self.whnf(env, b)
        if isinstance(a, Meta) and isinstance(b, Meta) and a.ident == b.ident:
            return
        if isinstance(a, Meta):
            return self._solve(a, b)
        if isinstance(b, Meta):
            return self._solve(b, a)
        if isinstance(a, TName) and isinstance(b, TName) and a.ident == b.ident:
            return
        if refine and isinstance(a, TName):
            return self._refine(env, a, b)
        if refine and isinstance(b, TName):
            return self._refine(env, b, a)
        if isinstance(a, TVar) and isinstance(b, TVar) and a.name == b.name:
            return
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(env, a.dom, b.dom, refine)
            self.unify(env, a.cod, b.cod, refine)
            return
        if isinstance(a, TCon) and isinstance(b, TCon):
            if a.name != b.name or len(a.args) != len(b.args):
                raise _UnifyFail(f"{a.name} is not {b.name}")
            for x, y in zip(a.args, b.args):
                self.unify(env, x, y, refine)
            return
        if isinstance(a, (Forall, ExBar)) and type(a) is type(b):
            k = self.glob.supply.fresh("%" + a.binder)
            self.unify(env, subst_type(a.body, a.binder, k), subst_type(b.body, b.binder, k), refine)
            return
        if isinstance(a, Packed) and isinstance(b, Packed):
            self.unify(env, a.witness, b.witness, refine)
            k = self.glob.supply.fresh("%" + a.binder)
            self.unify(env, subst_type(a.body, a.binder, k), subst_type(b.body, b.binder, k), refine)
            return
        raise _UnifyFail()

    def _solve(self, m: Meta, t: TypeExpr) -> None:
        if self.occurs(m, t):
            raise _UnifyFail("occurs check: infinite type", "RefinementFailure")
        self.solutions[m.ident] = t

    def _refine(self, env: TypingEnv, n: TName, t: TypeExpr) -> None:
        if any(isinstance(x, TName) and x.ident == n.ident for x in _iter(self.normalize(env, t))):
            raise _UnifyFail("occurs check in type refinement", "RefinementFailure")
        env.eqs[n.ident] = t

    def expect(self, env: TypingEnv, actual: TypeExpr, expected: TypeExpr, span: SourceSpan,
               what: str = "expression", rule: Optional[str] = None, refine: bool = False) -> None:
        try:
            self.unify(env, actual, expected, refine)
        except _UnifyFail as f:
            code = f.code
            msg = f"{what} has type {self.report_type(self.normalize(env, actual))}, " \
                  f"expected {self.report_type(self.normalize(env, expected))}"
            if f.reason:
                msg += f" ({f.reason})"
            self.error(code, msg, span, self.normalize(env, expected), self.normalize(env, actual), rule)

    # -- quantifiers --------------------------------------------------------

    def instantiate(self, t: TypeExpr) -> TypeExpr:
        while isinstance(t, Forall):
            t = subst_type(t.body, t.binder, self.fresh_meta())
        return t

    def skolemize(self, env: TypingEnv, t: Forall, span: SourceSpan) -> Tuple[TypingEnv, TypeExpr]:
        n = self.glob.register(t.binder, span, "skolem")
        return env.bind_type(t.binder, n), subst_type(t.body, t.binder, n)

    def apply_type(self, env: TypingEnv, t: TypeExpr, arg: TypeExpr, span: SourceSpan) -> TypeExpr:
        t = self.whnf(env, t)
        if isinstance(t, Forall):
            return subst_type(t.body, t.binder, arg)
        if isinstance(t, ExBar):
            return eliminate_exbar(t, arg)
        self.error("NotQuantified", f"type application to a value of type {self.report_type(t)}",
                   span, rule="E.E")

    # -- user-written types -------------------------------------------------

    def resolve(self, env: TypingEnv, t: TypeExpr, span: SourceSpan, bound: Iterable[str] = ()) -> TypeExpr:
        """Replace scoped type identifiers in a user-written type and check it."""
        bound = set(bound)
        mapping = {}
        for v in sorted(free_vars(t)):
            if v in bound:
                continue
            if v not in env.type_scope:
                self.error("UnboundTypeVar", f"type variable '{v}' is not in scope", span)
            mapping[v] = env.type_scope[v]
        for v, r in mapping.items():
            t = subst_type(t, v, r)
            if isinstance(r, TName):
                self.use_log.append(r.ident)
        try:
            well_formed(env, t, span, bound)
        except CompileError as e:
            raise TypeCheckError(e.diagnostics) from None
        return t

    # -- patterns -----------------------------------------------------------

    def check_pattern(self, env: TypingEnv, p: Pattern, t: TypeExpr, refine: bool = False) -> TypingEnv:
        """Bind the variables of p against type t; returns the extended env."""
        t = self.whnf(env, t)
        if isinstance(p, PVar):
            return env.bind(p.name, t)
        if isinstance(p, PWild):
            return env
        if isinstance(p, PLazy):
            if isinstance(p.inner, PUnpack):
                self.error("InvalidPattern", "an unpack pattern is already lazy", p.span)
            return self.check_pattern(env, p.inner, t, refine)
        if isinstance(p, PLit):
            self.expect(env, LIT_TYPES[p.kind], t, p.span, "literal pattern")
            return env
        if isinstance(p, PTuple):
            return self._check_tuple_pattern(env, p, t, refine)
        if isinstance(p, PUnpack):
            return self._check_unpack(env, p, t, refine)
        if isinstance(p, PCon):
            return self._check_con_pattern(env, p, t, refine)
        raise TypeError(p)

    def _check_tuple_pattern(self, env, p: PTuple, t, refine):
        unpacks = [i for i, q in enumerate(p.items) if isinstance(q, PUnpack)]
        if unpacks:
            if len(unpacks) > 1:
                self.error("InvalidPattern", "at most one unpack pattern per tuple", p.span)
            i = unpacks[0]
            inner = list(p.items)
            inner[i] = p.items[i].inner
            q = PUnpack(p.items[i].binder, PTuple(tuple(inner), p.span), p.span)
            return self._check_unpack(env, q, t, refine)
        if not p.items:
            self.expect(env, UNIT, t, p.span, "pattern ()")
            return env
        n = len(p.items)
        if isinstance(t, Meta):
            self.unify(env, t, tuple_type(self.fresh_meta() for _ in range(n)))
            t = self.whnf(env, t)
        if not (isinstance(t, TCon) and t.name == tuple_con(n)):
            shape = tuple_type(self.fresh_meta() for _ in range(n))
            self.error("TypeMismatch", f"a {n}-tuple pattern cannot match type {self.report_type(self.normalize(env, t))}",
                       p.span, self.normalize(env, t), shape, rule="varpat")
        for q, a in zip(p.items, t.args):
            env = self.check_pattern(env, q, a, refine)
        return env

    def _check_unpack(self, env, p: PUnpack, t, refine):
        if isinstance(t, (Arrow, Forall, ExBar)):
            self.error("UnpackOfFunction",
                       f"cannot unpack a value of type {self.report_type(t)}; only a packed result can be unpacked",
                       p.span, rule="unpackpat")
        if isinstance(t, Meta):
            self.error("CannotInfer", "the type of an unpacked expression must be known", p.span, rule="unpackpat")
        if not isinstance(t, Packed):
            self.error("TypeMismatch", f"unpack pattern against non-packed type {self.report_type(t)}",
                       p.span, Packed("_", TVar("_"), TVar("_")), t, rule="unpackpat")
        name = env.type_scope.get(p.binder)
        if isinstance(name, TName) and name.ident in self.pending_unpack:
            self.pending_unpack.discard(name.ident)
        else:
            name = self.glob.register(p.binder, p.span, "unpack")
        env = env.bind_type(p.binder, name)
        self.unpack_witness[name.ident] = (t.witness, p.span)
        return self.check_pattern(env, p.inner, subst_type(t.body, t.binder, name), refine)

    def _check_con_pattern(self, env, p: PCon, t, refine):
        info = self.glob.ctor(p.con)
        if info is None:
            self.error("UnknownConstructor", f"unknown constructor '{p.con}'", p.span)
        if len(p.args) != info.arity:
            self.error("InvalidPattern", f"constructor '{p.con}' takes {info.arity} argument(s), "
                       f"pattern gives {len(p.args)}", p.span)
        sig = info.sig
        binders = []
        while isinstance(sig, Forall):
            binders.append(sig.binder)
            sig = sig.body
        fields = []
        res = sig
        while isinstance(res, Arrow):
            fields.append(res.dom)
            res = res.cod
        in_result = free_vars(res)
        metas = {}
        for b in binders:
            if b in in_result:
                metas[b] = self.fresh_meta()
            else:  # existential: a fresh rigid name per match
                metas[b] = self.glob.register(b, p.span, "existential")
        res_i = res
        fields_i = list(fields)
        for b, r in metas.items():
            res_i = subst_type(res_i, b, r)
            fields_i = [subst_type(f, b, r) for f in fields_i]
        gadt = info.gadt and refine
        if gadt:
            env = env.fork()
        if isinstance(t, TCon) and isinstance(res_i, TCon) and t.name != res_i.name:
            self.error("TypeMismatch", f"constructor '{p.con}' of type {res_i.name} cannot match type "
                       f"{self.report_type(t)}", p.span, t, res_i)
        try:
            self.unify(env, res_i, t, refine=gadt)
        except _UnifyFail as f:
            code = "RefinementFailure" if info.gadt else f.code
            self.error(code, f"constructor '{p.con}' cannot match type {self.report_type(self.normalize(env, t))}",
                       p.span, self.normalize(env, t), self.normalize(env, res_i))
        if gadt:
            for b, m in metas.items():
                w = self.whnf(env, m)
                if isinstance(w, Meta):
                    self.solutions[w.ident] = self.glob.register(b, p.span, "existential")
        for q, f in zip(p.args, fields_i):
            env = self.check_pattern(env, q, f, refine)
        return env


    # -- inference ----------------------------------------------------------

    def infer(self, env: TypingEnv, e: Term) -> TypeExpr:
        if isinstance(e, Var):
            t = env.lookup(e.name)
            if t is None:
                self.error("UnboundVariable", f"variable '{e.name}' is not in scope", e.span, rule="var")
            return t
        if isinstance(e, Lit):
            return LIT_TYPES[e.kind]
        if isinstance(e, (App, TyApp)):
            return self.check_app(env, e, None)
        if isinstance(e, ConApp):
            return self.check_con(env, e, None)
        if isinstance(e, Prim):
            return self.check_prim(env, e, None)
        if isinstance(e, Pack):
            if e.ann is None:
                self.error("CannotInfer", "a pack needs an 'as' annotation where no type is expected",
                           e.span, rule="pack")
            w = self.resolve(env, e.witness, e.span)
            body = self.resolve(env, e.ann, e.span, bound=[e.binder])
            self.check(env, e.payload, subst_type(body, e.binder, w))
            return Packed(e.binder, w, body)
        if isinstance(e, Lam):
            if all(p.ann is not None for p in e.params):
                doms = []
                for prm in e.params:
                    d = self.resolve(env, prm.ann, prm.pattern.span)
                    doms.append(d)
                    env = self.check_pattern(env, prm.pattern, d, refine=True)
                if e.guard is not None:
                    self.check(env, e.guard, BOOL)
                t = self.infer(env, e.body)
                for d in reversed(doms):
                    t = Arrow(d, t)
                return t
            self.error("CannotInfer", "cannot infer the type of a lambda with unannotated parameters",
                       e.span, rule="abs")
        if isinstance(e, (Case, LetGroup)):
            m = self.fresh_meta()
            self.check(env, e, m)
            return m
        what = "exbar introduction" if isinstance(e, ExBarIntro) else "function alternatives"
        self.error("CannotInfer", f"cannot infer the type of {what}; a signature is required", e.span)

    def subsume(self, env: TypingEnv, actual: TypeExpr, expected: TypeExpr, span: SourceSpan,
                what: str = "expression") -> None:
        actual = self.whnf(env, actual)
        if isinstance(actual, Forall) and not isinstance(self.whnf(env, expected), Forall):
            actual = self.instantiate(actual)
        self.expect(env, actual, expected, span, what)

    # -- checking -----------------------------------------------------------

    def check(self, env: TypingEnv, e: Term, t: TypeExpr) -> None:
        t = self.whnf(env, t)
        if isinstance(e, Choice):
            return self.check_choice(env, e, t)
        if isinstance(t, Forall):
            env, body = self.skolemize(env, t, e.span)
            return self.check(env, e, body)
        if isinstance(e, ExBarIntro):
            if not isinstance(t, ExBar):
                self.error("TypeMismatch", f"exbar introduction checked against type {self.report_type(t)}",
                           e.span, t, ExBar(e.binder, TVar(e.binder)), rule="E.I")
            return self.check_intro(env, e.body, t, e.binder)
        if isinstance(e, Lam):
            if isinstance(t, ExBar):
                return self.check_intro(env, e, t, t.binder)
            return self.check_lam(env, e, t)
        if isinstance(e, Pack):
            return self.check_pack(env, e, t)
        if isinstance(e, LetGroup):
            return self.check_let(env, e, t)
        if isinstance(e, Case):
            return self.check_case(env, e, t)
        if isinstance(e, (App, TyApp)):
            self.check_app(env, e, t)
            return
        if isinstance(e, ConApp):
            self.check_con(env, e, t)
            return
        if isinstance(e, Prim):
            self.check_prim(env, e, t)
            return
        self.subsume(env, self.infer(env, e), t, e.span, _describe(e))

    def check_pack(self, env: TypingEnv, e: Pack, t: TypeExpr) -> None:
        if e.ann is not None or isinstance(t, Meta):
            return self.subsume(env, self.infer(env, e), t, e.span, "pack")
        w = self.resolve(env, e.witness, e.span)
        if isinstance(t, Packed):
            try:
                self.unify(env, w, t.witness)
            except _UnifyFail:
                self.error("WitnessMismatch",
                           f"pack hides {self.report_type(w)} but {self.report_type(t.witness)} is required",
                           e.span, t.witness, w, rule="pack")
            return self.check(env, e.payload, subst_type(t.body, t.binder, w))
        if isinstance(t, ExBar):
            return self.check(env, e.payload, subst_type(t.body, t.binder, w))
        self.error("TypeMismatch", f"pack checked against non-existential type {self.report_type(t)}",
                   e.span, t, Packed(e.binder, w, TVar("_")), rule="pack")

    def check_intro(self, env: TypingEnv, body: Term, t: ExBar, binder: str) -> None:
        if t.binder != binder:
            try:
                t = rename_binder(t, binder)
            except ValueError:
                binder = t.binder
        w = self.discover_witness(env, binder, body)
        shape = intro_shape(t.body, binder, w)
        if isinstance(body, Lam):
            self.check_lam(env, body, shape, exbar_domain_flags(t.body, binder))
        else:
            self.check(env, body, shape)

    def discover_witness(self, env: TypingEnv, binder: str, body: Term) -> TypeExpr:
        """Find the witness of the tail packs for ``binder`` in body."""
        sites: List[Tuple[Pack, frozenset]] = []

        def scan(x, local):
            if isinstance(x, Pack):
                if x.binder == binder:
                    sites.append((x, local))
            elif isinstance(x, Lam):
                scan(x.body, local)
            elif isinstance(x, LetGroup):
                names = set(local)
                for b in x.bindings:
                    names |= {u.binder for u in unpack_binders(b.pattern)}
                scan(x.body, frozenset(names))
            elif isinstance(x, Case):
                for br in x.branches:
                    scan(br.body, local)
            elif isinstance(x, Choice):
                for a in x.alts:
                    scan(a, local)
            elif isinstance(x, ExBarIntro) and x.binder != binder:
                scan(x.body, local)

        scan(body, frozenset())
        if not sites:
            self.error("NoPackFound", f"no pack for '{binder}' in result position", body.span, rule="E.I")
        resolved = []
        for pk, local in sites:
            fv = free_vars(pk.witness)
            if fv & local or not fv <= set(env.type_scope):
                # the witness mentions names bound inside the body: solve later
                return self.fresh_meta()
            mark = len(self.use_log)
            resolved.append((pk, self.resolve(env, pk.witness, pk.span)))
            del self.use_log[mark:]
        first = resolved[0][1]
        clash = [(pk, w) for pk, w in resolved if not alpha_equal(self.normalize(env, w), self.normalize(env, first))]
        if clash:
            where = ", ".join(f"{pk.span} ({self.report_type(w)})" for pk, w in resolved)
            self.error("AmbiguousWitness", f"tail packs for '{binder}' disagree: {where}", clash[0][0].span,
                       first, clash[0][1], rule="E.I")
        return first

    def check_lam(self, env: TypingEnv, lam: Lam, t: TypeExpr, flags: Optional[Sequence[bool]] = None) -> None:
        flags = list(flags or [])
        params = lam.params
        for i, prm in enumerate(params):
            t = self.whnf(env, t)
            while isinstance(t, Forall):
                env, t = self.skolemize(env, t, lam.span)
                t = self.whnf(env, t)
            if isinstance(t, ExBar):
                rest = Lam(params[i:], lam.body, lam.guard, lam.span)
                w = self.discover_witness(env, t.binder, rest)
                flags = exbar_domain_flags(t.body, t.binder)
                t = intro_shape(t.body, t.binder, w)
            if isinstance(t, Meta):
                arr = Arrow(self.fresh_meta(), self.fresh_meta())
                self.unify(env, t, arr)
                t = arr
            if not isinstance(t, Arrow):
                self.error("TypeMismatch", f"lambda with {len(params)} parameter(s) checked against "
                           f"{self.report_type(self.normalize(env, t))}", prm.pattern.span,
                           self.normalize(env, t), Arrow(TVar("_"), TVar("_")), rule="abs")
            if prm.ann is not None:
                ann = self.resolve(env, prm.ann, prm.pattern.span)
                self.expect(env, ann, t.dom, prm.pattern.span, "annotated parameter", rule="abs")
            lazy = flags.pop(0) if flags else False
            if lazy and _is_refutable(prm.pattern):
                self.error("StrictMatchOnExistential",
                           "a parameter whose type is bound by exbar must be matched lazily (use ~p or a variable)",
                           prm.pattern.span, rule="E.I")
            env = self.check_pattern(env, prm.pattern, t.dom, refine=True)
            t = t.cod
        if lam.guard is not None:
            self.check(env, lam.guard, BOOL)
        if flags and isinstance(lam.body, Lam):
            self.check_lam(env, lam.body, t, flags)
        else:
            self.check(env, lam.body, t)

    def check_choice(self, env: TypingEnv, e: Choice, t: TypeExpr) -> None:
        arities = [lam_arity(a) for a in e.alts]
        if any(a is None for a in arities):
            bad = e.alts[arities.index(None)]
            self.error("AlternativeArity", "every alternative must be a function", bad.span, rule="choice")
        if len(set(arities)) > 1:
            self.error("AlternativeArity", f"alternatives take different numbers of parameters: {arities}",
                       e.span, rule="choice")
        for alt in e.alts:
            try:
                self.check(env, alt, t)
            except CompileError as err:
                self.record(err)

    def check_app(self, env: TypingEnv, e: Term, expected: Optional[TypeExpr]) -> TypeExpr:
        head, args = app_spine(e)
        t = self.infer(env, head)
        pending = []
        for a in args:
            if isinstance(a, TypeExpr):
                t = self.apply_type(env, t, self.resolve(env, a, e.span), e.span)
                continue
            t = self.whnf(env, t)
            while isinstance(t, Forall):
                t = self.whnf(env, subst_type(t.body, t.binder, self.fresh_meta()))
            if isinstance(t, Meta):
                arr = Arrow(self.fresh_meta(), self.fresh_meta())
                self.unify(env, t, arr)
                t = arr
            if not isinstance(t, Arrow):
                self.error("TypeMismatch", f"{_describe(head)} of type {self.report_type(self.normalize(env, t))} "
                           "is applied to too many arguments", e.span, Arrow(TVar("_"), TVar("_")),
                           self.normalize(env, t), rule="app")
            pending.append((a, t.dom))
            t = t.cod
        if expected is not None:
            self.subsume(env, t, expected, e.span, "application")
        for a, d in pending:
            self.check(env, a, d)
        return t

    def check_con(self, env: TypingEnv, e: ConApp, expected: Optional[TypeExpr]) -> TypeExpr:
        info = self.glob.ctor(e.con)
        if info is None:
            self.error("UnknownConstructor", f"unknown constructor '{e.con}'", e.span)
        if len(e.args) > info.arity:
            self.error("TypeMismatch", f"constructor '{e.con}' takes {info.arity} argument(s), "
                       f"given {len(e.args)}", e.span)
        t = self.instantiate(info.sig)
        doms = []
        for _ in e.args:
            doms.append(t.dom)
            t = t.cod
        if expected is not None:
            self.subsume(env, t, expected, e.span, f"constructor '{e.con}'")
        for a, d in zip(e.args, doms):
            self.check(env, a, d)
        return t

    def check_prim(self, env: TypingEnv, e: Prim, expected: Optional[TypeExpr]) -> TypeExpr:
        l, r = e.args
        if e.op in ("+", "-", "*"):
            self.check(env, l, INT)
            self.check(env, r, INT)
            res = INT
        elif e.op in ("<", "<="):
            self.check(env, l, INT)
            self.check(env, r, INT)
            res = BOOL
        elif e.op == "==":
            lt = self.instantiate(self.infer(env, l))
            self.check(env, r, lt)
            base = self.whnf(env, lt)
            if base not in (INT, CHAR, BOOL):
                self.error("TypeMismatch", f"'==' compares Int, Char or Bool, not {self.report_type(base)}",
                           e.span, INT, base)
            res = BOOL
        elif e.op == ".":
            a, b, c = self.fresh_meta(), self.fresh_meta(), self.fresh_meta()
            res = Arrow(a, c)
            if expected is not None:
                self.subsume(env, res, expected, e.span, "composition")
                expected = None
            self.check(env, l, Arrow(b, c))
            self.check(env, r, Arrow(a, b))
        else:
            raise AssertionError(e.op)
        if expected is not None:
            self.expect(env, res, expected, e.span, f"'{e.op}' expression")
        return res

    def check_case(self, env: TypingEnv, e: Case, t: TypeExpr) -> None:
        st = self.instantiate(self.whnf(env, self.infer(env, e.scrutinee)))
        for br in e.branches:
            benv = self.check_pattern(env, br.pattern, st, refine=True)
            if br.guard is not None:
                self.check(benv, br.guard, BOOL)
            self.check(benv, br.body, t)

    # -- let groups ---------------------------------------------------------

    def check_let(self, env: TypingEnv, e: LetGroup, expected: TypeExpr) -> None:
        env = env.fork()
        registered = []
        seen_vars: Set[str] = set()
        for b in e.bindings:
            for u in unpack_binders(b.pattern):
                if any(u.binder == r[0] for r in registered):
                    self.error("DuplicateDefinition", f"type name '{u.binder}' unpacked twice in one group", u.span)
                n = self.glob.register(u.binder, u.span, "unpack")
                self.pending_unpack.add(n.ident)
                registered.append((u.binder, n))
                env.type_scope[u.binder] = n
            for v in pattern_vars(b.pattern):
                if v in seen_vars:
                    self.error("DuplicateDefinition", f"variable '{v}' bound twice in one group", b.span)
                seen_vars.add(v)
        var_types: Dict[str, TypeExpr] = {}
        declared: Set[str] = set()
        for b in e.bindings:
            if isinstance(b.pattern, PVar) and b.sig is not None:
                sig = self.resolve(env, b.sig, b.span)
                if contravariant_exbar(sig):
                    self.error("ContravariantExBar", "exbar under an arrow domain is not supported", b.span)
                var_types[b.pattern.name] = sig
                declared.add(b.pattern.name)
            else:
                for v in pattern_vars(b.pattern):
                    var_types[v] = self.fresh_meta()
        env.terms.update(var_types)
        mark = len(self.use_log)
        for b in _binding_order(e.bindings, seen_vars - declared):
            try:
                self.check_binding(env, b, var_types)
            except CompileError as err:
                self.record(err)
        used = set(self.use_log[mark:])
        for binder, n in registered:
            self.pending_unpack.discard(n.ident)
            if n.ident not in self.unpack_witness:
                continue
            w, span = self.unpack_witness[n.ident]
            w = self.normalize(env, w)
            if isinstance(w, Meta):
                self.solutions[w.ident] = n
            elif alpha_equal(w, n):
                pass  # the value is fed back at its own type
            elif n.ident in used:
                self.record(TypeCheckError(Diagnostic(
                    "WitnessMismatch",
                    f"'{binder}' is used as a type in this group, but the unpacked value hides "
                    f"{self.report_type(w)}", span, n, self.report_type(w), "unpackpat")))
        self.check(env, e.body, expected)

    def check_binding(self, env: TypingEnv, b: Binding, var_types: Dict[str, TypeExpr]) -> None:
        p = b.pattern
        if isinstance(p, PVar):
            self.check(env, b.rhs, var_types[p.name])
            return
        t = self.infer(env, b.rhs)
        penv = self.check_pattern(env, p, t)
        for v in pattern_vars(p):
            self.expect(env, penv.terms[v], var_types[v], b.span, f"variable '{v}'")


def _iter(t: TypeExpr):
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        if isinstance(x, Arrow):
            stack += [x.dom, x.cod]
        elif isinstance(x, (Forall, ExBar)):
            stack.append(x.body)
        elif isinstance(x, Packed):
            stack += [x.witness, x.body]
        elif isinstance(x, TCon):
            stack.extend(x.args)



def _describe(e: Term) -> str:
    if isinstance(e, Var):
        return f"'{e.name}'"
    return {Lit: "literal", App: "application", TyApp: "type application", ConApp: "constructor application"}.get(
        type(e), "expression")


def term_vars(e) -> Set[str]:
    """Every variable name occurring in a term (an over-approximation of its free variables)."""
    out: Set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, (Term, Binding, Branch)) or type(x).__name__ == "Param":
            for f in x.__dataclass_fields__:
                v = getattr(x, f)
                if isinstance(v, tuple):
                    stack.extend(v)
                elif isinstance(v, (Term, Binding, Branch)):
                    stack.append(v)
    return out


def _binding_order(bindings: Sequence[Binding], inferred: Set[str]) -> List[Binding]:
    """Source order, except that a binding is checked after the bindings
    whose (unannotated) variables it uses, where that is possible."""
    defines = {}
    for i, b in enumerate(bindings):
        for v in pattern_vars(b.pattern):
            defines[v] = i
    deps = []
    for i, b in enumerate(bindings):
        d = {defines[v] for v in term_vars(b.rhs) if v in inferred and v in defines} - {i}
        deps.append(d)
    done: List[int] = []
    remaining = list(range(len(bindings)))
    while remaining:
        ready = [i for i in remaining if deps[i] <= set(done)]
        pick = ready[0] if ready else remaining[0]
        done.append(pick)
        remaining.remove(pick)
    return [bindings[i] for i in done]


# --- programs ---------------------------------------------------------------


def _result_type(sig: TypeExpr) -> Tuple[int, TypeExpr]:
    while isinstance(sig, Forall):
        sig = sig.body
    arity = 0
    while isinstance(sig, Arrow):
        arity += 1
        sig = sig.cod
    return arity, sig


def _declare_data(checker: Checker, env: TypingEnv, d: DataDecl) -> None:
    glob = checker.glob
    for c in d.ctors:
        if c.name in glob.ctors or c.name in BUILTIN_CTORS:
            checker.error("DuplicateDefinition", f"constructor '{c.name}' is already defined", c.span)
        try:
            well_formed(env, c.sig, c.span, ())
        except CompileError as e:
            raise TypeCheckError(e.diagnostics) from None
        arity, res = _result_type(c.sig)
        if not (isinstance(res, TCon) and res.name == d.name and len(res.args) == len(d.params)):
            checker.error("TypeMismatch", f"constructor '{c.name}' must build a value of type {d.name}",
                          c.span, TCon(d.name, tuple(TVar(p) for p in d.params)), res)
        glob.ctors[c.name] = CtorInfo(c.name, c.sig, d.name, arity, d.gadt, c.span)


def printable(glob: Globals, t: TypeExpr, seen: Optional[Set[str]] = None) -> bool:
    """Whether values of t can be shown: data built from base types, no functions or quantifiers."""
    seen = set() if seen is None else seen
    if not isinstance(t, TCon):
        return False
    if t.name in BUILTIN_TYPES or is_tuple_con(t.name) or t.name == "()":
        return all(printable(glob, a, seen) for a in t.args)
    key = str(t)
    if key in seen:
        return True
    seen.add(key)
    ctors = [c for c in glob.ctors.values() if c.data == t.name]
    for c in ctors:
        sig = c.sig
        binders = []
        while isinstance(sig, Forall):
            binders.append(sig.binder)
            sig = sig.body
        _, res = _result_type(sig)
        mapping = {}
        if isinstance(res, TCon):
            for x, a in zip(res.args, t.args):
                if isinstance(x, TVar):
                    mapping[x.name] = a
        while isinstance(sig, Arrow):
            field_t = sig.dom
            for v, a in mapping.items():
                field_t = subst_type(field_t, v, a)
            if free_vars(field_t) or not printable(glob, field_t, seen):
                return False
            sig = sig.cod
    return True


def check_program(program: Program, loader=None) -> CheckResult:
    """Check every top-level binding against its signature, collecting all diagnostics."""
    checker = Checker(file=program.file)
    glob = checker.glob
    env = TypingEnv(glob)
    modules: List[Program] = []
    env_types: Dict[str, TypeExpr] = {}

    if program.imports:
        if loader is None:
            from .loader import Loader

            loader = Loader()
        for imp in program.imports:
            try:
                dep = loader.import_module(imp, program.file)
            except CompileError as err:
                checker.record(err)
                continue
            for m in dep.modules + [dep.program]:
                if all(m is not x for x in modules):
                    modules.append(m)
            glob.datas.update(dep.globals.datas)
            glob.ctors.update(dep.globals.ctors)
            glob.data_arities.update(dep.globals.data_arities)
            env_types.update({k: v for k, v in dep.env_types.items() if k != "main"})

    own_datas = []
    for d in program.datas:
        if d.name in glob.data_arities and d.name not in {x.name for x in own_datas}:
            if d.name in BUILTIN_TYPES or glob.datas.get(d.name) != d:
                checker.record(TypeCheckError(Diagnostic(
                    "DuplicateDefinition", f"type '{d.name}' is already defined", d.span)))
                continue
        elif d.name in {x.name for x in own_datas}:
            checker.record(TypeCheckError(Diagnostic(
                "DuplicateDefinition", f"type '{d.name}' is defined twice", d.span)))
            continue
        glob.data_arities[d.name] = len(d.params)
        glob.datas[d.name] = d
        own_datas.append(d)
    for d in own_datas:
        for c in d.ctors:
            glob.ctors.pop(c.name, None)
    for d in own_datas:
        try:
            _declare_data(checker, env, d)
        except CompileError as err:
            checker.record(err)

    types: Dict[str, TypeExpr] = {}
    for b in program.bindings:
        if b.sig is None:
            checker.record(TypeCheckError(Diagnostic(
                "MissingSignature", f"top-level binding '{b.name}' has no type signature", b.span)))
            continue
        try:
            sig = checker.resolve(env, b.sig, b.sig_span)
            if contravariant_exbar(sig):
                checker.error("ContravariantExBar",
                              f"signature of '{b.name}' places exbar inside a function argument", b.sig_span)
        except CompileError as err:
            checker.record(err)
            continue
        types[b.name] = sig
    env_types.update(types)
    env.terms.update(env_types)
    for b in program.bindings:
        if b.name not in types:
            continue
        try:
            checker.check(env.fork(), b.body, types[b.name])
        except CompileError as err:
            checker.record(err)

    main = program.main
    if main is not None and "main" in types and not printable(glob, types["main"]):
        checker.record(TypeCheckError(Diagnostic(
            "NotPrintable", f"main has type {types['main']}, which cannot be printed", main.sig_span)))

    diags = sorted(checker.diagnostics, key=Diagnostic.sort_key)
    return CheckResult(program, types, diags, glob, env_types, modules)
