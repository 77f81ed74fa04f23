"""Call-by-need evaluation of checked programs.

Terms are first erased: type applications, packs and exbar introductions
carry no runtime content and disappear.  The result is run on a small
machine whose control stack is an explicit list of Python generators, so
deep recursion in the object program never touches the Python stack.

A generator talks to the driver by yielding either a :class:`Cell` (force it
to weak head normal form and send the value back) or another generator (run
it and send back its result).  Returning a :class:`Tail` replaces the
current frame, which keeps tail calls from growing the stack.
"""

from __future__ import annotations

import gc
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .diagnostics import CycleDetected, PatternMatchFailure, PrimitiveError, StepLimitExceeded
from .syntax import (
    App,
    Case,
    Choice,
    ConApp,
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
    pattern_vars,
)
from .types import is_tuple_con

DEFAULT_MAX_STEPS = 10 ** 7


@dataclass
class EvalConfig:
    max_steps: int = DEFAULT_MAX_STEPS
    counters_enabled: bool = False
    trace_enabled: bool = False
    trace: Optional[Callable[[str], None]] = None  # sink for trace lines
    max_depth: int = 2_000_000  # control-stack frames; guards host memory

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    @classmethod
    def from_env(cls, **kw) -> "EvalConfig":
        if "max_steps" not in kw and os.environ.get("LAZYF_MAX_STEPS"):
            kw["max_steps"] = int(os.environ["LAZYF_MAX_STEPS"])
        return cls(**kw)


# --- erased core ------------------------------------------------------------


@dataclass(frozen=True)
class Site:
    file: str
    line: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}"


class Core:
    __slots__ = ()


@dataclass(frozen=True)
class CVar(Core):
    name: str
    site: Site


@dataclass(frozen=True)
class CLit(Core):
    value: object
    kind: str
    site: Site


@dataclass(frozen=True)
class CApp(Core):
    fun: Core
    args: Tuple[Core, ...]
    site: Site


@dataclass(frozen=True)
class Alt:
    params: Tuple[Pattern, ...]
    guard: Optional[Core]
    body: Core


@dataclass(frozen=True)
class CFun(Core):
    alts: Tuple[Alt, ...]
    arity: int
    site: Site


@dataclass(frozen=True)
class CLet(Core):
    bindings: Tuple[Tuple[Pattern, Core], ...]
    body: Core
    site: Site


@dataclass(frozen=True)
class CCase(Core):
    scrutinee: Core
    alts: Tuple[Alt, ...]
    site: Site


@dataclass(frozen=True)
class CCon(Core):
    con: str
    args: Tuple[Core, ...]
    arity: int
    site: Site


@dataclass(frozen=True)
class CPrim(Core):
    op: str
    args: Tuple[Core, ...]
    site: Site


def erase_pattern(p: Pattern) -> Pattern:
    """PUnpack has no runtime content beyond laziness."""
    if isinstance(p, PUnpack):
        return PLazy(erase_pattern(p.inner), p.span)
    if isinstance(p, PLazy):
        return PLazy(erase_pattern(p.inner), p.span)
    if isinstance(p, PTuple):
        return PTuple(tuple(erase_pattern(q) for q in p.items), p.span)
    if isinstance(p, PCon):
        return PCon(p.con, tuple(erase_pattern(q) for q in p.args), p.span)
    return p


class Eraser:
    """Translate checked terms to the untyped core."""

    def __init__(self, ctor_arity: Callable[[str], int]):
        self.ctor_arity = ctor_arity

    def site(self, e) -> Site:
        return Site(e.span.file, e.span.line)

    def term(self, e: Term) -> Core:
        while isinstance(e, (TyApp, Pack, ExBarIntro)):
            e = e.fun if isinstance(e, TyApp) else e.payload if isinstance(e, Pack) else e.body
        if isinstance(e, Var):
            return CVar(e.name, self.site(e))
        if isinstance(e, Lit):
            return CLit(e.value, e.kind, self.site(e))
        if isinstance(e, App):
            whole, args = e, []
            while True:
                if isinstance(e, App):
                    args.append(e.arg)
                    e = e.fun
                elif isinstance(e, TyApp):
                    e = e.fun
                else:
                    break
            args.reverse()
            return CApp(self.term(e), tuple(self.term(a) for a in args), self.site(whole))
        if isinstance(e, Lam):
            return CFun((self.alt(e),), len(e.params), self.site(e))
        if isinstance(e, Choice):
            alts = []
            for a in e.alts:
                while isinstance(a, ExBarIntro):
                    a = a.body
                alts.append(self.alt(a))
            return CFun(tuple(alts), len(alts[0].params), self.site(e))
        if isinstance(e, LetGroup):
            binds = tuple((erase_pattern(b.pattern), self.term(b.rhs)) for b in e.bindings)
            return CLet(binds, self.term(e.body), self.site(e))
        if isinstance(e, Case):
            alts = tuple(Alt((erase_pattern(br.pattern),), None if br.guard is None else self.term(br.guard),
                             self.term(br.body)) for br in e.branches)
            return CCase(self.term(e.scrutinee), alts, self.site(e))
        if isinstance(e, ConApp):
            return CCon(e.con, tuple(self.term(a) for a in e.args), self.ctor_arity(e.con), self.site(e))
        if isinstance(e, Prim):
            return CPrim(e.op, tuple(self.term(a) for a in e.args), self.site(e))
        raise TypeError(f"cannot erase {type(e).__name__}")

    def alt(self, lam: Lam) -> Alt:
        params = tuple(erase_pattern(p.pattern) for p in lam.params)
        guard = None if lam.guard is None else self.term(lam.guard)
        return Alt(params, guard, self.term(lam.body))


# --- runtime values ---------------------------------------------------------


class Value:
    __slots__ = ()


@dataclass(eq=False)
class LitV(Value):
    value: object
    kind: str  # "int" | "char" | "string"


@dataclass(eq=False)
class DataV(Value):
    con: str
    fields: Tuple["Cell", ...] = ()


@dataclass(eq=False)
class FunV(Value):
    alts: Tuple[Alt, ...]
    arity: int
    env: "Env"
    args: Tuple["Cell", ...] = ()


@dataclass(eq=False)
class ConFunV(Value):
    con: str
    arity: int
    args: Tuple["Cell", ...] = ()


@dataclass(eq=False)
class BuiltinV(Value):
    name: str
    arity: int
    args: Tuple["Cell", ...] = ()


@dataclass(eq=False)
class MatchV(Value):
    """Internal: the bindings produced by a lazily matched pattern."""

    binds: Dict[str, "Cell"]


THUNK, BLACKHOLE, VALUE = "thunk", "blackhole", "value"


class Cell:
    __slots__ = ("ident", "state", "code", "value", "site", "match_count")

    def __init__(self, ident: int, site: Optional[Site], code=None, value: Optional[Value] = None):
        self.ident = ident
        self.site = site
        self.match_count = 0
        if value is not None:
            self.state, self.value, self.code = VALUE, value, None
        else:
            self.state, self.value, self.code = THUNK, None, code

    def __repr__(self) -> str:
        return f"Cell#{self.ident}({self.state})"


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, vars: Dict[str, Cell], parent: Optional["Env"] = None):
        self.vars = vars
        self.parent = parent

    def lookup(self, name: str) -> Cell:
        env = self
        while env is not None:
            c = env.vars.get(name)
            if c is not None:
                return c
            env = env.parent
        raise KeyError(name)

    def extend(self, binds: Dict[str, Cell]) -> "Env":
        return Env(binds, self) if binds else self


@dataclass
class Tail:
    gen: Iterator


@dataclass
class _Update:
    cell: Cell


@dataclass
class _Ready:
    """A finished result travelling down the stack."""

    value: object


BUILTIN_ARITY = {"min": 2, "show": 1, "ord": 1, "chr": 1, "strEq": 2, "error": 1, "compose": 3}


@dataclass
class EvalResult:
    value: object  # host rendering, see :func:`render`
    text: str
    steps: int
    cells: List[Cell] = field(default_factory=list)

    def counters(self) -> List[Tuple[Site, int, int]]:
        """(site, allocations, matches) per site that allocated constructor cells."""
        table: Dict[Site, List[int]] = {}
        for c in self.cells:
            if c.state == VALUE and isinstance(c.value, DataV) and not _structural(c.value.con) and c.site:
                row = table.setdefault(c.site, [0, 0])
                row[0] += 1
                row[1] += c.match_count
        return [(s, a, m) for s, (a, m) in sorted(table.items(), key=lambda kv: (kv[0].file, kv[0].line))]

    def counter_lines(self) -> List[str]:
        return [f"site {s}: allocs={a} matches={m}" for s, a, m in self.counters()]


def _structural(con: str) -> bool:
    return con == "()" or is_tuple_con(con)


# --- host renderings of final values -------------------------------------


@dataclass(frozen=True)
class Data:
    con: str
    args: Tuple[object, ...] = ()


@dataclass(frozen=True)
class Char:
    value: str


_ESC = {"\n": "\\n", "\t": "\\t", "\\": "\\\\", "\0": "\\0"}


def _quote(s: str, q: str) -> str:
    return q + "".join(_ESC.get(c, "\\" + c if c == q else c) for c in s) + q


def render(v, atomic: bool = False) -> str:
    """Surface syntax for a deep-forced value."""
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, int):
        return str(v) if v >= 0 or not atomic else f"({v})"
    if isinstance(v, str):
        return _quote(v, '"')
    if isinstance(v, Char):
        return _quote(v.value, "'")
    if isinstance(v, tuple):
        return "(" + ", ".join(render(x) for x in v) + ")"
    if isinstance(v, list):
        return "[" + ", ".join(render(x) for x in v) + "]"
    if isinstance(v, Data):
        if not v.args:
            return v.con
        s = v.con + " " + " ".join(render(a, True) for a in v.args)
        return f"({s})" if atomic else s
    raise TypeError(v)


def whnf_summary(v: Value) -> str:
    if isinstance(v, LitV):
        return render(v.value if v.kind != "char" else Char(v.value))
    if isinstance(v, DataV):
        return v.con
    if isinstance(v, MatchV):
        return "<match>"
    return "<function>"


# --- the machine ------------------------------------------------------------


class Machine:
    def __init__(self, cfg: Optional[EvalConfig] = None):
        self.cfg = cfg or EvalConfig()
        self.steps = 0
        self._next = 0
        self.cells: List[Cell] = []

    # cells

    def new_cell(self, site: Optional[Site], code=None, value: Optional[Value] = None) -> Cell:
        self._next += 1
        c = Cell(self._next, site, code, value)
        if self.cfg.counters_enabled:
            self.cells.append(c)
        return c

    def alloc(self, e: Core, env: Env) -> Cell:
        """A cell for an argument or binding; variables share their cell."""
        if isinstance(e, CVar):
            return env.lookup(e.name)
        if isinstance(e, CLit):
            return self.new_cell(e.site, value=LitV(e.value, e.kind))
        if isinstance(e, CFun):
            return self.new_cell(e.site, value=FunV(e.alts, e.arity, env))
        if isinstance(e, CCon):
            return self.new_cell(e.site, value=self.construct(e, env))
        return self.new_cell(e.site, code=lambda: self.eval(e, env))

    def construct(self, e: CCon, env: Env) -> Value:
        cells = tuple(self.alloc(a, env) for a in e.args)
        if len(cells) == e.arity:
            return DataV(e.con, cells)
        return ConFunV(e.con, e.arity, cells)

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.cfg.max_steps:
            raise StepLimitExceeded(f"evaluation exceeded {self.cfg.max_steps} steps")

    # driver

    def run(self, gen: Iterator):
        # The heap is full of reference cycles (recursive environments), but
        # nothing is freed mid-run, so cyclic collection is pure overhead.
        enabled = gc.isenabled()
        gc.disable()
        try:
            return self._run(gen)
        finally:
            if enabled:
                gc.enable()

    def _run(self, gen: Iterator):
        stack: list = [gen]
        send = None
        trace = self.cfg.trace if self.cfg.trace_enabled else None
        limit = self.cfg.max_depth
        gen_type = type(gen)
        while True:
            try:
                req = stack[-1].send(send)
            except StopIteration as stop:
                stack.pop()
                req = stop.value
                if isinstance(req, Tail):
                    req = req.gen
                else:
                    req = _Ready(req)
            # resolve the request: a value, a cell to force, or a generator to run
            while True:
                if type(req) is gen_type:
                    stack.append(req)
                    if len(stack) > limit:
                        raise StepLimitExceeded(f"evaluation stack exceeded {limit} frames")
                    send = None
                    break
                if isinstance(req, Cell):
                    if req.state == VALUE:
                        res = req.value
                    elif req.state == BLACKHOLE:
                        raise CycleDetected(f"cell#{req.ident} (site {req.site}) depends on its own value")
                    else:
                        self.tick()
                        code = req.code
                        req.state, req.code = BLACKHOLE, None
                        stack.append(_Update(req))
                        req = code()
                        continue
                elif isinstance(req, _Ready):
                    res = req.value
                else:
                    res = req
                while stack and type(stack[-1]) is _Update:
                    c = stack.pop().cell
                    c.state, c.value = VALUE, res
                    if trace is not None:
                        trace(f"force cell#{c.ident} (site {c.site}) -> {whnf_summary(res)}")
                if not stack:
                    return res
                send = res
                break

    def force(self, cell: Cell) -> Value:
        if cell.state == VALUE:
            return cell.value

        def g():
            v = yield cell
            return v

        return self.run(g())

    # evaluation

    def eval(self, e: Core, env: Env):
        """Start evaluating e: returns a value, a cell to force, or a generator."""
        return self._eval[type(e)](self, e, env)

    def _eval_var(self, e: CVar, env: Env):
        return env.lookup(e.name)

    def _eval_lit(self, e: CLit, env: Env):
        return LitV(e.value, e.kind)

    def _eval_fun(self, e: CFun, env: Env):
        return FunV(e.alts, e.arity, env)

    def _eval_con(self, e: CCon, env: Env):
        return self.construct(e, env)

    def _eval_let(self, e: CLet, env: Env):
        return self.eval(e.body, self.bind_group(e, env))

    def _eval_prim(self, e: CPrim, env: Env):
        return self.prim(e, env)

    def _eval_app(self, e: CApp, env: Env):
        fun = e.fun
        if isinstance(fun, CVar):
            c = env.lookup(fun.name)
            f = c.value if c.state == VALUE else (yield c)
        else:
            f = yield self.eval(fun, env)
        cells = [self.alloc(a, env) for a in e.args]
        return Tail(self.apply(f, cells))

    def _eval_case(self, e: CCase, env: Env):
        scrut = self.alloc(e.scrutinee, env)
        counted: set = set()
        for alt in e.alts:
            binds: Dict[str, Cell] = {}
            p = alt.params[0]
            if _shallow(p):
                v = scrut.value if scrut.state == VALUE else (yield scrut)
                ok = self.match_shallow(p, v, scrut, binds, counted)
            else:
                ok = yield self.match(p, scrut, binds, counted)
            if ok and alt.guard is not None:
                g = yield self.eval(alt.guard, env.extend(binds))
                ok = g.con == "True"
            if ok:
                return Tail(self.eval(alt.body, env.extend(binds)))
        raise PatternMatchFailure(f"no case branch matched at {e.site}")

    _eval = {CVar: _eval_var, CLit: _eval_lit, CFun: _eval_fun, CCon: _eval_con, CLet: _eval_let,
             CPrim: _eval_prim, CApp: _eval_app, CCase: _eval_case}

    def bind_group(self, e: CLet, env: Env) -> Env:
        binds: Dict[str, Cell] = {}
        inner = Env(binds, env)
        for pat, rhs in e.bindings:
            if isinstance(pat, PVar):
                binds[pat.name] = self.alloc_rec(rhs, inner)
                continue
            names = list(pattern_vars(pat))
            if not names:
                continue
            source = self.new_cell(rhs.site, code=(lambda rhs=rhs: self.eval(rhs, inner)))
            self.lazy_bind(pat, source, binds, rhs.site)
        return inner

    def alloc_rec(self, e: Core, env: Env) -> Cell:
        # Names of the group may not be bound yet, so only literals and
        # functions (which look names up when called) are built eagerly.
        if isinstance(e, (CLit, CFun)):
            return self.alloc(e, env)
        return self.new_cell(e.site, code=lambda: self.eval(e, env))

    def lazy_bind(self, pat: Pattern, source: Cell, binds: Dict[str, Cell], site: Optional[Site]) -> None:
        """Bind the variables of pat without forcing source; one shared match."""
        while isinstance(pat, PLazy):
            pat = pat.inner
        if isinstance(pat, PVar):
            binds[pat.name] = source
            return
        names = list(pattern_vars(pat))
        if not names:
            return
        msite = Site(pat.span.file, pat.span.line) if pat.span.line else site
        matched = self.new_cell(msite, code=lambda: self.match_all(pat, source))
        for n in names:
            binds[n] = self.new_cell(msite, code=(lambda n=n: self.select(matched, n)))

    def match_all(self, pat: Pattern, source: Cell):
        binds: Dict[str, Cell] = {}
        ok = yield self.match(pat, source, binds, set())
        if not ok:
            raise PatternMatchFailure(f"irrefutable pattern failed at {pat.span}")
        return MatchV(binds)

    def select(self, matched: Cell, name: str):
        m = yield matched
        v = yield m.binds[name]
        return v

    def match(self, p: Pattern, cell: Cell, binds: Dict[str, Cell], counted: set):
        if isinstance(p, PVar):
            binds[p.name] = cell
            return True
        if isinstance(p, PWild):
            return True
        if isinstance(p, PLazy):
            self.lazy_bind(p.inner, cell, binds, cell.site)
            return True
        v = yield cell
        if isinstance(p, PLit):
            return v.value == p.value
        if cell.ident not in counted:
            counted.add(cell.ident)
            cell.match_count += 1
        if isinstance(p, PTuple):
            for q, c in zip(p.items, v.fields):
                ok = yield self.match(q, c, binds, counted)
                if not ok:
                    return False
            return True
        if isinstance(p, PCon):
            if v.con != p.con:
                return False
            for q, c in zip(p.args, v.fields):
                ok = yield self.match(q, c, binds, counted)
                if not ok:
                    return False
            return True
        raise TypeError(p)

    def match_shallow(self, p: Pattern, v: Value, cell: Cell, binds: Dict[str, Cell], counted: set) -> bool:
        """Match a constructor or tuple pattern whose arguments bind without forcing."""
        if isinstance(p, PCon) and v.con != p.con:
            if cell.ident not in counted:
                counted.add(cell.ident)
                cell.match_count += 1
            return False
        if cell.ident not in counted:
            counted.add(cell.ident)
            cell.match_count += 1
        for q, c in zip(p.items if isinstance(p, PTuple) else p.args, v.fields):
            if isinstance(q, PVar):
                binds[q.name] = c
        return True

    def apply(self, f: Value, cells: List[Cell]):
        while cells:
            if isinstance(f, FunV):
                need = f.arity - len(f.args)
                if len(cells) < need:
                    return FunV(f.alts, f.arity, f.env, f.args + tuple(cells))
                args, cells = f.args + tuple(cells[:need]), cells[need:]
                if not cells:
                    return Tail(self.dispatch(f, args))
                f = yield self.dispatch(f, args)
            elif isinstance(f, ConFunV):
                need = f.arity - len(f.args)
                args, cells = f.args + tuple(cells[:need]), cells[need:]
                if len(args) < f.arity:
                    return ConFunV(f.con, f.arity, args)
                f = DataV(f.con, args)
            elif isinstance(f, BuiltinV):
                need = f.arity - len(f.args)
                if len(cells) < need:
                    return BuiltinV(f.name, f.arity, f.args + tuple(cells))
                args, cells = f.args + tuple(cells[:need]), cells[need:]
                if not cells:
                    return Tail(self.builtin(f.name, args))
                f = yield self.builtin(f.name, args)
            else:
                raise AssertionError(f"applying a non-function {f!r}")
        return f

    def dispatch(self, f: FunV, args: Sequence[Cell]):
        self.tick()
        counted: set = set()
        for alt in f.alts:
            binds: Dict[str, Cell] = {}
            ok = True
            for p, c in zip(alt.params, args):
                if isinstance(p, PVar):
                    binds[p.name] = c
                    continue
                if _shallow(p):
                    v = c.value if c.state == VALUE else (yield c)
                    ok = self.match_shallow(p, v, c, binds, counted)
                else:
                    ok = yield self.match(p, c, binds, counted)
                if not ok:
                    break
            if ok and alt.guard is not None:
                g = yield self.eval(alt.guard, f.env.extend(binds))
                ok = g.con == "True"
            if ok:
                return Tail(self.eval(alt.body, f.env.extend(binds)))
        site = f.alts[0].body.site if f.alts else None
        raise PatternMatchFailure(f"no alternative matched (function near {site})")

    def prim(self, e: CPrim, env: Env):
        if e.op == ".":
            cells = tuple(self.alloc(a, env) for a in e.args)
            return BuiltinV("compose", 3, cells)
        a = yield self.eval(e.args[0], env)
        b = yield self.eval(e.args[1], env)
        x, y = a.value if isinstance(a, LitV) else a.con, b.value if isinstance(b, LitV) else b.con
        if e.op == "+":
            return LitV(x + y, "int")
        if e.op == "-":
            return LitV(x - y, "int")
        if e.op == "*":
            return LitV(x * y, "int")
        if e.op == "<":
            return _bool(x < y)
        if e.op == "<=":
            return _bool(x <= y)
        if e.op == "==":
            return _bool(x == y)
        raise AssertionError(e.op)

    def builtin(self, name: str, args: Sequence[Cell]):
        self.tick()
        if name == "compose":
            f, g, x = args
            inner = self.new_cell(None, code=lambda: self.apply_cells(g, [x]))
            fv = yield f
            return Tail(self.apply(fv, [inner]))
        vals = []
        for c in args:
            v = yield c
            vals.append(v.value)
        if name == "min":
            return LitV(min(vals), "int")
        if name == "show":
            return LitV(str(vals[0]), "string")
        if name == "ord":
            return LitV(ord(vals[0]), "int")
        if name == "chr":
            if not 0 <= vals[0] < 0x110000:
                raise PrimitiveError(f"chr: {vals[0]} is not a character code")
            return LitV(chr(vals[0]), "char")
        if name == "strEq":
            return _bool(vals[0] == vals[1])
        if name == "error":
            raise PrimitiveError(f"error: {vals[0]}")
        raise AssertionError(name)

    def apply_cells(self, fcell: Cell, cells: List[Cell]):
        f = yield fcell
        return Tail(self.apply(f, cells))

    # final values

    def deep(self, cell: Cell):
        v = yield cell
        if isinstance(v, LitV):
            if v.kind == "char":
                return Char(v.value)
            return v.value
        if not isinstance(v, DataV):
            raise AssertionError("main produced a function")
        if v.con in ("True", "False"):
            return v.con == "True"
        if v.con in ("Nil", "Cons"):
            items = []
            while v.con == "Cons":
                head = yield self.deep(v.fields[0])
                items.append(head)
                v = yield v.fields[1]
            return items
        args = []
        for c in v.fields:
            x = yield self.deep(c)
            args.append(x)
        if v.con == "()" or is_tuple_con(v.con):
            return tuple(args)
        return Data(v.con, tuple(args))

    def deep_force(self, cell: Cell):
        return self.run(self.deep(cell))


_SHALLOW: Dict[int, Tuple[Pattern, bool]] = {}


def _shallow(p: Pattern) -> bool:
    hit = _SHALLOW.get(id(p))
    if hit is not None and hit[0] is p:
        return hit[1]
    args = p.args if isinstance(p, PCon) else p.items if isinstance(p, PTuple) else None
    res = args is not None and all(isinstance(q, (PVar, PWild)) for q in args)
    _SHALLOW[id(p)] = (p, res)
    return res


def _bool(b: bool) -> DataV:
    return DataV("True" if b else "False")


# --- programs ---------------------------------------------------------------


def _ctor_arities(check_result) -> Callable[[str], int]:
    glob = check_result.globals

    def arity(name: str) -> int:
        info = glob.ctor(name)
        return 0 if info is None else info.arity

    return arity


class ProgramImage:
    """Global cells of a checked program and its imports."""

    def __init__(self, check_result, machine: Machine):
        self.machine = machine
        eraser = Eraser(_ctor_arities(check_result))
        builtins = {n: machine.new_cell(None, value=BuiltinV(n, a)) for n, a in BUILTIN_ARITY.items()
                    if n != "compose"}
        visible: Dict[str, Cell] = dict(builtins)
        for prog in list(check_result.modules) + [check_result.program]:
            own: Dict[str, Cell] = {}
            env = Env(own, Env(dict(visible)))
            for b in prog.bindings:
                core = eraser.term(b.body)
                site = Site(b.span.file, b.span.line)
                if isinstance(core, (CFun, CLit)):
                    own[b.name] = machine.alloc(core, env)
                else:
                    own[b.name] = machine.new_cell(site, code=(lambda core=core, env=env: machine.eval(core, env)))
            visible.update(own)
        self.globals = visible

    def cell(self, name: str) -> Cell:
        return self.globals[name]


def eval_main(check_result, cfg: Optional[EvalConfig] = None, entry: str = "main") -> EvalResult:
    """Deep-force ``main`` of a checked program."""
    if not check_result.ok:
        raise ValueError("eval_main needs a program that passed the checker")
    machine = Machine(cfg)
    image = ProgramImage(check_result, machine)
    value = machine.deep_force(image.cell(entry))
    return EvalResult(value, render(value), machine.steps, machine.cells)


def erase_program(program: Program, ctor_arity: Callable[[str], int]) -> Dict[str, Core]:
    eraser = Eraser(ctor_arity)
    return {b.name: eraser.term(b.body) for b in program.bindings}


INPUT_SITE = Site("<input>", 1)


def host_cell(machine: Machine, v, site: Site = INPUT_SITE) -> Cell:
    """Allocate an evaluated cell for a host value (the inverse of :func:`render`'s input)."""
    if isinstance(v, bool):
        return machine.new_cell(site, value=_bool(v))
    if isinstance(v, int):
        return machine.new_cell(site, value=LitV(v, "int"))
    if isinstance(v, str):
        return machine.new_cell(site, value=LitV(v, "string"))
    if isinstance(v, Char):
        return machine.new_cell(site, value=LitV(v.value, "char"))
    if isinstance(v, tuple):
        con = "()" if not v else "(" + "," * (len(v) - 1) + ")"
        return machine.new_cell(site, value=DataV(con, tuple(host_cell(machine, x, site) for x in v)))
    if isinstance(v, list):
        cell = machine.new_cell(site, value=DataV("Nil"))
        for x in reversed(v):
            cell = machine.new_cell(site, value=DataV("Cons", (host_cell(machine, x, site), cell)))
        return cell
    if isinstance(v, Data):
        return machine.new_cell(site, value=DataV(v.con, tuple(host_cell(machine, a, site) for a in v.args)))
    raise TypeError(f"no runtime form for {v!r}")


def eval_call(check_result, fn: str, args: Sequence[object], cfg: Optional[EvalConfig] = None) -> EvalResult:
    """Deep-force ``fn arg1 ... argn`` where the arguments are host values."""
    if not check_result.ok:
        raise ValueError("eval_call needs a program that passed the checker")
    machine = Machine(cfg)
    image = ProgramImage(check_result, machine)
    cells = [host_cell(machine, a) for a in args]
    f = image.cell(fn)

    def call():
        fv = yield f
        return Tail(machine.apply(fv, cells))

    result = machine.new_cell(None, code=call)
    value = machine.deep_force(result)
    return EvalResult(value, render(value), machine.steps, machine.cells)
