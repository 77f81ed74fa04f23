"""Lexer and recursive-descent parser for ``.lzf`` source text."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .diagnostics import Diagnostic, ParseError, SourceSpan
from .syntax import (
    App,
    Binding,
    Branch,
    Case,
    Choice,
    ConApp,
    CtorDecl,
    DataDecl,
    ExBarIntro,
    Import,
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
    Packed,
    TCon,
    TVar,
    TypeExpr,
    UNIT,
    tuple_con,
    tuple_type,
)

KEYWORDS = frozenset(
    "data where let in case of if then else forall exbar pack as import".split()
)
SYMBOLS = sorted(
    "||| -> :: == <= \\ = < > + - * : . $ | ~ , ( ) [ ] { } ;".split(),
    key=len,
    reverse=True,
)
ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "'": "'", "0": "\0"}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INT = re.compile(r"[0-9]+")

# binary operators: token -> (precedence, associativity)
BINOPS: Dict[str, Tuple[int, str]] = {
    "$": (0, "right"),
    "==": (4, "none"),
    "<": (4, "none"),
    "<=": (4, "none"),
    ":": (5, "right"),
    "+": (6, "left"),
    "-": (6, "left"),
    "*": (7, "left"),
    "`": (8, "left"),
    ".": (9, "right"),
}
PRIM_OPS = frozenset({"+", "-", "*", "<", "<=", "==", "."})

LIST_TYPE = "List"
NIL = "Nil"
CONS = "Cons"


@dataclass(frozen=True)
class Token:
    kind: str  # ident con int char string sym kw tick eof
    value: object
    line: int
    col: int
    end_line: int
    end_col: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, self.end_line, self.end_col)

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind in ("sym", "kw"):
            return f"'{self.value}'"
        return f"{self.kind} {self.value!r}"


def _error(file, line, col, message, expected=()):
    if expected:
        message += "; expected " + ", ".join(sorted(expected))
    raise ParseError(Diagnostic("SyntaxError", message, SourceSpan(file, line, col, line, col)))


def tokenize(text: str, file: str = "<input>") -> List[Token]:
    toks: List[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if text.startswith("--", i) and not text.startswith("-->", i):
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if text.startswith("{-", i):
            sl, sc = line, col
            depth = 0
            while True:
                if i >= n:
                    _error(file, sl, sc, "unterminated block comment")
                if text.startswith("{-", i):
                    depth += 1
                    advance(2)
                elif text.startswith("-}", i):
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
            continue
        sl, sc = line, col
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            advance(len(word))
            if word in KEYWORDS:
                kind = "kw"
            elif word[0].isupper():
                kind = "con"
            else:
                kind = "ident"
            toks.append(Token(kind, word, sl, sc, line, col))
            continue
        m = _INT.match(text, i)
        if m:
            advance(len(m.group()))
            toks.append(Token("int", int(m.group()), sl, sc, line, col))
            continue
        if c in "\"'":
            quote = c
            advance(1)
            chars = []
            while True:
                if i >= n or text[i] == "\n":
                    _error(file, sl, sc, "unterminated literal")
                ch = text[i]
                if ch == quote:
                    advance(1)
                    break
                if ch == "\\":
                    if i + 1 >= n or text[i + 1] not in ESCAPES:
                        _error(file, line, col, "unknown escape sequence")
                    chars.append(ESCAPES[text[i + 1]])
                    advance(2)
                    continue
                chars.append(ch)
                advance(1)
            s = "".join(chars)
            if quote == "'":
                if len(s) != 1:
                    _error(file, sl, sc, "character literal must hold exactly one character")
                toks.append(Token("char", s, sl, sc, line, col))
            else:
                toks.append(Token("string", s, sl, sc, line, col))
            continue
        if c == "`":
            m = _IDENT.match(text, i + 1)
            if not m or not text.startswith("`", i + 1 + len(m.group())):
                _error(file, sl, sc, "malformed backtick operator")
            advance(len(m.group()) + 2)
            toks.append(Token("tick", m.group(), sl, sc, line, col))
            continue
        for s in SYMBOLS:
            if text.startswith(s, i):
                advance(len(s))
                toks.append(Token("sym", s, sl, sc, line, col))
                break
        else:
            _error(file, sl, sc, f"unexpected character {c!r}")
    toks.append(Token("eof", None, line, col, line, col))
    return toks


_BLOCK_STARTS = {("sym", "\\"), ("kw", "let"), ("kw", "case"), ("kw", "if"), ("kw", "exbar"), ("kw", "pack")}


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.file = file
        self.toks = tokenize(text, file)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, kind: str, value=None, tok: Optional[Token] = None) -> bool:
        t = tok or self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_sym(self, value: str) -> bool:
        return self.at("sym", value)

    def at_kw(self, value: str) -> bool:
        return self.at("kw", value)

    def next(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def fail(self, message: str, expected=()):
        t = self.tok
        _error(self.file, t.line, t.col, f"{message}, found {t.describe()}", expected)

    def expect(self, kind: str, value=None) -> Token:
        if not self.at(kind, value):
            what = f"'{value}'" if value is not None else kind
            self.fail("unexpected token", {what})
        return self.next()

    def expect_sym(self, value: str) -> Token:
        return self.expect("sym", value)

    def span_from(self, start: Token) -> SourceSpan:
        prev = self.toks[self.pos - 1] if self.pos > 0 else start
        return SourceSpan(self.file, start.line, start.col, prev.end_line, prev.end_col)

    # -- types --------------------------------------------------------------

    def parse_type(self) -> TypeExpr:
        if self.at_kw("forall") or self.at_kw("exbar"):
            kind = self.next().value
            binders = [self.expect("ident").value]
            while self.at("ident"):
                binders.append(self.next().value)
            self.expect_sym(".")
            body = self.parse_type()
            ctor = Forall if kind == "forall" else ExBar
            for b in reversed(binders):
                body = ctor(b, body)
            return body
        left = self.parse_btype()
        if self.at_sym("->"):
            self.next()
            return Arrow(left, self.parse_type())
        return left

    def parse_btype(self) -> TypeExpr:
        if self.at("con"):
            name = self.next().value
            args = []
            while self.starts_atype():
                args.append(self.parse_atype())
            return TCon(name, tuple(args))
        return self.parse_atype()

    def starts_atype(self) -> bool:
        t = self.tok
        return t.kind in ("ident", "con") or (t.kind == "sym" and t.value in ("(", "[", "<"))

    def parse_atype(self) -> TypeExpr:
        t = self.tok
        if t.kind == "ident":
            self.next()
            return TVar(t.value)
        if t.kind == "con":
            self.next()
            return TCon(t.value)
        if self.at_sym("["):
            self.next()
            inner = self.parse_type()
            self.expect_sym("]")
            return TCon(LIST_TYPE, (inner,))
        if self.at_sym("<"):
            self.next()
            self.expect_sym("(")
            binder = self.expect("ident").value
            self.expect_sym("=")
            witness = self.parse_type()
            self.expect_sym(")")
            self.expect_sym(",")
            body = self.parse_type()
            self.expect_sym(">")
            return Packed(binder, witness, body)
        if self.at_sym("("):
            self.next()
            if self.at_sym(")"):
                self.next()
                return UNIT
            items = [self.parse_type()]
            while self.at_sym(","):
                self.next()
                items.append(self.parse_type())
            self.expect_sym(")")
            return tuple_type(items)
        self.fail("expected a type", {"type"})

    # -- patterns -----------------------------------------------------------

    def parse_pattern(self) -> Pattern:
        start = self.tok
        if self.at_kw("pack"):
            self.next()
            binder = self.expect("ident").value
            inner = self.parse_apat()
            return PUnpack(binder, inner, self.span_from(start))
        if self.at("con"):
            con = self.next().value
            args = []
            while self.starts_apat():
                args.append(self.parse_apat())
            p = PCon(con, tuple(args), self.span_from(start))
        else:
            p = self.parse_apat()
        if self.at_sym(":"):
            self.next()
            rest = self.parse_pattern()
            return PCon(CONS, (p, rest), self.span_from(start))
        return p

    def starts_apat(self, t: Optional[Token] = None) -> bool:
        t = t or self.tok
        if t.kind in ("ident", "con", "int", "char", "string"):
            return True
        return t.kind == "sym" and t.value in ("(", "~", "[")

    def parse_apat(self) -> Pattern:
        p, ann = self.parse_param_pattern(allow_ann=False)
        return p

    def parse_param_pattern(self, allow_ann: bool) -> Tuple[Pattern, Optional[TypeExpr]]:
        start = self.tok
        t = self.tok
        if t.kind == "ident":
            self.next()
            if t.value == "_":
                return PWild(self.span_from(start)), None
            return PVar(t.value, self.span_from(start)), None
        if t.kind == "con":
            self.next()
            return PCon(t.value, (), self.span_from(start)), None
        if t.kind in ("int", "char", "string"):
            self.next()
            kind = {"int": "int", "char": "char", "string": "string"}[t.kind]
            return PLit(t.value, kind, self.span_from(start)), None
        if self.at_sym("~"):
            self.next()
            inner = self.parse_apat()
            return PLazy(inner, self.span_from(start)), None
        if self.at_sym("["):
            self.next()
            self.expect_sym("]")
            return PCon(NIL, (), self.span_from(start)), None
        if self.at_sym("("):
            self.next()
            if self.at_sym(")"):
                self.next()
                return PTuple((), self.span_from(start)), None
            first = self.parse_pattern()
            if allow_ann and self.at_sym("::"):
                self.next()
                ann = self.parse_type()
                self.expect_sym(")")
                return first, ann
            items = [first]
            while self.at_sym(","):
                self.next()
                items.append(self.parse_pattern())
            self.expect_sym(")")
            if len(items) == 1:
                return first, None
            return PTuple(tuple(items), self.span_from(start)), None
        self.fail("expected a pattern", {"pattern"})

    def parse_params(self, stop: Tuple[str, ...]) -> List[Param]:
        params = []
        while not any(self.at_sym(s) for s in stop):
            if not self.starts_apat():
                self.fail("expected a parameter pattern", {"pattern"} | {f"'{s}'" for s in stop})
            p, ann = self.parse_param_pattern(allow_ann=True)
            params.append(Param(p, ann))
        return params

    # -- terms --------------------------------------------------------------

    def starts_block(self) -> bool:
        return (self.tok.kind, self.tok.value) in _BLOCK_STARTS

    def parse_expr(self) -> Term:
        start = self.tok
        if self.at_sym("\\"):
            self.next()
            params = self.parse_params(("->", "|"))
            if not params:
                self.fail("lambda needs at least one parameter", {"pattern"})
            guard = None
            if self.at_sym("|"):
                self.next()
                guard = self.parse_opexpr(1)
            self.expect_sym("->")
            body = self.parse_expr()
            return Lam(tuple(params), body, guard, self.span_from(start))
        if self.at_kw("let"):
            self.next()
            self.expect_sym("{")
            bindings = self.parse_let_items()
            self.expect_sym("}")
            self.expect("kw", "in")
            body = self.parse_expr()
            return LetGroup(tuple(bindings), body, self.span_from(start))
        if self.at_kw("case"):
            self.next()
            scrut = self.parse_expr()
            self.expect("kw", "of")
            self.expect_sym("{")
            branches = []
            while not self.at_sym("}"):
                bstart = self.tok
                pat = self.parse_pattern()
                guard = None
                if self.at_sym("|"):
                    self.next()
                    guard = self.parse_opexpr(1)
                self.expect_sym("->")
                body = self.parse_expr()
                branches.append(Branch(pat, body, guard, self.span_from(bstart)))
                if not self.at_sym(";"):
                    break
                self.next()
            self.expect_sym("}")
            if not branches:
                self.fail("case needs at least one branch", {"pattern"})
            return Case(scrut, tuple(branches), self.span_from(start))
        if self.at_kw("if"):
            self.next()
            cond = self.parse_expr()
            self.expect("kw", "then")
            yes = self.parse_expr()
            self.expect("kw", "else")
            no = self.parse_expr()
            sp = self.span_from(start)
            return Case(
                cond,
                (Branch(PCon("True", (), sp), yes, None, sp), Branch(PCon("False", (), sp), no, None, sp)),
                sp,
            )
        if self.at_kw("exbar"):
            self.next()
            binder = self.expect("ident").value
            self.expect_sym(".")
            body = self.parse_expr()
            return ExBarIntro(binder, body, self.span_from(start))
        if self.at_kw("pack"):
            self.next()
            self.expect_sym("(")
            binder = self.expect("ident").value
            self.expect_sym("=")
            witness = self.parse_type()
            self.expect_sym(")")
            payload = self.parse_aexpr()
            ann = None
            if self.at_kw("as"):
                self.next()
                ann = self.parse_type()
            return Pack(binder, witness, payload, ann, self.span_from(start))
        return self.parse_opexpr(0)

    def parse_opexpr(self, min_prec: int) -> Term:
        start = self.tok
        if self.starts_block():
            return self.parse_expr()
        left = self.parse_fexp()
        while True:
            t = self.tok
            if t.kind == "tick":
                op = "`"
            elif t.kind == "sym" and t.value in BINOPS:
                op = t.value
            else:
                break
            prec, assoc = BINOPS[op]
            if prec < min_prec:
                break
            self.next()
            next_min = prec + 1 if assoc in ("left", "none") else prec
            right = self.parse_opexpr(next_min)
            sp = self.span_from(start)
            left = self.binop(t, left, right, sp)
            if assoc == "none" and self.tok.kind == "sym" and self.tok.value in BINOPS and BINOPS[self.tok.value][0] == prec:
                self.fail("non-associative operator chained")
        return left

    def binop(self, t: Token, left: Term, right: Term, sp: SourceSpan) -> Term:
        if t.kind == "tick":
            name = t.value
            if name[0].isupper():
                return ConApp(name, (left, right), sp)
            return App(App(Var(name, t.span(self.file)), left, sp), right, sp)
        op = t.value
        if op == "$":
            return App(left, right, sp)
        if op == ":":
            return ConApp(CONS, (left, right), sp)
        return Prim(op, (left, right), sp)

    def starts_aexpr(self) -> bool:
        t = self.tok
        if t.kind in ("ident", "con", "int", "char", "string"):
            return True
        return t.kind == "sym" and t.value in ("(", "[")

    def parse_fexp(self) -> Term:
        start = self.tok
        head = self.parse_aexpr()
        con_head = isinstance(head, ConApp) and not head.args and start.kind == "con"
        args: List[Term] = []
        while True:
            if self.at_sym("[") and not self.at("sym", "]", self.peek()):
                if con_head:
                    self.fail("constructors take no type arguments")
                self.next()
                ty = self.parse_type()
                self.expect_sym("]")
                head = TyApp(head, ty, self.span_from(start))
                continue
            if not self.starts_aexpr():
                break
            arg = self.parse_aexpr()
            if con_head:
                args.append(arg)
            else:
                head = App(head, arg, self.span_from(start))
        if con_head and args:
            return ConApp(head.con, tuple(args), self.span_from(start))
        return head

    def parse_aexpr(self) -> Term:
        start = self.tok
        t = self.tok
        if t.kind == "ident":
            self.next()
            return Var(t.value, self.span_from(start))
        if t.kind == "con":
            self.next()
            return ConApp(t.value, (), self.span_from(start))
        if t.kind in ("int", "char", "string"):
            self.next()
            return Lit(t.value, t.kind, self.span_from(start))
        if self.at_sym("["):
            self.next()
            self.expect_sym("]")
            return ConApp(NIL, (), self.span_from(start))
        if self.at_sym("("):
            self.next()
            if self.at_sym(")"):
                self.next()
                return ConApp("()", (), self.span_from(start))
            items = [self.parse_expr()]
            while self.at_sym(","):
                self.next()
                items.append(self.parse_expr())
            self.expect_sym(")")
            if len(items) == 1:
                return items[0]
            return ConApp(tuple_con(len(items)), tuple(items), self.span_from(start))
        self.fail("expected an expression", {"expression"})

    def parse_rhs(self) -> Term:
        start = self.tok
        alts = [self.parse_expr()]
        while self.at_sym("|||"):
            self.next()
            alts.append(self.parse_expr())
        if len(alts) == 1:
            return alts[0]
        return Choice(tuple(alts), self.span_from(start))

    # -- binding groups -----------------------------------------------------

    def parse_equation_or_sig(self):
        """Returns ('sig', name, type, span) | ('eq', name, params, guard, rhs, span)
        | ('pat', pattern, rhs, span)."""
        start = self.tok
        if self.at("ident") and self.tok.value != "_":
            if self.at("sym", ":", self.peek()):
                name = self.next().value
                self.next()
                ty = self.parse_type()
                return ("sig", name, ty, self.span_from(start))
            name = self.next().value
            params = self.parse_params(("=", "|"))
            guard = None
            if self.at_sym("|"):
                if not params:
                    self.fail("guards need at least one parameter")
                self.next()
                guard = self.parse_opexpr(1)
            self.expect_sym("=")
            rhs = self.parse_rhs()
            return ("eq", name, params, guard, rhs, self.span_from(start))
        pat = self.parse_pattern()
        self.expect_sym("=")
        rhs = self.parse_rhs()
        return ("pat", pat, rhs, self.span_from(start))

    def parse_let_items(self) -> List[Binding]:
        items = []
        while not self.at_sym("}"):
            items.append(self.parse_equation_or_sig())
            if not self.at_sym(";"):
                break
            self.next()
        sigs, defs, order = self.group(items)
        out = []
        for key in order:
            if isinstance(key, tuple):
                _, pat, rhs, sp = defs[key]
                out.append(Binding(pat, rhs, None, sp))
            else:
                body, sp = defs[key]
                sig = sigs.pop(key, (None, None))[0]
                out.append(Binding(PVar(key, sp), body, sig, sp))
        if sigs:
            name, (_, sp) = next(iter(sigs.items()))
            _error(self.file, sp.line, sp.col, f"signature for '{name}' lacks a definition")
        return out

    def group(self, items):
        """Merge equations of the same name into one body (a Choice of lambdas)."""
        sigs: Dict[str, Tuple[TypeExpr, SourceSpan]] = {}
        eqs: Dict[str, list] = {}
        defs = {}
        order = []
        for it in items:
            if it[0] == "sig":
                _, name, ty, sp = it
                if name in sigs:
                    _error(self.file, sp.line, sp.col, f"duplicate signature for '{name}'")
                sigs[name] = (ty, sp)
            elif it[0] == "eq":
                name = it[1]
                if name not in eqs:
                    eqs[name] = []
                    order.append(name)
                eqs[name].append(it)
            else:
                key = ("pat", len(order))
                defs[key] = it
                order.append(key)
        for name, group in eqs.items():
            if len(group) == 1:
                _, _, params, guard, rhs, sp = group[0]
                body = Lam(tuple(params), rhs, guard, sp) if params else rhs
                defs[name] = (body, sp)
                continue
            lams = []
            for _, _, params, guard, rhs, sp in group:
                if not params:
                    _error(self.file, sp.line, sp.col, f"multiple definitions of '{name}'")
                lams.append(Lam(tuple(params), rhs, guard, sp))
            sp = group[0][5].to(group[-1][5])
            defs[name] = (Choice(tuple(lams), sp), sp)
        return sigs, defs, order

    # -- declarations -------------------------------------------------------

    def parse_data(self) -> DataDecl:
        start = self.expect("kw", "data")
        name = self.expect("con").value
        params = []
        while self.at("ident"):
            params.append(self.next().value)
        result = TCon(name, tuple(TVar(p) for p in params))
        ctors = []
        if self.at_kw("where"):
            self.next()
            self.expect_sym("{")
            while not self.at_sym("}"):
                cstart = self.tok
                cname = self.expect("con").value
                self.expect_sym(":")
                sig = self.parse_type()
                ctors.append(CtorDecl(cname, close_scheme(sig), self.span_from(cstart)))
                if not self.at_sym(";"):
                    break
                self.next()
            self.expect_sym("}")
            gadt = True
        else:
            gadt = False
            if self.at_sym("="):
                self.next()
                while True:
                    cstart = self.tok
                    cname = self.expect("con").value
                    fields = []
                    while self.starts_atype():
                        fields.append(self.parse_atype())
                    sig = result
                    for f in reversed(fields):
                        sig = Arrow(f, sig)
                    for p in reversed(params):
                        sig = Forall(p, sig)
                    ctors.append(CtorDecl(cname, sig, self.span_from(cstart)))
                    if not self.at_sym("|"):
                        break
                    self.next()
        sp = self.span_from(start)
        return DataDecl(name, tuple(params), tuple(ctors), gadt, sp)

    def parse_program(self) -> Program:
        imports, datas, items = [], [], []
        while not self.at("eof"):
            start = self.tok
            if self.at_kw("import"):
                self.next()
                t = self.tok
                if t.kind not in ("ident", "con", "string"):
                    self.fail("expected a module name", {"module name"})
                self.next()
                imports.append(Import(str(t.value), self.span_from(start)))
            elif self.at_kw("data"):
                datas.append(self.parse_data())
            else:
                it = self.parse_equation_or_sig()
                if it[0] == "pat":
                    sp = it[3]
                    _error(self.file, sp.line, sp.col, "pattern bindings are not allowed at top level")
                items.append(it)
            self.expect_sym(";")
        sigs, defs, order = self.group(items)
        bindings = []
        for name in order:
            body, sp = defs[name]
            sig, sig_sp = sigs.pop(name, (None, sp))
            bindings.append(TopBinding(name, sig, body, sp, sig_sp))
        if sigs:
            name, (_, sp) = next(iter(sigs.items()))
            _error(self.file, sp.line, sp.col, f"signature for '{name}' lacks a definition")
        return Program(self.file, tuple(imports), tuple(datas), tuple(bindings))


def close_scheme(sig: TypeExpr) -> TypeExpr:
    """Quantify the free variables of a constructor signature, outermost first."""
    from .types import free_vars

    order: List[str] = []

    def visit(t, bound):
        if isinstance(t, TVar):
            if t.name not in bound and t.name not in order:
                order.append(t.name)
        elif isinstance(t, Arrow):
            visit(t.dom, bound)
            visit(t.cod, bound)
        elif isinstance(t, (Forall, ExBar)):
            visit(t.body, bound | {t.binder})
        elif isinstance(t, Packed):
            visit(t.witness, bound)
            visit(t.body, bound | {t.binder})
        elif isinstance(t, TCon):
            for a in t.args:
                visit(a, bound)

    visit(sig, frozenset())
    assert set(order) == set(free_vars(sig))
    for v in reversed(order):
        sig = Forall(v, sig)
    return sig


def parse_program(text: str, file: str = "<input>") -> Program:
    return Parser(text, file).parse_program()


def parse_type(text: str, file: str = "<input>") -> TypeExpr:
    p = Parser(text, file)
    t = p.parse_type()
    p.expect("eof")
    return t


def parse_expr(text: str, file: str = "<input>") -> Term:
    p = Parser(text, file)
    t = p.parse_rhs()
    p.expect("eof")
    return t


def parse_pattern(text: str, file: str = "<input>") -> Pattern:
    p = Parser(text, file)
    t = p.parse_pattern()
    p.expect("eof")
    return t
