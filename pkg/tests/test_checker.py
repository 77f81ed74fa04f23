from __future__ import annotations

import pytest

from conftest import check_src, codes
from lazyf.checker import TypingEnv
from lazyf.diagnostics import CompileError, MISMATCH_CODES
from lazyf.loader import CORPUS_DIR, Loader
from lazyf.parser import parse_expr, parse_pattern, parse_type
from lazyf.syntax import Program
from lazyf.typechecker import Checker, check_pattern, discover_witness, infer
from lazyf.types import INT, Packed, TCon, TName, alpha_equal

loader = Loader()
ACCEPTED = sorted(p.name for p in CORPUS_DIR.glob("*.lzf")
                  if p.name not in ("idtree_bad.lzf", "safety.lzf", "witness_leak.lzf"))


def _env(name):
    res = loader.check_file(CORPUS_DIR / name)
    assert res.ok
    return res, TypingEnv(res.globals, dict(res.env_types)), Checker(res.globals)


@pytest.mark.parametrize("name", ACCEPTED)
def test_corpus_file_checks_clean(name):
    res = loader.check_file(CORPUS_DIR / name)
    assert res.ok, [d.format() for d in res.diagnostics]


@pytest.mark.parametrize("name, code", [
    ("idtree_bad.lzf", "TypeMismatch"),
    ("safety.lzf", "UnpackOfFunction"),
    ("witness_leak.lzf", "WitnessMismatch"),
])
def test_corpus_file_rejected_with_exact_code(name, code):
    res = loader.check_file(CORPUS_DIR / name)
    assert {d.code for d in res.diagnostics} == {code}


def test_repmin_type():
    assert str(loader.check_file(CORPUS_DIR / "repmin.lzf").types["repmin"]) == "Tree -> Tree"


def test_idtree_bad_mismatch_carries_types():
    d = loader.check_file(CORPUS_DIR / "idtree_bad.lzf").diagnostics[0]
    assert d.expected is not None and d.actual is not None
    assert {str(d.expected), str(d.actual)} & {"Int"}


def test_mismatch_fields_only_on_mismatch_codes():
    for name in ("idtree_bad.lzf", "safety.lzf", "witness_leak.lzf"):
        for d in loader.check_file(CORPUS_DIR / name).diagnostics:
            assert (d.expected is not None) == (d.code in MISMATCH_CODES)


def test_infer_pair():
    _, env, _ = _env("idtree_annot.lzf")
    env = env.bind("v", INT).bind("w", INT)
    assert str(infer(env, parse_expr("(v, Leaf w)"))) == "(Int, Tree)"
    assert infer(env, parse_expr("3")) == INT


def test_infer_exbar_elimination():
    res, env, _ = _env("idtree_annot.lzf")
    nu = res.globals.register("t_vsl", None, "test")
    env = env.bind_type("t_vsl", nu).bind("l", TCon("Tree")).bind("vsl'", nu)
    t = infer(env, parse_expr("idTree' [t_vsl] l vsl'"))
    assert alpha_equal(t, Packed("t_vs", nu, parse_type("(t_vs, Tree)")))


def test_check_leaf_alternative_against_packed_arrow():
    res, env, c = _env("idtree_annot.lzf")
    target = c.resolve(env, parse_type("Tree -> Int -> <(t_vs = Int), (t_vs, Tree)>"), None)
    c.check(env, parse_expr("\\(Leaf v) w -> pack (t_vs = Int) (v, Leaf w)"), target)
    assert not c.diagnostics


def test_check_exbar_intro_on_bin_alternative():
    res, env, c = _env("idtree_annot.lzf")
    target = c.resolve(env, parse_type("exbar t_vs . Tree -> t_vs -> (t_vs, Tree)"), None)
    c.check(env, parse_expr(
        "exbar t_vs . \\(Bin l r) ~(vsl', vsr') -> "
        "let { pack t_vsl (vsl, tl) = idTree' [t_vsl] l vsl' ; "
        "pack t_vsr (vsr, tr) = idTree' [t_vsr] r vsr' } "
        "in pack (t_vs = (t_vsl, t_vsr)) ((vsl, vsr), Bin tl tr)"), target)
    assert not c.diagnostics


def test_discover_witness_leaf_and_missing():
    _, env, c = _env("idtree_annot.lzf")
    assert discover_witness(env, "t_vs", parse_expr(
        "\\(Leaf v) w -> pack (t_vs = Int) (v, Leaf w)"), c) == INT
    with pytest.raises(CompileError) as info:
        discover_witness(env, "t_vs", parse_expr("\\x -> x"), c)
    assert info.value.diagnostics[0].code == "NoPackFound"


def test_unpack_pattern_binds_fresh_name():
    _, env, c = _env("idtree_annot.lzf")
    before = set(env.glob.names)
    t = c.resolve(env, parse_type("<(t_vs = Int), (t_vs, Tree)>"), None)
    out = check_pattern(env, parse_pattern("pack t_vsl (vsl, tl)"), t, checker=c)
    new = set(env.glob.names) - before
    assert len(new) == 1
    (ident,) = new
    assert out.terms["vsl"] == TName(ident) and out.terms["tl"] == TCon("Tree")


def test_unpack_of_function_pattern():
    _, env, c = _env("prelude.lzf")
    t = c.resolve(env, parse_type("exbar x . x -> Bool -> (x, Int)"), None)
    with pytest.raises(CompileError) as info:
        check_pattern(env, parse_pattern("pack t g"), t, checker=c)
    assert info.value.diagnostics[0].code == "UnpackOfFunction"


def test_gadt_refinement_on_rz():
    res, env, c = _env("st.lzf")
    s = res.globals.register("s", None, "test")
    a = res.globals.register("a", None, "test")
    out = check_pattern(env, parse_pattern("RZ"), TCon("STRef", (s, a)), refine=True, checker=c)
    s_is = c.normalize(out, s)
    assert isinstance(s_is, TCon) and s_is.name == "(,)"
    assert c.normalize(out, s_is.args[0]) == c.normalize(out, a)


def test_skolem_registry_unique_across_corpus():
    for name in ACCEPTED:
        res = Loader().check_file(CORPUS_DIR / name)
        idents = [info.name.ident for info in res.globals.names.values()]
        assert len(idents) == len(set(idents)) == len(res.globals.names)


def test_determinism_independent_of_binding_order():
    a = ("f : Int -> Int ;\nf x = g x ;\ng : Int -> Int ;\ng x = x + 1 ;\n"
         "main : Int ;\nmain = f 1 ;")
    b = ("main : Int ;\nmain = f 1 ;\ng : Int -> Int ;\ng x = x + 1 ;\n"
         "f : Int -> Int ;\nf x = g x ;")
    ra, rb = check_src(a), check_src(b)
    assert ra.ok and rb.ok
    assert {k: str(v) for k, v in ra.types.items()} == {k: str(v) for k, v in rb.types.items()}
    bad = "f : Int ;\nf = True ;\ng : Bool ;\ng = 1 ;"
    first = [d.format() for d in check_src(bad).diagnostics]
    assert first == [d.format() for d in check_src(bad).diagnostics] and len(first) == 2


@pytest.mark.parametrize("src, code", [
    ("main : Int ;\nmain = 3 [Int] ;", "NotQuantified"),
    ("main : Int ;\nmain = y ;", "UnboundVariable"),
    ("f x = x ;", "MissingSignature"),
    ("f : a2 -> Int ;\nf x = 1 ;", "UnboundTypeVar"),  # signatures quantify explicitly
    ("f : forall a2 . a2 -> Int ;\nf x = 1 ;", None),
    ("f : Foo ;\nf = 1 ;", "UnknownTypeName"),
    ("main : Int -> Int ;\nmain x = x ;", "NotPrintable"),
    ("f : (exbar x . x -> x) -> Int ;\nf g = 1 ;", "ContravariantExBar"),
    ("data A = X ;\ndata B = X ;\nf : Int ;\nf = 1 ;", "DuplicateDefinition"),
    ("f : Int -> Int ;\nf = \\x -> 1 ||| \\x y -> 2 ;", "AlternativeArity"),
    ("f : exbar t . Int -> t ;\nf = exbar t . \\x -> x ;", "NoPackFound"),
    ("f : exbar t . Bool -> (t, Int) ;\n"
     "f = exbar t . \\b -> if b then pack (t = Int) (1, 2) else pack (t = Bool) (True, 2) ;",
     "AmbiguousWitness"),
    ("import prelude ;\nf : exbar t . Tree -> [t] -> (t, Int) ;\n"
     "f = exbar t . \\(Leaf v) (x : xs) -> pack (t = Int) (v, v) ;", "StrictMatchOnExistential"),
    ("import nosuchmodule ;\nmain : Int ;\nmain = 1 ;", "ImportError"),
])
def test_diagnostic_codes(src, code):
    assert codes(src) == ([code] if code else [])


def test_gadt_evaluator_typechecks():
    src = """
data Expr a where {
  IntE : Int -> Expr Int ;
  BoolE : Bool -> Expr Bool ;
  Add : Expr Int -> Expr Int -> Expr Int ;
  If : forall b . Expr Bool -> Expr b -> Expr b -> Expr b
} ;
evalE : forall a . Expr a -> a ;
evalE (IntE n) = n ;
evalE (BoolE b) = b ;
evalE (Add x y) = evalE [Int] x + evalE [Int] y ;
evalE (If c t e) = if evalE [Bool] c then evalE [a] t else evalE [a] e ;
main : Int ;
main = evalE [Int] (If (BoolE True) (Add (IntE 1) (IntE 2)) (IntE 0)) ;
"""
    assert check_src(src).ok
    wrong = src.replace("evalE (BoolE b) = b ;", "evalE (BoolE b) = 0 ;")
    assert codes(wrong) == ["TypeMismatch"]


def test_own_definitions_shadow_imports():
    assert check_src("import prelude ;\ninsert : Int ;\ninsert = 4 ;\nmain : Int ;\nmain = insert ;").ok
