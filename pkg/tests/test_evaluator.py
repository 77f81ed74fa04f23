from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import check_src, run_src
from lazyf.diagnostics import CycleDetected, PatternMatchFailure, PrimitiveError, StepLimitExceeded
from lazyf.evaluator import (
    Data, EvalConfig, Env, Eraser, LitV, Machine, eval_call, eval_main,
)
from lazyf.loader import CORPUS_DIR, Loader
from lazyf.parser import parse_expr


def _stepped(text, **cfg):
    res = check_src(text)
    assert res.ok, [d.format() for d in res.diagnostics]
    return eval_main(res, EvalConfig(**cfg))


# --- random arithmetic thunks --------------------------------------------------

arith = st.recursive(
    st.integers(0, 50).map(lambda n: (str(n), n)),
    lambda sub: st.one_of(
        st.tuples(sub, sub).map(lambda p: (f"({p[0][0]} + {p[1][0]})", p[0][1] + p[1][1])),
        st.tuples(sub, sub).map(lambda p: (f"({p[0][0]} * {p[1][0]})", p[0][1] * p[1][1])),
        st.tuples(sub, sub).map(lambda p: (f"(let {{ x = {p[0][0]} }} in x + x - {p[1][0]})",
                                           2 * p[0][1] - p[1][1])),
    ),
    max_leaves=10,
)


@settings(max_examples=1000, deadline=None)
@given(arith)
def test_second_force_is_step_free(case):
    text, expected = case
    m = Machine(EvalConfig())
    cell = m.alloc(Eraser(lambda n: 0).term(parse_expr(text)), Env({}))
    first = m.force(cell)
    steps = m.steps
    assert isinstance(first, LitV) and first.value == expected
    assert m.force(cell) is first
    assert m.steps == steps


def test_shared_binding_evaluated_once():
    pre = "import prelude ;\nlen : forall a . [a] -> Int ;\nlen [] = 0 ;\nlen (_ : xs) = 1 + len [a] xs ;\n"
    shared = _stepped(pre + "main : Int ;\nmain = let { n = len [Int] (1 : 2 : 3 : 4 : []) } in n + n + n ;")
    unshared = _stepped(pre + "main : Int ;\nmain = len [Int] (1 : 2 : 3 : 4 : []) + len [Int] (1 : 2 : 3 : 4 : []) "
                        "+ len [Int] (1 : 2 : 3 : 4 : []) ;")
    assert shared.text == unshared.text == "12"
    assert shared.steps < unshared.steps


def test_unused_argument_is_never_forced():
    assert run_src("k : Int -> Int -> Int ;\nk x y = x ;\nmain : Int ;\nmain = k 1 (error \"boom\") ;") == "1"


def test_black_hole():
    with pytest.raises(CycleDetected):
        _stepped("main : Int ;\nmain = let { x = x + 1 } in x ;")


def test_step_limit():
    src = "loop : Int -> Int ;\nloop n = loop (n + 1) ;\nmain : Int ;\nmain = loop 0 ;"
    with pytest.raises(StepLimitExceeded):
        _stepped(src, max_steps=10_000)


def test_step_limit_from_environment(monkeypatch):
    monkeypatch.setenv("LAZYF_MAX_STEPS", "123")
    assert EvalConfig.from_env().max_steps == 123
    assert EvalConfig.from_env(max_steps=7).max_steps == 7
    with pytest.raises(ValueError):
        EvalConfig(max_steps=0)


def test_deep_recursion_does_not_hit_host_stack():
    src = ("count : Int -> Int ;\ncount n = if n == 0 then 0 else 1 + count (n - 1) ;\n"
           "main : Int ;\nmain = count 200000 ;")
    assert run_src(src) == "200000"


def test_choice_tries_alternatives_in_order():
    src = ("f : Int -> Int ;\nf = (\\0 -> 10) ||| (\\n -> n) ||| (\\1 -> 99) ;\n"
           "main : (Int, Int, Int) ;\nmain = (f 0, f 1, f 5) ;")
    assert run_src(src) == "(10, 1, 5)"


def test_pattern_match_failure():
    src = "import prelude ;\nhd : Tree -> Int ;\nhd (Leaf v) = v ;\nmain : Int ;\nmain = hd (Bin (Leaf 1) (Leaf 2)) ;"
    with pytest.raises(PatternMatchFailure):
        _stepped(src)


def test_primitive_error():
    with pytest.raises(PrimitiveError):
        _stepped("main : Int ;\nmain = error \"no\" ;")


def test_lazy_pattern_defers_the_match():
    src = ("f : (Int, Int) -> Int ;\nf ~(a, b) = 7 ;\nmain : Int ;\nmain = f (error \"x\") ;")
    assert run_src(src) == "7"


def test_infinite_structure_consumed_lazily():
    src = ("import prelude ;\ntake : Int -> [Int] -> [Int] ;\ntake 0 _ = [] ;\n"
           "take n (x : xs) = x : take (n - 1) xs ;\n"
           "main : [Int] ;\nmain = let { ones = 1 : ones } in take 3 ones ;")
    assert run_src(src) == "[1, 1, 1]"


@pytest.mark.parametrize("ty, expr, shown", [
    ("Bool", "1 < 2", "True"),
    ("Char", "'x'", "'x'"),
    ("String", "\"a\\nb\"", "\"a\\nb\""),
    ("(Int, Bool)", "(3, False)", "(3, False)"),
    ("()", "()", "()"),
    ("String", "show 42", "\"42\""),
    ("Int", "ord 'a'", "97"),
])
def test_rendering(ty, expr, shown):
    assert run_src(f"main : {ty} ;\nmain = {expr} ;") == shown


def test_trace_lines():
    lines = []
    out = _stepped("main : Int ;\nmain = let { x = 1 + 2 } in x * x ;",
                   trace_enabled=True, trace=lines.append)
    assert out.text == "9" and lines
    pat = re.compile(r"^force cell#\d+ \(site \S+:\d+\) -> .+$")
    assert all(pat.match(line) for line in lines), lines


def test_counters_report_constructor_sites():
    res = Loader().check_file(CORPUS_DIR / "repmin.lzf")
    out = eval_main(res, EvalConfig(counters_enabled=True))
    assert out.text == "Bin (Leaf 1) (Bin (Leaf 1) (Leaf 1))"
    lines = out.counter_lines()
    assert lines and all(re.match(r"^site \S+:\d+: allocs=\d+ matches=\d+$", l) for l in lines)


def test_eval_call_with_host_values():
    res = Loader().check_file(CORPUS_DIR / "repmin.lzf")
    tree = Data("Bin", (Data("Leaf", (4,)), Data("Leaf", (2,))))
    out = eval_call(res, "repmin", [tree])
    assert out.value == Data("Bin", (Data("Leaf", (2,)), Data("Leaf", (2,))))


def test_fuzzed_mutations_run_without_shape_errors():
    """Corpus mains with their input swapped for random trees: well-typed ones run cleanly."""
    from lazyf.corpus import gen_tree, to_literal

    loader = Loader()
    ran = rejected = 0
    for k, name in enumerate(("repmin.lzf", "repmin2.lzf", "repmin_strict.lzf", "idtree.lzf",
                              "idtree_annot.lzf", "idtree2.lzf", "sorttree_list.lzf", "sorttree_prod.lzf")):
        src = (CORPUS_DIR / name).read_text(encoding="utf-8")
        head, sep, main = src.rpartition("main =")
        fn = main.split()[0]
        for i in range(30):
            literal = to_literal(gen_tree(1000 * k + i, 6)[0])
            if i % 6 == 5:  # break the input's type: a Bool where an Int leaf goes
                literal = literal.replace("Leaf ", "Leaf True `min` ", 1)
            res = loader.check_text(f"{head}{sep} {fn} ({literal}) ;\n", str(CORPUS_DIR / name))
            if res.ok:
                eval_main(res, EvalConfig(max_steps=10**6))
                ran += 1
            else:
                rejected += 1
    assert ran == 200 and rejected == 40
