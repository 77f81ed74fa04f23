"""Acceptance criteria, one test each; every test prints a PASS or FAIL line.

Run ``pytest -v tests/test_acceptance.py`` (the summary lines are repeated at
the end of the session) or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import shutil
import subprocess
import sys
import time

import pytest

from lazyf.corpus import (
    CORPUS_DIR, Runner, from_data, gen_tree, input_match_counts, leaves, oracle_identity,
    oracle_repmin, oracle_sort, size, sort_invariants, to_data,
)
from lazyf.diagnostics import StepLimitExceeded
from lazyf.evaluator import EvalConfig, eval_call, eval_main
from lazyf.loader import Loader
from lazyf.parser import parse_type
from lazyf.types import Arrow, Packed, TCon, alpha_equal, eliminate_exbar

RESULTS: dict = {}
TREES = [gen_tree(seed, 8)[0] for seed in range(200)]
loader = Loader()


def _record(n: int, ok: bool, what: str, detail: str = "") -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {what}" + (f" ({detail})" if detail else "")
    RESULTS[n] = line
    print(line)
    assert ok, line


def _cli(*args):
    exe = shutil.which("lazyf")
    cmd = [exe, *args] if exe else [sys.executable, "-m", "lazyf.cli", *args]
    return subprocess.run(cmd, capture_output=True, text=True, timeout=120)


def _checked(name):
    res = loader.check_file(CORPUS_DIR / name)
    assert res.ok, [d.format() for d in res.diagnostics]
    return res


def test_1_st_demo_value():
    t0 = time.perf_counter()
    proc = _cli("run", str(CORPUS_DIR / "st_demo.lzf"))
    elapsed = time.perf_counter() - t0
    ok = proc.returncode == 0 and proc.stdout == '("2", 5)\n' and elapsed < 1.0
    _record(1, ok, "st_demo prints (\"2\", 5)", f"got {proc.stdout.strip()!r} in {elapsed:.2f}s")


def test_2_laziness_contrast():
    budget = EvalConfig(max_steps=10**6)
    lazy = eval_main(_checked("idtree_inf.lzf"), budget)
    try:
        out = eval_main(_checked("idtree_twophase.lzf"), EvalConfig(max_steps=10**6)).text
        twophase = f"terminated with {out}"
    except StepLimitExceeded:
        twophase = "StepLimitExceeded"
    ok = lazy.text == '"Bin"' and lazy.steps <= 10**6 and twophase == "StepLimitExceeded"
    _record(2, ok, "exbar idTree terminates on an infinite tree, the two-phase version does not",
            f"lazy {lazy.text} in {lazy.steps} steps; two-phase {twophase}")


def test_3_traversal_counts():
    expected = {"repmin_strict.lzf": ("repmin", 2), "repmin.lzf": ("repmin", 1), "repmin2.lzf": ("repmin2", 1)}
    bad = []
    for name, (fn, n) in expected.items():
        res = _checked(name)
        for t in TREES:
            counts = input_match_counts(res, fn, t, EvalConfig(counters_enabled=True))
            if len(counts) != size(t) or any(c != n for c in counts):
                bad.append(f"{name} on a tree of size {size(t)}")
                break
    _record(3, not bad, "match counts per input Tree cell: strict 2, circular 1", "; ".join(bad))


def _outputs(name, fn):
    res = _checked(name)
    return [from_data(eval_call(res, fn, [to_data(t)]).value) for t in TREES]


def test_4_oracle_equivalence():
    mismatches = {}
    for name, fn in (("repmin.lzf", "repmin"), ("repmin2.lzf", "repmin2")):
        mismatches[name] = sum(o != oracle_repmin(t) for t, o in zip(TREES, _outputs(name, fn)))
    for name in ("idtree.lzf", "idtree_annot.lzf"):
        mismatches[name] = sum(o != oracle_identity(t) for t, o in zip(TREES, _outputs(name, "idTree")))
    for name in ("sorttree_list.lzf", "sorttree_prod.lzf"):
        mismatches[name] = sum(bool(sort_invariants(t, o)) or o != oracle_sort(t)
                               for t, o in zip(TREES, _outputs(name, "sortTree")))
    bad = {k: v for k, v in mismatches.items() if v}
    _record(4, not bad, f"repmin, idTree and sortTree agree with the oracles on {len(TREES)} trees",
            ", ".join(f"{k}: {v} mismatches" for k, v in bad.items()))


def test_5_typing_derivation():
    proc = _cli("types", str(CORPUS_DIR / "idtree_annot.lzf"))
    line = "idTree' : exbar t_vs . Tree -> t_vs -> (t_vs, Tree)"
    listed = proc.returncode == 0 and line in proc.stdout.splitlines()
    res = _checked("idtree_annot.lzf")
    nu = res.globals.register("nu", None, "acceptance")
    derived = eliminate_exbar(res.types["idTree'"], nu)
    target = Arrow(TCon("Tree"), Arrow(nu, Packed("t_vs", nu, parse_type("(t_vs, Tree)"))))
    _record(5, listed and alpha_equal(derived, target),
            "types reports idTree' and its elimination matches the derivation", f"eliminated: {derived}")


def test_6_safety_rejection():
    got = {name: sorted({d.code for d in loader.check_file(CORPUS_DIR / name).diagnostics})
           for name in ("safety.lzf", "idtree_bad.lzf")}
    ok = got == {"safety.lzf": ["UnpackOfFunction"], "idtree_bad.lzf": ["TypeMismatch"]}
    _record(6, ok, "safety.lzf and idtree_bad.lzf rejected with exact codes", str(got))


def _index_walk_lookup(depth, heap):
    for _ in range(depth):
        heap = heap[1]
    return heap[0]


def _index_walk_modify(f, depth, heap):
    if depth == 0:
        return (f(heap[0]), heap[1])
    return (heap[0], _index_walk_modify(f, depth - 1, heap[1]))


def _show(v):
    if v == ():
        return "()"
    if isinstance(v, tuple):
        return f"({_show(v[0])}, {_show(v[1])})"
    return str(v)


def test_7_stref_mechanics():
    cases = [
        ("Int", "rlookup RZ (5, ())", _index_walk_lookup(0, (5, ()))),
        ("Int", "rlookup (RS RZ) (1, (2, ()))", _index_walk_lookup(1, (1, (2, ())))),
        ("(Int, (Int, ()))", "rmodify (\\n -> n + 1) (RS RZ) (1, (2, ()))",
         _index_walk_modify(lambda n: n + 1, 1, (1, (2, ())))),
    ]
    assert [c[2] for c in cases] == [5, 2, (1, (3, ()))]
    bad = []
    for ty, expr, expected in cases:
        res = loader.check_text(f"import st ;\nmain : {ty} ;\nmain = {expr} ;\n", "<acceptance>")
        got = eval_main(res).text if res.ok else "ill-typed"
        if got != _show(expected):
            bad.append(f"{expr} = {got}, expected {_show(expected)}")
    _record(7, not bad, "rlookup and rmodify agree with an index walk", "; ".join(bad))


def test_8_property_suites():
    import test_evaluator
    import test_parser
    import test_types

    suites = {
        "alpha-equivalence (1000 types)": [test_types.test_alpha_equal_is_an_equivalence,
                                           test_types.test_alpha_equal_matches_nameless_oracle_on_variants],
        "elimination round-trip (500 types)": [test_types.test_elimination_round_trip],
        "memoization (1000 thunks)": [test_evaluator.test_second_force_is_step_free],
        "parser fixed point (corpus)": [lambda: [test_parser.test_round_trip_fixed_point(p)
                                                 for p in test_parser.CORPUS_FILES]],
    }
    failed = []
    for label, fns in suites.items():
        try:
            for fn in fns:
                fn()
        except Exception as err:  # a falsified property
            failed.append(f"{label}: {type(err).__name__}")
    _record(8, not failed, "property suites hold", "; ".join(failed))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
