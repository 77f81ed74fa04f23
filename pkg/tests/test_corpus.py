from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lazyf.corpus import (
    GOLDEN_DIR, INVENTORY, MODES, Bin, CorpusCase, Leaf, Runner, coverage_audit, from_data,
    gen_tree, leaves, load_manifest, oracle_repmin, oracle_sort, refill, shape, size,
    sort_invariants, to_data,
)

CASES = load_manifest()
RUNNER = Runner(trees=25)


def test_manifest_covers_inventory():
    assert coverage_audit(CASES) == []
    assert {c.mode for c in CASES} <= set(MODES)
    listed = {c.path for c in CASES}
    assert all(f in listed for files in INVENTORY.values() for f in files)


def test_golden_files_exist():
    for c in CASES:
        if c.mode == "run":
            assert (GOLDEN_DIR.parent / c.expectation).is_file()


def test_audit_flags_gaps(tmp_path):
    assert coverage_audit([]) != []
    partial = [c for c in CASES if c.path != "st.lzf"]
    assert any("st.lzf" in p for p in coverage_audit(partial))
    assert any("missing" in p for p in coverage_audit(CASES + [CorpusCase("nope.lzf", "run", "x")]))


def test_unknown_mode_rejected(tmp_path):
    path = tmp_path / "m.tsv"
    path.write_text("path\tmode\texpectation\tmax_steps\nrepmin.lzf\tbogus\tx\t\n")
    with pytest.raises(ValueError):
        load_manifest(path)


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_manifest_case(case):
    r = RUNNER.run(case)
    assert r.passed, r.detail


def test_wrong_expectation_fails():
    case = CorpusCase("safety.lzf", "check-fail", "TypeMismatch")
    assert not RUNNER.run(case).passed


def test_oracles_by_hand():
    t = Bin(Leaf(3), Bin(Leaf(1), Leaf(7)))
    assert oracle_repmin(t) == Bin(Leaf(1), Bin(Leaf(1), Leaf(1)))
    assert oracle_sort(t) == Bin(Leaf(1), Bin(Leaf(3), Leaf(7)))
    assert sort_invariants(t, oracle_sort(t)) == []
    assert set(sort_invariants(t, Bin(Leaf(3), Leaf(1)))) == {"shape changed", "leaves not sorted",
                                                             "leaf multiset changed"}


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 8))
def test_generator_properties(seed, depth):
    t, literal = gen_tree(seed, depth)
    assert gen_tree(seed, depth)[0] == t
    assert from_data(to_data(t)) == t
    assert all(0 <= v < 100 for v in leaves(t))
    assert size(t) == 2 * len(leaves(t)) - 1
    assert shape(refill(t, range(len(leaves(t))))) == shape(t)

    def depth_of(x):
        return 1 if isinstance(x, Leaf) else 1 + max(depth_of(x.left), depth_of(x.right))

    assert depth_of(t) <= depth


def test_generator_rejects_bad_depth():
    with pytest.raises(ValueError):
        gen_tree(0, 0)
