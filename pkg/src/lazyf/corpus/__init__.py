"""The bundled programs, host-side oracles and the manifest-driven runner.

The ``.lzf`` files in this directory double as the standard library: a
program may ``import prelude ;`` or ``import st ;`` from anywhere.
"""

from __future__ import annotations

import csv
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ..diagnostics import CompileError, EvalError
from ..evaluator import INPUT_SITE, Data, DataV, EvalConfig, eval_call, eval_main
from ..loader import Loader

CORPUS_DIR = Path(__file__).resolve().parent
MANIFEST = CORPUS_DIR / "manifest.tsv"
GOLDEN_DIR = CORPUS_DIR / "golden"

MODES = ("check-ok", "check-fail", "run", "run-fail", "run-property", "run-counter")

# Every program the corpus must contain, keyed by what it reproduces.
INVENTORY: Dict[str, Tuple[str, ...]] = {
    "tree type and list helpers": ("prelude.lzf",),
    "repmin, two traversals": ("repmin_strict.lzf",),
    "repmin, circular": ("repmin.lzf",),
    "repmin, shape-keeping function": ("repmin2.lzf",),
    "idTree without exbar (rejected)": ("idtree_bad.lzf",),
    "idTree computing the types first": ("idtree_twophase.lzf",),
    "idTree using exbar": ("idtree.lzf",),
    "annotated idTree": ("idtree_annot.lzf",),
    "infinite tree": ("idtree_inf.lzf",),
    "sorting using lists": ("sorttree_list.lzf",),
    "sorting using products": ("sorttree_prod.lzf",),
    "unpacking a function (rejected)": ("safety.lzf",),
    "value paired with its consumer": ("df_pair.lzf",),
    "state threads without references": ("st_v1.lzf",),
    "state threads with references": ("st.lzf",),
    "state thread example": ("st_demo.lzf",),
}


# --- host trees ----------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    value: int


@dataclass(frozen=True)
class Bin:
    left: "HostTree"
    right: "HostTree"


HostTree = Union[Leaf, Bin]


def _walk(t: HostTree) -> Iterator[HostTree]:
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        if isinstance(x, Bin):
            stack.append(x.right)
            stack.append(x.left)


def leaves(t: HostTree) -> List[int]:
    """Leaf values in prefix (left-to-right) order."""
    return [x.value for x in _walk(t) if isinstance(x, Leaf)]


def size(t: HostTree) -> int:
    return sum(1 for _ in _walk(t))


def shape(t: HostTree) -> str:
    return "".join("B" if isinstance(x, Bin) else "L" for x in _walk(t))


def refill(t: HostTree, values: Sequence[int]) -> HostTree:
    """Same shape as t, with the leaves taken from values in prefix order."""
    it = iter(values)

    def go(x: HostTree) -> HostTree:
        if isinstance(x, Leaf):
            return Leaf(next(it))
        return Bin(go(x.left), go(x.right))

    return go(t)


def to_literal(t: HostTree) -> str:
    """Object-language source for t."""
    if isinstance(t, Leaf):
        return f"Leaf {t.value}" if t.value >= 0 else f"Leaf ({t.value})"
    parts = []
    for sub in (t.left, t.right):
        s = to_literal(sub)
        parts.append(f"({s})")
    return "Bin " + " ".join(parts)


def to_data(t: HostTree) -> Data:
    if isinstance(t, Leaf):
        return Data("Leaf", (t.value,))
    return Data("Bin", (to_data(t.left), to_data(t.right)))


def from_data(v) -> HostTree:
    if isinstance(v, Data) and v.con == "Leaf" and len(v.args) == 1:
        return Leaf(v.args[0])
    if isinstance(v, Data) and v.con == "Bin" and len(v.args) == 2:
        return Bin(from_data(v.args[0]), from_data(v.args[1]))
    raise ValueError(f"not a tree: {v!r}")


def gen_tree(seed: int, max_depth: int) -> Tuple[HostTree, str]:
    """A deterministic pseudo-random tree and its source literal."""
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    rng = random.Random(seed)

    def go(depth: int) -> HostTree:
        if depth <= 1 or rng.random() < 0.3:
            return Leaf(rng.randrange(100))
        return Bin(go(depth - 1), go(depth - 1))

    t = go(max_depth)
    return t, to_literal(t)


# --- oracles ---------------------------------------------------------------


def oracle_repmin(t: HostTree) -> HostTree:
    m = min(leaves(t))
    return refill(t, [m] * len(leaves(t)))


def oracle_sort(t: HostTree) -> HostTree:
    return refill(t, sorted(leaves(t)))


def oracle_identity(t: HostTree) -> HostTree:
    return t


def oracle_st_demo() -> str:
    return '("2", 5)'


def sort_invariants(before: HostTree, after: HostTree) -> List[str]:
    """Violations of shape, order and multiset preservation."""
    problems = []
    if shape(before) != shape(after):
        problems.append("shape changed")
    out = leaves(after)
    if out != sorted(out):
        problems.append("leaves not sorted")
    if Counter(out) != Counter(leaves(before)):
        problems.append("leaf multiset changed")
    return problems


ORACLES: Dict[str, Callable[[HostTree], HostTree]] = {
    "repmin": oracle_repmin,
    "identity": oracle_identity,
    "sort": oracle_sort,
}


# --- manifest ----------------------------------------------------------------


@dataclass(frozen=True)
class CorpusCase:
    path: str
    mode: str
    expectation: str
    max_steps: Optional[int] = None

    @property
    def name(self) -> str:
        return f"{self.path} [{self.mode}]"

    @property
    def file(self) -> Path:
        return CORPUS_DIR / self.path


@dataclass
class CaseResult:
    case: CorpusCase
    passed: bool
    detail: str = ""


def load_manifest(path: Path = MANIFEST) -> List[CorpusCase]:
    cases = []
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter="\t") if r and not r[0].startswith("#")]
    if rows and rows[0][:3] == ["path", "mode", "expectation"]:
        rows = rows[1:]
    for r in rows:
        if r[1] not in MODES:
            raise ValueError(f"unknown corpus mode {r[1]!r} for {r[0]}")
        steps = int(r[3]) if len(r) > 3 and r[3].strip() else None
        cases.append(CorpusCase(r[0], r[1], r[2], steps))
    return cases


def coverage_audit(cases: Sequence[CorpusCase]) -> List[str]:
    """Problems with the manifest's coverage of the inventory (empty when complete)."""
    problems = []
    listed = {c.path for c in cases}
    if not cases:
        problems.append("manifest is empty")
    for what, files in INVENTORY.items():
        for f in files:
            if f not in listed:
                problems.append(f"{f} ({what}) has no manifest case")
    for c in cases:
        if not c.file.is_file():
            problems.append(f"{c.path} is listed but missing")
    return problems


# --- running ------------------------------------------------------------------


@dataclass
class Runner:
    seed: int = 0
    trees: int = 200
    depth: int = 8
    loader: Loader = field(default_factory=Loader)

    def inputs(self) -> List[HostTree]:
        return [gen_tree(self.seed + i, self.depth)[0] for i in range(self.trees)]

    def config(self, case: CorpusCase, **kw) -> EvalConfig:
        if case.max_steps is not None:
            kw["max_steps"] = case.max_steps
        return EvalConfig(**kw)

    def run(self, case: CorpusCase) -> CaseResult:
        try:
            return getattr(self, "_" + case.mode.replace("-", "_"))(case)
        except (CompileError, EvalError, OSError, ValueError) as err:
            return CaseResult(case, False, f"{type(err).__name__}: {err}")

    def _check_ok(self, case):
        res = self.loader.check_file(case.file)
        if not res.ok:
            return CaseResult(case, False, "; ".join(d.format() for d in res.diagnostics))
        if case.expectation not in ("", "-"):
            lines = [f"{k} : {v}" for k, v in res.types.items()]
            if case.expectation not in lines:
                return CaseResult(case, False, f"no line {case.expectation!r}")
        return CaseResult(case, True)

    def _check_fail(self, case):
        res = self.loader.check_file(case.file)
        codes = sorted({d.code for d in res.diagnostics})
        ok = codes == [case.expectation]
        return CaseResult(case, ok, f"diagnostics: {', '.join(codes) or 'none'}")

    def _run(self, case):
        res = self.loader.check_file(case.file)
        if not res.ok:
            return CaseResult(case, False, "does not type-check")
        expected = (CORPUS_DIR / case.expectation).read_text(encoding="utf-8").strip()
        out = eval_main(res, self.config(case)).text
        return CaseResult(case, out == expected, f"got {out}, expected {expected}")

    def _run_fail(self, case):
        res = self.loader.check_file(case.file)
        if not res.ok:
            return CaseResult(case, False, "does not type-check")
        try:
            out = eval_main(res, self.config(case)).text
        except EvalError as err:
            return CaseResult(case, type(err).__name__ == case.expectation, f"{type(err).__name__}: {err}")
        return CaseResult(case, False, f"terminated with {out}")

    def _run_property(self, case):
        """expectation ``oracle:function``; compared on every generated tree."""
        oracle_id, fn = case.expectation.split(":")
        oracle = ORACLES[oracle_id]
        res = self.loader.check_file(case.file)
        if not res.ok:
            return CaseResult(case, False, "does not type-check")
        bad = 0
        first = ""
        for t in self.inputs():
            out = from_data(eval_call(res, fn, [to_data(t)], self.config(case)).value)
            problems = [] if out == oracle(t) else ["differs from oracle"]
            if oracle_id == "sort":
                problems += sort_invariants(t, out)
            if problems:
                bad += 1
                first = first or f"{to_literal(t)}: {', '.join(problems)}"
        return CaseResult(case, bad == 0, f"{bad} mismatches of {self.trees}" + (f"; first {first}" if first else ""))

    def _run_counter(self, case):
        """expectation ``function:n``: every input Tree cell is scrutinised exactly n times."""
        fn, n = case.expectation.split(":")
        n = int(n)
        res = self.loader.check_file(case.file)
        if not res.ok:
            return CaseResult(case, False, "does not type-check")
        bad = 0
        seen = Counter()
        for t in self.inputs():
            counts = input_match_counts(res, fn, t, self.config(case, counters_enabled=True))
            seen.update(counts)
            if len(counts) != size(t) or any(c != n for c in counts):
                bad += 1
        return CaseResult(case, bad == 0, f"{bad} trees off; match counts seen {dict(sorted(seen.items()))}")

    def run_all(self, cases: Sequence[CorpusCase]) -> List[CaseResult]:
        return [self.run(c) for c in cases]


def input_match_counts(check_result, fn: str, t: HostTree, cfg: EvalConfig) -> List[int]:
    """match_count of every Tree cell of the input after evaluating ``fn t``."""
    result = eval_call(check_result, fn, [to_data(t)], cfg)
    return [c.match_count for c in result.cells
            if c.site == INPUT_SITE and isinstance(c.value, DataV) and c.value.con in ("Leaf", "Bin")]
