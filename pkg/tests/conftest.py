from __future__ import annotations

import sys

import pytest

from lazyf.evaluator import EvalConfig, eval_main
from lazyf.loader import CORPUS_DIR, Loader


def check_src(text: str, file: str = "<test>"):
    return Loader().check_text(text, file)


def codes(text: str):
    return sorted({d.code for d in check_src(text).diagnostics})


def run_src(text: str, **cfg) -> str:
    res = check_src(text)
    assert res.ok, [d.format() for d in res.diagnostics]
    return eval_main(res, EvalConfig(**cfg)).text


@pytest.fixture
def corpus_dir():
    return CORPUS_DIR


@pytest.fixture(scope="session")
def loader():
    return Loader()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
