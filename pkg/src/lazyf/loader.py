"""Reading, parsing and checking source files, with import resolution.

An ``import M ;`` is looked up as ``M.lzf`` next to the importing file, then
in each extra search directory, then in the bundled corpus directory.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from .checker import CheckResult, check_program
from .diagnostics import CompileError, Diagnostic, NO_SPAN
from .parser import parse_program
from .syntax import Import, Program

CORPUS_DIR = Path(__file__).resolve().parent / "corpus"


def read_source(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def parse_file(path) -> Program:
    return parse_program(read_source(path), str(path))


class Loader:
    def __init__(self, search_path: Iterable = ()):
        self.search_path: List[Path] = [Path(p) for p in search_path]
        self._cache: Dict[str, CheckResult] = {}
        self._active: List[str] = []

    def locate(self, module: str, from_file: Optional[str]) -> Optional[Path]:
        dirs = []
        if from_file and not from_file.startswith("<"):
            dirs.append(Path(from_file).resolve().parent)
        dirs += self.search_path
        dirs.append(CORPUS_DIR)
        for d in dirs:
            candidate = d / f"{module}.lzf"
            if candidate.is_file():
                return candidate.resolve()
        return None

    def import_module(self, imp: Import, from_file: Optional[str]) -> CheckResult:
        path = self.locate(imp.module, from_file)
        if path is None:
            raise CompileError(Diagnostic("ImportError", f"cannot find module '{imp.module}'", imp.span))
        key = str(path)
        if key in self._active:
            chain = " -> ".join(Path(p).stem for p in self._active[self._active.index(key):] + [key])
            raise CompileError(Diagnostic("ImportError", f"import cycle: {chain}", imp.span))
        result = self.check_file(path)
        if not result.ok:
            raise CompileError(Diagnostic(
                "ImportError", f"module '{imp.module}' does not type-check "
                f"({len(result.diagnostics)} error(s))", imp.span))
        return result

    def check_file(self, path) -> CheckResult:
        key = str(Path(path).resolve())
        if key in self._cache:
            return self._cache[key]
        self._active.append(key)
        try:
            result = self.check_text(read_source(path), str(path))
        finally:
            self._active.pop()
        self._cache[key] = result
        return result

    def check_text(self, text: str, file: str = "<input>") -> CheckResult:
        """Parse and check; parse errors propagate as ParseError."""
        return check_program(parse_program(text, file), self)


def check_file(path, search_path: Iterable = ()) -> CheckResult:
    return Loader(search_path).check_file(os.fspath(path))
