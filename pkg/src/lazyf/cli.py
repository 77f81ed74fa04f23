"""Command-line driver.

Exit codes: 0 success, 1 type or corpus failure, 2 usage, parse or I/O
error, 3 runtime error.  Program output goes to stdout; diagnostics,
traces and counter reports go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .diagnostics import CompileError, EvalError, ParseError
from .evaluator import EvalConfig, eval_main
from .loader import Loader

EXIT_OK, EXIT_SEMANTIC, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


def _emit(obj, as_json: bool, text: str) -> None:
    print(json.dumps(obj, sort_keys=True) if as_json else text)


def _load(args):
    """Parse and check; returns (result, exit code or None)."""
    try:
        res = Loader().check_file(args.file)
    except OSError as err:
        print(f"lazyf: cannot read {args.file}: {err.strerror or err}", file=sys.stderr)
        return None, EXIT_USAGE
    except ParseError as err:
        _report(err.diagnostics, args.json)
        return None, EXIT_USAGE
    if not res.ok:
        _report(res.diagnostics, args.json)
        return None, EXIT_SEMANTIC
    return res, None


def _report(diagnostics, as_json: bool) -> None:
    for d in diagnostics:
        if as_json:
            print(json.dumps(d.to_json(), sort_keys=True))
        else:
            print(d.format(), file=sys.stderr)


def cmd_check(args) -> int:
    res, code = _load(args)
    if res is None:
        return code
    for name, t in res.types.items():
        _emit({"name": name, "type": str(t)}, args.json, f"{name} : {t}")
    return EXIT_OK


def cmd_types(args) -> int:
    res, code = _load(args)
    if res is None:
        return code
    for d in res.program.datas:
        for c in d.ctors:
            _emit({"name": c.name, "type": str(c.sig), "kind": "constructor"}, args.json, f"{c.name} : {c.sig}")
    for name, t in res.types.items():
        _emit({"name": name, "type": str(t), "kind": "binding"}, args.json, f"{name} : {t}")
    return EXIT_OK


def cmd_run(args) -> int:
    res, code = _load(args)
    if res is None:
        return code
    if res.program.main is None:
        print(f"lazyf: {args.file} defines no main", file=sys.stderr)
        return EXIT_SEMANTIC
    kw = dict(counters_enabled=args.counters, trace_enabled=args.trace,
              trace=lambda line: print(line, file=sys.stderr))
    if args.max_steps is not None:
        kw["max_steps"] = args.max_steps
    try:
        cfg = EvalConfig.from_env(**kw)
    except ValueError as err:
        print(f"lazyf: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        out = eval_main(res, cfg)
    except EvalError as err:
        if args.json:
            print(json.dumps({"error": err.code, "message": str(err)}, sort_keys=True))
        else:
            print(f"error[{err.code}]: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    counters = out.counter_lines() if args.counters else []
    if args.json:
        obj = {"value": out.text, "steps": out.steps}
        if args.counters:
            obj["counters"] = [{"site": str(s), "allocs": a, "matches": m} for s, a, m in out.counters()]
        print(json.dumps(obj, sort_keys=True))
    else:
        print(out.text)
    for line in counters:
        print(line, file=sys.stderr)
    return EXIT_OK


def cmd_corpus(args) -> int:
    from .corpus import Runner, coverage_audit, load_manifest

    try:
        cases = load_manifest()
    except (OSError, ValueError) as err:
        print(f"lazyf: cannot read the corpus manifest: {err}", file=sys.stderr)
        return EXIT_USAGE
    runner = Runner(seed=args.seed)
    failed = passed = 0
    for problem in coverage_audit(cases):
        failed += 1
        _emit({"case": "coverage", "passed": False, "detail": problem}, args.json, f"FAIL  coverage: {problem}")
    for case in cases:
        r = runner.run(case)
        failed += not r.passed
        passed += r.passed
        _emit({"case": case.name, "passed": r.passed, "detail": r.detail}, args.json,
              f"{'PASS' if r.passed else 'FAIL'}  {case.name}" + ("" if r.passed else f": {r.detail}"))
    if not args.json:
        print(f"{passed}/{len(cases)} cases passed")
    return EXIT_SEMANTIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lazyf", description="Typecheck and run LazyF programs.")
    sub = p.add_subparsers(dest="command", required=True)
    commands = (("check", cmd_check, "type-check a file and list binding types"),
                ("types", cmd_types, "list constructor and binding signatures"),
                ("run", cmd_run, "type-check, then evaluate main"))
    for name, fn, helptext in commands:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("file")
        sp.add_argument("--json", action="store_true", help="line-delimited JSON on stdout")
        sp.add_argument("--trace", action="store_true", help="log every thunk force to stderr")
        sp.add_argument("--counters", action="store_true", help="report match counts per allocation site")
        sp.add_argument("--max-steps", type=int, metavar="N", help="evaluation step budget")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("corpus", help="run every case of the bundled corpus manifest")
    sp.add_argument("--seed", type=int, default=0, metavar="N", help="first seed for generated trees")
    sp.add_argument("--json", action="store_true", help="line-delimited JSON on stdout")
    sp.set_defaults(func=cmd_corpus)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CompileError as err:  # e.g. an unreadable import surfaced late
        _report(err.diagnostics, getattr(args, "json", False))
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
