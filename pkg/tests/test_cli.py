from __future__ import annotations

import json
import subprocess
import sys

import pytest

from lazyf.cli import main
from lazyf.loader import CORPUS_DIR


def _main(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_st_demo(capsys):
    code, out, _ = _main(capsys, "run", str(CORPUS_DIR / "st_demo.lzf"))
    assert (code, out) == (0, '("2", 5)\n')


def test_check_lists_types(capsys):
    code, out, _ = _main(capsys, "check", str(CORPUS_DIR / "repmin.lzf"))
    assert code == 0 and "repmin : Tree -> Tree" in out.splitlines()


def test_types_lists_constructors(capsys):
    code, out, _ = _main(capsys, "types", str(CORPUS_DIR / "idtree_annot.lzf"))
    assert code == 0
    assert "idTree' : exbar t_vs . Tree -> t_vs -> (t_vs, Tree)" in out.splitlines()


def test_json_check(capsys):
    code, out, _ = _main(capsys, "check", "--json", str(CORPUS_DIR / "repmin.lzf"))
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and {"name": "repmin", "type": "Tree -> Tree"} in rows


def test_type_error_exit_1(capsys):
    code, _, err = _main(capsys, "check", str(CORPUS_DIR / "safety.lzf"))
    assert code == 1 and "error[UnpackOfFunction]" in err


def test_type_error_json(capsys):
    code, out, _ = _main(capsys, "check", "--json", str(CORPUS_DIR / "idtree_bad.lzf"))
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 1 and rows and rows[0]["code"] == "TypeMismatch"


def test_parse_error_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.lzf"
    bad.write_text("main : Int ;\nmain = (1, ;\n")
    code, _, err = _main(capsys, "run", str(bad))
    assert code == 2 and "bad.lzf:2" in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = _main(capsys, "check", str(tmp_path / "absent.lzf"))
    assert code == 2 and "cannot read" in err


def test_usage_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_runtime_error_exit_3(capsys, tmp_path):
    f = tmp_path / "loop.lzf"
    f.write_text("main : Int ;\nmain = let { x = x + 1 } in x ;\n")
    code, _, err = _main(capsys, "run", str(f))
    assert code == 3 and "CycleDetected" in err
    code, out, _ = _main(capsys, "run", "--json", str(f))
    assert code == 3 and json.loads(out)["error"] == "CycleDetected"


def test_max_steps_flag_and_env(capsys, monkeypatch):
    path = str(CORPUS_DIR / "idtree_twophase.lzf")
    code, _, err = _main(capsys, "run", "--max-steps", "5000", path)
    assert code == 3 and "StepLimitExceeded" in err
    monkeypatch.setenv("LAZYF_MAX_STEPS", "5000")
    code, _, err = _main(capsys, "run", path)
    assert code == 3 and "StepLimitExceeded" in err


def test_trace_and_counters_go_to_stderr(capsys):
    code, out, err = _main(capsys, "run", "--trace", "--counters", str(CORPUS_DIR / "repmin.lzf"))
    assert code == 0 and out == "Bin (Leaf 1) (Bin (Leaf 1) (Leaf 1))\n"
    assert "force cell#" in err and "allocs=" in err


def test_json_run_with_counters(capsys):
    code, out, _ = _main(capsys, "run", "--json", "--counters", str(CORPUS_DIR / "repmin.lzf"))
    obj = json.loads(out)
    assert code == 0 and obj["value"].startswith("Bin") and obj["steps"] > 0 and obj["counters"]


def test_console_script_corpus():
    proc = subprocess.run([sys.executable, "-m", "lazyf.cli", "corpus", "--seed", "3"],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "FAIL" not in proc.stdout
    assert proc.stdout.strip().splitlines()[-1].endswith("cases passed")
