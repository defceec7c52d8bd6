"""Criteria 1-10, each at its stated tolerance; one PASS/FAIL line per criterion."""

import subprocess
import sys
import time

import pytest

from afideal import acceptance
from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", [num for num, _, _ in acceptance.CRITERIA])
def test_criterion(number):
    result = acceptance.run_criterion(number)
    ACCEPTANCE_LINES.append(result.line())
    print(result.line())
    assert result.passed, result.detail


def test_criterion_10_verify_end_to_end():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "afideal", "verify"], capture_output=True, text=True, timeout=300)
    elapsed = time.perf_counter() - t0
    ok = proc.returncode == 0 and elapsed < 300 and "9/9 criteria passed" in proc.stdout
    mark = "PASS" if ok else "FAIL"
    line = f"[{mark}] 10  {'verify end to end':<32} {elapsed:7.2f}s  exit {proc.returncode}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, proc.stdout + proc.stderr
