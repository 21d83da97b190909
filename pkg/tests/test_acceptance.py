"""The acceptance suite: every criterion at its stated tolerance.

Each test records a one-line verdict; the lines are printed together in the
terminal summary (see ``conftest.py``) as well as inline with ``-s``.
"""
import os
import subprocess
import sys

import pytest

from orlicz_chord import acceptance
from orlicz_chord.report import strip_wall_time

SEED = 0
VERDICTS = []


def record(line):
    VERDICTS.append(line)
    print(line)


@pytest.mark.parametrize("fn", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(fn):
    result = fn(SEED)
    record(result.line())
    assert result.passed, result.detail


def test_criterion_9_selftest_determinism(tmp_path):
    outs = [tmp_path / "run1.csv", tmp_path / "run2.csv"]
    env = {**os.environ, "ORLICZ_CHORD_THREADS": "1"}
    procs = [
        subprocess.Popen([sys.executable, "-m", "orlicz_chord.cli", "selftest", "--seed", str(SEED), "--out", str(o)],
                         stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, env=env)
        for o in outs
    ]
    codes = [p.wait(timeout=900) for p in procs]
    a, b = (o.read_bytes().decode("utf-8") for o in outs)
    same = strip_wall_time(a) == strip_wall_time(b)
    ok = same and codes == [0, 0] and a.count("\r\n") > 9
    record(f"[{'PASS' if ok else 'FAIL'}] criterion 9: selftest determinism -- "
           f"exit codes {codes}, {a.count(chr(10)) - 1} rows, CSV identical modulo wall_time: {same}")
    assert ok
