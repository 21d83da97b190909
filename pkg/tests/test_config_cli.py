import csv
import io
import math
import subprocess
import sys
import textwrap
from pathlib import Path

import pytest

from orlicz_chord.cli import main
from orlicz_chord.config import parse_text
from orlicz_chord.errors import ConfigError

SCENES = Path(__file__).resolve().parent.parent / "scenes"


def write(tmp_path, text, name="scene.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text), encoding="utf-8")
    return path


def read_rows(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text(encoding="utf-8"))))


def test_unit_ball_volume(tmp_path):
    cfg = write(tmp_path, """
        dimension: 3
        rule: gauss3:48x96
        bodies:
          B: {ball: {radius: 1}}
        tasks:
          - id: vol
            integrate: {functional: chord, body: B, i: 0}
        """)
    out = tmp_path / "out.csv"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    (row,) = read_rows(out)
    assert row["task_id"] == "vol"
    assert abs(float(row["value"]) - 4 * math.pi / 3) < 1e-10
    assert round(float(row["value"]), 7) == 4.1887902


def test_dilate_suite_all_equalities(tmp_path):
    out = tmp_path / "eq.csv"
    assert main(["run", str(SCENES / "dilate_equality.yaml"), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 10
    assert all(r["equality_flag"] == "true" and r["status"] == "ok" for r in rows)


def test_bad_gauge_parameter(tmp_path, capsys):
    cfg = write(tmp_path, """
        dimension: 3
        gauges:
          g: {family: power, p: 0.5}
        """)
    assert main(["run", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "p must be ≥ 1" in err
    assert "line 4" in err and "gauges.g" in err


def test_config_error_has_line_and_field():
    text = textwrap.dedent("""
        dimension: 3
        bodies:
          K: {ball: {radius: 1}}
          L:
            dilate:
              factor: -2
              body: K
        """)
    with pytest.raises(ConfigError) as info:
        parse_text(text)
    assert info.value.field == "bodies.L.dilate"
    assert info.value.line == 6  # the "dilate:" key; line 1 is blank


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("dimension: 3\nrule: circle:64\n", "dimension"),
        ("dimension: 3\nfoo: 1\n", "unknown key"),
        ("rule: circle:64\n", "dimension"),
        ("dimension: 3\ntasks:\n  - id: a\n    check: {name: lp_bm, K: nope, L: nope}\n", "unknown body"),
        ("dimension: 3\ntasks:\n  - id: a\n    frobnicate: {}\n", "unknown task key"),
        ("dimension: 3\ntasks:\n  - {id: a, integrate: {body: x}, add: {body: x}}\n", "exactly one"),
        ("dimension: [3\n", "not valid YAML"),
        ("dimension: 3\ndimension: 2\n", "duplicate key"),
        ("dimension: 3\ngauges:\n  g: {family: power_sum, p: 2, arity: 1}\n", "gauges.g"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_text(text)


def test_overrides(tmp_path):
    cfg = write(tmp_path, """
        dimension: 2
        rule: circle:64
        seed: 3
        bodies:
          E: {ellipsoid: {semi_axes: [1, 2]}}
        tasks:
          - id: area
            integrate: {body: E}
        """)
    scene = parse_text(cfg.read_text(), seed=11, rule="circle:512")
    assert scene.seed == 11 and scene.rule.rule_id == "circle:512"
    out = tmp_path / "o.csv"
    assert main(["run", str(cfg), "--rule", "circle:512", "--out", str(out)]) == 0
    (row,) = read_rows(out)
    assert row["rule_id"] == "circle:512"
    assert abs(float(row["value"]) - 2 * math.pi) < 1e-10


def test_task_errors_do_not_abort(tmp_path):
    cfg = write(tmp_path, """
        dimension: 3
        bodies:
          K: {ball: {radius: 1}}
        tasks:
          - id: bad_index
            integrate: {body: K, i: 7}
          - id: good
            integrate: {body: K}
        """)
    out = tmp_path / "o.csv"
    assert main(["run", str(cfg), "--out", str(out)]) == 1
    rows = read_rows(out)
    assert rows[0]["status"].startswith("error")
    assert rows[1]["status"] == "ok"


def test_failing_variational_tolerance_exits_2(tmp_path):
    cfg = write(tmp_path, """
        dimension: 3
        rule: gauss3:16x32
        gauges:
          sq: {family: power, p: 2}
        bodies:
          K: {ellipsoid: {semi_axes: [1, 1.5, 2]}}
          L: {ball: {radius: 1.2}}
        tasks:
          - id: var
            variational: {K: K, L: L, phi1: sq, phi2: sq, tol: 1.0e-30}
        """)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o.csv")]) == 2


def test_demo_scene_runs(tmp_path):
    out = tmp_path / "demo.csv"
    assert main(["run", str(SCENES / "demo.yaml"), "--rule", "gauss3:24x48", "--out", str(out)]) == 0
    rows = read_rows(out)
    ids = [r["task_id"] for r in rows]
    assert ids[0] == "ball_volume" and "hunt.0" in ids
    assert all(r["status"] == "ok" for r in rows)


def test_run_is_deterministic(tmp_path):
    from orlicz_chord.report import strip_wall_time

    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["run", str(SCENES / "demo.yaml"), "--rule", "gauss3:16x32", "--seed", "4", "--out", str(out)]) == 0
    assert strip_wall_time(a.read_text()) == strip_wall_time(b.read_text())


def test_replay_round_trip(tmp_path, capsys):
    out = tmp_path / "eq.csv"
    main(["run", str(SCENES / "dilate_equality.yaml"), "--out", str(out)])
    row = read_rows(out)[0]
    capsys.readouterr()
    assert main(["replay", row["inputs_digest"]]) == 0
    text = capsys.readouterr().out
    assert "equality_flag   true" in text
    assert f"slack           {float(row['slack'])!r}" in text


def test_replay_corrupted_digest(capsys):
    assert main(["replay", "ocd1.not-a-real-digest"]) == 1
    assert "digest" in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "orlicz_chord.cli", "replay", "garbage"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
