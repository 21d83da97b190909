"""Command-line front end: ``orlicz-chord run | replay | selftest``.

Exit codes: 0 when every check holds, 2 when some check fails, 1 on a
configuration, digest or task error.  Set ``ORLICZ_CHORD_THREADS`` to run
random searches on several threads.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import acceptance
from .chord_addition import OrliczSum
from .config import SceneConfig, Task, load
from .errors import ChordError, ConfigError, DigestParseError
from .inequalities import CHECK_NAMES, GeneratorConfig, falsification_search, replay_digest, run_check
from .integrals import (
    chord_integral,
    ith_mixed_chord,
    lp_mixed_chord,
    mixed_chord_integral,
    orlicz_mixed_chord,
    variational_estimate,
)
from .orlicz_fn import Power
from .quadrature import parse_rule
from .report import ReportRow, format_rows
from .serialize import body_from_dict, decode_digest, gauge_from_spec

log = logging.getLogger("orlicz_chord")

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
FUNCTIONALS = ("chord", "mixed", "ith_mixed", "lp_mixed", "orlicz_mixed")


class _Scope:
    """Resolves names and inline specs of one task against the scene."""

    def __init__(self, scene: SceneConfig, task: Task):
        self.scene, self.task, self.params = scene, task, task.params

    def has(self, key):
        return key in self.params

    def get(self, key, default=None):
        return self.params.get(key, default)

    def need(self, key):
        if key not in self.params:
            raise ConfigError(f"missing parameter {key!r}", field=self.task.path)
        return self.params[key]

    def body(self, key, spec=None):
        spec = self.need(key) if spec is None else spec
        return body_from_dict(spec, self.scene.dimension, self.scene.bodies, self.scene.gauges,
                              f"{self.task.path}.{key}")

    def gauge(self, key):
        return gauge_from_spec(self.need(key), self.scene.gauges, f"{self.task.path}.{key}")

    def rule(self):
        if "rule" not in self.params:
            return self.scene.rule
        rule = parse_rule(str(self.params["rule"]))
        if rule.dimension != self.scene.dimension:
            raise ConfigError(f"rule {rule.rule_id} does not match dimension {self.scene.dimension}",
                              field=f"{self.task.path}.rule")
        return rule

    def index(self):
        i = self.get("i", 0)
        if isinstance(i, bool) or not isinstance(i, int):
            raise ConfigError(f"i must be an integer, got {i!r}", field=f"{self.task.path}.i")
        return i


def _gauge_label(scope, key):
    spec = scope.get(key)
    return spec if isinstance(spec, str) else repr(scope.gauge(key))


def _task_integrate(scope: _Scope):
    rule, i = scope.rule(), scope.index()
    kind = scope.get("functional", "chord")
    label = ""
    if kind == "chord":
        res = chord_integral(scope.body("body"), i, rule)
    elif kind == "mixed":
        specs = scope.need("bodies")
        res = mixed_chord_integral([scope.body(f"bodies[{k}]", s) for k, s in enumerate(specs)], rule)
        i = None
    elif kind == "ith_mixed":
        res = ith_mixed_chord(scope.body("K"), scope.body("L"), i, rule)
    elif kind == "lp_mixed":
        p = float(scope.need("p"))
        Power(p)  # class check, raises "p must be >= 1"
        res = lp_mixed_chord(scope.body("K"), scope.body("L"), i, p, rule)
        label = f"p={p:g}"
    elif kind == "orlicz_mixed":
        res = orlicz_mixed_chord(scope.body("K"), scope.body("L"), i, scope.gauge("gauge"), rule)
        label = _gauge_label(scope, "gauge")
    else:
        raise ConfigError(f"unknown functional {kind!r}; expected one of {', '.join(FUNCTIONALS)}",
                          field=f"{scope.task.path}.functional")
    row = ReportRow(scope.task.id, kind, i=i, p_or_gauge=label, rule_id=rule.rule_id,
                    value=res.value, error_estimate=res.error_estimate)
    return [row]


def _task_add(scope: _Scope):
    rule, i = scope.rule(), scope.index()
    S = scope.body("body")
    res = chord_integral(S, i, rule)
    status = "ok"
    if isinstance(S, OrliczSum):
        worst = float(np.max(S.residual_on(rule)))
        if not worst < 1e-11:
            status = f"error: defining equation residual {worst:.3g}"
    name = next(iter(S.to_dict()))
    return [ReportRow(scope.task.id, f"chord_integral({name})", i=i, rule_id=rule.rule_id,
                      value=res.value, error_estimate=res.error_estimate, status=status)]


def _task_check(scope: _Scope):
    rule, i = scope.rule(), scope.index()
    names = scope.need("name")
    names = [names] if isinstance(names, str) else list(names)
    K, L = scope.body("K"), scope.body("L")
    p = scope.get("p")
    gauge = scope.gauge("gauge") if scope.has("gauge") else None
    gauges = None
    if scope.has("gauges"):
        gauges = [gauge_from_spec(g, scope.scene.gauges, f"{scope.task.path}.gauges[{k}]")
                  for k, g in enumerate(scope.need("gauges"))]
    matrix = np.array(scope.get("matrix"), dtype=float) if scope.has("matrix") else None
    if p is not None:
        p = float(p)
        Power(p)
    label = f"p={p:g}" if p is not None else (_gauge_label(scope, "gauge") if gauge is not None else "")
    rows = []
    for name in names:
        if name not in CHECK_NAMES:
            raise ConfigError(f"unknown check {name!r}; expected one of {', '.join(CHECK_NAMES)}",
                              field=f"{scope.task.path}.name")
        tid = scope.task.id if len(names) == 1 else f"{scope.task.id}.{name}"
        start = time.perf_counter()
        try:
            rep = run_check(name, K, L, i, rule, p=p, gauge=gauge, gauges=gauges, matrix=matrix)
        except ChordError as exc:
            rows.append(ReportRow(tid, name, i=i, rule_id=rule.rule_id, status=f"error: {exc}"))
            continue
        rows.append(ReportRow.from_report(tid, rep, p_or_gauge=label, i=i, rule_id=rule.rule_id,
                                          wall_time=time.perf_counter() - start))
    return rows


def _task_search(scope: _Scope):
    rule = scope.rule()
    checks = scope.need("checks")
    checks = [checks] if isinstance(checks, str) else list(checks)
    gen = dict(scope.get("generator", {}) or {})
    kwargs = {"dimension": scope.scene.dimension, "rule_id": rule.rule_id}
    for key in ("kinds", "indices", "ps"):
        if key in gen:
            kwargs[key] = tuple(gen.pop(key))
    for key in ("pairs", "min_ratio_spread"):
        if key in gen:
            kwargs[key] = gen.pop(key)
    if "gauges" in gen:
        kwargs["gauges"] = tuple(
            gauge_from_spec(g, scope.scene.gauges, f"{scope.task.path}.generator.gauges[{k}]")
            for k, g in enumerate(gen.pop("gauges"))
        )
    if gen:
        key = next(iter(gen))
        raise ConfigError(f"unknown generator parameter {key!r}", field=f"{scope.task.path}.generator.{key}")
    cfg = GeneratorConfig(**kwargs)
    trials = int(scope.get("trials", 100))
    keep = int(scope.get("keep", 10))
    seed = int(scope.get("seed", scope.scene.seed))
    reports = falsification_search(cfg, checks, trials, seed, keep=keep)
    rows = []
    for rank, rep in enumerate(reports):
        payload = decode_digest(rep.inputs_digest)
        if "p" in payload:
            label = f"p={payload['p']:g}"
        elif "gauge" in payload:
            label = repr(gauge_from_spec(payload["gauge"]))
        else:
            label = ""
        rows.append(ReportRow.from_report(f"{scope.task.id}.{rank}", rep, p_or_gauge=label,
                                          i=payload.get("i"), rule_id=rule.rule_id))
    return rows


def _task_variational(scope: _Scope):
    rule, i = scope.rule(), scope.index()
    K, L = scope.body("K"), scope.body("L")
    phi1, phi2 = scope.gauge("phi1"), scope.gauge("phi2")
    tol = float(scope.get("tol", 1e-4))
    extra = {"eps_schedule": tuple(float(e) for e in scope.get("eps"))} if scope.has("eps") else {}
    est, spread = variational_estimate(K, L, i, phi1, phi2, rule, **extra)
    ref = orlicz_mixed_chord(K, L, i, phi2, rule)
    rel = (est - ref.value) / abs(ref.value)
    label = f"{_gauge_label(scope, 'phi1')}|{_gauge_label(scope, 'phi2')}"
    return [ReportRow(scope.task.id, "variational_derivative", i=i, p_or_gauge=label, rule_id=rule.rule_id,
                      value=est, lhs=est, rhs=ref.value, slack=est - ref.value, relative_slack=rel,
                      error_estimate=max(spread, ref.error_estimate),
                      status="ok" if abs(rel) <= tol else "fail")]


RUNNERS = {
    "integrate": _task_integrate,
    "add": _task_add,
    "check": _task_check,
    "search": _task_search,
    "variational": _task_variational,
}


def execute(scene: SceneConfig) -> list[ReportRow]:
    """Run the tasks in order.  A failing task becomes an error row."""
    rows = []
    for task in scene.tasks:
        start = time.perf_counter()
        try:
            produced = RUNNERS[task.kind](_Scope(scene, task))
        except ConfigError as exc:
            if exc.line is None:
                exc.line = scene.line_of(exc.field)
            produced = [ReportRow(task.id, task.kind, status=f"error: {exc}")]
        except (ChordError, ValueError, TypeError) as exc:
            produced = [ReportRow(task.id, task.kind, status=f"error: {exc}")]
        elapsed = time.perf_counter() - start
        for row in produced:
            if row.wall_time is None:
                row.wall_time = elapsed
        rows.extend(produced)
    return rows


def exit_code(rows) -> int:
    if any(r.status.startswith("error") for r in rows):
        return EXIT_ERROR
    if any(r.status == "fail" for r in rows):
        return EXIT_FAIL
    return EXIT_OK


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    try:
        scene = load(args.config, seed=args.seed, rule=args.rule, output=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    rows = execute(scene)
    try:
        _emit(format_rows(rows), scene.output)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for row in rows:
        if row.status != "ok":
            print(f"{row.task_id}: {row.status}", file=sys.stderr)
    code = exit_code(rows)
    print(f"{len(rows)} rows, exit {code}", file=sys.stderr)
    return code


def cmd_replay(args) -> int:
    try:
        rep = replay_digest(args.digest)
    except DigestParseError as exc:
        print(f"digest error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ChordError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"check           {rep.name} ({rep.kind})")
    for key in ("lhs", "rhs", "slack", "relative_slack", "error_estimate"):
        print(f"{key:<15} {getattr(rep, key)!r}")
    print(f"equality_flag   {str(rep.equality_flag).lower()}")
    print(f"status          {'ok' if rep.holds else 'fail'}")
    return EXIT_OK if rep.holds else EXIT_FAIL


def cmd_selftest(args) -> int:
    rows, ok = [], True
    for fn in acceptance.CRITERIA:
        start = time.perf_counter()
        kwargs = acceptance.quick_kwargs(fn) if args.quick else {}
        res = fn(args.seed, **kwargs)
        elapsed = time.perf_counter() - start
        print(res.line(), flush=True)
        for row in res.rows:
            row.wall_time = elapsed
        rows.extend(res.rows)
        ok &= res.passed
    if args.out:
        _emit(format_rows(rows), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orlicz-chord", description="Chord integrals of star bodies and their inequalities.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the tasks of a scene config and write CSV")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--rule", help="override the quadrature rule id")
    run.add_argument("--out", help="CSV path (default: config 'output', else stdout)")
    run.set_defaults(func=cmd_run)

    replay = sub.add_parser("replay", help="rerun the check recorded in a digest")
    replay.add_argument("digest")
    replay.set_defaults(func=cmd_replay)

    selftest = sub.add_parser("selftest", help="run the built-in acceptance suite")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.add_argument("--out", help="write the CSV rows here")
    selftest.add_argument("--quick", action="store_true", help="smaller random samples")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
