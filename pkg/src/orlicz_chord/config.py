"""Scene configuration files.

A scene is a YAML document (UTF-8, ``#`` comments allowed)::

    dimension: 3
    rule: gauss3:48x96          # circle:M, gauss3:LxM or mc:n:N:seed
    seed: 0
    output: results.csv
    gauges:
      sq: {family: power, p: 2}
      mix: {family: power_mix, a: 0.5, p: 1, q: 3}
    bodies:
      K: {ellipsoid: {semi_axes: [1, 2, 3]}}
      L: {dilate: {factor: 2, body: K}}
      S: {orlicz_add: {parts: [K, L], gauge: sq}}
    tasks:
      - id: volume
        integrate: {functional: chord, body: K, i: 0}
      - id: minkowski
        check: {name: orlicz_minkowski, K: K, L: L, i: 0, gauge: sq}

Bodies and gauges may refer to names defined earlier in their section.  The
task kinds and their keys are listed in ``TASK_KEYS``.  Every error is a
:class:`ConfigError` naming the dotted field path and, when known, the line.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import ChordError, ConfigError
from .orlicz_fn import validate_class
from .quadrature import SphereQuadrature, default_rule, parse_rule
from .serialize import body_from_dict, gauge_from_spec

TASK_KEYS = {
    "integrate": ("functional", "body", "bodies", "K", "L", "i", "p", "gauge", "rule"),
    "add": ("body", "i", "rule"),
    "check": ("name", "K", "L", "i", "p", "gauge", "gauges", "matrix", "rule"),
    "search": ("checks", "trials", "keep", "seed", "generator", "rule"),
    "variational": ("K", "L", "i", "phi1", "phi2", "eps", "tol", "rule"),
}
TOP_KEYS = ("dimension", "rule", "seed", "output", "gauges", "bodies", "tasks")


@dataclass
class Task:
    id: str
    kind: str
    params: dict
    path: str


@dataclass
class SceneConfig:
    dimension: int
    rule: SphereQuadrature
    seed: int
    output: str | None
    gauges: dict = field(default_factory=dict)
    bodies: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)
    lines: dict = field(default_factory=dict, repr=False)

    def line_of(self, path: str | None) -> int | None:
        return _line_of(self.lines, path)


def _line_of(lines, path):
    while path:
        if path in lines:
            return lines[path]
        cut = max(path.rfind("."), path.rfind("["))
        path = path[:cut] if cut > 0 else ""
    return None


def _to_python(node, path, lines, line=None):
    """Convert a composed YAML node, recording the line of every field.

    A mapping entry is located at its key, other nodes at their start.
    """
    lines[path] = node.start_mark.line + 1 if line is None else line
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = yaml.safe_load(yaml.serialize(key_node))
            key_line = key_node.start_mark.line + 1
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", field=path or None, line=key_line)
            out[key] = _to_python(value_node, f"{path}.{key}" if path else str(key), lines, key_line)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, f"{path}[{k}]", lines) for k, v in enumerate(node.value)]
    return yaml.safe_load(yaml.serialize(node))


def parse_text(text: str, seed=None, rule=None, output=None) -> SceneConfig:
    """Parse and validate a scene; keyword arguments override the file."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"not valid YAML: {getattr(exc, 'problem', exc)}",
                          line=None if mark is None else mark.line + 1) from None
    if node is None:
        raise ConfigError("the config file is empty")
    lines: dict = {}
    doc = _to_python(node, "", lines)
    if not isinstance(doc, dict):
        raise ConfigError("the top level must be a mapping", line=1)
    try:
        return _build(doc, lines, seed, rule, output)
    except ConfigError as exc:
        if exc.line is None:
            exc.line = _line_of(lines, exc.field)
        raise


def load(path, seed=None, rule=None, output=None) -> SceneConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except UnicodeDecodeError:
        raise ConfigError("config is not valid UTF-8") from None
    return parse_text(text, seed=seed, rule=rule, output=output)


def _int(value, path, low=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", field=path)
    if low is not None and value < low:
        raise ConfigError(f"must be >= {low}", field=path)
    return value


def _rule(spec, path):
    try:
        return parse_rule(str(spec))
    except ChordError as exc:
        raise ConfigError(str(exc), field=path) from None


def _build(doc, lines, seed, rule, output) -> SceneConfig:
    for key in doc:
        if key not in TOP_KEYS:
            raise ConfigError(f"unknown key {key!r}; expected one of {', '.join(TOP_KEYS)}", field=str(key))
    if "dimension" not in doc:
        raise ConfigError("missing required key 'dimension'")
    n = _int(doc["dimension"], "dimension", low=2)
    if rule is not None:
        quad = _rule(rule, "rule")
    elif "rule" in doc:
        quad = _rule(doc["rule"], "rule")
    else:
        quad = default_rule(n)
    if quad.dimension != n:
        raise ConfigError(f"rule {quad.rule_id} has dimension {quad.dimension}, scene has {n}", field="rule")
    seed = _int(doc.get("seed", 0) if seed is None else seed, "seed", low=0)
    out = output if output is not None else doc.get("output")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output must be a path string", field="output")

    gauges = {}
    for name, spec in _section(doc, "gauges").items():
        path = f"gauges.{name}"
        g = gauge_from_spec(spec, gauges, path)
        report = validate_class(g)
        if not report.ok:
            raise ConfigError(f"gauge fails class checks: {', '.join(report.failures)}", field=path)
        gauges[name] = g

    bodies = {}
    for name, spec in _section(doc, "bodies").items():
        path = f"bodies.{name}"
        K = body_from_dict(spec, n, bodies, gauges, path)
        if K.dimension != n:
            raise ConfigError(f"body has dimension {K.dimension}, scene has {n}", field=path)
        bodies[name] = K

    raw_tasks = doc.get("tasks", [])
    if not isinstance(raw_tasks, list):
        raise ConfigError("tasks must be a list", field="tasks")
    tasks, seen = [], set()
    for k, item in enumerate(raw_tasks):
        path = f"tasks[{k}]"
        if not isinstance(item, dict):
            raise ConfigError("a task must be a mapping", field=path)
        tid = str(item.get("id", f"task{k}"))
        if tid in seen:
            raise ConfigError(f"duplicate task id {tid!r}", field=f"{path}.id")
        seen.add(tid)
        kinds = [key for key in item if key in TASK_KEYS]
        extra = [key for key in item if key not in TASK_KEYS and key != "id"]
        if extra:
            raise ConfigError(f"unknown task key {extra[0]!r}", field=f"{path}.{extra[0]}")
        if len(kinds) != 1:
            raise ConfigError(f"a task needs exactly one of {', '.join(TASK_KEYS)}", field=path)
        kind = kinds[0]
        params = item[kind]
        if not isinstance(params, dict):
            raise ConfigError("task parameters must be a mapping", field=f"{path}.{kind}")
        for key in params:
            if key not in TASK_KEYS[kind]:
                raise ConfigError(f"unknown {kind} parameter {key!r}", field=f"{path}.{kind}.{key}")
        _check_refs(params, bodies, gauges, f"{path}.{kind}")
        tasks.append(Task(tid, kind, params, f"{path}.{kind}"))
    return SceneConfig(n, quad, seed, out, gauges, bodies, tasks, lines)


def _section(doc, key):
    value = doc.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{key} must be a mapping of names", field=key)
    return value


def _check_refs(params, bodies, gauges, path):
    """Names used by a task must resolve before anything runs."""
    for key in ("body", "K", "L"):
        value = params.get(key)
        if isinstance(value, str) and value not in bodies:
            raise ConfigError(f"unknown body {value!r}", field=f"{path}.{key}")
    for k, value in enumerate(params.get("bodies", []) or []):
        if isinstance(value, str) and value not in bodies:
            raise ConfigError(f"unknown body {value!r}", field=f"{path}.bodies[{k}]")
    for key in ("gauge", "phi1", "phi2"):
        value = params.get(key)
        if isinstance(value, str) and value not in gauges:
            raise ConfigError(f"unknown gauge {value!r}", field=f"{path}.{key}")

