"""Two-sided evaluation of the chord-integral inequalities and identities.

Every check returns an :class:`InequalityReport` with the sign convention
``slack >= 0`` exactly when the stated inequality holds.  The error estimate
is the change in relative slack between ``rule`` and its double-resolution
refinement; the equality flag compares the relative slack against
``max(10 * error_estimate, 1e-8)``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chord_addition import lp_chord_add, orlicz_chord_combine
from .errors import ChordError, DigestParseError, InvalidParameter
from .integrals import (
    chord_integral,
    chord_measure,
    ith_mixed_chord,
    lp_mixed_chord,
    orlicz_mixed_chord,
)
from .orlicz_fn import OrliczFunction, OrliczFunctionM, Power, PowerMix, PowerSum, SumOfUnivariate
from .quadrature import SphereQuadrature, parse_rule, refine
from .serialize import body_from_dict, decode_digest, encode_digest, gauge_from_spec
from .star_body import (
    Ball,
    Dilate,
    Ellipsoid,
    LinearImage,
    LinearMap,
    PerturbationTerm,
    PerturbedSphere,
    StarBody,
    similar_chord_check,
)

EQUALITY_FLOOR = 1e-8
THREADS_ENV = "ORLICZ_CHORD_THREADS"


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    relative_slack: float
    error_estimate: float
    equality_flag: bool
    inputs_digest: str
    kind: str = "inequality"
    extra: dict = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return max(10.0 * self.error_estimate, EQUALITY_FLOOR)

    @property
    def holds(self) -> bool:
        """Inequalities: slack not below -threshold.  Identities: |slack| below it."""
        if self.kind == "identity":
            return abs(self.relative_slack) < self.threshold
        if self.kind == "finding":
            return True
        return self.relative_slack >= -self.threshold


def _relative(lhs, rhs, slack):
    scale = max(abs(lhs), abs(rhs))
    return slack / scale if scale > 0 else 0.0


def _evaluate(name, sides, rule: SphereQuadrature, payload: dict, kind="inequality", extra=None):
    lhs, rhs, slack = sides(rule)
    rel = _relative(lhs, rhs, slack)
    fine = refine(rule)
    lf, rf, sf = sides(fine)
    err = abs(rel - _relative(lf, rf, sf))
    flag = abs(rel) < max(10.0 * err, EQUALITY_FLOOR)
    payload = {"check": name, "rule": rule.rule_id, **payload}
    return InequalityReport(name, lhs, rhs, slack, rel, err, flag, encode_digest(payload), kind, extra or {})


def _B(K, i, r):
    return chord_integral(K, i, r, estimate_error=False).value


def check_minkowski_ith(K: StarBody, L: StarBody, i: int, rule: SphereQuadrature) -> InequalityReport:
    """B_i(K, L)^{n-i} <= B_i(K)^{n-i-1} B_i(L).

    At i = n-1 both sides are B_{n-1}(L) for every pair, so the check is an
    equality there and says nothing about K.
    """
    n = rule.dimension

    def sides(r):
        lhs = ith_mixed_chord(K, L, i, r, estimate_error=False).value ** (n - i)
        rhs = _B(K, i, r) ** (n - i - 1) * _B(L, i, r)
        return lhs, rhs, rhs - lhs

    return _evaluate("minkowski_ith", sides, rule, {"bodies": [K.to_dict(), L.to_dict()], "i": i})


def check_lp_minkowski(K, L, i, p, rule) -> InequalityReport:
    """B_{-p,i}(K, L)^{n-i} >= B_i(K)^{n-i+p} B_i(L)^{-p}."""
    n = rule.dimension

    def sides(r):
        lhs = lp_mixed_chord(K, L, i, p, r, estimate_error=False).value ** (n - i)
        rhs = _B(K, i, r) ** (n - i + p) * _B(L, i, r) ** (-p)
        return lhs, rhs, lhs - rhs

    return _evaluate("lp_minkowski", sides, rule, {"bodies": [K.to_dict(), L.to_dict()], "i": i, "p": p})


def check_orlicz_minkowski(K, L, i, phi: OrliczFunction, rule) -> InequalityReport:
    """B_{phi,i}(K, L) >= B_i(K) phi((B_i(L) / B_i(K))^{1/(n-i)})."""
    n = rule.dimension

    def sides(r):
        lhs = orlicz_mixed_chord(K, L, i, phi, r, estimate_error=False).value
        bK = _B(K, i, r)
        rhs = bK * phi((_B(L, i, r) / bK) ** (1.0 / (n - i)))
        return lhs, rhs, lhs - rhs

    return _evaluate(
        "orlicz_minkowski", sides, rule, {"bodies": [K.to_dict(), L.to_dict()], "i": i, "gauge": phi.to_dict()}
    )


def _as_bivariate(gauge) -> OrliczFunctionM:
    if isinstance(gauge, OrliczFunctionM):
        if gauge.arity != 2:
            raise InvalidParameter("the Brunn-Minkowski check needs a gauge of two variables")
        return gauge
    if isinstance(gauge, OrliczFunction):
        return SumOfUnivariate((gauge, gauge))
    return SumOfUnivariate(tuple(gauge))


def check_orlicz_bm(K, L, i, gauge, rule) -> InequalityReport:
    """1 >= phi((B_i(K)/B_i(S))^{1/(n-i)}, (B_i(L)/B_i(S))^{1/(n-i)}), S = K +_phi L."""
    n = rule.dimension
    phi = _as_bivariate(gauge)
    S = orlicz_chord_combine((K, L), (1.0, 1.0), phi)

    def sides(r):
        bS = _B(S, i, r)
        x = np.array([(_B(K, i, r) / bS) ** (1.0 / (n - i)), (_B(L, i, r) / bS) ** (1.0 / (n - i))])
        value = float(phi(x))
        return 1.0, value, 1.0 - value

    return _evaluate(
        "orlicz_bm", sides, rule, {"bodies": [K.to_dict(), L.to_dict()], "i": i, "gauge": phi.to_dict()}
    )


def check_lp_bm(K, L, i, p, rule) -> InequalityReport:
    """B_i(K +_p L)^{-p/(n-i)} >= B_i(K)^{-p/(n-i)} + B_i(L)^{-p/(n-i)}."""
    n = rule.dimension
    S = lp_chord_add(K, L, p)
    q = -p / (n - i)

    def sides(r):
        lhs = _B(S, i, r) ** q
        rhs = _B(K, i, r) ** q + _B(L, i, r) ** q
        return lhs, rhs, lhs - rhs

    return _evaluate("lp_bm", sides, rule, {"bodies": [K.to_dict(), L.to_dict()], "i": i, "p": p})


def check_decomposition(K, L, i, phi1: OrliczFunction, phi2: OrliczFunction, rule) -> InequalityReport:
    """B_i(S) = B_{phi1,i}(S, K) + B_{phi2,i}(S, L) for S = K +_phi L (an identity)."""
    S = orlicz_chord_combine((K, L), (1.0, 1.0), (phi1, phi2))

    def sides(r):
        lhs = _B(S, i, r)
        rhs = (
            orlicz_mixed_chord(S, K, i, phi1, r, estimate_error=False).value
            + orlicz_mixed_chord(S, L, i, phi2, r, estimate_error=False).value
        )
        return lhs, rhs, lhs - rhs

    payload = {"bodies": [K.to_dict(), L.to_dict()], "i": i, "gauges": [phi1.to_dict(), phi2.to_dict()]}
    return _evaluate("decomposition", sides, rule, payload, kind="identity")


def check_jensen_bound(K, L, i, phi: OrliczFunction, rule) -> InequalityReport:
    """Integral of phi(d_L/d_K) against the chord measure of K vs phi of the B-ratio."""
    n = rule.dimension
    extra = {}

    def sides(r):
        mu = chord_measure(K, i, r)
        lhs = float(np.sum(mu.weights * phi(L.half_chord_on(r) / K.half_chord_on(r))))
        bK = _B(K, i, r)
        rhs = float(phi((_B(L, i, r) / bK) ** (1.0 / (n - i))))
        if r is rule:
            direct = orlicz_mixed_chord(K, L, i, phi, r, estimate_error=False).value / bK
            extra["measure_consistency"] = abs(lhs - direct) / abs(direct)
        return lhs, rhs, lhs - rhs

    payload = {"bodies": [K.to_dict(), L.to_dict()], "i": i, "gauge": phi.to_dict()}
    return _evaluate("jensen_bound", sides, rule, payload, extra=extra)


def check_sl_invariance(K, L, i, phi: OrliczFunction, A, rule) -> InequalityReport:
    """Drift of B_{phi,i} under a simultaneous unimodular map (recorded, never fails).

    ``slack`` is minus the absolute drift so the worst drifts sort first.
    """
    A = A if isinstance(A, LinearMap) else LinearMap(A)

    def sides(r):
        moved = orlicz_mixed_chord(LinearImage(A, K), LinearImage(A, L), i, phi, r, estimate_error=False).value
        fixed = orlicz_mixed_chord(K, L, i, phi, r, estimate_error=False).value
        return moved, fixed, -abs(moved - fixed)

    payload = {
        "bodies": [K.to_dict(), L.to_dict()],
        "i": i,
        "gauge": phi.to_dict(),
        "matrix": A.matrix.tolist(),
    }
    return _evaluate("sl_invariance", sides, rule, payload, kind="finding")


CHECK_NAMES = (
    "minkowski_ith",
    "lp_minkowski",
    "orlicz_minkowski",
    "orlicz_bm",
    "lp_bm",
    "decomposition",
    "jensen_bound",
    "sl_invariance",
)


def run_check(name, K, L, i, rule, p=None, gauge=None, gauges=None, matrix=None) -> InequalityReport:
    """Dispatch one named check; the parameters it needs must be supplied."""

    def need(value, what):
        if value is None:
            raise InvalidParameter(f"check {name!r} needs {what}")
        return value

    if name == "minkowski_ith":
        return check_minkowski_ith(K, L, i, rule)
    if name == "lp_minkowski":
        return check_lp_minkowski(K, L, i, need(p, "p"), rule)
    if name == "lp_bm":
        return check_lp_bm(K, L, i, need(p, "p"), rule)
    if name == "orlicz_minkowski":
        return check_orlicz_minkowski(K, L, i, need(gauge, "a gauge"), rule)
    if name == "jensen_bound":
        return check_jensen_bound(K, L, i, need(gauge, "a gauge"), rule)
    if name == "orlicz_bm":
        return check_orlicz_bm(K, L, i, gauge if gauge is not None else need(gauges, "a gauge"), rule)
    if name == "decomposition":
        g1, g2 = need(gauges, "two gauges")
        return check_decomposition(K, L, i, g1, g2, rule)
    if name == "sl_invariance":
        return check_sl_invariance(K, L, i, need(gauge, "a gauge"), need(matrix, "a matrix"), rule)
    raise InvalidParameter(f"unknown check {name!r}; expected one of {', '.join(CHECK_NAMES)}")


def replay_payload(payload: dict) -> InequalityReport:
    """Rebuild the inputs recorded in a digest payload and rerun the check."""
    try:
        name = payload["check"]
        rule = parse_rule(payload["rule"])
        K, L = (body_from_dict(b, rule.dimension) for b in payload["bodies"])
        i = int(payload["i"])
        gauge = gauge_from_spec(payload["gauge"]) if "gauge" in payload else None
        gauges = [gauge_from_spec(g) for g in payload["gauges"]] if "gauges" in payload else None
        matrix = np.array(payload["matrix"], dtype=float) if "matrix" in payload else None
    except (KeyError, TypeError, ValueError, ChordError) as exc:
        raise DigestParseError(f"digest payload is incomplete or invalid: {exc}") from None
    return run_check(name, K, L, i, rule, p=payload.get("p"), gauge=gauge, gauges=gauges, matrix=matrix)


def replay_digest(digest: str) -> InequalityReport:
    """Decode ``digest`` and rerun the check it names."""
    return replay_payload(decode_digest(digest))


# ---------------------------------------------------------------- generators


def random_rotation(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_sl_matrix(rng, n, max_cond=4.0, spread=0.4):
    """A random matrix with det 1 and condition number at most ``max_cond``."""
    while True:
        G = np.eye(n) + spread * rng.standard_normal((n, n))
        det = np.linalg.det(G)
        if abs(det) < 1e-3:
            continue
        if det < 0:
            G[0] = -G[0]
            det = -det
        G = G / det ** (1.0 / n)
        if np.linalg.cond(G) <= max_cond:
            return G


def random_gl_matrix(rng, n, max_cond=4.0):
    return random_sl_matrix(rng, n, max_cond) * rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])


def _unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_ball(rng, n):
    R = rng.uniform(0.5, 2.0)
    return Ball(R, _unit(rng, n) * rng.uniform(0.0, 0.5 * R))


def random_ellipsoid(rng, n):
    return Ellipsoid(rng.uniform(0.5, 3.0, size=n), random_rotation(rng, n))


def random_perturbed(rng, n):
    base = rng.uniform(0.8, 1.5)
    k = int(rng.integers(1, 4))
    raw = rng.uniform(-1.0, 1.0, size=k)
    coefs = raw / np.sum(np.abs(raw)) * rng.uniform(0.1, 0.5) * base
    terms = [PerturbationTerm(c, _unit(rng, n), int(rng.integers(1, 4))) for c in coefs]
    return PerturbedSphere(base, terms, n)


_LEAVES = {"ball": random_ball, "ellipsoid": random_ellipsoid, "perturbed": random_perturbed}


def random_body(rng, n, kinds=("ball", "ellipsoid", "perturbed", "sl_image")) -> StarBody:
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "sl_image":
        leaf = [k for k in kinds if k in _LEAVES] or list(_LEAVES)
        inner = _LEAVES[leaf[int(rng.integers(len(leaf)))]](rng, n)
        return LinearImage(random_sl_matrix(rng, n), inner)
    return _LEAVES[kind](rng, n)


DEFAULT_GAUGES = (Power(1), Power(2), Power(3.5), PowerMix(0.5, 1, 3), PowerMix(0.25, 2, 4))


@dataclass(frozen=True)
class GeneratorConfig:
    """What random instances a search draws.

    ``pairs`` selects the relation between the two bodies: ``random``
    (independent), ``dilate`` (L = cK), ``similar`` (L = -cK, similar chord
    but not in general a dilate) or ``nonsimilar`` (independent, resampled
    until the chord ratio varies by at least ``min_ratio_spread``).
    """

    dimension: int = 3
    rule_id: str = "gauss3:48x96"
    kinds: tuple = ("ball", "ellipsoid", "perturbed", "sl_image")
    pairs: str = "random"
    indices: tuple | None = None
    gauges: tuple = DEFAULT_GAUGES
    ps: tuple = (1.0, 2.0, 3.0)
    min_ratio_spread: float = 0.05

    @property
    def rule(self) -> SphereQuadrature:
        return parse_rule(self.rule_id)


@dataclass
class Instance:
    K: StarBody
    L: StarBody
    i: int
    gauge: OrliczFunction
    gauge2: OrliczFunction
    p: float
    matrix: np.ndarray
    witness: str


def draw_instance(cfg: GeneratorConfig, rng) -> Instance:
    n = cfg.dimension
    K = random_body(rng, n, cfg.kinds)
    witness = "none"
    if cfg.pairs == "dilate":
        L, witness = Dilate(rng.uniform(0.3, 3.0), K), "dilate"
    elif cfg.pairs == "similar":
        L, witness = LinearImage(-rng.uniform(0.3, 3.0) * np.eye(n), K), "similar_chord"
    elif cfg.pairs == "nonsimilar":
        rule = cfg.rule
        while True:
            L = random_body(rng, n, cfg.kinds)
            if not similar_chord_check(K, L, rule, tol=cfg.min_ratio_spread)[0]:
                break
    elif cfg.pairs == "random":
        L = random_body(rng, n, cfg.kinds)
    else:
        raise InvalidParameter(f"unknown pair mode {cfg.pairs!r}")
    indices = cfg.indices if cfg.indices is not None else tuple(range(n))
    i = int(indices[int(rng.integers(len(indices)))])
    g1 = cfg.gauges[int(rng.integers(len(cfg.gauges)))]
    g2 = cfg.gauges[int(rng.integers(len(cfg.gauges)))]
    p = float(cfg.ps[int(rng.integers(len(cfg.ps)))])
    return Instance(K, L, i, g1, g2, p, random_sl_matrix(rng, n), witness)


def _run_instance(inst: Instance, name: str, rule) -> InequalityReport:
    gauges = None
    gauge = inst.gauge
    if name == "orlicz_bm":
        gauge = SumOfUnivariate((inst.gauge, inst.gauge))
    if name == "decomposition":
        gauges = (inst.gauge, inst.gauge2)
    rep = run_check(name, inst.K, inst.L, inst.i, rule, p=inst.p, gauge=gauge, gauges=gauges, matrix=inst.matrix)
    rep.extra["witness"] = inst.witness
    return rep


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_trials(cfg: GeneratorConfig, checks, trials: int, seed: int) -> list[InequalityReport]:
    """Every report from ``trials`` random instances, in (trial, check) order.

    Trial t draws from ``default_rng([seed, t])``, so the output does not
    depend on the number of worker threads.
    """
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    checks = list(checks)
    for name in checks:
        if name not in CHECK_NAMES:
            raise InvalidParameter(f"unknown check {name!r}")
    rule = cfg.rule
    if rule.dimension != cfg.dimension:
        raise InvalidParameter(f"rule {cfg.rule_id} does not match dimension {cfg.dimension}")

    def one(t):
        inst = draw_instance(cfg, np.random.default_rng([seed, t]))
        return [_run_instance(inst, name, rule) for name in checks]

    workers = _workers()
    if workers == 1:
        batches = [one(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            batches = list(pool.map(one, range(trials)))
    return [rep for batch in batches for rep in batch]


def falsification_search(cfg: GeneratorConfig, checks, trials: int, seed: int, keep: int = 10) -> list[InequalityReport]:
    """The ``keep`` reports with the smallest relative slack, ties in trial order."""
    reports = run_trials(cfg, checks, trials, seed)
    order = sorted(range(len(reports)), key=lambda k: (reports[k].relative_slack, k))
    return [reports[k] for k in order[:keep]]


def sl_drift_probe(cfg: GeneratorConfig, i: int, trials: int, seed: int) -> np.ndarray:
    """Relative change of B_{phi,i} under random unimodular maps, one per trial."""
    cfg = GeneratorConfig(**{**cfg.__dict__, "indices": (i,)})
    reps = run_trials(cfg, ["sl_invariance"], trials, seed)
    return np.array([abs(r.relative_slack) for r in reps])
