"""Built-in acceptance suite, shared by ``orlicz-chord selftest`` and pytest.

Each ``criterion_*`` function runs one exit criterion at its fixed
tolerance and returns a :class:`CriterionResult` holding the pass/fail
verdict and the CSV rows that document it.  Every random draw comes from
``numpy.random.default_rng`` seeded by ``(seed, criterion, trial)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chord_addition import eps_combination, lp_chord_add, orlicz_chord_combine
from .inequalities import (
    GeneratorConfig,
    random_ball,
    random_body,
    random_ellipsoid,
    random_gl_matrix,
    random_perturbed,
    random_rotation,
    random_sl_matrix,
    run_trials,
)
from .integrals import (
    chord_integral,
    lp_mixed_chord,
    orlicz_mixed_chord,
    variational_estimate,
)
from .orlicz_fn import Power, PowerMix
from .quadrature import circle_rule, sphere_rule_n3
from .report import ReportRow
from .star_body import Ball, Dilate, Ellipsoid, LinearImage, closed_form_image, radial_distance

RULE3 = "gauss3:48x96"
RULE2 = "circle:256"


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    rows: list = field(default_factory=list)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title} -- {self.detail}"


def _row(task, functional, value=None, ok=True, **kw):
    return ReportRow(task_id=task, functional=functional, value=value, status="ok" if ok else "fail", **kw)


def _rng(seed, criterion, trial=0):
    return np.random.default_rng([seed, criterion, trial])


def criterion_1(seed: int = 0) -> CriterionResult:
    rule = sphere_rule_n3(48, 96)
    rows, ok = [], True
    unit = Ball.centered(1.0, 3)
    for i in range(3):
        v = chord_integral(unit, i, rule).value
        good = abs(v - 4 * math.pi / 3) <= 1e-10
        ok &= good
        rows.append(_row(f"c1.unit_ball.i{i}", "chord_integral", v, good, i=i, rule_id=rule.rule_id))
    res = chord_integral(Ellipsoid([1.0, 2.0, 3.0]), 0, rule)
    good = abs(res.value - 8 * math.pi) <= 1e-6
    ok &= good
    rows.append(
        _row("c1.ellipsoid_123.i0", "chord_integral", res.value, good, i=0, rule_id=rule.rule_id,
             error_estimate=res.error_estimate)
    )
    worst = max(abs(r.value - (8 * math.pi if "ellipsoid" in r.task_id else 4 * math.pi / 3)) for r in rows)
    return CriterionResult(1, "closed-form chord integrals", ok, f"max abs error {worst:.3g}", rows)


def criterion_2(seed: int = 0, bodies_per_dim: int = 10) -> CriterionResult:
    rows, worst = [], 0.0
    for n, rule in ((2, circle_rule(256)), (3, sphere_rule_n3(48, 96))):
        for t in range(bodies_per_dim):
            K = random_body(_rng(seed, 2, 100 * n + t), n)
            for i in range(n):
                base = chord_integral(K, i, rule, estimate_error=False).value
                for c in (0.5, 2.0, 5.0):
                    scaled = chord_integral(Dilate(c, K), i, rule, estimate_error=False).value
                    worst = max(worst, abs(scaled / (c ** (n - i) * base) - 1.0))
        rows.append(_row(f"c2.homogeneity.n{n}", "chord_integral_homogeneity", worst, worst <= 1e-10,
                         rule_id=rule.rule_id))
    ok = worst <= 1e-10
    return CriterionResult(2, "homogeneity B_i(cK) = c^(n-i) B_i(K)", ok, f"max relative error {worst:.3g}", rows)


def criterion_3(seed: int = 0, pairs_per_dim: int = 10) -> CriterionResult:
    rows = []
    worst_add = worst_mixed = 0.0
    for n, rule in ((2, circle_rule(256)), (3, sphere_rule_n3(48, 96))):
        for t in range(pairs_per_dim):
            rng = _rng(seed, 3, 100 * n + t)
            K, L = random_body(rng, n), random_body(rng, n)
            p = float(rng.choice([1.0, 2.0, 3.5]))
            alpha, beta = rng.uniform(0.2, 2.0, size=2)
            closed = lp_chord_add(K, L, p, alpha, beta).half_chord_on(rule)
            solved = orlicz_chord_combine((K, L), (alpha, beta), Power(p)).half_chord_on(rule)
            worst_add = max(worst_add, float(np.max(np.abs(solved / closed - 1.0))))
            for i in range(n):
                a = orlicz_mixed_chord(K, L, i, Power(p), rule, estimate_error=False).value
                b = lp_mixed_chord(K, L, i, p, rule, estimate_error=False).value
                worst_mixed = max(worst_mixed, abs(a / b - 1.0))
    ok = worst_add <= 1e-10 and worst_mixed <= 1e-12
    rows.append(_row("c3.addition_vs_closed_form", "orlicz_chord_combine", worst_add, worst_add <= 1e-10))
    rows.append(_row("c3.orlicz_vs_lp_mixed", "orlicz_mixed_chord", worst_mixed, worst_mixed <= 1e-12))
    return CriterionResult(
        3, "L_p / Orlicz consistency", ok,
        f"addition rel err {worst_add:.3g}, mixed integral rel err {worst_mixed:.3g}", rows,
    )


VARIATIONAL_GAUGES = (Power(1), Power(2), PowerMix(0.5, 1, 3))


def criterion_4(seed: int = 0, instances: int = 20) -> CriterionResult:
    rule = sphere_rule_n3(48, 96)
    rows, worst = [], 0.0
    for t in range(instances):
        rng = _rng(seed, 4, t)
        K, L = random_body(rng, 3), random_body(rng, 3)
        i = int(rng.integers(3))
        g1 = VARIATIONAL_GAUGES[int(rng.integers(3))]
        g2 = VARIATIONAL_GAUGES[int(rng.integers(3))]
        est, spread = variational_estimate(K, L, i, g1, g2, rule)
        ref = orlicz_mixed_chord(K, L, i, g2, rule, estimate_error=False).value
        err = abs(est / ref - 1.0)
        worst = max(worst, err)
        rows.append(_row(f"c4.variational.{t}", "variational_derivative", est, err <= 1e-4, i=i,
                         p_or_gauge=f"{g1}|{g2}", rule_id=rule.rule_id, lhs=est, rhs=ref,
                         error_estimate=spread))
    ball = variational_estimate(Ball.centered(1.0, 3), Ball.centered(2.0, 3), 0, Power(2), Power(2), rule)[0]
    ball_err = abs(ball - math.pi / 3)
    rows.append(_row("c4.balls_1_2", "variational_derivative", ball, ball_err <= 1e-6, i=0,
                     p_or_gauge="power(2)", rule_id=rule.rule_id, rhs=math.pi / 3))
    ok = worst <= 1e-4 and ball_err <= 1e-6
    return CriterionResult(4, "variational identity", ok,
                           f"max relative gap {worst:.3g}, ball case error {ball_err:.3g}", rows)


def _regime(number, check, seed, trials, special, stream=None):
    """Shared body of criteria 5 and 6 for one check name.

    ``stream`` separates the random draws of several checks in one criterion.
    """
    stream = number if stream is None else stream
    rows = []
    rand = run_trials(GeneratorConfig(rule_id=RULE3), [check], trials, seed * 1000 + stream)
    dil = run_trials(GeneratorConfig(rule_id=RULE3, pairs="dilate"), [check], special, seed * 1000 + stream + 1)
    non = run_trials(GeneratorConfig(rule_id=RULE3, pairs="nonsimilar"), [check], special, seed * 1000 + stream + 2)
    sim = run_trials(GeneratorConfig(rule_id=RULE3, pairs="similar"), [check], special, seed * 1000 + stream + 3)
    min_rel = min(r.relative_slack for r in rand)
    min_abs = min(r.slack for r in rand)
    holds = min_rel >= -1e-8 and min_abs >= -1e-8
    eq_dilate = sum(r.equality_flag for r in dil)
    strict = sum(r.relative_slack > r.threshold for r in non)
    eq_similar = sum(r.equality_flag for r in sim)
    ok = holds and eq_dilate == len(dil) and strict == len(non)
    tag = f"c{number}.{check}"
    worst = min(rand, key=lambda r: r.relative_slack)
    rows.append(ReportRow.from_report(f"{tag}.worst_random", worst, rule_id=RULE3))
    rows.append(_row(f"{tag}.min_relative_slack", check, min_rel, holds, rule_id=RULE3))
    rows.append(_row(f"{tag}.dilate_equality_count", check, float(eq_dilate), eq_dilate == len(dil)))
    rows.append(_row(f"{tag}.nonsimilar_strict_count", check, float(strict), strict == len(non)))
    # recorded only: similar-chord pairs that are not dilates
    rows.append(_row(f"{tag}.reflected_similar_equality_count", check, float(eq_similar), True))
    detail = (f"{check}: min rel slack {min_rel:.3g} over {len(rand)}, "
              f"equality {eq_dilate}/{len(dil)} dilates, strict {strict}/{len(non)} non-similar")
    return ok, detail, rows, rand + dil + non + sim


def criterion_5(seed: int = 0, trials: int = 500, special: int = 50) -> CriterionResult:
    ok, detail, rows, _ = _regime(5, "orlicz_minkowski", seed, trials, special)
    return CriterionResult(5, "Orlicz Minkowski inequality", ok, detail, rows)


def criterion_6(seed: int = 0, trials: int = 500, special: int = 50) -> CriterionResult:
    ok_bm, d_bm, rows_bm, _ = _regime(6, "orlicz_bm", seed, trials, special)
    ok_lp, d_lp, rows_lp, _ = _regime(6, "lp_bm", seed, trials, special, stream=60)
    dec = []
    for pairs, off in (("random", 0), ("dilate", 1), ("nonsimilar", 2), ("similar", 3)):
        count = trials if pairs == "random" else special
        dec += run_trials(GeneratorConfig(rule_id=RULE3, pairs=pairs), ["decomposition"], count, seed * 1000 + 600 + off)
    worst_dec = max(abs(r.relative_slack) for r in dec)
    ok_dec = worst_dec < 1e-10
    rows = rows_bm + rows_lp + [
        _row("c6.decomposition.max_abs_relative_slack", "decomposition", worst_dec, ok_dec, rule_id=RULE3)
    ]
    detail = f"{d_bm}; {d_lp}; decomposition max |rel slack| {worst_dec:.3g} over {len(dec)}"
    return CriterionResult(6, "Orlicz and L_p Brunn-Minkowski, decomposition", ok_bm and ok_lp and ok_dec, detail, rows)


def criterion_7(seed: int = 0, maps: int = 100, directions: int = 500) -> CriterionResult:
    rule = sphere_rule_n3(48, 96)
    rows = []
    worst_cov = 0.0
    gauges = (Power(1), Power(2), PowerMix(0.5, 1, 3))
    for t in range(maps):
        rng = _rng(seed, 7, t)
        K = random_ball(rng, 3) if rng.random() < 0.5 else random_ellipsoid(rng, 3)
        L = random_ball(rng, 3) if rng.random() < 0.5 else random_ellipsoid(rng, 3)
        A = random_gl_matrix(rng, 3)
        eps = float(rng.choice([1.0, rng.uniform(0.01, 1.0)]))
        g1, g2 = gauges[int(rng.integers(3))], gauges[int(rng.integers(3))]
        U = rng.standard_normal((directions, 3))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        lazy = LinearImage(A, eps_combination(K, L, eps, g1, g2)).half_chord(U)
        direct = eps_combination(closed_form_image(A, K), closed_form_image(A, L), eps, g1, g2).half_chord(U)
        worst_cov = max(worst_cov, float(np.max(np.abs(lazy / direct - 1.0))))
    rows.append(_row("c7.gl_covariance", "orlicz_chord_combine", worst_cov, worst_cov <= 1e-9))

    worst_sl = 0.0
    drift = {1: [], 2: []}
    for t in range(maps):
        rng = _rng(seed, 70, t)
        K = random_ball(rng, 3) if rng.random() < 0.5 else random_ellipsoid(rng, 3)
        L = random_ball(rng, 3) if rng.random() < 0.5 else random_ellipsoid(rng, 3)
        A = random_sl_matrix(rng, 3)
        phi = gauges[int(rng.integers(3))]
        for i in (0, 1, 2):
            moved = orlicz_mixed_chord(LinearImage(A, K), LinearImage(A, L), i, phi, rule, estimate_error=False).value
            fixed = orlicz_mixed_chord(K, L, i, phi, rule, estimate_error=False).value
            rel = abs(moved / fixed - 1.0)
            if i == 0:
                worst_sl = max(worst_sl, rel)
            else:
                drift[i].append(rel)
    rows.append(_row("c7.sl_invariance.i0", "orlicz_mixed_chord", worst_sl, worst_sl <= 1e-6, i=0, rule_id=RULE3))
    for i in (1, 2):
        d = np.array(drift[i])
        # finding, not a pass/fail criterion
        rows.append(_row(f"c7.sl_drift.i{i}.median", "orlicz_mixed_chord", float(np.median(d)), True, i=i, rule_id=RULE3))
        rows.append(_row(f"c7.sl_drift.i{i}.max", "orlicz_mixed_chord", float(np.max(d)), True, i=i, rule_id=RULE3))
    ok = worst_cov <= 1e-9 and worst_sl <= 1e-6
    detail = (f"GL covariance max rel {worst_cov:.3g}; SL B_phi,0 drift {worst_sl:.3g}; "
              f"i=1,2 median drift {np.median(drift[1]):.3g}, {np.median(drift[2]):.3g} (finding)")
    return CriterionResult(7, "covariance and SL(3) invariance", ok, detail, rows)


EPS_LADDER = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def criterion_8(seed: int = 0, pairs: int = 5) -> CriterionResult:
    rule = sphere_rule_n3(48, 96)
    rows, ok = [], True
    finals = []
    for t in range(pairs):
        rng = _rng(seed, 8, t)
        # origin-symmetric K, so rho(K) equals the half chord the sum converges to.
        # Sizes keep d_L / d_K near 1: the O(eps) constant grows like phi2(d_L / d_K).
        K = Ellipsoid(rng.uniform(0.8, 1.2, size=3), random_rotation(rng, 3))
        L = Ellipsoid(rng.uniform(1.0, 2.0, size=3), random_rotation(rng, 3),
                      center=rng.uniform(-0.2, 0.2, size=3))
        g1, g2 = VARIATIONAL_GAUGES[t % 3], VARIATIONAL_GAUGES[(t + 1) % 3]
        dist = [radial_distance(eps_combination(K, L, e, g1, g2), K, rule) for e in EPS_LADDER]
        mono = all(b < a for a, b in zip(dist, dist[1:]))
        good = mono and dist[-1] < 1e-5
        ok &= good
        finals.append(dist[-1])
        rows.append(_row(f"c8.convergence.{t}", "radial_distance", dist[-1], good, rule_id=RULE3))
    return CriterionResult(8, "radial convergence of K +_phi eps L", ok,
                           f"distance at eps=1e-6 at most {max(finals):.3g}", rows)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8)


def quick_kwargs(fn) -> dict:
    """Reduced sample sizes for a fast smoke run of criterion ``fn``."""
    if fn in (criterion_5, criterion_6):
        return {"trials": 40, "special": 10}
    if fn is criterion_7:
        return {"maps": 10}
    if fn is criterion_4:
        return {"instances": 5}
    return {}


def run_all(seed: int = 0, quick: bool = False):
    """Run criteria 1-8.  ``quick`` shrinks the random sample sizes."""
    return [fn(seed, **(quick_kwargs(fn) if quick else {})) for fn in CRITERIA]
