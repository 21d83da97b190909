import math

import numpy as np
import pytest

from orlicz_chord.chord_addition import (
    LpSum,
    OrliczSum,
    eps_combination,
    lp_chord_add,
    orlicz_chord_combine,
    solve_half_chord,
)
from orlicz_chord.errors import DimensionMismatch, InvalidParameter, ZeroCoefficients
from orlicz_chord.orlicz_fn import Power, PowerMix, PowerSum, SumOfUnivariate
from orlicz_chord.quadrature import circle_rule, sphere_rule_n3
from orlicz_chord.star_body import Ball, Dilate, Ellipsoid, PerturbationTerm, PerturbedSphere, radial_distance

RULE = sphere_rule_n3(16, 32)
B1, B2 = Ball.centered(1, 3), Ball.centered(2, 3)


def bumpy():
    return PerturbedSphere(1.2, [PerturbationTerm(0.3, (0, 0.6, 0.8), 2), PerturbationTerm(0.1, (1, 0, 0), 1)], 3)


def test_unit_balls_l2_sum():
    S = orlicz_chord_combine([B1, B1], [1, 1], Power(2))
    assert np.allclose(S.half_chord_on(RULE), 2**-0.5, rtol=1e-14, atol=0)


@pytest.mark.parametrize("p", [1, 2, 3.5])
@pytest.mark.parametrize("eps", [0.5, 0.1, 1e-3])
def test_concentric_balls_closed_form(p, eps):
    S = orlicz_chord_combine([B1, B2], [1, eps], Power(p))
    expected = (1 + eps * 2.0**-p) ** (-1 / p)
    assert np.allclose(S.half_chord_on(RULE), expected, rtol=1e-12, atol=0)


def test_identity_coefficients_reproduce_first_body():
    K = Ellipsoid([1, 2, 3], center=[0.1, 0.2, 0.3])
    S = orlicz_chord_combine([K, bumpy()], [1, 0], [Power(2), PowerMix(0.5, 1, 3)])
    assert np.allclose(S.half_chord_on(RULE), K.half_chord_on(RULE), rtol=1e-12)


def test_lp_sum_examples():
    assert np.allclose(lp_chord_add(B1, B1, 1).half_chord_on(RULE), 0.5, rtol=1e-15)
    assert np.allclose(lp_chord_add(B1, B2, 2).half_chord_on(RULE), 1.25**-0.5, rtol=1e-15)
    assert 1.25**-0.5 == pytest.approx(0.894427, abs=1e-6)


@pytest.mark.parametrize("p", [1, 2, 4])
def test_orlicz_power_matches_lp_closed_form(p):
    K, L = Ellipsoid([1, 2, 3]), bumpy()
    a = orlicz_chord_combine([K, L], [0.7, 1.3], Power(p)).half_chord_on(RULE)
    b = lp_chord_add(K, L, p, 0.7, 1.3).half_chord_on(RULE)
    assert np.max(np.abs(a - b) / b) < 1e-10


def test_eps_combination_examples():
    K = Ellipsoid([1, 2, 3])
    S0 = eps_combination(K, bumpy(), 0.0, Power(2), Power(1))
    assert np.max(np.abs(S0.half_chord_on(RULE) - K.half_chord_on(RULE))) < 1e-12
    S = eps_combination(B1, B2, 0.1, Power(2), Power(2))
    assert np.allclose(S.half_chord_on(RULE), (1 + 0.1 / 4) ** -0.5, rtol=1e-12)
    assert (1 + 0.1 / 4) ** -0.5 == pytest.approx(0.987730, abs=1e-6)


def test_eps_combination_converges_monotonically():
    K, L = Ellipsoid([1.0, 1.1, 0.9]), Ellipsoid([1.5, 1.2, 1.8])
    dist = [radial_distance(eps_combination(K, L, e, Power(1), PowerMix(0.5, 1, 3)), K, RULE)
            for e in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)]
    assert all(b < a for a, b in zip(dist, dist[1:]))
    assert dist[-1] < 1e-5


def test_defining_equation_residual():
    S = orlicz_chord_combine([Ellipsoid([1, 2, 3]), bumpy(), B2], [0.5, 1, 2], [Power(1), PowerMix(0.25, 2, 4), Power(3)])
    assert np.max(S.residual_on(RULE)) < 1e-11


def test_multivariate_gauge_terms():
    K, L = Ellipsoid([1, 2, 3]), bumpy()
    a = orlicz_chord_combine([K, L], [1, 1], PowerSum(2, 2)).half_chord_on(RULE)
    b = lp_chord_add(K, L, 2).half_chord_on(RULE)
    assert np.max(np.abs(a / b - 1)) < 1e-10
    c = orlicz_chord_combine([K, L], [1, 1], SumOfUnivariate((Power(2), Power(2)))).half_chord_on(RULE)
    assert np.max(np.abs(c / b - 1)) < 1e-10


def test_envelope_brackets_sum():
    K, L = Ellipsoid([1, 2, 3]), bumpy()
    S = orlicz_chord_combine([K, L], [1, 1], [Power(2), PowerMix(0.5, 1, 3)])
    lo, hi = S.envelope_on(RULE)
    d = S.half_chord_on(RULE)
    assert np.all(lo <= d * (1 + 1e-12)) and np.all(d <= hi * (1 + 1e-12))


def test_combination_commutes_with_dilation():
    K, L = Ellipsoid([1, 2, 3]), bumpy()
    g = [Power(2), PowerMix(0.5, 1, 3)]
    a = orlicz_chord_combine([Dilate(3, K), Dilate(3, L)], [1, 1], g).half_chord_on(RULE)
    b = orlicz_chord_combine([K, L], [1, 1], g).half_chord_on(RULE)
    assert np.allclose(a, 3 * b, rtol=1e-12)


def test_nested_sums_and_direct_evaluation():
    S = orlicz_chord_combine([lp_chord_add(B1, B2, 2), Ellipsoid([1, 2, 3])], [1, 1], Power(1))
    U = RULE.nodes[:50]
    assert np.allclose(S.half_chord(U), S.half_chord_on(RULE)[:50], rtol=1e-12)
    assert np.allclose(S.radial(U), S.half_chord(U), rtol=0)
    assert S.depth == 2


def test_solver_handles_extreme_ratios():
    D = np.array([[1e-6, 1.0, 1e6], [1e6, 1.0, 1e-6]])
    lam = solve_half_chord(D, [1.0, 1.0], [Power(1), Power(1)])
    assert np.allclose(lam, 1 / (1 / D[0] + 1 / D[1]), rtol=1e-12)


def test_invalid_combinations():
    with pytest.raises(ZeroCoefficients):
        orlicz_chord_combine([B1, B2], [0, 0], Power(2))
    with pytest.raises(InvalidParameter):
        orlicz_chord_combine([B1, B2], [1, -1], Power(2))
    with pytest.raises(InvalidParameter):
        orlicz_chord_combine([B1], [1], Power(2))
    with pytest.raises(InvalidParameter):
        orlicz_chord_combine([B1, B2], [1, 1], PowerSum(2, 3))
    with pytest.raises(DimensionMismatch):
        orlicz_chord_combine([B1, Ball.centered(1, 2)], [1, 1], Power(2))
    with pytest.raises(InvalidParameter):
        LpSum(0.5, 1, 1, B1, B2)


def test_nesting_depth_limit():
    S = B1
    for _ in range(8):
        S = lp_chord_add(S, B2, 2)
    with pytest.raises(InvalidParameter):
        lp_chord_add(S, B2, 2)


def test_results_are_cached_and_read_only():
    S = orlicz_chord_combine([B1, B2], [1, 1], Power(2))
    a = S.half_chord_on(RULE)
    assert S.half_chord_on(RULE) is a
    with pytest.raises(ValueError):
        a[0] = 0.0


def test_planar_sum():
    rule = circle_rule(128)
    K = Ellipsoid([1.0, 2.0])
    S = orlicz_chord_combine([K, Dilate(2, K)], [1, 1], Power(1))
    assert np.allclose(S.half_chord_on(rule), K.half_chord_on(rule) * 2 / 3, rtol=1e-12)
