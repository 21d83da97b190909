import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from orlicz_chord.errors import DimensionMismatch, InvalidParameter
from orlicz_chord.quadrature import (
    circle_rule,
    integrate,
    monte_carlo_rule,
    pairwise_sum,
    parse_rule,
    refine,
    sphere_area,
    sphere_rule_n3,
)
from orlicz_chord.star_body import Ball, Ellipsoid


def test_sphere_area_known_values():
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-15)


def test_circle_weights_sum_to_circumference():
    assert abs(circle_rule(8).total_weight - 2 * math.pi) < 1e-14


@pytest.mark.parametrize("m", [8, 16, 64, 256])
def test_circle_integrates_cos_squared(m):
    rule = circle_rule(m)
    assert abs(integrate(rule.nodes[:, 0] ** 2, rule) - math.pi) < 1e-12


def test_circle_integrates_one():
    rule = circle_rule(64)
    assert abs(integrate(np.ones(rule.size), rule) - 2 * math.pi) < 1e-13


def test_sphere_rule_constant_and_moment():
    rule = sphere_rule_n3(16, 32)
    assert abs(integrate(np.ones(rule.size), rule) - 4 * math.pi) < 1e-12
    assert abs(integrate(rule.nodes[:, 2] ** 2, rule) - 4 * math.pi / 3) < 1e-12


def test_sphere_rule_mixed_moment():
    # int x^2 y^2 dS = 4 pi / 15
    rule = sphere_rule_n3(16, 32)
    x, y = rule.nodes[:, 0], rule.nodes[:, 1]
    assert abs(integrate(x * x * y * y, rule) - 4 * math.pi / 15) < 1e-12


def test_sphere_rule_is_antipodally_symmetric():
    rule = sphere_rule_n3(12, 24)
    index = {tuple(np.round(u, 12)): w for u, w in zip(rule.nodes, rule.weights)}
    for u, w in zip(rule.nodes, rule.weights):
        assert index[tuple(np.round(-u, 12))] == pytest.approx(w, rel=1e-14)


def test_ellipsoid_volume_from_radial_cubes(rule3):
    E = Ellipsoid([1.0, 2.0, 3.0])
    volume = integrate(E.radial_on(rule3) ** 3, rule3) / 3
    assert abs(volume - 8 * math.pi) < 1e-6


def test_monte_carlo_weights_sum_exactly():
    rule = monte_carlo_rule(4, 100_000, 7)
    assert rule.total_weight == pytest.approx(2 * math.pi**2, rel=1e-14)


def test_monte_carlo_symmetry_moment_within_three_standard_errors():
    rule = monte_carlo_rule(4, 100_000, 7)
    f = rule.nodes[:, 0] ** 2
    target = 2 * math.pi**2 / 4
    se = 2 * math.pi**2 * np.std(f) / math.sqrt(rule.size)
    assert abs(integrate(f, rule) - target) < 3 * se


def test_monte_carlo_is_deterministic():
    a = monte_carlo_rule(3, 1000, 11)
    monte_carlo_rule.cache_clear()
    b = monte_carlo_rule(3, 1000, 11)
    assert np.array_equal(a.nodes, b.nodes)
    assert not np.array_equal(a.nodes, monte_carlo_rule(3, 1000, 12).nodes)


def test_offset_ball_half_chord_matches_adaptive_oracle(rule3):
    # d(u) = sqrt(0.91 + 0.09 u_3^2), so int d^3 dS reduces to one dimension
    K = Ball(1.0, [0, 0, 0.3])
    oracle = 2 * math.pi * sp_integrate.quad(lambda t: (0.91 + 0.09 * t * t) ** 1.5, -1, 1, epsabs=1e-14)[0]
    assert abs(integrate(K.half_chord_on(rule3) ** 3, rule3) - oracle) < 1e-9


def test_unit_ball_half_chord_cubed(rule3):
    assert abs(integrate(Ball.centered(1, 3).half_chord_on(rule3) ** 3, rule3) - 4 * math.pi) < 1e-12


@pytest.mark.parametrize("rule_id", ["circle:64", "gauss3:48x96", "mc:4:1000:7"])
def test_parse_round_trip(rule_id):
    assert parse_rule(rule_id).rule_id == rule_id


@pytest.mark.parametrize("bad", ["circle", "circle:0", "gauss3:4", "mc:1:10:0", "foo:3", "gauss3:axb", ""])
def test_parse_rejects_malformed(bad):
    with pytest.raises(InvalidParameter):
        parse_rule(bad)


def test_refine_doubles_resolution():
    assert refine(parse_rule("circle:64")).rule_id == "circle:128"
    assert refine(parse_rule("gauss3:48x96")).rule_id == "gauss3:96x192"
    assert refine(parse_rule("mc:3:1000:4")).rule_id == "mc:3:2000:4"


def test_integrate_length_mismatch():
    with pytest.raises(DimensionMismatch):
        integrate(np.ones(3), circle_rule(8))


def test_pairwise_sum_is_accurate_and_order_fixed():
    values = np.full(1_000_001, 0.1)
    assert abs(pairwise_sum(values) - 100000.1) < 1e-8
    assert pairwise_sum(values) == pairwise_sum(values.copy())


def test_rule_arrays_are_read_only():
    rule = circle_rule(16)
    with pytest.raises(ValueError):
        rule.weights[0] = 1.0
