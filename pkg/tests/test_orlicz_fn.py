import math
from dataclasses import dataclass

import numpy as np
import pytest

from orlicz_chord.errors import InvalidParameter, NonPositiveArgument
from orlicz_chord.orlicz_fn import (
    OrliczFunction,
    Power,
    PowerMix,
    PowerSum,
    SumOfUnivariate,
    finite_difference_slope,
    gauge_from_dict,
    validate_class,
)


@dataclass(frozen=True)
class ScaledPower(OrliczFunction):
    """c * t^-2: in class only when c == 1."""

    c: float

    def _value(self, t):
        return self.c * t**-2.0

    def _slope(self, t):
        return -2.0 * self.c * t**-3.0

    def right_derivative_at_one(self):
        return -2.0 * self.c

    def to_dict(self):
        return {"family": "scaled", "c": self.c}


@dataclass(frozen=True)
class Bump(OrliczFunction):
    """2 / (1 + t^2): decreasing and normalized, but concave near 0 and finite there."""

    def _value(self, t):
        return 2.0 / (1.0 + t * t)

    def _slope(self, t):
        return -4.0 * t / (1.0 + t * t) ** 2

    def right_derivative_at_one(self):
        return -1.0

    def to_dict(self):
        return {"family": "bump"}


def test_evaluate_examples():
    assert Power(2)(1.0) == 1.0
    assert Power(2)(2.0) == 0.25
    assert PowerMix(0.5, 1, 3)(2.0) == pytest.approx(0.3125, abs=1e-15)


def test_evaluate_vectorized():
    t = np.array([0.5, 1.0, 4.0])
    assert np.allclose(Power(1)(t), [2.0, 1.0, 0.25], rtol=1e-15)


@pytest.mark.parametrize("t", [0.0, -1.0, 1e-20])
def test_nonpositive_argument(t):
    with pytest.raises(NonPositiveArgument):
        Power(2)(t)


def test_inverse_examples():
    assert Power(2).inverse(0.25) == pytest.approx(2.0, rel=1e-14)
    for p in (1, 1.5, 3, 7):
        assert Power(p).inverse(1.0) == pytest.approx(1.0, rel=1e-14)
    assert abs(PowerMix(0.5, 1, 3).inverse(0.3125) - 2.0) < 1e-12


def test_inverse_round_trip_over_range():
    phi = PowerMix(0.25, 2, 4)
    for t in np.logspace(-3, 3, 13):
        assert phi.inverse(phi(t)) == pytest.approx(t, rel=1e-11)


def test_right_derivative_examples():
    assert Power(2).right_derivative_at_one() == -2
    assert Power(1).right_derivative_at_one() == -1
    phi = PowerMix(0.5, 1, 3)
    assert phi.right_derivative_at_one() == pytest.approx(-2.0, rel=1e-15)
    assert finite_difference_slope(phi) == pytest.approx(-2.0, rel=1e-8)


def test_power_rejects_p_below_one():
    with pytest.raises(InvalidParameter, match="p must be ≥ 1"):
        Power(0.5)


@pytest.mark.parametrize("args", [(-0.1, 1, 2), (1.1, 1, 2), (0.5, 0.5, 2), (0.5, 1, 0.9)])
def test_power_mix_rejects_bad_parameters(args):
    with pytest.raises(InvalidParameter):
        PowerMix(*args)


@pytest.mark.parametrize("phi", [Power(1), Power(2), Power(3.5), PowerMix(0.5, 1, 3), PowerMix(0.0, 1, 2)])
def test_shipped_gauges_validate(phi):
    report = validate_class(phi)
    assert report.ok, report.failures


def test_validation_flags_bad_normalization():
    report = validate_class(ScaledPower(0.9))
    assert not report.ok
    assert "normalized" in report.failures


def test_validation_flags_nonconvex_and_finite_at_zero():
    failures = validate_class(Bump()).failures
    assert "convex" in failures
    assert "blows_up_at_zero" in failures
    assert "normalized" not in failures


def test_multivariate_gauges_validate():
    assert validate_class(PowerSum(1, 2)).checks["decreasing_each_variable"]
    assert validate_class(PowerSum(3, 3)).ok
    assert validate_class(SumOfUnivariate((Power(2), PowerMix(0.5, 1, 3)))).ok


def test_multivariate_flags_bad_term():
    report = validate_class(SumOfUnivariate((Power(2), ScaledPower(0.9))))
    assert not report.ok


def test_power_sum_evaluates_columnwise():
    phi = PowerSum(2, 2)
    assert phi(np.array([1.0, 1.0])) == 2.0
    assert phi(np.array([2.0, 0.5])) == pytest.approx(0.25 + 4.0, rel=1e-15)
    x = np.array([[1.0, 2.0], [1.0, 1.0]])
    assert np.allclose(phi(x), [1.25, 2.0], rtol=1e-15)


def test_power_sum_terms_match():
    assert PowerSum(3, 4).terms() == [Power(3)] * 4


@pytest.mark.parametrize(
    "phi", [Power(2), PowerMix(0.25, 2, 4), PowerSum(2, 3), SumOfUnivariate((Power(1), PowerMix(0.5, 1, 3)))]
)
def test_dict_round_trip(phi):
    assert gauge_from_dict(phi.to_dict()) == phi


def test_gauge_from_dict_errors():
    with pytest.raises(InvalidParameter, match="p must be ≥ 1"):
        gauge_from_dict({"family": "power", "p": 0.5})
    with pytest.raises(InvalidParameter):
        gauge_from_dict({"family": "power"})
    with pytest.raises(InvalidParameter):
        gauge_from_dict({"family": "exp"})


def test_limits_at_zero_and_infinity():
    for phi in (Power(1), PowerMix(0.5, 1, 3)):
        assert phi(1e-8) > 1e6
        assert phi(1e8) < 1e-6
    assert math.isfinite(Power(1)(1e-14))
