"""Convex decreasing gauge functions used by the Orlicz chord operations.

Univariate gauges phi: (0, inf) -> (0, inf) are normalized so phi(1) = 1,
blow up at 0 and vanish at infinity.  Only closed-form families ship:

    Power(p)          phi(t) = t^{-p},                     p >= 1
    PowerMix(a, p, q) phi(t) = a t^{-p} + (1 - a) t^{-q},   a in [0, 1]

Multivariate gauges are sums of univariate ones (``SumOfUnivariate``) or
``PowerSum(p, arity)``, phi(x) = sum_j x_j^{-p}.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, InvalidParameter, NonPositiveArgument

ARG_FLOOR = 1e-14
MAX_ITER = 200


def _check_args(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= ARG_FLOOR)):
        raise NonPositiveArgument(f"gauge argument must be >= {ARG_FLOOR:g}, got min {np.min(t)!r}")
    return t


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


class OrliczFunction(ABC):
    """A univariate gauge.  Subclasses implement the closed forms."""

    strictly_convex = True

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t):
        return _scalar_or_array(self._value(_check_args(t)))

    def derivative(self, t):
        return _scalar_or_array(self._slope(_check_args(t)))

    @abstractmethod
    def _value(self, t): ...

    @abstractmethod
    def _slope(self, t): ...

    @abstractmethod
    def right_derivative_at_one(self) -> float: ...

    @abstractmethod
    def to_dict(self) -> dict: ...

    def inverse(self, y: float) -> float:
        """The unique t > 0 with phi(t) = y, by bisection in log t.

        The bracket is grown geometrically from t = 1.
        """
        if not y > 0:
            raise NonPositiveArgument(f"inverse needs y > 0, got {y!r}")
        lo = hi = 1.0
        for _ in range(MAX_ITER):
            if self._value(lo) >= y:
                break
            lo *= 0.5
        else:
            raise ConvergenceFailure(f"could not bracket inverse of {self} at {y!r}")
        for _ in range(MAX_ITER):
            if self._value(hi) <= y:
                break
            hi *= 2.0
        else:
            raise ConvergenceFailure(f"could not bracket inverse of {self} at {y!r}")
        for _ in range(MAX_ITER):
            mid = math.sqrt(lo * hi)
            if not lo < mid < hi:
                return mid
            if self._value(mid) > y:
                lo = mid
            else:
                hi = mid
        raise ConvergenceFailure(f"inverse of {self} at {y!r} did not converge")


@dataclass(frozen=True)
class Power(OrliczFunction):
    p: float

    def __post_init__(self):
        if not (isinstance(self.p, (int, float)) and self.p >= 1):
            raise InvalidParameter("p must be ≥ 1")

    def _value(self, t):
        return t ** (-self.p)

    def _slope(self, t):
        return -self.p * t ** (-self.p - 1.0)

    def inverse(self, y):
        if not y > 0:
            raise NonPositiveArgument(f"inverse needs y > 0, got {y!r}")
        return float(y ** (-1.0 / self.p))

    def right_derivative_at_one(self):
        return -float(self.p)

    def to_dict(self):
        return {"family": "power", "p": self.p}


@dataclass(frozen=True)
class PowerMix(OrliczFunction):
    a: float
    p: float
    q: float

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise InvalidParameter("a must lie in [0, 1]")
        if not (self.p >= 1 and self.q >= 1):
            raise InvalidParameter("p must be ≥ 1 and q must be ≥ 1")

    def _value(self, t):
        return self.a * t ** (-self.p) + (1.0 - self.a) * t ** (-self.q)

    def _slope(self, t):
        return -self.a * self.p * t ** (-self.p - 1.0) - (1.0 - self.a) * self.q * t ** (-self.q - 1.0)

    def right_derivative_at_one(self):
        return -(self.a * self.p + (1.0 - self.a) * self.q)

    def to_dict(self):
        return {"family": "power_mix", "a": self.a, "p": self.p, "q": self.q}


def finite_difference_slope(phi: OrliczFunction, steps=(1e-4, 5e-5, 2.5e-5)) -> float:
    """One-sided forward-difference estimate of phi'_r(1), Richardson-extrapolated.

    ``steps`` must halve successively; the table assumes an error series in
    integer powers of h.
    """
    f1 = phi(1.0)
    row = [(phi(1.0 + h) - f1) / h for h in steps]
    order = 1
    while len(row) > 1:
        fac = 2.0**order
        row = [(fac * row[k + 1] - row[k]) / (fac - 1.0) for k in range(len(row) - 1)]
        order += 1
    return row[0]


class OrliczFunctionM(ABC):
    """A gauge of m >= 2 variables, decreasing in each."""

    @property
    @abstractmethod
    def arity(self) -> int: ...

    @abstractmethod
    def terms(self) -> list[OrliczFunction]:
        """Univariate summands; every shipped multivariate gauge is a sum."""

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        x = _check_args(x)
        if x.shape[-1] != self.arity:
            raise InvalidParameter(f"expected {self.arity} arguments, got {x.shape[-1]}")
        parts = self.terms()
        total = parts[0]._value(x[..., 0])
        for j in range(1, self.arity):
            total = total + parts[j]._value(x[..., j])
        return _scalar_or_array(total)

    @abstractmethod
    def to_dict(self) -> dict: ...


@dataclass(frozen=True)
class SumOfUnivariate(OrliczFunctionM):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise InvalidParameter("a multivariate gauge needs at least 2 terms")
        for g in self.parts:
            if not isinstance(g, OrliczFunction):
                raise InvalidParameter(f"{g!r} is not a univariate gauge")

    @property
    def arity(self):
        return len(self.parts)

    def terms(self):
        return list(self.parts)

    def to_dict(self):
        return {"family": "sum", "parts": [g.to_dict() for g in self.parts]}


@dataclass(frozen=True)
class PowerSum(OrliczFunctionM):
    p: float
    m: int = 2
    _term: Power = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise InvalidParameter("arity must be an integer ≥ 2")
        object.__setattr__(self, "_term", Power(self.p))

    @property
    def arity(self):
        return int(self.m)

    def terms(self):
        return [self._term] * self.arity

    def to_dict(self):
        return {"family": "power_sum", "p": self.p, "arity": int(self.m)}


def gauge_from_dict(spec: dict):
    """Inverse of ``to_dict`` for every shipped gauge family."""
    spec = dict(spec)
    family = spec.pop("family", None)
    try:
        if family == "power":
            return Power(_num(spec.pop("p")))
        if family == "power_mix":
            return PowerMix(_num(spec.pop("a")), _num(spec.pop("p")), _num(spec.pop("q")))
        if family == "power_sum":
            return PowerSum(_num(spec.pop("p")), int(spec.pop("arity", 2)))
        if family == "sum":
            return SumOfUnivariate(tuple(gauge_from_dict(g) for g in spec.pop("parts")))
    except KeyError as exc:
        raise InvalidParameter(f"gauge family {family!r} is missing parameter {exc.args[0]!r}") from None
    raise InvalidParameter(f"unknown gauge family {family!r}")


def _num(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidParameter(f"expected a number, got {v!r}")
    return v


@dataclass
class ValidationReport:
    gauge: object
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def _validate_univariate(phi: OrliczFunction) -> ValidationReport:
    t = np.logspace(-6, 6, 200)
    v = np.array([phi(x) for x in t])
    rep = ValidationReport(phi)
    rep.checks["positive"] = bool(np.all(v > 0))
    rep.checks["strictly_decreasing"] = bool(np.all(np.diff(v) < 0))
    # convexity on a non-uniform grid: each value lies below the chord of its
    # neighbours; tolerance scaled by the local magnitude
    w = (t[2:] - t[1:-1]) / (t[2:] - t[:-2])
    chord = w * v[:-2] + (1.0 - w) * v[2:]
    scale = np.maximum.reduce([np.abs(v[:-2]), np.abs(v[1:-1]), np.abs(v[2:])])
    rep.checks["convex"] = bool(np.all(v[1:-1] - chord <= 1e-10 * scale))
    rep.checks["normalized"] = abs(phi(1.0) - 1.0) <= 1e-14
    rep.checks["blows_up_at_zero"] = phi(1e-8) > 1e6
    rep.checks["vanishes_at_infinity"] = phi(1e8) < 1e-6
    analytic = phi.right_derivative_at_one()
    rep.checks["negative_slope_at_one"] = analytic < 0
    rep.checks["slope_matches_finite_difference"] = abs(analytic - finite_difference_slope(phi)) <= 1e-6
    return rep


def _validate_multivariate(phi: OrliczFunctionM, seed: int = 0) -> ValidationReport:
    m = phi.arity
    t = np.logspace(-6, 6, 200)
    rep = ValidationReport(phi)
    decreasing = True
    for j in range(m):
        for base in (1e-3, 1.0, 1e3):
            x = np.full((t.size, m), base)
            x[:, j] = t
            vals = phi(x)
            step = np.diff(vals)
            # no increase beyond roundoff; strictness is checked per term below,
            # since a tiny term can vanish against the others in floating point
            ulp = 4 * np.finfo(float).eps * np.abs(vals[:-1])
            decreasing &= bool(np.all(step <= ulp))
    rep.checks["decreasing_each_variable"] = decreasing
    rng = np.random.default_rng(seed)
    a = np.exp(rng.uniform(-4, 4, size=(500, m)))
    b = np.exp(rng.uniform(-4, 4, size=(500, m)))
    mid, fa, fb = phi((a + b) / 2), phi(a), phi(b)
    rep.checks["convex"] = bool(np.all(mid <= (fa + fb) / 2 + 1e-10 * np.maximum(fa, fb)))
    rep.checks["normalized"] = abs(phi(np.ones(m)) - m) <= 1e-12 * m
    for k, term in enumerate(phi.terms()):
        sub = _validate_univariate(term)
        rep.checks[f"term{k}_in_class"] = sub.ok
    return rep


def validate_class(phi) -> ValidationReport:
    """Run the class-membership checks for a univariate or multivariate gauge."""
    if isinstance(phi, OrliczFunctionM):
        return _validate_multivariate(phi)
    return _validate_univariate(phi)
