"""Chord-integral functionals evaluated by spherical quadrature.

All functionals take the rule explicitly.  Each returns an
:class:`IntegralResult` whose ``error_estimate`` is the difference between
the value on ``rule`` and on the same rule at double resolution.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .chord_addition import eps_combination
from .errors import (
    ArityMismatch,
    ConvergenceFailure,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidParameter,
    TabulatedLookupError,
)
from .orlicz_fn import OrliczFunction
from .quadrature import SphereQuadrature, integrate, refine
from .star_body import StarBody

log = logging.getLogger(__name__)

DEFAULT_EPS_SCHEDULE = (1e-3, 5e-4, 2.5e-4, 1.25e-4)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    rule_id: str
    error_estimate: float

    def __float__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class ChordMeasure:
    """Discrete chord measure: node weights w_k d(K,u_k)^{n-i} / (n B_i(K))."""

    rule_id: str
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


def _check_index(i, n):
    if isinstance(i, bool) or int(i) != i or not 0 <= i < n:
        raise IndexOutOfRange(f"index i must be an integer with 0 <= i < {n}, got {i!r}")
    return int(i)


def _check_dims(bodies, rule):
    for K in bodies:
        if K.dimension != rule.dimension:
            raise DimensionMismatch(f"body of dimension {K.dimension} on rule {rule.rule_id}")


def _with_error(integrand, rule: SphereQuadrature, estimate_error: bool) -> IntegralResult:
    value = integrate(integrand(rule), rule) / rule.dimension
    err = 0.0
    if estimate_error:
        fine = refine(rule)
        try:
            err = abs(value - integrate(integrand(fine), fine) / fine.dimension)
        except TabulatedLookupError:
            log.warning("tabulated body cannot be refined beyond %s; error estimate set to 0", rule.rule_id)
    return IntegralResult(value, rule.rule_id, err)


def chord_integral(K: StarBody, i: int, rule: SphereQuadrature, estimate_error: bool = True) -> IntegralResult:
    """B_i(K) = (1/n) sum_k w_k d(K, u_k)^{n-i}."""
    n = rule.dimension
    i = _check_index(i, n)
    _check_dims([K], rule)
    return _with_error(lambda r: K.half_chord_on(r) ** (n - i), rule, estimate_error)


def mixed_chord_integral(bodies, rule: SphereQuadrature, estimate_error: bool = True) -> IntegralResult:
    """B(K_1, ..., K_n) = (1/n) sum_k w_k prod_j d(K_j, u_k)."""
    bodies = list(bodies)
    if len(bodies) != rule.dimension:
        raise ArityMismatch(f"need exactly {rule.dimension} bodies, got {len(bodies)}")
    _check_dims(bodies, rule)

    def integrand(r):
        out = bodies[0].half_chord_on(r)
        for K in bodies[1:]:
            out = out * K.half_chord_on(r)
        return out

    return _with_error(integrand, rule, estimate_error)


def ith_mixed_chord(K: StarBody, L: StarBody, i: int, rule: SphereQuadrature, estimate_error: bool = True) -> IntegralResult:
    """B_i(K, L) = (1/n) sum_k w_k d_K^{n-i-1} d_L."""
    n = rule.dimension
    i = _check_index(i, n)
    _check_dims([K, L], rule)
    return _with_error(
        lambda r: K.half_chord_on(r) ** (n - i - 1) * L.half_chord_on(r), rule, estimate_error
    )


def lp_mixed_chord(K: StarBody, L: StarBody, i: int, p: float, rule: SphereQuadrature, estimate_error: bool = True) -> IntegralResult:
    """B_{-p,i}(K, L) = (1/n) sum_k w_k d_K^{n-i+p} d_L^{-p}."""
    n = rule.dimension
    i = _check_index(i, n)
    if not p >= 1:
        raise InvalidParameter("p must be ≥ 1")
    _check_dims([K, L], rule)
    return _with_error(
        lambda r: K.half_chord_on(r) ** (n - i + p) * L.half_chord_on(r) ** (-p), rule, estimate_error
    )


def orlicz_mixed_chord(K: StarBody, L: StarBody, i: int, phi: OrliczFunction, rule: SphereQuadrature, estimate_error: bool = True) -> IntegralResult:
    """B_{phi,i}(K, L) = (1/n) sum_k w_k phi(d_L / d_K) d_K^{n-i}."""
    n = rule.dimension
    i = _check_index(i, n)
    _check_dims([K, L], rule)

    def integrand(r):
        dK = K.half_chord_on(r)
        return phi(L.half_chord_on(r) / dK) * dK ** (n - i)

    return _with_error(integrand, rule, estimate_error)


def chord_measure(K: StarBody, i: int, rule: SphereQuadrature) -> ChordMeasure:
    n = rule.dimension
    i = _check_index(i, n)
    _check_dims([K], rule)
    mass = rule.weights * K.half_chord_on(rule) ** (n - i)
    weights = mass / (n * chord_integral(K, i, rule, estimate_error=False).value)
    weights.setflags(write=False)
    return ChordMeasure(rule.rule_id, weights)


def _neville_diagonal(eps, values):
    """Diagonal of the polynomial extrapolation table to eps = 0."""
    T = [list(values)]
    for j in range(1, len(values)):
        prev = T[-1]
        row = []
        for k in range(len(prev) - 1):
            e_new, e_old = eps[k + j], eps[k]
            row.append(prev[k + 1] + (prev[k + 1] - prev[k]) * e_new / (e_old - e_new))
        T.append(row)
    return [row[-1] for row in T]


def variational_estimate(K, L, i, phi1, phi2, rule, eps_schedule=DEFAULT_EPS_SCHEDULE):
    """Extrapolated B_{phi2,i}(K, L) from the right derivative of B_i(K +_phi eps L).

    Returns ``(estimate, spread)`` where ``spread`` is the relative gap
    between the last two extrapolants.
    """
    n = rule.dimension
    i = _check_index(i, n)
    eps = [float(e) for e in eps_schedule]
    if len(eps) < 2 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidParameter("eps schedule must be positive and strictly decreasing, length >= 2")
    slope = phi1.right_derivative_at_one()
    if not slope < 0:
        raise ConvergenceFailure(f"right derivative of {phi1} at 1 is {slope}, expected < 0")
    base = chord_integral(K, i, rule, estimate_error=False).value
    quotients = []
    for e in eps:
        moved = chord_integral(eps_combination(K, L, e, phi1, phi2), i, rule, estimate_error=False).value
        q = (moved - base) / e
        if not q < 0:
            raise ConvergenceFailure(f"difference quotient at eps={e:g} is {q!r}, expected < 0")
        quotients.append(q)
    diag = _neville_diagonal(eps, quotients)
    scale = slope / (n - i)
    est, prev = diag[-1] * scale, diag[-2] * scale
    spread = abs(est - prev) / abs(est)
    if spread > 1e-3:
        raise ConvergenceFailure(f"successive extrapolants differ by {spread:.3g} relative")
    return est, spread


def variational_derivative(K, L, i, phi1, phi2, rule, eps_schedule=DEFAULT_EPS_SCHEDULE) -> float:
    """phi1'_r(1) / (n - i) * d/deps B_i(K +_phi eps . L) at eps = 0+.

    One-sided difference quotients on ``eps_schedule`` are extrapolated to
    eps = 0 assuming an error series in powers of eps.
    """
    return variational_estimate(K, L, i, phi1, phi2, rule, eps_schedule)[0]
