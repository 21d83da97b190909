"""Orlicz chord additions and linear combinations of star bodies.

The half chord lam(u) of a combination solves, direction by direction,

    sum_j alpha_j * phi_j(d(K_j, u) / lam) = 1.

Each phi_j is decreasing, so the left side increases strictly in lam, from 0
as lam -> 0+ to infinity as lam -> infinity.  The root is bracketed by
doubling/halving from max_j d_j, bisected in log lam and polished with a
safeguarded Newton step.  All directions are solved at once on arrays.

A combination is defined only through its half chord, so its radial
function is taken to be that half chord (the origin-symmetric
representative).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, InvalidParameter, ZeroCoefficients
from .orlicz_fn import OrliczFunction, OrliczFunctionM, Power
from .quadrature import SphereQuadrature
from .star_body import StarBody

RTOL = 1e-12
RESIDUAL_TOL = 1e-11
MAX_ITER = 200
MAX_DEPTH = 8


def solve_half_chord(D, coefficients, gauges, rtol=RTOL, max_iter=MAX_ITER):
    """Solve sum_j c_j phi_j(D[j] / lam) = 1 for lam, columnwise.

    Parameters
    ----------
    D : (m, N) array of positive half chords
    coefficients : m positive reals (zero terms must already be dropped)
    gauges : m univariate gauges

    Returns
    -------
    (N,) array of lam values.
    """
    D = np.atleast_2d(np.asarray(D, dtype=float))
    coefficients = [float(c) for c in coefficients]

    def F(lam, cols=slice(None)):
        total = -1.0
        for c, g, d in zip(coefficients, gauges, D[:, cols]):
            total = total + c * g._value(d / lam)
        return total

    def dF(lam, cols=slice(None)):
        total = 0.0
        for c, g, d in zip(coefficients, gauges, D[:, cols]):
            t = d / lam
            total = total - c * g._slope(t) * t / lam
        return total

    lam0 = D.max(axis=0)
    lo, hi = lam0.copy(), lam0.copy()
    its = 0
    while True:
        bad = F(lo) >= 0
        if not bad.any():
            break
        lo[bad] *= 0.5
        its += 1
        if its > max_iter:
            raise ConvergenceFailure("could not bracket the chord-addition root from below")
    while True:
        bad = F(hi) <= 0
        if not bad.any():
            break
        hi[bad] *= 2.0
        its += 1
        if its > max_iter:
            raise ConvergenceFailure("could not bracket the chord-addition root from above")

    # Newton inside the bracket, geometric bisection whenever Newton leaves it.
    # Only unconverged columns are iterated.
    out = np.sqrt(lo * hi)
    act = np.arange(out.size)
    lam, lo, hi = out.copy(), lo, hi
    while act.size:
        its += 1
        if its > max_iter:
            raise ConvergenceFailure(f"chord-addition solver exceeded {max_iter} iterations")
        f = F(lam, act)
        hi = np.where(f > 0, lam, hi)
        lo = np.where(f < 0, lam, lo)
        step = f / dF(lam, act)
        cand = lam - step
        small = np.abs(step) <= rtol * lam
        inside = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        new = np.where(f == 0, lam, np.where(inside | small, cand, np.sqrt(lo * hi)))
        done = small | (f == 0) | (hi <= lo * (1.0 + rtol))
        out[act] = new
        keep = ~done
        act, lam, lo, hi = act[keep], new[keep], lo[keep], hi[keep]
    lam = out
    res = np.abs(F(lam))
    if np.any(~(res < RESIDUAL_TOL)):
        raise ConvergenceFailure(f"chord-addition residual {np.max(res):.3g} above {RESIDUAL_TOL:g}")
    return lam


def _gauge_terms(gauges, m: int) -> tuple[list[OrliczFunction], object]:
    if isinstance(gauges, OrliczFunctionM):
        if gauges.arity != m:
            raise InvalidParameter(f"gauge arity {gauges.arity} does not match {m} bodies")
        return gauges.terms(), gauges
    if isinstance(gauges, OrliczFunction):
        return [gauges] * m, gauges
    gauges = list(gauges)
    if len(gauges) != m or not all(isinstance(g, OrliczFunction) for g in gauges):
        raise InvalidParameter(f"need {m} univariate gauges")
    return gauges, tuple(gauges)


@dataclass(frozen=True, eq=False)
class OrliczSum(StarBody):
    parts: tuple
    coefficients: tuple
    gauges: object
    terms: tuple = field(init=False, repr=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        coefs = tuple(float(c) for c in self.coefficients)
        if len(parts) < 2:
            raise InvalidParameter("an Orlicz chord addition needs at least 2 bodies")
        if len(coefs) != len(parts):
            raise InvalidParameter("one coefficient per body is required")
        if any(not c >= 0 for c in coefs):
            raise InvalidParameter("coefficients must be nonnegative")
        if not any(c > 0 for c in coefs):
            raise ZeroCoefficients("at least one coefficient must be positive")
        if len({K.dimension for K in parts}) != 1:
            raise DimensionMismatch("all summands must share one dimension")
        terms, stored = _gauge_terms(self.gauges, len(parts))
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "gauges", stored)
        object.__setattr__(self, "terms", tuple(terms))
        if self.depth > MAX_DEPTH:
            raise InvalidParameter(f"chord additions nested deeper than {MAX_DEPTH}")

    @property
    def dimension(self):
        return self.parts[0].dimension

    @property
    def depth(self):
        return 1 + max(K.depth for K in self.parts)

    @property
    def origin_symmetric(self):
        return True

    def _active(self):
        return [j for j, c in enumerate(self.coefficients) if c > 0]

    def _solve(self, D):
        act = self._active()
        return solve_half_chord(
            D[act], [self.coefficients[j] for j in act], [self.terms[j] for j in act]
        )

    def _part_chords(self, U):
        return np.array([K._half_chord(U) for K in self.parts])

    def _half_chord(self, U):
        return self._solve(self._part_chords(U))

    def _radial(self, U):
        return self._half_chord(U)

    def _half_chord_nodes(self, rule: SphereQuadrature):
        return self._solve(np.array([K.half_chord_on(rule) for K in self.parts]))

    def radial_on(self, rule):
        return self.half_chord_on(rule)

    def residual_on(self, rule: SphereQuadrature) -> np.ndarray:
        """|sum_j alpha_j phi_j(d_j / lam) - 1| at each node."""
        lam = self.half_chord_on(rule)
        total = -1.0
        for c, g, K in zip(self.coefficients, self.terms, self.parts):
            if c > 0:
                total = total + c * g(K.half_chord_on(rule) / lam)
        return np.abs(total)

    def envelope_on(self, rule: SphereQuadrature):
        """Lower and upper envelopes r / t_max and R / t_min at each node.

        r and R are the direction-wise min and max of the summand half chords
        and t = phi_j^{-1}(1/m).  Meaningful for unit coefficients only.
        """
        m = len(self.parts)
        D = np.array([K.half_chord_on(rule) for K in self.parts])
        t = [g.inverse(1.0 / m) for g in self.terms]
        return D.min(axis=0) / max(t), D.max(axis=0) / min(t)

    def to_dict(self):
        if isinstance(self.gauges, OrliczFunctionM):
            gauge = {"gauge": self.gauges.to_dict()}
        elif isinstance(self.gauges, OrliczFunction):
            gauge = {"gauge": self.gauges.to_dict()}
        else:
            gauge = {"gauges": [g.to_dict() for g in self.gauges]}
        return {
            "orlicz_add": {
                "parts": [K.to_dict() for K in self.parts],
                "coefficients": list(self.coefficients),
                **gauge,
            }
        }


@dataclass(frozen=True, eq=False)
class LpSum(StarBody):
    """d^{-p} = alpha d_K^{-p} + beta d_L^{-p}, in closed form."""

    p: float
    alpha: float
    beta: float
    left: StarBody
    right: StarBody

    def __post_init__(self):
        if not self.p >= 1:
            raise InvalidParameter("p must be ≥ 1")
        if not (self.alpha >= 0 and self.beta >= 0):
            raise InvalidParameter("coefficients must be nonnegative")
        if not self.alpha + self.beta > 0:
            raise ZeroCoefficients("alpha + beta must be positive")
        if self.left.dimension != self.right.dimension:
            raise DimensionMismatch("summands have different dimensions")
        if self.depth > MAX_DEPTH:
            raise InvalidParameter(f"chord additions nested deeper than {MAX_DEPTH}")

    @property
    def dimension(self):
        return self.left.dimension

    @property
    def depth(self):
        return 1 + max(self.left.depth, self.right.depth)

    @property
    def origin_symmetric(self):
        return True

    def _combine(self, dK, dL):
        p = self.p
        return (self.alpha * dK ** (-p) + self.beta * dL ** (-p)) ** (-1.0 / p)

    def _half_chord(self, U):
        return self._combine(self.left._half_chord(U), self.right._half_chord(U))

    def _radial(self, U):
        return self._half_chord(U)

    def _half_chord_nodes(self, rule):
        return self._combine(self.left.half_chord_on(rule), self.right.half_chord_on(rule))

    def radial_on(self, rule):
        return self.half_chord_on(rule)

    def to_dict(self):
        return {
            "lp_add": {
                "p": self.p,
                "alpha": self.alpha,
                "beta": self.beta,
                "left": self.left.to_dict(),
                "right": self.right.to_dict(),
            }
        }


def orlicz_chord_combine(parts, coefficients, gauges) -> OrliczSum:
    """Orlicz chord linear combination of ``parts``.

    ``gauges`` is one univariate gauge shared by all terms, a list of one per
    term, or a multivariate sum-form gauge.  Zero-coefficient terms are
    dropped from the defining equation.
    """
    return OrliczSum(tuple(parts), tuple(coefficients), gauges)


def lp_chord_add(K: StarBody, L: StarBody, p: float, alpha: float = 1.0, beta: float = 1.0) -> LpSum:
    return LpSum(p, alpha, beta, K, L)


def eps_combination(K: StarBody, L: StarBody, eps: float, phi1: OrliczFunction, phi2: OrliczFunction) -> OrliczSum:
    """K +_phi eps . L, i.e. coefficients (1, eps)."""
    if not eps >= 0:
        raise InvalidParameter("eps must be >= 0")
    return OrliczSum((K, L), (1.0, eps), (phi1, phi2))


def power_gauges(p: float, m: int = 2):
    return [Power(p)] * m
