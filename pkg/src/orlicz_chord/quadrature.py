"""Node/weight rules for integrating against surface measure on S^{n-1}.

Three kinds of rule are provided:

* ``circle:m``       m equispaced angles on S^1 (spectral for periodic integrands)
* ``gauss3:LxM``     Gauss-Legendre in the polar cosine times M equispaced
                     azimuths on S^2
* ``mc:n:N:seed``    seeded Monte Carlo directions on S^{n-1}, any n >= 2

Rules are immutable; their arrays are flagged read-only.  The ``rule_id``
string fully determines the rule, so :func:`parse_rule` rebuilds any rule
from its identifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, InvalidParameter


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n, 2 pi^{n/2} / Gamma(n/2)."""
    if n < 2:
        raise InvalidParameter(f"dimension must be >= 2, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    rule_id: str
    kind: str

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def total_weight(self) -> float:
        return pairwise_sum(self.weights)

    def refined(self) -> "SphereQuadrature":
        """The same kind of rule at double resolution."""
        return refine(self)

    def __repr__(self):
        return f"SphereQuadrature({self.rule_id!r}, size={self.size})"


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


@lru_cache(maxsize=32)
def circle_rule(m: int) -> SphereQuadrature:
    """m equispaced directions on S^1 with weights 2 pi / m.

    Exact for trigonometric polynomials of degree < m.  ``m`` must be even
    and at least 8 so the node set is antipodally symmetric.
    """
    if int(m) != m or m < 8 or m % 2:
        raise InvalidParameter(f"circle rule needs an even m >= 8, got {m}")
    m = int(m)
    theta = 2.0 * math.pi * np.arange(m) / m
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    # node k + m/2 must be exactly -node k
    half = m // 2
    nodes[half:] = -nodes[:half]
    weights = np.full(m, 2.0 * math.pi / m)
    _freeze(nodes, weights)
    return SphereQuadrature(2, nodes, weights, f"circle:{m}", "circle")


@lru_cache(maxsize=32)
def sphere_rule_n3(L: int, M: int) -> SphereQuadrature:
    """Product rule on S^2: L-point Gauss-Legendre in cos(polar) x M azimuths."""
    if int(L) != L or int(M) != M or L < 8 or M < 16 or M % 2:
        raise InvalidParameter(f"gauss3 rule needs L >= 8 and even M >= 16, got L={L}, M={M}")
    L, M = int(L), int(M)
    z, wz = np.polynomial.legendre.leggauss(L)
    # leggauss nodes are symmetric only up to roundoff; force exact antipodes
    z = 0.5 * (z - z[::-1])
    wz = 0.5 * (wz + wz[::-1])
    phi = 2.0 * math.pi * (np.arange(M) + 0.5) / M
    cphi, sphi = np.cos(phi), np.sin(phi)
    half = M // 2
    cphi[half:] = -cphi[:half]
    sphi[half:] = -sphi[:half]
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    nodes = np.empty((L * M, 3))
    nodes[:, 0] = np.repeat(s, M) * np.tile(cphi, L)
    nodes[:, 1] = np.repeat(s, M) * np.tile(sphi, L)
    nodes[:, 2] = np.repeat(z, M)
    weights = np.repeat(wz, M) * (2.0 * math.pi / M)
    _freeze(nodes, weights)
    return SphereQuadrature(3, nodes, weights, f"gauss3:{L}x{M}", "gauss3")


@lru_cache(maxsize=16)
def monte_carlo_rule(n: int, N: int, seed: int) -> SphereQuadrature:
    """N normalized standard-Gaussian directions, equal weights |S^{n-1}|/N."""
    if int(n) != n or n < 2:
        raise InvalidParameter(f"dimension must be >= 2, got {n}")
    if int(N) != N or N < 1000:
        raise InvalidParameter(f"Monte Carlo rule needs N >= 1000, got {N}")
    n, N, seed = int(n), int(N), int(seed)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((N, n))
    nodes = g / np.linalg.norm(g, axis=1, keepdims=True)
    weights = np.full(N, sphere_area(n) / N)
    _freeze(nodes, weights)
    return SphereQuadrature(n, nodes, weights, f"mc:{n}:{N}:{seed}", "mc")


def parse_rule(rule_id: str) -> SphereQuadrature:
    """Build a rule from its identifier, e.g. ``"gauss3:48x96"``."""
    try:
        kind, _, rest = rule_id.strip().partition(":")
        if kind == "circle":
            return circle_rule(int(rest))
        if kind == "gauss3":
            L, M = rest.split("x")
            return sphere_rule_n3(int(L), int(M))
        if kind == "mc":
            n, N, seed = rest.split(":")
            return monte_carlo_rule(int(n), int(N), int(seed))
    except (ValueError, AttributeError) as exc:
        if isinstance(exc, InvalidParameter):
            raise
        raise InvalidParameter(f"malformed rule id {rule_id!r}") from exc
    raise InvalidParameter(f"unknown rule kind in {rule_id!r}")


def refine(rule: SphereQuadrature) -> SphereQuadrature:
    if rule.kind == "circle":
        return circle_rule(2 * rule.size)
    if rule.kind == "gauss3":
        L, M = (int(v) for v in rule.rule_id.split(":")[1].split("x"))
        return sphere_rule_n3(2 * L, 2 * M)
    _, n, N, seed = rule.rule_id.split(":")
    return monte_carlo_rule(int(n), 2 * int(N), int(seed))


def default_rule(n: int) -> SphereQuadrature:
    if n == 2:
        return circle_rule(256)
    if n == 3:
        return sphere_rule_n3(48, 96)
    return monte_carlo_rule(n, 100_000, 7)


def pairwise_sum(values) -> float:
    """Fixed-order tree summation; the result depends only on the input order."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        return 0.0
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
        x = x[0::2] + x[1::2]
    return float(x[0])


def integrate(values, rule: SphereQuadrature) -> float:
    """Weighted sum of node-indexed integrand values."""
    f = np.asarray(values, dtype=float)
    if f.shape != (rule.size,):
        raise DimensionMismatch(f"expected {rule.size} node values, got shape {f.shape}")
    return pairwise_sum(rule.weights * f)
