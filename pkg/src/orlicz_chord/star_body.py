"""Star bodies described by their radial functions.

Every body evaluates ``radial(U)`` on an ``(N, n)`` array of unit directions
and returns the ``(N,)`` array of radial values.  The half chord
d(K, u) = (rho(K, u) + rho(K, -u)) / 2 is derived from it.

Leaf shapes have closed forms (balls, possibly off-centre ellipsoids,
perturbed spheres, tables bound to a quadrature rule).  ``LinearImage`` and
``Dilate`` wrap another body lazily.  Combination bodies built from half
chords live in :mod:`orlicz_chord.chord_addition`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParameter,
    NonPositiveRadial,
    SingularMatrix,
    TabulatedLookupError,
)
from .quadrature import SphereQuadrature, parse_rule

RADIAL_FLOOR = 1e-14
UNIT_TOL = 1e-12


def as_directions(u, n: int | None = None, check: bool = True) -> np.ndarray:
    """Coerce ``u`` to an ``(N, n)`` array of unit vectors."""
    U = np.asarray(u, dtype=float)
    if U.ndim == 1:
        U = U[None, :]
    if U.ndim != 2 or U.shape[1] < 2:
        raise DimensionMismatch(f"directions must have shape (N, n) with n >= 2, got {U.shape}")
    if n is not None and U.shape[1] != n:
        raise DimensionMismatch(f"body has dimension {n}, directions have {U.shape[1]}")
    if check and U.size:
        err = np.max(np.abs(np.einsum("ij,ij->i", U, U) - 1.0))
        if err > 2 * UNIT_TOL:
            raise InvalidParameter(f"directions are not unit vectors (norm error {err:.3g})")
    return U


def unit_direction(coords) -> np.ndarray:
    """Normalize a nonzero vector to a unit direction."""
    v = np.asarray(coords, dtype=float)
    norm = np.linalg.norm(v)
    if v.ndim != 1 or v.size < 2 or norm == 0:
        raise InvalidParameter(f"cannot make a unit direction from {coords!r}")
    return v / norm


def _positive(rho: np.ndarray, who) -> np.ndarray:
    if np.any(~(rho > RADIAL_FLOOR)):
        raise NonPositiveRadial(f"{who} produced radial value {np.min(rho)!r}")
    return rho


class StarBody:
    """Base class.  Subclasses set ``dimension`` and implement ``_radial``."""

    dimension: int

    def radial(self, u) -> np.ndarray:
        U = as_directions(u, self.dimension)
        return _positive(self._radial(U), self)

    def half_chord(self, u) -> np.ndarray:
        U = as_directions(u, self.dimension)
        return self._half_chord(U)

    def _half_chord(self, U):
        return 0.5 * (self._radial_checked(U) + self._radial_checked(-U))

    def _radial_checked(self, U):
        return _positive(self._radial(U), self)

    def half_chord_on(self, rule: SphereQuadrature) -> np.ndarray:
        """Half chords at the nodes of ``rule``, memoized per rule id.

        Bodies are immutable, so a cached array never goes stale; concurrent
        writers store identical values.
        """
        if rule.dimension != self.dimension:
            raise DimensionMismatch(f"rule {rule.rule_id} does not match dimension {self.dimension}")
        cache = self.__dict__.setdefault("_node_cache", {})
        hit = cache.get(rule.rule_id)
        if hit is None:
            hit = np.asarray(self._half_chord_nodes(rule), dtype=float)
            hit.setflags(write=False)
            cache[rule.rule_id] = hit
        return hit

    def _half_chord_nodes(self, rule):
        return self._half_chord(rule.nodes)

    def radial_on(self, rule: SphereQuadrature) -> np.ndarray:
        if rule.dimension != self.dimension:
            raise DimensionMismatch(f"rule {rule.rule_id} does not match dimension {self.dimension}")
        return self._radial_checked(rule.nodes)

    @property
    def depth(self) -> int:
        """Nesting depth of chord additions inside this body."""
        return 0

    @property
    def origin_symmetric(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(StarBody):
    radius: float
    center: np.ndarray

    def __post_init__(self):
        c = np.array(self.center, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if c.ndim != 1 or c.size < 2:
            raise InvalidParameter("ball center must be a vector of length >= 2")
        if not self.radius > 0:
            raise InvalidParameter("ball radius must be > 0")
        if not np.linalg.norm(c) < self.radius:
            raise InvalidParameter("the origin must lie inside the ball (|center| < radius)")

    @classmethod
    def centered(cls, radius: float, n: int) -> "Ball":
        return cls(radius, np.zeros(n))

    @property
    def dimension(self):
        return self.center.size

    @property
    def origin_symmetric(self):
        return not np.any(self.center)

    def _radial(self, U):
        R = self.radius
        if not np.any(self.center):
            return np.full(U.shape[0], float(R))
        c = self.center
        cu = U @ c
        g = R * R - c @ c
        root = np.sqrt(g + cu * cu)
        # positive root of t^2 - 2 t (c.u) - g = 0, without cancellation
        return np.where(cu >= 0, cu + root, g / (root - cu))

    def to_dict(self):
        return {"ball": {"radius": self.radius, "center": self.center.tolist()}}


@dataclass(frozen=True, eq=False)
class Ellipsoid(StarBody):
    """{center + Q diag(a) y : |y| <= 1} with Q orthogonal.

    The centre defaults to the origin; a nonzero centre makes affine images
    of off-centre balls representable in closed form.
    """

    semi_axes: np.ndarray
    rotation: np.ndarray | None = None
    center: np.ndarray | None = None

    def __post_init__(self):
        a = np.array(self.semi_axes, dtype=float)
        n = a.size
        if a.ndim != 1 or n < 2 or np.any(~(a > 0)):
            raise InvalidParameter("semi-axes must be a vector of positive reals, length >= 2")
        Q = np.eye(n) if self.rotation is None else np.array(self.rotation, dtype=float)
        if Q.shape != (n, n) or not np.allclose(Q.T @ Q, np.eye(n), atol=1e-10):
            raise InvalidParameter("rotation must be an orthogonal n x n matrix")
        c = np.zeros(n) if self.center is None else np.array(self.center, dtype=float)
        if c.shape != (n,):
            raise InvalidParameter("ellipsoid center has the wrong length")
        if not np.linalg.norm((Q.T @ c) / a) < 1.0:
            raise InvalidParameter("the origin must lie inside the ellipsoid")
        for arr in (a, Q, c):
            arr.setflags(write=False)
        object.__setattr__(self, "semi_axes", a)
        object.__setattr__(self, "rotation", Q)
        object.__setattr__(self, "center", c)

    @property
    def dimension(self):
        return self.semi_axes.size

    @property
    def origin_symmetric(self):
        return not np.any(self.center)

    def _radial(self, U):
        Y = (U @ self.rotation) / self.semi_axes
        a = np.einsum("ij,ij->i", Y, Y)
        if not np.any(self.center):
            return 1.0 / np.sqrt(a)
        yc = (self.rotation.T @ self.center) / self.semi_axes
        b = Y @ yc
        g = 1.0 - yc @ yc
        root = np.sqrt(b * b + a * g)
        return np.where(b >= 0, (b + root) / a, g / (root - b))

    def to_dict(self):
        body = {"semi_axes": self.semi_axes.tolist(), "rotation": self.rotation.tolist()}
        if np.any(self.center):
            body["center"] = self.center.tolist()
        return {"ellipsoid": body}


@dataclass(frozen=True)
class PerturbationTerm:
    """coef * (u . direction)^power"""

    coef: float
    direction: tuple
    power: int

    def __post_init__(self):
        object.__setattr__(self, "direction", tuple(float(x) for x in self.direction))
        if int(self.power) != self.power or self.power < 0:
            raise InvalidParameter("perturbation power must be a nonnegative integer")
        object.__setattr__(self, "power", int(self.power))

    @property
    def sup_bound(self) -> float:
        return abs(self.coef) * float(np.linalg.norm(self.direction)) ** self.power

    def __call__(self, U):
        return self.coef * (U @ np.asarray(self.direction)) ** self.power

    def to_dict(self):
        return {"coef": self.coef, "direction": list(self.direction), "power": self.power}


@dataclass(frozen=True, eq=False)
class PerturbedSphere(StarBody):
    """radius(u) = base_radius + sum of low-order polynomial terms in u.

    The sup-norm of the perturbation is bounded analytically by the sum of
    the term bounds, and that bound must not exceed 0.9 * base_radius.
    """

    base_radius: float
    terms: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.base_radius > 0:
            raise InvalidParameter("base_radius must be > 0")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidParameter("dimension must be >= 2")
        for t in self.terms:
            if len(t.direction) != self.n:
                raise InvalidParameter("perturbation direction has the wrong length")
        if self.perturbation_bound > 0.9 * self.base_radius:
            raise InvalidParameter(
                f"perturbation bound {self.perturbation_bound:g} exceeds 0.9 * base_radius"
            )

    @property
    def perturbation_bound(self) -> float:
        return sum(t.sup_bound for t in self.terms)

    @property
    def dimension(self):
        return int(self.n)

    @property
    def origin_symmetric(self):
        return all(t.power % 2 == 0 for t in self.terms)

    def _radial(self, U):
        r = np.full(U.shape[0], float(self.base_radius))
        for t in self.terms:
            r = r + t(U)
        return r

    def with_base(self, base_radius: float) -> "PerturbedSphere":
        return PerturbedSphere(base_radius, self.terms, self.n)

    def to_dict(self):
        return {
            "perturbed_sphere": {
                "base_radius": self.base_radius,
                "dimension": self.dimension,
                "terms": [t.to_dict() for t in self.terms],
            }
        }


@dataclass(frozen=True, eq=False)
class Tabulated(StarBody):
    """Radial values given at the nodes of one quadrature rule.

    Queries must hit those nodes exactly (to 1e-12), except in the plane where
    values are interpolated linearly in angle.
    """

    rule: SphereQuadrature
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.rule.size,):
            raise InvalidParameter(f"expected {self.rule.size} tabulated values, got {v.shape}")
        _positive(v, "tabulated body")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dimension(self):
        return self.rule.dimension

    @cached_property
    def _tree(self):
        from scipy.spatial import cKDTree

        return cKDTree(self.rule.nodes)

    @cached_property
    def _angles(self):
        theta = np.mod(np.arctan2(self.rule.nodes[:, 1], self.rule.nodes[:, 0]), 2 * np.pi)
        order = np.argsort(theta)
        return theta[order], self.values[order]

    def _radial(self, U):
        if self.dimension == 2:
            theta, vals = self._angles
            q = np.mod(np.arctan2(U[:, 1], U[:, 0]), 2 * np.pi)
            return np.interp(q, theta, vals, period=2 * np.pi)
        dist, idx = self._tree.query(U)
        if np.any(dist > UNIT_TOL):
            raise TabulatedLookupError(
                f"tabulated body on {self.rule.rule_id} queried off its nodes (distance {np.max(dist):.3g})"
            )
        return self.values[idx]

    def to_dict(self):
        return {"tabulated": {"rule": self.rule.rule_id, "values": self.values.tolist()}}


@dataclass(frozen=True, eq=False)
class LinearMap:
    matrix: np.ndarray
    det: float = field(init=False)
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
            raise InvalidParameter("a linear map needs a square matrix of size >= 2")
        det = float(np.linalg.det(A))
        if det == 0.0 or not np.isfinite(det) or np.linalg.cond(A) > 1e12:
            raise SingularMatrix(f"matrix is singular or numerically singular (det={det:g})")
        inv = np.linalg.inv(A)
        A.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "det", det)
        object.__setattr__(self, "inverse", inv)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_special(self) -> bool:
        return abs(self.det - 1.0) < 1e-12


def _as_map(A) -> LinearMap:
    return A if isinstance(A, LinearMap) else LinearMap(A)


@dataclass(frozen=True, eq=False)
class LinearImage(StarBody):
    """rho(AK, u) = rho(K, A^{-1} u), using degree -1 homogeneity of rho."""

    map: LinearMap
    inner: StarBody

    def __post_init__(self):
        object.__setattr__(self, "map", _as_map(self.map))
        if self.map.dimension != self.inner.dimension:
            raise DimensionMismatch("map and body dimensions differ")

    @property
    def dimension(self):
        return self.inner.dimension

    @property
    def depth(self):
        return self.inner.depth

    @property
    def origin_symmetric(self):
        return self.inner.origin_symmetric

    def _pullback(self, U):
        W = U @ self.map.inverse.T
        s = np.linalg.norm(W, axis=1)
        return W / s[:, None], s

    def _radial(self, U):
        W, s = self._pullback(U)
        return self.inner._radial_checked(W) / s

    def _half_chord(self, U):
        W, s = self._pullback(U)
        return self.inner._half_chord(W) / s

    def to_dict(self):
        return {"linear_image": {"matrix": self.map.matrix.tolist(), "body": self.inner.to_dict()}}


@dataclass(frozen=True, eq=False)
class Dilate(StarBody):
    factor: float
    inner: StarBody

    def __post_init__(self):
        if not self.factor > 0:
            raise InvalidParameter("dilation factor must be > 0")

    @property
    def dimension(self):
        return self.inner.dimension

    @property
    def depth(self):
        return self.inner.depth

    @property
    def origin_symmetric(self):
        return self.inner.origin_symmetric

    def _radial(self, U):
        return self.factor * self.inner._radial_checked(U)

    def _half_chord_nodes(self, rule):
        return self.factor * self.inner.half_chord_on(rule)

    def _half_chord(self, U):
        return self.factor * self.inner._half_chord(U)

    def to_dict(self):
        return {"dilate": {"factor": self.factor, "body": self.inner.to_dict()}}


def _scalar_if_single(u, values):
    return float(values[0]) if np.ndim(u) == 1 else values


def radial(K: StarBody, u):
    """rho(K, u) for one direction (returns float) or an (N, n) array."""
    return _scalar_if_single(u, K.radial(u))


def half_chord(K: StarBody, u):
    """d(K, u) = (rho(K, u) + rho(K, -u)) / 2."""
    return _scalar_if_single(u, K.half_chord(u))


def linear_image(A, K: StarBody) -> LinearImage:
    return LinearImage(_as_map(A), K)


def closed_form_image(A, K: StarBody) -> Ellipsoid:
    """A K as an explicit ellipsoid, for balls and ellipsoids.

    A (c + M B) = A c + U S B where A M = U S V^T is a singular value
    decomposition.
    """
    A = _as_map(A).matrix
    if isinstance(K, Ball):
        M, c = K.radius * np.eye(K.dimension), K.center
    elif isinstance(K, Ellipsoid):
        M, c = K.rotation * K.semi_axes, K.center
    else:
        raise InvalidParameter(f"no closed-form image for {type(K).__name__}")
    Usvd, S, _ = np.linalg.svd(A @ M)
    return Ellipsoid(S, Usvd, A @ c)


def radial_bounds(K: StarBody, rule: SphereQuadrature) -> tuple[float, float]:
    """(min, max) of the half chord over the rule's nodes.

    These approximate r_K and R_K from the grid side: the true minimum can
    only be smaller and the true maximum larger.
    """
    d = K.half_chord_on(rule)
    return float(np.min(d)), float(np.max(d))


def radial_distance(K: StarBody, L: StarBody, rule: SphereQuadrature) -> float:
    """Grid approximation of the radial Hausdorff distance max |rho_K - rho_L|."""
    if K.dimension != L.dimension:
        raise DimensionMismatch("bodies have different dimensions")
    return float(np.max(np.abs(K.radial_on(rule) - L.radial_on(rule))))


def similar_chord_check(K: StarBody, L: StarBody, rule: SphereQuadrature, tol: float = 1e-9):
    """Test d(K, .) = lambda d(L, .) on the rule's nodes.

    Returns ``(is_similar, lam)`` with lam the mean node ratio d_K / d_L.
    """
    ratio = K.half_chord_on(rule) / L.half_chord_on(rule)
    lam = float(np.mean(ratio))
    deviation = float(np.max(np.abs(ratio / lam - 1.0)))
    return deviation < tol, lam
