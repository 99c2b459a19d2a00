"""Constraint sets and Euclidean projection.

Projection is the computational surrogate for the normal cone: a point x
solves the scalar problem iff x = P_K(x - F(x)).  Box, ball and whole-space
projections are closed form; polyhedra and intersections use Dykstra's
alternating projections, which converges to the exact projection for
intersections of convex sets.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ConvexSet",
    "WholeSpace",
    "Box",
    "Ball",
    "Polyhedron",
    "IntersectionSet",
    "ProjectionError",
    "project",
    "contains",
    "intersect_ball",
]

PROJ_TOL = 1e-10
_DYKSTRA_INCREMENT = 1e-12
_DYKSTRA_MAX_CYCLES = 10_000


class ProjectionError(RuntimeError):
    """Iterative projection failed to converge (diagnostic)."""


class ConvexSet:
    """Nonempty closed convex subset of R^n."""

    n: int
    polyhedral: bool = False

    def project(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float) -> bool:
        raise NotImplementedError

    def _check_dim(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise ValueError(f"point has shape {z.shape}, set dimension is {self.n}")
        return z


class WholeSpace(ConvexSet):
    """All of R^n (the empty intersection of half-spaces, hence polyhedral)."""

    polyhedral = True

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        self.n = n

    def project(self, z):
        return self._check_dim(z)

    def contains(self, x, tol):
        self._check_dim(x)
        return True

    def __repr__(self):
        return f"WholeSpace({self.n})"


class Box(ConvexSet):
    """{x : lower <= x <= upper}; IEEE infinities encode missing bounds."""

    polyhedral = True

    def __init__(self, lower, upper):
        lower = np.array(lower, dtype=float)
        upper = np.array(upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower/upper must be 1-d arrays of equal length")
        if np.any(lower > upper):
            raise ValueError("box has lower_i > upper_i")
        lower.flags.writeable = False
        upper.flags.writeable = False
        self.n = lower.shape[0]
        self.lower = lower
        self.upper = upper

    def project(self, z):
        z = self._check_dim(z)
        return np.minimum(np.maximum(z, self.lower), self.upper)

    def contains(self, x, tol):
        x = self._check_dim(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def __repr__(self):
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"


class Ball(ConvexSet):
    """Closed Euclidean ball."""

    polyhedral = False

    def __init__(self, center, radius: float):
        center = np.array(center, dtype=float)
        if center.ndim != 1:
            raise ValueError("center must be a 1-d array")
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        center.flags.writeable = False
        self.n = center.shape[0]
        self.center = center
        self.radius = float(radius)

    def project(self, z):
        z = self._check_dim(z)
        d = z - self.center
        dist = float(np.linalg.norm(d))
        if dist <= self.radius:
            return z
        return self.center + d * (self.radius / dist)

    def contains(self, x, tol):
        x = self._check_dim(x)
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


class Polyhedron(ConvexSet):
    """{x : A x <= b}, declared nonempty at construction.

    Projection runs Dykstra's algorithm over the half-space factors (each
    half-space projection is closed form), stopping when the cycle
    increment drops below 1e-12 or after 10,000 cycles.
    """

    polyhedral = True

    def __init__(self, A, b, feasible_point=None):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be k x n and b length k")
        if A.shape[0] < 1:
            raise ValueError("polyhedron needs at least one inequality")
        row_norms = np.linalg.norm(A, axis=1)
        if np.any(row_norms == 0.0):
            raise ValueError("polyhedron has a zero row in A")
        A.flags.writeable = False
        b.flags.writeable = False
        self.n = A.shape[1]
        self.A = A
        self.b = b
        self._row_norm_sq = row_norms**2
        if feasible_point is not None:
            feasible_point = self._check_dim(feasible_point)
            if not self.contains(feasible_point, 1e-8):
                raise ValueError("declared feasible point violates A x <= b")
        else:
            feasible_point = self.project(np.zeros(self.n))
            if not self.contains(feasible_point, 1e-8):
                raise ProjectionError(
                    "could not locate a feasible point; polyhedron may be empty"
                )
        self._feasible_point = feasible_point

    def _project_halfspace(self, i: int, z: np.ndarray) -> np.ndarray:
        viol = float(self.A[i] @ z - self.b[i])
        if viol <= 0.0:
            return z
        return z - (viol / self._row_norm_sq[i]) * self.A[i]

    def project(self, z):
        z = self._check_dim(z)
        if self.contains(z, 0.0):
            return z
        projectors = [
            (lambda y, i=i: self._project_halfspace(i, y)) for i in range(self.A.shape[0])
        ]
        return _dykstra(projectors, z)

    def contains(self, x, tol):
        x = self._check_dim(x)
        return bool(np.all(self.A @ x - self.b <= tol))

    def __repr__(self):
        return f"Polyhedron(k={self.A.shape[0]}, n={self.n})"


class IntersectionSet(ConvexSet):
    """Intersection of two sets, projected by Dykstra over the factors."""

    def __init__(self, first: ConvexSet, second: ConvexSet):
        if first.n != second.n:
            raise ValueError("factors have mismatched dimensions")
        self.n = first.n
        self.first = first
        self.second = second

    @property
    def polyhedral(self):
        return self.first.polyhedral and self.second.polyhedral

    def project(self, z):
        z = self._check_dim(z)
        if self.first.contains(z, 0.0) and self.second.contains(z, 0.0):
            return z
        return _dykstra([self.first.project, self.second.project], z)

    def contains(self, x, tol):
        return self.first.contains(x, tol) and self.second.contains(x, tol)

    def __repr__(self):
        return f"IntersectionSet({self.first!r}, {self.second!r})"


def _dykstra(projectors, z, increment_tol=_DYKSTRA_INCREMENT, max_cycles=_DYKSTRA_MAX_CYCLES):
    m = len(projectors)
    x = z.copy()
    corrections = [np.zeros_like(z) for _ in range(m)]
    prev = x.copy()
    for _ in range(max_cycles):
        for i, proj in enumerate(projectors):
            y = proj(x + corrections[i])
            corrections[i] = x + corrections[i] - y
            x = y
        if float(np.linalg.norm(x - prev)) < increment_tol:
            return x
        prev = x.copy()
    raise ProjectionError(f"Dykstra projection did not converge in {max_cycles} cycles")


def project(K: ConvexSet, z) -> np.ndarray:
    """argmin_{y in K} ||y - z||, exact or within PROJ_TOL for polyhedra."""
    return K.project(np.asarray(z, dtype=float))


def contains(K: ConvexSet, x, tol: float) -> bool:
    """True iff all defining inequalities hold within tol."""
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    return K.contains(np.asarray(x, dtype=float), tol)


def intersect_ball(K: ConvexSet, radius: float) -> ConvexSet:
    """K intersected with Ball(0, radius), simplified when nesting is obvious."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    ball = Ball(np.zeros(K.n), radius)
    if isinstance(K, WholeSpace):
        return ball
    if isinstance(K, Ball):
        if float(np.linalg.norm(K.center)) + K.radius <= radius:
            return K
        if radius + float(np.linalg.norm(K.center)) <= K.radius:
            return ball
    return IntersectionSet(K, ball)
