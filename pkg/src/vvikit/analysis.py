"""Hypothesis checks and sampling-based falsifiers.

Nothing here certifies a property globally: the monotonicity check can
only certify "no counterexample found" (or produce a concrete witness
pair), and the Pareto falsifiers can only disprove membership.  The
positive certificates come from the scalarization itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .expr import jacobian
from .geometry import Ball, Box, WholeSpace, contains
from .sweep import SolutionCloud, VviProblem

__all__ = [
    "MonotoneReport",
    "SymmetryClass",
    "SymmetryReport",
    "check_monotone",
    "classify_symmetry",
    "falsify_weak_pareto",
    "falsify_pareto",
]

_CERTIFY_TOL = 1e-9
_SYMMETRY_TOL = 1e-9
_STRICT_NEG = -1e-9
_WEAK_NONNEG = 1e-12
_PROBE_SCALES = (1e-2, 1.0, 1e2)


@dataclass
class MonotoneReport:
    monotone_certified: bool
    min_pairing: float
    min_eig: float
    witness_pair: Optional[tuple] = None  # (x, y, criterion index) with negative pairing
    witness_point: Optional[tuple] = None  # (x, criterion index) with negative eigenvalue

    def to_json_dict(self) -> dict:
        out = {
            "certified": self.monotone_certified,
            "min_pairing": self.min_pairing,
            "min_eig": self.min_eig,
            "witness_pair": None,
            "witness_point": None,
        }
        if self.witness_pair is not None:
            x, y, l = self.witness_pair
            out["witness_pair"] = {"x": list(map(float, x)), "y": list(map(float, y)), "criterion": l}
        if self.witness_point is not None:
            x, l = self.witness_point
            out["witness_point"] = {"x": list(map(float, x)), "criterion": l}
        return out


class SymmetryClass(str, enum.Enum):
    SYMMETRIC = "Symmetric"
    SKEW_SYMMETRIC = "SkewSymmetric"
    NEITHER = "Neither"


@dataclass
class SymmetryReport:
    symmetry: SymmetryClass
    max_sym_defect: float
    max_skew_defect: float

    def to_json_dict(self) -> dict:
        return {
            "class": self.symmetry.value,
            "max_sym_defect": self.max_sym_defect,
            "max_skew_defect": self.max_skew_defect,
        }


def _sample_in_K(problem: VviProblem, rng, box_halfwidth: float) -> np.ndarray:
    z = rng.uniform(-box_halfwidth, box_halfwidth, problem.n)
    return problem.K.project(z)


def check_monotone(
    problem: VviProblem,
    samples: int = 1000,
    seed: int = 0,
    box_halfwidth: float = 2.0,
) -> MonotoneReport:
    """Sampled monotonicity check for every criterion field.

    Draws random pairs x, y in K (projections of box samples) and records
    the minimum of <F_l(y) - F_l(x), y - x>, plus the minimum eigenvalue
    of the symmetrized Jacobians at random points.  Certified means both
    minima stay above -1e-9; a negative finding comes with its witness.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    min_pairing = np.inf
    min_eig = np.inf
    witness_pair = None
    witness_point = None
    for _ in range(samples):
        x = _sample_in_K(problem, rng, box_halfwidth)
        y = _sample_in_K(problem, rng, box_halfwidth)
        d = y - x
        for l, f in enumerate(problem.fields):
            pairing = float((f(y) - f(x)) @ d)
            if pairing < min_pairing:
                min_pairing = pairing
                if pairing < -_CERTIFY_TOL:
                    witness_pair = (x.copy(), y.copy(), l)
    for _ in range(samples):
        x = _sample_in_K(problem, rng, box_halfwidth)
        for l, f in enumerate(problem.fields):
            J = jacobian(f, x)
            eig = float(np.linalg.eigvalsh(0.5 * (J + J.T)).min())
            if eig < min_eig:
                min_eig = eig
                if eig < -_CERTIFY_TOL:
                    witness_point = (x.copy(), l)
    certified = min_pairing >= -_CERTIFY_TOL and min_eig >= -_CERTIFY_TOL
    return MonotoneReport(
        monotone_certified=certified,
        min_pairing=float(min_pairing),
        min_eig=float(min_eig),
        witness_pair=witness_pair,
        witness_point=witness_point,
    )


def classify_symmetry(
    problem: VviProblem,
    samples: int = 100,
    seed: int = 0,
    box_halfwidth: float = 2.0,
) -> SymmetryReport:
    """Classify the problem by its Jacobian structure at random points.

    sym defect: max entry of |J - J^T|; skew defect: max entry of
    |J + J^T|.  Only the zero field passes both tests; it is reported as
    Symmetric.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    max_sym = 0.0
    max_skew = 0.0
    for _ in range(samples):
        x = _sample_in_K(problem, rng, box_halfwidth)
        for f in problem.fields:
            J = jacobian(f, x)
            max_sym = max(max_sym, float(np.abs(J - J.T).max()))
            max_skew = max(max_skew, float(np.abs(J + J.T).max()))
    if max_sym <= _SYMMETRY_TOL:
        symmetry = SymmetryClass.SYMMETRIC
    elif max_skew <= _SYMMETRY_TOL:
        symmetry = SymmetryClass.SKEW_SYMMETRIC
    else:
        symmetry = SymmetryClass.NEITHER
    return SymmetryReport(symmetry=symmetry, max_sym_defect=max_sym, max_skew_defect=max_skew)


def _batch_project(K, Y: np.ndarray) -> np.ndarray:
    if isinstance(K, WholeSpace):
        return Y
    if isinstance(K, Box):
        return np.minimum(np.maximum(Y, K.lower), K.upper)
    if isinstance(K, Ball):
        d = Y - K.center
        dist = np.linalg.norm(d, axis=1, keepdims=True)
        factor = np.where(dist > K.radius, K.radius / np.maximum(dist, 1e-300), 1.0)
        return K.center + d * factor
    return np.array([K.project(y) for y in Y])


def _probe_points(
    problem: VviProblem, x: np.ndarray, probes: int, seed: int, cloud: Optional[SolutionCloud]
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    cloud_points = None
    if cloud is not None:
        converged = [cloud.samples[i].outcome.point for i in cloud.converged_indices()]
        if converged:
            cloud_points = np.array(converged)
    Y = np.empty((probes, problem.n))
    for k in range(probes):
        if cloud_points is not None and k % 2 == 1:
            Y[k] = cloud_points[rng.integers(len(cloud_points))]
        else:
            u = rng.normal(size=problem.n)
            norm = float(np.linalg.norm(u))
            if norm == 0.0:
                u = np.ones(problem.n)
                norm = float(np.linalg.norm(u))
            scale = _PROBE_SCALES[(k // 2) % len(_PROBE_SCALES)]
            Y[k] = x + (scale / norm) * u
    return _batch_project(problem.K, Y)


def _probe_inner_products(problem, x, probes, seed, cloud):
    x = np.asarray(x, dtype=float)
    if not contains(problem.K, x, 1e-6):
        raise ValueError("point to falsify is not in the constraint set")
    Y = _probe_points(problem, x, probes, seed, cloud)
    F = np.array([f(x) for f in problem.fields])  # m x n
    G = (Y - x) @ F.T  # probes x m
    return Y, G


def falsify_weak_pareto(
    problem: VviProblem,
    x,
    probes: int = 1000,
    seed: int = 0,
    cloud: Optional[SolutionCloud] = None,
) -> Optional[np.ndarray]:
    """Search for y in K with <F_l(x), y - x> < -1e-9 for every criterion.

    Such a y disproves weak Pareto membership of x.  Returning None means
    no witness was found, not a proof of membership.  Half of the probes
    walk toward other cloud samples when a cloud is supplied.
    """
    Y, G = _probe_inner_products(problem, x, probes, seed, cloud)
    hits = np.nonzero((G < _STRICT_NEG).all(axis=1))[0]
    if hits.size:
        return Y[hits[0]]
    return None


def falsify_pareto(
    problem: VviProblem,
    x,
    probes: int = 1000,
    seed: int = 0,
    cloud: Optional[SolutionCloud] = None,
) -> Optional[np.ndarray]:
    """Search for y in K with all <F_l(x), y - x> <= 1e-12 and one < -1e-9.

    Such a y disproves (strict) Pareto membership of x; None is not a
    membership proof.
    """
    Y, G = _probe_inner_products(problem, x, probes, seed, cloud)
    mask = (G <= _WEAK_NONNEG).all(axis=1) & (G <= _STRICT_NEG).any(axis=1)
    hits = np.nonzero(mask)[0]
    if hits.size:
        return Y[hits[0]]
    return None
