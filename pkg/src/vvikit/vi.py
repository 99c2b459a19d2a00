"""Scalarization and the extragradient solver for the scalar problems.

The vector problem is reduced to the parametric family of scalar
variational inequalities with field ``sum_l w_l F_l`` for a weight vector
w on the unit simplex.  Each scalar problem is solved by a projected
extragradient iteration with adaptive step backtracking; the convergence
certificate is the natural residual ||x - P_K(x - F(x))||.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .expr import VectorField, combine_fields
from .geometry import ConvexSet, project

__all__ = [
    "SimplexWeight",
    "SolveStatus",
    "SolveOptions",
    "SolveOutcome",
    "scalarize",
    "natural_residual",
    "solve_vi",
]

_SIMPLEX_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SimplexWeight:
    """A point of the unit simplex, with optional lattice coordinates.

    ``lattice`` holds the integer grid coordinates (summing to the grid
    resolution) when the weight came from a lattice; it is metadata only.
    """

    weights: tuple
    lattice: Optional[tuple] = None

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) < 1:
            raise ValueError("weight vector must have at least one entry")
        if any(v < 0.0 for v in w):
            raise ValueError(f"weights must be nonnegative, got {w}")
        if abs(sum(w) - 1.0) > _SIMPLEX_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got sum {sum(w)!r}")
        object.__setattr__(self, "weights", w)
        if self.lattice is not None:
            object.__setattr__(self, "lattice", tuple(int(k) for k in self.lattice))

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def interior(self) -> bool:
        return min(self.weights) > 0.0

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)


class SolveStatus(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    DIVERGED = "Diverged"


@dataclass
class SolveOptions:
    """Extragradient controls.

    The divergence radius must exceed the expected solution norms; an
    empty scalar solution set surfaces as Diverged or MaxIterations,
    never as a proven emptiness certificate.
    """

    tol: float = 1e-9
    max_iter: int = 200_000
    divergence_radius: float = 1e8
    initial_step: float = 1.0
    step_shrink: float = 0.5
    step_growth: float = 1.05
    lipschitz_margin: float = 0.45

    def validate(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.divergence_radius > 0:
            raise ValueError(f"divergence_radius must be > 0, got {self.divergence_radius}")
        if not 0 < self.step_shrink < 1:
            raise ValueError(f"step_shrink must be in (0,1), got {self.step_shrink}")
        if not self.step_growth >= 1:
            raise ValueError(f"step_growth must be >= 1, got {self.step_growth}")
        if not 0 < self.lipschitz_margin <= 0.5:
            # <= 1/2 makes the Lipschitz test imply the curvature test below
            raise ValueError(
                f"lipschitz_margin must be in (0, 0.5], got {self.lipschitz_margin}"
            )


@dataclass
class SolveOutcome:
    status: SolveStatus
    point: np.ndarray
    residual: float
    iterations: int
    step_min: float
    step_max: float

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    def to_json_dict(self) -> dict:
        return {
            "status": self.status.value,
            "point": [float(v) for v in self.point],
            "residual": float(self.residual),
            "iterations": int(self.iterations),
            "step_min": float(self.step_min),
            "step_max": float(self.step_max),
        }


def scalarize(problem, weight: SimplexWeight) -> VectorField:
    """Field of the scalarized problem: x |-> sum_l w_l F_l(x)."""
    if weight.m != problem.m:
        raise ValueError(
            f"weight has {weight.m} entries, problem has {problem.m} criteria"
        )
    return combine_fields(problem.fields, weight.weights)


def natural_residual(f: VectorField, K: ConvexSet, x) -> float:
    """||x - P_K(x - f(x))||; zero exactly at solutions (up to proj_tol)."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - K.project(x - f(x))))


def solve_vi(
    f: VectorField,
    K: ConvexSet,
    x0=None,
    opts: Optional[SolveOptions] = None,
) -> SolveOutcome:
    """Projected extragradient with adaptive backtracking.

    One pass evaluates the trial point xb = P_K(x - lam f(x)) and accepts
    the update x <- P_K(x - lam f(xb)) when both

        <f(x) - f(xb), x - xb>  <=  ||x - xb||^2 / (2 lam)
        lam ||f(x) - f(xb)||    <=  margin ||x - xb||

    hold; otherwise lam shrinks.  The first condition bounds the sampled
    curvature, the second the sampled Lipschitz constant (with margin
    <= 1/2 it implies the first); the pair keeps the iteration stable on
    rotation-dominated fields whose symmetric part is indefinite.  The
    step grows by a constant factor after each accepted pass, which lets
    it climb on the flat cubic plateaus around degenerate solutions.

    Returns Converged when the natural residual reaches opts.tol,
    Diverged when the iterate norm exceeds opts.divergence_radius, and
    MaxIterations otherwise.  ``iterations`` counts passes (accepted or
    backtracked).
    """
    opts = opts or SolveOptions()
    opts.validate()
    x = K.project(np.zeros(K.n)) if x0 is None else K.project(np.asarray(x0, dtype=float))
    lam = opts.initial_step
    step_min = np.inf
    step_max = 0.0
    residual = np.inf
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        fx = f(x)
        residual = float(np.linalg.norm(x - K.project(x - fx)))
        if residual <= opts.tol:
            return _outcome(SolveStatus.CONVERGED, x, residual, iterations, step_min, step_max)
        if float(np.linalg.norm(x)) > opts.divergence_radius:
            return _outcome(SolveStatus.DIVERGED, x, residual, iterations, step_min, step_max)
        xb = K.project(x - lam * fx)
        d = x - xb
        dd = float(d @ d)
        if dd == 0.0:
            # projected step is a fixed point at this lam; grow and retry
            lam *= opts.step_growth
            continue
        fxb = f(xb)
        df = fx - fxb
        curvature_ok = float(df @ d) <= dd / (2.0 * lam)
        lipschitz_ok = lam * float(np.linalg.norm(df)) <= opts.lipschitz_margin * np.sqrt(dd)
        if curvature_ok and lipschitz_ok:
            x = K.project(x - lam * fxb)
            step_min = min(step_min, lam)
            step_max = max(step_max, lam)
            lam *= opts.step_growth
        else:
            lam *= opts.step_shrink
            if lam < 1e-280:
                break
    return _outcome(SolveStatus.MAX_ITERATIONS, x, residual, iterations, step_min, step_max)


def _outcome(status, x, residual, iterations, step_min, step_max):
    if step_max == 0.0:
        step_min = step_max = 0.0
    return SolveOutcome(
        status=status,
        point=np.asarray(x, dtype=float),
        residual=residual,
        iterations=iterations,
        step_min=float(step_min),
        step_max=float(step_max),
    )
