"""Sampling the solution map over the weight simplex.

A sweep solves the scalarized problem at every lattice point of the
simplex and collects the converged points into a cloud: the converged
samples estimate the weak Pareto set, the interior-weight subset the
proper Pareto set.  Output is deterministic for a fixed seed, including
under parallel execution (results are placed in grid order).
"""

from __future__ import annotations

import enum
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from .expr import VectorField
from .geometry import ConvexSet, contains
from .vi import SimplexWeight, SolveOptions, SolveOutcome, SolveStatus, scalarize, solve_vi

__all__ = [
    "VviProblem",
    "SolutionSample",
    "SolutionCloud",
    "SweepOptions",
    "ParetoStatus",
    "SampleClassification",
    "simplex_grid",
    "sweep",
    "classify_samples",
    "write_cloud_csv",
    "read_cloud_csv",
    "DEFAULT_INTERIOR_MARGIN",
]

DEDUP_TOL = 1e-6
DEFAULT_INTERIOR_MARGIN = 1e-3  # when a compact surrogate of the open simplex is wanted


@dataclass(frozen=True)
class VviProblem:
    """A vector variational inequality: m criteria fields over one set K."""

    name: str
    n: int
    m: int
    fields: tuple
    K: ConvexSet

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if len(self.fields) != self.m:
            raise ValueError(f"expected {self.m} fields, got {len(self.fields)}")
        for f in self.fields:
            if f.n != self.n:
                raise ValueError("field dimension mismatch")
        if self.K.n != self.n:
            raise ValueError("constraint set dimension mismatch")


@dataclass(frozen=True)
class SolutionSample:
    weight: SimplexWeight
    outcome: SolveOutcome
    start_index: int

    @property
    def converged(self) -> bool:
        return self.outcome.status is SolveStatus.CONVERGED


@dataclass
class SolutionCloud:
    problem_name: str
    samples: list
    m: int
    n: int
    resolution: Optional[int] = None
    interior_margin: float = 0.0
    seed: int = 0
    starts: int = 1

    def converged_indices(self) -> list:
        return [i for i, s in enumerate(self.samples) if s.converged]

    def domain_coverage(self) -> float:
        """Fraction of distinct grid weights holding a converged sample."""
        seen: dict = {}
        for s in self.samples:
            key = s.weight.weights
            seen[key] = seen.get(key, False) or s.converged
        if not seen:
            return 0.0
        return sum(1 for ok in seen.values() if ok) / len(seen)


@dataclass
class SweepOptions:
    starts: int = 3
    seed: int = 0
    start_box_halfwidth: float = 1.0
    solve: SolveOptions = field(default_factory=SolveOptions)


def simplex_grid(m: int, resolution: int, interior_margin: float = 0.0) -> list:
    """Lattice points {k/resolution} of the unit simplex, lexicographic.

    With a positive margin, only weights with min_l w_l >= margin survive
    (a compact discretization of the relative interior).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    if not 0.0 <= interior_margin < 1.0 / m:
        raise ValueError(
            f"interior_margin must be in [0, 1/m) = [0, {1.0 / m}), got {interior_margin}"
        )
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            prefix = prefix + [remaining]
            w = SimplexWeight(
                tuple(k / resolution for k in prefix), lattice=tuple(prefix)
            )
            if min(w.weights) >= interior_margin:
                out.append(w)
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], resolution, m)
    return out


def _solve_one_weight(problem, weight, index, opts) -> list:
    """All start outcomes for one weight, deduplicated; worst kept if none converge."""
    f = scalarize(problem, weight)
    default_start = problem.K.project(np.zeros(problem.n))
    outcomes = []
    for s in range(opts.starts):
        if s == 0:
            x0 = default_start
        else:
            rng = np.random.default_rng((opts.seed, index, s))
            x0 = default_start + rng.uniform(
                -opts.start_box_halfwidth, opts.start_box_halfwidth, problem.n
            )
        outcomes.append((s, solve_vi(f, problem.K, x0, opts.solve)))
    kept = []
    for s, outcome in outcomes:
        if not outcome.status is SolveStatus.CONVERGED:
            continue
        if any(
            np.linalg.norm(outcome.point - prev.outcome.point) <= DEDUP_TOL for prev in kept
        ):
            continue
        kept.append(SolutionSample(weight=weight, outcome=outcome, start_index=s))
    if not kept:
        s, outcome = min(outcomes, key=lambda it: it[1].residual)
        kept.append(SolutionSample(weight=weight, outcome=outcome, start_index=s))
    return kept


def _worker(args):
    problem, weight, index, opts = args
    return index, _solve_one_weight(problem, weight, index, opts)


def sweep(
    problem: VviProblem,
    grid: Sequence[SimplexWeight],
    opts: Optional[SweepOptions] = None,
    threads: int = 1,
) -> SolutionCloud:
    """Solve the scalarized problem at every grid weight.

    Each weight is solved from the deterministic start P_K(0) plus
    ``opts.starts - 1`` seeded random starts; converged solutions are
    deduplicated per weight within 1e-6.  A weight where no start
    converges contributes a single non-converged marker sample (its
    best-residual outcome), so every grid weight appears in the cloud.
    """
    if not grid:
        raise ValueError("grid must be nonempty")
    opts = opts or SweepOptions()
    if opts.starts < 1:
        raise ValueError(f"starts must be >= 1, got {opts.starts}")
    jobs = [(problem, w, i, opts) for i, w in enumerate(grid)]
    results: list = [None] * len(grid)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for index, kept in pool.map(_worker, jobs, chunksize=8):
                results[index] = kept
    else:
        for job in jobs:
            index, kept = _worker(job)
            results[index] = kept
    samples = [s for kept in results for s in kept]
    resolution = None
    if grid[0].lattice is not None:
        resolution = sum(grid[0].lattice)
    return SolutionCloud(
        problem_name=problem.name,
        samples=samples,
        m=problem.m,
        n=problem.n,
        resolution=resolution,
        interior_margin=0.0,
        seed=opts.seed,
        starts=opts.starts,
    )


class ParetoStatus(str, enum.Enum):
    EXACT = "Exact"
    BRACKETED_ONLY = "BracketedOnly"


@dataclass
class SampleClassification:
    weak: list
    proper: list
    pareto_status: ParetoStatus


def classify_samples(cloud: SolutionCloud, polyhedral: bool) -> SampleClassification:
    """Split converged samples into the weak and proper estimates.

    For polyhedral K the Pareto set equals the proper set (the
    scalarization inclusion is an equality), so the proper samples are an
    Exact Pareto estimate; otherwise the Pareto set is only bracketed
    between the proper and weak estimates.
    """
    weak = [s for s in cloud.samples if s.converged]
    proper = [s for s in weak if s.weight.interior]
    status = ParetoStatus.EXACT if polyhedral else ParetoStatus.BRACKETED_ONLY
    return SampleClassification(weak=weak, proper=proper, pareto_status=status)


# -- cloud CSV interface --

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_cloud_csv(cloud: SolutionCloud, dest: Union[str, TextIO]) -> None:
    """One row per sample, grid order, %.17g floats."""
    header = (
        [f"xi_{l + 1}" for l in range(cloud.m)]
        + ["interior", "status", "iterations", "residual"]
        + [f"x_{i + 1}" for i in range(cloud.n)]
    )
    lines = [",".join(header)]
    for s in cloud.samples:
        row = [_fmt(v) for v in s.weight.weights]
        row.append("1" if s.weight.interior else "0")
        row.append(s.outcome.status.value)
        row.append(str(s.outcome.iterations))
        row.append(_fmt(s.outcome.residual))
        row.extend(_fmt(v) for v in s.outcome.point)
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if isinstance(dest, str):
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)


def _infer_resolution(weight_tuples) -> Optional[int]:
    values = sorted({v for w in weight_tuples for v in w})
    diffs = [b - a for a, b in zip(values, values[1:]) if b - a > 1e-12]
    if not diffs:
        return None
    res = round(1.0 / min(diffs))
    for w in weight_tuples:
        for v in w:
            if abs(round(v * res) - v * res) > 1e-9 * res:
                return None
    return res


def read_cloud_csv(source: Union[str, TextIO], problem_name: str = "") -> SolutionCloud:
    if isinstance(source, str):
        with open(source, "r", newline="") as fh:
            return read_cloud_csv(fh, problem_name=problem_name or os.path.basename(source))
    lines = [line.strip() for line in source if line.strip()]
    if not lines:
        raise ValueError("empty cloud CSV")
    header = lines[0].split(",")
    m = sum(1 for h in header if h.startswith("xi_"))
    n = sum(1 for h in header if h.startswith("x_"))
    if m < 1 or n < 1 or header[m] != "interior":
        raise ValueError(f"unrecognized cloud CSV header: {header}")
    weight_tuples = []
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        w = tuple(float(c) for c in cells[:m])
        status = SolveStatus(cells[m + 1])
        iterations = int(cells[m + 2])
        residual = float(cells[m + 3])
        point = np.array([float(c) for c in cells[m + 4 : m + 4 + n]])
        weight_tuples.append(w)
        rows.append((w, status, iterations, residual, point))
    resolution = _infer_resolution(weight_tuples)
    samples = []
    for w, status, iterations, residual, point in rows:
        lattice = None
        if resolution is not None:
            lattice = tuple(int(round(v * resolution)) for v in w)
        weight = SimplexWeight(w, lattice=lattice)
        outcome = SolveOutcome(
            status=status,
            point=point,
            residual=residual,
            iterations=iterations,
            step_min=0.0,
            step_max=0.0,
        )
        samples.append(SolutionSample(weight=weight, outcome=outcome, start_index=0))
    return SolutionCloud(
        problem_name=problem_name,
        samples=samples,
        m=m,
        n=n,
        resolution=resolution,
    )
