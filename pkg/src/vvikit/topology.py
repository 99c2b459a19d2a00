"""Connected components of sampled solution sets and the theorem audits.

Samples are linked when their scale-normalized distance
``||x - y|| / (1 + ||x|| + ||y||)`` is below the linking radius; the
normalization keeps curves that run off to infinity linkable at any fixed
resolution while genuinely separate branches stay apart.  Component
boundedness is probed by re-solving under growing ball constraints, with
weight refinement toward the open ends of a component (the adjacent grid
weights where no solve converged): a component can be unbounded even
though every individual scalar solution set is bounded, so probing at a
fixed weight alone is not enough.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .geometry import intersect_ball
from .sweep import SolutionCloud, VviProblem
from .vi import SimplexWeight, SolveOptions, SolveStatus, scalarize, solve_vi

__all__ = [
    "Boundedness",
    "Consistency",
    "ComponentReport",
    "ComponentAnalysis",
    "TheoremVerdict",
    "UnionFind",
    "relative_distance",
    "default_linking_radius",
    "build_components",
    "boundedness_probe",
    "theorem_audit",
    "report_to_json_dict",
    "DEFAULT_PROBE_RADII",
]

DEFAULT_PROBE_RADII = (1e1, 1e2, 1e3, 1e4)
_BOUNDARY_FRACTION = 0.99  # iterate is "pressing the ball" above this fraction of R
_STABLE_NORM_TOL = 1e-6
_LINKING_FLOOR = 1e-4
_MAX_REFINEMENTS = 16


class Boundedness(str, enum.Enum):
    BOUNDED = "Bounded"
    UNBOUNDED = "Unbounded"
    INCONCLUSIVE = "Inconclusive"


class Consistency(str, enum.Enum):
    CONSISTENT = "Consistent"
    VIOLATION = "Violation"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ComponentReport:
    component_id: int
    member_indices: list
    diameter: float
    max_norm: float
    boundedness: Boundedness = Boundedness.INCONCLUSIVE
    probe_trace: list = field(default_factory=list)  # (radius, max solution norm)


@dataclass
class ComponentAnalysis:
    which: str
    delta: float
    components: list
    empty: bool = False
    selected_indices: list = field(default_factory=list)


@dataclass
class TheoremVerdict:
    component_count: int
    all_components_unbounded: bool
    bounded_and_nonempty: bool
    connected: bool
    consistency: Consistency
    notes: list = field(default_factory=list)
    domain_coverage: Optional[float] = None


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1


def relative_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / (1.0 + np.linalg.norm(a) + np.linalg.norm(b)))


def _lattice_adjacent(k1, k2) -> bool:
    if k1 == k2:
        return True  # co-located weights (multistart samples of one convex set)
    diffs = [a - b for a, b in zip(k1, k2)]
    return sorted(diffs) == sorted([1, -1] + [0] * (len(diffs) - 2))


def _relative_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    scale = 1.0 + np.linalg.norm(points, axis=1)
    return dist / (scale[:, None] + scale[None, :] - 1.0)


def default_linking_radius(points: np.ndarray, lattices: Sequence) -> float:
    """Linking radius covering both sampling gaps along the set and grid jumps.

    Twice the largest nearest-neighbour relative distance covers the
    sparsest stretch of a sampled curve; twice the largest gap between
    grid-adjacent samples additionally covers jumps of the solution map
    across one grid step (sets pinned to different constraint faces).
    A small floor handles clouds that collapse to one point.
    """
    n = len(points)
    if n <= 1:
        return _LINKING_FLOOR
    rel = _relative_matrix(points)
    np.fill_diagonal(rel, np.inf)
    max_nn = float(rel.min(axis=1).max())
    max_adjacent = 0.0
    if all(k is not None for k in lattices):
        for i in range(n):
            for j in range(i + 1, n):
                if _lattice_adjacent(lattices[i], lattices[j]):
                    max_adjacent = max(max_adjacent, float(rel[i, j]))
    return max(2.0 * max_nn, 2.0 * max_adjacent, _LINKING_FLOOR)


def _select(cloud: SolutionCloud, which: str) -> list:
    if which == "weak":
        return [i for i, s in enumerate(cloud.samples) if s.converged]
    if which in ("proper", "pareto"):
        return [
            i for i, s in enumerate(cloud.samples) if s.converged and s.weight.interior
        ]
    raise ValueError(f"unknown sample class {which!r} (want weak, proper or pareto)")


def build_components(
    cloud: SolutionCloud, which: str = "weak", delta: Optional[float] = None
) -> ComponentAnalysis:
    """Union-find components of the linking graph on converged samples."""
    if delta is not None and not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    selected = _select(cloud, which)
    if not selected:
        return ComponentAnalysis(which=which, delta=delta or 0.0, components=[], empty=True)
    points = np.array([cloud.samples[i].outcome.point for i in selected])
    lattices = [cloud.samples[i].weight.lattice for i in selected]
    if delta is None:
        delta = default_linking_radius(points, lattices)
    rel = _relative_matrix(points)
    uf = UnionFind(len(selected))
    for i in range(len(selected)):
        for j in range(i + 1, len(selected)):
            if rel[i, j] <= delta:
                uf.union(i, j)
    groups: dict = {}
    for local in range(len(selected)):
        groups.setdefault(uf.find(local), []).append(local)
    # deterministic component ids: order of first member in grid order
    ordered = sorted(groups.values(), key=lambda g: g[0])
    components = []
    for cid, locals_ in enumerate(ordered):
        members = [selected[i] for i in locals_]
        pts = points[locals_]
        if len(pts) == 1:
            diameter = 0.0
        else:
            diff = pts[:, None, :] - pts[None, :, :]
            diameter = float(np.linalg.norm(diff, axis=2).max())
        max_norm = float(np.linalg.norm(pts, axis=1).max())
        components.append(
            ComponentReport(
                component_id=cid,
                member_indices=members,
                diameter=diameter,
                max_norm=max_norm,
            )
        )
    return ComponentAnalysis(
        which=which, delta=float(delta), components=components, selected_indices=selected
    )


def _grid_neighbors(lattice):
    m = len(lattice)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            if lattice[j] >= 1:
                moved = list(lattice)
                moved[i] += 1
                moved[j] -= 1
                yield tuple(moved)


def _open_ends(component: ComponentReport, cloud: SolutionCloud):
    """(edge weight, target weight) pairs pointing at grid weights with no
    converged sample anywhere in the cloud: the open ends of the component."""
    converged_lattices = {
        s.weight.lattice for s in cloud.samples if s.converged and s.weight.lattice
    }
    present_lattices = {s.weight.lattice for s in cloud.samples if s.weight.lattice}
    ends = {}
    for idx in component.member_indices:
        sample = cloud.samples[idx]
        lattice = sample.weight.lattice
        if lattice is None:
            continue
        for neighbor in _grid_neighbors(lattice):
            if neighbor in converged_lattices or neighbor not in present_lattices:
                continue
            norm = float(np.linalg.norm(sample.outcome.point))
            key = neighbor
            if key not in ends or norm > ends[key][0]:
                resolution = sum(lattice)
                target = SimplexWeight(tuple(k / resolution for k in neighbor), lattice=neighbor)
                ends[key] = (norm, sample.weight, target)
    return [(edge, target) for _, edge, target in ends.values()]


def _blend_weights(edge: SimplexWeight, target: SimplexWeight, s: float) -> SimplexWeight:
    w = tuple((1.0 - s) * a + s * b for a, b in zip(edge.weights, target.weights))
    total = sum(w)
    return SimplexWeight(tuple(v / total for v in w))


def boundedness_probe(
    problem: VviProblem,
    component: ComponentReport,
    cloud: SolutionCloud,
    radii: Sequence[float] = DEFAULT_PROBE_RADII,
    solve_opts: Optional[SolveOptions] = None,
) -> ComponentReport:
    """Classify a component as Bounded/Unbounded/Inconclusive by re-solving
    under growing ball constraints.

    For each radius R the problem is re-solved over K intersected with
    Ball(0, R), warm-started, at (a) the weight of the component's
    max-norm member and (b) a bisection refinement of the weight toward
    each open end, pushed until the solution presses the ball.  The
    component is Unbounded when the recorded norms reach 0.99 R at the
    two largest radii and grow monotonically; Bounded when the norms
    stabilize strictly inside the ball; otherwise Inconclusive.
    """
    radii = [float(r) for r in radii]
    if len(radii) < 2:
        raise ValueError("radius schedule needs at least two entries")
    if any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ValueError("radii must be positive and strictly increasing")
    if not component.member_indices:
        raise ValueError("component has no members")
    opts = solve_opts or SolveOptions()

    anchor_idx = max(
        component.member_indices,
        key=lambda i: float(np.linalg.norm(cloud.samples[i].outcome.point)),
    )
    anchor = cloud.samples[anchor_idx]
    best: dict = {}

    def record(radius, norm):
        if radius not in best or norm > best[radius]:
            best[radius] = norm

    def ball_solve(weight, radius, warm):
        K_r = intersect_ball(problem.K, radius)
        f = scalarize(problem, weight)
        return solve_vi(f, K_r, warm, opts)

    # fixed-weight trace along the radius schedule
    warm = anchor.outcome.point
    fixed_ok = True
    for radius in radii:
        outcome = ball_solve(anchor.weight, radius, warm)
        if outcome.converged:
            record(radius, float(np.linalg.norm(outcome.point)))
            warm = outcome.point
        else:
            fixed_ok = False

    # refinement toward each open end, pressed until the ball binds
    for edge_weight, target_weight in _open_ends(component, cloud):
        edge_sample = max(
            (
                cloud.samples[i]
                for i in component.member_indices
                if cloud.samples[i].weight.weights == edge_weight.weights
            ),
            key=lambda s: float(np.linalg.norm(s.outcome.point)),
        )
        warm = edge_sample.outcome.point
        j = 0
        for radius in radii:
            while (
                best.get(radius, 0.0) < _BOUNDARY_FRACTION * radius and j < _MAX_REFINEMENTS
            ):
                j += 1
                blended = _blend_weights(edge_weight, target_weight, 1.0 - 2.0 ** (-j))
                outcome = ball_solve(blended, radius, warm)
                if not outcome.converged:
                    j = _MAX_REFINEMENTS
                    break
                warm = outcome.point
                record(radius, float(np.linalg.norm(outcome.point)))

    trace = [(r, best[r]) for r in radii if r in best]
    verdict = _boundedness_verdict(radii, best, fixed_ok)
    return replace(component, boundedness=verdict, probe_trace=trace)


def _boundedness_verdict(radii, best, fixed_ok) -> Boundedness:
    r_prev, r_last = radii[-2], radii[-1]
    if r_prev in best and r_last in best:
        norms = [best[r] for r in radii if r in best]
        monotone = all(b >= a - _STABLE_NORM_TOL for a, b in zip(norms, norms[1:]))
        if (
            best[r_prev] >= _BOUNDARY_FRACTION * r_prev
            and best[r_last] >= _BOUNDARY_FRACTION * r_last
            and monotone
        ):
            return Boundedness.UNBOUNDED
        if (
            fixed_ok
            and len(best) == len(radii)
            and abs(best[r_last] - best[r_prev]) < _STABLE_NORM_TOL
            and best[r_last] < _BOUNDARY_FRACTION * r_last
        ):
            return Boundedness.BOUNDED
    return Boundedness.INCONCLUSIVE


def theorem_audit(
    reports: Sequence[ComponentReport],
    which: str,
    polyhedral: bool,
    monotone_certified: bool,
    domain_coverage: Optional[float] = None,
    empty: bool = False,
) -> TheoremVerdict:
    """Cross-check component reports against the connectedness theorems.

    For a monotone problem: a disconnected weak/proper solution set must
    have every component unbounded, so a confidently bounded component
    among several is flagged as a Violation; a bounded nonempty weak set
    must be connected and its weight domain must cover the whole simplex.
    The Pareto class is audited only for polyhedral K, where it coincides
    with the proper class.
    """
    notes: list = []
    if empty or not reports:
        notes.append(
            "empty solution set: connectedness/unboundedness statements are vacuous"
        )
        return TheoremVerdict(
            component_count=0,
            all_components_unbounded=False,
            bounded_and_nonempty=False,
            connected=False,
            consistency=Consistency.CONSISTENT,
            notes=notes,
            domain_coverage=domain_coverage,
        )
    if which == "pareto" and not polyhedral:
        notes.append(
            "non-polyhedral constraint set: the Pareto set is only bracketed by the "
            "proper and weak estimates; observations reported without audit"
        )
        return TheoremVerdict(
            component_count=len(reports),
            all_components_unbounded=all(
                r.boundedness is Boundedness.UNBOUNDED for r in reports
            ),
            bounded_and_nonempty=all(r.boundedness is Boundedness.BOUNDED for r in reports),
            connected=len(reports) == 1,
            consistency=Consistency.INCONCLUSIVE,
            notes=notes,
            domain_coverage=domain_coverage,
        )

    count = len(reports)
    bounded = [r for r in reports if r.boundedness is Boundedness.BOUNDED]
    unbounded = [r for r in reports if r.boundedness is Boundedness.UNBOUNDED]
    inconclusive = [r for r in reports if r.boundedness is Boundedness.INCONCLUSIVE]

    consistency = Consistency.CONSISTENT
    if count >= 2 and bounded:
        consistency = Consistency.VIOLATION
        notes.append(
            f"{count} components but component(s) "
            f"{[r.component_id for r in bounded]} are confidently bounded; a "
            "disconnected solution set of a monotone problem must have all "
            "components unbounded"
        )
    elif count >= 2 and inconclusive:
        consistency = Consistency.INCONCLUSIVE
        notes.append(
            "disconnection observed but unboundedness was not confirmed for "
            f"component(s) {[r.component_id for r in inconclusive]}"
        )
    elif (
        which == "weak"
        and count == len(bounded)
        and domain_coverage is not None
        and domain_coverage < 1.0
    ):
        consistency = Consistency.VIOLATION
        notes.append(
            f"bounded nonempty weak set but only {domain_coverage:.1%} of grid "
            "weights produced a solution; the solution map domain should be the "
            "whole simplex"
        )
    if consistency is Consistency.VIOLATION and monotone_certified:
        notes.append(
            "monotonicity was certified, so this is probably a numerical artifact: "
            "try a finer grid, a smaller linking radius, or larger probe radii"
        )
    if consistency is Consistency.VIOLATION and not monotone_certified:
        notes.append(
            "monotonicity was not certified; the theorems do not apply to "
            "non-monotone problems, so this may be genuine behavior"
        )
    return TheoremVerdict(
        component_count=count,
        all_components_unbounded=count >= 1 and len(unbounded) == count,
        bounded_and_nonempty=count >= 1 and len(bounded) == count,
        connected=count == 1,
        consistency=consistency,
        notes=notes,
        domain_coverage=domain_coverage,
    )


def report_to_json_dict(analysis: ComponentAnalysis, verdict: TheoremVerdict) -> dict:
    return {
        "class": analysis.which,
        "delta": analysis.delta,
        "empty": analysis.empty,
        "components": [
            {
                "id": c.component_id,
                "size": len(c.member_indices),
                "diameter": c.diameter,
                "max_norm": c.max_norm,
                "boundedness": c.boundedness.value,
                "probe": [{"R": r, "norm": v} for r, v in c.probe_trace],
            }
            for c in analysis.components
        ],
        "verdict": {
            "component_count": verdict.component_count,
            "all_components_unbounded": verdict.all_components_unbounded,
            "bounded_and_nonempty": verdict.bounded_and_nonempty,
            "connected": verdict.connected,
            "consistency": verdict.consistency.value,
            "domain_coverage": verdict.domain_coverage,
            "notes": verdict.notes,
        },
    }
