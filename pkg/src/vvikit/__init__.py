"""vvikit: solve monotone vector variational inequalities by simplex
scalarization, reconstruct their weak/proper Pareto solution sets, and
audit the connectedness structure of the sampled sets."""

from .expr import (
    AffineField,
    Expression,
    ParseError,
    PolynomialField,
    VectorField,
    differentiate,
    evaluate,
    jacobian,
    parse,
    to_text,
)
from .geometry import (
    Ball,
    Box,
    ConvexSet,
    IntersectionSet,
    Polyhedron,
    ProjectionError,
    WholeSpace,
    contains,
    intersect_ball,
    project,
)
from .vi import (
    SimplexWeight,
    SolveOptions,
    SolveOutcome,
    SolveStatus,
    natural_residual,
    scalarize,
    solve_vi,
)
from .sweep import (
    ParetoStatus,
    SampleClassification,
    SolutionCloud,
    SolutionSample,
    SweepOptions,
    VviProblem,
    classify_samples,
    read_cloud_csv,
    simplex_grid,
    sweep,
    write_cloud_csv,
)
from .topology import (
    Boundedness,
    ComponentAnalysis,
    ComponentReport,
    Consistency,
    TheoremVerdict,
    boundedness_probe,
    build_components,
    theorem_audit,
)
from .analysis import (
    MonotoneReport,
    SymmetryClass,
    SymmetryReport,
    check_monotone,
    classify_symmetry,
    falsify_pareto,
    falsify_weak_pareto,
)
from . import catalog, problemfile

__version__ = "0.1.0"
