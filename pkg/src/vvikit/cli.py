"""Command-line interface.

Commands: solve, sweep, components, check, verify-example.  Exit codes
are stable contracts: 0 success/Consistent, 1 usage error, 2 solver
non-convergence or verification failure, 3 audit Violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import catalog
from .analysis import check_monotone, classify_symmetry
from .problemfile import ProblemFormatError, load_problem
from .sweep import (
    SweepOptions,
    classify_samples,
    read_cloud_csv,
    simplex_grid,
    sweep,
    write_cloud_csv,
)
from .topology import (
    DEFAULT_PROBE_RADII,
    Consistency,
    boundedness_probe,
    build_components,
    report_to_json_dict,
    theorem_audit,
)
from .vi import SimplexWeight, SolveOptions, scalarize, solve_vi

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_problem_ref(ref: str):
    try:
        return catalog.resolve_problem(ref)
    except KeyError:
        pass
    if not os.path.exists(ref):
        raise ValueError(f"unknown problem reference {ref!r}: not a catalog name or file")
    return load_problem(ref)


def _solve_options(args) -> SolveOptions:
    opts = SolveOptions()
    if getattr(args, "tol", None) is not None:
        opts.tol = args.tol
    if getattr(args, "max_iter", None) is not None:
        opts.max_iter = args.max_iter
    if getattr(args, "divergence_radius", None) is not None:
        opts.divergence_radius = args.divergence_radius
    opts.validate()
    return opts


def _threads(args) -> int:
    value = getattr(args, "threads", None)
    if value is None:
        value = int(os.environ.get("VVI_THREADS", "0"))
    if value < 0:
        raise ValueError(f"--threads must be >= 0, got {value}")
    # auto currently selects serial execution; grids are cheap to solve
    return value if value > 0 else 1


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    problem = _resolve_problem_ref(args.problem)
    weights = tuple(float(v) for v in args.xi.split(","))
    weight = SimplexWeight(weights)
    field = scalarize(problem, weight)
    outcome = solve_vi(field, problem.K, None, _solve_options(args))
    _emit(json.dumps(outcome.to_json_dict(), indent=2) + "\n", args.out)
    return 0 if outcome.converged else 2


def cmd_sweep(args) -> int:
    problem = _resolve_problem_ref(args.problem)
    grid = simplex_grid(problem.m, args.resolution, args.margin)
    opts = SweepOptions(starts=args.starts, seed=args.seed, solve=_solve_options(args))
    cloud = sweep(problem, grid, opts, threads=_threads(args))
    cloud.interior_margin = args.margin
    if args.out:
        write_cloud_csv(cloud, args.out)
    else:
        write_cloud_csv(cloud, sys.stdout)
    return 0


def cmd_components(args) -> int:
    problem = _resolve_problem_ref(args.problem)
    cloud = read_cloud_csv(args.cloud)
    if args.assume_monotone:
        monotone_certified = True
    else:
        monotone_certified = check_monotone(problem, samples=200, seed=0).monotone_certified
    analysis = build_components(cloud, which=args.klass, delta=args.delta)
    if not analysis.empty and args.probe:
        radii = tuple(float(r) for r in args.radii.split(","))
        solve_opts = _solve_options(args)
        analysis.components = [
            boundedness_probe(problem, c, cloud, radii=radii, solve_opts=solve_opts)
            for c in analysis.components
        ]
    coverage = cloud.domain_coverage() if args.klass == "weak" else None
    verdict = theorem_audit(
        analysis.components,
        which=args.klass,
        polyhedral=problem.K.polyhedral,
        monotone_certified=monotone_certified,
        domain_coverage=coverage,
        empty=analysis.empty,
    )
    _emit(json.dumps(report_to_json_dict(analysis, verdict), indent=2) + "\n", args.out)
    if verdict.consistency is Consistency.VIOLATION:
        return 3
    if verdict.consistency is Consistency.INCONCLUSIVE:
        sys.stderr.write("warning: audit inconclusive\n")
    return 0


def cmd_check(args) -> int:
    problem = _resolve_problem_ref(args.problem)
    monotone = check_monotone(problem, samples=args.samples, seed=args.seed)
    symmetry = classify_symmetry(problem, samples=min(args.samples, 200), seed=args.seed)
    report = {
        "problem": problem.name,
        "monotone": monotone.to_json_dict(),
        "symmetry": symmetry.to_json_dict(),
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_verify_example(args) -> int:
    if args.name not in catalog.CATALOG_NAMES:
        raise ValueError(f"unknown example {args.name!r} (want one of {catalog.CATALOG_NAMES})")
    problem = catalog.resolve_problem(args.name)
    oracle = catalog.closed_form_for(args.name)
    grid = simplex_grid(problem.m, args.resolution)
    opts = SweepOptions(starts=1, seed=args.seed, solve=_solve_options(args))
    cloud = sweep(problem, grid, opts, threads=_threads(args))
    max_err = 0.0
    lines = []
    plot_rows = []
    for sample in cloud.samples:
        xi1 = sample.weight.weights[0]
        expected = oracle(xi1)
        if expected is None:
            lines.append(f"xi1={xi1:<8.6g} status={sample.outcome.status.value:<13s} "
                         "oracle=empty")
            continue
        if not sample.converged:
            lines.append(f"xi1={xi1:<8.6g} status={sample.outcome.status.value:<13s} "
                         "error=unconverged")
            max_err = np.inf
            continue
        err = float(np.linalg.norm(sample.outcome.point - expected))
        max_err = max(max_err, err)
        lines.append(f"xi1={xi1:<8.6g} status={sample.outcome.status.value:<13s} "
                     f"error={err:.3e}")
        plot_rows.append(sample.outcome.point)
    print("\n".join(lines))
    print(f"max error over admissible grid: {max_err:.6e}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("x_1,x_2\n")
            for p in plot_rows:
                fh.write(f"{p[0]:.17g},{p[1]:.17g}\n")
    return 0 if max_err <= 1e-6 else 2


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=None, help="residual tolerance (default 1e-9)")
    p.add_argument("--max-iter", type=int, default=None, help="iteration cap (default 200000)")
    p.add_argument(
        "--divergence-radius", type=float, default=None, help="divergence radius (default 1e8)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vvikit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[], help="solve one scalarized problem")
    p.add_argument("problem", help="catalog name or problem JSON path")
    p.add_argument("--xi", required=True, help="comma-separated simplex weights")
    p.add_argument("--out", default=None)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="sample the solution map over the simplex")
    p.add_argument("problem")
    p.add_argument("--resolution", type=int, required=True)
    p.add_argument("--margin", type=float, default=0.0, help="interior margin for the grid")
    p.add_argument("--starts", type=int, default=1, help="starts per weight (default 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="0 = auto (VVI_THREADS fallback)")
    p.add_argument("--out", default=None, help="cloud CSV path (default stdout)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("components", help="component analysis and theorem audit of a cloud")
    p.add_argument("cloud", help="cloud CSV path")
    p.add_argument("--problem", required=True, help="problem the cloud was swept from")
    p.add_argument("--class", dest="klass", choices=("weak", "proper", "pareto"), default="weak")
    p.add_argument("--delta", type=float, default=None, help="linking radius override")
    p.add_argument("--probe", action=argparse.BooleanOptionalAction, default=True,
                   help="run the boundedness probe")
    p.add_argument("--radii", default=",".join(str(r) for r in DEFAULT_PROBE_RADII))
    p.add_argument("--assume-monotone", action="store_true",
                   help="skip the monotonicity check and trust the problem")
    p.add_argument("--out", default=None)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("check", help="monotonicity and symmetry hypothesis checks")
    p.add_argument("problem")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify-example", help="solver-vs-closed-form error table")
    p.add_argument("name")
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="plot CSV path (solution curve)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_verify_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, ProblemFormatError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
