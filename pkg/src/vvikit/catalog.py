"""Built-in problems: the two cubic bicriteria examples with closed-form
solution maps, and seeded random affine generators for audit campaigns.

The closed forms live here rather than in the test suite so the CLI can
print solver-versus-oracle error tables.
"""

from __future__ import annotations

from typing import Optional, Union

import numpy as np

from .expr import AffineField, PolynomialField, parse
from .geometry import Box, ConvexSet, Polyhedron, WholeSpace
from .sweep import VviProblem

__all__ = [
    "example_q",
    "example_p",
    "closed_form_q",
    "closed_form_p",
    "random_affine_vvi",
    "resolve_problem",
    "closed_form_for",
    "CATALOG_NAMES",
]

CATALOG_NAMES = ("example-q", "example-p")


def _poly_field(texts, n):
    return PolynomialField([parse(t, n) for t in texts], n)


def example_q() -> VviProblem:
    """Unconstrained bicriteria problem with cubic gradient-type fields.

    Criteria (x1^3, x2^3 - 1) and (x1^3 - 1, x2^3); both Jacobians are
    diag(3 x1^2, 3 x2^2), so the problem is symmetric and monotone.  Its
    weak Pareto set is the bounded arc (cbrt(1 - t), cbrt(t)), t in [0, 1].
    """
    return VviProblem(
        name="example-q",
        n=2,
        m=2,
        fields=(
            _poly_field(["x1^3", "x2^3 - 1"], 2),
            _poly_field(["x1^3 - 1", "x2^3"], 2),
        ),
        K=WholeSpace(2),
    )


def closed_form_q(xi1: float) -> np.ndarray:
    """Exact solution of the scalarized problem at weight (xi1, 1 - xi1)."""
    if not 0.0 <= xi1 <= 1.0:
        raise ValueError(f"xi1 must be in [0, 1], got {xi1}")
    return np.array([np.cbrt(1.0 - xi1), np.cbrt(xi1)])


def example_p() -> VviProblem:
    """Unconstrained bicriteria problem with rotation-type cubic fields.

    Criteria (-x2 - 1, x1^3 - 1) and (x2 - 1, -x1^3 - 1).  The scalar
    solution set is empty at weight (1/2, 1/2) and the sampled solution
    set splits into two unbounded branches of the curve x2 = -x1^3.
    """
    return VviProblem(
        name="example-p",
        n=2,
        m=2,
        fields=(
            _poly_field(["-x2 - 1", "x1^3 - 1"], 2),
            _poly_field(["x2 - 1", "-x1^3 - 1"], 2),
        ),
        K=WholeSpace(2),
    )


def closed_form_p(xi1: float) -> Optional[np.ndarray]:
    """Exact solution at weight (xi1, 1 - xi1); None at xi1 = 1/2 (empty set)."""
    if not 0.0 <= xi1 <= 1.0:
        raise ValueError(f"xi1 must be in [0, 1], got {xi1}")
    t = 2.0 * xi1 - 1.0
    if t == 0.0:
        return None
    return np.array([1.0 / np.cbrt(t), -1.0 / t])


def closed_form_for(name: str):
    if name == "example-q":
        return closed_form_q
    if name == "example-p":
        return closed_form_p
    raise ValueError(f"no closed form for {name!r}")


def _make_K(n: int, k_spec: Union[str, ConvexSet]) -> ConvexSet:
    if isinstance(k_spec, ConvexSet):
        return k_spec
    if k_spec == "whole_space":
        return WholeSpace(n)
    if k_spec == "unit_box":
        return Box(-np.ones(n), np.ones(n))
    if k_spec == "simplex":
        A = np.vstack([-np.eye(n), np.ones((1, n))])
        b = np.concatenate([np.zeros(n), [1.0]])
        return Polyhedron(A, b, feasible_point=np.zeros(n))
    raise ValueError(f"unknown constraint spec {k_spec!r}")


def random_affine_vvi(
    n: int,
    m: int,
    seed: int,
    klass: str = "symmetric",
    k_spec: Union[str, ConvexSet] = "unit_box",
) -> VviProblem:
    """Seeded random affine problem, monotone by construction.

    klass selects the matrix structure per criterion: ``symmetric`` gives
    B^T B (symmetric PSD), ``skew`` gives A - A^T, ``mixed`` their sum.
    Entries are uniform in [-1, 1]; identical (n, m, seed, klass) inputs
    reproduce the identical problem.
    """
    if n < 1 or m < 1:
        raise ValueError(f"n and m must be >= 1, got n={n}, m={m}")
    if klass not in ("symmetric", "skew", "mixed"):
        raise ValueError(f"unknown class {klass!r} (want symmetric, skew or mixed)")
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(m):
        M = np.zeros((n, n))
        if klass in ("symmetric", "mixed"):
            B = rng.uniform(-1.0, 1.0, (n, n))
            M = M + B.T @ B
        if klass in ("skew", "mixed"):
            A = rng.uniform(-1.0, 1.0, (n, n))
            M = M + A - A.T
        q = rng.uniform(-1.0, 1.0, n)
        fields.append(AffineField(M, q))
    name = f"random-affine:{klass}:{n}:{m}:{seed}"
    return VviProblem(name=name, n=n, m=m, fields=tuple(fields), K=_make_K(n, k_spec))


def resolve_problem(ref: str) -> VviProblem:
    """Map a catalog name to a problem instance.

    Understood names: ``example-q``, ``example-p`` and
    ``random-affine:<class>:<n>:<m>:<seed>``.
    """
    if ref == "example-q":
        return example_q()
    if ref == "example-p":
        return example_p()
    if ref.startswith("random-affine:"):
        parts = ref.split(":")
        if len(parts) != 5:
            raise ValueError(
                f"bad random-affine reference {ref!r} "
                "(want random-affine:<class>:<n>:<m>:<seed>)"
            )
        _, klass, n, m, seed = parts
        try:
            return random_affine_vvi(int(n), int(m), int(seed), klass=klass)
        except ValueError as exc:
            raise ValueError(f"bad random-affine reference {ref!r}: {exc}") from exc
    raise KeyError(ref)
