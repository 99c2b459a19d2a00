"""Problem-file JSON schema: load and save whole problems.

Text expressions reuse the expression grammar; affine fields carry their
matrix directly.  Load errors name the offending field path.
"""

from __future__ import annotations

import json
import math
from typing import Union

import numpy as np

from .expr import AffineField, ParseError, PolynomialField, parse, to_text
from .geometry import Ball, Box, ConvexSet, Polyhedron, WholeSpace
from .sweep import VviProblem

__all__ = ["ProblemFormatError", "problem_to_dict", "problem_from_dict", "load_problem", "save_problem"]


class ProblemFormatError(ValueError):
    """Schema violation in a problem file, with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _want(obj, key, types, path):
    if key not in obj:
        raise ProblemFormatError(f"{path}.{key}", "missing required field")
    value = obj[key]
    if not isinstance(value, types):
        want = "/".join(t.__name__ for t in (types if isinstance(types, tuple) else (types,)))
        raise ProblemFormatError(f"{path}.{key}", f"expected {want}, got {type(value).__name__}")
    return value


def _float_list(value, path, allow_none=False):
    if not isinstance(value, list):
        raise ProblemFormatError(path, f"expected a list, got {type(value).__name__}")
    out = []
    for i, v in enumerate(value):
        if v is None and allow_none:
            out.append(None)
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(float(v))
        else:
            raise ProblemFormatError(f"{path}[{i}]", f"expected a number, got {v!r}")
    return out


def _matrix(value, path):
    if not isinstance(value, list) or not value:
        raise ProblemFormatError(path, "expected a nonempty list of rows")
    rows = [_float_list(row, f"{path}[{i}]") for i, row in enumerate(value)]
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ProblemFormatError(f"{path}[{i}]", f"row length {len(row)} != {width}")
    return np.array(rows)


def _field_from_dict(obj, n, path):
    if not isinstance(obj, dict):
        raise ProblemFormatError(path, f"expected an object, got {type(obj).__name__}")
    kind = _want(obj, "type", str, path)
    if kind == "poly":
        exprs = _want(obj, "exprs", list, path)
        if len(exprs) != n:
            raise ProblemFormatError(f"{path}.exprs", f"expected {n} expressions, got {len(exprs)}")
        parsed = []
        for i, text in enumerate(exprs):
            if not isinstance(text, str):
                raise ProblemFormatError(f"{path}.exprs[{i}]", "expected a string")
            try:
                parsed.append(parse(text, n))
            except ParseError as exc:
                raise ProblemFormatError(f"{path}.exprs[{i}]", str(exc)) from exc
        return PolynomialField(parsed, n)
    if kind == "affine":
        M = _matrix(_want(obj, "M", list, path), f"{path}.M")
        q = np.array(_float_list(_want(obj, "q", list, path), f"{path}.q"))
        if M.shape != (n, n):
            raise ProblemFormatError(f"{path}.M", f"expected shape ({n}, {n}), got {M.shape}")
        if q.shape != (n,):
            raise ProblemFormatError(f"{path}.q", f"expected length {n}, got {q.shape[0]}")
        return AffineField(M, q)
    raise ProblemFormatError(f"{path}.type", f"unknown field type {kind!r}")


def _set_from_dict(obj, n, path) -> ConvexSet:
    if not isinstance(obj, dict):
        raise ProblemFormatError(path, f"expected an object, got {type(obj).__name__}")
    kind = _want(obj, "type", str, path)
    try:
        if kind == "whole_space":
            return WholeSpace(n)
        if kind == "box":
            lower = _float_list(_want(obj, "lower", list, path), f"{path}.lower", allow_none=True)
            upper = _float_list(_want(obj, "upper", list, path), f"{path}.upper", allow_none=True)
            lo = [(-math.inf if v is None else v) for v in lower]
            hi = [(math.inf if v is None else v) for v in upper]
            if len(lo) != n or len(hi) != n:
                raise ProblemFormatError(path, f"box bounds must have length {n}")
            return Box(lo, hi)
        if kind == "ball":
            center = _float_list(_want(obj, "center", list, path), f"{path}.center")
            if len(center) != n:
                raise ProblemFormatError(f"{path}.center", f"expected length {n}")
            radius = _want(obj, "radius", (int, float), path)
            return Ball(np.array(center), float(radius))
        if kind == "polyhedron":
            A = _matrix(_want(obj, "A", list, path), f"{path}.A")
            b = np.array(_float_list(_want(obj, "b", list, path), f"{path}.b"))
            if A.shape[1] != n:
                raise ProblemFormatError(f"{path}.A", f"expected {n} columns, got {A.shape[1]}")
            feasible = obj.get("feasible_point")
            if feasible is not None:
                feasible = np.array(_float_list(feasible, f"{path}.feasible_point"))
            return Polyhedron(A, b, feasible_point=feasible)
    except ValueError as exc:
        if isinstance(exc, ProblemFormatError):
            raise
        raise ProblemFormatError(path, str(exc)) from exc
    raise ProblemFormatError(f"{path}.type", f"unknown set type {kind!r}")


def problem_from_dict(obj: dict) -> VviProblem:
    if not isinstance(obj, dict):
        raise ProblemFormatError("$", f"expected an object, got {type(obj).__name__}")
    n = _want(obj, "n", int, "$")
    m = _want(obj, "m", int, "$")
    name = obj.get("name", "problem")
    if not isinstance(name, str):
        raise ProblemFormatError("$.name", "expected a string")
    fields_json = _want(obj, "fields", list, "$")
    if len(fields_json) != m:
        raise ProblemFormatError("$.fields", f"expected {m} fields, got {len(fields_json)}")
    fields = tuple(
        _field_from_dict(fj, n, f"$.fields[{i}]") for i, fj in enumerate(fields_json)
    )
    K = _set_from_dict(_want(obj, "K", dict, "$"), n, "$.K")
    try:
        return VviProblem(name=name, n=n, m=m, fields=fields, K=K)
    except ValueError as exc:
        raise ProblemFormatError("$", str(exc)) from exc


def _set_to_dict(K: ConvexSet) -> dict:
    if isinstance(K, WholeSpace):
        return {"type": "whole_space"}
    if isinstance(K, Box):
        return {
            "type": "box",
            "lower": [None if math.isinf(v) else float(v) for v in K.lower],
            "upper": [None if math.isinf(v) else float(v) for v in K.upper],
        }
    if isinstance(K, Ball):
        return {"type": "ball", "center": [float(v) for v in K.center], "radius": K.radius}
    if isinstance(K, Polyhedron):
        return {
            "type": "polyhedron",
            "A": [[float(v) for v in row] for row in K.A],
            "b": [float(v) for v in K.b],
            "feasible_point": [float(v) for v in K._feasible_point],
        }
    raise ValueError(f"cannot serialize constraint set {K!r}")


def problem_to_dict(problem: VviProblem) -> dict:
    fields = []
    for f in problem.fields:
        if isinstance(f, AffineField):
            fields.append(
                {
                    "type": "affine",
                    "M": [[float(v) for v in row] for row in f.M],
                    "q": [float(v) for v in f.q],
                }
            )
        else:
            fields.append({"type": "poly", "exprs": [to_text(e) for e in f.to_expressions()]})
    return {
        "name": problem.name,
        "n": problem.n,
        "m": problem.m,
        "fields": fields,
        "K": _set_to_dict(problem.K),
    }


def load_problem(path: str) -> VviProblem:
    with open(path, "r") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError("$", f"not valid JSON: {exc}") from exc
    return problem_from_dict(obj)


def save_problem(problem: VviProblem, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem), fh, indent=2)
        fh.write("\n")
