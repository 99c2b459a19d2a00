"""Polynomial expression ASTs and the vector fields built from them.

Expressions are immutable trees over constants, 1-based variables ``x1..xn``,
negation, sums, products and nonnegative integer powers.  That grammar is
closed under differentiation, which keeps the symbolic Jacobians total.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "Expression",
    "Const",
    "Var",
    "Neg",
    "Sum",
    "Prod",
    "Pow",
    "ParseError",
    "parse",
    "evaluate",
    "differentiate",
    "to_text",
    "VectorField",
    "PolynomialField",
    "AffineField",
    "jacobian",
    "combine_fields",
    "to_monomials",
    "from_monomials",
]


class ParseError(ValueError):
    """Syntax or semantic error in expression text, with a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class Sum:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Prod:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int  # >= 0


Expression = Union[Const, Var, Neg, Sum, Prod, Pow]


# -- smart constructors (trivial simplification only: constant folding,
#    0/1 absorption; correctness is checked by evaluation, not syntax) --

def s_neg(e: Expression) -> Expression:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


def s_sum(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(a, Const) and a.value == 0.0:
        return b
    if isinstance(b, Const) and b.value == 0.0:
        return a
    return Sum(a, b)


def s_prod(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, Const):
        if a.value == 0.0:
            return Const(0.0)
        if a.value == 1.0:
            return b
    if isinstance(b, Const):
        if b.value == 0.0:
            return Const(0.0)
        if b.value == 1.0:
            return a
    return Prod(a, b)


def s_pow(base: Expression, exponent: int) -> Expression:
    if exponent == 0:
        return Const(1.0)
    if exponent == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value**exponent)
    return Pow(base, exponent)


# -- parsing --

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>x\d+)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "var":
            tokens.append(("var", m.group("var"), m.start("var")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent: `^` > unary minus > `*` > `+`/`-`, `^` right-assoc."""

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Expression:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos)
        return e

    def expr(self) -> Expression:
        e = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                e = Sum(e, s_neg(rhs)) if text == "-" else Sum(e, rhs)
            else:
                return e

    def term(self) -> Expression:
        e = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "*":
                self.advance()
                e = Prod(e, self.unary())
            else:
                return e

    def unary(self) -> Expression:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return s_neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            _, _, epos = self.peek()
            exp_ast = self.unary()
            exp = _const_fold(exp_ast)
            if exp is None or not float(exp).is_integer():
                raise ParseError("non-integer exponent", epos)
            if exp < 0:
                raise ParseError("negative exponent", epos)
            return Pow(base, int(exp)) if int(exp) > 1 else s_pow(base, int(exp))
        return base

    def atom(self) -> Expression:
        kind, text, pos = self.advance()
        if kind == "num":
            return Const(float(text))
        if kind == "var":
            index = int(text[1:])
            if not 1 <= index <= self.n:
                raise ParseError(
                    f"variable index out of range: {text} with dimension {self.n}", pos
                )
            return Var(index)
        if kind == "op" and text == "(":
            e = self.expr()
            kind, text, pos = self.advance()
            if not (kind == "op" and text == ")"):
                raise ParseError("expected ')'", pos)
            return e
        raise ParseError(f"expected number, variable or '(', got {text!r}", pos)


def _const_fold(e: Expression) -> float | None:
    """Value of a constant subtree, or None if it contains a variable."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return None
    if isinstance(e, Neg):
        v = _const_fold(e.arg)
        return None if v is None else -v
    if isinstance(e, Sum):
        a, b = _const_fold(e.left), _const_fold(e.right)
        return None if a is None or b is None else a + b
    if isinstance(e, Prod):
        a, b = _const_fold(e.left), _const_fold(e.right)
        return None if a is None or b is None else a * b
    if isinstance(e, Pow):
        v = _const_fold(e.base)
        return None if v is None else v**e.exponent
    raise TypeError(f"not an expression: {e!r}")


def parse(text: str, n: int) -> Expression:
    """Parse expression text over variables ``x1..xn``.

    Raises ParseError (with byte offset) on syntax errors, out-of-range
    variable indices, and non-integer or negative exponents.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return _Parser(text, n).parse()


# -- evaluation / differentiation / printing --

def evaluate(e: Expression, x: Sequence[float]) -> float:
    """Evaluate the AST at a point (1-based variables index into x)."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(x[e.index - 1])
    if isinstance(e, Neg):
        return -evaluate(e.arg, x)
    if isinstance(e, Sum):
        return evaluate(e.left, x) + evaluate(e.right, x)
    if isinstance(e, Prod):
        return evaluate(e.left, x) * evaluate(e.right, x)
    if isinstance(e, Pow):
        return evaluate(e.base, x) ** e.exponent
    raise TypeError(f"not an expression: {e!r}")


def differentiate(e: Expression, i: int) -> Expression:
    """Symbolic partial derivative with respect to variable ``i`` (1-based)."""
    if i < 1:
        raise ValueError(f"variable index must be >= 1, got {i}")
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0) if e.index == i else Const(0.0)
    if isinstance(e, Neg):
        return s_neg(differentiate(e.arg, i))
    if isinstance(e, Sum):
        return s_sum(differentiate(e.left, i), differentiate(e.right, i))
    if isinstance(e, Prod):
        return s_sum(
            s_prod(differentiate(e.left, i), e.right),
            s_prod(e.left, differentiate(e.right, i)),
        )
    if isinstance(e, Pow):
        inner = differentiate(e.base, i)
        return s_prod(s_prod(Const(float(e.exponent)), s_pow(e.base, e.exponent - 1)), inner)
    raise TypeError(f"not an expression: {e!r}")


def _precedence(e: Expression) -> int:
    if isinstance(e, Sum):
        return 1
    if isinstance(e, Prod):
        return 2
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def to_text(e: Expression) -> str:
    """Render an AST back into the expression grammar."""
    if isinstance(e, Const):
        return repr(e.value) if e.value >= 0 else f"({e.value!r})"
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        if _precedence(e.arg) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Sum):
        return f"{to_text(e.left)} + {_wrap(e.right, 2)}" if not isinstance(
            e.right, Neg
        ) else f"{to_text(e.left)} - {_wrap(e.right.arg, 2)}"
    if isinstance(e, Prod):
        return f"{_wrap(e.left, 2)} * {_wrap(e.right, 3)}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, 5)}^{e.exponent}"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e: Expression, minimum: int) -> str:
    text = to_text(e)
    return f"({text})" if _precedence(e) < minimum else text


# -- code generation (AST walking is too slow for solver inner loops) --

def _to_source(e: Expression) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return f"x[{e.index - 1}]"
    if isinstance(e, Neg):
        return f"(-{_to_source(e.arg)})"
    if isinstance(e, Sum):
        return f"({_to_source(e.left)} + {_to_source(e.right)})"
    if isinstance(e, Prod):
        return f"({_to_source(e.left)} * {_to_source(e.right)})"
    if isinstance(e, Pow):
        return f"({_to_source(e.base)} ** {e.exponent})"
    raise TypeError(f"not an expression: {e!r}")


def _compile_tuple(exprs: Sequence[Expression]) -> Callable:
    body = ", ".join(_to_source(e) for e in exprs)
    namespace: dict = {}
    exec(f"def _fn(x):\n    return ({body},)", namespace)
    return namespace["_fn"]


# -- vector fields --

class VectorField:
    """A map F : R^n -> R^n with an evaluable Jacobian."""

    n: int

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian_at(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_expressions(self) -> list[Expression]:
        raise NotImplementedError


class PolynomialField(VectorField):
    """Field whose n components are polynomial expressions over x1..xn.

    Immutable after construction; the compiled evaluators are caches and
    are rebuilt on demand (they are dropped when pickling).
    """

    def __init__(self, exprs: Sequence[Expression], n: int):
        exprs = tuple(exprs)
        if len(exprs) != n:
            raise ValueError(f"expected {n} expressions, got {len(exprs)}")
        for e in exprs:
            _check_indices(e, n)
        self.n = n
        self.exprs = exprs
        self._fn = None
        self._jac_fn = None
        self._jac_exprs = None

    def __call__(self, x):
        if self._fn is None:
            self._fn = _compile_tuple(self.exprs)
        return np.array(self._fn(x))

    def jacobian_exprs(self) -> tuple:
        if self._jac_exprs is None:
            self._jac_exprs = tuple(
                tuple(differentiate(e, j + 1) for j in range(self.n)) for e in self.exprs
            )
        return self._jac_exprs

    def jacobian_at(self, x):
        if self._jac_fn is None:
            flat = [d for row in self.jacobian_exprs() for d in row]
            self._jac_fn = _compile_tuple(flat)
        return np.array(self._jac_fn(x)).reshape(self.n, self.n)

    def to_expressions(self):
        return list(self.exprs)

    def __getstate__(self):
        return {"n": self.n, "exprs": self.exprs}

    def __setstate__(self, state):
        self.n = state["n"]
        self.exprs = state["exprs"]
        self._fn = None
        self._jac_fn = None
        self._jac_exprs = None

    def __repr__(self):
        return f"PolynomialField({[to_text(e) for e in self.exprs]})"


class AffineField(VectorField):
    """x |-> M x + q."""

    def __init__(self, M, q):
        M = np.array(M, dtype=float)
        q = np.array(q, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"M must be square, got shape {M.shape}")
        if q.shape != (M.shape[0],):
            raise ValueError(f"q must have shape ({M.shape[0]},), got {q.shape}")
        M.flags.writeable = False
        q.flags.writeable = False
        self.n = M.shape[0]
        self.M = M
        self.q = q

    def __call__(self, x):
        return self.M @ x + self.q

    def jacobian_at(self, x):
        return self.M

    def to_expressions(self):
        out = []
        for i in range(self.n):
            e: Expression = Const(float(self.q[i]))
            for j in range(self.n):
                e = s_sum(e, s_prod(Const(float(self.M[i, j])), Var(j + 1)))
            out.append(e)
        return out

    def __repr__(self):
        return f"AffineField(n={self.n})"


def _check_indices(e: Expression, n: int) -> None:
    if isinstance(e, Var):
        if not 1 <= e.index <= n:
            raise ValueError(f"variable index {e.index} out of range for dimension {n}")
    elif isinstance(e, Neg):
        _check_indices(e.arg, n)
    elif isinstance(e, (Sum, Prod)):
        _check_indices(e.left, n)
        _check_indices(e.right, n)
    elif isinstance(e, Pow):
        if e.exponent < 0:
            raise ValueError(f"negative exponent {e.exponent}")
        _check_indices(e.base, n)


def jacobian(f: VectorField, x: Sequence[float]) -> np.ndarray:
    """Jacobian matrix of the field at x; entry (i, j) = d f_i / d x_j."""
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise ValueError(f"point has shape {x.shape}, field dimension is {f.n}")
    return f.jacobian_at(x)


def to_monomials(e: Expression, n: int) -> dict:
    """Expand into {exponent tuple: coefficient}; exact for our node set."""
    zero = (0,) * n
    if isinstance(e, Const):
        return {zero: e.value} if e.value != 0.0 else {}
    if isinstance(e, Var):
        key = tuple(1 if j == e.index - 1 else 0 for j in range(n))
        return {key: 1.0}
    if isinstance(e, Neg):
        return {k: -v for k, v in to_monomials(e.arg, n).items()}
    if isinstance(e, Sum):
        out = dict(to_monomials(e.left, n))
        for k, v in to_monomials(e.right, n).items():
            out[k] = out.get(k, 0.0) + v
        return {k: v for k, v in out.items() if v != 0.0}
    if isinstance(e, Prod):
        left = to_monomials(e.left, n)
        right = to_monomials(e.right, n)
        out: dict = {}
        for ka, va in left.items():
            for kb, vb in right.items():
                key = tuple(a + b for a, b in zip(ka, kb))
                out[key] = out.get(key, 0.0) + va * vb
        return {k: v for k, v in out.items() if v != 0.0}
    if isinstance(e, Pow):
        out = {zero: 1.0}
        base = to_monomials(e.base, n)
        for _ in range(e.exponent):
            nxt: dict = {}
            for ka, va in out.items():
                for kb, vb in base.items():
                    key = tuple(a + b for a, b in zip(ka, kb))
                    nxt[key] = nxt.get(key, 0.0) + va * vb
            out = nxt
        return {k: v for k, v in out.items() if v != 0.0}
    raise TypeError(f"not an expression: {e!r}")


def from_monomials(monomials: dict, n: int) -> Expression:
    """Build a sum-of-monomials AST, terms ordered by exponent tuple."""
    expr: Expression = Const(0.0)
    for key in sorted(monomials):
        coef = monomials[key]
        if coef == 0.0:
            continue
        term: Expression = Const(float(coef))
        for j, exponent in enumerate(key):
            if exponent > 0:
                term = s_prod(term, s_pow(Var(j + 1), exponent))
        expr = s_sum(expr, term)
    return expr


def combine_fields(fields: Sequence[VectorField], weights: Sequence[float]) -> VectorField:
    """Weighted sum of fields.

    Affine inputs combine matrices and offsets directly; polynomial
    combinations merge at the monomial level so that coefficients which
    cancel exactly disappear from the result (a sum-of-products tree
    would instead leak their cancellation error at large arguments).
    """
    if len(fields) != len(weights):
        raise ValueError(f"{len(fields)} fields but {len(weights)} weights")
    n = fields[0].n
    for f in fields:
        if f.n != n:
            raise ValueError("fields have mismatched dimensions")
    if all(isinstance(f, AffineField) for f in fields):
        M = sum(w * f.M for f, w in zip(fields, weights))
        q = sum(w * f.q for f, w in zip(fields, weights))
        return AffineField(M, q)
    combined = []
    for i in range(n):
        monomials: dict = {}
        for f, w in zip(fields, weights):
            if w == 0.0:
                continue
            for key, coef in to_monomials(f.to_expressions()[i], n).items():
                monomials[key] = monomials.get(key, 0.0) + w * coef
        combined.append(from_monomials(monomials, n))
    return PolynomialField(combined, n)
