"""Basis-function dictionaries for expanding drift and diffusion fields.

A dictionary is an ordered list of named scalar functions R^n -> R.  The
ordering is stable so that coefficient index k always refers to the same
entry, and polynomial dictionaries use graded-lexicographic monomial order
(1, x1, ..., xn, x1^2, x1*x2, ...).
"""

from __future__ import annotations

import ast
import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dictionary",
    "polynomial_dictionary",
    "custom_dictionary",
    "evaluate_design_matrix",
    "load_dictionary_file",
]


@dataclass(frozen=True)
class Dictionary:
    """Ordered collection of named scalar basis functions on R^n."""

    names: tuple
    functions: tuple = field(repr=False)
    n: int = 1

    def __post_init__(self):
        if len(self.names) != len(self.functions):
            raise ValueError("names and functions must have equal length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("basis entry names must be unique")

    @property
    def K(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)


def _monomial_name(exponents, n):
    if all(e == 0 for e in exponents):
        return "1"
    parts = []
    for i, e in enumerate(exponents):
        if e == 0:
            continue
        var = "x" if n == 1 else f"x{i + 1}"
        parts.append(var if e == 1 else f"{var}^{e}")
    return "*".join(parts)


def _monomial_fn(exponents):
    exps = np.asarray(exponents, dtype=float)

    def fn(points, _e=exps):
        return np.prod(points ** _e, axis=1)

    return fn


def polynomial_dictionary(n: int, degree: int) -> Dictionary:
    """All monomials of total degree <= degree, in graded-lex order.

    K = C(n + degree, degree).
    """
    if n < 1 or degree < 0:
        raise ValueError("need n >= 1 and degree >= 0")
    names, fns = [], []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            exponents = [0] * n
            for i in combo:
                exponents[i] += 1
            names.append(_monomial_name(exponents, n))
            fns.append(_monomial_fn(exponents))
    return Dictionary(tuple(names), tuple(fns), n)


class ExpressionError(ValueError):
    """Raised when a basis expression fails to parse or validate."""


_ALLOWED_CALLS = {"sin": np.sin, "cos": np.cos, "tanh": np.tanh, "exp": np.exp}
_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)


def _validate_node(node, variables, expr):
    if isinstance(node, ast.Expression):
        _validate_node(node.body, variables, expr)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _ALLOWED_BINOPS):
            raise ExpressionError(f"operator not allowed in {expr!r}")
        _validate_node(node.left, variables, expr)
        _validate_node(node.right, variables, expr)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _ALLOWED_UNARY):
            raise ExpressionError(f"operator not allowed in {expr!r}")
        _validate_node(node.operand, variables, expr)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
            raise ExpressionError(f"only sin, cos, tanh, exp calls allowed in {expr!r}")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"functions take exactly one argument in {expr!r}")
        _validate_node(node.args[0], variables, expr)
    elif isinstance(node, ast.Name):
        if node.id not in variables:
            raise ExpressionError(
                f"unknown symbol {node.id!r} in {expr!r} (col {node.col_offset + 1})"
            )
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError(f"only numeric literals allowed in {expr!r}")
    else:
        raise ExpressionError(f"syntax not allowed in {expr!r}")


def _compile_expression(expr: str, n: int):
    """Compile one expression over x1..xn into a vectorized function."""
    source = expr.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as err:
        raise ExpressionError(
            f"cannot parse {expr!r} at position {err.offset}: {err.msg}"
        ) from None
    variables = {f"x{i + 1}" for i in range(n)}
    if n == 1:
        variables.add("x")
    _validate_node(tree, variables, expr)
    code = compile(tree, "<basis>", "eval")

    def fn(points, _code=code, _n=n):
        env = {f"x{i + 1}": points[:, i] for i in range(_n)}
        if _n == 1:
            env["x"] = points[:, 0]
        env.update(_ALLOWED_CALLS)
        with np.errstate(all="ignore"):
            value = eval(_code, {"__builtins__": {}}, env)
        return np.broadcast_to(np.asarray(value, dtype=float), (points.shape[0],))

    return fn


def custom_dictionary(expressions, n: int) -> Dictionary:
    """Build a dictionary from expression strings over x1..xn.

    Grammar: +, -, *, /, ^, sin, cos, tanh, exp, numeric literals and the
    variables x1..xn (plain ``x`` is accepted when n = 1).
    """
    names = tuple(str(e).strip() for e in expressions)
    fns = tuple(_compile_expression(name, n) for name in names)
    return Dictionary(names, fns, n)


def load_dictionary_file(path, n: int) -> Dictionary:
    """Read a dictionary spec file: one expression per line, '#' comments."""
    expressions = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                expressions.append(line)
    if not expressions:
        raise ExpressionError(f"no basis expressions found in {path}")
    return custom_dictionary(expressions, n)


def evaluate_design_matrix(dictionary: Dictionary, points) -> np.ndarray:
    """Evaluate every basis entry at every point: entry (j, k) = psi_k(points[j])."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != dictionary.n:
        raise ValueError(
            f"points have dimension {points.shape[1]}, dictionary expects {dictionary.n}"
        )
    out = np.empty((points.shape[0], dictionary.K))
    for k, (name, fn) in enumerate(zip(dictionary.names, dictionary.functions)):
        col = fn(points)
        bad = ~np.isfinite(col)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise FloatingPointError(
                f"basis entry {name!r} evaluated non-finite at row {row}"
            )
        out[:, k] = col
    return out
