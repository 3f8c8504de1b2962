"""Closed-form expressions in the variable ``x``.

Grammar: ``+ - * / ^``, ``exp log sin cos atan abs`` (and ``sqrt``, which
printing produces for half-integer powers), the constants ``pi``,
``E`` and the imaginary unit ``I``, numbers, and the variable ``x``.
"""
from tokenize import TokenError
from typing import Callable, Optional

import numpy as np
import sympy

from sympy.parsing.sympy_parser import (
    parse_expr,
    standard_transformations,
    convert_xor
)

from vlex_multipliers.errors import SpecParseError

X = sympy.Symbol("x", real=True)

ALLOWED_NAMES = {
    "x": X,
    "exp": sympy.exp,
    "log": sympy.log,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "atan": sympy.atan,
    "abs": sympy.Abs,
    "sqrt": sympy.sqrt,
    "pi": sympy.pi,
    "E": sympy.E,
    "I": sympy.I,
}

FORBIDDEN_TOKENS = ("__", "lambda", ";", "=", "[", "{", ":", "'", '"')

TRANSFORMATIONS = standard_transformations + (convert_xor,)


def parse_expression(text: str) -> sympy.Expr:
    """Parses an expression string of the restricted grammar.

    :param text: expression such as ``"2/(1+x^2)"``
    :raises SpecParseError: on syntax errors or names outside the grammar
    :return: sympy expression whose only free symbol is ``X``
    """
    if not isinstance(text, str) or text.strip() == "":
        raise SpecParseError(f"Expression must be a non-empty string, got {text!r}")
    if any(token in text for token in FORBIDDEN_TOKENS):
        raise SpecParseError(f"Expression contains forbidden characters: {text!r}")

    global_dict = {
        "Integer": sympy.Integer,
        "Float": sympy.Float,
        "Rational": sympy.Rational,
        "Symbol": sympy.Symbol,
        "__builtins__": {},
    }
    try:
        expr = parse_expr(
            text,
            local_dict=dict(ALLOWED_NAMES),
            global_dict=global_dict,
            transformations=TRANSFORMATIONS
        )
        expr = sympy.sympify(expr)
    except (SyntaxError, TokenError, TypeError, NameError, ValueError,
            AttributeError, sympy.SympifyError) as e:
        raise SpecParseError(f"Cannot parse expression {text!r}: {e}") from e

    if not isinstance(expr, sympy.Expr):
        raise SpecParseError(f"Expression {text!r} is not arithmetic")
    unknown = expr.free_symbols - {X}
    if unknown:
        names = ", ".join(sorted(str(s) for s in unknown))
        raise SpecParseError(f"Unknown names in expression {text!r}: {names}")
    return expr


def compile_expression(
        expr: sympy.Expr,
        dtype=complex
    ) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized numpy evaluator of an expression in ``X``.

    Constants broadcast to the shape of the input. Floating point warnings
    are silenced; callers check finiteness themselves.
    """
    function = sympy.lambdify(X, expr, modules=["numpy"])

    def evaluate(x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            values = np.asarray(function(x))
        values = np.broadcast_to(values, x.shape)
        if dtype is float:
            if np.iscomplexobj(values):
                values = values.real
            return np.array(values, dtype=float)
        return np.array(values, dtype=complex)

    return evaluate


def finite_limit(expr: sympy.Expr, direction: int) -> Optional[complex]:
    """Limit of the expression at ``direction * oo`` if it exists and is
    finite, else None.
    """
    if expr.is_number:
        return complex(expr)
    point = sympy.oo if direction > 0 else -sympy.oo
    try:
        value = sympy.limit(expr, X, point)
    except (NotImplementedError, ValueError, TypeError, RecursionError):
        return None
    if not value.is_number or value.has(sympy.AccumBounds):
        return None
    if value.has(sympy.oo, -sympy.oo, sympy.zoo, sympy.nan):
        return None
    try:
        return complex(value)
    except TypeError:
        return None


def expression_text(expr: sympy.Expr) -> str:
    """Round-trippable text of an expression in the restricted grammar."""
    text = sympy.sstr(expr, full_prec=True)
    return text.replace("**", "^").replace("Abs(", "abs(")
