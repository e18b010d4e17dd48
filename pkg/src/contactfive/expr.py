"""Small arithmetic expression language for coefficient fields.

Expressions are written over the variables x1, y1, x2, y2, t with the
operators + - * / ^ and the functions sin, cos, exp.  Input is validated
against a whitelist before being handed to sympy, which supplies exact
first and second derivatives via lambdify.
"""
from __future__ import annotations

import ast

import sympy as sp

VAR_NAMES = ("x1", "y1", "x2", "y2", "t")
SYMBOLS = sp.symbols(VAR_NAMES)
_FUNCS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp}

_ALLOWED_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow,
                ast.USub, ast.UAdd)


class ExpressionError(ValueError):
    pass


def _validate(node: ast.AST) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _ALLOWED_OPS):
            raise ExpressionError(f"operator not allowed: {ast.dump(node.op)}")
        _validate(node.left)
        _validate(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _ALLOWED_OPS):
            raise ExpressionError(f"operator not allowed: {ast.dump(node.op)}")
        _validate(node.operand)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ExpressionError("only sin, cos, exp calls are allowed")
        if node.keywords or len(node.args) != 1:
            raise ExpressionError("functions take exactly one argument")
        _validate(node.args[0])
    elif isinstance(node, ast.Name):
        if node.id not in VAR_NAMES:
            raise ExpressionError(f"unknown variable: {node.id}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError(f"non-numeric constant: {node.value!r}")
    else:
        raise ExpressionError(f"syntax not allowed: {type(node).__name__}")


def parse(text: str) -> sp.Expr:
    """Parse an expression string into a sympy expression."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression")
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from exc
    _validate(tree)
    env = dict(zip(VAR_NAMES, SYMBOLS))
    env.update(_FUNCS)
    return sp.sympify(source, locals=env)


def lambdify_with_derivatives(e: sp.Expr):
    """Vectorized callables for e, its gradient and its Hessian.

    Returns (f, grads, hessians) where grads is a list of 5 callables and
    hessians the upper-triangle list [(i, j, callable)] with i <= j.
    """
    f = sp.lambdify(SYMBOLS, e, modules="numpy")
    grads = [sp.lambdify(SYMBOLS, sp.diff(e, s), modules="numpy")
             for s in SYMBOLS]
    hessians = []
    for i in range(5):
        for j in range(i, 5):
            d2 = sp.diff(e, SYMBOLS[i], SYMBOLS[j])
            hessians.append((i, j, sp.lambdify(SYMBOLS, d2, modules="numpy")))
    return f, grads, hessians
