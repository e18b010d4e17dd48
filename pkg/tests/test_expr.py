import numpy as np
import pytest
import sympy as sp

from contactfive.expr import (ExpressionError, lambdify_with_derivatives,
                              parse)


def test_parse_basic():
    e = parse("x1^2 + sin(y2) - 3 * t")
    f = sp.lambdify(sp.symbols("x1 y1 x2 y2 t"), e, modules="numpy")
    assert f(2.0, 0.0, 0.0, 0.5, 1.0) == pytest.approx(
        4.0 + np.sin(0.5) - 3.0)


def test_parse_caret_is_power():
    e = parse("y1^3")
    assert sp.simplify(e - sp.Symbol("y1") ** 3) == 0


@pytest.mark.parametrize("bad", [
    "",
    "   ",
    "q + 1",
    "x1.real",
    "__import__('os')",
    "tan(x1)",
    "sin(x1, y1)",
    "x1 if y1 else t",
    "[1, 2]",
    "x1 @ y1",
    "'abc'",
    "lambda x: x",
    "x1 < y1",
])
def test_parse_rejects(bad):
    with pytest.raises(ExpressionError):
        parse(bad)


def test_derivatives_exact():
    f, grads, hessians = lambdify_with_derivatives(parse("x1^2 * y2 + t"))
    p = (1.5, 0.0, 0.0, -0.7, 2.0)
    assert f(*p) == pytest.approx(1.5 ** 2 * (-0.7) + 2.0)
    # gradient (2 x1 y2, 0, 0, x1^2, 1)
    g = [gr(*p) for gr in grads]
    assert g == pytest.approx([2 * 1.5 * (-0.7), 0.0, 0.0, 1.5 ** 2, 1.0])
    hess = {(i, j): fn(*p) for i, j, fn in hessians}
    assert hess[(0, 0)] == pytest.approx(2 * (-0.7))
    assert hess[(0, 3)] == pytest.approx(2 * 1.5)
    assert hess[(3, 3)] == pytest.approx(0.0)
    assert hess[(4, 4)] == pytest.approx(0.0)


def test_lambdify_vectorized():
    f, grads, _ = lambdify_with_derivatives(parse("sin(x1) * y2"))
    x = np.linspace(-1, 1, 11)
    z = np.zeros(11)
    assert np.allclose(f(x, z, z, x, z), np.sin(x) * x)
    assert np.allclose(grads[0](x, z, z, x, z), np.cos(x) * x)
