import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftlab import expr_dsl as E
from liftlab.errors import DomainError, ParseError
from liftlab.expr_dsl import Binary, Const, Unary, Var


def test_parse_eval_polynomial():
    ast = E.parse("x1^2 + x2^2", 2)
    assert E.evaluate(ast, [3.0, 4.0]) == 25.0


def test_parse_eval_trig():
    ast = E.parse("sin(x1)*cos(x1)", 1)
    assert E.evaluate(ast, [0.0]) == 0.0


def test_parse_eval_reciprocal():
    ast = E.parse("1/x2^2", 2)
    assert E.evaluate(ast, [0.0, 2.0]) == 0.25


@pytest.mark.parametrize(
    "source,point,expected",
    [
        ("-x1^2", [2.0], -4.0),        # unary minus binds looser than ^
        ("2^-2", [0.0], 0.25),          # exponent may carry a sign
        ("x1^2^3", [2.0], 256.0),       # ^ is right-associative
        ("2*x1 + 3/x1", [1.0], 5.0),
        ("(x1 + 1)^2", [2.0], 9.0),
        ("1.5e2 + x1", [0.5], 150.5),
        ("sinh(x1) - cosh(x1)", [0.0], -1.0),
        ("sqrt(x1^2)", [3.0], 3.0),
        ("atan(x1)", [1.0], math.pi / 4),
    ],
)
def test_grammar_cases(source, point, expected):
    assert E.evaluate(E.parse(source, 1), point) == pytest.approx(expected, abs=1e-14)


def test_derivative_first_order():
    assert E.derivative(E.parse("x1^2", 1), [3.0], 1, 0) == 6.0


def test_derivative_second_order():
    assert E.derivative(E.parse("sin(x1)", 1), [0.0], 2, (0, 0)) == 0.0


def test_derivative_reciprocal_hand_value():
    # d/dx2 of x2^{-2} is -2 x2^{-3}; at x2 = 1 that is -2
    ast = E.parse("1/x2^2", 2)
    assert E.derivative(ast, [0.7, 1.0], 1, 1) == pytest.approx(-2.0, abs=1e-14)


def test_mixed_second_derivative():
    ast = E.parse("x1^2 * x2^3", 2)
    # d2/dx1 dx2 = 6 x1 x2^2
    assert E.derivative(ast, [2.0, 3.0], 2, (0, 1)) == pytest.approx(108.0)
    assert E.derivative(ast, [2.0, 3.0], 2, (1, 0)) == pytest.approx(108.0)


# -- errors -----------------------------------------------------------------


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as err:
        E.parse("x1 + * 2", 1)
    assert err.value.position == 5


def test_unknown_identifier():
    with pytest.raises(ParseError, match="unknown identifier"):
        E.parse("x1 + foo", 1)


def test_unknown_function():
    with pytest.raises(ParseError, match="unknown function"):
        E.parse("frob(x1)", 1)


def test_variable_out_of_range():
    with pytest.raises(ParseError, match="out of range"):
        E.parse("x3", 2)


def test_empty_source_rejected():
    with pytest.raises(ParseError):
        E.parse("   ", 2)


def test_trailing_input_rejected():
    with pytest.raises(ParseError):
        E.parse("x1 x1", 1)


def test_division_by_zero_reports_node():
    with pytest.raises(DomainError, match=r"division by zero in '1\.0 / x1'"):
        E.evaluate(E.parse("1/x1", 1), [0.0])


def test_log_domain_error():
    with pytest.raises(DomainError):
        E.evaluate(E.parse("log(x1)", 1), [-1.0])


def test_fractional_power_of_negative_base_is_domain_error():
    with pytest.raises(DomainError):
        E.evaluate(E.parse("x1^0.5", 1), [-2.0])


def test_integer_power_of_negative_base_is_fine():
    assert E.evaluate(E.parse("x1^3", 1), [-2.0]) == -8.0


def test_wrong_point_length():
    with pytest.raises(DomainError):
        E.evaluate(E.parse("x1", 2), [1.0])


# -- round trip: parse . to_text . parse is the identity ---------------------


def _random_node(rnd, dim, depth):
    # stays inside the parser's image: literals are non-negative (a leading
    # minus always parses to Unary neg)
    if depth == 0 or rnd.random() < 0.3:
        if rnd.random() < 0.5:
            return Const(round(rnd.uniform(0, 3), 3))
        return Var(rnd.randrange(dim))
    roll = rnd.random()
    if roll < 0.2:
        return Unary("neg", _random_node(rnd, dim, depth - 1))
    if roll < 0.4:
        fn = rnd.choice(["sin", "cos", "exp", "sinh", "cosh", "atan"])
        return Unary(fn, _random_node(rnd, dim, depth - 1))
    op = rnd.choice(["+", "-", "*", "/", "^"])
    left = _random_node(rnd, dim, depth - 1)
    right = _random_node(rnd, dim, depth - 1)
    if op == "^":  # keep exponents simple and total
        right = Const(float(rnd.randrange(0, 4)))
    return Binary(op, left, right)


def test_roundtrip_random_trees():
    rnd = random.Random(7)
    for _ in range(300):
        ast = E.ExprAst(_random_node(rnd, 3, 4), 3)
        again = E.parse(E.to_text(ast), 3)
        assert again == ast, E.to_text(ast)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["x1", "x1 + x2", "sin(x1)*x2^2", "1/(1 + x1^2)", "-x1 - -x2"]))
def test_roundtrip_source_fixpoint(source):
    first = E.parse(source, 2)
    second = E.parse(E.to_text(first), 2)
    assert first == second


# -- invariants: dual derivative vs central finite differences ---------------


def _random_polynomial(rnd, dim):
    terms = []
    for _ in range(rnd.randrange(1, 5)):
        coeff = Const(round(rnd.uniform(-3, 3), 4))
        term = coeff
        for _ in range(rnd.randrange(0, 3)):
            term = Binary("*", term, Var(rnd.randrange(dim)))
        if rnd.random() < 0.4:
            term = Binary("^", term, Const(float(rnd.randrange(1, 3))))
        terms.append(term)
    node = terms[0]
    for t in terms[1:]:
        node = Binary(rnd.choice(["+", "-"]), node, t)
    return E.ExprAst(node, dim)


def test_derivative_matches_finite_differences_on_random_polynomials():
    rnd = random.Random(123)
    h = 1e-5
    for _ in range(1000):
        dim = rnd.choice([1, 2, 3])
        ast = _random_polynomial(rnd, dim)
        point = [rnd.uniform(0.5, 1.5) for _ in range(dim)]
        k = rnd.randrange(dim)
        exact = E.derivative(ast, point, 1, k)
        plus = list(point)
        minus = list(point)
        plus[k] += h
        minus[k] -= h
        fd = (E.evaluate(ast, plus) - E.evaluate(ast, minus)) / (2 * h)
        assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact))


def test_derivative_linearity():
    rnd = random.Random(9)
    for _ in range(100):
        f = _random_polynomial(rnd, 2)
        g = _random_polynomial(rnd, 2)
        fg = E.ExprAst(Binary("+", f.root, g.root), 2)
        point = [rnd.uniform(-1.5, 1.5) for _ in range(2)]
        k = rnd.randrange(2)
        lhs = E.derivative(fg, point, 1, k)
        rhs = E.derivative(f, point, 1, k) + E.derivative(g, point, 1, k)
        assert lhs == pytest.approx(rhs, abs=1e-12, rel=1e-12)


def test_evaluation_is_pure():
    ast = E.parse("sin(x1) + x1^2", 1)
    before = E.to_text(ast)
    for x in np.linspace(-2, 2, 7):
        E.evaluate(ast, [float(x)])
        E.derivative(ast, [float(x)], 1, 0)
        E.derivative(ast, [float(x)], 2, (0, 0))
    assert E.to_text(ast) == before
