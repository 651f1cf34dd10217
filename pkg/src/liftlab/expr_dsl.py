"""Closed-form scalar expressions of chart variables.

Metric components and vector-field components enter the engine as text in
this little language: variables ``x1 .. xn``, literals, ``+ - * / ^``,
parentheses, and calls of ``sin cos tan atan exp log sinh cosh sqrt``.
Precedence is ``^`` over unary minus over ``* /`` over ``+ -``; ``^`` is
right-associative.

Derivatives are exact: first order by dual-number evaluation, second order
by nested duals.  Finite differences appear nowhere in this module; they
live in the independent oracles that audit it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from . import dualnum
from .dualnum import Dual
from .errors import DomainError, ParseError

FUNCTIONS = {
    "sin": dualnum.sin,
    "cos": dualnum.cos,
    "tan": dualnum.tan,
    "atan": dualnum.atan,
    "exp": dualnum.exp,
    "log": dualnum.log,
    "sinh": dualnum.sinh,
    "cosh": dualnum.cosh,
    "sqrt": dualnum.sqrt,
}

BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 0-based


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Unary, Binary]


@dataclass(frozen=True)
class ExprAst:
    """Parsed expression plus the chart dimension it was declared against."""

    root: Node
    dim: int

    def __str__(self):
        return to_text(self)


# ---------------------------------------------------------------------------
# tokenizer


@dataclass
class _Token:
    kind: str  # number | name | op | lparen | rparen | end
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^":
            tokens.append(_Token("op", c, i))
            i += 1
        elif c == "(":
            tokens.append(_Token("lparen", c, i))
            i += 1
        elif c == ")":
            tokens.append(_Token("rparen", c, i))
            i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            # optional exponent: 1e-3, 2.5E+4
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    while k < n and source[k].isdigit():
                        k += 1
                    j = k
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"malformed number {text!r}", i) from None
            tokens.append(_Token("number", text, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("name", source[i:j], i))
            i = j
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# recursive-descent parser


class _Parser:
    def __init__(self, tokens: list[_Token], dim: int):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text or 'end of input'!r}", tok.pos)
        return tok

    def parse_expression(self) -> Node:
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            node = Binary(op, node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            node = Binary(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            return Unary("neg", self.parse_factor())
        if tok.kind == "op" and tok.text == "+":
            self.next()
            return self.parse_factor()
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.next()
            # right-associative; exponent may carry a unary minus: x^-2
            return Binary("^", base, self.parse_factor())
        return base

    def parse_atom(self) -> Node:
        tok = self.next()
        if tok.kind == "number":
            return Const(float(tok.text))
        if tok.kind == "lparen":
            node = self.parse_expression()
            self.expect("rparen")
            return node
        if tok.kind == "name":
            if self.peek().kind == "lparen":
                if tok.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok.text!r}", tok.pos)
                self.next()
                arg = self.parse_expression()
                self.expect("rparen")
                return Unary(tok.text, arg)
            return self._variable(tok)
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)

    def _variable(self, tok: _Token) -> Var:
        name = tok.text
        if not (name.startswith("x") and name[1:].isdigit()):
            raise ParseError(f"unknown identifier {name!r}", tok.pos)
        k = int(name[1:])
        if not 1 <= k <= self.dim:
            raise ParseError(
                f"variable {name!r} out of range for dimension {self.dim}", tok.pos
            )
        return Var(k - 1)


def parse(source: str, dim: int) -> ExprAst:
    """Parse `source` against a chart of dimension `dim` (variables x1..xdim)."""
    if dim < 1:
        raise ParseError(f"dimension must be positive, got {dim}")
    if not source or not source.strip():
        raise ParseError("empty expression")
    parser = _Parser(_tokenize(source), dim)
    root = parser.parse_expression()
    end = parser.next()
    if end.kind != "end":
        raise ParseError(f"trailing input {end.text!r}", end.pos)
    return ExprAst(root, dim)


# ---------------------------------------------------------------------------
# pretty printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _node_text(node: Node) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = _node_text(node.arg)
            if _prec(node.arg) < _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({_node_text(node.arg)})"
    left, right = _node_text(node.left), _node_text(node.right)
    p = _PREC[node.op]
    # parenthesize so reparsing restores the exact tree shape: the left
    # child of right-assoc '^' and the right child of the left-assoc
    # operators need parens even at equal precedence
    if _prec(node.left) < p or (node.op == "^" and _prec(node.left) == p):
        left = f"({left})"
    if _prec(node.right) < p or (node.op != "^" and _prec(node.right) == p):
        right = f"({right})"
    return f"{left} {node.op} {right}" if node.op != "^" else f"{left}^{right}"


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return _PREC["neg"]
    return 9


def to_text(ast: ExprAst) -> str:
    """Render the tree back to source; reparsing yields an identical tree."""
    return _node_text(ast.root)


# ---------------------------------------------------------------------------
# evaluation and exact differentiation


def _eval_node(node: Node, values):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return values[node.index]
    try:
        if isinstance(node, Unary):
            arg = _eval_node(node.arg, values)
            if node.op == "neg":
                return -arg
            return FUNCTIONS[node.op](arg)
        left = _eval_node(node.left, values)
        right = _eval_node(node.right, values)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if not isinstance(left, Dual) and not isinstance(right, Dual):
                if right == 0.0:
                    raise DomainError("division by zero")
                return left / right
            if not isinstance(left, Dual):
                left = Dual(left, 0.0)
            return left / right
        if node.op == "^":
            if isinstance(left, Dual):
                return left ** right
            if isinstance(right, Dual):
                return _scalar_pow_dual(left, right)
            return dualnum._pow_scalar(left, right)
        raise AssertionError(f"unhandled operator {node.op}")
    except DomainError as err:
        if not getattr(err, "_located", False):
            located = DomainError(f"{err} in '{_node_text(node)}'")
            located._located = True
            raise located from None
        raise


def _scalar_pow_dual(base: float, p: Dual):
    if base <= 0.0:
        raise DomainError(f"cannot raise nonpositive base {base!r} to a varying power")
    return dualnum.exp(p * math.log(base))


def evaluate(ast: ExprAst, point) -> float:
    """IEEE-double value of the expression at a chart point.

    Entries of `point` may be dual numbers; the result then carries the
    corresponding tangents.
    """
    if len(point) != ast.dim:
        raise DomainError(f"point has length {len(point)}, expected {ast.dim}")
    return _eval_node(ast.root, point)


def derivative(ast: ExprAst, point, order: int = 1, wrt=0):
    """Exact partial derivative at `point`.

    order 1: `wrt` is a variable index.  order 2: `wrt` is an index pair
    (i, j) and the mixed partial d2/dxi dxj is returned.  Implemented with
    dual numbers (nested for order 2), never finite differences.
    """
    if len(point) != ast.dim:
        raise DomainError(f"point has length {len(point)}, expected {ast.dim}")
    if order == 1:
        if not isinstance(wrt, int):
            raise ValueError("order-1 derivative takes a single variable index")
        if not 0 <= wrt < ast.dim:
            raise ValueError(f"variable index {wrt} out of range")
        # every entry is lifted to the new dual level (not only the seeded
        # one); mixing nesting depths silently corrupts nested derivatives
        seeded = [Dual(v, 1.0 if k == wrt else 0.0) for k, v in enumerate(point)]
        out = _eval_node(ast.root, seeded)
        return out.im if isinstance(out, Dual) else 0.0
    if order == 2:
        try:
            i, j = wrt
        except TypeError:
            raise ValueError("order-2 derivative takes an index pair") from None
        if not (0 <= i < ast.dim and 0 <= j < ast.dim):
            raise ValueError(f"index pair {wrt} out of range")
        seeded = [
            Dual(Dual(v, 1.0 if k == i else 0.0), Dual(1.0 if k == j else 0.0, 0.0))
            for k, v in enumerate(point)
        ]
        out = _eval_node(ast.root, seeded)
        if not isinstance(out, Dual):
            return 0.0
        inner = out.im
        return inner.im if isinstance(inner, Dual) else 0.0
    raise ValueError(f"derivative order must be 1 or 2, got {order}")


def gradient(ast: ExprAst, point) -> list:
    """All first partials at `point`; entries may be dual-valued if the
    point is."""
    return [derivative(ast, point, 1, k) for k in range(ast.dim)]
