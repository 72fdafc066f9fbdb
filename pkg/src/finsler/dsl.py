"""A small expression language for metric functions and conformal factors.

Expressions are built from real literals, the coordinate names ``x1..xn`` and
``y1..yn``, the operators ``+ - * / ^`` (with ``^`` right-associative and
requiring a constant exponent), parentheses, and the functions ``sqrt``,
``exp``, ``log``, ``sin``, ``cos``, ``abs``.  Multiplication is always
explicit: ``2*x1``, never ``2x1``.

Parsed expressions compile to closures over jet variables, so the same source
string powers both plain evaluation (order-0 jets) and deep Taylor expansion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ParseError, ValidationError
from .jets import JetTensor

_FUNCTIONS = {
    "sqrt": lambda j: j.sqrt(),
    "exp": lambda j: j.exp(),
    "log": lambda j: j.log(),
    "sin": lambda j: j.sin(),
    "cos": lambda j: j.cos(),
    "abs": lambda j: j.absolute() if isinstance(j, JetTensor) else abs(j),
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\^|\+|-|\*|/|\(|\)))"
)

_VAR_RE = re.compile(r"^([xy])([1-9][0-9]*)$")


@dataclass(frozen=True)
class Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            if source[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {source[pos]!r} at position {pos}")
        if m.lastgroup == "num":
            tokens.append(Token("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(Token("name", m.group("name"), m.start("name")))
        else:
            tokens.append(Token("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


# AST nodes are plain tuples:
#   ("num", value) | ("var", kind, index) | ("neg", node)
#   ("bin", op, left, right) | ("call", fname, node)


class _Parser:
    _BINARY_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
    _UNARY_PREC = 25

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, text: str) -> None:
        tok = self.advance()
        if tok.kind != "op" or tok.text != text:
            raise ParseError(f"expected {text!r} at position {tok.pos}, got {tok.text!r}")

    def parse(self):
        node = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r} at position {tok.pos}")
        return node

    def expression(self, min_prec: int):
        node = self.prefix()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in self._BINARY_PREC:
                return node
            prec = self._BINARY_PREC[tok.text]
            if prec < min_prec:
                return node
            self.advance()
            # right-associative exponent, left-associative everything else
            rhs = self.expression(prec if tok.text == "^" else prec + 1)
            if tok.text == "^" and _collect_vars(rhs):
                raise ParseError(
                    f"exponent at position {tok.pos} must be constant")
            node = ("bin", tok.text, node, rhs)

    def prefix(self):
        tok = self.advance()
        if tok.kind == "num":
            return ("num", float(tok.text))
        if tok.kind == "op" and tok.text == "-":
            return ("neg", self.expression(self._UNARY_PREC))
        if tok.kind == "op" and tok.text == "+":
            return self.expression(self._UNARY_PREC)
        if tok.kind == "op" and tok.text == "(":
            node = self.expression(0)
            self.expect_op(")")
            return node
        if tok.kind == "name":
            if tok.text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expression(0)
                self.expect_op(")")
                return ("call", tok.text, arg)
            m = _VAR_RE.match(tok.text)
            if m:
                return ("var", m.group(1), int(m.group(2)))
            raise ParseError(f"unknown name {tok.text!r} at position {tok.pos}")
        raise ParseError(f"unexpected token {tok.text!r} at position {tok.pos}")


class Expression:
    """A parsed expression, bindable to any dimension that covers its variables."""

    def __init__(self, source: str):
        self.source = source
        self.root = _Parser(tokenize(source)).parse()
        self.variables = _collect_vars(self.root)

    def max_index(self, kind: str) -> int:
        return max((idx for k, idx in self.variables if k == kind), default=0)

    def validate(self, n: int, allow_y: bool = True) -> None:
        for kind, idx in sorted(self.variables):
            if idx > n:
                raise ValidationError(
                    f"variable {kind}{idx} exceeds dimension n={n} in {self.source!r}")
            if kind == "y" and not allow_y:
                raise ValidationError(
                    f"variable y{idx} not allowed here (function of x only): {self.source!r}")

    def bind(self, n: int, allow_y: bool = True) -> Callable[[Sequence[JetTensor]], JetTensor]:
        """Compile to a closure over the 2n coordinate jets (x-block first)."""
        self.validate(n, allow_y)
        root = self.root

        def field(jet_vars: Sequence[JetTensor]) -> JetTensor:
            out = _eval_node(root, jet_vars, n)
            if not isinstance(out, JetTensor):
                out = jet_vars[0] * 0.0 + out
            return out

        return field

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"


def _collect_vars(node) -> frozenset[tuple[str, int]]:
    tag = node[0]
    if tag == "num":
        return frozenset()
    if tag == "var":
        return frozenset({(node[1], node[2])})
    if tag == "neg":
        return _collect_vars(node[1])
    if tag == "call":
        return _collect_vars(node[2])
    return _collect_vars(node[2]) | _collect_vars(node[3])


def _eval_node(node, jet_vars: Sequence[JetTensor], n: int):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        offset = 0 if node[1] == "x" else n
        return jet_vars[offset + node[2] - 1]
    if tag == "neg":
        return -_eval_node(node[1], jet_vars, n)
    if tag == "call":
        return _FUNCTIONS[node[1]](_eval_node(node[2], jet_vars, n))
    op, left, right = node[1], node[2], node[3]
    lv = _eval_node(left, jet_vars, n)
    rv = _eval_node(right, jet_vars, n)
    if op == "+":
        return lv + rv
    if op == "-":
        return lv - rv
    if op == "*":
        return lv * rv
    if op == "/":
        return lv / rv
    if isinstance(rv, JetTensor):
        raise ValidationError("exponents must be constant expressions")
    return lv ** rv


def parse_expression(source: str) -> Expression:
    if not isinstance(source, str) or not source.strip():
        raise ParseError("empty expression")
    return Expression(source)
