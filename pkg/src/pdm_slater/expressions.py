'''Arithmetic expressions for scalar fields.

Grammar (whitespace ignored)::

    expr    := expr ('+' | '-') expr | expr ('*' | '/') expr
             | expr ('^' | '**') expr | '-' expr | '(' expr ')'
             | number | identifier | function '(' expr ')'
    function := sin | cos | tan | exp | ln | sqrt | atan | sinh | cosh | tanh | abs

Precedence from tightest: ``^`` (right associative), unary ``-``, ``* /``, ``+ -``.
Coordinates are ``x1``..``x4`` with ``x``, ``y``, ``z``, ``w`` as aliases; any other
identifier is a named parameter bound at evaluation time.
'''
import logging
import math
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Sequence
import numpy as np
from .dual import Dual2, ELEMENTARY
from .exceptions import DimensionError, EvaluationError, ExpressionSyntaxError

logger = logging.getLogger(__name__)

FUNCTIONS = frozenset(ELEMENTARY)
COORDINATE_ALIASES = {"x": 1, "y": 2, "z": 3, "w": 4}
_COORDINATE_RE = re.compile(r"x([1-4])")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)

_BINDING_POWER = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_MINUS_POWER = 25


class EvalContext:
    def __init__(self, coords: Sequence[float], params: Mapping[str, float]) -> None:
        self.coords = coords
        self.params = params
        self.dim = len(coords)

    def coordinate(self, index: int) -> float:
        if index > self.dim:
            raise DimensionError(f"Coordinate x{index} used at a point with {self.dim} coordinates.")
        return self.coords[index - 1]


class Node:
    '''Base of the expression tree. Nodes are immutable and compare structurally.'''

    def to_dual(self, ctx: EvalContext) -> Dual2:
        raise NotImplementedError

    def to_float(self, ctx: EvalContext) -> float:
        raise NotImplementedError

    @property
    def parameters(self) -> FrozenSet[str]:
        return frozenset()

    @property
    def max_axis(self) -> int:
        return 0


@dataclass(frozen=True)
class Constant(Node):
    value: float

    def to_dual(self, ctx: EvalContext) -> Dual2:
        return Dual2.constant(self.value, ctx.dim)

    def to_float(self, ctx: EvalContext) -> float:
        return self.value

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Variable(Node):
    index: int

    def to_dual(self, ctx: EvalContext) -> Dual2:
        return Dual2.variable(ctx.coordinate(self.index), self.index - 1, ctx.dim)

    def to_float(self, ctx: EvalContext) -> float:
        return float(ctx.coordinate(self.index))

    @property
    def max_axis(self) -> int:
        return self.index

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Parameter(Node):
    name: str

    def _lookup(self, ctx: EvalContext) -> float:
        if self.name not in ctx.params:
            raise EvaluationError(f"Unbound parameter '{self.name}'", str(self))
        return float(ctx.params[self.name])

    def to_dual(self, ctx: EvalContext) -> Dual2:
        return Dual2.constant(self._lookup(ctx), ctx.dim)

    def to_float(self, ctx: EvalContext) -> float:
        return self._lookup(ctx)

    @property
    def parameters(self) -> FrozenSet[str]:
        return frozenset([self.name])

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Negate(Node):
    operand: Node

    def to_dual(self, ctx: EvalContext) -> Dual2:
        return -self.operand.to_dual(ctx)

    def to_float(self, ctx: EvalContext) -> float:
        return -self.operand.to_float(ctx)

    @property
    def parameters(self) -> FrozenSet[str]:
        return self.operand.parameters

    @property
    def max_axis(self) -> int:
        return self.operand.max_axis

    def __str__(self) -> str:
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node

    def _combine(self, a, b):
        try:
            if self.op == "+":
                r = a + b
            elif self.op == "-":
                r = a - b
            elif self.op == "*":
                r = a * b
            elif self.op == "/":
                if b == 0.0:
                    raise ZeroDivisionError("division by zero")
                r = a / b
            elif isinstance(a, Dual2):
                r = a ** b
            else:
                r = math.pow(a, b)
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise EvaluationError(str(e), str(self))
        return r

    def to_dual(self, ctx: EvalContext) -> Dual2:
        r = self._combine(self.left.to_dual(ctx), self.right.to_dual(ctx))
        if not (math.isfinite(r.v) and np.all(np.isfinite(r.g)) and np.all(np.isfinite(r.h))):
            raise EvaluationError("non-finite result", str(self))
        return r

    def to_float(self, ctx: EvalContext) -> float:
        r = self._combine(self.left.to_float(ctx), self.right.to_float(ctx))
        if not math.isfinite(r):
            raise EvaluationError("non-finite result", str(self))
        return r

    @property
    def parameters(self) -> FrozenSet[str]:
        return self.left.parameters | self.right.parameters

    @property
    def max_axis(self) -> int:
        return max(self.left.max_axis, self.right.max_axis)

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def to_dual(self, ctx: EvalContext) -> Dual2:
        a = self.arg.to_dual(ctx)
        try:
            r = a.apply(self.func)
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise EvaluationError(str(e), str(self))
        if not (math.isfinite(r.v) and np.all(np.isfinite(r.g)) and np.all(np.isfinite(r.h))):
            raise EvaluationError("non-finite result", str(self))
        return r

    def to_float(self, ctx: EvalContext) -> float:
        a = self.arg.to_float(ctx)
        try:
            r = ELEMENTARY[self.func][0](a)
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise EvaluationError(str(e), str(self))
        if not math.isfinite(r):
            raise EvaluationError("non-finite result", str(self))
        return r

    @property
    def parameters(self) -> FrozenSet[str]:
        return self.arg.parameters

    @property
    def max_axis(self) -> int:
        return self.arg.max_axis

    def __str__(self) -> str:
        return f"{self.func}({self.arg})"


class Token:
    def __init__(self, kind: str, text: str, position: int) -> None:
        self.kind = kind
        self.text = text
        self.position = position

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.position})"


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"Unexpected character '{text[offset]}'", offset)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class Parser:
    '''
    Pratt parser: every token has a left binding power; prefix handling lives in
    ``nud`` and infix handling in ``led``.
    '''
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        t = self.tokens[self.index]
        if t.kind != "end":
            self.index += 1
        return t

    def lbp(self, t: Token) -> int:
        if t.kind != "op":
            return 0
        return _BINDING_POWER.get(self._op(t), 0)

    @staticmethod
    def _op(t: Token) -> str:
        return "^" if t.text == "**" else t.text

    def parse(self) -> Node:
        if self.current.kind == "end":
            raise ExpressionSyntaxError("Empty expression", 0)
        node = self.expression(0)
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"Unexpected '{self.current.text}'", self.current.position)
        return node

    def expression(self, rbp: int) -> Node:
        t = self.advance()
        left = self.nud(t)
        while rbp < self.lbp(self.current):
            t = self.advance()
            left = self.led(t, left)
        return left

    def expect_close(self, opening: Token) -> None:
        if self.current.kind == "op" and self.current.text == ")":
            self.advance()
            return
        raise ExpressionSyntaxError(f"Missing ')' for '(' at offset {opening.position}", self.current.position)

    def nud(self, t: Token) -> Node:
        if t.kind == "end":
            # the previous token is the operator still waiting for its operand
            previous = self.tokens[self.index - 1] if self.index > 0 else t
            raise ExpressionSyntaxError(f"Missing operand after '{previous.text}'", previous.position)
        if t.kind == "number":
            return Constant(float(t.text))
        if t.kind == "name":
            return self._name(t)
        if t.text == "-":
            return Negate(self.expression(_UNARY_MINUS_POWER))
        if t.text == "(":
            inner = self.expression(0)
            self.expect_close(t)
            return inner
        raise ExpressionSyntaxError(f"Unexpected '{t.text}'", t.position)

    def _name(self, t: Token) -> Node:
        if t.text in FUNCTIONS:
            if not (self.current.kind == "op" and self.current.text == "("):
                raise ExpressionSyntaxError(f"Function '{t.text}' needs a parenthesised argument", t.position)
            opening = self.advance()
            arg = self.expression(0)
            self.expect_close(opening)
            return Call(t.text, arg)
        if t.text in COORDINATE_ALIASES:
            return Variable(COORDINATE_ALIASES[t.text])
        m = _COORDINATE_RE.fullmatch(t.text)
        if m is not None:
            return Variable(int(m.group(1)))
        return Parameter(t.text)

    def led(self, t: Token, left: Node) -> Node:
        op = self._op(t)
        if op == "^":
            return BinaryOp(op, left, self.expression(_BINDING_POWER["^"] - 1))
        return BinaryOp(op, left, self.expression(_BINDING_POWER[op]))


def parse_expression(text: str) -> Node:
    '''Parses ``text`` into an expression tree; raises ExpressionSyntaxError with the offending offset.'''
    node = Parser(text).parse()
    logger.debug("Parsed %r as %s", text, node)
    return node


def evaluate(node: Node, point: Sequence[float], params: Dict[str, float]) -> float:
    return node.to_float(EvalContext(point, params))


def evaluate_dual(node: Node, point: Sequence[float], params: Dict[str, float]) -> Dual2:
    return node.to_dual(EvalContext(point, params))
