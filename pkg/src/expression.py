"""
Component expressions: tokenizer, recursive-descent parser, printer and evaluators.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' ['+' | '-'] INTEGER)?
    primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.errors import ParseError, UnknownIdentifier
from src.jet import Jet

logger = logging.getLogger(__name__)

VARIABLES = ("t", "s1", "s2")
FUNCTIONS = ("sin", "cos", "exp", "sqrt")

_PRIMARY_START = ["number", "identifier", "'('", "'-'"]


# ----------------------------------------------------------------------
# Tree nodes
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or a function name
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int


Node = Union[Num, Var, Unary, Binary, Power]


# ----------------------------------------------------------------------
# Tokenizer
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, op, lparen, rparen, end
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^])
  | (?P<lparen>\()
  | (?P<rparen>\))
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> List[Token]:
    for i, ch in enumerate(text):
        if ord(ch) > 127:
            raise ParseError(f"non-ASCII character {ch!r}", len(text[:i].encode("utf-8")))
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos,
                             ["number", "identifier", "operator", "'('", "')'"])
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, expected: Sequence[str]) -> ParseError:
        tok = self.current
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(f"{message}, found {found}", tok.offset, expected)

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            raise self.error("unexpected token", ["operator", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.current
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            sign = 1
            if self.current.kind == "op" and self.current.text in "+-":
                sign = -1 if self.advance().text == "-" else 1
            tok = self.current
            if tok.kind != "number" or not tok.text.isdigit():
                raise self.error("exponent must be an integer literal", ["integer"])
            self.advance()
            return Power(base, sign * int(tok.text))
        return base

    def primary(self) -> Node:
        tok = self.current
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            if self.current.kind != "rparen":
                raise self.error("unbalanced parenthesis", ["')'"])
            self.advance()
            return node
        if tok.kind == "ident":
            self.advance()
            followed_by_paren = self.current.kind == "lparen"
            if tok.text in FUNCTIONS:
                if not followed_by_paren:
                    raise self.error(f"function '{tok.text}' needs an argument", ["'('"])
                self.advance()
                arg = self.expr()
                if self.current.kind != "rparen":
                    raise self.error("unbalanced parenthesis", ["')'"])
                self.advance()
                return Unary(tok.text, arg)
            if tok.text in VARIABLES and not followed_by_paren:
                return Var(tok.text)
            raise UnknownIdentifier(tok.text, tok.offset, list(VARIABLES) + list(FUNCTIONS))
        raise self.error("expected an operand", _PRIMARY_START)


def parse_expression(text: str) -> Node:
    """
    Parse component text into an expression tree.

    Args:
        text: ASCII infix expression in t, s1, s2

    Returns:
        expression tree

    Raises:
        ParseError: with 0-based offset and the expected tokens
        UnknownIdentifier: for names other than t, s1, s2 and the supported functions
    """
    if not isinstance(text, str):
        raise ParseError(f"expression must be text, got {type(text).__name__}", 0)
    return _Parser(text).parse()


# ----------------------------------------------------------------------
# Printing
# ----------------------------------------------------------------------

_BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _BINARY_PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return 3
    if isinstance(node, Power):
        return 4
    return 5


def pretty_print(node: Node) -> str:
    """Minimal-parenthesis text that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        inner = pretty_print(node.arg)
        if node.op != "neg":
            return f"{node.op}({inner})"
        if _prec(node.arg) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Power):
        base = pretty_print(node.base)
        if _prec(node.base) <= 4:
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Binary):
        prec = _BINARY_PREC[node.op]
        left = pretty_print(node.left)
        right = pretty_print(node.right)
        if _prec(node.left) < prec:
            left = f"({left})"
        if _prec(node.right) <= prec:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def free_variables(node: Node) -> Set[str]:
    return {n.name for n in walk(node) if isinstance(n, Var)}


def walk(node: Node) -> Iterator[Node]:
    yield node
    if isinstance(node, Unary):
        yield from walk(node.arg)
    elif isinstance(node, Power):
        yield from walk(node.base)
    elif isinstance(node, Binary):
        yield from walk(node.left)
        yield from walk(node.right)


# ----------------------------------------------------------------------
# Evaluation
# ----------------------------------------------------------------------

_NUMPY_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}


def evaluate(node: Node, t, s1=0.0, s2=0.0):
    """Point evaluation; array arguments broadcast."""
    env = {"t": t, "s1": s1, "s2": s2}
    return _eval(node, env)


def _eval(node: Node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return np.asarray(env[node.name], dtype=float)
    if isinstance(node, Unary):
        arg = _eval(node.arg, env)
        if node.op == "neg":
            return -arg
        return _NUMPY_FUNCS[node.op](arg)
    if isinstance(node, Power):
        return np.asarray(_eval(node.base, env), dtype=float) ** node.exponent
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    return np.asarray(left, dtype=float) / right


def to_jet(node: Node, t0, degree: int, s: Tuple = (0.0, 0.0)) -> Jet:
    """Jet in t at t0 with the parameters s = (s1, s2) substituted."""
    s1 = np.asarray(s[0], dtype=float)
    s2 = np.asarray(s[1], dtype=float)
    batch = np.broadcast_shapes(np.shape(t0), s1.shape, s2.shape)
    t0 = np.asarray(t0, dtype=float)
    if t0.ndim == 0:
        t0 = float(t0)
    env = {
        "t": Jet.variable(t0, degree),
        "s1": Jet.constant(s1, degree, t0),
        "s2": Jet.constant(s2, degree, t0),
    }
    result = _jet(node, env, degree, t0)
    if result.batch_shape != batch:
        result = result + Jet.constant(np.zeros(batch), degree, t0)
    return result


def _jet(node: Node, env, degree: int, t0) -> Jet:
    if isinstance(node, Num):
        return Jet.constant(node.value, degree, t0)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Unary):
        arg = _jet(node.arg, env, degree, t0)
        if node.op == "neg":
            return -arg
        return getattr(arg, node.op)()
    if isinstance(node, Power):
        return _jet(node.base, env, degree, t0).pow_int(node.exponent)
    left = _jet(node.left, env, degree, t0)
    right = _jet(node.right, env, degree, t0)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    return left / right


# ----------------------------------------------------------------------
# Builders
# ----------------------------------------------------------------------

def polynomial_tree(coefficients: Sequence[Union[float, Node]], variable: str = "t") -> Node:
    """
    Tree for sum_k c_k t^k.

    Entries may be numbers or trees (parameter-dependent coefficients).
    Negative numeric coefficients become subtractions so no negative
    literal ever appears in a tree.
    """
    x = Var(variable)
    node: Optional[Node] = None
    for k, coeff in enumerate(coefficients):
        if isinstance(coeff, (Num, Var, Unary, Binary, Power)):
            term: Node = coeff
            negative = False
            if k > 0:
                term = Binary("*", term, x if k == 1 else Power(x, k))
        else:
            value = float(coeff)
            if value == 0.0:
                continue
            negative = value < 0
            magnitude = abs(value)
            monomial = None if k == 0 else (x if k == 1 else Power(x, k))
            if monomial is None:
                term = Num(magnitude)
            elif magnitude == 1.0:
                term = monomial
            else:
                term = Binary("*", Num(magnitude), monomial)
        if node is None:
            node = Unary("neg", term) if negative else term
        else:
            node = Binary("-" if negative else "+", node, term)
    return node if node is not None else Num(0.0)
