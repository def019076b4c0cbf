"""Parser and evaluator for potential / observable expressions.

One free variable ("x", with "r" accepted as an alias), the imaginary
unit "i", rationals and decimals, and a whitelisted function set.  The
grammar (recursive descent):

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | 'x' | 'r' | 'i' | ident '(' expr ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus.  There is
no implicit multiplication: "2x" is a parse error.

Evaluation is exact-rational friendly: literals are re-read at the
active working precision on every call, so one parsed tree serves any
precision.  Results stay real (mpfr) until the imaginary unit or a
branch cut forces a complex value.
"""

import re
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import EvaluationError, MultipleVariables, ParseError, UnknownFunction

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt", "abs")

VARIABLE_NAMES = ("x", "r")


@dataclass(frozen=True)
class Num:
    literal: str


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class ImagUnit:
    pass


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Div:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: object


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


@dataclass(frozen=True)
class PotentialExpr:
    """Parsed expression plus the variable spelling it used."""

    root: object
    variable: str
    source: str


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == m.start():
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(src) - len(stripped)
            raise ParseError(f"unexpected character {src[bad_at]!r}", position=bad_at)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0
        self.variable = None

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value, position = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", position=position)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, position = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", position=position)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if value == "+" else Sub(node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.unary()
                node = Mul(node, rhs) if value == "*" else Div(node, rhs)
            else:
                return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self):
        kind, value, position = self.advance()
        if kind == "number":
            return Num(value)
        if kind == "ident":
            lowered = value.lower()
            if lowered == "i":
                return ImagUnit()
            if lowered in VARIABLE_NAMES:
                if self.variable is None:
                    self.variable = lowered
                elif self.variable != lowered:
                    raise MultipleVariables(
                        f"expression already uses {self.variable!r}; "
                        f"second variable {value!r}",
                        position=position,
                    )
                return Var()
            next_kind, next_value, _ = self.peek()
            if next_kind == "op" and next_value == "(":
                if lowered not in FUNCTIONS:
                    raise UnknownFunction(
                        f"unknown function {value!r}", position=position
                    )
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(lowered, arg)
            raise ParseError(f"unknown symbol {value!r}", position=position)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(
            f"expected a number, variable, or '(', got {value!r}" if value else "unexpected end of input",
            position=position,
        )


def parse_potential(src):
    """Parse an expression in one variable into a PotentialExpr."""
    if not isinstance(src, str) or not src.strip():
        raise ParseError("empty expression")
    parser = _Parser(src)
    root = parser.parse()
    return PotentialExpr(root=root, variable=parser.variable or "x", source=src)


# ---------------------------------------------------------------------------
# evaluation


def _eval(node, x):
    if isinstance(node, Num):
        return mpfr(node.literal)
    if isinstance(node, Var):
        return x
    if isinstance(node, ImagUnit):
        return mpc(0, 1)
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Add):
        return _eval(node.left, x) + _eval(node.right, x)
    if isinstance(node, Sub):
        return _eval(node.left, x) - _eval(node.right, x)
    if isinstance(node, Mul):
        return _eval(node.left, x) * _eval(node.right, x)
    if isinstance(node, Div):
        num = _eval(node.left, x)
        den = _eval(node.right, x)
        if den == 0:
            raise EvaluationError("division by zero", node=node)
        return _check(num / den, node)
    if isinstance(node, Pow):
        base = _eval(node.base, x)
        exponent = _eval(node.exponent, x)
        return _check(_power(base, exponent, node), node)
    if isinstance(node, Call):
        return _check(_call(node, x), node)
    raise TypeError(f"unknown node {node!r}")


def _check(value, node):
    parts = (value.real, value.imag) if isinstance(value, type(mpc(0))) else (value,)
    for part in parts:
        if not gmpy2.is_finite(part):
            raise EvaluationError("non-finite intermediate value", node=node)
    return value


def _power(base, exponent, node):
    complex_exp = isinstance(exponent, type(mpc(0)))
    if not complex_exp and gmpy2.is_integer(exponent):
        e = int(exponent)
        if base == 0 and e < 0:
            raise EvaluationError("zero raised to a negative power", node=node)
        return base ** e
    if complex_exp or isinstance(base, type(mpc(0))) or base < 0:
        # principal branch
        if base == 0:
            raise EvaluationError("zero raised to a non-integer power", node=node)
        return mpc(base) ** exponent
    if base == 0:
        return mpfr(0)
    return base ** exponent


def _call(node, x):
    arg = _eval(node.arg, x)
    name = node.name
    is_complex = isinstance(arg, type(mpc(0)))
    if name == "abs":
        return abs(arg)
    if name == "sqrt":
        if not is_complex and arg < 0:
            return gmpy2.sqrt(mpc(arg))
        return gmpy2.sqrt(arg)
    if name == "log":
        if arg == 0:
            raise EvaluationError("log of zero", node=node)
        if not is_complex and arg < 0:
            return gmpy2.log(mpc(arg))
        return gmpy2.log(arg)
    fn = getattr(gmpy2, name)
    return fn(arg)


def eval_expr(expr, x, ctx):
    """Evaluate at a big-float or big-complex argument under ctx.

    Returns mpfr when the value is real, mpc otherwise.
    """
    with ctx.activate():
        if isinstance(x, str):
            from .precision import parse_scalar

            parsed = parse_scalar(x, ctx)
            x = parsed.real if parsed.imag == 0 else parsed
        elif not isinstance(x, (type(mpfr(0)), type(mpc(0)))):
            x = mpfr(x)
        value = _eval(expr.root, x)
        return _check(value, expr.root)


def realness_probe(expr, points, ctx):
    """True when Im V(x) is negligible at every probe point.

    Used only to pick the symmetric vs complex-symmetric solver path,
    never to alter values.
    """
    if not points:
        raise ValueError("realness probe needs at least one point")
    with ctx.activate():
        threshold = ctx.tol(2)
        for p in points:
            value = eval_expr(expr, p, ctx)
            if isinstance(value, type(mpc(0))):
                if abs(value.imag) > threshold * (1 + abs(value)):
                    return False
        return True


# ---------------------------------------------------------------------------
# unparsing (structure-preserving round trip)

_PRECEDENCE = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_ATOMS = (Num, Var, ImagUnit, Call)


def _prec(node):
    if isinstance(node, _ATOMS):
        return 5
    return _PRECEDENCE[type(node)]


def _wrap(node, text, parent_prec, right_side=False):
    prec = _prec(node)
    if prec < parent_prec or (prec == parent_prec and right_side):
        return f"({text})"
    return text


def unparse(expr):
    """Render back to source; reparsing yields a structurally equal tree."""
    root = expr.root if isinstance(expr, PotentialExpr) else expr
    variable = expr.variable if isinstance(expr, PotentialExpr) else "x"

    def render(node):
        if isinstance(node, Num):
            return node.literal
        if isinstance(node, Var):
            return variable
        if isinstance(node, ImagUnit):
            return "i"
        if isinstance(node, Neg):
            inner = render(node.operand)
            return "-" + _wrap(node.operand, inner, _prec(node), right_side=False)
        if isinstance(node, (Add, Sub)):
            op = "+" if isinstance(node, Add) else "-"
            left = _wrap(node.left, render(node.left), _prec(node))
            right = _wrap(node.right, render(node.right), _prec(node), right_side=True)
            return f"{left}{op}{right}"
        if isinstance(node, (Mul, Div)):
            op = "*" if isinstance(node, Mul) else "/"
            left = _wrap(node.left, render(node.left), _prec(node))
            right = _wrap(node.right, render(node.right), _prec(node), right_side=True)
            return f"{left}{op}{right}"
        if isinstance(node, Pow):
            base = _wrap(node.base, render(node.base), _prec(node) + 1)
            exponent = node.exponent
            exp_text = render(exponent)
            if not isinstance(exponent, _ATOMS):
                exp_text = f"({exp_text})"
            return f"{base}^{exp_text}"
        if isinstance(node, Call):
            return f"{node.name}({render(node.arg)})"
        raise TypeError(f"unknown node {node!r}")

    return render(root)
