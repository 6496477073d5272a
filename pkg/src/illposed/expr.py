"""Arithmetic expression language used by all of the diagnostics.

Expressions are parsed from text into a small immutable tree and are
evaluated under strict IEEE-754 double semantics: any operation that
leaves the finite real domain (division by zero, log of a non-positive
value, overflow past the largest double, ...) raises a typed error
instead of silently returning an infinity.  The numerical modules rely
on this to tell "the value became huge" apart from "the formula stopped
making sense here".

Grammar, from loosest to tightest precedence::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?            right associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

'^' binds tighter than '*' and '/', which bind tighter than '+' and
'-'.  Unary minus binds below '^', so "-2^2" means -(2^2) while "2^-2"
is still legal.  NAME is a run of ASCII letters; "pi" is a constant and
sin, cos, tan, exp, ln, sqrt, abs are the built-in functions.  There is
no implicit multiplication.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "Expression",
    "Literal",
    "Variable",
    "Unary",
    "Binary",
    "Call",
    "ExpressionError",
    "ParseError",
    "EvalError",
    "UnboundVariableError",
    "DomainError",
    "FUNCTIONS",
    "CONSTANTS",
    "parse",
    "evaluate",
    "to_text",
    "free_variables",
    "compile_scalar",
    "compile_array",
]

FUNCTIONS = frozenset({"sin", "cos", "tan", "exp", "ln", "sqrt", "abs"})
CONSTANTS: dict[str, float] = {"pi": math.pi}

# Nesting cap keeps the recursive-descent parser total: pathological
# inputs get a ParseError, never a RecursionError.
_MAX_DEPTH = 120


class ExpressionError(Exception):
    """Base class for every error this module raises on purpose."""


class ParseError(ExpressionError):
    """Malformed source text.  `offset` is a byte offset into the UTF-8
    encoding of the source."""

    def __init__(self, message: str, source: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.source = source
        self.offset = offset


class EvalError(ExpressionError):
    """Base class for evaluation failures."""


class UnboundVariableError(EvalError):
    def __init__(self, name: str, node: "Expression | None" = None):
        super().__init__(f"unbound variable {name!r}")
        self.name = name
        self.node = node


class DomainError(EvalError):
    """An operation left the domain of finite real doubles."""

    def __init__(self, reason: str, node: "Expression | None" = None):
        message = reason
        if node is not None:
            try:
                message = f"{reason} in {to_text(node)!r}"
            except ValueError:
                pass
        super().__init__(message)
        self.reason = reason
        self.node = node


class Expression:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Literal(Expression):
    value: float


@dataclass(frozen=True, slots=True)
class Variable(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Unary(Expression):
    """Negation, the only prefix operator."""

    operand: Expression


@dataclass(frozen=True, slots=True)
class Binary(Expression):
    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True, slots=True)
class Call(Expression):
    func: str
    arg: Expression


# --- lexing ---------------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z]+")
_OPS = "+-*/^()"
_WHITESPACE = " \t\r\n"


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # "number" | "name" | "op" | "end"
    text: str
    pos: int  # character offset


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch in _WHITESPACE:
            i += 1
            continue
        if ch in _OPS:
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        m = _NUMBER_RE.match(source, i)
        if m:
            tokens.append(_Token("number", m.group(), i))
            i = m.end()
            continue
        m = _NAME_RE.match(source, i)
        if m:
            tokens.append(_Token("name", m.group(), i))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", source, _byte_offset(source, i))
    tokens.append(_Token("end", "", n))
    return tokens


# --- parsing --------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.index = 0
        self.depth = 0

    def _peek(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _fail(self, message: str, token: _Token) -> None:
        raise ParseError(message, self.source, _byte_offset(self.source, token.pos))

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            self._fail("expression nested too deeply", self._peek())

    def parse(self) -> Expression:
        node = self.expr()
        token = self._peek()
        if token.kind != "end":
            self._fail(f"unexpected {token.text!r} after a complete expression", token)
        return node

    def expr(self) -> Expression:
        self._enter()
        try:
            node = self.term()
            while self._peek().kind == "op" and self._peek().text in "+-":
                op = self._advance().text
                node = Binary(op, node, self.term())
            return node
        finally:
            self.depth -= 1

    def term(self) -> Expression:
        node = self.unary()
        while self._peek().kind == "op" and self._peek().text in "*/":
            op = self._advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        self._enter()
        try:
            token = self._peek()
            if token.kind == "op" and token.text == "-":
                self._advance()
                return Unary(self.unary())
            return self.power()
        finally:
            self.depth -= 1

    def power(self) -> Expression:
        base = self.atom()
        token = self._peek()
        if token.kind == "op" and token.text == "^":
            self._advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        token = self._peek()
        if token.kind == "number":
            self._advance()
            value = float(token.text)
            if not math.isfinite(value):
                self._fail("number literal out of double range", token)
            return Literal(value)
        if token.kind == "name":
            self._advance()
            nxt = self._peek()
            if nxt.kind == "op" and nxt.text == "(":
                if token.text not in FUNCTIONS:
                    self._fail(f"unknown function {token.text!r}", token)
                self._advance()
                arg = self.expr()
                self._expect_rparen()
                return Call(token.text, arg)
            if token.text in CONSTANTS:
                return Literal(CONSTANTS[token.text])
            if token.text in FUNCTIONS:
                self._fail(f"{token.text!r} is a function and needs a parenthesised argument", token)
            return Variable(token.text)
        if token.kind == "op" and token.text == "(":
            self._advance()
            node = self.expr()
            self._expect_rparen()
            return node
        if token.kind == "end":
            self._fail("unexpected end of input; expected a value", token)
        self._fail(f"expected a number, a name, or '(' but found {token.text!r}", token)
        raise AssertionError("unreachable")

    def _expect_rparen(self) -> None:
        token = self._peek()
        if token.kind == "op" and token.text == ")":
            self._advance()
            return
        self._fail("expected ')'", token)


def parse(source: str) -> Expression:
    """Parse `source` into an expression tree.

    Every malformed input raises ParseError carrying a byte offset; no
    other exception escapes, whatever the input string.
    """
    if not isinstance(source, str):
        raise TypeError("expression source must be a string")
    return _Parser(source).parse()


# --- guarded scalar arithmetic ---------------------------------------------
#
# These tiny wrappers are shared verbatim between the tree-walking
# evaluator and compile_scalar(), which is what makes the two paths
# bit-identical: same callables, same order of operations.


def _add(a: float, b: float) -> float:
    r = a + b
    if math.isfinite(r):
        return r
    raise DomainError("overflow in addition")


def _sub(a: float, b: float) -> float:
    r = a - b
    if math.isfinite(r):
        return r
    raise DomainError("overflow in subtraction")


def _mul(a: float, b: float) -> float:
    r = a * b
    if math.isfinite(r):
        return r
    raise DomainError("overflow in multiplication")


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainError("division by zero")
    r = a / b
    if math.isfinite(r):
        return r
    raise DomainError("overflow in division")


def _pow(a: float, b: float) -> float:
    if a == 0.0 and b < 0.0:
        raise DomainError("zero raised to a negative power")
    if a < 0.0 and b != math.floor(b):
        raise DomainError("negative base with a non-integer exponent")
    try:
        r = math.pow(a, b)
    except (OverflowError, ValueError):
        raise DomainError("overflow in power") from None
    if math.isfinite(r):
        return r
    raise DomainError("overflow in power")


def _exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError("overflow in exp") from None


def _ln(a: float) -> float:
    if a <= 0.0:
        raise DomainError("log of a non-positive value")
    return math.log(a)


def _sqrt(a: float) -> float:
    if a < 0.0:
        raise DomainError("square root of a negative value")
    return math.sqrt(a)


_BINARY_OPS: dict[str, Callable[[float, float], float]] = {
    "+": _add,
    "-": _sub,
    "*": _mul,
    "/": _div,
    "^": _pow,
}

# sin/cos/tan of a finite double are always finite, so they need no guard
_FUNCTION_OPS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": _exp,
    "ln": _ln,
    "sqrt": _sqrt,
    "abs": abs,
}


def evaluate(expr: Expression, bindings: Mapping[str, float]) -> float:
    """Evaluate a tree under `bindings`, strictly.

    Raises UnboundVariableError for a variable missing from `bindings`
    and DomainError (carrying the offending subtree) whenever a step
    leaves the finite real doubles.
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Variable):
        try:
            value = bindings[expr.name]
        except KeyError:
            raise UnboundVariableError(expr.name, expr) from None
        return float(value)
    if isinstance(expr, Unary):
        return -evaluate(expr.operand, bindings)
    if isinstance(expr, Binary):
        left = evaluate(expr.left, bindings)
        right = evaluate(expr.right, bindings)
        try:
            return _BINARY_OPS[expr.op](left, right)
        except DomainError as err:
            raise DomainError(err.reason, expr) from None
    if isinstance(expr, Call):
        arg = evaluate(expr.arg, bindings)
        try:
            return _FUNCTION_OPS[expr.func](arg)
        except DomainError as err:
            raise DomainError(err.reason, expr) from None
    raise TypeError(f"not an expression node: {expr!r}")


def free_variables(expr: Expression) -> frozenset[str]:
    """Names of the variables occurring in `expr`."""
    out: set[str] = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Variable):
            out.add(node.name)
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Binary):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Call):
            stack.append(node.arg)
    return frozenset(out)


# --- printing ---------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _prec(expr: Expression) -> int:
    if isinstance(expr, Binary):
        if expr.op in "+-":
            return _PREC_ADD
        if expr.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(expr, Unary):
        return _PREC_MUL
    return _PREC_ATOM


def _literal_text(value: float) -> str:
    # repr() of a double is round-trip exact; negative or non-finite
    # literals cannot reparse to a Literal node, so refuse them (parse()
    # never builds such trees, only hand-built ones can).
    if not math.isfinite(value) or math.copysign(1.0, value) < 0:
        raise ValueError(f"literal {value!r} has no lossless rendering; wrap negatives in Unary")
    return repr(float(value))


def to_text(expr: Expression) -> str:
    """Render a tree to text that reparses to an identical tree."""
    if isinstance(expr, Literal):
        return _literal_text(expr.value)
    if isinstance(expr, Variable):
        return expr.name
    if isinstance(expr, Unary):
        inner = to_text(expr.operand)
        if _prec(expr.operand) <= _PREC_MUL:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(expr, Binary):
        me = _prec(expr)
        left = to_text(expr.left)
        right = to_text(expr.right)
        if expr.op == "^":
            # right associative: parenthesise the left side on ties
            if _prec(expr.left) <= me:
                left = f"({left})"
            if _prec(expr.right) < me:
                right = f"({right})"
        else:
            if _prec(expr.left) < me:
                left = f"({left})"
            if _prec(expr.right) <= me:
                right = f"({right})"
        return f"{left}{expr.op}{right}"
    if isinstance(expr, Call):
        return f"{expr.func}({to_text(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


# --- compilation ------------------------------------------------------------

_SCALAR_OPNAMES = {"+": "ADD", "-": "SUB", "*": "MUL", "/": "DIV", "^": "POW"}

_SCALAR_NAMESPACE: dict[str, object] = {
    "__builtins__": {},
    "ADD": _add,
    "SUB": _sub,
    "MUL": _mul,
    "DIV": _div,
    "POW": _pow,
}
_SCALAR_NAMESPACE.update({f"F{name}": fn for name, fn in _FUNCTION_OPS.items()})

_ARRAY_NAMESPACE: dict[str, object] = {
    "__builtins__": {},
    "POW": np.power,
    "Fsin": np.sin,
    "Fcos": np.cos,
    "Ftan": np.tan,
    "Fexp": np.exp,
    "Fln": np.log,
    "Fsqrt": np.sqrt,
    "Fabs": np.abs,
}


def _check_params(expr: Expression, params: Sequence[str]) -> tuple[str, ...]:
    names = tuple(params)
    for name in names:
        if not name.isascii() or not name.isalpha() or not name.islower():
            raise ValueError(f"parameter name {name!r} must be lowercase ASCII letters")
        if name in FUNCTIONS or name in CONSTANTS:
            raise ValueError(f"parameter name {name!r} shadows a built-in")
    missing = sorted(free_variables(expr) - set(names))
    if missing:
        raise UnboundVariableError(missing[0])
    return names


def _scalar_code(expr: Expression) -> str:
    if isinstance(expr, Literal):
        return repr(expr.value)
    if isinstance(expr, Variable):
        return expr.name
    if isinstance(expr, Unary):
        return f"(- {_scalar_code(expr.operand)})"
    if isinstance(expr, Binary):
        return f"{_SCALAR_OPNAMES[expr.op]}({_scalar_code(expr.left)}, {_scalar_code(expr.right)})"
    if isinstance(expr, Call):
        return f"F{expr.func}({_scalar_code(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


def compile_scalar(expr: Expression, params: Sequence[str] = ("x", "y")) -> Callable[..., float]:
    """Compile a tree to a fast positional-argument callable.

    The result takes one float per name in `params` and is bit-identical
    to `evaluate`: same values on success, same typed errors on failure
    (failures are re-run through the tree walk so the error can name the
    offending subtree).
    """
    names = _check_params(expr, params)
    source = f"lambda {', '.join(names)}: {_scalar_code(expr)}"
    fn = eval(source, dict(_SCALAR_NAMESPACE))

    def compiled(*args: float) -> float:
        try:
            return fn(*args)
        except EvalError:
            evaluate(expr, dict(zip(names, args)))
            raise

    compiled.source = source  # type: ignore[attr-defined]
    return compiled


def _array_code(expr: Expression) -> str:
    if isinstance(expr, Literal):
        return repr(expr.value)
    if isinstance(expr, Variable):
        return expr.name
    if isinstance(expr, Unary):
        return f"(- {_array_code(expr.operand)})"
    if isinstance(expr, Binary):
        if expr.op == "^":
            return f"POW({_array_code(expr.left)}, {_array_code(expr.right)})"
        return f"({_array_code(expr.left)} {expr.op} {_array_code(expr.right)})"
    if isinstance(expr, Call):
        return f"F{expr.func}({_array_code(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


def compile_array(expr: Expression, params: Sequence[str] = ("x", "y")) -> Callable[..., np.ndarray]:
    """Compile a tree to a numpy-vectorised callable for dense scans.

    Unlike the scalar paths, out-of-domain points do not raise: they
    come back as nan or inf entries, which the scan modules treat as
    evidence in their own right.
    """
    names = _check_params(expr, params)
    source = f"lambda {', '.join(names)}: {_array_code(expr)}"
    fn = eval(source, dict(_ARRAY_NAMESPACE))

    def compiled(*args) -> np.ndarray:
        arrays = [np.asarray(a, dtype=float) for a in args]
        with np.errstate(all="ignore"):
            out = fn(*arrays)
        out = np.asarray(out, dtype=float)
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        if out.shape != shape:
            out = np.broadcast_to(out, shape).copy()
        return out

    compiled.source = source  # type: ignore[attr-defined]
    return compiled
