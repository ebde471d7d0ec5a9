"""Small text format for defining maps, and a compiler to Oracle.

Source layout::

    n = 2
    m = 2
    region = [-1, 1] x [-1, 1]
    f1 := (x1 + 2*x2 + 1) / (0.2*x1 + 1)
    f2 := (3*x1 - x2) / (0.2*x1 + 1)

Header: input dimension n, output dimension m, and the sampling region
as one [lo, hi] box per input coordinate joined by the letter x.  Then
one component definition per output coordinate, f1 .. fm, each exactly
once, in any order.

Expressions use +, -, *, /, unary minus, ^ with a nonnegative integer
literal exponent, parentheses, float literals, the variables x1 .. xn,
and the unary functions exp, log, sqrt, abs.  Operator precedence is the
usual one; ^ binds tightest and applies to a single atom.

Parse errors carry a line and column.  Unknown variables or functions
raise UnknownIdentifier, calls with the wrong argument count raise
ArityError.  Expression nesting is capped at 256 levels.

Evaluation guards: division by a denominator of magnitude <= 1e-300,
log of a nonpositive value, sqrt of a negative value, or a non-finite
result all make the point count as outside the map's domain.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from cevarep.errors import (
    ArityError,
    MapSyntaxError,
    OutOfDomain,
    UnknownIdentifier,
)
from cevarep.oracle import Oracle, SamplingRegion

MAX_DEPTH = 256
_DIV_FLOOR = 1e-300
_FUNCTIONS = ("exp", "log", "sqrt", "abs")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, printed as x<index>


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Const, Var, BinOp, Neg, Pow, Call]


@dataclass(frozen=True)
class MapSpec:
    in_dim: int
    out_dim: int
    region: SamplingRegion
    components: Tuple[Expr, ...]


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
      | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<assign>:=)
      | (?P<sym>[-+*/^()\[\],=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num | id | sym | assign | eof
    text: str
    line: int
    col: int


def _tokenize(src: str):
    tokens = []
    line = 1
    col = 1
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise MapSyntaxError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group(0)
        kind = m.lastgroup
        if kind == "ws":
            pass
        elif kind == "sym" or kind == "assign" or kind == "num" or kind == "id":
            tokens.append(_Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise MapSyntaxError(message, tok.line, tok.col)

    def expect_sym(self, sym) -> _Token:
        tok = self.peek()
        if tok.kind != "sym" or tok.text != sym:
            self.fail(f"expected {sym!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def expect_id(self, name=None) -> _Token:
        tok = self.peek()
        if tok.kind != "id" or (name is not None and tok.text != name):
            what = repr(name) if name else "an identifier"
            self.fail(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.next()

    def expect_int(self) -> int:
        tok = self.peek()
        if tok.kind != "num" or not re.fullmatch(r"\d+", tok.text):
            self.fail(
                f"expected an integer literal, found {tok.text or 'end of input'!r}"
            )
        self.next()
        return int(tok.text)

    def signed_number(self) -> float:
        tok = self.peek()
        sign = 1.0
        if tok.kind == "sym" and tok.text == "-":
            self.next()
            sign = -1.0
            tok = self.peek()
        if tok.kind != "num":
            self.fail(f"expected a number, found {tok.text or 'end of input'!r}")
        self.next()
        return sign * float(tok.text)

    # expression grammar ------------------------------------------------

    def expr(self, n) -> Expr:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail(f"expression nesting exceeds {MAX_DEPTH} levels")
        node = self.term(n)
        while True:
            tok = self.peek()
            if tok.kind == "sym" and tok.text in "+-":
                self.next()
                node = BinOp(tok.text, node, self.term(n))
            else:
                break
        self.depth -= 1
        return node

    def term(self, n) -> Expr:
        node = self.factor(n)
        while True:
            tok = self.peek()
            if tok.kind == "sym" and tok.text in "*/":
                self.next()
                node = BinOp(tok.text, node, self.factor(n))
            else:
                break
        return node

    def factor(self, n) -> Expr:
        tok = self.peek()
        if tok.kind == "sym" and tok.text == "-":
            self.next()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                self.fail(f"expression nesting exceeds {MAX_DEPTH} levels")
            node = Neg(self.factor(n))
            self.depth -= 1
            return node
        return self.power(n)

    def power(self, n) -> Expr:
        node = self.atom(n)
        tok = self.peek()
        if tok.kind == "sym" and tok.text == "^":
            self.next()
            node = Pow(node, self.expect_int())
        return node

    def atom(self, n) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return Const(float(tok.text))
        if tok.kind == "id":
            self.next()
            nxt = self.peek()
            if nxt.kind == "sym" and nxt.text == "(":
                return self.call(tok, n)
            m = re.fullmatch(r"x(\d+)", tok.text)
            if not m:
                raise UnknownIdentifier(
                    f"line {tok.line}, col {tok.col}: unknown variable "
                    f"{tok.text!r} (variables are x1 .. x{n})"
                )
            index = int(m.group(1))
            if not 1 <= index <= n:
                raise UnknownIdentifier(
                    f"line {tok.line}, col {tok.col}: variable {tok.text!r} "
                    f"is out of range for input dimension {n}"
                )
            return Var(index)
        if tok.kind == "sym" and tok.text == "(":
            self.next()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                self.fail(f"expression nesting exceeds {MAX_DEPTH} levels")
            node = self.expr(n)
            self.depth -= 1
            self.expect_sym(")")
            return node
        self.fail(f"expected an expression, found {tok.text or 'end of input'!r}")

    def call(self, name_tok, n) -> Expr:
        if name_tok.text not in _FUNCTIONS:
            raise UnknownIdentifier(
                f"line {name_tok.line}, col {name_tok.col}: unknown function "
                f"{name_tok.text!r} (known: {', '.join(_FUNCTIONS)})"
            )
        self.expect_sym("(")
        args = [self.expr(n)]
        while self.peek().kind == "sym" and self.peek().text == ",":
            self.next()
            args.append(self.expr(n))
        self.expect_sym(")")
        if len(args) != 1:
            raise ArityError(
                f"line {name_tok.line}, col {name_tok.col}: {name_tok.text} "
                f"takes 1 argument, got {len(args)}"
            )
        return Call(name_tok.text, args[0])

    # spec grammar ------------------------------------------------------

    def box(self):
        open_tok = self.expect_sym("[")
        lo = self.signed_number()
        self.expect_sym(",")
        hi = self.signed_number()
        self.expect_sym("]")
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
            self.fail(f"invalid box [{lo:g}, {hi:g}]", open_tok)
        return lo, hi

    def spec(self) -> MapSpec:
        self.expect_id("n")
        self.expect_sym("=")
        n = self.expect_int()
        if n < 1:
            self.fail("n must be at least 1")
        self.expect_id("m")
        self.expect_sym("=")
        m = self.expect_int()
        if m < 1:
            self.fail("m must be at least 1")
        region_tok = self.expect_id("region")
        self.expect_sym("=")
        boxes = [self.box()]
        while self.peek().kind == "id" and self.peek().text == "x":
            self.next()
            boxes.append(self.box())
        if len(boxes) != n:
            raise MapSyntaxError(
                f"region has {len(boxes)} boxes but n = {n}",
                region_tok.line, region_tok.col,
            )
        components = {}
        while self.peek().kind != "eof":
            head = self.expect_id()
            match = re.fullmatch(r"f(\d+)", head.text)
            if not match:
                self.fail(
                    f"expected a component name f1 .. f{m}, found {head.text!r}",
                    head,
                )
            index = int(match.group(1))
            if not 1 <= index <= m:
                self.fail(
                    f"component {head.text} is out of range for output "
                    f"dimension {m}", head,
                )
            if index in components:
                self.fail(f"component {head.text} is defined twice", head)
            tok = self.peek()
            if tok.kind != "assign":
                self.fail(f"expected ':=', found {tok.text or 'end of input'!r}")
            self.next()
            self.depth = 0
            components[index] = self.expr(n)
        missing = [f"f{i}" for i in range(1, m + 1) if i not in components]
        if missing:
            tok = self.peek()
            raise MapSyntaxError(
                f"missing component definitions: {', '.join(missing)}",
                tok.line, tok.col,
            )
        lo = np.array([b[0] for b in boxes])
        hi = np.array([b[1] for b in boxes])
        return MapSpec(
            in_dim=n,
            out_dim=m,
            region=SamplingRegion(lo, hi),
            components=tuple(components[i] for i in range(1, m + 1)),
        )


def parse(src: str) -> MapSpec:
    """Parse a full map definition; see the module docstring for the
    format."""
    parser = _Parser(_tokenize(src))
    return parser.spec()


def parse_expression(src: str, n: int) -> Expr:
    """Parse a standalone expression over x1 .. xn (used by tests and by
    the pretty-printer round trip)."""
    parser = _Parser(_tokenize(src))
    node = parser.expr(n)
    tok = parser.peek()
    if tok.kind != "eof":
        parser.fail(f"unexpected trailing input {tok.text!r}")
    return node


_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4


def to_source(node: Expr) -> str:
    """Render an expression; parse_expression(to_source(e), n) == e."""
    return _render(node, 0)


def _render(node: Expr, parent_prec: int) -> str:
    if isinstance(node, Const):
        text = repr(float(node.value))
        return text
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, BinOp):
        prec = _PREC_ADD if node.op in "+-" else _PREC_MUL
        left = _render(node.lhs, prec)
        right = _render(node.rhs, prec + 1)
        text = f"{left} {node.op} {right}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(node, Neg):
        inner = _render(node.operand, _PREC_NEG)
        text = f"-{inner}"
        return f"({text})" if _PREC_NEG < parent_prec else text
    if isinstance(node, Pow):
        base = _render(node.base, _PREC_POW + 1)
        text = f"{base}^{node.exponent}"
        return f"({text})" if _PREC_POW < parent_prec else text
    if isinstance(node, Call):
        return f"{node.func}({_render(node.arg, 0)})"
    raise TypeError(f"not an expression node: {node!r}")


def spec_to_source(spec: MapSpec) -> str:
    """Render a whole MapSpec back to parseable source."""
    boxes = " x ".join(
        f"[{repr(float(lo))}, {repr(float(hi))}]"
        for lo, hi in zip(spec.region.lo, spec.region.hi)
    )
    lines = [f"n = {spec.in_dim}", f"m = {spec.out_dim}", f"region = {boxes}"]
    for i, comp in enumerate(spec.components, start=1):
        lines.append(f"f{i} := {to_source(comp)}")
    return "\n".join(lines) + "\n"


def _eval_node(node: Expr, cols, bad):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return cols[node.index - 1]
    if isinstance(node, BinOp):
        lhs = _eval_node(node.lhs, cols, bad)
        rhs = _eval_node(node.rhs, cols, bad)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        mask = np.abs(rhs) <= _DIV_FLOOR
        np.logical_or(bad, mask, out=bad)
        return lhs / np.where(mask, 1.0, rhs)
    if isinstance(node, Neg):
        return -_eval_node(node.operand, cols, bad)
    if isinstance(node, Pow):
        base = _eval_node(node.base, cols, bad)
        with np.errstate(over="ignore"):
            return np.asarray(base) ** node.exponent
    if isinstance(node, Call):
        arg = _eval_node(node.arg, cols, bad)
        if node.func == "exp":
            with np.errstate(over="ignore"):
                return np.exp(arg)
        if node.func == "log":
            mask = np.asarray(arg) <= 0.0
            np.logical_or(bad, mask, out=bad)
            return np.log(np.where(mask, 1.0, arg))
        if node.func == "sqrt":
            mask = np.asarray(arg) < 0.0
            np.logical_or(bad, mask, out=bad)
            return np.sqrt(np.where(mask, 0.0, arg))
        return np.abs(arg)
    raise TypeError(f"not an expression node: {node!r}")


def _eval_batch(spec: MapSpec, X: np.ndarray):
    k = X.shape[0]
    bad = np.zeros(k, dtype=bool)
    cols = [X[:, j] for j in range(spec.in_dim)]
    out = np.empty((k, spec.out_dim))
    for j, comp in enumerate(spec.components):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            vals = np.asarray(_eval_node(comp, cols, bad), dtype=float)
        if vals.ndim == 0:
            vals = np.full(k, float(vals))
        np.logical_or(bad, ~np.isfinite(vals), out=bad)
        out[:, j] = vals
    return out, bad


def compile(spec: MapSpec) -> Oracle:  # noqa: A001 - deliberate public name
    """Turn a parsed MapSpec into an Oracle over its declared region.

    Guarded operations (division, log, sqrt) mark points as outside the
    domain instead of warning or returning junk; eval raises OutOfDomain
    there and in_domain returns False.
    """
    n = spec.in_dim

    def _eval_many(X):
        X = np.asarray(X, dtype=float)
        out, bad = _eval_batch(spec, X)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise OutOfDomain(
                f"map definition is undefined at batch row {row}"
            )
        return out

    def _eval(x):
        x = np.asarray(x, dtype=float).reshape(1, n)
        out, bad = _eval_batch(spec, x)
        if bad[0]:
            raise OutOfDomain("map definition is undefined at the point")
        return out[0]

    def _in_domain(x):
        x = np.asarray(x, dtype=float).reshape(1, n)
        _, bad = _eval_batch(spec, x)
        return not bool(bad[0])

    return Oracle(
        eval=_eval,
        in_domain=_in_domain,
        region=spec.region,
        eval_many=_eval_many,
        name="mapdsl",
    )
