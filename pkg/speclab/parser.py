"""
Prefix notation for sequence expressions in scenario files.

    (+ (toeplitz "2*cos(t)") (scalar 0-1i (zero)))
    (* (diag "x") (toeplitz "2*cos(t)"))
    (+ (raw "ce3-X") (raw "ce3-Y"))

Heads: + * scalar toeplitz coeffs diag zero corner jordan raw re im
unitary-conj band-permute. Formulas are quoted sympy expressions in x and t.
"""
import cmath
import re
from dataclasses import dataclass
from functools import partial
from typing import List, Union

from . import generators
from .errors import ConfigurationError, ExpressionSyntaxError
from .formulas import compile_symbol
from .glt_calculus import (
    Conjugate, DiagLeaf, ImagPart, JordanLeaf, Product, RealPart, Scalar, SeqExpr,
    Sum, SymbolFn, ToeplitzLeaf, ZeroLeaf, raw,
)
from .schemas import FourierSpec

_TOKEN = re.compile(r'\s*(?:(?P<open>\()|(?P<close>\))|"(?P<string>[^"]*)"|(?P<atom>[^\s()"]+))')


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass
class _Node:
    items: List[Union["_Node", _Token]]
    line: int
    column: int


def _position(source: str, offset: int):
    line = source.count("\n", 0, offset) + 1
    column = offset - (source.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _tokenize(source: str) -> List[_Token]:
    tokens, pos = [], 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            line, column = _position(source, pos + len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExpressionSyntaxError("unterminated string or stray character", line, column)
        kind = m.lastgroup
        line, column = _position(source, m.start(kind))
        tokens.append(_Token(kind, m.group(kind), line, column))
        pos = m.end()
    return tokens


def _read(tokens: List[_Token], i: int):
    tok = tokens[i]
    if tok.kind == "close":
        raise ExpressionSyntaxError("unexpected ')'", tok.line, tok.column)
    if tok.kind != "open":
        return tok, i + 1
    node = _Node([], tok.line, tok.column)
    i += 1
    while True:
        if i >= len(tokens):
            raise ExpressionSyntaxError("missing ')'", tok.line, tok.column)
        if tokens[i].kind == "close":
            return node, i + 1
        item, i = _read(tokens, i)
        node.items.append(item)


def _number(tok) -> complex:
    if not isinstance(tok, _Token) or tok.kind != "atom":
        line, column = (tok.line, tok.column)
        raise ExpressionSyntaxError("expected a number", line, column)
    text = tok.text
    try:
        value = complex(float(text))
    except ValueError:
        try:
            value = complex(text.replace("i", "j"))
        except ValueError:
            raise ExpressionSyntaxError(f"invalid number {text!r}", tok.line, tok.column) from None
    if not cmath.isfinite(value):
        raise ExpressionSyntaxError(f"number {text!r} is not finite", tok.line, tok.column)
    return value


def _string(tok) -> _Token:
    if not isinstance(tok, _Token) or tok.kind != "string":
        raise ExpressionSyntaxError("expected a quoted string", tok.line, tok.column)
    return tok


def _formula(tok, allowed: set):
    tok = _string(tok)
    try:
        formula = compile_symbol(tok.text)
    except ConfigurationError as exc:
        raise ExpressionSyntaxError(str(exc), tok.line, tok.column) from None
    if not formula.variables <= allowed:
        raise ExpressionSyntaxError(
            f"formula {tok.text!r} may only use {sorted(allowed)}", tok.line, tok.column
        )
    return formula


def _arity(node: _Node, low: int, high: int):
    count = len(node.items) - 1
    if not low <= count <= high:
        head = node.items[0].text
        raise ExpressionSyntaxError(f"'{head}' takes {low}..{high} arguments, got {count}", node.line, node.column)


def _theta_part(formula, theta):
    return formula(0.0, theta)


def _x_part(formula, x):
    return formula(x, 0.0)


def _convert(item) -> SeqExpr:
    if isinstance(item, _Token):
        raise ExpressionSyntaxError("expected '(' starting an expression", item.line, item.column)
    if not item.items or not isinstance(item.items[0], _Token) or item.items[0].kind != "atom":
        raise ExpressionSyntaxError("expression needs a head", item.line, item.column)
    head, args = item.items[0].text, item.items[1:]

    if head in ("+", "*"):
        if len(args) < 2:
            raise ExpressionSyntaxError(f"'{head}' needs at least two operands", item.line, item.column)
        node_type = Sum if head == "+" else Product
        out = _convert(args[0])
        for arg in args[1:]:
            out = node_type(out, _convert(arg))
        return out
    if head == "scalar":
        _arity(item, 2, 2)
        return Scalar(_number(args[0]), _convert(args[1]))
    if head == "toeplitz":
        _arity(item, 1, 1)
        formula = _formula(args[0], {"t"})
        spec = FourierSpec(symbol=partial(_theta_part, formula), real_valued=formula.real_valued, label=formula.text)
        return ToeplitzLeaf(spec)
    if head == "coeffs":
        if not args:
            raise ExpressionSyntaxError("'coeffs' needs (k c) pairs", item.line, item.column)
        coefficients = {}
        for pair in args:
            if isinstance(pair, _Token) or len(pair.items) != 2:
                raise ExpressionSyntaxError("expected a (k c) pair", pair.line, pair.column)
            k = _number(pair.items[0])
            if k.imag or k.real != int(k.real):
                raise ExpressionSyntaxError("coefficient index must be an integer", pair.line, pair.column)
            coefficients[int(k.real)] = _number(pair.items[1])
        return ToeplitzLeaf(FourierSpec(coefficients=coefficients))
    if head == "diag":
        _arity(item, 1, 1)
        formula = _formula(args[0], {"x"})
        return DiagLeaf(partial(_x_part, formula), formula.text)
    if head == "zero":
        _arity(item, 0, 0)
        return ZeroLeaf()
    if head == "corner":
        _arity(item, 0, 2)
        c = _number(args[0]) if args else 1
        which = "bottom-left"
        if len(args) == 2:
            which = args[1].text if isinstance(args[1], _Token) else ""
            if which not in ("bottom-left", "top-right"):
                raise ExpressionSyntaxError("corner must be bottom-left or top-right", args[1].line, args[1].column)
        return ZeroLeaf(partial(generators.corner, c=c, which=which), f"corner {c} {which}")
    if head == "jordan":
        _arity(item, 0, 1)
        return JordanLeaf(_number(args[0]) if args else 0)
    if head == "raw":
        _arity(item, 1, 1)
        tok = _string(args[0])
        try:
            return raw(tok.text)
        except ConfigurationError as exc:
            raise ExpressionSyntaxError(str(exc), tok.line, tok.column) from None
    if head in ("re", "im"):
        _arity(item, 1, 1)
        child = _convert(args[0])
        return RealPart(child) if head == "re" else ImagPart(child)
    if head == "unitary-conj":
        _arity(item, 2, 2)
        seed = _number(args[0])
        if seed.imag or seed.real != int(seed.real):
            raise ExpressionSyntaxError("seed must be an integer", args[0].line, args[0].column)
        return Conjugate(_convert(args[1]), "unitary", int(seed.real))
    if head == "band-permute":
        _arity(item, 1, 1)
        return Conjugate(_convert(args[0]), "band")
    raise ExpressionSyntaxError(f"unknown head {head!r}", item.line, item.column)


def parse_expression(source: str) -> SeqExpr:
    tokens = _tokenize(source)
    if not tokens:
        raise ExpressionSyntaxError("empty expression", 1, 1)
    tree, end = _read(tokens, 0)
    if end != len(tokens):
        extra = tokens[end]
        raise ExpressionSyntaxError("trailing input after expression", extra.line, extra.column)
    return _convert(tree)


def parse_symbol(text: str) -> SymbolFn:
    return SymbolFn.from_formula(text)
