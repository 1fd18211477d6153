"""
Expression algebra over generator sequences with GLT symbol tracking.

A SeqExpr is an immutable tree (shared sub-trees allowed) that can be
instantiated at any size n. Toeplitz, diagonal-sampling, Jordan and
zero-distributed leaves carry symbols; raw leaves and similarity conjugations
do not, and any expression containing them has no symbol.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Callable, Optional, Tuple

import numpy as np

from . import generators
from .errors import ConfigurationError, InputError
from .formulas import compile_symbol
from .schemas import FourierSpec
from .spectral_core import hermitian_parts, is_hermitian

logger = logging.getLogger(__name__)


class Domain(str, Enum):
    X = "X"
    THETA = "THETA"
    XTHETA = "XTHETA"


def _join(a: "SymbolFn", b: "SymbolFn") -> Domain:
    if a.constant:
        return b.domain
    if b.constant or a.domain == b.domain:
        return a.domain
    return Domain.XTHETA


@dataclass(frozen=True)
class SymbolFn:
    """
    Symbol k(x, t) on [0,1], [-pi,pi] or their product. The evaluator always
    takes both coordinates and ignores the one outside its domain.
    """
    domain: Domain
    evaluator: Callable
    label: str = ""
    constant: bool = False

    @classmethod
    def from_formula(cls, text: str) -> "SymbolFn":
        formula = compile_symbol(text)
        if formula.variables == {"x", "t"}:
            domain = Domain.XTHETA
        elif formula.variables == {"t"}:
            domain = Domain.THETA
        else:
            domain = Domain.X
        return cls(domain, formula, label=text, constant=not formula.variables)

    @classmethod
    def constant_value(cls, c: complex) -> "SymbolFn":
        return cls(Domain.X, lambda x, t: np.full(np.broadcast(x, t).shape, complex(c)), str(c), True)

    @classmethod
    def of_theta(cls, f: Callable, label: str = "") -> "SymbolFn":
        return cls(Domain.THETA, lambda x, t: f(t), label)

    @classmethod
    def of_x(cls, a: Callable, label: str = "") -> "SymbolFn":
        return cls(Domain.X, lambda x, t: a(x), label)

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.evaluator(x, t), dtype=complex)
        return np.broadcast_to(out, np.broadcast(x, t).shape).copy()

    def evaluate(self, x, t, cell: float = 1e-3, attempts: int = 8) -> np.ndarray:
        """Evaluate on a grid, nudging isolated non-finite points off their abscissae."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        values = self(x, t)
        bad = ~np.isfinite(values)
        for k in range(1, attempts + 1):
            if not bad.any():
                return values
            shift = cell * 1e-3 * k
            xb = np.broadcast_to(x, values.shape)[bad] + shift
            tb = np.broadcast_to(t, values.shape)[bad] + shift
            values[bad] = self(xb, tb)
            bad = ~np.isfinite(values)
        if bad.any():
            raise InputError(f"symbol {self.label!r} is not finite at {int(bad.sum())} grid points")
        return values

    def _combine(self, other, op, label):
        if not isinstance(other, SymbolFn):
            other = SymbolFn.constant_value(other)
        f, g = self.evaluator, other.evaluator
        return SymbolFn(
            _join(self, other),
            lambda x, t: op(np.asarray(f(x, t), dtype=complex), np.asarray(g(x, t), dtype=complex)),
            label,
            self.constant and other.constant,
        )

    def __add__(self, other):
        return self._combine(other, np.add, f"({self.label})+({getattr(other, 'label', other)})")

    def __mul__(self, other):
        return self._combine(other, np.multiply, f"({self.label})*({getattr(other, 'label', other)})")

    __radd__ = __add__
    __rmul__ = __mul__

    def _unary(self, op, label):
        f = self.evaluator
        return SymbolFn(self.domain, lambda x, t: op(np.asarray(f(x, t), dtype=complex)), label, self.constant)

    def real(self):
        return self._unary(np.real, f"re({self.label})")

    def imag(self):
        return self._unary(np.imag, f"im({self.label})")

    def modulus(self):
        return self._unary(np.abs, f"|{self.label}|")


# --- Expression nodes ---

class SeqExpr:
    def __add__(self, other):
        return Sum(self, other)

    def __mul__(self, other):
        if isinstance(other, SeqExpr):
            return Product(self, other)
        return Scalar(complex(other), self)

    def __rmul__(self, other):
        return Scalar(complex(other), self)


@dataclass(frozen=True, eq=False)
class ToeplitzLeaf(SeqExpr):
    spec: FourierSpec


@dataclass(frozen=True, eq=False)
class DiagLeaf(SeqExpr):
    a: Callable
    label: str = ""


def default_zero_generator(n: int) -> np.ndarray:
    """Identity block of size floor(sqrt n) in the bottom-left corner."""
    r = max(1, int(np.sqrt(n)))
    out = np.zeros((n, n), dtype=complex)
    out[n - r:, :r] = np.eye(r)
    return out


@dataclass(frozen=True, eq=False)
class ZeroLeaf(SeqExpr):
    generator: Callable[[int], np.ndarray] = default_zero_generator
    label: str = "zero"


@dataclass(frozen=True, eq=False)
class RawLeaf(SeqExpr):
    generator: Callable[[int], np.ndarray]
    label: str = "raw"


@dataclass(frozen=True, eq=False)
class JordanLeaf(SeqExpr):
    eigenvalue: complex = 0


@dataclass(frozen=True, eq=False)
class Sum(SeqExpr):
    left: SeqExpr
    right: SeqExpr


@dataclass(frozen=True, eq=False)
class Product(SeqExpr):
    left: SeqExpr
    right: SeqExpr


@dataclass(frozen=True, eq=False)
class Scalar(SeqExpr):
    value: complex
    child: SeqExpr


@dataclass(frozen=True, eq=False)
class RealPart(SeqExpr):
    child: SeqExpr


@dataclass(frozen=True, eq=False)
class ImagPart(SeqExpr):
    child: SeqExpr


@dataclass(frozen=True, eq=False)
class Conjugate(SeqExpr):
    """Similarity Q A Q^-1 by a seeded Haar unitary or the cycle-to-band permutation."""
    child: SeqExpr
    kind: str = "unitary"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("unitary", "band"):
            raise ConfigurationError(f"unknown conjugation kind {self.kind!r}")


def raw(name: str) -> RawLeaf:
    """Leaf for one of the named counterexample matrices."""
    if name not in generators.COUNTEREXAMPLES:
        raise ConfigurationError(f"unknown raw matrix {name!r}")
    return RawLeaf(partial(generators.counterexample, name), name)


def build(e: SeqExpr, n: int, _memo: Optional[dict] = None) -> np.ndarray:
    memo = {} if _memo is None else _memo
    key = id(e)
    if key in memo:
        return memo[key]

    if isinstance(e, ToeplitzLeaf):
        out = generators.toeplitz(e.spec, n)
    elif isinstance(e, DiagLeaf):
        out = generators.diag_sampling(e.a, n)
    elif isinstance(e, (ZeroLeaf, RawLeaf)):
        out = np.asarray(e.generator(n), dtype=complex)
        if out.shape != (n, n):
            raise InputError(f"leaf {e.label!r} produced shape {out.shape} at n={n}")
    elif isinstance(e, JordanLeaf):
        out = generators.jordan_block(n, e.eigenvalue)
    elif isinstance(e, Sum):
        out = build(e.left, n, memo) + build(e.right, n, memo)
    elif isinstance(e, Product):
        out = build(e.left, n, memo) @ build(e.right, n, memo)
    elif isinstance(e, Scalar):
        out = e.value * build(e.child, n, memo)
    elif isinstance(e, RealPart):
        out = hermitian_parts(build(e.child, n, memo))[0]
    elif isinstance(e, ImagPart):
        out = hermitian_parts(build(e.child, n, memo))[1]
    elif isinstance(e, Conjugate):
        inner = build(e.child, n, memo)
        if e.kind == "band":
            out = generators.permute(inner, generators.cycle_band_permutation(n))
        else:
            Q = generators.random_unitary(n, e.seed)
            out = Q @ inner @ Q.conj().T
    else:
        raise ConfigurationError(f"unknown expression node {type(e).__name__}")

    memo[key] = out
    return out


def _toeplitz_symbol(spec: FourierSpec) -> SymbolFn:
    if spec.symbol is not None:
        return SymbolFn.of_theta(spec.symbol, spec.label)
    coeffs = {int(k): complex(c) for k, c in spec.coefficients.items()}

    def trig(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for k, c in coeffs.items():
            out = out + c * np.exp(1j * k * t)
        return out

    symbol = SymbolFn.of_theta(trig, spec.label or "trig")
    return symbol.real() if spec.real_valued else symbol


def symbol_of(e: SeqExpr) -> Optional[SymbolFn]:
    if isinstance(e, ToeplitzLeaf):
        return _toeplitz_symbol(e.spec)
    if isinstance(e, DiagLeaf):
        return SymbolFn.of_x(e.a, e.label)
    if isinstance(e, ZeroLeaf):
        return SymbolFn.constant_value(0)
    if isinstance(e, JordanLeaf):
        lam = complex(e.eigenvalue)
        return SymbolFn.of_theta(lambda t: lam + np.exp(1j * np.asarray(t)), f"{lam}+e^(it)")
    if isinstance(e, (RawLeaf, Conjugate)):
        return None
    if isinstance(e, (Sum, Product)):
        left, right = symbol_of(e.left), symbol_of(e.right)
        if left is None or right is None:
            return None
        return left + right if isinstance(e, Sum) else left * right
    if isinstance(e, Scalar):
        child = symbol_of(e.child)
        return None if child is None else child * e.value
    if isinstance(e, (RealPart, ImagPart)):
        child = symbol_of(e.child)
        if child is None:
            return None
        return child.real() if isinstance(e, RealPart) else child.imag()
    raise ConfigurationError(f"unknown expression node {type(e).__name__}")


def is_hermitian_seq(e: SeqExpr, sizes) -> bool:
    return all(is_hermitian(build(e, int(n))) for n in sizes)


def raw_labels(e: SeqExpr) -> Optional[Tuple[str, ...]]:
    """Labels of a sum made only of raw leaves, else None."""
    if isinstance(e, RawLeaf):
        return (e.label,)
    if isinstance(e, Sum):
        left, right = raw_labels(e.left), raw_labels(e.right)
        if left is not None and right is not None:
            return left + right
    return None


_ANALYTIC = {
    ("ce1-X", "ce1-Y"): ("ce1", "X+Y"),
    ("ce2-X",): ("ce2", "X"),
    ("ce2-X", "ce2-Y"): ("ce2", "X+Y"),
    ("ce3-X",): ("ce3", "X"),
    ("ce3-X", "ce3-Y"): ("ce3", "X+Y"),
}


def analytic_eigenvalues(e: SeqExpr, n: int) -> Optional[np.ndarray]:
    """Closed-form eigenvalues when e is one of the counterexample assemblies."""
    labels = raw_labels(e)
    if labels is None:
        return None
    match = _ANALYTIC.get(tuple(sorted(labels)))
    if match is None:
        return None
    return generators.counterexample_eigenvalues(*match, n)
