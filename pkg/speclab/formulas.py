"""
Formula strings used in scenario files, compiled with sympy.

Symbols are written in the variables ``x`` (space, [0, 1]) and ``t`` (frequency,
[-pi, pi]); growth laws and expectation bounds are written in ``n``.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr
from tokenize import TokenError

from .errors import ConfigurationError

X = sympy.Symbol("x", real=True)
T = sympy.Symbol("t", real=True)
N = sympy.Symbol("n", positive=True)

_LOCALS = {"x": X, "t": T, "n": N, "i": sympy.I, "j": sympy.I}


def _parse(text: str, allowed: set) -> sympy.Expr:
    try:
        expr = parse_expr(str(text), local_dict=dict(_LOCALS))
    except (SyntaxError, TokenError, TypeError, sympy.SympifyError) as exc:
        raise ConfigurationError(f"cannot parse formula {text!r}: {exc}") from exc
    if not isinstance(expr, sympy.Expr):
        raise ConfigurationError(f"formula {text!r} is not an expression")
    unknown = {s.name for s in expr.free_symbols} - allowed
    if unknown:
        raise ConfigurationError(
            f"formula {text!r} uses unknown variables {sorted(unknown)}; allowed: {sorted(allowed)}"
        )
    return expr


@dataclass(frozen=True)
class Formula:
    text: str
    expr: sympy.Expr
    variables: frozenset
    real_valued: bool
    func: Callable

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.func(x, t), dtype=complex)
        return np.broadcast_to(out, np.broadcast(x, t).shape).copy()


@lru_cache(maxsize=256)
def compile_symbol(text: str) -> Formula:
    expr = _parse(text, {"x", "t"})
    return Formula(
        text=str(text),
        expr=expr,
        variables=frozenset(s.name for s in expr.free_symbols),
        real_valued=expr.is_real is True,
        func=sympy.lambdify((X, T), expr, modules="numpy"),
    )


@lru_cache(maxsize=256)
def compile_law(text) -> Callable[[float], float]:
    """Compile a formula in n into a real-valued function of n."""
    expr = _parse(text, {"n"})
    func = sympy.lambdify((N,), expr, modules="numpy")

    def law(n: float) -> float:
        with np.errstate(all="ignore"):
            value = complex(func(float(n)))
        if abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
            raise ConfigurationError(f"law {text!r} is not real at n={n}")
        return float(value.real)

    return law
