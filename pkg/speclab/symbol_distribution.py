"""
Finite-n decisions for eigenvalue / singular value distributions.

The primary statistic is d' between the spectrum and a midpoint sample of the
symbol; a fixed family of hat test functions gives a second, independent gap.
Both must stay below tau(n) = max(TAU_FLOOR, TAU_SCALE * n^-TAU_EXPONENT).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Union

import numpy as np

from .config import settings
from .errors import ConfigurationError, InputError
from .glt_calculus import Domain, SeqExpr, SymbolFn, build
from .matching_metrics import d_prime
from .schemas import DistributionVerdict, ZeroVerdict
from .spectral_core import eigenvalues, singular_values

logger = logging.getLogger(__name__)

SymbolLike = Union[SymbolFn, str]
Family = Union[SeqExpr, Callable[[int], np.ndarray]]


@dataclass(frozen=True)
class EmpiricalMeasure:
    points: np.ndarray

    def __post_init__(self):
        if self.points.size < 1:
            raise InputError("empirical measure needs at least one point")
        if not np.all(np.isfinite(self.points)):
            raise InputError("empirical measure points must be finite")

    @property
    def weight(self) -> float:
        return 1.0 / self.points.size


def _as_symbol(k: SymbolLike) -> SymbolFn:
    return k if isinstance(k, SymbolFn) else SymbolFn.from_formula(str(k))


def _instantiate(family: Family, n: int) -> np.ndarray:
    if isinstance(family, SeqExpr):
        return build(family, n)
    return np.asarray(family(n), dtype=complex)


def sample_symbol(k: SymbolLike, n: int) -> EmpiricalMeasure:
    """Values of k at the midpoints of a uniform n-cell partition of its domain."""
    k = _as_symbol(k)
    if n < 1:
        raise ConfigurationError(f"sample size must be positive, got {n}")
    if k.constant or k.domain == Domain.X:
        x, t, cell = (np.arange(n) + 0.5) / n, np.zeros(n), 1.0 / n
    elif k.domain == Domain.THETA:
        x, t, cell = np.zeros(n), -np.pi + (np.arange(n) + 0.5) * 2 * np.pi / n, 2 * np.pi / n
    else:
        m = math.isqrt(n)
        if m * m != n:
            raise ConfigurationError(f"two-dimensional symbols need a square n, got {n}")
        xs = (np.arange(m) + 0.5) / m
        ts = -np.pi + (np.arange(m) + 0.5) * 2 * np.pi / m
        xg, tg = np.meshgrid(xs, ts, indexing="ij")
        x, t, cell = xg.ravel(), tg.ravel(), 1.0 / m
    return EmpiricalMeasure(k.evaluate(x, t, cell=cell))


def tau(n: int) -> float:
    return max(settings.TAU_FLOOR, settings.TAU_SCALE * float(n) ** (-settings.TAU_EXPONENT))


def hat_function_gap(a, b, grid: Optional[int] = None) -> float:
    """
    max |mean F(a) - mean F(b)| over products of 1-D hat functions centred on a
    grid x grid lattice covering the bounding box of both sets. The hat width
    follows the box diagonal, floored at HAT_MIN_DIAGONAL.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    grid = grid or settings.HAT_GRID
    both = np.concatenate([a, b])
    re_lo, re_hi = both.real.min(), both.real.max()
    im_lo, im_hi = both.imag.min(), both.imag.max()
    diagonal = math.hypot(re_hi - re_lo, im_hi - im_lo)
    if diagonal == 0:
        return 0.0
    width = 2 * max(diagonal, settings.HAT_MIN_DIAGONAL) / (grid - 1)
    cx = np.linspace(re_lo, re_hi, grid)
    cy = np.linspace(im_lo, im_hi, grid)

    def means(z):
        hx = np.maximum(0.0, 1 - np.abs(z.real[:, None] - cx[None, :]) / width)
        hy = np.maximum(0.0, 1 - np.abs(z.imag[:, None] - cy[None, :]) / width)
        return hx.T @ hy / z.size

    return float(np.max(np.abs(means(a) - means(b))))


def verdict_for_points(points, samples, n: int) -> DistributionVerdict:
    dprime_value = d_prime(points, samples).value
    gap = hat_function_gap(points, samples)
    threshold = tau(n)
    return DistributionVerdict(
        dprime_value=dprime_value,
        test_functional_gap=gap,
        threshold=threshold,
        passed=dprime_value <= threshold and gap <= threshold,
        n_used=n,
    )


def check_lambda(family: Family, k: SymbolLike, n_list,
                 eigenvalues_of: Optional[Callable[[int], np.ndarray]] = None) -> List[DistributionVerdict]:
    """eigenvalues_of(n) replaces the dense eigen solve, e.g. by a closed-form spectrum."""
    verdicts = []
    for n in n_list:
        samples = sample_symbol(k, n).points
        points = eigenvalues_of(n) if eigenvalues_of is not None else eigenvalues(_instantiate(family, n))
        verdicts.append(verdict_for_points(points, samples, n))
        logger.debug("check_lambda n=%d d'=%.4g", n, verdicts[-1].dprime_value)
    return verdicts


def check_sigma(family: Family, k: SymbolLike, n_list) -> List[DistributionVerdict]:
    k = _as_symbol(k)
    verdicts = []
    for n in n_list:
        samples = np.abs(sample_symbol(k, n).points).astype(complex)
        verdicts.append(verdict_for_points(singular_values(_instantiate(family, n)).astype(complex), samples, n))
        logger.debug("check_sigma n=%d d'=%.4g", n, verdicts[-1].dprime_value)
    return verdicts


def is_rearrangement(h: SymbolLike, k: SymbolLike, n: int):
    """(d' between the two samples <= REARRANGEMENT_TOL, the d' value)."""
    gap = d_prime(sample_symbol(h, n).points, sample_symbol(k, n).points).value
    return gap <= settings.REARRANGEMENT_TOL, gap


def zero_fraction(M, eps: Optional[float] = None) -> float:
    eps = settings.ZERO_EPS if eps is None else eps
    s = singular_values(M)
    return float(np.count_nonzero(s > eps)) / s.size


def zero_distributed_check(family: Family, n_list, eps: Optional[float] = None,
                           eta: Optional[float] = None) -> ZeroVerdict:
    eps = settings.ZERO_EPS if eps is None else eps
    eta = settings.ZERO_ETA if eta is None else eta
    fractions, ratios = [], []
    for n in n_list:
        Z = _instantiate(family, n)
        s = singular_values(Z)
        fractions.append((int(n), float(np.count_nonzero(s > eps)) / s.size))
        ratios.append((int(n), float(np.sum(s)) / s.size))
    passed = bool(fractions) and fractions[-1][1] <= eta
    return ZeroVerdict(fractions=fractions, trace_norm_ratios=ratios, passed=passed)
