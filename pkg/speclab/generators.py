"""
Concrete matrix families: Toeplitz, diagonal sampling, Jordan blocks, corner
perturbations, the three counterexample pairs, seeded random perturbations and
the cycle-to-band permutation.

Orientation: entry (i, j) of T_n(f) is f_(j-i), so T_n(e^{it}) is the upper
shift J_n and the corner e_n e_1^T closes it into a cycle.
"""
import logging
import math
from functools import lru_cache

import numpy as np
from scipy import linalg
from scipy.stats import unitary_group

from .config import settings
from .errors import ConfigurationError, InputError, MagnitudeGuardError
from .schemas import FourierSpec, PerturbationSpec
from .spectral_core import operator_norm, schatten_norm

logger = logging.getLogger(__name__)

COUNTEREXAMPLES = ("ce1-X", "ce1-Y", "ce2-X", "ce2-Y", "ce3-X", "ce3-Y")


def _check_size(n: int, minimum: int = 1):
    if int(n) != n or n < minimum:
        raise ConfigurationError(f"matrix size must be an integer >= {minimum}, got {n}")


def quadrature_size(spec: FourierSpec, n: int) -> int:
    return spec.quadrature or max(settings.QUADRATURE_MIN, settings.QUADRATURE_OVERSAMPLING * n)


def fourier_coefficients(spec: FourierSpec, n: int) -> np.ndarray:
    """Return f_k for k = -(n-1) .. n-1 as an array indexed by k + n - 1."""
    _check_size(n)
    ks = np.arange(-(n - 1), n)
    if spec.coefficients is not None:
        return np.array([complex(spec.coefficients.get(int(k), 0)) for k in ks])

    m = quadrature_size(spec, n)
    if m < 4 * n:
        raise ConfigurationError(f"quadrature size {m} is below 4n = {4 * n}")
    theta = 2 * np.pi * np.arange(m) / m
    theta = np.where(theta > np.pi, theta - 2 * np.pi, theta)
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(spec.symbol(theta), dtype=complex), theta.shape)
    if not np.all(np.isfinite(values)):
        raise InputError("symbol is not finite on the quadrature grid")

    if spec.real_valued or not np.any(values.imag):
        half = np.fft.rfft(values.real)[:n] / m
        coeffs = np.concatenate([np.conj(half[:0:-1]), half])
    else:
        full = np.fft.fft(values) / m
        coeffs = full[ks % m]
    return coeffs


def toeplitz(spec: FourierSpec, n: int) -> np.ndarray:
    coeffs = fourier_coefficients(spec, n)
    centre = n - 1
    # first column holds f_0, f_-1, ...; first row f_0, f_1, ...
    column = coeffs[centre::-1]
    row = coeffs[centre:]
    return linalg.toeplitz(column, row)


def diag_sampling(a, n: int) -> np.ndarray:
    _check_size(n)
    x = np.arange(1, n + 1) / n
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(a(x), dtype=complex), x.shape)
    if not np.all(np.isfinite(values)):
        raise InputError("diagonal sampling produced non-finite values")
    return np.diag(values)


def jordan_block(n: int, eigenvalue: complex = 0) -> np.ndarray:
    _check_size(n)
    return eigenvalue * np.eye(n, dtype=complex) + np.eye(n, k=1, dtype=complex)


def corner(n: int, c: complex = 1, which: str = "bottom-left") -> np.ndarray:
    _check_size(n, 2)
    out = np.zeros((n, n), dtype=complex)
    if which == "bottom-left":
        out[n - 1, 0] = c
    elif which == "top-right":
        out[0, n - 1] = c
    else:
        raise ConfigurationError(f"unknown corner {which!r}")
    return out


def _ce1_scale(n: int) -> float:
    if (n - 1) * math.log10(n) > math.log10(settings.CE1_MAGNITUDE_LIMIT):
        raise MagnitudeGuardError(f"n^(n-1) exceeds {settings.CE1_MAGNITUDE_LIMIT:g} at n={n}")
    return float(n) ** (n - 1)


def counterexample(name: str, n: int) -> np.ndarray:
    _check_size(n, 2)
    if name not in COUNTEREXAMPLES:
        raise ConfigurationError(f"unknown counterexample {name!r}; expected one of {COUNTEREXAMPLES}")
    if name == "ce1-X":
        base = toeplitz(FourierSpec(coefficients={1: 1, -1: 1}), n) / n
        return base + _ce1_scale(n) * (corner(n, 1, "top-right") + corner(n, 1))
    if name == "ce1-Y":
        # 2i sin(t) = e^{it} - e^{-it}
        base = toeplitz(FourierSpec(coefficients={1: 1, -1: -1}), n) / n
        return base + _ce1_scale(n) * (corner(n, -1, "top-right") + corner(n, 1))
    if name == "ce2-X":
        return jordan_block(n) + corner(n, (1.0 / n) ** n)
    if name == "ce2-Y":
        return corner(n, 1.0 / n)
    if name == "ce3-X":
        return jordan_block(n) + corner(n, 1)
    return corner(n, -1)


def counterexample_eigenvalues(pair: str, part: str, n: int) -> np.ndarray:
    """Closed-form spectra of the counterexample pairs (omega = n-th roots of unity)."""
    _check_size(n, 2)
    omega = np.exp(2j * np.pi * np.arange(n) / n)
    table = {
        ("ce1", "X+Y"): lambda: 2 * omega,
        ("ce2", "X"): lambda: omega / n,
        ("ce2", "X+Y"): lambda: ((1.0 / n) ** n + 1.0 / n) ** (1.0 / n) * omega,
        ("ce3", "X"): lambda: omega,
        ("ce3", "X+Y"): lambda: np.zeros(n, dtype=complex),
    }
    try:
        return table[(pair, part)]()
    except KeyError:
        raise ConfigurationError(f"no closed-form spectrum for {pair} {part}") from None


def _complex_gaussian(rng, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_perturbation(spec: PerturbationSpec, n: int) -> np.ndarray:
    _check_size(n)
    if spec.structure.startswith("rank-r") and spec.rank > n:
        raise ConfigurationError(f"rank {spec.rank} exceeds matrix size {n}")
    target = spec.magnitude_law(n)
    if target < 0:
        raise ConfigurationError(f"magnitude law is negative at n={n}")
    if target == 0:
        return np.zeros((n, n), dtype=complex)

    rng = np.random.default_rng([spec.seed, n])
    if spec.structure == "dense":
        Y = _complex_gaussian(rng, (n, n))
    elif spec.structure == "diagonal-real":
        Y = np.diag(rng.standard_normal(n)).astype(complex)
    elif spec.structure == "skew-hermitian":
        G = _complex_gaussian(rng, (n, n))
        Y = (G - G.conj().T) / 2
    elif spec.structure == "rank-r corner":
        Y = np.zeros((n, n), dtype=complex)
        Y[n - spec.rank:, :spec.rank] = _complex_gaussian(rng, (spec.rank, spec.rank))
    else:
        Y = _complex_gaussian(rng, (n, spec.rank)) @ _complex_gaussian(rng, (spec.rank, n))

    current = schatten_norm(Y, spec.p) if spec.norm_kind == "schatten" else operator_norm(Y)
    if current == 0:
        raise ConfigurationError(f"{spec.structure} draw has zero norm at n={n}")
    Y = Y * (target / current)
    if spec.factor != 1:
        Y = Y * spec.factor
    return Y


def random_unitary(n: int, seed: int = 0) -> np.ndarray:
    _check_size(n)
    rng = np.random.default_rng([seed, n])
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return np.asarray(unitary_group.rvs(n, random_state=rng), dtype=complex)


@lru_cache(maxsize=64)
def _layout(n: int) -> tuple:
    order = []
    lo, hi = 0, n - 1
    while lo <= hi:
        order.append(lo)
        if hi != lo:
            order.append(hi)
        lo, hi = lo + 1, hi - 1
    return tuple(order)


def cycle_band_permutation(n: int) -> np.ndarray:
    """Layout 1, n, 2, n-1, ... (0-based); perm[pos] is the index placed at pos."""
    _check_size(n, 2)
    return np.array(_layout(n), dtype=int)


def permute(M, perm) -> np.ndarray:
    """P M P^T for the permutation matrix with P[a, perm[a]] = 1."""
    perm = np.asarray(perm, dtype=int)
    return np.asarray(M)[np.ix_(perm, perm)]


def bandwidth(M, atol: float = 0.0) -> int:
    rows, cols = np.nonzero(np.abs(np.asarray(M)) > atol)
    if rows.size == 0:
        return 0
    return int(np.max(np.abs(rows - cols)))
