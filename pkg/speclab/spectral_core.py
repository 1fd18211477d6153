"""
Dense spectral computations shared by every other module.

All routines accept anything numpy can turn into a square complex array and
never modify their input.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .config import settings
from .errors import InputError, SingularMatrixError, SpectrumError

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (unordered) and non-increasing singular values of one matrix."""
    eigenvalues: np.ndarray
    singular_values: np.ndarray

    @property
    def n(self) -> int:
        return self.singular_values.shape[0]


def as_matrix(M) -> np.ndarray:
    a = np.asarray(M, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def singular_values(M) -> np.ndarray:
    a = as_matrix(M)
    try:
        s = linalg.svdvals(a, check_finite=False)
    except linalg.LinAlgError:
        # gesdd occasionally fails where the slower QR-iteration driver succeeds
        logger.warning("--- gesdd did not converge for n=%d, retrying with gesvd ---", a.shape[0])
        try:
            s = linalg.svd(a, compute_uv=False, lapack_driver="gesvd", check_finite=False)
        except linalg.LinAlgError as exc:
            raise SpectrumError(f"singular value solver failed: {exc}") from exc
    return np.sort(s)[::-1]


def eigenvalues(M) -> np.ndarray:
    a = as_matrix(M)
    try:
        if np.array_equal(a, a.conj().T):
            w = linalg.eigvalsh(a, check_finite=False).astype(complex)
        else:
            w = linalg.eigvals(a, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SpectrumError(f"eigenvalue solver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise SpectrumError("eigenvalue solver returned non-finite values")
    return w


def spectrum(M) -> Spectrum:
    a = as_matrix(M)
    return Spectrum(eigenvalues=eigenvalues(a), singular_values=singular_values(a))


def operator_norm(M) -> float:
    return float(singular_values(M)[0])


def tol(M) -> float:
    """Comparison tolerance TOL_FACTOR * n * eps * ||M||_2."""
    a = as_matrix(M)
    return settings.TOL_FACTOR * a.shape[0] * EPS * operator_norm(a)


def schatten_norm(M, p: float = 1.0) -> float:
    if not p >= 1:
        raise InputError(f"Schatten index must be >= 1, got {p}")
    s = singular_values(M)
    if np.isinf(p):
        return float(s[0])
    if s[0] == 0:
        return 0.0
    # scale by sigma_1 so large p does not overflow
    return float(s[0] * np.sum((s / s[0]) ** p) ** (1.0 / p))


def cond2(V) -> float:
    s = singular_values(V)
    n = s.shape[0]
    if s[0] == 0 or s[-1] <= n * EPS * s[0]:
        raise SingularMatrixError(f"matrix is numerically singular (sigma_n={s[-1]:.3e})")
    return float(s[0] / s[-1])


def hermitian_parts(M):
    """Return (Re M, Im M) with Re M = (M + M^H)/2 and Im M = (M - M^H)/(2i)."""
    a = as_matrix(M)
    ah = a.conj().T
    return (a + ah) / 2, (a - ah) / 2j


def numerical_rank(M) -> int:
    s = singular_values(M)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > s.shape[0] * EPS * s[0]))


def is_hermitian(M) -> bool:
    a = as_matrix(M)
    return bool(np.linalg.norm(a - a.conj().T) <= tol(a))


def is_normal(M) -> bool:
    a = as_matrix(M)
    ah = a.conj().T
    norm = operator_norm(a)
    return bool(np.linalg.norm(a @ ah - ah @ a) <= settings.TOL_FACTOR * a.shape[0] * EPS * norm * norm)
