"""
Finite-n distances between matrices and between eigenvalue lists: the acs
functional p, acs splittings, the optimal matching (bottleneck) distance, the
generalized matching distance d', diagonal alignment, d_N / d_R / d_H and the
p-cost transport between spectra.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from .errors import InputError
from .schemas import LimsupEstimate, MatchOutcome
from .spectral_core import as_matrix, hermitian_parts, numerical_rank, schatten_norm, singular_values

logger = logging.getLogger(__name__)


def _vectors(v, w) -> Tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=complex).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    if v.shape != w.shape or v.size == 0:
        raise InputError(f"expected two non-empty vectors of equal length, got {v.size} and {w.size}")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
        raise InputError("vectors must be finite")
    return v, w


def _pair(A, B) -> Tuple[np.ndarray, np.ndarray]:
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise InputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A, B


def pairwise_distances(v, w) -> np.ndarray:
    v, w = _vectors(v, w)
    return np.abs(np.subtract.outer(v, w))


# --- acs functional ---

def p_func(M) -> Tuple[float, int]:
    """min over i = 1..n+1 of (i-1)/n + sigma_i, with sigma_(n+1) = 0; smallest argmin."""
    s = singular_values(M)
    n = s.shape[0]
    candidates = np.arange(n + 1) / n + np.append(s, 0.0)
    i = int(np.argmin(candidates))
    return float(candidates[i]), i + 1


@dataclass(frozen=True)
class AcsSplit:
    R: np.ndarray
    N: np.ndarray
    i: int


def acs_split(M, i: Optional[int] = None) -> AcsSplit:
    """Truncated-SVD splitting M = R + N with rank(R) = i-1 and ||N|| = sigma_i."""
    a = as_matrix(M)
    n = a.shape[0]
    if i is None:
        i = p_func(a)[1]
    if not 1 <= i <= n + 1:
        raise InputError(f"split index must lie in 1..{n + 1}, got {i}")
    k = i - 1
    if k == 0:
        return AcsSplit(np.zeros_like(a), a.copy(), i)
    U, s, Vh = linalg.svd(a)
    R = (U[:, :k] * s[:k]) @ Vh[:k]
    return AcsSplit(R, a - R, i)


def d_acs_finite(A, B) -> float:
    A, B = _pair(A, B)
    return p_func(A - B)[0]


def limsup_estimate(values) -> LimsupEstimate:
    """Maximum over the largest ceil(k/2) sizes of a (n, value) trace."""
    trace = [(int(n), float(v)) for n, v in values]
    if len(trace) < 4:
        raise InputError(f"limsup estimate needs at least 4 sizes, got {len(trace)}")
    sizes = [n for n, _ in trace]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("sizes must be strictly increasing")
    window = trace[len(trace) // 2:]
    return LimsupEstimate(value=max(v for _, v in window), window_start_n=window[0][0], trace=trace)


# --- matching distances ---

class ThresholdMatcher:
    """
    Maximum matching of the threshold graph {(i, j): D[i, j] <= t} as t grows.

    Each call to augment() finds the augmenting path whose largest unmatched
    edge is smallest (a minimax Dijkstra over alternating paths), flips it,
    and returns the smallest threshold at which the matching has the new size.
    The matching of one threshold is always extended, never rebuilt.
    """

    def __init__(self, D: np.ndarray):
        self.D = D
        n = D.shape[0]
        self.row_match = np.full(n, -1, dtype=int)
        self.col_match = np.full(n, -1, dtype=int)
        self.size = 0
        self.threshold = 0.0

    @property
    def complete(self) -> bool:
        return self.size == self.D.shape[0]

    def augment(self) -> float:
        if self.complete:
            raise InputError("matching is already perfect")
        D = self.D
        free = np.flatnonzero(self.row_match < 0)
        reach = D[free]
        pred = free[np.argmin(reach, axis=0)]
        key = reach.min(axis=0)
        done = np.zeros(D.shape[1], dtype=bool)
        while True:
            j = int(np.argmin(np.where(done, np.inf, key)))
            level = float(key[j])
            done[j] = True
            r = self.col_match[j]
            if r < 0:
                break
            via = np.maximum(level, D[r])
            better = (via < key) & ~done
            key[better] = via[better]
            pred[better] = r
        while j >= 0:
            r = int(pred[j])
            j_next = int(self.row_match[r])
            self.row_match[r] = j
            self.col_match[j] = r
            j = j_next
        self.size += 1
        self.threshold = max(self.threshold, level)
        return self.threshold

    def pairs(self) -> List[Tuple[int, int]]:
        return _pairs(self.row_match)


def _pairs(match: np.ndarray) -> List[Tuple[int, int]]:
    return [(int(i), int(j)) for i, j in enumerate(match) if j >= 0]


def bottleneck_distance(v, w) -> MatchOutcome:
    """min over permutations of max_i |v_i - w_sigma(i)|."""
    matcher = ThresholdMatcher(pairwise_distances(v, w))
    while not matcher.complete:
        matcher.augment()
    t = matcher.threshold
    return MatchOutcome(value=t, matching=matcher.pairs(), cut_index=1, threshold=t)


def d_prime(v, w) -> MatchOutcome:
    """
    Generalized matching distance min_sigma min_i {(i-1)/n + |v - w_sigma|_i}.

    Equals the minimum over matching sizes m of (n - m)/n + t_m, where t_m is
    the smallest threshold whose graph {|v_i - w_j| <= t} has a matching of
    size m (t_0 = 0). The t_m are non-decreasing, so the sweep stops once
    t_m reaches the best value. Ties go to the smaller threshold.
    """
    D = pairwise_distances(v, w)
    n = D.shape[0]
    matcher = ThresholdMatcher(D)
    best, best_size, best_t, best_pairs = 1.0, 0, 0.0, []
    while not matcher.complete:
        t = matcher.augment()
        if t >= best:
            break
        value = (n - matcher.size) / n + t
        if value < best:
            best, best_size, best_t, best_pairs = value, matcher.size, t, matcher.pairs()

    return MatchOutcome(value=best, matching=best_pairs, cut_index=1 + n - best_size, threshold=best_t)


def align_diagonals(d_target, d_source) -> np.ndarray:
    """
    Permutation perm with p(diag(d_target) - P diag(d_source) P^T) = d'(d_target, d_source),
    where P D P^T has diagonal d_source[perm].
    """
    outcome = d_prime(d_target, d_source)
    return np.array(outcome.permutation(len(np.ravel(d_target))), dtype=int)


# --- d_N, d_R, d_H ---

def d_N_finite(A, B) -> float:
    A, B = _pair(A, B)
    return schatten_norm(A - B, 1) / A.shape[0]


def d_R_finite(A, B) -> float:
    A, B = _pair(A, B)
    return numerical_rank(A - B) / A.shape[0]


def d_H_finite(A, B) -> float:
    """p(Re A - Re B) + ||Im A||_1/n + ||Im B||_1/n."""
    A, B = _pair(A, B)
    n = A.shape[0]
    re_a, im_a = hermitian_parts(A)
    re_b, im_b = hermitian_parts(B)
    return p_func(re_a - re_b)[0] + schatten_norm(im_a, 1) / n + schatten_norm(im_b, 1) / n


# --- transport ---

def transport_plan(v, w, p: float = 2.0) -> Tuple[float, np.ndarray]:
    if not (p >= 1 and np.isfinite(p)):
        raise InputError(f"transport exponent must be finite and >= 1, got {p}")
    costs = pairwise_distances(v, w) ** p
    rows, cols = linear_sum_assignment(costs)
    assignment = np.empty_like(cols)
    assignment[rows] = cols
    return float(costs[rows, cols].sum() ** (1.0 / p)), assignment


def transport_cost(v, w, p: float = 2.0) -> float:
    return transport_plan(v, w, p)[0]
