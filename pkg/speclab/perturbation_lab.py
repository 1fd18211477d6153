"""
Executable checks of Bauer-Fike type eigenvalue bounds, the explicit
perturbation radius for a target matching distance, and eigenvalue stability
of normal sequences under small Schatten-norm perturbations.

Jordan data is never recovered from a numeric matrix: a JordanSpec is built
alongside the matrix it describes.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from tqdm import tqdm

from . import generators
from .config import settings
from .errors import ConfigurationError, InputError
from .matching_metrics import bottleneck_distance, d_prime, transport_plan
from .schemas import BoundReport, CampaignReport, EigenBoundReport, NormalPertReport
from .spectral_core import as_matrix, cond2, eigenvalues, is_normal, operator_norm, schatten_norm
from .symbol_distribution import tau, zero_fraction

logger = logging.getLogger(__name__)

MARGIN_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class JordanSpec:
    """A = V J V^-1 with J block diagonal; blocks are (eigenvalue, size) pairs."""
    blocks: Tuple[Tuple[complex, int], ...]
    V: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.blocks:
            raise ConfigurationError("a Jordan specification needs at least one block")
        if any(size < 1 for _, size in self.blocks):
            raise ConfigurationError("Jordan block sizes must be positive")
        if self.V is not None and np.shape(self.V) != (self.n, self.n):
            raise ConfigurationError(f"similarity must be {self.n}x{self.n}, got {np.shape(self.V)}")

    @property
    def n(self) -> int:
        return sum(size for _, size in self.blocks)

    @property
    def m(self) -> int:
        return max(size for _, size in self.blocks)

    @property
    def delta(self) -> float:
        """Half the smallest gap between distinct eigenvalues (+inf if there is one)."""
        values = np.unique(np.array([complex(lam) for lam, _ in self.blocks]))
        if values.size < 2:
            return float("inf")
        gaps = np.abs(np.subtract.outer(values, values))
        return float(0.5 * gaps[gaps > 0].min())

    @property
    def kappa(self) -> float:
        return 1.0 if self.V is None else cond2(self.V)

    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([np.full(size, complex(lam)) for lam, size in self.blocks])

    def jordan(self) -> np.ndarray:
        return linalg.block_diag(*(generators.jordan_block(size, lam) for lam, size in self.blocks))

    def matrix(self) -> np.ndarray:
        J = self.jordan()
        if self.V is None:
            return J
        V = as_matrix(self.V)
        # V J V^-1 without forming the inverse
        return linalg.solve(V.T, (V @ J).T).T


def single_block(eigenvalue: complex, n: int) -> JordanSpec:
    return JordanSpec(((eigenvalue, n),))


def diagonalizable(eigs, V=None) -> JordanSpec:
    return JordanSpec(tuple((complex(lam), 1) for lam in np.ravel(eigs)), V)


def from_blocks(blocks, V=None) -> JordanSpec:
    return JordanSpec(tuple((complex(lam), int(size)) for lam, size in blocks), V)


# --- Bauer-Fike family ---

def _bound_report(spec: JordanSpec, N, m: int) -> BoundReport:
    N = as_matrix(N)
    if N.shape[0] != spec.n:
        raise InputError(f"perturbation is {N.shape[0]}x{N.shape[0]}, matrix is {spec.n}x{spec.n}")
    kappa = spec.kappa
    norm = operator_norm(N)
    premise = norm < spec.delta ** m / (2 ** (m - 1) * kappa)
    lhs = bottleneck_distance(spec.eigenvalues(), eigenvalues(spec.matrix() + N)).value
    rhs = (2 ** (m - 1) * kappa * norm) ** (1.0 / m)
    return BoundReport(premise_ok=bool(premise), lhs=lhs, rhs=rhs, margin=rhs - lhs)


def bf_check(spec: JordanSpec, N) -> BoundReport:
    if spec.m != 1:
        raise ConfigurationError("bf_check needs a diagonalizable specification")
    return _bound_report(spec, N, 1)


def bf2_check(spec: JordanSpec, N) -> BoundReport:
    return _bound_report(spec, N, spec.m)


def bf_gen_check(spec: JordanSpec, N) -> EigenBoundReport:
    """Every eigenvalue mu of A+N satisfies dist(mu, spec(A))^m <= 2^(m-1) k2(V) ||N||."""
    N = as_matrix(N)
    m, kappa = spec.m, spec.kappa
    norm = operator_norm(N)
    lam = spec.eigenvalues()
    mu = eigenvalues(spec.matrix() + N)
    distances = np.abs(np.subtract.outer(mu, lam)).min(axis=1)
    bound = 2 ** (m - 1) * kappa * norm
    powered = distances ** m
    if bound > 0:
        worst = float(np.max(powered) / bound)
    else:
        worst = 0.0 if np.max(powered) == 0 else float("inf")
    return EigenBoundReport(
        premise_ok=bool(kappa * norm <= 2.0 ** (1 - m)),
        distances=distances.tolist(),
        bound=bound,
        holds=bool(np.all(powered <= bound * (1 + MARGIN_TOL) + MARGIN_TOL)),
        worst_ratio=worst,
    )


def pert_delta(spec: JordanSpec, eps: float) -> float:
    """Radius delta with ||N|| <= delta  =>  d(A, A+N) <= eps."""
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    m = spec.m
    return min(spec.delta ** m, eps ** m) / (2 ** (m - 1) * spec.kappa)


def _scaled_noise(rng, n: int, norm: float) -> np.ndarray:
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    return G * (norm / operator_norm(G))


def verify_pert_delta(spec: JordanSpec, eps: float, trials: int = 100, seed: int = 0) -> CampaignReport:
    delta = pert_delta(spec, eps)
    A = spec.matrix()
    lam = spec.eigenvalues()
    failures, worst = 0, float("inf")
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        N = _scaled_noise(rng, spec.n, delta * rng.uniform(0.5, 1.0))
        d = bottleneck_distance(lam, eigenvalues(A + N)).value
        worst = min(worst, eps - d)
        failures += d > eps * (1 + MARGIN_TOL)
    return CampaignReport(
        name="pert_delta", trials=trials, premise_count=trials,
        failures=failures, worst_margin=worst, passed=failures == 0,
    )


def perturbation_sequence(spec_at: Callable[[int], JordanSpec], n_list: Sequence[int], seed: int = 0) -> CampaignReport:
    """Choose eps_n = 1/n, perturb at the matching radius and confirm d(A_n, A_n+N_n) <= eps_n."""
    failures, worst = 0, float("inf")
    for n in n_list:
        spec = spec_at(int(n))
        eps = 1.0 / n
        rng = np.random.default_rng([seed, int(n)])
        N = _scaled_noise(rng, spec.n, pert_delta(spec, eps))
        d = bottleneck_distance(spec.eigenvalues(), eigenvalues(spec.matrix() + N)).value
        worst = min(worst, eps - d)
        failures += d > eps * (1 + MARGIN_TOL)
    return CampaignReport(
        name="pert_sequence", trials=len(n_list), premise_count=len(n_list),
        failures=failures, worst_margin=worst, passed=failures == 0,
    )


# --- normal perturbations ---

def normal_pert_check(X, Y, condition: int, eps: float = 0.1, p: Optional[float] = None) -> NormalPertReport:
    """
    Count eigenvalue mismatches larger than eps under the optimal p-cost matching
    of eig(X) and eig(X+Y) and compare with the bound the condition implies.

    condition 1: Y zero-distributed and X+Y normal (bound is ZERO_ETA on the fraction of sigma_i(Y) > eps)
    condition 2: 1 <= p <= 2,  k/n <= (||Y||_2 / eps)^2
    condition 3: p >= 2,       k/n <= (||Y||_p / (eps n^(2/p-1)))^p
    condition 4: p = inf,      max mismatch <= n ||Y||
    """
    X, Y = as_matrix(X), as_matrix(Y)
    if X.shape != Y.shape:
        raise InputError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    if not is_normal(X):
        raise InputError("X must be normal")
    n = X.shape[0]
    lam = eigenvalues(X)
    mu = eigenvalues(X + Y)
    normal_sum = None

    if condition == 1:
        p = float("nan")
        fraction = zero_fraction(Y, eps)
        normal_sum = is_normal(X + Y)
        _, sigma = transport_plan(lam, mu, 2)
        mismatches = int(np.count_nonzero(np.abs(lam - mu[sigma]) > eps))
        bound = settings.ZERO_ETA
        bound_holds = fraction <= bound and normal_sum
    elif condition in (2, 3):
        if condition == 2:
            p = 2.0 if p is None else p
            if not 1 <= p <= 2:
                raise ConfigurationError("condition 2 needs 1 <= p <= 2")
            cost_p = 2.0
            bound = (schatten_norm(Y, 2) / eps) ** 2
        else:
            p = 4.0 if p is None else p
            if not (2 <= p < np.inf):
                raise ConfigurationError("condition 3 needs 2 <= p < inf")
            cost_p = p
            bound = (schatten_norm(Y, p) / (eps * n ** (2.0 / p - 1))) ** p
        _, sigma = transport_plan(lam, mu, cost_p)
        mismatches = int(np.count_nonzero(np.abs(lam - mu[sigma]) > eps))
        bound_holds = mismatches / n <= bound * (1 + MARGIN_TOL)
    elif condition == 4:
        p = float("inf")
        outcome = bottleneck_distance(lam, mu)
        pairs = np.array(outcome.matching)
        mismatches = int(np.count_nonzero(np.abs(lam[pairs[:, 0]] - mu[pairs[:, 1]]) > eps))
        bound = n * operator_norm(Y)
        bound_holds = outcome.value <= bound * (1 + MARGIN_TOL) + MARGIN_TOL
    else:
        raise ConfigurationError(f"condition must be 1, 2, 3 or 4, got {condition}")

    dprime_value = d_prime(lam, mu).value
    threshold = tau(n)
    return NormalPertReport(
        condition=condition, p=p, eps=eps,
        mismatches=mismatches, mismatch_fraction=mismatches / n,
        bound=bound, bound_holds=bool(bound_holds),
        dprime_value=dprime_value, threshold=threshold,
        passed=bool(bound_holds) and dprime_value <= threshold,
        x_plus_y_normal=normal_sum,
    )


def hoffman_wielandt_check(A, B) -> BoundReport:
    """min_sigma (sum |lambda_i - mu_sigma(i)|^2)^(1/2) <= sqrt(n) ||A - B||_2 for normal A."""
    A, B = as_matrix(A), as_matrix(B)
    lhs = transport_plan(eigenvalues(A), eigenvalues(B), 2)[0]
    rhs = np.sqrt(A.shape[0]) * schatten_norm(A - B, 2)
    return BoundReport(premise_ok=is_normal(A), lhs=lhs, rhs=float(rhs), margin=float(rhs - lhs))


# --- randomized campaigns ---

def _conditioned(rng, n: int, cond_max: float) -> np.ndarray:
    seeds = rng.integers(0, 2**31, size=2)
    c = rng.uniform(1.0, cond_max)
    U = generators.random_unitary(n, int(seeds[0]))
    W = generators.random_unitary(n, int(seeds[1]))
    return (U * np.linspace(1.0, c, n)) @ W


def _normal(rng, n: int) -> np.ndarray:
    Q = generators.random_unitary(n, int(rng.integers(0, 2**31)))
    d = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return (Q * d) @ Q.conj().T


def _campaign(name: str, trials: int, run_trial) -> CampaignReport:
    premise_count, failures, worst = 0, 0, float("inf")
    for trial in tqdm(range(trials), desc=name, disable=not settings.SHOW_PROGRESS, leave=False):
        report = run_trial(trial)
        if not report.premise_ok:
            continue
        premise_count += 1
        worst = min(worst, report.margin)
        if report.margin < -MARGIN_TOL * max(1.0, report.rhs):
            failures += 1
            logger.warning("--- %s trial %d violates the bound: margin %.3e ---", name, trial, report.margin)
    return CampaignReport(
        name=name, trials=trials, premise_count=premise_count,
        failures=failures, worst_margin=worst, passed=failures == 0,
    )


def bf_campaign(trials: int = 500, n_max: int = 64, seed: int = 0, cond_max: float = 10.0) -> CampaignReport:
    def trial(k):
        rng = np.random.default_rng([seed, k])
        n = int(rng.integers(2, n_max + 1))
        eigs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        spec = diagonalizable(eigs, _conditioned(rng, n, cond_max))
        N = _scaled_noise(rng, n, rng.uniform(0.05, 0.95) * spec.delta / spec.kappa)
        return bf_check(spec, N)

    return _campaign("bf", trials, trial)


def bf2_campaign(trials: int = 200, seed: int = 0, max_block: int = 4, cond_max: float = 10.0) -> CampaignReport:
    """Two Jordan blocks at 0 and 10; ||N|| keeps the bound below one."""
    def trial(k):
        rng = np.random.default_rng([seed, k])
        sizes = rng.integers(1, max_block + 1, size=2)
        n = int(sizes.sum())
        spec = from_blocks([(0.0, sizes[0]), (10.0, sizes[1])], _conditioned(rng, n, cond_max))
        m = spec.m
        radius = min(spec.delta ** m, 1.0) / (2 ** (m - 1) * spec.kappa)
        N = _scaled_noise(rng, n, rng.uniform(0.05, 0.95) * radius)
        return bf2_check(spec, N)

    return _campaign("bf2", trials, trial)


def hoffman_wielandt_campaign(trials: int = 500, sizes: Sequence[int] = (8, 32, 64), seed: int = 0) -> CampaignReport:
    def trial(k):
        rng = np.random.default_rng([seed, k])
        n = int(sizes[k % len(sizes)])
        return hoffman_wielandt_check(_normal(rng, n), _normal(rng, n))

    return _campaign("hoffman_wielandt", trials, trial)
