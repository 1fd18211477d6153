"""Tests for speclab/matching_metrics.py against brute-force permutation oracles."""
import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from speclab.errors import InputError
from speclab.generators import corner, jordan_block
from speclab.matching_metrics import (
    acs_split, align_diagonals, bottleneck_distance, d_acs_finite, d_H_finite, d_N_finite, d_prime,
    d_R_finite, limsup_estimate, p_func, pairwise_distances, ThresholdMatcher, transport_cost, transport_plan,
)
from speclab.spectral_core import numerical_rank, operator_norm, singular_values

points = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


def spectra(max_size=7):
    return st.integers(min_value=1, max_value=max_size).flatmap(
        lambda n: st.tuples(st.lists(points, min_size=n, max_size=n), st.lists(points, min_size=n, max_size=n))
    )


def triples(max_size=7):
    return st.integers(min_value=1, max_value=max_size).flatmap(
        lambda n: st.tuples(*[st.lists(points, min_size=n, max_size=n)] * 3)
    )


def permuted_gaps(v, w):
    """|v_i - w_sigma(i)| for every permutation sigma, one row per sigma."""
    v, w = np.asarray(v, dtype=complex), np.asarray(w, dtype=complex)
    perms = np.array(list(itertools.permutations(range(len(v)))))
    return np.abs(v[None, :] - w[perms])


def brute_bottleneck(v, w):
    return float(permuted_gaps(v, w).max(axis=1).min())


def brute_d_prime(v, w):
    gaps = -np.sort(-permuted_gaps(v, w), axis=1)
    n = gaps.shape[1]
    gaps = np.hstack([gaps, np.zeros((gaps.shape[0], 1))])
    return float((np.arange(n + 1) / n + gaps).min())


def brute_size_thresholds(v, w):
    """t_m = smallest threshold admitting a matching of size m, m = 1..n."""
    return np.sort(permuted_gaps(v, w), axis=1).min(axis=0)


def brute_transport(v, w, p):
    return float(((permuted_gaps(v, w) ** p).sum(axis=1).min()) ** (1.0 / p))


class TestAcsFunctional:
    def test_zero_matrix(self):
        assert p_func(np.zeros((4, 4))) == (0.0, 1)

    def test_identity(self):
        value, i = p_func(np.eye(5))
        assert value == pytest.approx(1.0)
        assert i == 1

    def test_jordan_block(self):
        value, i = p_func(jordan_block(8))
        assert value == pytest.approx(7 / 8)
        assert i == 8

    def test_split_reconstructs(self, rng):
        M = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        split = acs_split(M, 3)
        np.testing.assert_allclose(split.R + split.N, M, atol=1e-12)
        assert numerical_rank(split.R) == 2
        assert operator_norm(split.N) == pytest.approx(singular_values(M)[2])

    def test_split_at_optimum(self):
        M = np.diag([2.0, 0.01, 0.01, 0.01])
        split = acs_split(M)
        assert split.i == 2
        assert numerical_rank(split.R) == 1

    def test_split_index_range(self):
        with pytest.raises(InputError):
            acs_split(np.eye(3), 0)
        with pytest.raises(InputError):
            acs_split(np.eye(3), 5)

    def test_corner_perturbation(self):
        n = 32
        assert d_acs_finite(jordan_block(n), jordan_block(n) + corner(n)) == pytest.approx(1 / n)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            d_acs_finite(np.eye(2), np.eye(3))


class TestLimsup:
    def test_window_is_upper_half(self):
        estimate = limsup_estimate([(128, 0.4), (256, 0.3), (512, 0.25), (1024, 0.2)])
        assert estimate.value == pytest.approx(0.25)
        assert estimate.window_start_n == 512

    def test_odd_count(self):
        estimate = limsup_estimate([(8, 9.0), (16, 1.0), (32, 2.0), (64, 0.5), (128, 0.1)])
        assert estimate.value == 2.0 and estimate.window_start_n == 32

    def test_needs_four_sizes(self):
        with pytest.raises(InputError):
            limsup_estimate([(8, 1.0), (16, 1.0), (32, 1.0)])

    def test_sizes_increasing(self):
        with pytest.raises(InputError):
            limsup_estimate([(8, 1.0), (32, 1.0), (16, 1.0), (64, 1.0)])


class TestMatching:
    def test_pairwise(self):
        np.testing.assert_allclose(pairwise_distances([0, 1j], [1, 0]), [[1, 0], [np.sqrt(2), 1]])

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            bottleneck_distance([0, 1], [0])

    def test_bottleneck_simple(self):
        outcome = bottleneck_distance([0, 1, 2], [2.1, 0.2, 1.0])
        assert outcome.value == pytest.approx(0.2)
        assert sorted(outcome.matching) == [(0, 1), (1, 2), (2, 0)]

    def test_d_prime_discards_outlier(self):
        n = 10
        v = np.arange(n, dtype=float)
        w = v.copy()
        w[0] = 100.0
        outcome = d_prime(v, w)
        assert outcome.value == pytest.approx(1 / n)
        assert outcome.cut_index == 2
        assert outcome.threshold == 0.0

    def test_d_prime_full_reversal(self):
        omega = np.exp(2j * np.pi * np.arange(16) / 16)
        assert d_prime(omega, np.zeros(16)).value == pytest.approx(1.0)

    @hsettings(max_examples=60, deadline=None)
    @given(spectra())
    def test_bottleneck_matches_brute_force(self, pair):
        v, w = pair
        assert bottleneck_distance(v, w).value == pytest.approx(brute_bottleneck(v, w), abs=1e-12)

    @hsettings(max_examples=60, deadline=None)
    @given(spectra())
    def test_d_prime_matches_brute_force(self, pair):
        v, w = pair
        outcome = d_prime(v, w)
        assert outcome.value == pytest.approx(brute_d_prime(v, w), abs=1e-12)
        assert outcome.value <= min(1.0, bottleneck_distance(v, w).value) + 1e-12
        assert d_prime(w, v).value == pytest.approx(outcome.value, abs=1e-12)

    @hsettings(max_examples=40, deadline=None)
    @given(spectra(max_size=6))
    def test_aligned_diagonals_attain_d_prime(self, pair):
        v, w = np.asarray(pair[0]), np.asarray(pair[1])
        perm = align_diagonals(v, w)
        assert sorted(perm) == list(range(len(v)))
        aligned = p_func(np.diag(v - w[perm]))[0]
        assert aligned == pytest.approx(d_prime(v, w).value, abs=1e-12)

    @hsettings(max_examples=60, deadline=None)
    @given(spectra())
    def test_bottleneck_is_symmetric(self, pair):
        v, w = pair
        assert bottleneck_distance(v, w).value == bottleneck_distance(w, v).value

    @hsettings(max_examples=60, deadline=None)
    @given(triples())
    def test_triangle_inequality(self, triple):
        u, v, w = triple
        for distance in (bottleneck_distance, d_prime):
            assert distance(u, w).value <= distance(u, v).value + distance(v, w).value + 1e-12

    @hsettings(max_examples=40, deadline=None)
    @given(spectra())
    def test_matcher_thresholds_match_brute_force(self, pair):
        v, w = pair
        matcher = ThresholdMatcher(pairwise_distances(v, w))
        thresholds = []
        while not matcher.complete:
            thresholds.append(matcher.augment())
            assert len(matcher.pairs()) == matcher.size
        np.testing.assert_allclose(thresholds, brute_size_thresholds(v, w), rtol=0, atol=1e-12)

    def test_matcher_keeps_matched_pairs_within_threshold(self, rng):
        v, w = rng.standard_normal(40), rng.standard_normal(40)
        D = pairwise_distances(v, w)
        matcher = ThresholdMatcher(D)
        while not matcher.complete:
            t = matcher.augment()
            assert all(D[i, j] <= t for i, j in matcher.pairs())
        with pytest.raises(InputError):
            matcher.augment()

    @pytest.mark.slow
    def test_interval_graphs_at_large_n(self, rng):
        # real spectra against a slightly perturbed copy give interval-like threshold graphs
        n = 1024
        v = 2 * np.cos(np.pi * np.arange(1, n + 1) / (n + 1))
        w = v + 1e-3 * rng.standard_normal(n) + 1e-3j * rng.standard_normal(n)
        started = time.perf_counter()
        outcome = d_prime(v, w)
        bottleneck = bottleneck_distance(v, w)
        assert time.perf_counter() - started < 120
        assert outcome.value <= bottleneck.value <= 0.1
        assert len(bottleneck.matching) == n

    def test_align_exact_permutation(self):
        np.testing.assert_array_equal(align_diagonals([0.0, 1.0, 2.0], [2.0, 0.0, 1.0]), [1, 2, 0])


class TestMatrixDistances:
    def test_d_N(self):
        assert d_N_finite(np.zeros((2, 2)), np.diag([3.0, 4.0])) == pytest.approx(3.5)

    def test_d_R(self, rng):
        u = rng.standard_normal((8, 2))
        assert d_R_finite(np.eye(8), np.eye(8) + u @ u.T) == pytest.approx(2 / 8)

    def test_d_H_imaginary_shift(self):
        A = np.diag([1.0, 2.0, 3.0])
        assert d_H_finite(A, A + 1j * np.eye(3)) == pytest.approx(1.0)

    def test_d_H_hermitian_pair_is_d_acs(self, rng):
        G = rng.standard_normal((5, 5))
        A, B = G + G.T, np.diag(np.arange(5.0))
        assert d_H_finite(A, B) == pytest.approx(d_acs_finite(A, B))


class TestTransport:
    def test_plan(self):
        cost, assignment = transport_plan([0.0, 1.0], [1.1, 0.1], 2)
        np.testing.assert_array_equal(assignment, [1, 0])
        assert cost == pytest.approx(np.sqrt(0.02))

    def test_p_one(self):
        assert transport_cost([0.0, 2.0], [2.0, 0.5], 1) == pytest.approx(0.5)

    @pytest.mark.parametrize("p", [0.5, np.inf])
    def test_bad_exponent(self, p):
        with pytest.raises(InputError):
            transport_plan([0.0], [1.0], p)

    @pytest.mark.parametrize("p", [1, 2, 4])
    @hsettings(max_examples=30, deadline=None)
    @given(pair=spectra())
    def test_matches_brute_force(self, p, pair):
        v, w = pair
        assert transport_cost(v, w, p) == pytest.approx(brute_transport(v, w, p), rel=0, abs=1e-12)
