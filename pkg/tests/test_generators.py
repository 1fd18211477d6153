"""Tests for speclab/generators.py."""
import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from speclab import generators
from speclab.errors import ConfigurationError, InputError, MagnitudeGuardError
from speclab.matching_metrics import bottleneck_distance
from speclab.schemas import FourierSpec, PerturbationSpec
from speclab.spectral_core import eigenvalues, numerical_rank, operator_norm, schatten_norm


def tridiagonal(n, below=1.0, above=1.0):
    return below * np.eye(n, k=-1) + above * np.eye(n, k=1)


class TestToeplitz:
    def test_orientation_puts_positive_index_above_diagonal(self):
        T = generators.toeplitz(FourierSpec(coefficients={1: 1}), 4)
        np.testing.assert_array_equal(T, np.eye(4, k=1))

    def test_explicit_band(self):
        T = generators.toeplitz(FourierSpec(coefficients={-1: 2, 0: 5, 2: 1j}), 5)
        assert T[1, 0] == 2 and T[0, 0] == 5 and T[0, 2] == 1j
        assert T[2, 0] == 0

    def test_real_symbol_by_quadrature(self):
        spec = FourierSpec(symbol=lambda t: 2 * np.cos(t), real_valued=True)
        T = generators.toeplitz(spec, 6)
        np.testing.assert_allclose(T, tridiagonal(6), atol=1e-12)

    def test_complex_symbol_by_quadrature(self):
        T = generators.toeplitz(FourierSpec(symbol=lambda t: np.exp(1j * t)), 5)
        np.testing.assert_allclose(T, np.eye(5, k=1), atol=1e-12)

    def test_coefficients_indexed_from_minus_n_plus_one(self):
        c = generators.fourier_coefficients(FourierSpec(coefficients={-2: 7}), 3)
        assert c.shape == (5,)
        assert c[0] == 7

    def test_quadrature_too_small(self):
        spec = FourierSpec(symbol=np.cos, quadrature=10)
        with pytest.raises(ConfigurationError):
            generators.fourier_coefficients(spec, 8)

    def test_symbol_not_finite(self):
        with pytest.raises(InputError):
            generators.toeplitz(FourierSpec(symbol=lambda t: 1 / t), 4)

    def test_quadrature_size_policy(self, settings):
        spec = FourierSpec(symbol=np.cos)
        assert generators.quadrature_size(spec, 10) == settings.QUADRATURE_MIN
        assert generators.quadrature_size(spec, 1024) == 8 * 1024


class TestSimpleFamilies:
    def test_diag_sampling_grid(self):
        D = generators.diag_sampling(lambda x: x, 4)
        np.testing.assert_allclose(np.diag(D), [0.25, 0.5, 0.75, 1.0])

    def test_diag_sampling_rejects_poles(self):
        with pytest.raises(InputError):
            generators.diag_sampling(lambda x: 1 / (x - 0.5), 4)

    def test_jordan_block(self):
        np.testing.assert_array_equal(generators.jordan_block(3, 2), 2 * np.eye(3) + np.eye(3, k=1))

    def test_corners(self):
        assert generators.corner(4, 3)[3, 0] == 3
        assert generators.corner(4, 3, "top-right")[0, 3] == 3
        with pytest.raises(ConfigurationError):
            generators.corner(4, 1, "middle")

    def test_size_must_be_positive_integer(self):
        with pytest.raises(ConfigurationError):
            generators.jordan_block(0)
        with pytest.raises(ConfigurationError):
            generators.diag_sampling(np.sin, 2.5)


class TestCounterexamples:
    def test_third_pair_sums_to_jordan_block(self):
        X = generators.counterexample("ce3-X", 16)
        Y = generators.counterexample("ce3-Y", 16)
        np.testing.assert_array_equal(X + Y, generators.jordan_block(16))
        np.testing.assert_allclose(np.abs(eigenvalues(X)), 1.0, rtol=1e-12)

    def test_first_pair_corners(self):
        n = 8
        S = generators.counterexample("ce1-X", n) + generators.counterexample("ce1-Y", n)
        assert S[n - 1, 0] == pytest.approx(2.0 * n ** (n - 1))
        assert S[0, n - 1] == 0
        np.testing.assert_allclose(np.diag(S, 1), 2.0 / n)
        np.testing.assert_allclose(np.abs(eigenvalues(S)), 2.0, rtol=1e-6)

    def test_first_pair_magnitude_guard(self):
        with pytest.raises(MagnitudeGuardError):
            generators.counterexample("ce1-X", 200)

    def test_second_pair_corner(self):
        X = generators.counterexample("ce2-X", 5)
        assert X[4, 0] == pytest.approx(5.0 ** -5)
        assert generators.counterexample("ce2-Y", 5)[4, 0] == pytest.approx(0.2)

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError):
            generators.counterexample("ce4-X", 5)

    def test_closed_form_spectra(self):
        np.testing.assert_allclose(np.abs(generators.counterexample_eigenvalues("ce1", "X+Y", 6)), 2.0)
        np.testing.assert_array_equal(generators.counterexample_eigenvalues("ce3", "X+Y", 6), 0)
        with pytest.raises(ConfigurationError):
            generators.counterexample_eigenvalues("ce1", "X", 6)


class TestRandomPerturbation:
    def test_schatten_magnitude_law(self):
        Y = generators.random_perturbation(PerturbationSpec(magnitude="n**0.5"), 16)
        assert schatten_norm(Y, 1) == pytest.approx(4.0, rel=1e-10)

    @hsettings(max_examples=100, deadline=None)
    @given(
        spec=st.builds(
            PerturbationSpec,
            structure=st.sampled_from(["dense", "diagonal-real", "skew-hermitian", "rank-r corner", "rank-r random"]),
            norm_kind=st.sampled_from(["schatten", "operator"]),
            p=st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0]),
            rank=st.integers(1, 4),
            magnitude=st.sampled_from(["1", "n**0.5", "1/n", "n/4", "0.3"]),
            seed=st.integers(0, 2 ** 16),
            factor=st.sampled_from(["1", "-1", "1j", "0.6+0.8j"]),
        ),
        n=st.integers(4, 20),
    )
    def test_norm_follows_magnitude_law(self, spec, n):
        Y = generators.random_perturbation(spec, n)
        norm = schatten_norm(Y, spec.p) if spec.norm_kind == "schatten" else operator_norm(Y)
        assert norm == pytest.approx(spec.magnitude_law(n), rel=1e-10)

    def test_operator_magnitude(self):
        spec = PerturbationSpec(norm_kind="operator", magnitude=0.5)
        assert operator_norm(generators.random_perturbation(spec, 12)) == pytest.approx(0.5, rel=1e-10)

    def test_seeded_draws_are_reproducible(self):
        spec = PerturbationSpec(seed=4)
        np.testing.assert_array_equal(
            generators.random_perturbation(spec, 10), generators.random_perturbation(spec, 10)
        )
        other = generators.random_perturbation(spec.model_copy(update={"seed": 5}), 10)
        assert not np.allclose(other, generators.random_perturbation(spec, 10))

    def test_imaginary_diagonal(self):
        spec = PerturbationSpec(structure="diagonal-real", factor="1j", magnitude="n")
        Y = generators.random_perturbation(spec, 9)
        assert np.count_nonzero(Y - np.diag(np.diag(Y))) == 0
        np.testing.assert_allclose(Y.real, 0.0, atol=1e-15)
        assert np.sum(np.abs(np.diag(Y))) == pytest.approx(9.0)

    def test_skew_hermitian(self):
        Y = generators.random_perturbation(PerturbationSpec(structure="skew-hermitian"), 7)
        np.testing.assert_allclose(Y + Y.conj().T, 0.0, atol=1e-14)

    def test_rank_r_corner(self):
        spec = PerturbationSpec(structure="rank-r corner", rank=2)
        Y = generators.random_perturbation(spec, 8)
        assert numerical_rank(Y) == 2
        mask = np.zeros((8, 8), dtype=bool)
        mask[6:, :2] = True
        assert np.count_nonzero(Y[~mask]) == 0

    def test_rank_r_random(self):
        Y = generators.random_perturbation(PerturbationSpec(structure="rank-r random", rank=3), 10)
        assert numerical_rank(Y) == 3

    def test_rank_exceeds_size(self):
        with pytest.raises(ConfigurationError):
            generators.random_perturbation(PerturbationSpec(structure="rank-r random", rank=5), 4)

    def test_zero_magnitude(self):
        Y = generators.random_perturbation(PerturbationSpec(magnitude="0"), 5)
        assert not np.any(Y)


class TestPermutations:
    def test_random_unitary(self):
        U = generators.random_unitary(6, 11)
        np.testing.assert_allclose(U @ U.conj().T, np.eye(6), atol=1e-12)
        np.testing.assert_array_equal(U, generators.random_unitary(6, 11))

    @pytest.mark.parametrize("n", [2, 5, 8, 33])
    def test_cycle_becomes_bandwidth_two(self, n):
        perm = generators.cycle_band_permutation(n)
        assert sorted(perm) == list(range(n))
        C = generators.permute(generators.counterexample("ce3-X", n), perm)
        assert generators.bandwidth(C) <= 2
        omega = np.exp(2j * np.pi * np.arange(n) / n)
        assert bottleneck_distance(eigenvalues(C), omega).value < 1e-9

    def test_bandwidth(self):
        T = generators.toeplitz(FourierSpec(coefficients={-2: 1, 1: 1}), 6)
        assert generators.bandwidth(T) == 2
        assert generators.bandwidth(np.zeros((3, 3))) == 0
