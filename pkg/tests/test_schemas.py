"""Formula compilation and the pydantic models."""
import numpy as np
import pytest
from pydantic import ValidationError

from speclab.errors import ConfigurationError
from speclab.formulas import compile_law, compile_symbol
from speclab.schemas import (
    DistributionVerdict, FourierSpec, MatchOutcome, MetricEntry, PerturbationSpec, ScenarioConfig,
)


class TestFormulas:
    def test_real_symbol(self):
        f = compile_symbol("2*cos(t)")
        assert f.real_valued
        assert f.variables == {"t"}
        np.testing.assert_allclose(f(0.0, [0.0, np.pi]), [2.0, -2.0])

    def test_complex_symbol(self):
        f = compile_symbol("exp(I*t)")
        assert not f.real_valued
        np.testing.assert_allclose(f(0.0, np.pi / 2), 1j, atol=1e-15)

    def test_constant_broadcasts(self):
        assert compile_symbol("3")(np.zeros(4), 0.0).shape == (4,)

    def test_imaginary_unit_aliases(self):
        assert compile_symbol("2*i").expr == compile_symbol("2*I").expr

    @pytest.mark.parametrize("text", ["y + x", "2*(x", "sin(z)"])
    def test_rejects_bad_formulas(self, text):
        with pytest.raises(ConfigurationError):
            compile_symbol(text)

    def test_law(self):
        assert compile_law("n**(-0.5)")(4) == pytest.approx(0.5)
        assert compile_law("1e-4**(1/n)")(4) == pytest.approx(0.1)

    def test_law_must_be_real(self):
        with pytest.raises(ConfigurationError):
            compile_law("I*n")(2)

    def test_law_only_uses_n(self):
        with pytest.raises(ConfigurationError):
            compile_law("x*n")


class TestFourierSpec:
    def test_needs_exactly_one_source(self):
        with pytest.raises(ValidationError):
            FourierSpec()
        with pytest.raises(ValidationError):
            FourierSpec(coefficients={0: 1}, symbol=np.cos)

    def test_real_valued_needs_conjugate_symmetry(self):
        with pytest.raises(ValidationError):
            FourierSpec(coefficients={1: 1}, real_valued=True)
        assert FourierSpec(coefficients={1: 1j, -1: -1j}, real_valued=True).bandwidth == 1


class TestPerturbationSpec:
    def test_factor_text(self):
        assert PerturbationSpec(factor="0-1i").factor == -1j
        assert PerturbationSpec(factor="1j").factor == 1j

    def test_schatten_index(self):
        with pytest.raises(ValidationError):
            PerturbationSpec(p=0.5)

    def test_magnitude_law(self):
        assert PerturbationSpec(magnitude="n**2").magnitude_law(3) == pytest.approx(9.0)
        assert PerturbationSpec(magnitude=0.25).magnitude_law(3) == pytest.approx(0.25)


class TestOutcomes:
    def test_permutation_fills_unmatched_in_order(self):
        outcome = MatchOutcome(value=0.0, matching=[(0, 2)])
        assert outcome.permutation(3) == [2, 0, 1]

    def test_verdict_alias(self):
        verdict = DistributionVerdict.model_validate(
            {"dprime_value": 0.1, "test_functional_gap": 0.0, "threshold": 1.0, "pass": True, "n_used": 4}
        )
        assert verdict.passed
        assert verdict.model_dump(by_alias=True)["pass"] is True


class TestScenarioModels:
    def test_bare_metric_name(self):
        entry = MetricEntry.model_validate("d_prime")
        assert entry.name == "d_prime" and entry.key == "d_prime"

    def test_bounds_are_compiled(self):
        assert MetricEntry(name="d", equals=0.3).equals == "0.3"
        with pytest.raises(ValidationError):
            MetricEntry(name="d", max_value="n**")

    def test_unknown_metric(self):
        with pytest.raises(ValidationError):
            MetricEntry(name="spectral_radius")

    def test_sizes_strictly_increasing(self):
        with pytest.raises(ValidationError):
            ScenarioConfig(id="s", sequence="(zero)", n_list=[8, 8])
        with pytest.raises(ValidationError):
            ScenarioConfig(id="s", sequence="(zero)", n_list=[])

    def test_metric_keys_unique(self):
        with pytest.raises(ValidationError):
            ScenarioConfig(id="s", sequence="(zero)", n_list=[4], metrics=["p", "p"])
        scenario = ScenarioConfig(
            id="s", sequence="(zero)", n_list=[4],
            metrics=["p", {"name": "p", "label": "p-again"}],
        )
        assert [m.key for m in scenario.metrics] == ["p", "p-again"]
