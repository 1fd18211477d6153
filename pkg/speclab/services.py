"""
Business logic of one experiment cell: a scenario instantiated at one size n.

The base sequence A_n comes from the scenario expression; the perturbed
sequence is B_n = A_n + Y_n with Y_n = companion + random perturbation. Each
metric yields one ResultRecord; a failing metric is logged and recorded with
verdict "error" without stopping the others.
"""
import logging
import math
import time
from functools import cached_property, lru_cache
from typing import Optional, Tuple

import numpy as np

from . import matching_metrics as mm
from . import perturbation_lab as lab
from .config import settings
from .errors import ConfigurationError, MagnitudeGuardError
from .formulas import compile_law
from .glt_calculus import DiagLeaf, JordanLeaf, SeqExpr, Sum, SymbolFn, analytic_eigenvalues, build, symbol_of
from .generators import random_perturbation
from .parser import parse_expression, parse_symbol
from .schemas import MetricEntry, ResultRecord, ScenarioConfig
from .spectral_core import eigenvalues
from .symbol_distribution import check_lambda, check_sigma, zero_distributed_check

logger = logging.getLogger(__name__)

PAIR_METRICS = {"d_acs", "d", "d_prime", "d_N", "d_R", "d_H", "bf", "bf2", "normal_pert"}
SYMBOL_METRICS = {"check_lambda", "check_sigma"}


@lru_cache(maxsize=128)
def expression(text: str) -> SeqExpr:
    return parse_expression(text)


@lru_cache(maxsize=128)
def symbol(text: str) -> SymbolFn:
    return parse_symbol(text)


def _fmt(x) -> str:
    return format(float(x), ".6g")


class Cell:
    def __init__(self, scenario: ScenarioConfig, n: int, seed: int):
        self.scenario = scenario
        self.n = n
        self.seed = seed

    @cached_property
    def base_expr(self) -> SeqExpr:
        return expression(self.scenario.sequence)

    @cached_property
    def companion_expr(self) -> Optional[SeqExpr]:
        return expression(self.scenario.companion) if self.scenario.companion else None

    @cached_property
    def A(self) -> np.ndarray:
        return build(self.base_expr, self.n)

    @cached_property
    def Y(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        if self.companion_expr is not None:
            out = out + build(self.companion_expr, self.n)
        spec = self.scenario.perturbation
        if spec is not None:
            out = out + random_perturbation(spec.model_copy(update={"seed": spec.seed + self.seed}), self.n)
        return out

    @cached_property
    def B(self) -> np.ndarray:
        return self.A + self.Y

    def matrix(self, target: str) -> np.ndarray:
        return self.A if target == "base" else self.B

    def _closed_form(self, target: str) -> Optional[np.ndarray]:
        if target == "base":
            return analytic_eigenvalues(self.base_expr, self.n)
        if self.scenario.perturbation is None and self.companion_expr is not None:
            return analytic_eigenvalues(Sum(self.base_expr, self.companion_expr), self.n)
        return None

    def eig(self, target: str, analytic: bool = False) -> np.ndarray:
        if analytic:
            values = self._closed_form(target)
            if values is None:
                raise ConfigurationError(f"no closed-form spectrum for {self.scenario.id} ({target})")
            return values
        try:
            return eigenvalues(self.matrix(target))
        except MagnitudeGuardError:
            values = self._closed_form(target)
            if values is None:
                raise
            logger.info("--- %s n=%d: using the closed-form spectrum past the magnitude guard ---",
                        self.scenario.id, self.n)
            return values

    def symbol_for(self, entry: MetricEntry) -> SymbolFn:
        text = entry.symbol or self.scenario.symbol
        if text:
            return symbol(text)
        derived = symbol_of(self.base_expr) if entry.target == "base" else None
        if derived is None:
            raise ConfigurationError(f"metric {entry.key!r} needs a symbol")
        return derived


def _jordan_spec(expr: SeqExpr, n: int) -> lab.JordanSpec:
    if isinstance(expr, JordanLeaf):
        return lab.single_block(expr.eigenvalue, n)
    if isinstance(expr, DiagLeaf):
        return lab.diagonalizable(np.diag(build(expr, n)))
    raise ConfigurationError("Bauer-Fike metrics need a (jordan ...) or (diag ...) sequence")


def _bound_verdict(report) -> Optional[bool]:
    if not report.premise_ok:
        return None
    return report.margin >= -lab.MARGIN_TOL * max(1.0, report.rhs)


def evaluate(cell: Cell, entry: MetricEntry) -> Tuple[Optional[float], str, Optional[bool]]:
    """(value, aux, natural verdict or None) for one metric."""
    name, target, params, n = entry.name, entry.target, entry.params, cell.n
    analytic = bool(params.get("analytic", False))

    if name == "p":
        value, i = mm.p_func(cell.matrix(target))
        return value, f"argmin={i}", None
    if name == "d_acs":
        return mm.d_acs_finite(cell.A, cell.B), "", None
    if name == "d":
        outcome = mm.bottleneck_distance(cell.eig("base", analytic), cell.eig("perturbed", analytic))
        return outcome.value, "", None
    if name == "d_prime":
        outcome = mm.d_prime(cell.eig("base", analytic), cell.eig("perturbed", analytic))
        return outcome.value, f"cut={outcome.cut_index};t={_fmt(outcome.threshold)}", None
    if name == "d_N":
        return mm.d_N_finite(cell.A, cell.B), "", None
    if name == "d_R":
        return mm.d_R_finite(cell.A, cell.B), "", None
    if name == "d_H":
        return mm.d_H_finite(cell.A, cell.B), "", None
    if name in SYMBOL_METRICS:
        k = cell.symbol_for(entry)
        family = lambda m: cell.matrix(target)
        if name == "check_lambda":
            verdict, = check_lambda(family, k, [n], eigenvalues_of=lambda m: cell.eig(target, analytic))
        else:
            verdict, = check_sigma(family, k, [n])
        aux = f"gap={_fmt(verdict.test_functional_gap)};tau={_fmt(verdict.threshold)}"
        return verdict.dprime_value, aux, verdict.passed
    if name == "zero_check":
        verdict = zero_distributed_check(
            lambda m: cell.matrix(target), [n],
            eps=float(params.get("eps", settings.ZERO_EPS)),
            eta=float(params.get("eta", settings.ZERO_ETA)),
        )
        (_, fraction), (_, ratio) = verdict.fractions[-1], verdict.trace_norm_ratios[-1]
        natural = verdict.passed if n == cell.scenario.n_list[-1] else None
        return fraction, f"trace_norm_ratio={_fmt(ratio)}", natural
    if name in ("bf", "bf2"):
        spec = _jordan_spec(cell.base_expr, n)
        report = lab.bf_check(spec, cell.Y) if name == "bf" else lab.bf2_check(spec, cell.Y)
        aux = f"rhs={_fmt(report.rhs)};margin={_fmt(report.margin)};premise={report.premise_ok}"
        return report.lhs, aux, _bound_verdict(report)
    if name == "normal_pert":
        report = lab.normal_pert_check(
            cell.A, cell.Y, int(params.get("condition", 2)),
            eps=float(params.get("eps", 0.1)),
            p=float(params["p"]) if "p" in params else None,
        )
        aux = (f"k={report.mismatches};k_over_n={_fmt(report.mismatch_fraction)};"
               f"bound={_fmt(report.bound)};bound_holds={report.bound_holds}")
        natural = report.passed if params.get("require_dprime", True) else report.bound_holds
        return report.dprime_value, aux, natural
    if name == "moduli":
        radius = compile_law(str(params.get("modulus", "1")))(n)
        deviation = float(np.max(np.abs(np.abs(cell.eig(target, analytic)) - radius)) / radius)
        return deviation, f"modulus={_fmt(radius)}", deviation <= float(params.get("rtol", 1e-6))
    if name in ("bf_campaign", "bf2_campaign", "hw_campaign"):
        trials = params.get("trials")
        if name == "bf_campaign":
            report = lab.bf_campaign(trials=int(trials or 500), n_max=int(params.get("n_max", 64)), seed=cell.seed)
        elif name == "bf2_campaign":
            report = lab.bf2_campaign(trials=int(trials or 200), seed=cell.seed)
        else:
            sizes = tuple(int(s) for s in params.get("sizes", (8, 32, 64)))
            report = lab.hoffman_wielandt_campaign(trials=int(trials or 500), sizes=sizes, seed=cell.seed)
        aux = f"failures={report.failures};premise={report.premise_count}/{report.trials}"
        return report.worst_margin, aux, report.passed
    raise ConfigurationError(f"unknown metric {name!r}")


def judge(entry: MetricEntry, n: int, value: Optional[float], natural: Optional[bool]) -> str:
    if n < entry.from_n:
        return "n/a"
    checks = []
    if entry.expect is not None and natural is not None:
        checks.append(natural == (entry.expect == "pass"))
    if value is not None:
        for field_name in ("min_value", "max_value", "equals"):
            text = getattr(entry, field_name)
            if text is None:
                continue
            bound = compile_law(text)(n)
            slack = max(entry.abs_tol, entry.rel_tol * abs(bound))
            if field_name == "min_value":
                checks.append(value >= bound - slack)
            elif field_name == "max_value":
                checks.append(value <= bound + slack)
            else:
                checks.append(math.isclose(value, bound, rel_tol=entry.rel_tol, abs_tol=entry.abs_tol))
    if checks:
        return "pass" if all(checks) else "fail"
    if natural is not None:
        return "pass" if natural else "fail"
    return "n/a"


def run_cell(scenario: ScenarioConfig, n: int, seed: int):
    """All metric records of one (scenario, n) cell, in metric order."""
    cell = Cell(scenario, n, seed)
    records = []
    for entry in scenario.metrics:
        started = time.perf_counter()
        try:
            value, aux, natural = evaluate(cell, entry)
            verdict = judge(entry, n, value, natural)
        except Exception as exc:
            logger.error("--- ERROR: %s/%s at n=%d: %s ---", scenario.id, entry.key, n, exc)
            value, aux, verdict = None, f"{type(exc).__name__}: {exc}", "error"
        records.append(ResultRecord(
            scenario=scenario.id, id=entry.key, n=n, metric=entry.name,
            value=value, aux=aux, verdict=verdict,
            seconds=time.perf_counter() - started,
        ))
    return records
