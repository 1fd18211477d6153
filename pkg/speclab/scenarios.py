"""
Scenario bundles: loading and validating TOML configs, the bundled catalog,
running a bundle and writing results.csv / summary.json.
"""
import csv
import json
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from . import scheduler, services
from .config import settings
from .errors import ConfigurationError
from .glt_calculus import symbol_of
from .matching_metrics import limsup_estimate
from .schemas import BundleConfig, ResultRecord, ScenarioConfig

logger = logging.getLogger(__name__)

CATALOG_DIR = Path(__file__).parent / "scenarios"
CSV_COLUMNS = ["scenario", "id", "n", "metric", "value", "aux", "verdict", "seconds"]


@dataclass
class RunOutcome:
    bundle: BundleConfig
    records: List[ResultRecord]
    summary: dict
    exit_code: int


def _validate(scenario: ScenarioConfig):
    base = services.expression(scenario.sequence)
    if scenario.companion:
        services.expression(scenario.companion)
    for text in [scenario.symbol] + [m.symbol for m in scenario.metrics]:
        if text:
            services.symbol(text)
    has_pair = scenario.companion is not None or scenario.perturbation is not None
    for entry in scenario.metrics:
        if (entry.name in services.PAIR_METRICS or entry.target == "perturbed") and not has_pair:
            raise ConfigurationError(
                f"scenario {scenario.id!r}: metric {entry.key!r} needs a companion or perturbation"
            )
        if entry.name in services.SYMBOL_METRICS and not (entry.symbol or scenario.symbol):
            if entry.target != "base" or symbol_of(base) is None:
                raise ConfigurationError(f"scenario {scenario.id!r}: metric {entry.key!r} needs a symbol")


def parse_bundle(data: dict, source: str = "<config>") -> BundleConfig:
    try:
        if "scenario" in data:
            bundle = BundleConfig.model_validate(data)
        else:
            scenario = ScenarioConfig.model_validate(data)
            bundle = BundleConfig(id=scenario.id, description=scenario.description,
                                  anchor=scenario.anchor, scenario=[scenario])
    except ValidationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc
    ids = [s.id for s in bundle.scenario]
    if len(set(ids)) != len(ids):
        raise ConfigurationError(f"{source}: scenario ids must be unique")
    for scenario in bundle.scenario:
        _validate(scenario)
    return bundle


def load_bundle(path) -> BundleConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    return parse_bundle(data, str(path))


def catalog() -> List[BundleConfig]:
    bundles = [load_bundle(p) for p in sorted(CATALOG_DIR.glob("*.toml"))]
    return sorted(bundles, key=lambda b: b.id)


def list_scenarios() -> List[Tuple[str, str, str]]:
    return [(b.id, b.description, b.anchor) for b in catalog()]


def bundle_path(bundle_id: str) -> Path:
    path = CATALOG_DIR / f"{bundle_id}.toml"
    if not path.is_file():
        known = ", ".join(b for b, _, _ in list_scenarios())
        raise ConfigurationError(f"unknown scenario {bundle_id!r}; known: {known}")
    return path


# --- summary ---

def _finite(value: Optional[float]):
    if value is None or not math.isfinite(value):
        return None
    return value


def _trend_holds(values: List[float], kind: str) -> bool:
    pairs = list(zip(values, values[1:]))
    if kind == "non-increasing":
        return all(b <= a for a, b in pairs)
    return all(b >= a for a, b in pairs)


def summarize(bundle: BundleConfig, records: List[ResultRecord], seed: Optional[int]) -> dict:
    grouped: Dict[Tuple[str, str], List[ResultRecord]] = defaultdict(list)
    for record in records:
        grouped[(record.scenario, record.id)].append(record)

    counts = Counter(r.verdict for r in records)
    scenarios = {}
    trend_failures = 0
    for scenario in bundle.scenario:
        metrics = {}
        for entry in scenario.metrics:
            rows = grouped.get((scenario.id, entry.key), [])
            trace = [(r.n, r.value) for r in rows if r.value is not None and math.isfinite(r.value)]
            item = {
                "metric": entry.name,
                "trace": [[n, v] for n, v in trace],
                "verdicts": [[r.n, r.verdict] for r in rows],
                "limsup": None,
                "trend": None,
            }
            if len(trace) >= 4:
                estimate = limsup_estimate(trace)
                item["limsup"] = {"value": estimate.value, "window_start_n": estimate.window_start_n}
            if entry.trend is not None:
                holds = len(trace) == len(rows) and _trend_holds([v for _, v in trace], entry.trend)
                trend_failures += not holds
                item["trend"] = {"kind": entry.trend, "holds": holds}
            metrics[entry.key] = item
        scenarios[scenario.id] = {
            "description": scenario.description,
            "anchor": scenario.anchor,
            "n_list": [r.n for r in grouped.get((scenario.id, scenario.metrics[0].key), [])]
            if scenario.metrics else [],
            "metrics": metrics,
        }

    passed = counts.get("fail", 0) == 0 and counts.get("error", 0) == 0 and trend_failures == 0
    return {
        "bundle": bundle.id,
        "description": bundle.description,
        "anchor": bundle.anchor,
        "seed": seed,
        "counts": {k: counts.get(k, 0) for k in ("pass", "fail", "n/a", "error")},
        "trend_failures": trend_failures,
        "passed": passed,
        "scenarios": scenarios,
    }


def _clean(obj):
    if isinstance(obj, float):
        return _finite(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_results(records: List[ResultRecord], summary: dict, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow({
                "scenario": r.scenario,
                "id": r.id,
                "n": r.n,
                "metric": r.metric,
                "value": "" if r.value is None else format(r.value, ".17g"),
                "aux": r.aux,
                "verdict": r.verdict,
                "seconds": f"{r.seconds:.6f}",
            })
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(_clean(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


# --- running ---

def run_bundle(bundle: BundleConfig, out_dir=None, seed: Optional[int] = None,
               workers: Optional[int] = None, nmax: Optional[int] = None) -> RunOutcome:
    out_dir = out_dir or settings.OUT_DIR
    workers = workers or settings.WORKERS
    nmax = nmax if nmax is not None else settings.NMAX

    cells = []
    for scenario in bundle.scenario:
        cell_seed = scenario.seed if seed is None else seed
        sizes = [n for n in scenario.n_list if nmax is None or n <= nmax]
        if sizes != scenario.n_list:
            scenario = scenario.model_copy(update={"n_list": sizes})
        cells.extend((scenario, n, cell_seed) for n in sizes)

    logger.info("--- Bundle %s: %d scenario(s), %d cell(s) ---", bundle.id, len(bundle.scenario), len(cells))
    results = scheduler.run_cells(cells, services.run_cell, workers)
    records = [record for cell_records in results for record in cell_records]

    summary = summarize(bundle, records, seed)
    write_results(records, summary, out_dir)
    exit_code = 0 if summary["passed"] else 1
    logger.info("--- Bundle %s finished: %s ---", bundle.id, summary["counts"])
    return RunOutcome(bundle=bundle, records=records, summary=summary, exit_code=exit_code)


def run(config_path, **options) -> RunOutcome:
    return run_bundle(load_bundle(config_path), **options)


def reproduce(bundle_id: str, **options) -> RunOutcome:
    return run_bundle(load_bundle(bundle_path(bundle_id)), **options)
