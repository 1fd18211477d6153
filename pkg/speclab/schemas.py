from typing import Any, Callable, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .formulas import compile_law

# --- Generator specifications ---

class FourierSpec(BaseModel):
    """
    Source of Toeplitz coefficients: an explicit band {k: f_k} or a callable
    symbol f(theta) on [-pi, pi] integrated by an M-point uniform rule.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coefficients: Optional[Dict[int, complex]] = None
    symbol: Optional[Callable] = None
    quadrature: Optional[int] = None
    real_valued: bool = False
    label: str = ""

    @model_validator(mode="after")
    def check_source(self):
        if (self.coefficients is None) == (self.symbol is None):
            raise ValueError("exactly one of 'coefficients' or 'symbol' must be given")
        if self.quadrature is not None and self.quadrature < 1:
            raise ValueError("quadrature size must be positive")
        if self.coefficients is not None and self.real_valued:
            for k, value in self.coefficients.items():
                mirror = self.coefficients.get(-k, 0)
                if abs(complex(mirror) - complex(value).conjugate()) > 1e-12 * max(1.0, abs(value)):
                    raise ValueError(f"real-valued symbol needs f_(-{k}) = conj(f_{k})")
        return self

    @property
    def bandwidth(self) -> int:
        if self.coefficients is None:
            return 0
        return max((abs(k) for k in self.coefficients), default=0)


Structure = Literal["dense", "diagonal-real", "skew-hermitian", "rank-r corner", "rank-r random"]


class PerturbationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    structure: Structure = "dense"
    norm_kind: Literal["schatten", "operator"] = "schatten"
    p: float = 1.0
    rank: int = 1
    magnitude: Union[str, float] = "1"
    seed: int = 0
    factor: complex = 1

    @field_validator("p")
    @classmethod
    def check_p(cls, value):
        if not value >= 1:
            raise ValueError("Schatten index must be >= 1")
        return value

    @field_validator("rank")
    @classmethod
    def check_rank(cls, value):
        if value < 1:
            raise ValueError("rank must be positive")
        return value

    @field_validator("factor", mode="before")
    @classmethod
    def parse_factor(cls, value):
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
        return value

    @property
    def magnitude_law(self) -> Callable[[float], float]:
        return compile_law(str(self.magnitude))


# --- Metric outcomes ---

class MatchOutcome(BaseModel):
    value: float
    matching: List[Tuple[int, int]] = Field(default_factory=list)
    cut_index: int = 1
    threshold: float = 0.0

    def permutation(self, n: int) -> List[int]:
        """sigma with sigma[i] = matched j, unmatched rows paired in increasing order."""
        sigma = [-1] * n
        for i, j in self.matching:
            sigma[i] = j
        free_cols = sorted(set(range(n)) - {j for _, j in self.matching})
        free_rows = [i for i in range(n) if sigma[i] < 0]
        for i, j in zip(free_rows, free_cols):
            sigma[i] = j
        return sigma


class DistributionVerdict(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    dprime_value: float
    test_functional_gap: float
    threshold: float
    passed: bool = Field(alias="pass")
    n_used: int


class ZeroVerdict(BaseModel):
    fractions: List[Tuple[int, float]]
    trace_norm_ratios: List[Tuple[int, float]]
    passed: bool


class BoundReport(BaseModel):
    premise_ok: bool
    lhs: float
    rhs: float
    margin: float


class EigenBoundReport(BaseModel):
    """Per-eigenvalue form of the Jordan-aware bound."""
    premise_ok: bool
    distances: List[float]
    bound: float
    holds: bool
    worst_ratio: float


class NormalPertReport(BaseModel):
    condition: int
    p: float
    eps: float
    mismatches: int
    mismatch_fraction: float
    bound: float
    bound_holds: bool
    dprime_value: float
    threshold: float
    passed: bool
    x_plus_y_normal: Optional[bool] = None


class CampaignReport(BaseModel):
    name: str
    trials: int
    premise_count: int
    failures: int
    worst_margin: float
    passed: bool


class LimsupEstimate(BaseModel):
    value: float
    window_start_n: int
    trace: List[Tuple[int, float]]


# --- Scenario files ---

MetricName = Literal[
    "p", "d_acs", "d", "d_prime", "d_N", "d_R", "d_H",
    "check_lambda", "check_sigma", "zero_check",
    "bf", "bf2", "normal_pert", "moduli",
    "bf_campaign", "bf2_campaign", "hw_campaign",
]


class MetricEntry(BaseModel):
    name: MetricName
    label: Optional[str] = None
    target: Literal["base", "perturbed"] = "base"
    symbol: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    expect: Optional[Literal["pass", "fail"]] = None
    min_value: Optional[str] = None
    max_value: Optional[str] = None
    equals: Optional[str] = None
    rel_tol: float = 1e-9
    abs_tol: float = 0.0
    from_n: int = 0
    trend: Optional[Literal["non-increasing", "non-decreasing"]] = None

    @model_validator(mode="before")
    @classmethod
    def from_bare_name(cls, data):
        if isinstance(data, str):
            return {"name": data}
        return data

    @field_validator("min_value", "max_value", "equals", mode="before")
    @classmethod
    def bound_as_text(cls, value):
        if value is None:
            return None
        text = str(value)
        compile_law(text)
        return text

    @property
    def key(self) -> str:
        return self.label or self.name


class ScenarioConfig(BaseModel):
    id: str
    description: str = ""
    anchor: str = ""
    sequence: str
    companion: Optional[str] = None
    perturbation: Optional[PerturbationSpec] = None
    symbol: Optional[str] = None
    n_list: List[int]
    metrics: List[MetricEntry] = Field(default_factory=list)
    seed: int = 0

    @field_validator("n_list")
    @classmethod
    def check_sizes(cls, value):
        if not value:
            raise ValueError("n_list must not be empty")
        if any(n < 1 for n in value):
            raise ValueError("sizes must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("n_list must be strictly increasing")
        return value

    @model_validator(mode="after")
    def check_labels(self):
        keys = [m.key for m in self.metrics]
        duplicates = sorted({k for k in keys if keys.count(k) > 1})
        if duplicates:
            raise ValueError(f"duplicate metric labels {duplicates}; give each entry a 'label'")
        return self


class BundleConfig(BaseModel):
    id: str
    description: str = ""
    anchor: str = ""
    scenario: List[ScenarioConfig]


class ResultRecord(BaseModel):
    scenario: str
    id: str
    n: int
    metric: str
    value: Optional[float] = None
    aux: str = ""
    verdict: Literal["pass", "fail", "n/a", "error"] = "n/a"
    seconds: float = 0.0
