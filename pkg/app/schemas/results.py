from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from app.models.coding import SimResult
from app.models.region import SearchResult, TransformReport


# 速率分割報表
class InequalityCheckExport(BaseModel):
    name: str
    slack: float
    passed: bool


class TransformExport(BaseModel):
    input: Dict[str, float]
    category: int = Field(..., ge=1, le=6, description="分類 1..6")
    output: Optional[Dict[str, float]] = None
    verified: bool
    checks: List[InequalityCheckExport]

    @classmethod
    def from_domain(cls, report: TransformReport) -> "TransformExport":
        return cls(
            input=report.input.as_dict(),
            category=int(report.category),
            output=report.output.as_dict() if report.output is not None else None,
            verified=report.verified,
            checks=[
                InequalityCheckExport(name=c.name, slack=c.slack, passed=c.passed) for c in report.checks
            ],
        )


class SplitExport(BaseModel):
    mi: Dict[str, float]
    reports: List[TransformExport]
    all_verified: bool


# 反例搜尋
class CounterexampleExport(BaseModel):
    found: bool
    seed: int
    trials: int
    trial: Optional[int] = None
    counterexample: Optional[Dict[str, float]] = None
    in_tekin_region: Optional[bool] = None
    in_theorem_region: Optional[bool] = None
    mi: Optional[Dict[str, float]] = None

    @classmethod
    def from_domain(cls, result: Optional[SearchResult], seed: int, trials: int) -> "CounterexampleExport":
        if result is None:
            return cls(found=False, seed=seed, trials=trials)
        return cls(
            found=True,
            seed=seed,
            trials=trials,
            trial=result.trial,
            counterexample=result.counterexample.as_dict(),
            in_tekin_region=result.in_tekin_region,
            in_theorem_region=result.in_theorem_region,
            mi=result.bundle.as_floats(),
        )


# 模擬結果
class SimulationRow(BaseModel):
    seed: int
    n: int
    trials: int
    errors: int
    error_probability: float
    leakage_rate: Optional[float] = None
    leakage_user1: Optional[float] = None
    leakage_user2: Optional[float] = None
    superadditivity_margin: Optional[float] = None
    n_mean: Optional[float] = None
    n_variance: Optional[float] = None
    delta: float
    delta1: float
    mean_bound: float
    var_bound: float
    tail_bound: float
    equivocation_margin: Optional[float] = None

    @classmethod
    def from_domain(cls, result: SimResult) -> "SimulationRow":
        leakage, stats, bounds = result.leakage, result.n_statistic, result.bounds
        return cls(
            seed=result.seed,
            n=result.n,
            trials=result.trials,
            errors=result.errors,
            error_probability=result.error_probability,
            leakage_rate=leakage.rate if leakage else None,
            leakage_user1=leakage.user_rates[0] if leakage else None,
            leakage_user2=leakage.user_rates[1] if leakage else None,
            superadditivity_margin=leakage.superadditivity_margin if leakage else None,
            n_mean=stats.mean if stats else None,
            n_variance=stats.variance if stats else None,
            delta=bounds.delta,
            delta1=bounds.delta1,
            mean_bound=bounds.mean_bound,
            var_bound=bounds.var_bound,
            tail_bound=bounds.tail_bound,
            equivocation_margin=result.equivocation_margin,
        )


class SimulationExport(BaseModel):
    n: int
    eps: float
    requested_rates: List[Dict[str, float]]
    effective_rates: List[Dict[str, float]]
    rows: List[SimulationRow]
    leakage: List[Optional[Dict[str, Any]]] = Field(default_factory=list, description="每個種子的完整洩漏報表")
    ensemble: Optional[Dict[str, Any]] = Field(None, description="碼書集合上的 N 統計量")


class SliceStatus(BaseModel):
    status: str = Field(..., description="ok 或 empty")
    region: str
    axes: List[str]
    fixed: Dict[str, float]
    vertices: int
