"""Pydantic request/response models mirroring the core dataclasses.

The HTTP service and the CLI (a thin client of the service handlers) share
these models, so every pipeline stage has one wire format.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..budgets import BudgetDistribution
from ..circuits import LogicalCounts
from ..dataset import CostMetric, DatasetRecord, SkippedCandidate
from ..estimator import PhysicalParams, ResourceEstimate

MetricName = Literal["spacetime", "qubits", "time"]
SizeClassName = Literal["small", "medium", "large"]


class LogicalCountsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    qubits: int = Field(ge=1)
    t_count: int = Field(default=0, ge=0)
    rotation_count: int = Field(default=0, ge=0)
    rotation_depth: int = Field(default=0, ge=0)
    toffoli_count: int = Field(default=0, ge=0)
    measurement_count: int = Field(default=0, ge=0)

    def to_core(self) -> LogicalCounts:
        return LogicalCounts(**self.model_dump()).validate()

    @classmethod
    def from_core(cls, counts: LogicalCounts) -> "LogicalCountsModel":
        return cls(**counts.to_dict())


class BudgetModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    logical: float
    t_states: float
    rotations: float
    total: float

    def to_core(self) -> BudgetDistribution:
        return BudgetDistribution(**self.model_dump()).validate()

    @classmethod
    def from_core(cls, budget: BudgetDistribution) -> "BudgetModel":
        return cls(**budget.to_dict())


class PhysicalParamsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    p_phys: float = 1e-3
    p_threshold: float = 1e-2
    prefactor_a: float = 0.03
    t_phys: float = 1e-7
    cycle_factor: float = 6.0
    p_injection: float = 1e-2

    def to_core(self) -> PhysicalParams:
        return PhysicalParams(**self.model_dump()).validate()

    @classmethod
    def from_core(cls, params: PhysicalParams) -> "PhysicalParamsModel":
        return cls(**params.to_dict())


class FactoryModel(BaseModel):
    rounds: int
    factory_distance: int
    output_error: float
    physical_qubits_per_factory: int
    seconds_per_tstate: float


class EstimateResponse(BaseModel):
    physical_qubits: int
    runtime_seconds: float
    space_time_cost: float
    code_distance: int
    logical_cycles: int
    total_t_states: int
    factory_count: int
    factory_design: FactoryModel
    achieved_logical_error: float
    achieved_tstate_error: float
    achieved_rotation_error: float
    budget: BudgetModel
    metric: MetricName
    cost: float

    @classmethod
    def from_core(
        cls, est: ResourceEstimate, budget: BudgetDistribution, metric: CostMetric, cost: float
    ) -> "EstimateResponse":
        return cls(
            budget=BudgetModel.from_core(budget),
            metric=metric.value,
            cost=cost,
            **est.to_dict(),
        )


class EstimateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    counts: LogicalCountsModel
    budget_total: float
    #: optional raw (logical, t_states, rotations) weights, normalized to the
    #: total before estimation; omitted means the uniform baseline
    budget: Optional[Tuple[float, float, float]] = None
    params: Optional[PhysicalParamsModel] = None
    metric: MetricName = "spacetime"


class SampleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    budget_total: float
    n: int = Field(ge=1)
    seed: int = 0


class SampleResponse(BaseModel):
    distributions: List[BudgetModel]


class NormalizeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    components: Tuple[float, float, float]
    budget_total: float


class QasmRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: str


class QasmResponse(BaseModel):
    gates: Dict[str, int]
    qubit_count: int
    rotation_layer_count: int
    logical_counts: LogicalCountsModel


class CircuitPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    circuit_id: str
    counts: LogicalCountsModel


class SynthRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=1)
    seed: int = 0
    size_class: SizeClassName = "small"


class SynthResponse(BaseModel):
    circuits: List[CircuitPayload]


class DatasetRecordModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    circuit_id: str
    counts: LogicalCountsModel
    best_distribution: BudgetModel
    best_cost: float
    uniform_cost: float
    total_budget: float
    metric: MetricName
    n_samples: int
    seed: int

    def to_core(self) -> DatasetRecord:
        return DatasetRecord(
            circuit_id=self.circuit_id,
            counts=self.counts.to_core(),
            best_distribution=self.best_distribution.to_core(),
            best_cost=self.best_cost,
            uniform_cost=self.uniform_cost,
            total_budget=self.total_budget,
            metric=CostMetric(self.metric),
            n_samples=self.n_samples,
            seed=self.seed,
        ).validate()

    @classmethod
    def from_core(cls, record: DatasetRecord) -> "DatasetRecordModel":
        return cls(
            circuit_id=record.circuit_id,
            counts=LogicalCountsModel.from_core(record.counts),
            best_distribution=BudgetModel.from_core(record.best_distribution),
            best_cost=record.best_cost,
            uniform_cost=record.uniform_cost,
            total_budget=record.total_budget,
            metric=record.metric.value,
            n_samples=record.n_samples,
            seed=record.seed,
        )


class SkippedModel(BaseModel):
    circuit_id: str
    candidate_index: int
    error: str
    message: str

    @classmethod
    def from_core(cls, skip: SkippedCandidate) -> "SkippedModel":
        return cls(
            circuit_id=skip.circuit_id,
            candidate_index=skip.candidate_index,
            error=skip.error,
            message=skip.message,
        )


class AccumulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    circuits: List[CircuitPayload]
    n_samples: int = Field(ge=1)
    budget_total: float
    metric: MetricName = "spacetime"
    seed: int = 0
    params: Optional[PhysicalParamsModel] = None
    jobs: int = Field(default=1, ge=1, le=32)


class AccumulateResponse(BaseModel):
    records: List[DatasetRecordModel]
    skipped: List[SkippedModel]


class HyperparamsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 2
    bootstrap: bool = True
    features_per_split: int = 4


class TrainRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    records: List[DatasetRecordModel]
    seed: int = 0
    hyperparams: Optional[HyperparamsModel] = None


class TrainResponse(BaseModel):
    model: Dict[str, Any]


class PredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Dict[str, Any]
    counts: LogicalCountsModel


class PredictResponse(BaseModel):
    distribution: BudgetModel
    tree_variance: Tuple[float, float, float]


class EvaluateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    records: List[DatasetRecordModel]
    model: Optional[Dict[str, Any]] = None
    retrain: bool = False
    split_ratio: float = 0.75
    seed: int = 0
    model_seed: Optional[int] = None
    hyperparams: Optional[HyperparamsModel] = None
    params: Optional[PhysicalParamsModel] = None
    jobs: int = Field(default=1, ge=1, le=32)


class EvaluateResponse(BaseModel):
    report: Dict[str, Any]
    model: Optional[Dict[str, Any]] = None


class HealthResponse(BaseModel):
    status: str
    service: str
    version: str
