"""Dataset accumulation: best budget distribution per circuit.

For each circuit the uniform distribution (candidate 0) plus ``n_samples``
random distributions are estimated, and the candidate with the lowest cost
under the chosen metric is stored.  Keeping uniform in the candidate list
guarantees ``best_cost <= uniform_cost`` for every record.

Each circuit gets its own random stream derived from
``(seed, stable_key(circuit_id))``, so records do not depend on circuit
order or worker count.  Candidate streams are prefix-stable: the first N
candidates for ``n_samples = N'`` (N' > N) are exactly the candidates of a
run with ``n_samples = N``.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

from .budgets import BudgetDistribution, sample_distributions, uniform_distribution
from .circuits import LogicalCounts
from .errors import AccumulationFailed, EstimationError, InvariantViolation, SchemaError
from .estimator import DEFAULT_PARAMS, PhysicalParams, ResourceEstimate, estimate
from .seeding import derive_rng, stable_key


class CostMetric(str, Enum):
    SPACE_TIME = "spacetime"
    QUBITS_ONLY = "qubits"
    TIME_ONLY = "time"


def metric_value(est: ResourceEstimate, metric: CostMetric) -> float:
    if metric == CostMetric.SPACE_TIME:
        return est.space_time_cost
    if metric == CostMetric.QUBITS_ONLY:
        return float(est.physical_qubits)
    return est.runtime_seconds


@dataclass(frozen=True)
class DatasetRecord:
    circuit_id: str
    counts: LogicalCounts
    best_distribution: BudgetDistribution
    best_cost: float
    uniform_cost: float
    total_budget: float
    metric: CostMetric
    n_samples: int
    seed: int

    def validate(self) -> "DatasetRecord":
        self.counts.validate()
        self.best_distribution.validate()
        if self.best_cost > self.uniform_cost:
            raise InvariantViolation(
                f"record {self.circuit_id}: best_cost {self.best_cost} exceeds "
                f"uniform_cost {self.uniform_cost}"
            )
        if self.best_distribution.total != self.total_budget:
            raise InvariantViolation(
                f"record {self.circuit_id}: distribution total differs from total_budget"
            )
        if self.n_samples < 1:
            raise InvariantViolation(f"record {self.circuit_id}: n_samples must be >= 1")
        return self


@dataclass(frozen=True)
class SkippedCandidate:
    """A candidate (or whole circuit) dropped due to an estimator error."""

    circuit_id: str
    candidate_index: int  # -1 when the whole circuit was dropped
    error: str
    message: str


@dataclass(frozen=True)
class AccumulationResult:
    records: list
    skipped: list


def candidate_distributions(circuit_id: str, n_samples: int, total_budget: float, seed: int):
    """Uniform first, then the circuit's seeded random candidates."""
    rng = derive_rng(seed, stable_key(circuit_id))
    return [uniform_distribution(total_budget)] + sample_distributions(rng, total_budget, n_samples)


def _accumulate_one(task):
    circuit_id, counts, n_samples, total_budget, metric, seed, params = task
    skipped = []
    candidates = candidate_distributions(circuit_id, n_samples, total_budget, seed)
    best_index = None
    best_cost = None
    uniform_cost = None
    for index, distribution in enumerate(candidates):
        try:
            cost = metric_value(estimate(counts, distribution, params), metric)
        except EstimationError as exc:
            skipped.append(
                SkippedCandidate(circuit_id, index, type(exc).__name__, str(exc))
            )
            continue
        if index == 0:
            uniform_cost = cost
        if best_cost is None or cost < best_cost:
            best_index = index
            best_cost = cost
    if best_index is None or uniform_cost is None:
        # drop the circuit: every candidate failed, or the uniform baseline did
        skipped.append(
            SkippedCandidate(
                circuit_id, -1, "CircuitSkipped", "uniform baseline or all candidates failed"
            )
        )
        return None, skipped
    record = DatasetRecord(
        circuit_id=circuit_id,
        counts=counts,
        best_distribution=candidates[best_index],
        best_cost=best_cost,
        uniform_cost=uniform_cost,
        total_budget=total_budget,
        metric=metric,
        n_samples=n_samples,
        seed=seed,
    )
    return record.validate(), skipped


def accumulate(
    circuits,
    n_samples: int,
    total_budget: float,
    metric: CostMetric = CostMetric.SPACE_TIME,
    seed: int = 0,
    params: PhysicalParams = DEFAULT_PARAMS,
    jobs: int = 1,
) -> AccumulationResult:
    """Build one dataset record per (circuit_id, LogicalCounts) pair.

    Candidates that fail to estimate are skipped (and reported); a circuit
    with no estimable candidate is dropped.  Raises
    :class:`AccumulationFailed` when nothing survives.  ``jobs`` > 1 fans
    circuits out to a process pool; results are merged in input order and
    are identical to a single-process run.
    """
    circuits = list(circuits)
    if not circuits:
        raise AccumulationFailed("no circuits supplied")
    if n_samples < 1:
        raise InvariantViolation("n_samples must be >= 1")
    metric = CostMetric(metric)
    params.validate()
    tasks = [
        (circuit_id, counts, n_samples, total_budget, metric, seed, params)
        for circuit_id, counts in circuits
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_accumulate_one, tasks, chunksize=8))
    else:
        outcomes = [_accumulate_one(task) for task in tasks]
    records = []
    skipped = []
    for record, skips in outcomes:
        skipped.extend(skips)
        if record is not None:
            records.append(record)
    if not records:
        raise AccumulationFailed(
            f"all {len(circuits)} circuits were skipped; first error: {skipped[0].message}"
        )
    return AccumulationResult(records=records, skipped=skipped)


# --- JSON-lines serialization ------------------------------------------------

_RECORD_FIELDS = (
    "circuit_id",
    "counts",
    "best_distribution",
    "best_cost",
    "uniform_cost",
    "total_budget",
    "metric",
    "n_samples",
    "seed",
)


def _json_scalar(value):
    if isinstance(value, bool):
        raise InvariantViolation("booleans do not appear in dataset records")
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = ", ".join(f"{json.dumps(k)}: {_json_scalar(v)}" for k, v in value.items())
        return "{" + items + "}"
    raise InvariantViolation(f"unsupported value in record serialization: {value!r}")


def record_to_json(record: DatasetRecord) -> str:
    """One JSON line; floats carry 17 significant digits (exact round-trip)."""
    payload = {
        "circuit_id": record.circuit_id,
        "counts": record.counts.to_dict(),
        "best_distribution": record.best_distribution.to_dict(),
        "best_cost": record.best_cost,
        "uniform_cost": record.uniform_cost,
        "total_budget": record.total_budget,
        "metric": record.metric.value,
        "n_samples": record.n_samples,
        "seed": record.seed,
    }
    items = ", ".join(f"{json.dumps(k)}: {_json_scalar(v)}" for k, v in payload.items())
    return "{" + items + "}"


def record_from_dict(raw: dict, line: int = 0) -> DatasetRecord:
    missing = [f for f in _RECORD_FIELDS if f not in raw]
    if missing:
        raise SchemaError(f"missing field '{missing[0]}'", field=missing[0], line=line)
    extras = sorted(set(raw) - set(_RECORD_FIELDS))
    if extras:
        raise SchemaError(f"unknown field '{extras[0]}'", field=extras[0], line=line)
    try:
        counts = LogicalCounts(**raw["counts"])
        distribution = BudgetDistribution(**raw["best_distribution"])
        record = DatasetRecord(
            circuit_id=raw["circuit_id"],
            counts=counts,
            best_distribution=distribution,
            best_cost=float(raw["best_cost"]),
            uniform_cost=float(raw["uniform_cost"]),
            total_budget=float(raw["total_budget"]),
            metric=CostMetric(raw["metric"]),
            n_samples=int(raw["n_samples"]),
            seed=int(raw["seed"]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"malformed record: {exc}", line=line) from exc
    return record.validate()


def save_dataset(records, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record_to_json(record) + "\n")


def load_dataset(path):
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {line_no}: invalid JSON: {exc}", line=line_no) from exc
            records.append(record_from_dict(raw, line=line_no))
    return records
