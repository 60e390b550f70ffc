"""Train/test protocol: split, re-estimate predictions, compare to uniform.

For every test record the model's predicted distribution and the uniform
baseline are both re-estimated; the cheaper one is chosen, so a prediction
can never make a circuit worse than the baseline.  The same bookkeeping is
run for the dataset's stored best distributions (the labels), giving a
second series directly comparable to the model's.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .budgets import COMPONENT_NAMES
from .dataset import metric_value
from .errors import DatasetTooSmall, EstimationError, InvariantViolation, MixedBudgets, SchemaError
from .estimator import DEFAULT_PARAMS, estimate
from .forest import ForestModel, predict
from .budgets import uniform_distribution
from .seeding import derive_rng

IMPROVEMENT_BINS = 25
BUDGET_BINS = 30


def split(dataset, ratio: float = 0.75, seed: int = 0):
    """Seeded shuffle, then prefix split: train gets ``floor(ratio * N)`` records."""
    records = list(dataset)
    if len(records) < 4:
        raise DatasetTooSmall(f"need at least 4 records to split, got {len(records)}")
    if not 0.0 < ratio < 1.0:
        raise InvariantViolation(f"split ratio must be in (0, 1), got {ratio}")
    order = derive_rng(seed).permutation(len(records))
    n_train = int(math.floor(ratio * len(records)))
    train = [records[i] for i in order[:n_train]]
    test = [records[i] for i in order[n_train:]]
    return train, test


@dataclass(frozen=True)
class EvaluationRow:
    circuit_id: str
    uniform_cost: float
    predicted_cost: float  # None when the prediction fell back to uniform
    chosen_cost: float
    improvement_fraction: float

    def to_dict(self) -> dict:
        return {
            "circuit_id": self.circuit_id,
            "uniform_cost": self.uniform_cost,
            "predicted_cost": self.predicted_cost,
            "chosen_cost": self.chosen_cost,
            "improvement_fraction": self.improvement_fraction,
        }


@dataclass
class EvaluationReport:
    rows: list
    aggregates: dict
    label_stats: dict
    histograms: dict
    metadata: dict
    fallback_count: int

    def to_dict(self) -> dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "aggregates": self.aggregates,
            "label_stats": self.label_stats,
            "histograms": self.histograms,
            "metadata": self.metadata,
            "fallback_count": self.fallback_count,
        }


def report_from_dict(raw: dict) -> EvaluationReport:
    try:
        rows = [EvaluationRow(**r) for r in raw["rows"]]
        return EvaluationReport(
            rows=rows,
            aggregates=raw["aggregates"],
            label_stats=raw["label_stats"],
            histograms=raw["histograms"],
            metadata=raw["metadata"],
            fallback_count=raw["fallback_count"],
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed report: {exc}") from exc


def _evaluate_one(task):
    record, model, params = task
    predicted = predict(model, record.counts)
    metric = model.metadata.metric
    uniform_cost = metric_value(
        estimate(record.counts, uniform_distribution(record.total_budget), params), metric
    )
    try:
        predicted_cost = metric_value(estimate(record.counts, predicted, params), metric)
        fallback = False
    except EstimationError:
        predicted_cost = None
        fallback = True
    try:
        label_cost = metric_value(estimate(record.counts, record.best_distribution, params), metric)
    except EstimationError:
        label_cost = uniform_cost
    chosen = uniform_cost if fallback else min(predicted_cost, uniform_cost)
    row = EvaluationRow(
        circuit_id=record.circuit_id,
        uniform_cost=uniform_cost,
        predicted_cost=predicted_cost,
        chosen_cost=chosen,
        improvement_fraction=1.0 - chosen / uniform_cost,
    )
    label_improvement = 1.0 - min(label_cost, uniform_cost) / uniform_cost
    return row, predicted.fractions(), label_improvement, fallback


def _series_stats(improvements, fractions):
    improvements = np.asarray(improvements)
    fractions = np.asarray(fractions)
    means = fractions.mean(axis=0)
    return {
        "fraction_improved": float((improvements > 0.0).mean()),
        "mean_improvement": float(improvements.mean()),
        "max_improvement": float(improvements.max()),
        "mean_logical_fraction": float(means[0]),
        "mean_tstates_fraction": float(means[1]),
        "mean_rotations_fraction": float(means[2]),
    }


def _histogram(values, edges):
    counts, _ = np.histogram(np.asarray(values), bins=edges)
    return [int(c) for c in counts]


def evaluate(
    model: ForestModel,
    test,
    params=DEFAULT_PARAMS,
    jobs: int = 1,
    split_ratio: float = None,
    split_seed: int = None,
) -> EvaluationReport:
    """Score ``model`` against the uniform baseline on held-out records."""
    records = list(test)
    if not records:
        raise DatasetTooSmall("test set is empty")
    total_budget = model.metadata.total_budget
    for record in records:
        if record.total_budget != total_budget:
            raise MixedBudgets(
                f"record {record.circuit_id} has total budget {record.total_budget}, "
                f"model was trained at {total_budget}"
            )
    params.validate()
    tasks = [(record, model, params) for record in records]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate_one, tasks, chunksize=8))
    else:
        outcomes = [_evaluate_one(task) for task in tasks]

    rows = [row for row, _, _, _ in outcomes]
    predicted_fractions = [fractions for _, fractions, _, _ in outcomes]
    improvements = [row.improvement_fraction for row in rows]
    label_improvements = [imp for _, _, imp, _ in outcomes]
    label_fractions = [record.best_distribution.fractions() for record in records]
    fallback_count = sum(1 for _, _, _, fb in outcomes if fb)

    improvement_edges = np.linspace(0.0, 1.0, IMPROVEMENT_BINS + 1)
    budget_edges = np.linspace(0.0, total_budget, BUDGET_BINS + 1)
    predicted_values = [
        [f[i] * total_budget for f in predicted_fractions] for i in range(3)
    ]
    label_values = [[r.best_distribution.components()[i] for r in records] for i in range(3)]
    histograms = {
        "improvement": {
            "bin_edges": improvement_edges.tolist(),
            "model": _histogram(improvements, improvement_edges),
            "best_label": _histogram(label_improvements, improvement_edges),
        },
        "budgets": {
            name: {
                "bin_edges": budget_edges.tolist(),
                "model": _histogram(predicted_values[i], budget_edges),
                "best_label": _histogram(label_values[i], budget_edges),
            }
            for i, name in enumerate(COMPONENT_NAMES)
        },
    }

    dataset_seeds = sorted({record.seed for record in records})
    metadata = {
        "total_budget": total_budget,
        "metric": model.metadata.metric.value,
        "split_ratio": split_ratio,
        "seeds": {
            "dataset": dataset_seeds[0] if len(dataset_seeds) == 1 else dataset_seeds,
            "model": model.metadata.seed,
            "split": split_seed,
        },
        "n_test": len(records),
    }
    return EvaluationReport(
        rows=rows,
        aggregates=_series_stats(improvements, predicted_fractions),
        label_stats=_series_stats(label_improvements, label_fractions),
        histograms=histograms,
        metadata=metadata,
        fallback_count=fallback_count,
    )


# --- export -------------------------------------------------------------------

ROW_COLUMNS = ("circuit_id", "uniform_cost", "predicted_cost", "chosen_cost", "improvement_fraction")


def report_to_json(report: EvaluationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def _write_histogram_csv(path, hist):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_lo", "bin_hi", "model_count", "best_label_count"])
        edges = hist["bin_edges"]
        for i, (m, b) in enumerate(zip(hist["model"], hist["best_label"])):
            writer.writerow([edges[i], edges[i + 1], m, b])


def export_report(report: EvaluationReport, path, fmt: str = "json") -> None:
    """Write the report as one JSON file or a directory of CSV files.

    CSV output: ``rows.csv`` (one line per test sample), ``aggregates.csv``
    (model and best-label series side by side), ``hist_improvement.csv`` and
    ``hist_budget_<component>.csv`` (plot-ready bin tables).
    """
    path = Path(path)
    if fmt == "json":
        path.write_text(report_to_json(report), encoding="utf-8")
        return
    if fmt != "csv":
        raise InvariantViolation(f"unknown report format '{fmt}' (expected json or csv)")
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "rows.csv", "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(ROW_COLUMNS)
        for row in report.rows:
            data = row.to_dict()
            writer.writerow(["" if data[c] is None else data[c] for c in ROW_COLUMNS])
    with open(path / "aggregates.csv", "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["statistic", "model", "best_label"])
        for key in report.aggregates:
            writer.writerow([key, report.aggregates[key], report.label_stats[key]])
        writer.writerow(["fallback_count", report.fallback_count, ""])
    _write_histogram_csv(path / "hist_improvement.csv", report.histograms["improvement"])
    for name in COMPONENT_NAMES:
        _write_histogram_csv(path / f"hist_budget_{name}.csv", report.histograms["budgets"][name])
