import csv
import json

import pytest

from ftqbudget.dataset import accumulate
from ftqbudget.errors import DatasetTooSmall, InvariantViolation, MixedBudgets
from ftqbudget.evaluation import (
    evaluate,
    export_report,
    report_from_dict,
    report_to_json,
    split,
)
from ftqbudget.forest import train
from ftqbudget.synth import generate_synthetic_circuit

TOTAL = 0.01


class _Stub:
    """Stand-in records for split tests (split never inspects fields)."""

    def __init__(self, i):
        self.i = i

    def __repr__(self):
        return f"Stub({self.i})"


@pytest.fixture(scope="module")
def desk_dataset():
    circuits = [(f"s{seed}", generate_synthetic_circuit(seed, "small")) for seed in range(200, 240)]
    return accumulate(circuits, n_samples=60, total_budget=TOTAL, seed=11).records


@pytest.fixture(scope="module")
def desk_model_and_test(desk_dataset):
    train_recs, test_recs = split(desk_dataset, 0.75, seed=17)
    model = train(train_recs, seed=23)
    return model, test_recs


def test_split_sizes_match_protocol():
    dataset = [_Stub(i) for i in range(1530)]
    train_part, test_part = split(dataset, 0.75, seed=1)
    assert len(train_part) == 1147
    assert len(test_part) == 383


def test_split_is_a_partition():
    dataset = [_Stub(i) for i in range(37)]
    train_part, test_part = split(dataset, 0.6, seed=9)
    ids = sorted(s.i for s in train_part + test_part)
    assert ids == list(range(37))
    assert len(train_part) == int(0.6 * 37)


def test_split_determinism():
    dataset = [_Stub(i) for i in range(50)]
    a_train, a_test = split(dataset, 0.75, seed=4)
    b_train, b_test = split(dataset, 0.75, seed=4)
    assert [s.i for s in a_train] == [s.i for s in b_train]
    assert [s.i for s in a_test] == [s.i for s in b_test]
    c_train, _ = split(dataset, 0.75, seed=5)
    assert [s.i for s in a_train] != [s.i for s in c_train]
    assert len(c_train) == len(a_train)


def test_split_rejects_tiny_or_bad_ratio():
    with pytest.raises(DatasetTooSmall):
        split([_Stub(0)], 0.75, seed=0)
    with pytest.raises(InvariantViolation):
        split([_Stub(i) for i in range(10)], 1.0, seed=0)


def test_uniform_predictor_never_improves(desk_dataset):
    # every leaf equal by construction: all labels forced to uniform
    train_recs, test_recs = split(desk_dataset, 0.75, seed=17)
    from ftqbudget.budgets import uniform_distribution
    from ftqbudget.dataset import DatasetRecord

    uniform_records = [
        DatasetRecord(
            circuit_id=r.circuit_id,
            counts=r.counts,
            best_distribution=uniform_distribution(TOTAL),
            best_cost=r.uniform_cost,
            uniform_cost=r.uniform_cost,
            total_budget=TOTAL,
            metric=r.metric,
            n_samples=r.n_samples,
            seed=r.seed,
        )
        for r in train_recs
    ]
    model = train(uniform_records, seed=23)
    report = evaluate(model, test_recs)
    assert report.aggregates["fraction_improved"] == 0.0
    assert report.aggregates["mean_improvement"] == 0.0
    for row in report.rows:
        assert row.improvement_fraction == 0.0


def test_improvement_never_negative(desk_model_and_test):
    model, test_recs = desk_model_and_test
    report = evaluate(model, test_recs)
    for row in report.rows:
        assert 0.0 <= row.improvement_fraction < 1.0
        assert row.chosen_cost <= row.uniform_cost


def test_mean_fractions_sum_to_one(desk_model_and_test):
    model, test_recs = desk_model_and_test
    report = evaluate(model, test_recs)
    for stats in (report.aggregates, report.label_stats):
        total = (
            stats["mean_logical_fraction"]
            + stats["mean_tstates_fraction"]
            + stats["mean_rotations_fraction"]
        )
        assert total == pytest.approx(1.0, rel=1e-9)


def test_histograms_partition_the_test_set(desk_model_and_test):
    model, test_recs = desk_model_and_test
    report = evaluate(model, test_recs)
    hist = report.histograms
    assert sum(hist["improvement"]["model"]) == len(test_recs)
    assert sum(hist["improvement"]["best_label"]) == len(test_recs)
    for name in ("logical", "t_states", "rotations"):
        assert sum(hist["budgets"][name]["model"]) == len(test_recs)
        assert sum(hist["budgets"][name]["best_label"]) == len(test_recs)
        assert len(hist["budgets"][name]["bin_edges"]) == 31
    assert len(hist["improvement"]["bin_edges"]) == 26


def test_evaluation_is_deterministic(desk_model_and_test):
    model, test_recs = desk_model_and_test
    a = evaluate(model, test_recs)
    b = evaluate(model, test_recs)
    assert report_to_json(a) == report_to_json(b)


def test_parallel_evaluation_matches_serial(desk_model_and_test):
    model, test_recs = desk_model_and_test
    serial = evaluate(model, test_recs, jobs=1)
    parallel = evaluate(model, test_recs, jobs=4)
    assert report_to_json(serial) == report_to_json(parallel)


def test_evaluate_rejects_budget_mismatch(desk_model_and_test):
    model, _ = desk_model_and_test
    circuits = [(f"x{seed}", generate_synthetic_circuit(seed, "small")) for seed in range(400, 406)]
    other = accumulate(circuits, n_samples=10, total_budget=0.1, seed=1).records
    with pytest.raises(MixedBudgets):
        evaluate(model, other)


def test_report_json_round_trip(desk_model_and_test):
    model, test_recs = desk_model_and_test
    report = evaluate(model, test_recs, split_ratio=0.75, split_seed=17)
    loaded = report_from_dict(json.loads(report_to_json(report)))
    assert report_to_json(loaded) == report_to_json(report)


def test_csv_export_shape(tmp_path, desk_model_and_test):
    model, test_recs = desk_model_and_test
    report = evaluate(model, test_recs)
    out = tmp_path / "bundle"
    export_report(report, out, fmt="csv")
    with open(out / "rows.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert len(rows) == len(test_recs) + 1
    assert rows[0] == ["circuit_id", "uniform_cost", "predicted_cost", "chosen_cost", "improvement_fraction"]
    with open(out / "hist_improvement.csv", newline="") as handle:
        hist_rows = list(csv.reader(handle))
    assert len(hist_rows) == 26  # header + 25 bins
    assert sum(int(r[2]) for r in hist_rows[1:]) == len(test_recs)
    for name in ("logical", "t_states", "rotations"):
        assert (out / f"hist_budget_{name}.csv").exists()
    assert (out / "aggregates.csv").exists()


def test_json_export(tmp_path, desk_model_and_test):
    model, test_recs = desk_model_and_test
    report = evaluate(model, test_recs)
    out = tmp_path / "report.json"
    export_report(report, out, fmt="json")
    assert report_from_dict(json.loads(out.read_text())).metadata == report.metadata


def test_desk_scale_guideline_statistics(desk_model_and_test):
    # qualitative skew: the logical component takes less than its uniform
    # share, for both the model predictions and the best labels
    model, test_recs = desk_model_and_test
    report = evaluate(model, test_recs)
    assert report.aggregates["mean_logical_fraction"] < 1 / 3
    assert report.label_stats["mean_logical_fraction"] < 1 / 3
