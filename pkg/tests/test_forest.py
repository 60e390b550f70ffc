import math

import numpy as np
import pytest

from ftqbudget.budgets import normalize, uniform_distribution
from ftqbudget.circuits import LogicalCounts
from ftqbudget.dataset import CostMetric, DatasetRecord
from ftqbudget.errors import CorruptModel, DatasetTooSmall, MixedBudgets, VersionMismatch
from ftqbudget.forest import (
    ForestHyperparams,
    ForestModel,
    N_FEATURES,
    featurize,
    load_model,
    model_from_json,
    model_to_json,
    predict,
    predict_components,
    save_model,
    train,
)
from ftqbudget.seeding import derive_rng
from ftqbudget.synth import generate_synthetic_circuit

TOTAL = 0.01


def _record(circuit_id, counts, label, n_samples=10, seed=0):
    return DatasetRecord(
        circuit_id=circuit_id,
        counts=counts,
        best_distribution=normalize(label, TOTAL),
        best_cost=1.0,
        uniform_cost=2.0,
        total_budget=TOTAL,
        metric=CostMetric.SPACE_TIME,
        n_samples=n_samples,
        seed=seed,
    )


def _synthetic_records(n, label_fn, first_seed=500):
    records = []
    for i in range(n):
        counts = generate_synthetic_circuit(first_seed + i, "small")
        records.append(_record(f"c{i}", counts, label_fn(i, counts)))
    return records


def _varied_labels(i, counts):
    rng = derive_rng(9000 + i)
    return tuple(rng.uniform(0.05, 1.0, 3))


# --- featurization -----------------------------------------------------------


def test_featurize_trivial_values():
    features = featurize(LogicalCounts(qubits=1))
    assert features.tolist() == [1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0]
    features = featurize(LogicalCounts(qubits=1, t_count=3))
    assert features[1] == 3
    assert features[7] == 2  # log2(1 + 3)


def test_featurize_injective_on_distinct_counts():
    seen = {}
    for seed in range(300):
        counts = generate_synthetic_circuit(seed, "small")
        key = tuple(featurize(counts).tolist())
        if key in seen:
            assert seen[key] == counts
        seen[key] = counts


# --- training fixtures ---------------------------------------------------------


def test_single_leaf_tree_predicts_bootstrap_mean():
    records = _synthetic_records(12, _varied_labels)
    hp = ForestHyperparams(n_trees=1, max_depth=0, min_leaf=1, bootstrap=True)
    model = train(records, hp, seed=21)
    # reconstruct the bootstrap sample from the documented per-tree stream
    rng = derive_rng(21, 0)
    rows = rng.integers(0, len(records), size=len(records))
    labels = np.array([records[i].best_distribution.components() for i in rows])
    leaf = model.trees[0]
    assert "value" in leaf and "feature" not in leaf
    assert leaf["value"] == pytest.approx(labels.mean(axis=0).tolist())
    expected = normalize(labels.mean(axis=0), TOTAL)
    for probe_seed in range(5):
        counts = generate_synthetic_circuit(4000 + probe_seed, "small")
        assert predict(model, counts) == expected


def test_memorization_with_single_unbagged_tree():
    records = _synthetic_records(20, _varied_labels)
    hp = ForestHyperparams(
        n_trees=1, max_depth=64, min_leaf=1, bootstrap=False, features_per_split=N_FEATURES
    )
    model = train(records, hp, seed=5)
    for record in records:
        got = predict(model, record.counts)
        want = record.best_distribution
        assert got.logical == pytest.approx(want.logical, rel=1e-9)
        assert got.t_states == pytest.approx(want.t_states, rel=1e-9)
        assert got.rotations == pytest.approx(want.rotations, rel=1e-9)


def test_two_piece_constant_function_recovered_at_depth_one():
    # labels depend on t_count through a single step: a depth-1 tree must
    # find the closed-form split and reach near-zero training error
    low = (0.2, 0.3, 0.5)
    high = (0.6, 0.3, 0.1)
    records = []
    for i in range(40):
        t_count = i * 10
        counts = LogicalCounts(qubits=5, t_count=t_count, measurement_count=7)
        label = low if t_count <= 190 else high
        records.append(_record(f"p{i}", counts, label))
    hp = ForestHyperparams(
        n_trees=1, max_depth=1, min_leaf=1, bootstrap=False, features_per_split=N_FEATURES
    )
    model = train(records, hp, seed=0)
    tree = model.trees[0]
    assert tree["feature"] in (1, 7)  # t_count raw or log feature
    predictions = np.array(
        [predict(model, r.counts).components() for r in records]
    )
    labels = np.array([r.best_distribution.components() for r in records])
    mse = ((predictions - labels) ** 2).mean()
    variance = labels.var(axis=0).mean()
    assert mse <= 0.01 * variance


def test_forest_beats_mean_predictor_on_training_data():
    records = _synthetic_records(60, _varied_labels)
    model = train(records, seed=3)
    labels = np.array([r.best_distribution.components() for r in records])
    predictions = np.array([predict(model, r.counts).components() for r in records])
    forest_mse = ((predictions - labels) ** 2).mean()
    baseline = ((labels - labels.mean(axis=0)) ** 2).mean()
    assert forest_mse <= baseline


def test_every_leaf_is_non_negative_and_respects_min_leaf():
    records = _synthetic_records(30, _varied_labels)
    model = train(records, ForestHyperparams(n_trees=20), seed=6)

    def walk(node, depth):
        assert depth <= model.hyperparams.max_depth
        if "value" in node:
            assert len(node["value"]) == 3
            assert all(v >= 0.0 for v in node["value"])
            assert node["n"] >= model.hyperparams.min_leaf
            return
        walk(node["left"], depth + 1)
        walk(node["right"], depth + 1)

    for tree in model.trees:
        walk(tree, 0)


# --- prediction properties -----------------------------------------------------


def test_predictions_lie_on_the_simplex():
    records = _synthetic_records(40, _varied_labels)
    model = train(records, seed=8)
    for seed in range(200):
        counts = generate_synthetic_circuit(7000 + seed, "small")
        distribution = predict(model, counts).validate()
        assert distribution.total == TOTAL
        assert math.fsum(distribution.components()) == pytest.approx(TOTAL, rel=1e-9)


def test_uniform_leaves_predict_uniform():
    records = _synthetic_records(10, lambda i, c: (1.0, 1.0, 1.0))
    model = train(records, seed=2)
    counts = generate_synthetic_circuit(1, "small")
    got = predict(model, counts)
    want = uniform_distribution(TOTAL)
    assert got.logical == got.t_states == got.rotations  # exact, by symmetry
    for a, b in zip(got.components(), want.components()):
        assert a == pytest.approx(b, rel=1e-12)


def test_forest_prediction_is_mean_of_tree_votes():
    records = _synthetic_records(25, _varied_labels)
    model = train(records, ForestHyperparams(n_trees=15), seed=4)
    counts = generate_synthetic_circuit(42, "small")
    mean, variance = predict_components(model, counts)
    assert np.all(np.isfinite(variance))
    assert np.all(variance >= 0.0)
    features = featurize(counts)
    votes = []
    for tree in model.trees:
        node = tree
        while "feature" in node:
            node = node["left"] if features[node["feature"]] <= node["threshold"] else node["right"]
        votes.append(node["value"])
    assert mean == pytest.approx(np.mean(votes, axis=0))
    assert predict(model, counts) == normalize(mean, TOTAL)


def test_monotone_label_trend_is_learned():
    # optimal rotations budget grows with rotation count: predictions sorted
    # by rotation count should be almost monotone
    records = []
    for i in range(60):
        rotation_count = int(round(2.0 ** (1.0 + 0.2 * i))) + i
        counts = LogicalCounts(
            qubits=6,
            t_count=50,
            rotation_count=rotation_count,
            rotation_depth=max(1, rotation_count // 6),
            measurement_count=20,
        )
        rot_share = 0.1 + 0.8 * i / 59.0
        label = (0.3 * (1 - rot_share), 0.7 * (1 - rot_share), rot_share)
        records.append(_record(f"m{i}", counts, label))
    model = train(records, seed=10)
    ordered = sorted(records, key=lambda r: r.counts.rotation_count)
    predicted = [predict(model, r.counts).rotations for r in ordered]
    inversions = sum(1 for a, b in zip(predicted, predicted[1:]) if b < a - 1e-12)
    assert inversions <= 0.05 * (len(predicted) - 1)


# --- determinism ----------------------------------------------------------------


def test_training_is_deterministic():
    records = _synthetic_records(30, _varied_labels)
    a = train(records, seed=12)
    b = train(records, seed=12)
    assert model_to_json(a) == model_to_json(b)
    c = train(records, seed=13)
    assert model_to_json(a) != model_to_json(c)


# --- validation and serialization ------------------------------------------------


def test_train_rejects_small_or_mixed_datasets():
    records = _synthetic_records(1, _varied_labels)
    with pytest.raises(DatasetTooSmall):
        train(records, ForestHyperparams(min_leaf=2))
    mixed = _synthetic_records(10, _varied_labels)
    moved = mixed[3]
    mixed[3] = DatasetRecord(
        circuit_id=moved.circuit_id,
        counts=moved.counts,
        best_distribution=normalize(moved.best_distribution.components(), 0.1),
        best_cost=moved.best_cost,
        uniform_cost=moved.uniform_cost,
        total_budget=0.1,
        metric=moved.metric,
        n_samples=moved.n_samples,
        seed=moved.seed,
    )
    with pytest.raises(MixedBudgets):
        train(mixed)


def test_model_round_trip(tmp_path):
    records = _synthetic_records(25, _varied_labels)
    model = train(records, seed=1)
    path = tmp_path / "model.bin"
    save_model(model, path)
    loaded = load_model(path)
    assert model_to_json(loaded) == model_to_json(model)
    for seed in range(100):
        counts = generate_synthetic_circuit(8000 + seed, "small")
        assert predict(loaded, counts) == predict(model, counts)


def test_truncated_model_file_is_corrupt(tmp_path):
    records = _synthetic_records(10, _varied_labels)
    model = train(records, ForestHyperparams(n_trees=3), seed=1)
    text = model_to_json(model)
    with pytest.raises(CorruptModel):
        model_from_json(text[: len(text) // 2])


def test_version_bump_is_rejected(tmp_path):
    records = _synthetic_records(10, _varied_labels)
    model = train(records, ForestHyperparams(n_trees=3), seed=1)
    text = model_to_json(model).replace('"version":1', '"version":2')
    with pytest.raises(VersionMismatch):
        model_from_json(text)


def test_tampered_leaf_is_rejected():
    records = _synthetic_records(10, _varied_labels)
    model = train(records, ForestHyperparams(n_trees=1, max_depth=0), seed=1)
    tampered = ForestModel(
        hyperparams=model.hyperparams,
        metadata=model.metadata,
        trees=[{"value": [-0.1, 0.5, 0.6], "n": 10}],
    )
    with pytest.raises(CorruptModel):
        model_from_json(model_to_json(tampered))
