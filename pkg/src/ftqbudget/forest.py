"""Multi-output random-forest regressor for budget prediction.

Bagged CART trees, written here rather than pulled from an ML library so the
split criterion, determinism, and serialization stay fully specified: each
tree trains on a bootstrap resample and greedily minimizes the summed
per-output squared error of its children (multi-output variance reduction).
A node considers ``features_per_split`` randomly ordered features, skipping
constant ones until that many splittable features have been examined (soft
limit, so a node never goes leaf while any feature could still split it).

Prediction averages the per-tree leaf vectors and renormalizes onto the
model's total-budget simplex, which also applies the component floor.

Features are the six logical counts plus ``log2(1 + x)`` of each, in that
order (12 features).
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .budgets import BudgetDistribution, normalize
from .circuits import COUNT_FIELDS, LogicalCounts
from .dataset import CostMetric
from .errors import CorruptModel, DatasetTooSmall, InvariantViolation, MixedBudgets, VersionMismatch
from .seeding import derive_rng

N_FEATURES = 12
N_OUTPUTS = 3

MODEL_FORMAT = "ftqbudget-forest"
MODEL_VERSION = 1


def featurize(counts: LogicalCounts) -> np.ndarray:
    """12-vector: the six counts and log2(1+x) of each."""
    raw = [float(getattr(counts, name)) for name in COUNT_FIELDS]
    return np.array(raw + [math.log2(1.0 + value) for value in raw])


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 2
    bootstrap: bool = True
    features_per_split: int = 4

    def validate(self) -> "ForestHyperparams":
        if self.n_trees < 1 or self.max_depth < 0 or self.min_leaf < 1:
            raise InvariantViolation("n_trees >= 1, max_depth >= 0, min_leaf >= 1 required")
        if not 1 <= self.features_per_split <= N_FEATURES:
            raise InvariantViolation(f"features_per_split must be in [1, {N_FEATURES}]")
        return self

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "bootstrap": self.bootstrap,
            "features_per_split": self.features_per_split,
        }


@dataclass(frozen=True)
class ModelMetadata:
    total_budget: float
    metric: CostMetric
    seed: int
    n_train: int

    def to_dict(self) -> dict:
        return {
            "total_budget": self.total_budget,
            "metric": self.metric.value,
            "seed": self.seed,
            "n_train": self.n_train,
        }


@dataclass
class ForestModel:
    hyperparams: ForestHyperparams
    metadata: ModelMetadata
    trees: list = field(default_factory=list)  # nested node dicts


def _best_split_for_feature(x, y, min_leaf):
    """Best (score, threshold) split on one feature, or None.

    ``score`` is the summed squared error of both children; splits keeping
    fewer than ``min_leaf`` rows on either side are not considered.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    if xs[0] == xs[-1]:
        return None
    ys = y[order]
    n = len(xs)
    sizes = np.arange(1, n, dtype=float)  # left-child sizes
    csum = np.cumsum(ys, axis=0)[:-1]
    csq = np.cumsum(ys * ys, axis=0)[:-1]
    total = np.sum(ys, axis=0)
    total_sq = np.sum(ys * ys, axis=0)
    left = (csq - csum * csum / sizes[:, None]).sum(axis=1)
    right = ((total_sq - csq) - (total - csum) ** 2 / (n - sizes)[:, None]).sum(axis=1)
    score = left + right
    valid = (xs[:-1] != xs[1:]) & (sizes >= min_leaf) & (n - sizes >= min_leaf)
    if not valid.any():
        return None
    score = np.where(valid, score, np.inf)
    best = int(np.argmin(score))  # first minimum: deterministic tie-break
    threshold = (xs[best] + xs[best + 1]) / 2.0
    if threshold >= xs[best + 1]:  # midpoint rounded up between adjacent floats
        threshold = xs[best]
    return float(score[best]), threshold


def _build_node(X, Y, rows, depth, hp, rng):
    y = Y[rows]
    if depth >= hp.max_depth or len(rows) < 2 * hp.min_leaf or np.all(y == y[0]):
        return {"value": y.mean(axis=0).tolist(), "n": int(len(rows))}
    best = None
    splittable_seen = 0
    for feature in rng.permutation(N_FEATURES):
        candidate = _best_split_for_feature(X[rows, feature], y, hp.min_leaf)
        if candidate is None:
            continue
        splittable_seen += 1
        score, threshold = candidate
        if best is None or score < best[0]:
            best = (score, int(feature), threshold)
        if splittable_seen >= hp.features_per_split:
            break
    if best is None:
        return {"value": y.mean(axis=0).tolist(), "n": int(len(rows))}
    _, feature, threshold = best
    mask = X[rows, feature] <= threshold
    left = _build_node(X, Y, rows[mask], depth + 1, hp, rng)
    right = _build_node(X, Y, rows[~mask], depth + 1, hp, rng)
    return {"feature": feature, "threshold": threshold, "left": left, "right": right}


def train(dataset, hyperparams: ForestHyperparams = None, seed: int = 0) -> ForestModel:
    """Fit a forest on a list of dataset records.

    All records must share one total budget and metric.  Tree ``i`` draws
    its bootstrap rows and split features from the stream
    ``derive_rng(seed, i)``, making training deterministic and
    per-tree-parallelizable in principle.
    """
    hp = (hyperparams or ForestHyperparams()).validate()
    records = list(dataset)
    if len(records) < 2 * hp.min_leaf:
        raise DatasetTooSmall(f"need at least {2 * hp.min_leaf} records, got {len(records)}")
    total_budget = records[0].total_budget
    metric = records[0].metric
    for record in records:
        if record.total_budget != total_budget or record.metric != metric:
            raise MixedBudgets(
                f"record {record.circuit_id} disagrees on total budget or metric"
            )
    X = np.array([featurize(r.counts) for r in records])
    Y = np.array([r.best_distribution.components() for r in records])
    n = len(records)
    trees = []
    for index in range(hp.n_trees):
        rng = derive_rng(seed, index)
        rows = rng.integers(0, n, size=n) if hp.bootstrap else np.arange(n)
        trees.append(_build_node(X, Y, rows, 0, hp, rng))
    metadata = ModelMetadata(total_budget=total_budget, metric=metric, seed=seed, n_train=n)
    return ForestModel(hyperparams=hp, metadata=metadata, trees=trees)


def _tree_predict(node, features):
    while "feature" in node:
        node = node["left"] if features[node["feature"]] <= node["threshold"] else node["right"]
    return node["value"]


def predict_components(model: ForestModel, counts: LogicalCounts):
    """Per-tree mean and across-tree variance of the raw 3-vector output."""
    features = featurize(counts)
    votes = np.array([_tree_predict(tree, features) for tree in model.trees])
    return votes.mean(axis=0), votes.var(axis=0)


def predict(model: ForestModel, counts: LogicalCounts) -> BudgetDistribution:
    """Predicted distribution, renormalized onto the model's budget simplex."""
    mean, _ = predict_components(model, counts)
    return normalize(mean, model.metadata.total_budget)


# --- serialization -----------------------------------------------------------


def model_to_payload(model: ForestModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "hyperparams": model.hyperparams.to_dict(),
        "metadata": model.metadata.to_dict(),
        "trees": model.trees,
    }


def model_to_json(model: ForestModel) -> str:
    return json.dumps(model_to_payload(model), sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model: ForestModel, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(model_to_json(model))


def _validate_node(node, hp, depth=0):
    if not isinstance(node, dict):
        raise CorruptModel("tree node is not an object")
    if "value" in node:
        value = node["value"]
        if len(value) != N_OUTPUTS or any(
            not isinstance(v, (int, float)) or v < 0.0 or not math.isfinite(v) for v in value
        ):
            raise CorruptModel(f"leaf value must be {N_OUTPUTS} non-negative finite numbers")
        if not isinstance(node.get("n"), int) or node["n"] < hp.min_leaf:
            raise CorruptModel(f"leaf holds fewer than min_leaf={hp.min_leaf} rows")
        return
    if depth >= hp.max_depth:
        raise CorruptModel(f"tree deeper than max_depth={hp.max_depth}")
    if not (isinstance(node.get("feature"), int) and 0 <= node["feature"] < N_FEATURES):
        raise CorruptModel("split feature index out of range")
    if not isinstance(node.get("threshold"), (int, float)):
        raise CorruptModel("split threshold missing")
    for side in ("left", "right"):
        if side not in node:
            raise CorruptModel(f"split node lacks a {side} child")
        _validate_node(node[side], hp, depth + 1)


def model_from_json(text: str) -> ForestModel:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"not valid JSON: {exc}") from exc
    return model_from_payload(payload)


def model_from_payload(payload: dict) -> ForestModel:
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise CorruptModel(f"missing or wrong format marker (expected '{MODEL_FORMAT}')")
    if payload.get("version") != MODEL_VERSION:
        raise VersionMismatch(
            f"model version {payload.get('version')!r} unsupported (expected {MODEL_VERSION})"
        )
    try:
        hp = ForestHyperparams(**payload["hyperparams"]).validate()
        meta_raw = dict(payload["metadata"])
        meta_raw["metric"] = CostMetric(meta_raw["metric"])
        metadata = ModelMetadata(**meta_raw)
        trees = payload["trees"]
    except (KeyError, TypeError, ValueError, InvariantViolation) as exc:
        raise CorruptModel(f"malformed model payload: {exc}") from exc
    if not isinstance(trees, list) or len(trees) != hp.n_trees:
        raise CorruptModel("tree count disagrees with hyperparameters")
    for tree in trees:
        _validate_node(tree, hp)
    return ForestModel(hyperparams=hp, metadata=metadata, trees=trees)


def load_model(path) -> ForestModel:
    with open(path, "r", encoding="utf-8") as handle:
        return model_from_json(handle.read())
