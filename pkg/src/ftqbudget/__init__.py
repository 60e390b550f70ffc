"""Error-budget distribution optimization for fault-tolerant quantum circuits."""

__version__ = "0.1.0"

from .budgets import BudgetDistribution, normalize, sample_distribution, uniform_distribution
from .circuits import GateCounts, LogicalCounts, derive_logical_counts
from .dataset import CostMetric, DatasetRecord, accumulate
from .estimator import PhysicalParams, ResourceEstimate, estimate
from .evaluation import EvaluationReport, evaluate, split
from .forest import ForestHyperparams, ForestModel, featurize, predict, train
from .qasm import parse_qasm
from .synth import generate_synthetic_circuit

__all__ = [
    "__version__",
    "BudgetDistribution",
    "CostMetric",
    "DatasetRecord",
    "EvaluationReport",
    "ForestHyperparams",
    "ForestModel",
    "GateCounts",
    "LogicalCounts",
    "PhysicalParams",
    "ResourceEstimate",
    "accumulate",
    "derive_logical_counts",
    "estimate",
    "evaluate",
    "featurize",
    "generate_synthetic_circuit",
    "normalize",
    "parse_qasm",
    "predict",
    "sample_distribution",
    "split",
    "train",
    "uniform_distribution",
]
