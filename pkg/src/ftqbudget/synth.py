"""Synthetic circuit generator for dataset building.

Counts are drawn log-uniformly so the corpus spans several orders of
magnitude in gate counts, mimicking the spread of real benchmark suites.
A draw of ``log_uniform_count(rng, upper)`` is ``floor(exp(u)) - 1`` with
``u ~ Uniform(0, ln(upper + 1))``, i.e. an integer in ``[0, upper]`` whose
CDF is ``P(X <= c) = ln(c + 2) / ln(upper + 2)`` below the cap.
"""

import math

import numpy as np

from .circuits import LogicalCounts
from .seeding import derive_rng

SIZE_CLASSES = {
    "small": (2, 50),
    "medium": (50, 500),
    "large": (500, 5000),
}

# per-qubit-squared caps of the log-uniform count draws
T_COUNT_CAP = 10
MEASUREMENT_CAP = 10
ROTATION_CAP = 2
TOFFOLI_CAP = 1


def log_uniform_count(rng: np.random.Generator, upper: int) -> int:
    """Integer in [0, upper], log-uniform (heavier mass at small counts)."""
    if upper <= 0:
        return 0
    u = rng.uniform(0.0, math.log(upper + 2.0))
    return min(int(math.exp(u)) - 1, upper)


def log_uniform_int(rng: np.random.Generator, lo: int, hi: int) -> int:
    """Integer in [lo, hi], log-uniform."""
    u = rng.uniform(math.log(lo), math.log(hi + 1.0))
    return min(int(math.exp(u)), hi)


def generate_synthetic_circuit(rng_seed: int, size_class: str = "small") -> LogicalCounts:
    """Deterministically generate one circuit's logical counts.

    ``size_class`` picks the qubit range (small [2,50], medium [50,500],
    large [500,5000]); t/measurement counts are capped at ``10 q**2``,
    rotations at ``2 q**2``, Toffolis at ``q**2``.  The rotation depth is
    uniform between ``ceil(rotations / qubits)`` (everything maximally
    parallel) and ``rotations`` (fully sequential).
    """
    if size_class not in SIZE_CLASSES:
        raise ValueError(f"unknown size class '{size_class}' (expected one of {sorted(SIZE_CLASSES)})")
    lo, hi = SIZE_CLASSES[size_class]
    rng = derive_rng(rng_seed)
    qubits = log_uniform_int(rng, lo, hi)
    q_sq = qubits * qubits
    t_count = log_uniform_count(rng, T_COUNT_CAP * q_sq)
    rotation_count = log_uniform_count(rng, ROTATION_CAP * q_sq)
    toffoli_count = log_uniform_count(rng, TOFFOLI_CAP * q_sq)
    measurement_count = log_uniform_count(rng, MEASUREMENT_CAP * q_sq)
    if rotation_count > 0:
        depth_lo = max(1, -(-rotation_count // qubits))
        rotation_depth = int(rng.integers(depth_lo, rotation_count + 1))
    else:
        rotation_depth = 0
    return LogicalCounts(
        qubits=qubits,
        t_count=t_count,
        rotation_count=rotation_count,
        rotation_depth=rotation_depth,
        toffoli_count=toffoli_count,
        measurement_count=measurement_count,
    ).validate()
