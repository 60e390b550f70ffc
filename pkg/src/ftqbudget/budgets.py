"""Error-budget distributions on the simplex.

A distribution splits a total error budget into three components: logical
(code-distance selection), T states (distillation), and rotations (gate
synthesis).  Random distributions come from normalizing three independent
Uniform(0,1) draws to the requested total.  Because the estimator needs
strictly positive components, every constructor clamps components up to
``FLOOR = BUDGET_FLOOR_SCALE * total`` and removes the surplus
proportionally from the remaining components.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, InvariantViolation

#: component floor, as a fraction of the total budget
BUDGET_FLOOR_SCALE = 1e-9

#: relative tolerance on component sums
SUM_RTOL = 1e-9

COMPONENT_NAMES = ("logical", "t_states", "rotations")


def budget_floor(total: float) -> float:
    return BUDGET_FLOOR_SCALE * total


@dataclass(frozen=True)
class BudgetDistribution:
    """One split of ``total`` into (logical, t_states, rotations)."""

    logical: float
    t_states: float
    rotations: float
    total: float

    def components(self):
        return (self.logical, self.t_states, self.rotations)

    def fractions(self):
        return tuple(c / self.total for c in self.components())

    def validate(self) -> "BudgetDistribution":
        if not 0.0 < self.total < 1.0:
            raise InvariantViolation(f"total budget must be in (0, 1), got {self.total}")
        floor = budget_floor(self.total)
        for name, value in zip(COMPONENT_NAMES, self.components()):
            if not value > 0.0 or not value < 1.0 or not math.isfinite(value):
                raise InvariantViolation(f"{name} budget must be in (0, 1), got {value}")
            if value < floor * (1.0 - 1e-12):
                raise InvariantViolation(f"{name} budget {value} is below the floor {floor}")
        total = math.fsum(self.components())
        if abs(total - self.total) > SUM_RTOL * self.total:
            raise InvariantViolation(
                f"components sum to {total}, expected {self.total} (rel. tol. {SUM_RTOL})"
            )
        return self

    def to_dict(self) -> dict:
        return {
            "logical": self.logical,
            "t_states": self.t_states,
            "rotations": self.rotations,
            "total": self.total,
        }


def _check_total(total: float) -> None:
    if not 0.0 < total < 1.0:
        raise InvariantViolation(f"total budget must be in (0, 1), got {total}")


def uniform_distribution(total: float) -> BudgetDistribution:
    """The baseline: the total split equally three ways."""
    _check_total(total)
    third = total / 3.0
    return BudgetDistribution(third, third, third, total)


def _apply_floor(rows: np.ndarray, total: float) -> np.ndarray:
    """Clamp row components up to the floor, rescaling the rest (in place).

    Rows that already satisfy the floor are left untouched so the common
    path is exactly the plain normalization.
    """
    floor = budget_floor(total)
    needy = rows.min(axis=1) < floor
    if needy.any():
        block = np.maximum(rows[needy], floor)
        excess = block - floor
        scale = (total - 3.0 * floor) / excess.sum(axis=1, keepdims=True)
        rows[needy] = floor + excess * scale
    return rows


def normalize(raw, total: float) -> BudgetDistribution:
    """Rescale a non-negative triple so its components sum to ``total``.

    Raises :class:`DegenerateInput` when no component is positive.
    """
    _check_total(total)
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (3,):
        raise InvariantViolation(f"expected 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise InvariantViolation(f"components must be finite and non-negative, got {arr.tolist()}")
    s = arr.sum()
    if s <= 0.0:
        raise DegenerateInput("cannot normalize an all-zero budget triple")
    rows = _apply_floor((arr / s * total)[None, :].copy(), total)
    return BudgetDistribution(float(rows[0, 0]), float(rows[0, 1]), float(rows[0, 2]), total)


def sample_matrix(rng: np.random.Generator, total: float, n: int) -> np.ndarray:
    """Draw ``n`` distributions as an (n, 3) array.

    Each row is three independent Uniform(0,1) draws rescaled by
    ``total / sum``, then floor-clamped.  Consuming the generator three
    values at a time keeps single and batched sampling on the same stream.
    """
    _check_total(total)
    u = rng.uniform(0.0, 1.0, size=(n, 3))
    sums = u.sum(axis=1, keepdims=True)
    while np.any(sums == 0.0):  # measure-zero; resample those rows
        zero = sums[:, 0] == 0.0
        u[zero] = rng.uniform(0.0, 1.0, size=(int(zero.sum()), 3))
        sums = u.sum(axis=1, keepdims=True)
    return _apply_floor(u / sums * total, total)


def sample_distribution(rng: np.random.Generator, total: float) -> BudgetDistribution:
    """Draw one random distribution from the caller's generator."""
    row = sample_matrix(rng, total, 1)[0]
    return BudgetDistribution(float(row[0]), float(row[1]), float(row[2]), total)


def sample_distributions(rng: np.random.Generator, total: float, n: int):
    """Draw ``n`` distributions (same stream as ``n`` single draws)."""
    rows = sample_matrix(rng, total, n)
    return [BudgetDistribution(float(r[0]), float(r[1]), float(r[2]), total) for r in rows]
