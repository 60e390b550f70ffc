"""Deterministic surface-code resource model.

Maps (logical counts, budget distribution, physical parameters) to a
physical-qubit count, a runtime, and their product, the space-time cost.
The three budget components are consumed by three independent stages:

* ``logical``   -> code-distance selection.  Per qubit and logical cycle the
  encoded error is ``p_L(d) = a * (p_phys / p_threshold) ** ((d + 1) / 2)``;
  the smallest odd ``d >= 3`` with ``q_alg * cycles * p_L(d) <= logical``
  is used.
* ``t_states``  -> T-state distillation.  Starting from the injection error,
  each 15-to-1 round maps ``e -> 35 * e**3``; rounds are added until the
  per-T-state target ``t_states / total_t`` is met.
* ``rotations`` -> gate synthesis.  Each arbitrary-angle rotation is
  approximated by a Clifford+T sequence of length
  ``ceil(A * log2(1 / eps_r) + B)`` with the per-rotation target
  ``eps_r = rotations / rotation_count``.

Layout accounting: ``2 d**2`` physical qubits per logical tile, algorithmic
qubit count ``2 Q + ceil(sqrt(8 Q)) + 1`` (routing overhead of the assumed
computation scheme), one logical cycle = ``cycle_factor * d`` physical
cycles of ``t_phys`` seconds.  A Toffoli costs 4 T states and 3 logical
cycles.  Factories occupy ``16 * 2 d_f**2 * rounds`` physical qubits each
and emit one T state per ``rounds * 11 * d_f`` physical cycles; enough
factories run in parallel to sustain the algorithm's wall time.

All operations are pure; identical inputs give bit-identical outputs.
"""

import json
import math
from dataclasses import dataclass, replace

from .budgets import BudgetDistribution
from .circuits import LogicalCounts
from .errors import (
    BudgetTooSmall,
    DistanceOverflow,
    EstimationError,
    InvariantViolation,
    SchemaError,
    TargetUnreachable,
)

# rotation synthesis T-count fit: t = ceil(A * log2(1/eps) + B)
SYNTHESIS_COEFF_A = 0.53
SYNTHESIS_COEFF_B = 5.3

T_STATES_PER_TOFFOLI = 4
CYCLES_PER_TOFFOLI = 3

# 15-to-1 distillation: e -> DISTILLATION_CUBIC_COEFF * e**3 per round
DISTILLATION_CUBIC_COEFF = 35.0
MAX_DISTILLATION_ROUNDS = 10

# factory footprint/timing, in logical tiles and physical cycles per round
FACTORY_TILES_PER_ROUND = 16
FACTORY_CYCLES_PER_ROUND = 11
# factory Clifford noise kept an order of magnitude under the target:
# FACTORY_CLIFFORD_OPS * rounds * p_L(d_f) <= FACTORY_NOISE_MARGIN * target
FACTORY_CLIFFORD_OPS = 31
FACTORY_NOISE_MARGIN = 0.1

MIN_CODE_DISTANCE = 3
MAX_CODE_DISTANCE = 99

PARAM_FIELDS = ("p_phys", "p_threshold", "prefactor_a", "t_phys", "cycle_factor", "p_injection")


@dataclass(frozen=True)
class PhysicalParams:
    """Hardware assumptions of the cost model.

    ``t_phys`` is the physical cycle time in seconds; ``cycle_factor`` the
    number of physical cycles per logical cycle per unit code distance.
    """

    p_phys: float = 1e-3
    p_threshold: float = 1e-2
    prefactor_a: float = 0.03
    t_phys: float = 1e-7
    cycle_factor: float = 6.0
    p_injection: float = 1e-2

    def validate(self) -> "PhysicalParams":
        if not 0.0 < self.p_phys < self.p_threshold < 1.0:
            raise InvariantViolation("need 0 < p_phys < p_threshold < 1")
        if self.prefactor_a <= 0.0:
            raise InvariantViolation("prefactor_a must be positive")
        if self.t_phys <= 0.0:
            raise InvariantViolation("t_phys must be positive")
        if self.cycle_factor < 1.0:
            raise InvariantViolation("cycle_factor must be >= 1")
        if not 0.0 < self.p_injection < 1.0:
            raise InvariantViolation("p_injection must be in (0, 1)")
        return self

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_FIELDS}


DEFAULT_PARAMS = PhysicalParams()


def qubits_per_tile(distance: int) -> int:
    """Physical qubits of one logical tile at the given code distance."""
    return 2 * distance * distance


def logical_error_rate(distance: int, params: PhysicalParams) -> float:
    """Encoded error per logical qubit per logical cycle."""
    return params.prefactor_a * (params.p_phys / params.p_threshold) ** ((distance + 1) / 2)


@dataclass(frozen=True)
class TFactoryDesign:
    """One distillation pipeline: rounds, footprint, throughput."""

    rounds: int
    factory_distance: int
    output_error: float
    physical_qubits_per_factory: int
    seconds_per_tstate: float

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "factory_distance": self.factory_distance,
            "output_error": self.output_error,
            "physical_qubits_per_factory": self.physical_qubits_per_factory,
            "seconds_per_tstate": self.seconds_per_tstate,
        }


@dataclass(frozen=True)
class ResourceEstimate:
    physical_qubits: int
    runtime_seconds: float
    space_time_cost: float
    code_distance: int
    logical_cycles: int
    total_t_states: int
    factory_count: int
    factory_design: TFactoryDesign
    achieved_logical_error: float
    achieved_tstate_error: float
    achieved_rotation_error: float

    def to_dict(self) -> dict:
        return {
            "physical_qubits": self.physical_qubits,
            "runtime_seconds": self.runtime_seconds,
            "space_time_cost": self.space_time_cost,
            "code_distance": self.code_distance,
            "logical_cycles": self.logical_cycles,
            "total_t_states": self.total_t_states,
            "factory_count": self.factory_count,
            "factory_design": self.factory_design.to_dict(),
            "achieved_logical_error": self.achieved_logical_error,
            "achieved_tstate_error": self.achieved_tstate_error,
            "achieved_rotation_error": self.achieved_rotation_error,
        }


def algorithmic_qubits(counts: LogicalCounts) -> int:
    """Logical qubits including routing overhead: 2Q + ceil(sqrt(8Q)) + 1."""
    q = counts.qubits
    s = math.isqrt(8 * q)
    if s * s < 8 * q:
        s += 1
    return 2 * q + s + 1


def rotation_synthesis(counts: LogicalCounts, eps_rotations: float):
    """T cost of approximating every arbitrary-angle rotation.

    Returns ``(t_per_rotation, achieved_rotation_error)``; circuits without
    rotations cost nothing and achieve zero error.
    """
    if counts.rotation_count == 0:
        return 0, 0.0
    if eps_rotations <= 0.0:
        raise BudgetTooSmall("rotations budget must be positive", component="rotations")
    eps_per_rotation = eps_rotations / counts.rotation_count
    if eps_per_rotation <= 0.0:
        raise BudgetTooSmall(
            "per-rotation error target underflowed to zero", component="rotations"
        )
    t_per_rotation = math.ceil(
        SYNTHESIS_COEFF_A * math.log2(1.0 / eps_per_rotation) + SYNTHESIS_COEFF_B
    )
    achieved = counts.rotation_count * 2.0 ** (
        -(t_per_rotation - SYNTHESIS_COEFF_B) / SYNTHESIS_COEFF_A
    )
    # the ceil guarantees achieved <= eps_rotations; min() shields the
    # comparison from last-ulp rounding when the ceil lands exactly
    return t_per_rotation, min(achieved, eps_rotations)


def total_t_states(counts: LogicalCounts, t_per_rotation: int) -> int:
    """T states consumed by T gates, Toffolis, and synthesized rotations."""
    return (
        counts.t_count
        + T_STATES_PER_TOFFOLI * counts.toffoli_count
        + counts.rotation_count * t_per_rotation
    )


def logical_cycles(counts: LogicalCounts, t_per_rotation: int) -> int:
    """Depth model: rotation layers synthesize sequentially on the critical path."""
    cycles = (
        counts.measurement_count
        + counts.t_count
        + CYCLES_PER_TOFFOLI * counts.toffoli_count
        + counts.rotation_depth * t_per_rotation
    )
    return max(cycles, 1)


def select_code_distance(q_alg: int, cycles: int, eps_logical: float, params: PhysicalParams):
    """Smallest odd distance whose total encoded error fits the budget."""
    if eps_logical <= 0.0:
        raise DistanceOverflow("logical budget must be positive", component="logical")
    volume = q_alg * cycles
    for distance in range(MIN_CODE_DISTANCE, MAX_CODE_DISTANCE + 1, 2):
        achieved = volume * logical_error_rate(distance, params)
        if achieved <= eps_logical:
            return distance, achieved
    raise DistanceOverflow(
        f"no code distance <= {MAX_CODE_DISTANCE} reaches a logical error of {eps_logical:.3e}",
        component="logical",
    )


def design_t_factory(target_error: float, params: PhysicalParams) -> TFactoryDesign:
    """Pick distillation rounds and factory distance for a per-T-state target.

    Zero rounds means the raw injected state already meets the target; a
    bare injection takes one physical cycle and no distillation footprint
    beyond a single tile stage.
    """
    if not 0.0 < target_error < 1.0:
        raise EstimationError(
            f"per-T-state target must be in (0, 1), got {target_error}", component="t_states"
        )
    error = params.p_injection
    rounds = 0
    while error > target_error:
        rounds += 1
        if rounds > MAX_DISTILLATION_ROUNDS:
            raise TargetUnreachable(
                f"distillation target {target_error:.3e} needs more than "
                f"{MAX_DISTILLATION_ROUNDS} rounds",
                component="t_states",
            )
        error = DISTILLATION_CUBIC_COEFF * error**3

    if rounds == 0:
        factory_distance = MIN_CODE_DISTANCE
    else:
        noise_budget = FACTORY_NOISE_MARGIN * target_error
        factory_distance = None
        for distance in range(MIN_CODE_DISTANCE, MAX_CODE_DISTANCE + 1, 2):
            clifford_noise = FACTORY_CLIFFORD_OPS * rounds * logical_error_rate(distance, params)
            if clifford_noise <= noise_budget:
                factory_distance = distance
                break
        if factory_distance is None:
            raise DistanceOverflow(
                f"no factory distance <= {MAX_CODE_DISTANCE} keeps Clifford noise under "
                f"{noise_budget:.3e}",
                component="t_states",
            )

    if rounds == 0:
        seconds_per_tstate = params.t_phys
    else:
        seconds_per_tstate = rounds * FACTORY_CYCLES_PER_ROUND * factory_distance * params.t_phys
    return TFactoryDesign(
        rounds=rounds,
        factory_distance=factory_distance,
        output_error=error,
        physical_qubits_per_factory=FACTORY_TILES_PER_ROUND
        * qubits_per_tile(factory_distance)
        * max(rounds, 1),
        seconds_per_tstate=seconds_per_tstate,
    )


def count_factories(
    total_t: int,
    cycles: int,
    code_distance: int,
    factory: TFactoryDesign,
    params: PhysicalParams,
) -> int:
    """Factories needed to deliver all T states within the algorithm wall time."""
    if total_t == 0:
        return 0
    wall_time = cycles * params.cycle_factor * code_distance * params.t_phys
    return max(1, math.ceil(total_t * factory.seconds_per_tstate / wall_time))


def estimate(
    counts: LogicalCounts,
    budget: BudgetDistribution,
    params: PhysicalParams = DEFAULT_PARAMS,
) -> ResourceEstimate:
    """Full estimate for one circuit under one budget distribution.

    Composes the stage operations in a fixed order; raises the stage errors
    (:class:`BudgetTooSmall`, :class:`DistanceOverflow`,
    :class:`TargetUnreachable`), each naming the offending budget component.
    """
    counts.validate()
    budget.validate()
    params.validate()

    q_alg = algorithmic_qubits(counts)
    t_per_rotation, achieved_rotation = rotation_synthesis(counts, budget.rotations)
    total_t = total_t_states(counts, t_per_rotation)
    cycles = logical_cycles(counts, t_per_rotation)
    distance, achieved_logical = select_code_distance(q_alg, cycles, budget.logical, params)
    factory = design_t_factory(budget.t_states / max(total_t, 1), params)
    n_factories = count_factories(total_t, cycles, distance, factory, params)

    physical_qubits = (
        q_alg * qubits_per_tile(distance) + n_factories * factory.physical_qubits_per_factory
    )
    runtime_seconds = cycles * params.cycle_factor * distance * params.t_phys
    achieved_tstate = min(total_t * factory.output_error, budget.t_states) if total_t else 0.0

    return ResourceEstimate(
        physical_qubits=physical_qubits,
        runtime_seconds=runtime_seconds,
        space_time_cost=physical_qubits * runtime_seconds,
        code_distance=distance,
        logical_cycles=cycles,
        total_t_states=total_t,
        factory_count=n_factories,
        factory_design=factory,
        achieved_logical_error=achieved_logical,
        achieved_tstate_error=achieved_tstate,
        achieved_rotation_error=achieved_rotation,
    )


def load_physical_params(text: str, fmt: str = "json", strict: bool = True) -> PhysicalParams:
    """Build :class:`PhysicalParams` from a JSON or TOML document.

    Missing fields take defaults; unknown fields are rejected unless
    ``strict`` is off.
    """
    if fmt == "json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    elif fmt == "toml":
        import tomli

        try:
            raw = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise SchemaError(f"invalid TOML: {exc}") from exc
    else:
        raise SchemaError(f"unknown params format '{fmt}' (expected json or toml)")
    if not isinstance(raw, dict):
        raise SchemaError("expected a table/object of parameter fields")
    if strict:
        extras = sorted(set(raw) - set(PARAM_FIELDS))
        if extras:
            raise SchemaError(f"unknown parameter '{extras[0]}'", field=extras[0])
    overrides = {}
    for name in PARAM_FIELDS:
        if name in raw:
            value = raw[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"parameter '{name}' must be a number", field=name)
            overrides[name] = float(value)
    return replace(DEFAULT_PARAMS, **overrides).validate()
