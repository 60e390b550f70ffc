"""Circuit featurization: gate tallies and the six-field logical counts.

``GateCounts`` is the raw per-mnemonic tally produced by the QASM parser
(angles of rotation gates are kept so that Clifford-angle rotations can be
told apart from rotations that need gate synthesis).  ``LogicalCounts`` is
the compact six-integer form consumed by the resource estimator and used as
the feature vector for the budget predictor.
"""

import json
import math
from dataclasses import dataclass, field

from .errors import InvariantViolation, SchemaError

SUPPORTED_GATES = frozenset(
    ["h", "s", "sdg", "x", "y", "z", "cx", "cz", "t", "tdg", "rx", "ry", "rz", "ccx", "measure"]
)
ROTATION_GATES = frozenset(["rx", "ry", "rz"])

#: absolute tolerance on (angle mod pi/2) below which a rotation counts as Clifford
CLIFFORD_ANGLE_TOL = 1e-12

COUNT_FIELDS = (
    "qubits",
    "t_count",
    "rotation_count",
    "rotation_depth",
    "toffoli_count",
    "measurement_count",
)


def is_clifford_angle(angle: float, tol: float = CLIFFORD_ANGLE_TOL) -> bool:
    """True if ``angle`` is a multiple of pi/2 within ``tol`` (absolute)."""
    half_pi = math.pi / 2.0
    r = math.fmod(abs(angle), half_pi)
    return min(r, half_pi - r) <= tol


@dataclass(frozen=True)
class GateCounts:
    """Per-gate tallies of a parsed circuit.

    ``gates`` maps each supported mnemonic to its count (rotation gates count
    every application, Clifford-angle or not).  ``rotation_angles`` holds one
    entry per rx/ry/rz application so later stages can classify them.
    ``rotation_layer_count`` counts greedy layers of synthesis-requiring
    (non-Clifford-angle) rotations.
    """

    gates: dict
    qubit_count: int
    rotation_layer_count: int = 0
    rotation_angles: tuple = field(default_factory=tuple)

    def gate_total(self) -> int:
        return sum(self.gates.values())

    def synthesis_rotation_count(self) -> int:
        return sum(1 for a in self.rotation_angles if not is_clifford_angle(a))

    def validate(self) -> "GateCounts":
        for name, count in self.gates.items():
            if name not in SUPPORTED_GATES:
                raise InvariantViolation(f"unknown gate mnemonic '{name}'")
            if count < 0:
                raise InvariantViolation(f"negative tally for '{name}'")
        if self.gate_total() > 0 and self.qubit_count < 1:
            raise InvariantViolation("non-empty circuit must have qubit_count >= 1")
        rotation_tally = sum(self.gates.get(g, 0) for g in ROTATION_GATES)
        if len(self.rotation_angles) != rotation_tally:
            raise InvariantViolation(
                f"{rotation_tally} rotation gates but {len(self.rotation_angles)} recorded angles"
            )
        if self.rotation_layer_count > self.synthesis_rotation_count():
            raise InvariantViolation("rotation_layer_count exceeds synthesis rotation tally")
        return self


@dataclass(frozen=True)
class LogicalCounts:
    """Six-integer featurization of a circuit."""

    qubits: int
    t_count: int = 0
    rotation_count: int = 0
    rotation_depth: int = 0
    toffoli_count: int = 0
    measurement_count: int = 0

    def validate(self) -> "LogicalCounts":
        for name in COUNT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvariantViolation(f"{name} must be an integer, got {value!r}")
            if value < 0:
                raise InvariantViolation(f"{name} must be non-negative, got {value}")
        if self.qubits < 1:
            raise InvariantViolation("qubits must be >= 1")
        if self.rotation_depth > self.rotation_count:
            raise InvariantViolation(
                f"rotation_depth ({self.rotation_depth}) exceeds rotation_count ({self.rotation_count})"
            )
        if (self.rotation_depth == 0) != (self.rotation_count == 0):
            raise InvariantViolation("rotation_depth must be zero exactly when rotation_count is zero")
        return self

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in COUNT_FIELDS}


def derive_logical_counts(counts: GateCounts) -> LogicalCounts:
    """Classify tallies into the six logical counts.

    Rotations at Clifford angles (multiples of pi/2 within
    ``CLIFFORD_ANGLE_TOL``) need no synthesis and are excluded from
    ``rotation_count``; T and Tdg both consume one T state.
    """
    counts.validate()
    gates = counts.gates
    return LogicalCounts(
        qubits=counts.qubit_count,
        t_count=gates.get("t", 0) + gates.get("tdg", 0),
        rotation_count=counts.synthesis_rotation_count(),
        rotation_depth=counts.rotation_layer_count,
        toffoli_count=gates.get("ccx", 0),
        measurement_count=gates.get("measure", 0),
    ).validate()


def load_logical_counts(json_text: str, lenient: bool = False) -> LogicalCounts:
    """Parse a logical-counts JSON document.

    Strict mode rejects unknown fields; ``lenient`` permits and ignores them.
    """
    try:
        raw = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("expected a JSON object")
    if not lenient:
        extras = sorted(set(raw) - set(COUNT_FIELDS))
        if extras:
            raise SchemaError(f"unknown field '{extras[0]}'", field=extras[0])
    values = {}
    for name in COUNT_FIELDS:
        if name not in raw:
            raise SchemaError(f"missing field '{name}'", field=name)
        value = raw[name]
        if not isinstance(value, int) or isinstance(value, bool):
            raise SchemaError(f"field '{name}' must be an integer", field=name)
        values[name] = value
    return LogicalCounts(**values).validate()


def save_logical_counts(counts: LogicalCounts) -> str:
    """Serialize to the canonical six-field JSON document."""
    counts.validate()
    return json.dumps(counts.to_dict(), indent=2) + "\n"
