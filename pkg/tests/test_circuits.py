import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftqbudget.circuits import (
    GateCounts,
    LogicalCounts,
    derive_logical_counts,
    is_clifford_angle,
    load_logical_counts,
    save_logical_counts,
)
from ftqbudget.errors import InvariantViolation, SchemaError
from ftqbudget.qasm import parse_qasm


def test_clifford_angle_classification():
    for k in range(-8, 9):
        assert is_clifford_angle(k * math.pi / 2)
    assert not is_clifford_angle(0.7)
    assert not is_clifford_angle(math.pi / 4)
    assert is_clifford_angle(math.pi / 2 + 1e-13)
    assert not is_clifford_angle(math.pi / 2 + 1e-9)


def test_derive_excludes_clifford_rotations():
    counts = GateCounts(
        gates={"rz": 5},
        qubit_count=1,
        rotation_layer_count=2,
        rotation_angles=(math.pi / 2, math.pi / 2, math.pi / 2, 0.7, 0.7),
    )
    logical = derive_logical_counts(counts)
    assert logical.rotation_count == 2
    assert logical.rotation_depth == 2


def test_derive_sums_t_gates():
    counts = GateCounts(gates={"t": 4, "tdg": 1}, qubit_count=1)
    assert derive_logical_counts(counts).t_count == 5


def test_derive_fixture_circuit(three_qubit_rx_source, three_qubit_rx_counts):
    logical = derive_logical_counts(parse_qasm(three_qubit_rx_source))
    assert logical == three_qubit_rx_counts


def test_derive_never_exceeds_source_tallies():
    counts = parse_qasm(
        "OPENQASM 2.0;\nqreg q[2];\ncreg c[2];\n"
        "t q[0]; tdg q[1]; rx(pi/2) q[0]; rx(0.3) q[1]; rx(-pi) q[0];\n"
    )
    logical = derive_logical_counts(counts)
    rotation_tally = counts.gates["rx"]
    clifford_rotations = rotation_tally - counts.synthesis_rotation_count()
    assert logical.rotation_count == 1
    assert logical.rotation_count + clifford_rotations == rotation_tally
    assert logical.t_count == counts.gates["t"] + counts.gates["tdg"]


def test_gate_counts_validation():
    with pytest.raises(InvariantViolation):
        GateCounts(gates={"h": -1}, qubit_count=1).validate()
    with pytest.raises(InvariantViolation):
        GateCounts(gates={"bogus": 1}, qubit_count=1).validate()
    with pytest.raises(InvariantViolation):
        # layer count exceeding the synthesis rotation tally
        GateCounts(
            gates={"rx": 1}, qubit_count=1, rotation_layer_count=2, rotation_angles=(0.3,)
        ).validate()


def test_logical_counts_validation():
    with pytest.raises(InvariantViolation):
        LogicalCounts(qubits=0).validate()
    with pytest.raises(InvariantViolation):
        LogicalCounts(qubits=1, rotation_count=1, rotation_depth=2).validate()
    with pytest.raises(InvariantViolation):
        LogicalCounts(qubits=1, rotation_count=2, rotation_depth=0).validate()
    with pytest.raises(InvariantViolation):
        LogicalCounts(qubits=1, rotation_depth=1).validate()


def test_load_valid_document():
    text = json.dumps(
        {
            "qubits": 3,
            "t_count": 0,
            "rotation_count": 5,
            "rotation_depth": 5,
            "toffoli_count": 0,
            "measurement_count": 3,
        }
    )
    counts = load_logical_counts(text)
    assert counts.qubits == 3
    assert counts.rotation_count == 5


def test_load_rejects_invariant_violations():
    text = json.dumps(
        {
            "qubits": 0,
            "t_count": 0,
            "rotation_count": 0,
            "rotation_depth": 0,
            "toffoli_count": 0,
            "measurement_count": 0,
        }
    )
    with pytest.raises(InvariantViolation):
        load_logical_counts(text)


def test_load_names_offending_field():
    with pytest.raises(SchemaError) as excinfo:
        load_logical_counts('{"qubits": 1, "t_count": "three"}')
    assert excinfo.value.field == "t_count"
    with pytest.raises(SchemaError) as excinfo:
        load_logical_counts('{"qubits": 1}')
    assert excinfo.value.field == "t_count"


def test_strict_mode_rejects_extras_lenient_ignores():
    payload = {
        "qubits": 1,
        "t_count": 0,
        "rotation_count": 0,
        "rotation_depth": 0,
        "toffoli_count": 0,
        "measurement_count": 0,
        "vendor_extension": 1,
    }
    with pytest.raises(SchemaError) as excinfo:
        load_logical_counts(json.dumps(payload))
    assert excinfo.value.field == "vendor_extension"
    assert load_logical_counts(json.dumps(payload), lenient=True).qubits == 1


@st.composite
def logical_counts_strategy(draw):
    rotation_count = draw(st.integers(min_value=0, max_value=10**6))
    if rotation_count:
        rotation_depth = draw(st.integers(min_value=1, max_value=rotation_count))
    else:
        rotation_depth = 0
    return LogicalCounts(
        qubits=draw(st.integers(min_value=1, max_value=10**5)),
        t_count=draw(st.integers(min_value=0, max_value=10**7)),
        rotation_count=rotation_count,
        rotation_depth=rotation_depth,
        toffoli_count=draw(st.integers(min_value=0, max_value=10**6)),
        measurement_count=draw(st.integers(min_value=0, max_value=10**7)),
    )


@settings(max_examples=100)
@given(logical_counts_strategy())
def test_save_load_round_trip(counts):
    assert load_logical_counts(save_logical_counts(counts)) == counts
