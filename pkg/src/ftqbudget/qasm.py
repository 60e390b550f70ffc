"""Minimal OpenQASM 2.0 reader that tallies gates.

Supported input, one statement per ``;``:

* ``OPENQASM 2.x;`` version line (required first statement),
* ``include "...";`` (ignored),
* ``qreg name[n];`` / ``creg name[n];``,
* gate applications from ``h s sdg x y z cx cz t tdg rx ry rz ccx`` on
  indexed qubits (``q[i]``), rotation gates with one angle argument,
* ``measure q[i] -> c[j];``,
* ``barrier ...;`` (ignored) and ``//`` comments.

Angles are decimal literals or pi expressions combined with ``*`` and ``/``
(``pi``, ``pi/2``, ``-pi/4``, ``0.25*pi``, ``3*pi/4``).  Controlled
rotations are not decomposed here; supply circuits already lowered to the
supported set.
"""

import math
import re

from .circuits import GateCounts, ROTATION_GATES, SUPPORTED_GATES, is_clifford_angle
from .errors import EmptyCircuitError, QasmSyntaxError, UnsupportedGateError

GATE_ARITY = {
    "h": 1, "s": 1, "sdg": 1, "x": 1, "y": 1, "z": 1, "t": 1, "tdg": 1,
    "rx": 1, "ry": 1, "rz": 1,
    "cx": 2, "cz": 2,
    "ccx": 3,
}

_VERSION_RE = re.compile(r"^OPENQASM\s+2(\.\d+)?$")
_REG_RE = re.compile(r"^(qreg|creg)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$")
_INCLUDE_RE = re.compile(r"^include\s+\"[^\"]*\"$")
_QUBIT_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$")
_HEAD_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)")
_NUMBER_RE = re.compile(r"^[0-9]+(\.[0-9]*)?([eE][+-]?[0-9]+)?$|^\.[0-9]+([eE][+-]?[0-9]+)?$")


def _parse_angle(text, line_no):
    """Evaluate a pi/number product-quotient expression."""
    expr = text.strip()
    if not expr:
        raise QasmSyntaxError(line_no, "empty rotation angle")
    sign = 1.0
    if expr[0] in "+-":
        sign = -1.0 if expr[0] == "-" else 1.0
        expr = expr[1:].strip()
    tokens = re.split(r"([*/])", expr)
    value = None
    op = "*"
    for token in tokens:
        token = token.strip()
        if token in ("*", "/"):
            if value is None:
                raise QasmSyntaxError(line_no, f"malformed angle '{text.strip()}'")
            op = token
            continue
        if token == "pi":
            term = math.pi
        elif _NUMBER_RE.match(token):
            term = float(token)
        else:
            raise QasmSyntaxError(line_no, f"malformed angle '{text.strip()}'")
        if value is None:
            value = term
        elif op == "*":
            value = value * term
        else:
            if term == 0.0:
                raise QasmSyntaxError(line_no, "division by zero in angle")
            value = value / term
        op = None
    if value is None or op is not None:
        raise QasmSyntaxError(line_no, f"malformed angle '{text.strip()}'")
    return sign * value


def _statements(source_text):
    """Yield (line_no, statement) with comments stripped.

    Statements must be terminated by ';' on their own line; several
    statements may share a line.
    """
    for line_no, raw in enumerate(source_text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if not line.endswith(";"):
            raise QasmSyntaxError(line_no, "statement does not end with ';'")
        for stmt in line.split(";"):
            stmt = stmt.strip()
            if stmt:
                yield line_no, stmt


class _Parser:
    def __init__(self):
        self.qregs = {}
        self.cregs = {}
        self.tally = {name: 0 for name in SUPPORTED_GATES}
        self.rotation_angles = []
        self.layer_count = 0
        self._layer_qubits = set()
        self.saw_version = False

    def qubit_ref(self, text, line_no):
        m = _QUBIT_RE.match(text.strip())
        if not m:
            raise QasmSyntaxError(line_no, f"expected an indexed qubit, got '{text.strip()}'")
        name, idx = m.group(1), int(m.group(2))
        if name not in self.qregs:
            raise QasmSyntaxError(line_no, f"unknown quantum register '{name}'")
        if idx >= self.qregs[name]:
            raise QasmSyntaxError(line_no, f"index {idx} out of range for qreg {name}[{self.qregs[name]}]")
        return (name, idx)

    def clbit_ref(self, text, line_no):
        m = _QUBIT_RE.match(text.strip())
        if not m:
            raise QasmSyntaxError(line_no, f"expected an indexed classical bit, got '{text.strip()}'")
        name, idx = m.group(1), int(m.group(2))
        if name not in self.cregs:
            raise QasmSyntaxError(line_no, f"unknown classical register '{name}'")
        if idx >= self.cregs[name]:
            raise QasmSyntaxError(line_no, f"index {idx} out of range for creg {name}[{self.cregs[name]}]")
        return (name, idx)

    def note_rotation(self, qubit, angle):
        self.rotation_angles.append(angle)
        if is_clifford_angle(angle):
            return
        # greedy layering: start a new layer only when this qubit already
        # carries a synthesis rotation in the current layer
        if qubit in self._layer_qubits:
            self.layer_count += 1
            self._layer_qubits = {qubit}
        else:
            self._layer_qubits.add(qubit)

    def finish_layers(self):
        if self._layer_qubits:
            self.layer_count += 1
            self._layer_qubits = set()

    def handle(self, line_no, stmt):
        if not self.saw_version:
            if _VERSION_RE.match(stmt):
                self.saw_version = True
                return
            raise QasmSyntaxError(line_no, "expected an 'OPENQASM 2.0' version line first")
        if _VERSION_RE.match(stmt):
            raise QasmSyntaxError(line_no, "duplicate version line")
        if _INCLUDE_RE.match(stmt):
            return
        m = _REG_RE.match(stmt)
        if m:
            kind, name, size = m.group(1), m.group(2), int(m.group(3))
            regs = self.qregs if kind == "qreg" else self.cregs
            if name in self.qregs or name in self.cregs:
                raise QasmSyntaxError(line_no, f"register '{name}' already declared")
            if size < 1:
                raise QasmSyntaxError(line_no, f"register '{name}' must have positive size")
            regs[name] = size
            return
        head = _HEAD_RE.match(stmt)
        if not head:
            raise QasmSyntaxError(line_no, f"unrecognized statement '{stmt}'")
        name = head.group(1)
        if name == "barrier":
            return
        if name == "measure":
            self.handle_measure(line_no, stmt[len(name):])
            return
        if name not in GATE_ARITY:
            raise UnsupportedGateError(name, line_no)
        self.handle_gate(line_no, name, stmt[len(name):])

    def handle_measure(self, line_no, rest):
        parts = rest.split("->")
        if len(parts) != 2:
            raise QasmSyntaxError(line_no, "measure must be 'measure q[i] -> c[j]'")
        self.qubit_ref(parts[0], line_no)
        self.clbit_ref(parts[1], line_no)
        self.tally["measure"] += 1

    def handle_gate(self, line_no, name, rest):
        rest = rest.strip()
        angle = None
        if name in ROTATION_GATES:
            if not rest.startswith("("):
                raise QasmSyntaxError(line_no, f"{name} requires an angle argument")
            close = rest.find(")")
            if close < 0:
                raise QasmSyntaxError(line_no, f"unterminated angle in '{name}' statement")
            angle = _parse_angle(rest[1:close], line_no)
            rest = rest[close + 1:].strip()
        elif rest.startswith("("):
            raise QasmSyntaxError(line_no, f"{name} takes no parameters")
        operands = [p for p in (s.strip() for s in rest.split(",")) if p]
        if len(operands) != GATE_ARITY[name]:
            raise QasmSyntaxError(
                line_no, f"{name} expects {GATE_ARITY[name]} qubit operand(s), got {len(operands)}"
            )
        qubits = [self.qubit_ref(op, line_no) for op in operands]
        if len(set(qubits)) != len(qubits):
            raise QasmSyntaxError(line_no, f"{name} operands must be distinct qubits")
        self.tally[name] += 1
        if angle is not None:
            self.note_rotation(qubits[0], angle)


def parse_qasm(source_text: str) -> GateCounts:
    """Tally a QASM document into :class:`GateCounts`.

    Raises :class:`UnsupportedGateError` for a mnemonic outside the supported
    set, :class:`QasmSyntaxError` for malformed statements (both carry the
    line number), and :class:`EmptyCircuitError` when no qreg is declared.
    """
    parser = _Parser()
    for line_no, stmt in _statements(source_text):
        parser.handle(line_no, stmt)
    if not parser.qregs:
        raise EmptyCircuitError("no quantum register declared")
    parser.finish_layers()
    return GateCounts(
        gates={name: count for name, count in parser.tally.items() if count},
        qubit_count=sum(parser.qregs.values()),
        rotation_layer_count=parser.layer_count,
        rotation_angles=tuple(parser.rotation_angles),
    ).validate()
