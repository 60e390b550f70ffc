"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`FtqBudgetError` so the CLI
and the HTTP service can map failures to exit codes / status codes in one
place.
"""


class FtqBudgetError(Exception):
    """Base class for all errors raised by this package."""


# --- schema / invariant problems (file parsing, record validation) ---------


class SchemaError(FtqBudgetError):
    """A JSON/TOML document does not match the expected schema."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        super().__init__(message)


class InvariantViolation(FtqBudgetError):
    """A value violates a documented structural invariant."""


class DegenerateInput(FtqBudgetError):
    """All-zero (or otherwise unusable) input where a direction is required."""


# --- QASM parsing -----------------------------------------------------------


class QasmError(FtqBudgetError):
    """Base class for circuit-parsing failures."""


class UnsupportedGateError(QasmError):
    def __init__(self, gate, line):
        self.gate = gate
        self.line = line
        super().__init__(f"line {line}: unsupported gate '{gate}'")


class QasmSyntaxError(QasmError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class EmptyCircuitError(QasmError):
    """No quantum register was declared."""


# --- resource estimation ----------------------------------------------------


class EstimationError(FtqBudgetError):
    """Base class for estimator failures.

    ``component`` names the budget component ("logical", "t_states",
    "rotations") that made the stage infeasible, when known.
    """

    def __init__(self, message, component=None):
        self.component = component
        super().__init__(message)


class BudgetTooSmall(EstimationError):
    """A budget component underflowed the arithmetic model."""


class DistanceOverflow(EstimationError):
    """No code distance up to the search cap satisfies the error bound."""


class TargetUnreachable(EstimationError):
    """Distillation cannot reach the target error within the round cap."""


# --- dataset accumulation ---------------------------------------------------


class AccumulationFailed(FtqBudgetError):
    """No circuit produced a dataset record."""


class DatasetTooSmall(FtqBudgetError):
    """Not enough records for the requested operation."""


class MixedBudgets(FtqBudgetError):
    """Records (or records and model) disagree on total budget or metric."""


# --- model serialization ----------------------------------------------------


class VersionMismatch(FtqBudgetError):
    """Model file was written by an incompatible format version."""


class CorruptModel(FtqBudgetError):
    """Model file is unreadable or fails validation."""
