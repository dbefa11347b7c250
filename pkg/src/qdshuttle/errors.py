"""Exception types shared across the toolchain.

Every error carries a stable ``code`` string; the CLI reports it verbatim in
its machine-readable error JSON.
"""

from __future__ import annotations


class QdsError(Exception):
    code = "error"

    def __init__(self, message: str = "", **detail):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail

    def to_json(self) -> dict:
        out = {"error": self.code, "message": self.message}
        if self.detail:
            out["detail"] = self.detail
        return out


class InvalidDimensions(QdsError):
    code = "invalid-dimensions"


class InvalidConfig(QdsError):
    code = "invalid-config"


class NotAdjacent(QdsError):
    code = "not-adjacent"


class UnknownElectron(QdsError):
    code = "unknown-electron"


class ParseError(QdsError):
    code = "parse-error"


class NonNativeGate(QdsError):
    code = "non-native-gate"


class OperandOutOfRange(QdsError):
    code = "operand-out-of-range"


class GateAfterMeasure(QdsError):
    code = "gate-after-measure"


class NotDownwardClosed(QdsError):
    code = "executed-not-downward-closed"


class CollisionError(QdsError):
    code = "collision"


class OffGridError(QdsError):
    code = "off-grid"


class InvalidLabel(QdsError):
    code = "invalid-label"


class StateBudgetExceeded(QdsError):
    code = "state-budget-exceeded"


class ReplayError(QdsError):
    """Raised when a procedure cannot be replayed.

    ``violations`` holds whatever the checker had collected up to and
    including the failing step.
    """

    code = "replay-error"

    def __init__(self, message: str = "", step: int | None = None, violations=None, **detail):
        super().__init__(message, step=step, **detail)
        self.step = step
        self.violations = list(violations or [])


class NotReadyState(QdsError):
    code = "not-ready-state"


class NoFeasibleSide(QdsError):
    code = "no-feasible-side"


class InfeasibleSide(QdsError):
    code = "infeasible-side"


class NoReturnSeat(QdsError):
    code = "no-return-seat"


class TooManyQubits(QdsError):
    code = "too-many-qubits"


class InternalError(QdsError):
    code = "internal-error"
