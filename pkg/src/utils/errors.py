"""
Error hierarchy for the toolkit

Library code raises these; only the command-line entry point turns them into
exit codes and JSON payloads on stderr.
"""
from typing import Any, Dict, Optional


class GridRiskError(Exception):
    """
    Base class for all toolkit errors
    """

    exit_code = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        """
        Initialize the error

        Args:
            message (str): Human readable description
            context (dict, optional): Machine readable details (paths, indices, values)
        """
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    @property
    def code(self) -> str:
        return self.__class__.__name__

    def to_payload(self) -> Dict[str, Any]:
        """
        Serialize the error for the stderr JSON contract

        Returns:
            dict: {code, message, context}
        """
        return {
            "code": self.code,
            "message": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return str(value)


class ConfigError(GridRiskError, ValueError):
    """Invalid configuration or arguments (exit code 2)."""
    exit_code = 2


class DataError(GridRiskError, ValueError):
    """Input data violates a precondition (exit code 3)."""
    exit_code = 3


class NumericalError(GridRiskError, ValueError):
    """A computation is undefined or diverged (exit code 4)."""
    exit_code = 4


# Configuration / contract errors
class InvalidLevel(ConfigError):
    pass


class NegativeRho(ConfigError):
    pass


class KappaBelowOne(ConfigError):
    pass


class LeakageError(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class NonPositiveStep(ConfigError):
    pass


class UnstableStateMatrix(ConfigError):
    pass


# Data errors
class MissingHeader(DataError):
    pass


class DuplicateTimestamp(DataError):
    pass


class EmptySeries(DataError):
    pass


class NoOverlap(DataError):
    pass


class ConstantChannel(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class ColumnMismatch(DataError):
    pass


class NonPositiveActual(DataError):
    pass


class NonPositiveForecast(DataError):
    pass


class EmptySet(DataError):
    pass


class MissingLead(DataError):
    pass


class ConstantSeries(DataError):
    pass


class InsufficientOverlap(DataError):
    pass


class InsufficientData(DataError):
    pass


class InsufficientHistory(DataError):
    pass


class GapInWindow(DataError):
    pass


class QuantileCrossing(DataError):
    pass


# Numerical errors
class NonPositiveVariance(NumericalError):
    pass


class DegenerateDifferential(NumericalError):
    pass


class DegenerateSpread(NumericalError):
    pass


class NonFiniteState(NumericalError):
    pass


class DivergedLoss(NumericalError):
    pass


class DegenerateDesign(NumericalError):
    pass


class FoldError(GridRiskError):
    """
    A walk-forward fold failed; wraps the original error with the fold index
    """

    def __init__(self, fold_index: int, cause: Exception):
        context = {"fold": fold_index}
        if isinstance(cause, GridRiskError):
            context.update(cause.context)
            context["cause"] = cause.code
            self.exit_code = cause.exit_code
        else:
            context["cause"] = cause.__class__.__name__
        super().__init__(f"Fold {fold_index} failed: {cause}", context)
        self.cause = cause
