"""Structured error handling with semantic exit codes."""

import json
from contextlib import contextmanager
from enum import IntEnum
from typing import Iterator, NoReturn

import typer


class ExitCode(IntEnum):
    SUCCESS = 0
    USAGE = 1
    NUMERICAL = 2


class NonMarkovError(Exception):
    """Base error carrying a message plus optional structured detail."""

    def __init__(self, message: str, detail: str = ""):
        self.message = message
        self.detail = detail
        super().__init__(message)


class ConfigError(NonMarkovError):
    """Unreadable, unknown or out-of-range configuration values."""


class PlotError(NonMarkovError):
    """A CSV handed to the plotter is empty or lacks required columns."""


class StateError(NonMarkovError):
    """An initial state or state pair cannot be used."""


class DegeneratePairError(StateError):
    """Two states with zero Bloch difference: the trace distance is identically zero."""


class NumericalError(NonMarkovError):
    """Base for failures of the numerical core."""


class QuadratureError(NumericalError):
    """An integral did not reach its tolerance."""

    def __init__(self, message: str, estimate: float, error: float, detail: str = ""):
        self.estimate = estimate
        self.error = error
        super().__init__(message, detail or f"estimate={estimate!r} error={error!r}")


class CubatureError(QuadratureError):
    """A simplex cubature did not converge at its maximum order."""

    def __init__(self, message: str, estimate: float, error: float, order: int):
        self.order = order
        super().__init__(
            message,
            estimate,
            error,
            detail=f"estimate={estimate!r} error={error!r} order={order}",
        )


class PropagationError(NumericalError):
    """The Bloch ODE integrator gave up (step-size underflow or similar)."""


class InterpolationRangeError(NumericalError):
    """A time outside the span of a coefficient trace was requested."""


def exit_code_for(exc: NonMarkovError) -> ExitCode:
    """Map an exception to its exit code."""
    if isinstance(exc, NumericalError):
        return ExitCode.NUMERICAL
    return ExitCode.USAGE


def handle_error(
    code: ExitCode,
    message: str,
    detail: str = "",
    hint: str = "",
) -> NoReturn:
    """Print structured error JSON to stderr and exit with semantic code."""
    error_obj: dict = {
        "error": True,
        "code": code.value,
        "message": message,
    }
    if detail:
        error_obj["detail"] = detail
    if hint:
        error_obj["hint"] = hint

    typer.echo(json.dumps(error_obj, indent=2), err=True)
    raise SystemExit(code.value)


@contextmanager
def error_boundary() -> Iterator[None]:
    """Convert library errors raised inside a command into handle_error exits."""
    try:
        yield
    except NonMarkovError as e:
        handle_error(exit_code_for(e), e.message, detail=e.detail)
