"""Exception hierarchy. The CLI maps these onto exit codes."""

from __future__ import annotations

from typing import Sequence


class LevicoolError(Exception):
    exit_code: int = 1


class DomainError(LevicoolError, ValueError):
    pass


class ConfigError(LevicoolError):
    exit_code = 2

    def __init__(self, problems: Sequence[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid config:\n  " + "\n  ".join(self.problems))


class FitError(LevicoolError):
    def __init__(self, message: str, *, scan_id: str | None = None, residual: float | None = None):
        self.scan_id = scan_id
        self.residual = residual
        super().__init__(message)


class InstabilityError(LevicoolError):
    def __init__(self, message: str, eigenvalues=None):
        self.eigenvalues = eigenvalues
        if eigenvalues is not None:
            message = f"{message} (eigenvalues: {list(eigenvalues)})"
        super().__init__(message)


class SolverError(LevicoolError):
    def __init__(self, message: str, *, residual: float | None = None):
        self.residual = residual
        super().__init__(message)


class UnphysicalAsymmetryError(LevicoolError):
    pass


class CalibrationError(LevicoolError):
    pass


class PreconditionError(LevicoolError):
    pass


class AcceptanceError(LevicoolError):
    def __init__(self, failed_rows: list[str]):
        self.failed_rows = failed_rows
        super().__init__("acceptance failed: " + ", ".join(failed_rows))


def require_positive(**values: float) -> None:
    # shared domain check, names the first offending argument
    for name, v in values.items():
        if not (v > 0):
            raise DomainError(f"{name} must be > 0, got {v!r}")


def require_non_negative(**values: float) -> None:
    for name, v in values.items():
        if not (v >= 0):
            raise DomainError(f"{name} must be >= 0, got {v!r}")
