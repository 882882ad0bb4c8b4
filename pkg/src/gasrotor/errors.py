"""Exception hierarchy shared by the library, the CLI and the HTTP service.

Every error carries a stable machine-readable ``code`` so that the CLI and
the service report identical codes for identical failures.
"""

from __future__ import annotations


class GasrotorError(Exception):
    """Base class; ``code`` identifies the failure, ``path`` the offending field."""

    code = "error"

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.path = path

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "path": self.path}


class FormatError(GasrotorError):
    """Malformed document (not parseable at all). Position-annotated when known."""

    code = "syntax_error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        pos = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + pos)
        self.line = line
        self.column = column


class InvariantError(GasrotorError):
    """A structurally valid document or edit violates a domain invariant."""

    code = "invariant_violation"


class UnknownMaterialError(GasrotorError):
    code = "unknown_material"


class UnknownFluidError(GasrotorError):
    code = "unknown_fluid"


class ConvergenceError(GasrotorError):
    """Iterative solve failed; ``residual`` is the last residual norm."""

    code = "nonconvergence"

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class SingularSystemError(GasrotorError):
    """Linear solve failed or produced non-finite values; reports conditioning."""

    code = "singular_system"

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class ModeTrackingError(GasrotorError):
    """Eigenvector matching across the whirl grid became ambiguous."""

    code = "mode_tracking_ambiguity"

    def __init__(self, message: str, nu_lo: float | None = None, nu_hi: float | None = None):
        super().__init__(message)
        self.nu_lo = nu_lo
        self.nu_hi = nu_hi


class ModeValidityError(GasrotorError):
    """A whirl crossing fell outside the model's validity envelope."""

    code = "mode_validity"


class ModelIntegrityError(GasrotorError):
    """Surrogate model container failed version, digest or length checks."""

    code = "model_integrity"


class EvaluationTimeout(GasrotorError):
    code = "timeout"

    def __init__(self, message: str, timing_ms: dict | None = None):
        super().__init__(message)
        self.timing_ms = timing_ms or {}
