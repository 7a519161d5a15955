"""Exception types shared across the package."""


class SemicontQrError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SemicontQrError, ValueError):
    """A parameter or argument is outside its admissible domain."""


class DataError(SemicontQrError, ValueError):
    """Input data violates the expected layout or value constraints."""


class EstimationError(SemicontQrError, RuntimeError):
    """An estimation step failed to converge or hit a degenerate configuration.

    Carries an optional ``payload`` dict with diagnostic values (bracket
    endpoints, iteration counts, offending inputs) so callers can log or
    surface the failure context instead of a bare message.
    """

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = dict(payload) if payload else {}

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        if self.payload:
            detail = ", ".join(f"{k}={v!r}" for k, v in sorted(self.payload.items()))
            return f"{base} [{detail}]"
        return base
