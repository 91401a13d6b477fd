"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class FramebridgeError(Exception):
    """Base class for all engine errors."""


class ValidationError(FramebridgeError, ValueError):
    """A value violates a documented invariant or precondition."""


class DimensionMismatchError(ValidationError):
    """Two rasters or sequences that must agree in shape do not."""


class ConfigError(FramebridgeError):
    """Inconsistent or unusable configuration, e.g. embedding spaces of different dimension."""


class ProviderError(FramebridgeError):
    """Base class for failures of an external model provider."""

    def __init__(self, message: str, *, role: str = "", provider_id: str = ""):
        super().__init__(message)
        self.role = role
        self.provider_id = provider_id


class ProviderUnavailableError(ProviderError):
    """All retry attempts against a provider failed."""

    def __init__(self, message: str, *, role: str = "", provider_id: str = "",
                 attempts: int = 0, last_error: BaseException | None = None):
        super().__init__(message, role=role, provider_id=provider_id)
        self.attempts = attempts
        self.last_error = last_error


class ProviderResponseError(ProviderError):
    """A provider answered, but the payload is malformed or violates its contract.

    ``payload`` keeps the raw response for diagnosis.
    """

    def __init__(self, message: str, *, role: str = "", provider_id: str = "",
                 payload: object = None):
        super().__init__(message, role=role, provider_id=provider_id)
        self.payload = payload


class EnhancementError(FramebridgeError):
    """Every enhancement attempt produced an unparseable response.

    ``raw_responses`` carries one raw payload per failed attempt.
    """

    def __init__(self, message: str, raw_responses: list[str]):
        super().__init__(message)
        self.raw_responses = list(raw_responses)


class ContractViolationError(FramebridgeError):
    """A provider returned data that breaks a hard post-condition (e.g. endpoint anchoring)."""

    def __init__(self, message: str, *, frame_index: int | None = None):
        super().__init__(message)
        self.frame_index = frame_index


class StageError(FramebridgeError):
    """A pipeline stage failed; names the stage and wraps the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
