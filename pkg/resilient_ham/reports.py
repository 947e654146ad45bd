"""JSON payload models shared by the CLI and the harness."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from resilient_ham.errors import ResilientHamError


class ErrorPayload(BaseModel):
    """Canonical error payload."""

    code: str
    message: str
    context: dict[str, Any] = Field(default_factory=dict)


class ErrorResponse(BaseModel):
    """Canonical error envelope."""

    error: ErrorPayload


def error_payload(exc: ResilientHamError) -> ErrorPayload:
    return ErrorPayload(code=exc.code, message=exc.message, context=exc.payload_context())


def error_response(exc: ResilientHamError) -> ErrorResponse:
    return ErrorResponse(error=error_payload(exc))
