"""Error type shared by every layer of the broker.

Each failure carries a stable machine ``code``; the HTTP layer and the CLI
translate codes into status codes and exit codes respectively.
"""
from __future__ import annotations

# code -> HTTP status. Codes are part of the public contract; never rename.
ERROR_STATUS: dict[str, int] = {
    # schema
    "empty-schema": 422,
    "empty-name": 422,
    "duplicate-name": 422,
    "invalid-direction": 422,
    # records and requests
    "empty-id": 422,
    "no-profiles": 422,
    "unknown-property": 422,
    "invalid-value": 422,
    "out-of-range-weight": 422,
    "unrequested-weight": 422,
    "invalid-top-k": 422,
    "unknown-field": 422,
    "missing-field": 422,
    "invalid-field": 422,
    "length-mismatch": 422,
    "degenerate-column": 422,
    "value-out-of-range": 422,
    # registry
    "duplicate-id": 409,
    "unknown-id": 404,
    "unknown-service-id": 404,
    "unknown-mode": 404,
    "no-candidates": 404,
    # documents and transport
    "malformed-document": 400,
    "schema-mismatch": 409,
    "io-failure": 500,
    "internal-error": 500,
    "not-found": 404,
    "method-not-allowed": 405,
}


class QosError(Exception):
    """A broker failure identified by a stable ``code``."""

    def __init__(self, code: str, message: str) -> None:
        if code not in ERROR_STATUS:
            raise ValueError(f"unregistered error code {code!r}")
        super().__init__(message)
        self.code = code
        self.message = message

    @property
    def status(self) -> int:
        return ERROR_STATUS[self.code]

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"
