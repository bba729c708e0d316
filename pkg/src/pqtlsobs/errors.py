"""Exception hierarchy for the toolkit.

Every error raised on purpose derives from PqtlsError so the CLI can map
failures to machine-readable listings with a single handler.
"""

from __future__ import annotations


class PqtlsError(Exception):
    """Base class; carries a short machine code plus detail payload."""

    code = "error"

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.detail = detail

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self), "detail": self.detail}


class RegistryError(PqtlsError):
    code = "registry_error"


class WireError(PqtlsError):
    code = "wire_error"


class MutationError(PqtlsError):
    code = "mutation_error"


class SchemaError(PqtlsError):
    code = "schema_error"


class GuardrailRefusal(PqtlsError):
    """Raised before any network activity when a probe would break policy."""

    code = "guardrail_refusal"


class EngineConfigError(PqtlsError):
    """Mode/surface mismatch: a mode was handed evidence it must not consume."""

    code = "engine_config_error"


class BenchError(PqtlsError):
    code = "bench_error"


class StatsError(PqtlsError):
    code = "stats_error"


class CampaignError(PqtlsError):
    code = "campaign_error"
