"""Four-state evidence values.

Every field inferred from a capture, probe or chain is an EvidenceValue:
known (with a value), unknown (with reasons), ambiguous (with a candidate
list), or not_applicable (with at least one justification). The distinction
between unknown and not_applicable is load-bearing everywhere downstream:
closure treats justified non-applicability as resolved, ambiguity and
unknowns as open.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class EvidenceState(str, Enum):
    KNOWN = "known"
    UNKNOWN = "unknown"
    AMBIGUOUS = "ambiguous"
    NOT_APPLICABLE = "not_applicable"


def _freeze(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


@dataclass(frozen=True)
class EvidenceValue:
    state: EvidenceState
    value: Any = None
    candidates: tuple = ()
    reasons: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "state", EvidenceState(self.state))
        object.__setattr__(self, "value", _freeze(self.value))
        object.__setattr__(self, "candidates", tuple(_freeze(c) for c in self.candidates))
        object.__setattr__(self, "reasons", tuple(self.reasons))
        if self.state is EvidenceState.KNOWN:
            if self.value is None:
                raise ValueError("known evidence requires a value")
        elif self.value is not None:
            raise ValueError(f"{self.state.value} evidence must not carry a value")
        if self.state is EvidenceState.AMBIGUOUS:
            if not self.candidates:
                raise ValueError("ambiguous evidence requires candidates")
        elif self.candidates:
            raise ValueError(f"{self.state.value} evidence must not carry candidates")
        if self.state is EvidenceState.NOT_APPLICABLE and not self.reasons:
            raise ValueError("not_applicable requires at least one reason")

    # -- constructors ------------------------------------------------------

    @classmethod
    def known(cls, value: Any, *reasons: str) -> "EvidenceValue":
        return cls(EvidenceState.KNOWN, value=value, reasons=reasons)

    @classmethod
    def unknown(cls, *reasons: str) -> "EvidenceValue":
        return cls(EvidenceState.UNKNOWN, reasons=reasons)

    @classmethod
    def ambiguous(cls, candidates, *reasons: str) -> "EvidenceValue":
        return cls(EvidenceState.AMBIGUOUS, candidates=tuple(candidates), reasons=reasons)

    @classmethod
    def not_applicable(cls, *reasons: str) -> "EvidenceValue":
        return cls(EvidenceState.NOT_APPLICABLE, reasons=reasons)

    # -- predicates --------------------------------------------------------

    @property
    def is_known(self) -> bool:
        return self.state is EvidenceState.KNOWN

    @property
    def is_unknown(self) -> bool:
        return self.state is EvidenceState.UNKNOWN

    @property
    def is_ambiguous(self) -> bool:
        return self.state is EvidenceState.AMBIGUOUS

    @property
    def is_not_applicable(self) -> bool:
        return self.state is EvidenceState.NOT_APPLICABLE

    @property
    def resolved(self) -> bool:
        """Closure semantics: known or justified not_applicable."""
        return self.state in (EvidenceState.KNOWN, EvidenceState.NOT_APPLICABLE)

    @property
    def unresolved(self) -> bool:
        return not self.resolved

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        out: dict[str, Any] = {"state": self.state.value}
        if self.is_known:
            out["value"] = _unfreeze(self.value)
        if self.is_ambiguous:
            out["candidates"] = [_unfreeze(c) for c in self.candidates]
        if self.reasons:
            out["reasons"] = list(self.reasons)
        return out

    @classmethod
    def from_json(cls, payload: dict) -> "EvidenceValue":
        return cls(
            state=EvidenceState(payload["state"]),
            value=payload.get("value"),
            candidates=tuple(payload.get("candidates", ())),
            reasons=tuple(payload.get("reasons", ())),
        )


def _unfreeze(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_unfreeze(v) for v in value]
    return value
