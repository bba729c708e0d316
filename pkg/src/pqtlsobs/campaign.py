"""Guardrailed measurement campaigns over target inventories.

An inventory is validated before anything touches the network; records
that fail a guardrail never produce a probe. A round probes each accepted
target with each of its profiles, assembles one evidence bundle per
target (the first profile's exchange doubles as the passive capture),
runs engine inference, and rolls the per-target measurements into one
summary. Two rounds over the same inventory compare into a drift report.

Targets listed in a round's endpoints mapping are measured offline
against their endpoint configs (deterministic per seed); everything else
is probed over the network.
"""

from __future__ import annotations

import ipaddress
import random
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from hashlib import sha256

from . import wire
from .bench.emulator import EndpointConfig, synth_exchange
from .engine import MODE_B2, MODE_B3, EvidenceBundle, MeasurementObject, infer_measurement
from .errors import CampaignError, PqtlsError
from .evidence import EvidenceValue
from .registry import RegistryBundle, default_registry
from .surfaces import (
    ORIGIN_ARTIFACT,
    GuardrailPolicy,
    ProbeProfile,
    ProbeResult,
    ProbeTarget,
    build_passive_observation,
    builtin_profiles,
    check_probe_guardrails,
    parse_chain_observation,
    result_from_exchange,
    run_probe_with_capture,
)

TARGET_FAMILIES = (
    "api_endpoint",
    "cdn_edge",
    "cloud_vendor",
    "commerce",
    "developer_docs",
    "government",
    "knowledge_community",
    "media_news",
    "package_ecosystem",
    "university",
)

TIERS = ("public_blind", "cooperative", "emulated")

MAX_CONCURRENCY = 20

# measurement clock for offline rounds; live rounds use wall time
ROUND_BASE_TIME = 1_755_600_000.0

_MULTI_SURFACE_MODES = (MODE_B2, MODE_B3)


@dataclass(frozen=True)
class TargetRecord:
    """One row of a campaign inventory."""

    target_id: str
    host: str
    family: str
    owner_scope: str
    tier: str
    profiles: tuple[str, ...]
    selection_source: str
    selection_basis: str
    port: int = 443
    sni: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))

    def to_json(self) -> dict:
        return {
            "target_id": self.target_id,
            "host": self.host,
            "port": self.port,
            "sni": self.sni,
            "family": self.family,
            "owner_scope": self.owner_scope,
            "tier": self.tier,
            "profiles": list(self.profiles),
            "selection_source": self.selection_source,
            "selection_basis": self.selection_basis,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "TargetRecord":
        return cls(
            target_id=payload["target_id"],
            host=payload["host"],
            port=payload.get("port", 443),
            sni=payload.get("sni"),
            family=payload["family"],
            owner_scope=payload["owner_scope"],
            tier=payload["tier"],
            profiles=tuple(payload["profiles"]),
            selection_source=payload["selection_source"],
            selection_basis=payload["selection_basis"],
        )


@dataclass(frozen=True)
class RoundSummary:
    round_id: str
    targets: int
    probes: int
    complete_handshakes: int
    chain_artifacts: int
    hybrid_confirmed: int
    classical_only_under_tested_profiles: int
    capability_broader: int
    contradiction_bearing: int
    clear_complete: int

    def to_json(self) -> dict:
        return {
            "round_id": self.round_id,
            "targets": self.targets,
            "probes": self.probes,
            "complete_handshakes": self.complete_handshakes,
            "chain_artifacts": self.chain_artifacts,
            "hybrid_confirmed": self.hybrid_confirmed,
            "classical_only_under_tested_profiles": self.classical_only_under_tested_profiles,
            "capability_broader": self.capability_broader,
            "contradiction_bearing": self.contradiction_bearing,
            "clear_complete": self.clear_complete,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RoundSummary":
        return cls(**{name: payload[name] for name in cls.__dataclass_fields__})


@dataclass(frozen=True)
class DriftReport:
    comparable_targets: int
    capability_drift_pct: float
    certificate_drift_pct: float
    lifecycle_drift_pct: float
    signature_algorithm_drift_pct: float
    clear_complete_stability_pct: float

    def to_json(self) -> dict:
        return {
            "comparable_targets": self.comparable_targets,
            "capability_drift_pct": self.capability_drift_pct,
            "certificate_drift_pct": self.certificate_drift_pct,
            "lifecycle_drift_pct": self.lifecycle_drift_pct,
            "signature_algorithm_drift_pct": self.signature_algorithm_drift_pct,
            "clear_complete_stability_pct": self.clear_complete_stability_pct,
        }


@dataclass(frozen=True)
class TargetOutcome:
    """Everything one round produced for one accepted target."""

    target_id: str
    family: str
    tier: str
    probes: tuple[ProbeResult, ...]
    chain_observations: int
    measurement: MeasurementObject | None
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "target_id": self.target_id,
            "family": self.family,
            "tier": self.tier,
            "probes": [
                {
                    "profile_name": p.profile_name,
                    "outcome": p.outcome,
                    "attempts": p.attempts,
                    "selected_group": p.selected_group.to_json(),
                }
                for p in self.probes
            ],
            "chain_observations": self.chain_observations,
            "measurement": self.measurement.to_json() if self.measurement else None,
            "error": self.error,
        }


@dataclass(frozen=True)
class RoundResult:
    round_id: str
    summary: RoundSummary
    outcomes: tuple[TargetOutcome, ...]
    rejected: tuple[dict, ...]

    def to_json(self) -> dict:
        return {
            "round_id": self.round_id,
            "summary": self.summary.to_json(),
            "targets": [o.to_json() for o in self.outcomes],
            "rejected": list(self.rejected),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RoundResult":
        """Rebuild enough of a stored round to compare against another.

        Per-target probe rows are written compacted, so they come back
        empty; round comparison reads only measurements and identities.
        """
        outcomes = tuple(
            TargetOutcome(
                target_id=t["target_id"],
                family=t["family"],
                tier=t["tier"],
                probes=(),
                chain_observations=t["chain_observations"],
                measurement=MeasurementObject.from_json(t["measurement"]) if t["measurement"] else None,
                error=t.get("error"),
            )
            for t in payload["targets"]
        )
        return cls(
            round_id=payload["round_id"],
            summary=RoundSummary.from_json(payload["summary"]),
            outcomes=outcomes,
            rejected=tuple(payload.get("rejected", ())),
        )


# -- inventory validation -----------------------------------------------------


def _is_ip_literal(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
        return True
    except ValueError:
        return False


def validate_inventory(
    records: Sequence[TargetRecord],
    *,
    profile_set: Mapping[str, ProbeProfile] | None = None,
) -> tuple[tuple[TargetRecord, ...], tuple[dict, ...]]:
    """Split an inventory into accepted records and guardrail violations.

    Violations are data, not exceptions: each names the record and the
    rule it broke so a rejected inventory can be repaired and resubmitted.
    """
    profile_set = dict(profile_set or builtin_profiles())
    accepted: list[TargetRecord] = []
    violations: list[dict] = []
    seen: set[str] = set()

    def flag(record: TargetRecord, rule: str, detail: str) -> None:
        violations.append({"target_id": record.target_id, "rule": rule, "detail": detail})

    for record in records:
        ok = True
        if record.target_id in seen:
            flag(record, "duplicate_target_id", f"target_id {record.target_id!r} appears twice")
            ok = False
        seen.add(record.target_id)
        if record.family not in TARGET_FAMILIES:
            flag(record, "unknown_family", f"family {record.family!r} is not an operational family")
            ok = False
        if record.tier not in TIERS:
            flag(record, "unknown_tier", f"tier {record.tier!r} is not one of {TIERS}")
            ok = False
        if not record.profiles:
            flag(record, "no_profiles", "record lists no probe profiles")
            ok = False
        for name in record.profiles:
            profile = profile_set.get(name)
            if profile is None:
                flag(record, "unknown_profile", f"profile {name!r} is not defined")
                ok = False
            elif profile.client_auth and record.tier == "public_blind":
                flag(record, "client_auth_on_public", f"profile {name!r} enables client auth")
                ok = False
        if not _is_ip_literal(record.host) and not record.sni:
            flag(record, "missing_sni", "DNS-named target without an explicit SNI")
            ok = False
        if ok:
            accepted.append(record)
    return tuple(accepted), tuple(violations)


# -- round execution ----------------------------------------------------------


def _derive_seed(*parts: object) -> int:
    h = sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "big")


def _normalize_chains(value) -> tuple[tuple[bytes, ...], ...]:
    if not value:
        return ()
    first = value[0]
    if isinstance(first, (bytes, bytearray)):
        return (tuple(bytes(der) for der in value),)
    return tuple(tuple(bytes(der) for der in chain) for chain in value)


def _measure_target(
    record: TargetRecord,
    config: EndpointConfig | None,
    chains: tuple[tuple[bytes, ...], ...],
    *,
    round_id: str,
    profile_set: Mapping[str, ProbeProfile],
    policy: GuardrailPolicy,
    seed: int,
    base_time: float,
    mode: str,
    registry: RegistryBundle,
) -> TargetOutcome:
    target = ProbeTarget(host=record.host, port=record.port, sni=record.sni, tier=record.tier)
    probes: list[ProbeResult] = []
    first_transcript: wire.Transcript | None = None

    for i, name in enumerate(record.profiles):
        profile = profile_set[name]
        check_probe_guardrails(target, profile)
        probe_seed = _derive_seed(seed, round_id, record.target_id, name)
        if config is not None:
            observed_at = base_time + 5.0 * i
            outcome, client_payload, server_bytes, alert_code, detail = synth_exchange(
                config, profile, sni=record.sni, seed=probe_seed
            )
            probes.append(
                result_from_exchange(
                    target,
                    profile,
                    outcome=outcome,
                    server_bytes=server_bytes,
                    client_payload=client_payload,
                    attempts=1,
                    observed_at=observed_at,
                    registry=registry,
                    alert_code=alert_code,
                    detail=detail,
                )
            )
            transcript = wire.Transcript(
                artifact_id=f"{round_id}:{record.target_id}",
                flows=(
                    wire.Flow(wire.CLIENT_TO_SERVER, observed_at, client_payload),
                    wire.Flow(wire.SERVER_TO_CLIENT, observed_at, server_bytes),
                ),
            )
        else:
            result, transcript = run_probe_with_capture(
                target, profile, policy=policy, registry=registry, rng=random.Random(probe_seed)
            )
            probes.append(result)
        if first_transcript is None:
            first_transcript = transcript

    passive_observed = probes[0].provenance.observed_at
    passive = build_passive_observation(
        first_transcript, registry=registry, observed_at=passive_observed
    )
    chain_obs = tuple(
        parse_chain_observation(
            chain, origin=ORIGIN_ARTIFACT, observed_at=passive_observed + 1.0, registry=registry
        )
        for chain in chains
    )
    bundle = EvidenceBundle(passive=passive, probes=tuple(probes), chains=chain_obs)
    measurement = infer_measurement(bundle, mode, registry=registry)

    observed = len(chain_obs)
    observed += 1 if passive.embedded_chain is not None else 0
    observed += sum(1 for p in probes if p.observed_chain is not None)
    return TargetOutcome(
        target_id=record.target_id,
        family=record.family,
        tier=record.tier,
        probes=tuple(probes),
        chain_observations=observed,
        measurement=measurement,
    )


def _known_true(measurement: MeasurementObject, name: str) -> bool:
    value = measurement.field(name)
    return value.is_known and value.value is True


def _known_false(measurement: MeasurementObject, name: str) -> bool:
    value = measurement.field(name)
    return value.is_known and value.value is False


def _summarize(round_id: str, outcomes: Sequence[TargetOutcome]) -> RoundSummary:
    measured = [o.measurement for o in outcomes if o.measurement is not None]
    return RoundSummary(
        round_id=round_id,
        targets=len(outcomes),
        probes=sum(len(o.probes) for o in outcomes),
        complete_handshakes=sum(1 for o in outcomes for p in o.probes if p.completed),
        chain_artifacts=sum(o.chain_observations for o in outcomes),
        hybrid_confirmed=sum(1 for m in measured if _known_true(m, "hybrid_key_establishment")),
        classical_only_under_tested_profiles=sum(
            1 for m in measured if _known_false(m, "hybrid_key_establishment")
        ),
        capability_broader=sum(1 for m in measured if _known_true(m, "capability_broader")),
        contradiction_bearing=sum(1 for m in measured if m.contradiction_records),
        clear_complete=sum(1 for m in measured if m.clear_for_migration),
    )


def run_round(
    records: Sequence[TargetRecord],
    *,
    round_id: str,
    endpoints: Mapping[str, EndpointConfig] | None = None,
    artifact_chains: Mapping[str, Sequence] | None = None,
    profile_set: Mapping[str, ProbeProfile] | None = None,
    policy: GuardrailPolicy | None = None,
    concurrency: int = 8,
    seed: int = 0,
    base_time: float = ROUND_BASE_TIME,
    mode: str = MODE_B3,
    registry: RegistryBundle | None = None,
) -> RoundResult:
    """Probe every accepted target with every profile and infer per target.

    The inventory is revalidated here; rejected records are reported in
    the result and never probed. Per-target work is seeded independently,
    so summaries do not depend on the worker count.
    """
    if not 1 <= concurrency <= MAX_CONCURRENCY:
        raise CampaignError(
            f"concurrency must be between 1 and {MAX_CONCURRENCY}", concurrency=concurrency
        )
    profile_set = dict(profile_set or builtin_profiles())
    policy = policy or GuardrailPolicy()
    registry = registry or default_registry()
    endpoints = endpoints or {}
    artifact_chains = artifact_chains or {}

    accepted, violations = validate_inventory(records, profile_set=profile_set)

    def work(record: TargetRecord) -> TargetOutcome:
        try:
            return _measure_target(
                record,
                endpoints.get(record.target_id),
                _normalize_chains(artifact_chains.get(record.target_id)),
                round_id=round_id,
                profile_set=profile_set,
                policy=policy,
                seed=seed,
                base_time=base_time,
                mode=mode,
                registry=registry,
            )
        except PqtlsError as exc:
            return TargetOutcome(
                target_id=record.target_id,
                family=record.family,
                tier=record.tier,
                probes=(),
                chain_observations=0,
                measurement=None,
                error=str(exc),
            )

    outcomes: list[TargetOutcome] = []
    if accepted:
        with ThreadPoolExecutor(max_workers=min(concurrency, len(accepted))) as pool:
            outcomes = list(pool.map(work, accepted))
    outcomes.sort(key=lambda o: o.target_id)
    return RoundResult(
        round_id=round_id,
        summary=_summarize(round_id, outcomes),
        outcomes=tuple(outcomes),
        rejected=violations,
    )


# -- round comparison ---------------------------------------------------------


def _canonical(value):
    if isinstance(value, (list, tuple)):
        return tuple(_canonical(v) for v in value)
    if isinstance(value, dict):
        return tuple(sorted((k, _canonical(v)) for k, v in value.items()))
    return value


def _value_drift(a: EvidenceValue, b: EvidenceValue) -> bool:
    """A dimension drifts only between two known values; unknowns abstain."""
    if not (a.is_known and b.is_known):
        return False
    return _canonical(a.value) != _canonical(b.value)


def _chain_digests(measurement: MeasurementObject):
    digests = measurement.plane_linkage.get("authentication", {}).get("chain_digests")
    return tuple(digests) if digests is not None else None


def compare_rounds(round_a: RoundResult, round_b: RoundResult) -> DriftReport:
    """Drift between two rounds over the shared, comparable targets.

    Comparable means both rounds produced a multi-surface measurement for
    the target. Value dimensions count a target only when the field is
    known on both sides and its canonicalized value changed; certificate
    identity compares the adopted chain digests. Stability is the
    fraction of comparable targets whose clear-complete status held.
    """
    ma = {o.target_id: o.measurement for o in round_a.outcomes if o.measurement is not None}
    mb = {o.target_id: o.measurement for o in round_b.outcomes if o.measurement is not None}
    shared = sorted(set(ma) & set(mb))
    if not shared:
        raise CampaignError(
            "rounds share no measured targets",
            round_a=round_a.round_id,
            round_b=round_b.round_id,
        )
    comparable = [
        t
        for t in shared
        if ma[t].mode in _MULTI_SURFACE_MODES and mb[t].mode in _MULTI_SURFACE_MODES
    ]
    if not comparable:
        raise CampaignError("no comparable multi-surface targets between rounds")

    capability = certificate = lifecycle = signature = stable = 0
    for t in comparable:
        a, b = ma[t], mb[t]
        if _value_drift(a.field("supported_groups"), b.field("supported_groups")):
            capability += 1
        da, db = _chain_digests(a), _chain_digests(b)
        if da is not None and db is not None and da != db:
            certificate += 1
        if _value_drift(a.field("short_lived_bucket"), b.field("short_lived_bucket")):
            lifecycle += 1
        if _value_drift(a.field("leaf_signature_algorithm"), b.field("leaf_signature_algorithm")):
            signature += 1
        if a.clear_for_migration == b.clear_for_migration:
            stable += 1

    n = len(comparable)
    return DriftReport(
        comparable_targets=n,
        capability_drift_pct=100.0 * capability / n,
        certificate_drift_pct=100.0 * certificate / n,
        lifecycle_drift_pct=100.0 * lifecycle / n,
        signature_algorithm_drift_pct=100.0 * signature / n,
        clear_complete_stability_pct=100.0 * stable / n,
    )
