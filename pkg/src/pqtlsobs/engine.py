"""Mode-gated inference: evidence bundles in, measurement objects out.

A measurement object is the per-session verdict: every tracked field as
an EvidenceValue, closure per reporting plane, contradiction records and
an ambiguity flag. Modes only widen which surfaces may contribute; they
never change how a given piece of evidence is interpreted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

from .errors import EngineConfigError
from .evidence import EvidenceState, EvidenceValue
from .registry import Family, RegistryBundle, RegistryKind, default_registry
from .surfaces import (
    ORIGIN_ACTIVE_PROBE,
    ORIGIN_ARTIFACT,
    ORIGIN_PASSIVE_TLS12,
    ChainObservation,
    PassiveObservation,
    ProbeResult,
    aggregate_capability,
)

MODE_B1 = "B1_passive_only"
MODE_B2 = "B2_passive_active"
MODE_B3 = "B3_multi_surface"
MODES = (MODE_B1, MODE_B2, MODE_B3)

PLANES = (
    "session_core",
    "session_hidden_detail",
    "key_establishment",
    "capability",
    "authentication",
    "lifecycle",
)

_CHAIN_FIELDS = ("leaf_spki_algorithm", "leaf_signature_algorithm", "validity_days", "short_lived_bucket")


def load_rules() -> dict:
    with resources.files("pqtlsobs.data").joinpath("rules_v1.json").open("rb") as fh:
        return json.load(fh)


def load_policy() -> dict:
    with resources.files("pqtlsobs.data").joinpath("policy_v1.json").open("rb") as fh:
        return json.load(fh)


@dataclass(frozen=True)
class EvidenceBundle:
    """Everything collected about one endpoint session, pre-inference."""

    passive: PassiveObservation | None = None
    probes: tuple[ProbeResult, ...] = ()
    chains: tuple[ChainObservation, ...] = ()

    def to_json(self) -> dict:
        return {
            "passive": self.passive.to_json() if self.passive else None,
            "probes": [p.to_json() for p in self.probes],
            "chains": [c.to_json() for c in self.chains],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "EvidenceBundle":
        return cls(
            passive=PassiveObservation.from_json(payload["passive"]) if payload.get("passive") else None,
            probes=tuple(ProbeResult.from_json(p) for p in payload.get("probes", ())),
            chains=tuple(ChainObservation.from_json(c) for c in payload.get("chains", ())),
        )


@dataclass(frozen=True)
class MeasurementObject:
    artifact_id: str
    mode: str
    observed_at: float
    fields: dict  # name -> EvidenceValue
    plane_closures: dict  # plane -> bool
    observability_ok: bool
    object_complete: bool
    clear_for_migration: bool
    ambiguity_flag: bool
    ambiguity_reasons: tuple[str, ...]
    unresolved_offer_identifiers: tuple[str, ...]
    contradiction_records: tuple[dict, ...]
    plane_linkage: dict
    inference_trace: tuple[dict, ...]
    bucket_threshold_days: int
    completeness: str
    fragmented: bool
    coalesced: bool

    def field(self, name: str) -> EvidenceValue:
        return self.fields[name]

    def to_json(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "mode": self.mode,
            "observed_at": self.observed_at,
            "fields": {k: v.to_json() for k, v in sorted(self.fields.items())},
            "plane_closures": dict(sorted(self.plane_closures.items())),
            "observability_ok": self.observability_ok,
            "object_complete": self.object_complete,
            "clear_for_migration": self.clear_for_migration,
            "ambiguity_flag": self.ambiguity_flag,
            "ambiguity_reasons": list(self.ambiguity_reasons),
            "unresolved_offer_identifiers": list(self.unresolved_offer_identifiers),
            "contradiction_records": [dict(r) for r in self.contradiction_records],
            "plane_linkage": self.plane_linkage,
            "inference_trace": [dict(t) for t in self.inference_trace],
            "bucket_threshold_days": self.bucket_threshold_days,
            "completeness": self.completeness,
            "fragmented": self.fragmented,
            "coalesced": self.coalesced,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "MeasurementObject":
        return cls(
            artifact_id=payload["artifact_id"],
            mode=payload["mode"],
            observed_at=payload["observed_at"],
            fields={k: EvidenceValue.from_json(v) for k, v in payload["fields"].items()},
            plane_closures=dict(payload["plane_closures"]),
            observability_ok=payload["observability_ok"],
            object_complete=payload["object_complete"],
            clear_for_migration=payload["clear_for_migration"],
            ambiguity_flag=payload["ambiguity_flag"],
            ambiguity_reasons=tuple(payload["ambiguity_reasons"]),
            unresolved_offer_identifiers=tuple(payload["unresolved_offer_identifiers"]),
            contradiction_records=tuple(payload["contradiction_records"]),
            plane_linkage=payload["plane_linkage"],
            inference_trace=tuple(payload["inference_trace"]),
            bucket_threshold_days=payload["bucket_threshold_days"],
            completeness=payload["completeness"],
            fragmented=payload["fragmented"],
            coalesced=payload["coalesced"],
        )


def infer_measurement(
    bundle: EvidenceBundle,
    mode: str,
    *,
    rules: dict | None = None,
    registry: RegistryBundle | None = None,
) -> MeasurementObject:
    """Derive one measurement object from a bundle under a reporting mode.

    Raises EngineConfigError when the bundle carries surfaces the mode
    must not consume; evidence is never silently dropped.
    """
    rules = rules or load_rules()
    registry = registry or default_registry()
    _check_mode(bundle, mode)

    passive = bundle.passive
    trace: list[dict] = []
    linkage: dict = {}
    window_s = rules["drift_window_hours"] * 3600.0

    fields: dict[str, EvidenceValue] = {
        "negotiated_version": passive.negotiated_version,
        "negotiated_cipher_suite": passive.negotiated_cipher_suite,
        "negotiation_outcome": passive.negotiation_outcome,
        "sni": passive.sni,
        "selected_group": passive.selected_group,
        "offered_groups": passive.offered_groups,
        "offered_versions": passive.offered_versions,
        "signature_schemes": passive.signature_schemes,
        "handshake_structure": passive.handshake_structure,
        "server_flight_detail": passive.server_flight_detail,
        "mtls_client_auth": passive.mtls_client_auth,
    }
    trace.append({"rule": "passive_direct", "surface": "sigma_p", "fields": sorted(fields)})

    probes = list(bundle.probes) if mode in (MODE_B2, MODE_B3) else []
    completed = [p for p in probes if p.completed]
    same_run = [
        p
        for p in completed
        if abs(p.provenance.observed_at - passive.provenance.observed_at) < window_s
    ]

    # hidden-detail and client-auth closure from a participating client
    version_label = passive.negotiated_version.value if passive.negotiated_version.is_known else None
    matched = sorted(
        (p for p in same_run if p.negotiated_version.is_known and p.negotiated_version.value == version_label),
        key=lambda p: p.provenance.observed_at,
    )
    hidden_linkage = {"closed_by": "passive" if passive.server_flight_detail.is_known else None}
    mtls_source = "passive" if passive.mtls_client_auth.is_known else None
    for probe in matched:
        if not fields["server_flight_detail"].is_known:
            detail = _probe_flight_detail(probe)
            if detail is not None:
                fields["server_flight_detail"] = EvidenceValue.known(detail, "closed_by_probe_report")
                hidden_linkage["closed_by"] = f"probe:{probe.profile_name}"
                trace.append(
                    {"rule": "flight_detail_from_probe", "surface": "sigma_a", "probe": probe.profile_name}
                )
    # client-auth posture is version-independent, so an unknown passive version
    # does not disqualify a same-run probe from closing it
    mtls_eligible = matched if version_label is not None else sorted(same_run, key=lambda p: p.provenance.observed_at)
    for probe in mtls_eligible:
        if not fields["mtls_client_auth"].is_known and probe.certificate_request.is_known:
            fields["mtls_client_auth"] = EvidenceValue.known(
                probe.certificate_request.value, "closed_by_probe_report"
            )
            mtls_source = f"probe:{probe.profile_name}"
            trace.append({"rule": "mtls_from_probe", "surface": "sigma_a", "probe": probe.profile_name})
    linkage["session_hidden_detail"] = hidden_linkage

    # capability plane
    if mode == MODE_B1:
        absent = EvidenceValue.unknown("no_active_probes")
        fields["supported_groups"] = absent
        fields["hybrid_key_establishment"] = absent
        fields["supported_versions"] = absent
        linkage["capability"] = {"probe_profiles": []}
    else:
        cap = aggregate_capability(probes, registry)
        fields["supported_groups"] = cap["supported_groups"]
        fields["hybrid_key_establishment"] = cap["hybrid_key_establishment"]
        fields["supported_versions"] = cap["supported_versions"]
        linkage["capability"] = {"probe_profiles": sorted({p.profile_name for p in completed})}
        trace.append(
            {"rule": "capability_union", "surface": "sigma_a", "probes": len(completed)}
        )
    fields["capability_broader"] = _capability_broader(fields, passive)

    # key-establishment plane
    fields["group_family"] = _group_family(passive.selected_group, registry, trace)
    fields["group_components"] = _group_components(passive.selected_group, registry)

    # chain-backed planes
    chains = _visible_chains(bundle, mode)
    adopted = _adopt_chain(chains, rules)
    if adopted is not None:
        for name in _CHAIN_FIELDS:
            fields[name] = getattr(adopted, name)
        fields["chain_depth"] = adopted.chain_depth
        chain_link = {
            "chain_origin": adopted.provenance.origin,
            "chain_observed_at": adopted.provenance.observed_at,
            "chain_digests": list(adopted.chain_digests),
        }
        trace.append(
            {"rule": "chain_adopted", "surface": "sigma_c", "origin": adopted.provenance.origin}
        )
        threshold = adopted.bucket_threshold_days
    else:
        reason = _no_chain_reason(passive)
        missing = EvidenceValue.unknown(reason)
        for name in _CHAIN_FIELDS:
            fields[name] = missing
        fields["chain_depth"] = missing
        chain_link = {"chain_origin": None}
        threshold = rules["short_lived_threshold_days"]
    linkage["authentication"] = dict(chain_link, mtls_source=mtls_source)
    linkage["lifecycle"] = chain_link

    records = detect_contradictions(bundle, mode, registry=registry)

    plane_closures = {
        plane: all(fields[f].resolved for f in rules["planes"][plane]) for plane in PLANES
    }
    observability_ok = (
        fields["selected_group"].state in (EvidenceState.KNOWN, EvidenceState.NOT_APPLICABLE)
        and not records
    )
    object_complete = all(plane_closures.values())
    clear = object_complete and observability_ok

    tracked = [f for plane in PLANES for f in rules["planes"][plane]] + ["selected_group"]
    reasons: set[str] = set()
    for name in tracked:
        value = fields[name]
        if value.unresolved:
            reasons.update(f"{name}:{r}" for r in value.reasons)
            if value.state is EvidenceState.AMBIGUOUS and not value.reasons:
                reasons.add(f"{name}:ambiguous")
    reasons.update(f"unresolved_identifier:{u}" for u in passive.unresolved_offer_identifiers)
    ambiguity_flag = bool(reasons)

    return MeasurementObject(
        artifact_id=passive.artifact_id,
        mode=mode,
        observed_at=passive.provenance.observed_at,
        fields=fields,
        plane_closures=plane_closures,
        observability_ok=observability_ok,
        object_complete=object_complete,
        clear_for_migration=clear,
        ambiguity_flag=ambiguity_flag,
        ambiguity_reasons=tuple(sorted(reasons)),
        unresolved_offer_identifiers=passive.unresolved_offer_identifiers,
        contradiction_records=tuple(records),
        plane_linkage=linkage,
        inference_trace=tuple(trace),
        bucket_threshold_days=threshold,
        completeness=passive.completeness,
        fragmented=passive.fragmented,
        coalesced=passive.coalesced,
    )


def _check_mode(bundle: EvidenceBundle, mode: str) -> None:
    if mode not in MODES:
        raise EngineConfigError(f"unknown mode {mode!r}", mode=mode)
    if bundle.passive is None:
        raise EngineConfigError("a passive session observation is required", mode=mode)
    if mode == MODE_B1 and bundle.probes:
        raise EngineConfigError(
            "B1_passive_only must not be handed active-probe evidence", mode=mode
        )
    if mode == MODE_B1 and bundle.chains:
        raise EngineConfigError(
            "B1_passive_only must not be handed chain evidence", mode=mode
        )
    if mode == MODE_B2 and bundle.chains:
        raise EngineConfigError(
            "B2_passive_active must not be handed standalone chain evidence", mode=mode
        )


def _probe_flight_detail(probe: ProbeResult) -> dict | None:
    parts = {}
    if probe.certificate_request.is_known:
        parts["certificate_request"] = probe.certificate_request.value
    if probe.session_tickets_issued.is_known:
        parts["session_tickets_issued"] = probe.session_tickets_issued.value
    if probe.resumption_accepted.is_known:
        parts["resumption_accepted"] = probe.resumption_accepted.value
    return parts or None


def _group_family(selected_group: EvidenceValue, registry: RegistryBundle, trace: list) -> EvidenceValue:
    if selected_group.is_known:
        family = registry.group_family(selected_group.value)
        if family is None:
            return EvidenceValue.unknown("unregistered_group")
        return EvidenceValue.known(family.value)
    if selected_group.state is EvidenceState.NOT_APPLICABLE:
        return EvidenceValue.not_applicable(*selected_group.reasons)
    if selected_group.state is EvidenceState.AMBIGUOUS:
        families = {registry.group_family(c) for c in selected_group.candidates}
        if None not in families and len(families) == 1:
            family = next(iter(families))
            trace.append({"rule": "group_family_candidate_unanimity", "surface": "sigma_r"})
            return EvidenceValue.known(family.value, "candidate_family_unanimous", *selected_group.reasons)
        labels = sorted(f.value for f in families if f is not None)
        if labels:
            return EvidenceValue.ambiguous(labels, *selected_group.reasons)
        return EvidenceValue.unknown(*selected_group.reasons)
    return EvidenceValue.unknown(*selected_group.reasons)


def _group_components(selected_group: EvidenceValue, registry: RegistryBundle) -> EvidenceValue:
    """Constituent algorithms of the session's group, from the registry.

    Hybrid entries list their parts (X25519MLKEM768 -> (X25519, ML-KEM-768));
    atomic groups carry an empty tuple. Informational: feeds no plane and no
    ambiguity tracking.
    """
    if selected_group.is_known:
        entry = registry.entry(RegistryKind.NAMED_GROUP, selected_group.value)
        if entry is None:
            return EvidenceValue.unknown("unregistered_group")
        return EvidenceValue.known(tuple(entry.components))
    if selected_group.state is EvidenceState.NOT_APPLICABLE:
        return EvidenceValue.not_applicable(*selected_group.reasons)
    if selected_group.state is EvidenceState.AMBIGUOUS:
        entries = [registry.entry(RegistryKind.NAMED_GROUP, c) for c in selected_group.candidates]
        parts = {tuple(e.components) for e in entries if e is not None}
        if len(entries) == len(selected_group.candidates) and len(parts) == 1:
            return EvidenceValue.known(parts.pop(), "candidate_components_unanimous", *selected_group.reasons)
    return EvidenceValue.unknown(*selected_group.reasons)


def _capability_broader(fields: dict, passive: PassiveObservation) -> EvidenceValue:
    cap = fields["supported_groups"]
    offered = passive.offered_groups
    if not cap.is_known:
        return EvidenceValue.unknown(*cap.reasons)
    if not offered.is_known:
        return EvidenceValue.unknown(*offered.reasons)
    session_names = {g for g in offered.value if not g.startswith("unknown_identifier:")}
    return EvidenceValue.known(bool(set(cap.value) - session_names))


def _visible_chains(bundle: EvidenceBundle, mode: str) -> list[ChainObservation]:
    chains: list[ChainObservation] = []
    if bundle.passive and bundle.passive.embedded_chain:
        chains.append(bundle.passive.embedded_chain)
    if mode == MODE_B3:
        chains.extend(bundle.chains)
        chains.extend(p.observed_chain for p in bundle.probes if p.observed_chain is not None)
    return chains


def _adopt_chain(chains: list[ChainObservation], rules: dict) -> ChainObservation | None:
    if not chains:
        return None
    precedence = {origin: i for i, origin in enumerate(rules["chain_precedence"])}

    def rank(indexed):
        i, c = indexed
        return (precedence.get(c.provenance.origin, len(precedence)), c.provenance.observed_at, i)

    ordered = [c for _i, c in sorted(enumerate(chains), key=rank)]
    for chain in ordered:
        if chain.leaf_spki_algorithm.is_known:
            return chain
    return ordered[0]


def _no_chain_reason(passive: PassiveObservation) -> str:
    version = passive.negotiated_version.value if passive.negotiated_version.is_known else None
    if version == "TLS1.3":
        if passive.psk_selected:
            return "psk_fresh_auth_unavailable"
        return "tls13_certificate_encrypted"
    if version == "TLS1.2":
        return "flight_truncated"
    return "handshake_not_observed"


# -- contradiction detection --------------------------------------------------


def detect_contradictions(
    bundle: EvidenceBundle,
    mode: str,
    *,
    registry: RegistryBundle | None = None,
) -> list[dict]:
    """Conflicting assertions among comparable evidence in this mode.

    Assertions only compare under a matching comparability key: what was
    offered, in offer order (and, for suites, the negotiated version).
    Distinct keys are different questions, not contradictions; order matters
    because an endpoint honouring client preference legitimately answers
    (a, b) and (b, a) differently.
    """
    registry = registry or default_registry()
    passive = bundle.passive
    probes = [p for p in bundle.probes if p.completed] if mode in (MODE_B2, MODE_B3) else []
    assertions: list[tuple[str, tuple, object, dict]] = []

    def describe(surface: str, origin: str, observed_at: float, source: str) -> dict:
        return {"surface": surface, "origin": origin, "observed_at": observed_at, "source": source}

    def known_groups(codepoints) -> tuple[int, ...]:
        return tuple(cp for cp in codepoints if registry.canonicalize("named_group", cp).is_known)

    if passive is not None:
        if passive.selected_group.is_known and passive.offered_group_codepoints:
            assertions.append(
                (
                    "selected_group",
                    ("group", known_groups(passive.offered_group_codepoints)),
                    passive.selected_group.value,
                    describe("sigma_p", ORIGIN_PASSIVE_TLS12, passive.provenance.observed_at, "session"),
                )
            )
        if (
            passive.negotiated_cipher_suite.is_known
            and passive.negotiated_version.is_known
            and passive.offered_cipher_suite_codepoints
        ):
            assertions.append(
                (
                    "negotiated_cipher_suite",
                    (
                        "suite",
                        passive.negotiated_version.value,
                        tuple(passive.offered_cipher_suite_codepoints),
                    ),
                    passive.negotiated_cipher_suite.value,
                    describe("sigma_p", ORIGIN_PASSIVE_TLS12, passive.provenance.observed_at, "session"),
                )
            )

    for p in probes:
        source = f"probe:{p.profile_name}"
        if p.selected_group.is_known and p.offered_group_codepoints:
            assertions.append(
                (
                    "selected_group",
                    ("group", known_groups(p.offered_group_codepoints)),
                    p.selected_group.value,
                    describe("sigma_a", ORIGIN_ACTIVE_PROBE, p.provenance.observed_at, source),
                )
            )
        if p.negotiated_cipher_suite.is_known and p.negotiated_version.is_known:
            assertions.append(
                (
                    "negotiated_cipher_suite",
                    ("suite", p.negotiated_version.value, tuple(p.offered_cipher_suite_codepoints)),
                    p.negotiated_cipher_suite.value,
                    describe("sigma_a", ORIGIN_ACTIVE_PROBE, p.provenance.observed_at, source),
                )
            )

    for chain in _visible_chains(bundle, mode):
        source = f"chain:{chain.provenance.origin}"
        for name in _CHAIN_FIELDS:
            value = getattr(chain, name)
            if value.is_known:
                assertions.append(
                    (
                        name,
                        ("chain", name),
                        value.value,
                        describe("sigma_c", chain.provenance.origin, chain.provenance.observed_at, source),
                    )
                )

    grouped: dict[tuple, list] = {}
    for fname, key, value, source in assertions:
        grouped.setdefault((fname, key), []).append((value, source))

    records = []
    for (fname, key), entries in sorted(grouped.items(), key=lambda kv: (kv[0][0], repr(kv[0][1]))):
        values = {json.dumps(v, sort_keys=True, default=str) for v, _ in entries}
        if len(values) > 1:
            records.append(
                {
                    "field": fname,
                    "comparability_key": repr(key),
                    "assertions": [dict(src, value=val) for val, src in entries],
                }
            )
    return records


# -- plane closure ------------------------------------------------------------


@dataclass(frozen=True)
class PlaneClosure:
    """Closure verdict for one measurement under a required-field map."""

    planes: dict  # plane -> bool, observability included
    object_complete: bool
    object_complete_clear: bool

    def to_json(self) -> dict:
        return {
            "planes": dict(sorted(self.planes.items())),
            "object_complete": self.object_complete,
            "object_complete_clear": self.object_complete_clear,
        }


def compute_plane_closure(
    measurement: MeasurementObject,
    required_fields: Mapping[str, Sequence[str]] | None = None,
) -> PlaneClosure:
    """Re-derive closure from a required-field map instead of the baked rules.

    A mapped plane closes when every listed field resolved (known, or
    not-applicable with at least one justification reason) and no
    contradiction record names one of those fields. Fields the measurement
    does not track count as unresolved. Unless the map says otherwise,
    observability closes on the key-share linkage alone (selected_group
    resolved); contradiction hygiene is global, carried by
    object_complete_clear, so a contradiction outside the mapped planes
    leaves an object structurally complete but not clear.
    """
    plan = {p: tuple(names) for p, names in (required_fields or load_rules()["planes"]).items()}
    contradicted = {r["field"] for r in measurement.contradiction_records}

    def closed(names: tuple[str, ...]) -> bool:
        for name in names:
            value = measurement.fields.get(name)
            if value is None or not value.resolved:
                return False
            if value.is_not_applicable and not value.reasons:
                return False
        return not contradicted.intersection(names)

    planes = {plane: closed(names) for plane, names in plan.items()}
    if "observability" not in planes:
        group = measurement.fields.get("selected_group")
        planes["observability"] = group is not None and group.resolved
    object_complete = all(planes.values())
    return PlaneClosure(
        planes=planes,
        object_complete=object_complete,
        object_complete_clear=object_complete and not measurement.contradiction_records,
    )


# -- policy profiles ----------------------------------------------------------


def _verdicts(measurement: MeasurementObject) -> list[dict]:
    """Operator-facing verdict components, one per reporting concern.

    A component is stated only from resolved plane values and cites what it
    consumed; unresolved inputs withhold the component with their reasons
    rather than guessing.
    """
    fields = measurement.fields
    out: list[dict] = []

    def consumed(*names: str) -> dict:
        return {name: fields[name].to_json() for name in names}

    def stated(plane: str, statement: str, *names: str) -> None:
        out.append(
            {"plane": plane, "status": "stated", "statement": statement, "consumed": consumed(*names)}
        )

    def withhold(plane: str, *names: str) -> None:
        reasons = [r for n in names if fields[n].unresolved for r in fields[n].reasons]
        unique = list(dict.fromkeys(reasons))
        out.append(
            {
                "plane": plane,
                "status": "withheld",
                "reasons": unique or ["unresolved"],
                "consumed": consumed(*names),
            }
        )

    hybrid = fields["hybrid_key_establishment"]
    family = fields["group_family"]
    if hybrid.is_known and not hybrid.value:
        stated("capability", "classical-only under tested profiles", "hybrid_key_establishment")
    elif hybrid.is_known:
        if family.is_known and family.value == Family.HYBRID.value:
            stated(
                "capability",
                "hybrid key establishment negotiated under the default client",
                "hybrid_key_establishment",
                "group_family",
            )
        elif family.is_known:
            label = family.value.replace("_", "-")
            stated(
                "capability",
                f"hybrid-capable with {label} negotiation under the default client",
                "hybrid_key_establishment",
                "group_family",
            )
        elif family.is_not_applicable:
            stated(
                "capability",
                "hybrid-capable with no named-group negotiation in the linked session",
                "hybrid_key_establishment",
                "group_family",
            )
        else:
            withhold("capability", "hybrid_key_establishment", "group_family")
    else:
        withhold("capability", "hybrid_key_establishment")

    spki = fields["leaf_spki_algorithm"]
    sig = fields["leaf_signature_algorithm"]
    if spki.is_known and sig.is_known:
        stated(
            "authentication",
            f"leaf keyed with {spki.value}, signed with {sig.value}",
            "leaf_spki_algorithm",
            "leaf_signature_algorithm",
        )
    elif spki.resolved and sig.resolved:
        stated(
            "authentication",
            "certificate authentication not applicable in this session",
            "leaf_spki_algorithm",
            "leaf_signature_algorithm",
        )
    else:
        withhold("authentication", "leaf_spki_algorithm", "leaf_signature_algorithm")

    validity = fields["validity_days"]
    bucket = fields["short_lived_bucket"]
    if validity.is_known and bucket.is_known:
        stated(
            "lifecycle",
            f"{validity.value}-day leaf validity, {bucket.value} at the "
            f"{measurement.bucket_threshold_days}-day threshold",
            "validity_days",
            "short_lived_bucket",
        )
    elif validity.resolved and bucket.resolved:
        stated(
            "lifecycle",
            "certificate lifecycle not applicable in this session",
            "validity_days",
            "short_lived_bucket",
        )
    else:
        withhold("lifecycle", "validity_days", "short_lived_bucket")
    return out


def apply_policy_profile(measurement: MeasurementObject, policy: dict | None = None) -> dict:
    """Read-only posture assessment of a measurement under a policy.

    Emits policy checks, a posture roll-up and per-plane verdict components.
    Never mutates or copies evidence into new conclusions; a measurement
    serializes byte-identically before and after.
    """
    policy = policy or load_policy()
    checks = []

    def add(name: str, status: str, detail: str) -> None:
        checks.append({"check": name, "status": status, "detail": detail})

    family = measurement.fields["group_family"]
    if policy.get("require_hybrid_session"):
        if family.is_known:
            status = "pass" if family.value == Family.HYBRID.value else "fail"
            add("hybrid_key_establishment", status, f"session family {family.value}")
        elif family.state is EvidenceState.NOT_APPLICABLE:
            add("hybrid_key_establishment", "not_applicable", "; ".join(family.reasons))
        else:
            add("hybrid_key_establishment", "insufficient", "; ".join(family.reasons) or "unresolved")

    validity = measurement.fields["validity_days"]
    limit = policy.get("max_validity_days")
    if limit is not None:
        if validity.is_known:
            add(
                "validity_window",
                "pass" if validity.value <= limit else "fail",
                f"{validity.value}d against {limit}d limit",
            )
        else:
            add("validity_window", "insufficient", "; ".join(validity.reasons) or "unresolved")

    if policy.get("short_lived_target"):
        bucket = measurement.fields["short_lived_bucket"]
        if bucket.is_known:
            add("short_lived_bucket", "pass" if bucket.value == "short_lived" else "fail", bucket.value)
        else:
            add("short_lived_bucket", "insufficient", "; ".join(bucket.reasons) or "unresolved")

    if policy.get("forbid_contradictions"):
        n = len(measurement.contradiction_records)
        add("contradiction_free", "pass" if n == 0 else "fail", f"{n} contradiction record(s)")

    statuses = {c["check"]: c["status"] for c in checks}
    if any(s == "insufficient" for s in statuses.values()):
        posture = "insufficient_evidence"
    elif statuses.get("hybrid_key_establishment") == "fail":
        posture = "classical_only"
    elif any(s == "fail" for s in statuses.values()):
        posture = "attention"
    else:
        posture = "ready"

    return {
        "policy": policy.get("name", "unnamed"),
        "artifact_id": measurement.artifact_id,
        "mode": measurement.mode,
        "posture": posture,
        "checks": checks,
        "verdicts": _verdicts(measurement),
    }
