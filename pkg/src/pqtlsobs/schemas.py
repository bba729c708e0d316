"""Document contracts for every JSON file the CLI reads or writes.

One draft 2020-12 schema per document kind, shaped to match the
serializers exactly: a document that validates here loads through the
corresponding from_json without KeyErrors. Two sniffers map an untyped
payload to its kind so commands can accept files without a flag naming
the format.
"""

from __future__ import annotations

from typing import Any, Mapping

import jsonschema

from .errors import SchemaError

_MAX_LISTED_ERRORS = 20

_EVIDENCE = {
    "type": "object",
    "properties": {
        "state": {"enum": ["known", "unknown", "ambiguous", "not_applicable"]},
        "value": {},
        "candidates": {"type": "array"},
        "reasons": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["state"],
    "additionalProperties": False,
}

_PROVENANCE = {
    "type": "object",
    "properties": {
        "surface": {"type": "string"},
        "origin": {"type": "string"},
        "observed_at": {"type": "number"},
    },
    "required": ["surface", "origin", "observed_at"],
}

_EV = {"$ref": "#/$defs/evidence"}
_CODEPOINTS = {"type": "array", "items": {"type": "integer", "minimum": 0}}
# a probe that never sends supported_versions records null, not []
_CODEPOINTS_OR_NULL = {"type": ["array", "null"], "items": {"type": "integer", "minimum": 0}}
_HEX = {"type": "string", "pattern": "^([0-9a-fA-F]{2})*$"}
_B64_CHAIN = {"type": "array", "items": {"type": "string"}, "minItems": 1}


def _doc(properties: Mapping[str, Any], required: list[str], **extra: Any) -> dict:
    schema = {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": dict(properties),
        "required": required,
        "$defs": {"evidence": _EVIDENCE, "provenance": _PROVENANCE},
    }
    schema.update(extra)
    return schema


_CHAIN_OBSERVATION_PROPS = {
    "provenance": {"$ref": "#/$defs/provenance"},
    "leaf_subject": {"type": "string"},
    "leaf_spki_algorithm": _EV,
    "leaf_signature_algorithm": _EV,
    "validity_days": _EV,
    "short_lived_bucket": _EV,
    "not_before": {"type": ["string", "null"]},
    "not_after": {"type": ["string", "null"]},
    "chain_depth": _EV,
    "chain_digests": {"type": "array", "items": {"type": "string"}},
    "bucket_threshold_days": {"type": "integer"},
}

_CHAIN_OBSERVATION_REQUIRED = [
    "provenance",
    "leaf_spki_algorithm",
    "leaf_signature_algorithm",
    "validity_days",
    "short_lived_bucket",
    "chain_depth",
    "chain_digests",
    "bucket_threshold_days",
]

_PASSIVE_PROPS = {
    "artifact_id": {"type": "string"},
    "digest": {"type": "string"},
    "provenance": {"$ref": "#/$defs/provenance"},
    "completeness": {"type": "string"},
    "fragmented": {"type": "boolean"},
    "coalesced": {"type": "boolean"},
    "negotiated_version": _EV,
    "negotiated_cipher_suite": _EV,
    "negotiation_outcome": _EV,
    "sni": _EV,
    "selected_group": _EV,
    "selected_group_codepoint": {"type": ["integer", "null"]},
    "offered_groups": _EV,
    "offered_group_codepoints": _CODEPOINTS,
    "offered_versions": _EV,
    "offered_cipher_suite_codepoints": _CODEPOINTS,
    "signature_schemes": _EV,
    "handshake_structure": _EV,
    "server_flight_detail": _EV,
    "mtls_client_auth": _EV,
    "hrr_seen": {"type": "boolean"},
    "psk_offered": {"type": "boolean"},
    "psk_selected": {"type": "boolean"},
    "unresolved_offer_identifiers": {"type": "array", "items": {"type": "string"}},
    "embedded_chain": {
        "anyOf": [
            {"type": "null"},
            {"type": "object", "properties": _CHAIN_OBSERVATION_PROPS, "required": _CHAIN_OBSERVATION_REQUIRED},
        ]
    },
    "client_embedded_chain": {
        "anyOf": [
            {"type": "null"},
            {"type": "object", "properties": _CHAIN_OBSERVATION_PROPS, "required": _CHAIN_OBSERVATION_REQUIRED},
        ]
    },
}

_PASSIVE_REQUIRED = [
    "artifact_id",
    "digest",
    "provenance",
    "completeness",
    "fragmented",
    "coalesced",
    "negotiated_version",
    "negotiated_cipher_suite",
    "negotiation_outcome",
    "sni",
    "selected_group",
    "offered_groups",
    "offered_group_codepoints",
    "offered_versions",
    "offered_cipher_suite_codepoints",
    "signature_schemes",
    "handshake_structure",
    "server_flight_detail",
    "mtls_client_auth",
    "hrr_seen",
    "psk_offered",
    "psk_selected",
    "unresolved_offer_identifiers",
]

_PROBE_PROPS = {
    "profile_name": {"type": "string"},
    "host": {"type": "string"},
    "port": {"type": "integer"},
    "sni": {"type": ["string", "null"]},
    "outcome": {"type": "string"},
    "attempts": {"type": "integer", "minimum": 1},
    "provenance": {"$ref": "#/$defs/provenance"},
    "offered_group_codepoints": _CODEPOINTS,
    "offered_version_codepoints": _CODEPOINTS_OR_NULL,
    "offered_cipher_suite_codepoints": _CODEPOINTS,
    "negotiated_version": _EV,
    "negotiated_cipher_suite": _EV,
    "selected_group": _EV,
    "selected_group_codepoint": {"type": ["integer", "null"]},
    "certificate_request": _EV,
    "session_tickets_issued": _EV,
    "resumption_accepted": _EV,
    "hrr_used": {"type": "boolean"},
    "alert_code": {"type": ["integer", "null"]},
    "detail": {"type": ["string", "null"]},
    "observed_chain": {
        "anyOf": [
            {"type": "null"},
            {"type": "object", "properties": _CHAIN_OBSERVATION_PROPS, "required": _CHAIN_OBSERVATION_REQUIRED},
        ]
    },
}

_PROBE_REQUIRED = [
    "profile_name",
    "host",
    "port",
    "outcome",
    "attempts",
    "provenance",
    "offered_group_codepoints",
    "offered_version_codepoints",
    "offered_cipher_suite_codepoints",
    "negotiated_version",
    "negotiated_cipher_suite",
    "selected_group",
    "certificate_request",
    "session_tickets_issued",
    "resumption_accepted",
    "hrr_used",
]

_MEASUREMENT_PROPS = {
    "artifact_id": {"type": "string"},
    "mode": {"type": "string"},
    "observed_at": {"type": "number"},
    "fields": {"type": "object", "additionalProperties": _EV},
    "plane_closures": {"type": "object", "additionalProperties": {"type": "boolean"}},
    "observability_ok": {"type": "boolean"},
    "object_complete": {"type": "boolean"},
    "clear_for_migration": {"type": "boolean"},
    "ambiguity_flag": {"type": "boolean"},
    "ambiguity_reasons": {"type": "array", "items": {"type": "string"}},
    "unresolved_offer_identifiers": {"type": "array", "items": {"type": "string"}},
    "contradiction_records": {"type": "array", "items": {"type": "object"}},
    "plane_linkage": {"type": "object"},
    "inference_trace": {"type": "array", "items": {"type": "object"}},
    "bucket_threshold_days": {"type": "integer"},
    "completeness": {"type": "string"},
    "fragmented": {"type": "boolean"},
    "coalesced": {"type": "boolean"},
}

_TARGET_RECORD = {
    "type": "object",
    "properties": {
        "target_id": {"type": "string", "minLength": 1},
        "host": {"type": "string", "minLength": 1},
        "port": {"type": "integer", "minimum": 1, "maximum": 65535},
        "sni": {"type": ["string", "null"]},
        "family": {"type": "string"},
        "owner_scope": {"type": "string"},
        "tier": {"type": "string"},
        "profiles": {"type": "array", "items": {"type": "string"}},
        "selection_source": {"type": "string"},
        "selection_basis": {"type": "string"},
    },
    "required": [
        "target_id",
        "host",
        "family",
        "owner_scope",
        "tier",
        "profiles",
        "selection_source",
        "selection_basis",
    ],
}

_ENDPOINT_CONFIG = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "tls_versions": {"type": "array", "items": {"enum": ["TLS1.3", "TLS1.2"]}},
        "supported_groups": _CODEPOINTS,
        "cipher_suites_tls13": _CODEPOINTS,
        "cipher_suites_tls12": _CODEPOINTS,
        "chain": _B64_CHAIN,
        "client_auth": {"type": "boolean"},
        "session_tickets": {"type": "integer", "minimum": 0},
        "accept_resumption": {"type": "boolean"},
        "server_preference": {"type": "boolean"},
        "failure": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
}

_ROUND_SUMMARY_PROPS = {
    "round_id": {"type": "string"},
    "targets": {"type": "integer", "minimum": 0},
    "probes": {"type": "integer", "minimum": 0},
    "complete_handshakes": {"type": "integer", "minimum": 0},
    "chain_artifacts": {"type": "integer", "minimum": 0},
    "hybrid_confirmed": {"type": "integer", "minimum": 0},
    "classical_only_under_tested_profiles": {"type": "integer", "minimum": 0},
    "capability_broader": {"type": "integer", "minimum": 0},
    "contradiction_bearing": {"type": "integer", "minimum": 0},
    "clear_complete": {"type": "integer", "minimum": 0},
}

_OUTCOME_PROBE = {
    "type": "object",
    "properties": {
        "profile_name": {"type": "string"},
        "outcome": {"type": "string"},
        "attempts": {"type": "integer"},
        "selected_group": _EV,
    },
    "required": ["profile_name", "outcome", "attempts", "selected_group"],
}

_TARGET_OUTCOME = {
    "type": "object",
    "properties": {
        "target_id": {"type": "string"},
        "family": {"type": "string"},
        "tier": {"type": "string"},
        "probes": {"type": "array", "items": _OUTCOME_PROBE},
        "chain_observations": {"type": "integer", "minimum": 0},
        "measurement": {
            "anyOf": [
                {"type": "null"},
                {"type": "object", "properties": _MEASUREMENT_PROPS, "required": sorted(_MEASUREMENT_PROPS)},
            ]
        },
        "error": {"type": ["string", "null"]},
    },
    "required": ["target_id", "family", "tier", "probes", "chain_observations", "measurement", "error"],
}

_MODE_SUMMARY = {
    "type": "object",
    "properties": {
        "denominator": {"type": "integer", "minimum": 0},
        "planes": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "observability_ok": {"type": "integer", "minimum": 0},
        "object_complete": {"type": "integer", "minimum": 0},
        "clear_for_migration": {"type": "integer", "minimum": 0},
        "ambiguity_flag": {"type": "integer", "minimum": 0},
        "contradiction": {"type": "integer", "minimum": 0},
        "capability_broader": {"type": "integer", "minimum": 0},
        "contract_match": {"type": "number", "minimum": 0, "maximum": 1},
        "contract_coverage": {"type": "integer", "minimum": 0},
        "primary_score": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "required": [
        "denominator",
        "planes",
        "observability_ok",
        "object_complete",
        "clear_for_migration",
        "ambiguity_flag",
        "contradiction",
        "capability_broader",
    ],
}

SCHEMAS: dict[str, dict] = {
    "transcript": _doc(
        {
            "artifact_id": {"type": "string", "minLength": 1},
            "digest": {"type": "string"},
            "declared_truncated": {"type": "boolean"},
            "flows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "direction": {"enum": ["client_to_server", "server_to_client"]},
                        "timestamp": {"type": "number"},
                        "data_hex": _HEX,
                    },
                    "required": ["direction", "timestamp", "data_hex"],
                },
            },
        },
        ["artifact_id", "flows"],
    ),
    "passive_observation": _doc(_PASSIVE_PROPS, _PASSIVE_REQUIRED),
    "probe_result": _doc(_PROBE_PROPS, _PROBE_REQUIRED),
    "chain_observation": _doc(_CHAIN_OBSERVATION_PROPS, _CHAIN_OBSERVATION_REQUIRED),
    "evidence_bundle": _doc(
        {
            "passive": {
                "anyOf": [
                    {"type": "null"},
                    {"type": "object", "properties": _PASSIVE_PROPS, "required": _PASSIVE_REQUIRED},
                ]
            },
            "probes": {
                "type": "array",
                "items": {"type": "object", "properties": _PROBE_PROPS, "required": _PROBE_REQUIRED},
            },
            "chains": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": _CHAIN_OBSERVATION_PROPS,
                    "required": _CHAIN_OBSERVATION_REQUIRED,
                },
            },
        },
        [],
        anyOf=[{"required": ["passive"]}, {"required": ["probes"]}, {"required": ["chains"]}],
    ),
    "measurement": _doc(_MEASUREMENT_PROPS, sorted(_MEASUREMENT_PROPS)),
    "inventory": _doc(
        {"targets": {"type": "array", "items": _TARGET_RECORD, "minItems": 1}},
        ["targets"],
    ),
    "round_setup": _doc(
        {
            "endpoints": {"type": "object", "additionalProperties": _ENDPOINT_CONFIG},
            "artifact_chains": {
                "type": "object",
                "additionalProperties": {"type": "array", "items": _B64_CHAIN},
            },
        },
        [],
        anyOf=[{"required": ["endpoints"]}, {"required": ["artifact_chains"]}],
    ),
    "round_summary": _doc(_ROUND_SUMMARY_PROPS, sorted(_ROUND_SUMMARY_PROPS)),
    "round_result": _doc(
        {
            "round_id": {"type": "string"},
            "summary": {
                "type": "object",
                "properties": _ROUND_SUMMARY_PROPS,
                "required": sorted(_ROUND_SUMMARY_PROPS),
            },
            "targets": {"type": "array", "items": _TARGET_OUTCOME},
            "rejected": {"type": "array", "items": {"type": "object"}},
        },
        ["round_id", "summary", "targets", "rejected"],
    ),
    "suite_metrics": _doc(
        {
            "suite": {"type": "string"},
            "seed": {"type": "integer"},
            "family": {"type": "string"},
            "modes": {"type": "object", "additionalProperties": _MODE_SUMMARY, "minProperties": 1},
        },
        ["modes"],
    ),
    "policy": _doc(
        {
            "version": {"type": "string"},
            "name": {"type": "string"},
            "require_hybrid_session": {"type": "boolean"},
            "max_validity_days": {"type": ["integer", "null"], "minimum": 1},
            "short_lived_target": {"type": "boolean"},
            "forbid_contradictions": {"type": "boolean"},
        },
        ["name"],
        additionalProperties=False,
    ),
    "measurement_review": _doc(
        {
            "measurement": {
                "type": "object",
                "properties": _MEASUREMENT_PROPS,
                "required": sorted(_MEASUREMENT_PROPS),
            },
            "policy_review": {
                "type": "object",
                "properties": {
                    "policy": {"type": "string"},
                    "artifact_id": {"type": "string"},
                    "mode": {"type": "string"},
                    "posture": {"type": "string"},
                    "checks": {"type": "array", "items": {"type": "object"}},
                    "verdicts": {"type": "array", "items": {"type": "object"}},
                },
                "required": ["policy", "artifact_id", "mode", "posture", "checks", "verdicts"],
            },
        },
        ["measurement", "policy_review"],
    ),
    "cli_config": _doc(
        {
            "seed": {"type": "integer"},
            "concurrency": {"type": "integer", "minimum": 1},
            "registry": {"type": "string"},
            "policy": {"type": "string"},
            "timeout_s": {"type": "number", "exclusiveMinimum": 0},
            "max_retries": {"type": "integer", "minimum": 0},
            "backoff_s": {"type": "number", "minimum": 0},
        },
        [],
        additionalProperties=False,
    ),
    "inventory_check": _doc(
        {
            "accepted": {"type": "integer", "minimum": 0},
            "violations": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "target_id": {"type": "string"},
                        "rule": {"type": "string"},
                        "detail": {"type": "string"},
                    },
                    "required": ["target_id", "rule", "detail"],
                },
            },
        },
        ["accepted", "violations"],
    ),
    "bench_manifest": _doc(
        {
            "suite": {"type": "string"},
            "seed": {"type": "integer"},
            "files": {
                "type": "object",
                "additionalProperties": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                "minProperties": 1,
            },
        },
        ["suite", "seed", "files"],
    ),
    "bench_evaluation": _doc(
        {
            "suite": {"type": "string"},
            "seed": {"type": "integer"},
            "scenarios": {"type": "integer", "minimum": 0},
            "failed": {"type": "integer", "minimum": 0},
            "failures": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "scenario": {"type": "string"},
                        "exact_errors": {"type": "array", "items": {"type": "string"}},
                        "contract_failures": {"type": "array", "items": {"type": "string"}},
                    },
                    "required": ["scenario", "exact_errors", "contract_failures"],
                },
            },
        },
        ["scenarios", "failed", "failures"],
    ),
    "drift_report": _doc(
        {
            "comparable_targets": {"type": "integer", "minimum": 0},
            "capability_drift_pct": {"type": "number", "minimum": 0, "maximum": 100},
            "certificate_drift_pct": {"type": "number", "minimum": 0, "maximum": 100},
            "lifecycle_drift_pct": {"type": "number", "minimum": 0, "maximum": 100},
            "signature_algorithm_drift_pct": {"type": "number", "minimum": 0, "maximum": 100},
            "clear_complete_stability_pct": {"type": "number", "minimum": 0, "maximum": 100},
        },
        [
            "comparable_targets",
            "capability_drift_pct",
            "certificate_drift_pct",
            "lifecycle_drift_pct",
            "signature_algorithm_drift_pct",
            "clear_complete_stability_pct",
        ],
    ),
}

_validators: dict[str, jsonschema.Draft202012Validator] = {}


def _validator(kind: str) -> jsonschema.Draft202012Validator:
    if kind not in _validators:
        _validators[kind] = jsonschema.Draft202012Validator(SCHEMAS[kind])
    return _validators[kind]


def _path(error: jsonschema.ValidationError) -> str:
    parts = []
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "$" + "".join(parts)


def validate(payload: Any, kind: str) -> Any:
    """Check payload against the schema for kind; returns payload.

    Raises SchemaError naming the first offending JSON path; the error
    detail carries every violation (capped) for machine consumption.
    """
    if kind not in SCHEMAS:
        raise SchemaError(f"no schema for document kind {kind!r}", known_kinds=sorted(SCHEMAS))
    errors = sorted(
        _validator(kind).iter_errors(payload),
        key=lambda e: ([str(p) for p in e.absolute_path], e.message),
    )
    if errors:
        listed = [{"path": _path(e), "message": e.message} for e in errors[:_MAX_LISTED_ERRORS]]
        raise SchemaError(
            f"{kind} document invalid at {listed[0]['path']}: {errors[0].message}",
            kind=kind,
            violations=listed,
        )
    return payload


def sniff_observation_kind(payload: Any) -> str:
    """Classify an evidence-side document by its distinguishing keys."""
    if isinstance(payload, Mapping):
        if "flows" in payload:
            return "transcript"
        if "profile_name" in payload:
            return "probe_result"
        if "chain_digests" in payload:
            return "chain_observation"
        if "mode" in payload and "fields" in payload:
            return "measurement"
        if "completeness" in payload and "provenance" in payload:
            return "passive_observation"
        if {"passive", "probes", "chains"} & set(payload):
            return "evidence_bundle"
    raise SchemaError(
        "unrecognized observation document",
        expected=["transcript", "passive_observation", "probe_result", "chain_observation", "evidence_bundle", "measurement"],
    )


def sniff_report_kind(payload: Any) -> str:
    """Classify a report-side document by its distinguishing keys."""
    if isinstance(payload, Mapping):
        if "modes" in payload:
            return "suite_metrics"
        if "comparable_targets" in payload:
            return "drift_report"
        if "summary" in payload and "targets" in payload:
            return "round_result"
        if "round_id" in payload and "probes" in payload:
            return "round_summary"
    raise SchemaError(
        "unrecognized report document",
        expected=["suite_metrics", "round_result", "round_summary", "drift_report"],
    )
