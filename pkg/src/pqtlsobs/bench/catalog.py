"""Scenario catalog: 29 emulated endpoints with ground truth and contracts.

Fourteen canonical scenarios (c01..c14) cover the clean diagnostic grid:
key-exchange shapes, leaf algorithms, client-auth posture, lifecycle buckets,
chain depth and SNI-free addressing. Fifteen stress scenarios (T01..T15)
cover capture damage, record-layout games, endpoint drift, retries,
resumption and deprecated codepoints.

The catalog is pure data. Certificate fixtures and endpoint behaviour are
referenced by name and materialised by the generator, so importing this
module never touches the filesystem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from .. import wire
from ..wire import HrrSpec, Mutation, PskSpec

T_BASE = 1_755_000_000.0
# Just past the correlation window (48 h), so drifted evidence never
# participates in same-run closure but still lands in capability unions
# and contradiction detection.
DRIFT_OFFSET_S = 48 * 3600 + 10.0

X25519 = 0x001D
SECP256R1 = 0x0017
X25519MLKEM768 = 0x11EC
KYBER768_DRAFT = 0x6399
GREASE_A = 0x2A2A
GREASE_B = 0x6A6A

CHAIN_FIXTURES: dict[str, tuple[str, ...]] = {
    "rsa_398": ("leaf_rsa_398.der", "issuer_rsa.der"),
    "rsa_398b": ("leaf_rsa_398b.der", "issuer_rsa.der"),
    "rsa_398_sha384": ("leaf_rsa_398_sha384.der", "issuer_rsa.der"),
    "rsa_90": ("leaf_rsa_90.der", "issuer_rsa.der"),
    "ecdsa_398": ("leaf_ecdsa_398.der", "issuer_ecdsa.der"),
    "ecdsa_90": ("leaf_ecdsa_90.der", "issuer_ecdsa.der"),
    "ecdsa_90_leaf_only": ("leaf_ecdsa_90.der",),
    "client": ("client_rsa.der",),
}


@dataclass(frozen=True)
class ProbeSpec:
    """One synthetic probe exchange against the scenario endpoint."""

    profile: str
    offset_s: float
    endpoint: str = "current"  # which behaviour answers: current | drifted


@dataclass(frozen=True)
class ChainSpec:
    """A certificate chain delivered outside the passive capture."""

    chain: str  # CHAIN_FIXTURES key
    origin: str  # scenario_artifact | active_probe
    offset_s: float = 10.0


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    family: str  # canonical | stress
    title: str
    session: Mapping[str, Any]
    endpoint: Mapping[str, Any]
    endpoint_after: Mapping[str, Any] | None = None
    probes: tuple[ProbeSpec, ...] = ()
    artifact_chains: tuple[ChainSpec, ...] = ()
    mutations: tuple[Mutation, ...] = ()
    cut: Mapping[str, Any] | None = None
    probe_host: str = "203.0.113.10"
    truth: Mapping[str, Any] = field(default_factory=dict)
    contracts: tuple[Mapping[str, Any], ...] = ()
    # closure is scored against the default plane map unless a scenario
    # narrows it; observability is pinned suite-wide to selected_group
    required_fields: Mapping[str, tuple[str, ...]] | None = None


# Standard probe plans. TLS 1.2 endpoints get the no-1.3 legacy client first;
# all offsets sit well inside the correlation window.
PROBES_13 = (ProbeSpec("classical", 40.0), ProbeSpec("hybrid", 50.0))
PROBES_12 = (
    ProbeSpec("legacy12", 40.0),
    ProbeSpec("classical", 50.0),
    ProbeSpec("hybrid", 60.0),
)

ARTIFACT_RSA_398 = (ChainSpec("rsa_398", "scenario_artifact"),)
ARTIFACT_RSA_90 = (ChainSpec("rsa_90", "scenario_artifact"),)
ARTIFACT_ECDSA_398 = (ChainSpec("ecdsa_398", "scenario_artifact"),)
ARTIFACT_ECDSA_90 = (ChainSpec("ecdsa_90", "scenario_artifact"),)

RSA_LEAF = {
    "leaf_spki_algorithm": "RSA",
    "leaf_signature_algorithm": "sha256WithRSAEncryption",
}
ECDSA_LEAF = {
    "leaf_spki_algorithm": "ECDSA",
    "leaf_signature_algorithm": "ecdsa-with-SHA256",
}
STANDARD_398 = {"validity_days": 398, "short_lived_bucket": "standard", "chain_depth": 2}
SHORT_90 = {"validity_days": 90, "short_lived_bucket": "short_lived", "chain_depth": 2}
CLEAN_LAYOUT = {"completeness": "complete", "fragmented": False, "coalesced": False}


def _field(mode: str, name: str, state: str, *, value: Any = ..., reason: str | None = None) -> dict:
    out: dict[str, Any] = {"mode": mode, "check": "field", "field": name, "state": state}
    if value is not ...:
        out["value"] = value
    if reason is not None:
        out["reason"] = reason
    return out


def _plane(mode: str, plane: str, closed: bool) -> dict:
    return {"mode": mode, "check": "plane", "plane": plane, "closed": closed}


def _flag(mode: str, flag: str, value: bool) -> dict:
    return {"mode": mode, "check": "flag", "flag": flag, "value": value}


def _contradicts(mode: str, *fields: str) -> dict:
    return {"mode": mode, "check": "contradicts", "fields": list(fields)}


def _clean(mode: str = "all") -> dict:
    return {"mode": mode, "check": "contradiction_free"}


def _unresolved(mode: str, identifier: str) -> dict:
    return {"mode": mode, "check": "unresolved_contains", "identifier": identifier}


_CAP_13 = {
    "supported_groups": ("X25519", "X25519MLKEM768"),
    "hybrid_key_establishment": True,
    "capability_broader": False,
}
_CAP_X25519 = {
    "supported_groups": ("X25519",),
    "hybrid_key_establishment": False,
    "capability_broader": False,
}


def _canonical() -> list[Scenario]:
    return [
        Scenario(
            scenario_id="c01",
            family="canonical",
            title="TLS 1.2 static-RSA key exchange",
            session={
                "tls_version": wire.TLS12,
                "cipher_suite": 0x009C,
                "client_offered_groups": (X25519, SECP256R1),
                "sni": "legacy.example.test",
                "tls12_chain": "rsa_398",
            },
            endpoint={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (X25519, SECP256R1),
                "cipher_suites_tls12": (0x009C,),
                "chain": "rsa_398",
            },
            probes=PROBES_12,
            truth={
                "negotiated_version": "TLS1.2",
                "negotiated_cipher_suite": "TLS_RSA_WITH_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "legacy.example.test",
                "selected_group": None,
                "group_family": None,
                "mtls_client_auth": False,
                "supported_groups": (),
                "hybrid_key_establishment": False,
                "capability_broader": False,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("all", "selected_group", "not_applicable", reason="static_rsa_key_exchange"),
                _plane("B1", "capability", False),
                _field("B2+", "supported_groups", "known", value=()),
                _plane("B1", "authentication", True),
                _flag("B2", "ambiguity_flag", False),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c02",
            family="canonical",
            title="TLS 1.2 ECDHE with an RSA leaf",
            session={
                "tls_version": wire.TLS12,
                "cipher_suite": 0xC02F,
                "client_offered_groups": (X25519, SECP256R1),
                "selected_group": X25519,
                "sni": "legacy.example.test",
                "tls12_chain": "rsa_398",
            },
            endpoint={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (X25519, SECP256R1),
                "cipher_suites_tls12": (0xC02F, 0xC02B, 0x009C),
                "chain": "rsa_398",
            },
            probes=PROBES_12,
            truth={
                "negotiated_version": "TLS1.2",
                "negotiated_cipher_suite": "TLS_ECDHE_RSA_WITH_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "legacy.example.test",
                "selected_group": "X25519",
                "group_family": "classical",
                "mtls_client_auth": False,
                **_CAP_X25519,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("all", "selected_group", "known", value="X25519"),
                _plane("B1", "authentication", True),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c03",
            family="canonical",
            title="TLS 1.2 ECDHE with an ECDSA leaf, client-preference group pick",
            session={
                "tls_version": wire.TLS12,
                "cipher_suite": 0xC02B,
                "client_offered_groups": (SECP256R1, X25519),
                "selected_group": SECP256R1,
                "sni": "legacy-ecdsa.example.test",
                "tls12_chain": "ecdsa_398",
            },
            endpoint={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (SECP256R1, X25519),
                "cipher_suites_tls12": (0xC02B,),
                "chain": "ecdsa_398",
            },
            probes=PROBES_12,
            truth={
                "negotiated_version": "TLS1.2",
                "negotiated_cipher_suite": "TLS_ECDHE_ECDSA_WITH_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "legacy-ecdsa.example.test",
                "selected_group": "secp256r1",
                "group_family": "classical",
                "mtls_client_auth": False,
                **_CAP_X25519,
                **ECDSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            # Session offered (secp256r1, x25519) and got secp256r1; probes
            # offering the reverse order get x25519. Different offers are
            # different questions, so this must stay contradiction-free.
            contracts=(
                _field("all", "selected_group", "known", value="secp256r1"),
                _field("B2+", "supported_groups", "known", value=("X25519",)),
                _clean(),
                _flag("B3", "clear_for_migration", True),
            ),
        ),
        Scenario(
            scenario_id="c04",
            family="canonical",
            title="TLS 1.2 mutual TLS with a short-lived leaf",
            session={
                "tls_version": wire.TLS12,
                "cipher_suite": 0xC02F,
                "client_offered_groups": (X25519, SECP256R1),
                "selected_group": X25519,
                "sni": "legacy-mtls.example.test",
                "tls12_chain": "rsa_90",
                "tls12_client_auth": True,
                "tls12_client_chain": "client",
            },
            endpoint={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (X25519, SECP256R1),
                "cipher_suites_tls12": (0xC02F, 0xC02B, 0x009C),
                "chain": "rsa_90",
                "client_auth": True,
            },
            probes=PROBES_12,
            truth={
                "negotiated_version": "TLS1.2",
                "negotiated_cipher_suite": "TLS_ECDHE_RSA_WITH_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "legacy-mtls.example.test",
                "selected_group": "X25519",
                "group_family": "classical",
                "mtls_client_auth": True,
                **_CAP_X25519,
                **RSA_LEAF,
                **SHORT_90,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B1", "mtls_client_auth", "known", value=True),
                _field("all", "short_lived_bucket", "known", value="short_lived"),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c05",
            family="canonical",
            title="TLS 1.3 endpoint without hybrid support",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519,
                "sni": "pq.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519, SECP256R1)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "pq.example.test",
                "selected_group": "X25519",
                "group_family": "classical",
                "mtls_client_auth": False,
                **_CAP_X25519,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B1", "mtls_client_auth", "unknown", reason="tls13_client_auth_encrypted"),
                _field("B2", "mtls_client_auth", "known", value=False),
                _plane("B2", "authentication", False),
                _plane("B3", "authentication", True),
                _field("B2+", "hybrid_key_establishment", "known", value=False),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c06",
            family="canonical",
            title="TLS 1.3 hybrid key establishment",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "pq.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519MLKEM768, X25519)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "pq.example.test",
                "selected_group": "X25519MLKEM768",
                "group_family": "hybrid",
                "mtls_client_auth": False,
                **_CAP_13,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("all", "group_family", "known", value="hybrid"),
                _field("B2+", "hybrid_key_establishment", "known", value=True),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c07",
            family="canonical",
            title="TLS 1.3 with an RSA leaf delivered out of band",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519,
                "sni": "www.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519,)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "www.example.test",
                "selected_group": "X25519",
                "group_family": "classical",
                "mtls_client_auth": False,
                **_CAP_X25519,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B1", "leaf_spki_algorithm", "unknown", reason="tls13_certificate_encrypted"),
                _field("B3", "leaf_spki_algorithm", "known", value="RSA"),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c08",
            family="canonical",
            title="TLS 1.3 AES-256 suite with an ECDSA leaf",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1302,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "www.example.test",
            },
            endpoint={
                "tls_versions": (wire.TLS13,),
                "supported_groups": (X25519MLKEM768, X25519),
                "cipher_suites_tls13": (0x1302, 0x1301),
            },
            probes=PROBES_13,
            artifact_chains=ARTIFACT_ECDSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_256_GCM_SHA384",
                "negotiation_outcome": "completed",
                "sni": "www.example.test",
                "selected_group": "X25519MLKEM768",
                "group_family": "hybrid",
                "mtls_client_auth": False,
                **_CAP_13,
                **ECDSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B3", "leaf_spki_algorithm", "known", value="ECDSA"),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c09",
            family="canonical",
            title="TLS 1.3 endpoint requiring client certificates",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "auth.example.test",
            },
            endpoint={
                "tls_versions": (wire.TLS13,),
                "supported_groups": (X25519MLKEM768, X25519),
                "client_auth": True,
            },
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "auth.example.test",
                "selected_group": "X25519MLKEM768",
                "group_family": "hybrid",
                "mtls_client_auth": True,
                **_CAP_13,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B1", "mtls_client_auth", "unknown", reason="tls13_client_auth_encrypted"),
                _field("B2+", "mtls_client_auth", "known", value=True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c10",
            family="canonical",
            title="TLS 1.3 endpoint without client certificates (twin of c09)",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "auth.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519MLKEM768, X25519)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "auth.example.test",
                "selected_group": "X25519MLKEM768",
                "group_family": "hybrid",
                "mtls_client_auth": False,
                **_CAP_13,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B1", "mtls_client_auth", "unknown", reason="tls13_client_auth_encrypted"),
                _field("B2+", "mtls_client_auth", "known", value=False),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c11",
            family="canonical",
            title="Short-lived leaf (90 days)",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "short.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519MLKEM768, X25519)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_90,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "short.example.test",
                "selected_group": "X25519MLKEM768",
                "group_family": "hybrid",
                "mtls_client_auth": False,
                **_CAP_13,
                **RSA_LEAF,
                **SHORT_90,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B1", "validity_days", "unknown"),
                _field("B3", "short_lived_bucket", "known", value="short_lived"),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c12",
            family="canonical",
            title="Standard-lifetime leaf (398 days, twin of c11)",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "long.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519MLKEM768, X25519)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "long.example.test",
                "selected_group": "X25519MLKEM768",
                "group_family": "hybrid",
                "mtls_client_auth": False,
                **_CAP_13,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B3", "short_lived_bucket", "known", value="standard"),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c13",
            family="canonical",
            title="Depth-1 chain: leaf delivered without its issuer",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "depth.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519MLKEM768, X25519)},
            probes=PROBES_13,
            artifact_chains=(ChainSpec("ecdsa_90_leaf_only", "scenario_artifact"),),
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "depth.example.test",
                "selected_group": "X25519MLKEM768",
                "group_family": "hybrid",
                "mtls_client_auth": False,
                **_CAP_13,
                **ECDSA_LEAF,
                "validity_days": 90,
                "short_lived_bucket": "short_lived",
                "chain_depth": 1,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B3", "chain_depth", "known", value=1),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="c14",
            family="canonical",
            title="IPv6 literal endpoint, no SNI anywhere",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519,
                "sni": None,
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (X25519, SECP256R1)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            probe_host="2001:db8::10",
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": None,
                "selected_group": "X25519",
                "group_family": "classical",
                "mtls_client_auth": False,
                **_CAP_X25519,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("all", "sni", "not_applicable", reason="sni_absent"),
                _flag("B3", "ambiguity_flag", False),
                _clean(),
            ),
        ),
    ]


def _stress() -> list[Scenario]:
    tls13_hybrid_session = {
        "tls_version": wire.TLS13,
        "cipher_suite": 0x1301,
        "client_offered_groups": (X25519MLKEM768, X25519),
        "selected_group": X25519MLKEM768,
        "sni": "pq.example.test",
    }
    hybrid_endpoint = {"tls_versions": (wire.TLS13,), "supported_groups": (X25519MLKEM768, X25519)}
    tls13_base_truth = {
        "negotiated_version": "TLS1.3",
        "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
        "negotiation_outcome": "completed",
        "sni": "pq.example.test",
        "selected_group": "X25519MLKEM768",
        "group_family": "hybrid",
        "mtls_client_auth": False,
        **_CAP_13,
        **RSA_LEAF,
        **STANDARD_398,
    }
    return [
        Scenario(
            scenario_id="T01",
            family="stress",
            title="Endpoint supports hybrid but this client never asked",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519,),
                "selected_group": X25519,
                "sni": "pq.example.test",
            },
            endpoint=hybrid_endpoint,
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                **tls13_base_truth,
                "selected_group": "X25519",
                "group_family": "classical",
                "capability_broader": True,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("B1", "capability_broader", "unknown"),
                _field("B2+", "capability_broader", "known", value=True),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T02",
            family="stress",
            title="Capture cut before the ServerHello",
            session=dict(tls13_hybrid_session),
            endpoint=hybrid_endpoint,
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            cut={"kind": "pre_server_hello"},
            truth={
                **tls13_base_truth,
                "completeness": "truncated_pre_serverhello",
                "fragmented": False,
                "coalesced": False,
            },
            contracts=(
                _field("all", "negotiation_outcome", "unknown", reason="no_server_hello"),
                _field("all", "negotiated_version", "unknown"),
                _field("B3", "selected_group", "unknown"),
                _field("all", "sni", "known", value="pq.example.test"),
                _plane("all", "session_core", False),
                _plane("B3", "key_establishment", False),
                # client-auth posture is version-independent, so the probe
                # report closes it even with the negotiated version unknown
                _field("B2+", "mtls_client_auth", "known", value=False),
                _plane("B3", "authentication", True),
                _plane("B3", "lifecycle", True),
                _flag("all", "observability_ok", False),
                _flag("B3", "object_complete", False),
                _flag("B3", "ambiguity_flag", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T03",
            family="stress",
            title="Capture cut after the ServerHello on a record boundary",
            session=dict(tls13_hybrid_session),
            endpoint=hybrid_endpoint,
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            cut={"kind": "after_server_record", "index": 2},
            truth={
                **tls13_base_truth,
                "completeness": "truncated_post_serverhello",
                "fragmented": False,
                "coalesced": False,
            },
            contracts=(
                _field("all", "negotiation_outcome", "known", value="completed"),
                _plane("B1", "session_hidden_detail", False),
                _plane("B2", "session_hidden_detail", True),
                _flag("B3", "object_complete", True),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T04",
            family="stress",
            title="Capture cut inside a record, unregistered group offered",
            session={
                **tls13_hybrid_session,
                "client_offered_groups": (GREASE_A, X25519MLKEM768, X25519),
                "client_key_share_groups": (X25519MLKEM768, X25519),
            },
            endpoint=hybrid_endpoint,
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            cut={"kind": "mid_server_record", "index": 2, "back": 7},
            truth={
                **tls13_base_truth,
                "completeness": "truncated_post_serverhello",
                "fragmented": False,
                "coalesced": False,
            },
            contracts=(
                _unresolved("all", "named_group:0x2a2a"),
                _flag("B3", "ambiguity_flag", True),
                _flag("B3", "object_complete", True),
                # unregistered offers leave residue but do not gate clearance
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T05",
            family="stress",
            title="Handshake fragmented across many small records",
            session=dict(tls13_hybrid_session),
            endpoint=hybrid_endpoint,
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            mutations=(Mutation("fragment", max_record_len=80),),
            truth={
                **tls13_base_truth,
                "completeness": "complete",
                "fragmented": True,
                "coalesced": False,
            },
            contracts=(
                _field("all", "selected_group", "known", value="X25519MLKEM768"),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T06",
            family="stress",
            title="TLS 1.2 flight coalesced then refragmented, still complete",
            session={
                "tls_version": wire.TLS12,
                "cipher_suite": 0xC02F,
                "client_offered_groups": (X25519, SECP256R1),
                "selected_group": X25519,
                "sni": "legacy.example.test",
                "tls12_chain": "rsa_398",
            },
            endpoint={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (X25519, SECP256R1),
                "cipher_suites_tls12": (0xC02F, 0xC02B, 0x009C),
                "chain": "rsa_398",
            },
            probes=PROBES_12,
            mutations=(Mutation("coalesce"), Mutation("fragment", max_record_len=120)),
            truth={
                "negotiated_version": "TLS1.2",
                "negotiated_cipher_suite": "TLS_ECDHE_RSA_WITH_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "legacy.example.test",
                "selected_group": "X25519",
                "group_family": "classical",
                "mtls_client_auth": False,
                **_CAP_X25519,
                **RSA_LEAF,
                **STANDARD_398,
                "completeness": "complete",
                "fragmented": True,
                "coalesced": True,
            },
            contracts=(
                _plane("B1", "authentication", True),
                _flag("B2", "object_complete", True),
                _flag("B2", "clear_for_migration", True),
                _flag("B2", "ambiguity_flag", False),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T07",
            family="stress",
            title="Fragmented TLS 1.2 capture cut inside the Certificate",
            session={
                "tls_version": wire.TLS12,
                "cipher_suite": 0x009C,
                "client_offered_groups": (X25519, SECP256R1),
                "sni": "legacy.example.test",
                "tls12_chain": "rsa_398",
            },
            endpoint={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (X25519, SECP256R1),
                "cipher_suites_tls12": (0x009C,),
                "chain": "rsa_398",
            },
            probes=PROBES_12,
            artifact_chains=ARTIFACT_RSA_398,
            mutations=(Mutation("fragment", max_record_len=64),),
            # two record-lengths past the Certificate start: the records
            # carrying the ServerHello stay whole, the Certificate does not
            cut={
                "kind": "within_message",
                "direction": wire.SERVER_TO_CLIENT,
                "msg_type": wire.HS_CERTIFICATE,
                "delta": 128,
            },
            truth={
                "negotiated_version": "TLS1.2",
                "negotiated_cipher_suite": "TLS_RSA_WITH_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "legacy.example.test",
                "selected_group": None,
                "group_family": None,
                "mtls_client_auth": False,
                "supported_groups": (),
                "hybrid_key_establishment": False,
                "capability_broader": False,
                **RSA_LEAF,
                **STANDARD_398,
                "completeness": "truncated_post_serverhello",
                "fragmented": True,
                # refragmenting merges the ClientHello/ClientKeyExchange
                # record seam, so the client stream coalesces too
                "coalesced": True,
            },
            contracts=(
                _field("all", "selected_group", "not_applicable", reason="static_rsa_key_exchange"),
                _field("B1", "leaf_spki_algorithm", "unknown", reason="flight_truncated"),
                _field("B1", "mtls_client_auth", "unknown"),
                _field("B2", "mtls_client_auth", "known", value=False),
                _plane("B2", "authentication", False),
                _plane("B3", "authentication", True),
                _flag("all", "observability_ok", True),
                _flag("B3", "object_complete", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T08",
            family="stress",
            title="Flows re-split into many segments, records untouched",
            session=dict(tls13_hybrid_session),
            endpoint=hybrid_endpoint,
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            mutations=(Mutation("segment_split", segments=5),),
            truth={**tls13_base_truth, **CLEAN_LAYOUT},
            contracts=(
                _field("all", "selected_group", "known", value="X25519MLKEM768"),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T09",
            family="stress",
            title="Endpoint dropped hybrid support after the capture",
            session=dict(tls13_hybrid_session),
            endpoint=hybrid_endpoint,
            endpoint_after={"tls_versions": (wire.TLS13,), "supported_groups": (X25519,)},
            probes=(
                ProbeSpec("hybrid", 60.0),
                ProbeSpec("classical", 70.0),
                ProbeSpec("hybrid", DRIFT_OFFSET_S, endpoint="drifted"),
            ),
            artifact_chains=ARTIFACT_RSA_398,
            truth={**tls13_base_truth, **CLEAN_LAYOUT},
            contracts=(
                _clean("B1"),
                _contradicts("B2+", "selected_group"),
                _flag("B2+", "observability_ok", False),
                _flag("B3", "object_complete", True),
                _flag("B3", "clear_for_migration", False),
                _flag("B3", "ambiguity_flag", False),
            ),
        ),
        Scenario(
            scenario_id="T10",
            family="stress",
            title="TLS 1.2 endpoint rotated suite preference and certificate",
            session={
                "tls_version": wire.TLS12,
                "cipher_suite": 0xC02F,
                "client_offered_groups": (GREASE_A, X25519, SECP256R1),
                "selected_group": X25519,
                "sni": "legacy.example.test",
                "tls12_chain": "rsa_398",
            },
            endpoint={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (X25519, SECP256R1),
                "cipher_suites_tls12": (0xC02F, 0xC02B, 0x009C),
                "chain": "rsa_398",
            },
            endpoint_after={
                "tls_versions": (wire.TLS12,),
                "supported_groups": (X25519, SECP256R1),
                "cipher_suites_tls12": (0xC02B, 0xC02F, 0x009C),
                "chain": "ecdsa_398",
            },
            probes=PROBES_12 + (ProbeSpec("legacy12", DRIFT_OFFSET_S, endpoint="drifted"),),
            truth={
                "negotiated_version": "TLS1.2",
                "negotiated_cipher_suite": "TLS_ECDHE_RSA_WITH_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "legacy.example.test",
                "selected_group": "X25519",
                "group_family": "classical",
                "mtls_client_auth": False,
                **_CAP_X25519,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _unresolved("all", "named_group:0x2a2a"),
                _clean("B1"),
                _contradicts("B2+", "negotiated_cipher_suite"),
                _contradicts("B3", "leaf_spki_algorithm", "leaf_signature_algorithm"),
                _flag("B2", "object_complete", True),
                _flag("B2", "clear_for_migration", False),
                _flag("all", "ambiguity_flag", True),
            ),
        ),
        Scenario(
            scenario_id="T11",
            family="stress",
            title="Certificate rotated to a longer lifetime after the capture",
            session=dict(tls13_hybrid_session),
            endpoint=hybrid_endpoint,
            endpoint_after={"tls_versions": (wire.TLS13,), "supported_groups": (X25519,)},
            probes=(
                ProbeSpec("hybrid", 60.0),
                ProbeSpec("classical", 70.0),
                ProbeSpec("hybrid", DRIFT_OFFSET_S, endpoint="drifted"),
            ),
            artifact_chains=(
                ChainSpec("rsa_90", "scenario_artifact", 10.0),
                ChainSpec("rsa_398", "active_probe", DRIFT_OFFSET_S),
            ),
            truth={
                **tls13_base_truth,
                **SHORT_90,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _clean("B1"),
                _contradicts("B2+", "selected_group"),
                _contradicts("B3", "validity_days", "short_lived_bucket"),
                # the session-time artifact outranks the later probe chain
                _field("B3", "validity_days", "known", value=90),
                _flag("B3", "object_complete", True),
                _flag("B3", "clear_for_migration", False),
            ),
        ),
        Scenario(
            scenario_id="T12",
            family="stress",
            title="Retry requested, capture ends before the second flight",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "client_key_share_groups": (X25519,),
                "selected_group": X25519MLKEM768,
                "sni": "pq.example.test",
                "hrr": HrrSpec(requested_group=X25519MLKEM768),
            },
            endpoint={
                "tls_versions": (wire.TLS13,),
                "supported_groups": (X25519MLKEM768, X25519),
                "server_preference": True,
            },
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            cut={
                "kind": "message_boundary",
                "direction": wire.CLIENT_TO_SERVER,
                "msg_type": wire.HS_CLIENT_HELLO,
                "occurrence": -1,
            },
            truth={
                **tls13_base_truth,
                "completeness": "truncated_post_serverhello",
                "fragmented": False,
                "coalesced": False,
            },
            contracts=(
                _field("all", "negotiation_outcome", "unknown", reason="hrr_retry_incomplete"),
                _field("all", "negotiated_version", "known", value="TLS1.3"),
                _field("B3", "selected_group", "ambiguous"),
                # both retry candidates are hybrid, so the family still closes
                _field("all", "group_family", "known", value="hybrid"),
                _plane("all", "session_core", False),
                _plane("all", "key_establishment", True),
                _flag("all", "observability_ok", False),
                _flag("B3", "object_complete", False),
                _flag("B3", "ambiguity_flag", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T13",
            family="stress",
            title="Pure PSK resumption: no key share on either side",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (X25519MLKEM768, X25519),
                "selected_group": None,
                "sni": "resume.example.test",
                "psk": PskSpec(offered=True, selected=True, psk_ke=True, modes=(0,)),
            },
            endpoint={
                "tls_versions": (wire.TLS13,),
                "supported_groups": (X25519MLKEM768, X25519),
                "accept_resumption": True,
                "session_tickets": 2,
            },
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "resume.example.test",
                "selected_group": None,
                "group_family": None,
                "mtls_client_auth": False,
                **_CAP_13,
                **RSA_LEAF,
                **STANDARD_398,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("all", "selected_group", "not_applicable", reason="psk_ke_resumption"),
                _field("B1", "leaf_spki_algorithm", "unknown", reason="psk_fresh_auth_unavailable"),
                _plane("all", "key_establishment", True),
                _flag("all", "observability_ok", True),
                _flag("B3", "object_complete", True),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T14",
            family="stress",
            title="PSK with fresh key share, client certificates required",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (GREASE_B, X25519MLKEM768, X25519),
                "client_key_share_groups": (X25519MLKEM768, X25519),
                "selected_group": X25519MLKEM768,
                "sni": "resume.example.test",
                "psk": PskSpec(offered=True, selected=True, psk_ke=False, modes=(1,)),
            },
            endpoint={
                "tls_versions": (wire.TLS13,),
                "supported_groups": (X25519MLKEM768, X25519),
                "client_auth": True,
                "accept_resumption": True,
                "session_tickets": 2,
            },
            probes=PROBES_13,
            artifact_chains=ARTIFACT_RSA_398,
            truth={
                **tls13_base_truth,
                "sni": "resume.example.test",
                "mtls_client_auth": True,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _unresolved("all", "named_group:0x6a6a"),
                _field("all", "selected_group", "known", value="X25519MLKEM768"),
                _field("B1", "leaf_spki_algorithm", "unknown", reason="psk_fresh_auth_unavailable"),
                _field("B2+", "mtls_client_auth", "known", value=True),
                _flag("B3", "ambiguity_flag", True),
                _flag("B3", "object_complete", True),
                _flag("B3", "clear_for_migration", True),
                _clean(),
            ),
        ),
        Scenario(
            scenario_id="T15",
            family="stress",
            title="Obsolete draft hybrid negotiated; probes miss its codepoint",
            session={
                "tls_version": wire.TLS13,
                "cipher_suite": 0x1301,
                "client_offered_groups": (KYBER768_DRAFT, X25519),
                "selected_group": KYBER768_DRAFT,
                "sni": "pq.example.test",
            },
            endpoint={"tls_versions": (wire.TLS13,), "supported_groups": (KYBER768_DRAFT, X25519)},
            probes=PROBES_13,
            artifact_chains=ARTIFACT_ECDSA_90,
            truth={
                "negotiated_version": "TLS1.3",
                "negotiated_cipher_suite": "TLS_AES_128_GCM_SHA256",
                "negotiation_outcome": "completed",
                "sni": "pq.example.test",
                "selected_group": "X25519Kyber768Draft00",
                "group_family": "hybrid",
                "mtls_client_auth": False,
                # the probes never offer the draft codepoint, so the
                # capability union is an honest lower bound without it
                "supported_groups": ("X25519",),
                "hybrid_key_establishment": False,
                "capability_broader": False,
                **ECDSA_LEAF,
                **SHORT_90,
                **CLEAN_LAYOUT,
            },
            contracts=(
                _field("all", "selected_group", "known", value="X25519Kyber768Draft00"),
                _field("all", "group_family", "known", value="hybrid"),
                _field("B2+", "hybrid_key_establishment", "known", value=False),
                _flag("B3", "object_complete", True),
                _flag("B3", "clear_for_migration", True),
                _flag("B3", "ambiguity_flag", False),
                _clean(),
            ),
        ),
    ]


def catalog() -> tuple[Scenario, ...]:
    return tuple(_canonical() + _stress())


def scenario(scenario_id: str) -> Scenario:
    for s in catalog():
        if s.scenario_id == scenario_id:
            return s
    raise KeyError(scenario_id)
