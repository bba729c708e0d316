"""Evidence surfaces: passive session views, active probes and chain parsing.

Each surface produces observations whose fields are EvidenceValue-typed and
carry provenance. Surfaces never merge evidence or resolve conflicts; that
is inference-engine territory.
"""

from __future__ import annotations

import hashlib
import ipaddress
import json
import random
import socket
import time
from dataclasses import dataclass, field

from cryptography import x509
from cryptography.hazmat.primitives.asymmetric import ec, rsa

from . import wire
from .errors import GuardrailRefusal
from .evidence import EvidenceValue
from .registry import Family, RegistryBundle, RegistryKind, default_registry

SURFACE_PASSIVE = "sigma_p"
SURFACE_ACTIVE = "sigma_a"
SURFACE_CHAIN = "sigma_c"
SURFACE_REGISTRY = "sigma_r"

ORIGIN_PASSIVE_TLS12 = "passive_tls12"
ORIGIN_ARTIFACT = "scenario_artifact"
ORIGIN_ACTIVE_PROBE = "active_probe"

DEFAULT_SHORT_LIVED_THRESHOLD_DAYS = 90

# Trailing application-data record an emulated endpoint sends once the
# handshake completed. It stands in for what a participating TLS stack
# reports to its application (a passive observer never sees this).
REPORT_MAGIC = b"OBSRPT1\n"


@dataclass(frozen=True)
class Provenance:
    surface: str
    origin: str
    observed_at: float

    def to_json(self) -> dict:
        return {"surface": self.surface, "origin": self.origin, "observed_at": self.observed_at}

    @classmethod
    def from_json(cls, payload: dict) -> "Provenance":
        return cls(payload["surface"], payload["origin"], float(payload["observed_at"]))


# -- chain surface (SigmaC) -------------------------------------------------


@dataclass(frozen=True)
class ChainObservation:
    provenance: Provenance
    chain_digests: tuple[str, ...]
    chain_depth: EvidenceValue
    leaf_spki_algorithm: EvidenceValue
    leaf_signature_algorithm: EvidenceValue
    validity_days: EvidenceValue
    short_lived_bucket: EvidenceValue
    bucket_threshold_days: int
    leaf_subject: str | None = None
    not_before: str | None = None
    not_after: str | None = None

    def to_json(self) -> dict:
        return {
            "provenance": self.provenance.to_json(),
            "chain_digests": list(self.chain_digests),
            "chain_depth": self.chain_depth.to_json(),
            "leaf_spki_algorithm": self.leaf_spki_algorithm.to_json(),
            "leaf_signature_algorithm": self.leaf_signature_algorithm.to_json(),
            "validity_days": self.validity_days.to_json(),
            "short_lived_bucket": self.short_lived_bucket.to_json(),
            "bucket_threshold_days": self.bucket_threshold_days,
            "leaf_subject": self.leaf_subject,
            "not_before": self.not_before,
            "not_after": self.not_after,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ChainObservation":
        return cls(
            provenance=Provenance.from_json(payload["provenance"]),
            chain_digests=tuple(payload["chain_digests"]),
            chain_depth=EvidenceValue.from_json(payload["chain_depth"]),
            leaf_spki_algorithm=EvidenceValue.from_json(payload["leaf_spki_algorithm"]),
            leaf_signature_algorithm=EvidenceValue.from_json(payload["leaf_signature_algorithm"]),
            validity_days=EvidenceValue.from_json(payload["validity_days"]),
            short_lived_bucket=EvidenceValue.from_json(payload["short_lived_bucket"]),
            bucket_threshold_days=payload["bucket_threshold_days"],
            leaf_subject=payload.get("leaf_subject"),
            not_before=payload.get("not_before"),
            not_after=payload.get("not_after"),
        )


def parse_chain_observation(
    chain_der: list[bytes] | tuple[bytes, ...],
    *,
    origin: str,
    observed_at: float,
    registry: RegistryBundle | None = None,
    threshold_days: int = DEFAULT_SHORT_LIVED_THRESHOLD_DAYS,
) -> ChainObservation:
    """Parse a presented certificate chain into lifecycle/authn evidence.

    Parse failures degrade to unknown fields; the observation itself is
    always produced.
    """
    registry = registry or default_registry()
    provenance = Provenance(SURFACE_CHAIN, origin, observed_at)
    digests = tuple(hashlib.sha256(der).hexdigest() for der in chain_der)
    if not chain_der:
        missing = EvidenceValue.unknown("empty_chain")
        return ChainObservation(
            provenance=provenance,
            chain_digests=(),
            chain_depth=missing,
            leaf_spki_algorithm=missing,
            leaf_signature_algorithm=missing,
            validity_days=missing,
            short_lived_bucket=missing,
            bucket_threshold_days=threshold_days,
        )
    try:
        leaf = x509.load_der_x509_certificate(bytes(chain_der[0]))
    except Exception as exc:
        bad = EvidenceValue.unknown(f"certificate_parse_error:{type(exc).__name__}")
        return ChainObservation(
            provenance=provenance,
            chain_digests=digests,
            chain_depth=EvidenceValue.known(len(chain_der)),
            leaf_spki_algorithm=bad,
            leaf_signature_algorithm=bad,
            validity_days=bad,
            short_lived_bucket=bad,
            bucket_threshold_days=threshold_days,
        )

    public_key = leaf.public_key()
    if isinstance(public_key, rsa.RSAPublicKey):
        spki_oid = "1.2.840.113549.1.1.1"
    elif isinstance(public_key, ec.EllipticCurvePublicKey):
        spki_oid = "1.2.840.10045.2.1"
    else:
        spki_oid = None
    if spki_oid is None:
        spki = EvidenceValue.unknown(f"unsupported_public_key:{type(public_key).__name__}")
    else:
        spki = _canonical_label(registry, RegistryKind.SPKI_OID, spki_oid)

    sig = _canonical_label(registry, RegistryKind.SIGNATURE_OID, leaf.signature_algorithm_oid.dotted_string)

    not_before = leaf.not_valid_before_utc
    not_after = leaf.not_valid_after_utc
    days = (not_after - not_before).days
    if days < 0:
        validity = EvidenceValue.unknown("negative_validity_window")
        bucket = EvidenceValue.unknown("negative_validity_window")
    else:
        validity = EvidenceValue.known(days)
        bucket = EvidenceValue.known("short_lived" if days <= threshold_days else "standard")

    return ChainObservation(
        provenance=provenance,
        chain_digests=digests,
        chain_depth=EvidenceValue.known(len(chain_der)),
        leaf_spki_algorithm=spki,
        leaf_signature_algorithm=sig,
        validity_days=validity,
        short_lived_bucket=bucket,
        bucket_threshold_days=threshold_days,
        leaf_subject=leaf.subject.rfc4514_string(),
        not_before=not_before.isoformat(),
        not_after=not_after.isoformat(),
    )


def _canonical_label(registry: RegistryBundle, kind: RegistryKind, raw) -> EvidenceValue:
    v = registry.canonicalize(kind, raw)
    if v.is_known:
        return EvidenceValue.known(v.value.canonical_name)
    return v


# -- passive surface (SigmaP) -----------------------------------------------

_VERSION_LABELS = {wire.TLS12: "TLS1.2", wire.TLS13: "TLS1.3"}


@dataclass(frozen=True)
class PassiveObservation:
    artifact_id: str
    digest: str
    provenance: Provenance
    completeness: str
    fragmented: bool
    coalesced: bool
    hrr_seen: bool
    negotiated_version: EvidenceValue
    negotiated_cipher_suite: EvidenceValue
    negotiation_outcome: EvidenceValue
    sni: EvidenceValue
    selected_group: EvidenceValue
    selected_group_codepoint: int | None
    offered_groups: EvidenceValue
    offered_group_codepoints: tuple[int, ...] | None
    offered_versions: EvidenceValue
    offered_cipher_suite_codepoints: tuple[int, ...] | None
    signature_schemes: EvidenceValue
    unresolved_offer_identifiers: tuple[str, ...]
    psk_offered: bool
    psk_selected: bool
    mtls_client_auth: EvidenceValue
    server_flight_detail: EvidenceValue
    handshake_structure: EvidenceValue
    embedded_chain: ChainObservation | None = None
    client_embedded_chain: ChainObservation | None = None

    def to_json(self) -> dict:
        out = {
            "artifact_id": self.artifact_id,
            "digest": self.digest,
            "provenance": self.provenance.to_json(),
            "completeness": self.completeness,
            "fragmented": self.fragmented,
            "coalesced": self.coalesced,
            "hrr_seen": self.hrr_seen,
            "negotiated_version": self.negotiated_version.to_json(),
            "negotiated_cipher_suite": self.negotiated_cipher_suite.to_json(),
            "negotiation_outcome": self.negotiation_outcome.to_json(),
            "sni": self.sni.to_json(),
            "selected_group": self.selected_group.to_json(),
            "selected_group_codepoint": self.selected_group_codepoint,
            "offered_groups": self.offered_groups.to_json(),
            "offered_group_codepoints": list(self.offered_group_codepoints)
            if self.offered_group_codepoints is not None
            else None,
            "offered_versions": self.offered_versions.to_json(),
            "offered_cipher_suite_codepoints": list(self.offered_cipher_suite_codepoints)
            if self.offered_cipher_suite_codepoints is not None
            else None,
            "signature_schemes": self.signature_schemes.to_json(),
            "unresolved_offer_identifiers": list(self.unresolved_offer_identifiers),
            "psk_offered": self.psk_offered,
            "psk_selected": self.psk_selected,
            "mtls_client_auth": self.mtls_client_auth.to_json(),
            "server_flight_detail": self.server_flight_detail.to_json(),
            "handshake_structure": self.handshake_structure.to_json(),
            "embedded_chain": self.embedded_chain.to_json() if self.embedded_chain else None,
            "client_embedded_chain": self.client_embedded_chain.to_json()
            if self.client_embedded_chain
            else None,
        }
        return out

    @classmethod
    def from_json(cls, payload: dict) -> "PassiveObservation":
        ev = EvidenceValue.from_json
        return cls(
            artifact_id=payload["artifact_id"],
            digest=payload["digest"],
            provenance=Provenance.from_json(payload["provenance"]),
            completeness=payload["completeness"],
            fragmented=payload["fragmented"],
            coalesced=payload["coalesced"],
            hrr_seen=payload["hrr_seen"],
            negotiated_version=ev(payload["negotiated_version"]),
            negotiated_cipher_suite=ev(payload["negotiated_cipher_suite"]),
            negotiation_outcome=ev(payload["negotiation_outcome"]),
            sni=ev(payload["sni"]),
            selected_group=ev(payload["selected_group"]),
            selected_group_codepoint=payload.get("selected_group_codepoint"),
            offered_groups=ev(payload["offered_groups"]),
            offered_group_codepoints=tuple(payload["offered_group_codepoints"])
            if payload.get("offered_group_codepoints") is not None
            else None,
            offered_versions=ev(payload["offered_versions"]),
            offered_cipher_suite_codepoints=tuple(payload["offered_cipher_suite_codepoints"])
            if payload.get("offered_cipher_suite_codepoints") is not None
            else None,
            signature_schemes=ev(payload["signature_schemes"]),
            unresolved_offer_identifiers=tuple(payload.get("unresolved_offer_identifiers", ())),
            psk_offered=payload["psk_offered"],
            psk_selected=payload["psk_selected"],
            mtls_client_auth=ev(payload["mtls_client_auth"]),
            server_flight_detail=ev(payload["server_flight_detail"]),
            handshake_structure=ev(payload["handshake_structure"]),
            embedded_chain=ChainObservation.from_json(payload["embedded_chain"])
            if payload.get("embedded_chain")
            else None,
            client_embedded_chain=ChainObservation.from_json(payload["client_embedded_chain"])
            if payload.get("client_embedded_chain")
            else None,
        )


def build_passive_observation(
    transcript: wire.Transcript,
    *,
    registry: RegistryBundle | None = None,
    observed_at: float | None = None,
    threshold_days: int = DEFAULT_SHORT_LIVED_THRESHOLD_DAYS,
) -> PassiveObservation:
    """Map a decoded transcript to passive evidence, reasons included."""
    registry = registry or default_registry()
    view = wire.decode_transcript(transcript)
    if observed_at is None:
        observed_at = transcript.flows[-1].timestamp if transcript.flows else 0.0
    provenance = Provenance(SURFACE_PASSIVE, ORIGIN_PASSIVE_TLS12, observed_at)

    ch = view.client_hello
    sh = view.negotiation_server_hello
    completeness = view.completeness

    # ---- client offer ----
    unresolved: list[str] = []
    if ch is None:
        offered_groups = EvidenceValue.unknown("client_hello_not_captured")
        offered_versions = EvidenceValue.unknown("client_hello_not_captured")
        signature_schemes = EvidenceValue.unknown("client_hello_not_captured")
        sni = EvidenceValue.unknown("client_hello_not_captured")
        group_codepoints = None
        suite_codepoints = None
        psk_offered = False
    else:
        group_codepoints = ch.offered_groups
        suite_codepoints = ch.cipher_suites
        if ch.offered_groups is None:
            offered_groups = EvidenceValue.unknown("no_supported_groups_extension")
        else:
            labels = []
            for cp in ch.offered_groups:
                label = _group_label(registry, cp)
                labels.append(label)
                if label.startswith("unknown_identifier:"):
                    unresolved.append(f"named_group:{label.split(':', 1)[1]}")
            offered_groups = EvidenceValue.known(tuple(labels))
        if ch.offered_versions is not None:
            offered_versions = EvidenceValue.known(
                tuple(_VERSION_LABELS.get(v, f"0x{v:04x}") for v in ch.offered_versions)
            )
        else:
            # no supported_versions extension: a 1.2-or-older client
            offered_versions = EvidenceValue.known((_VERSION_LABELS.get(ch.legacy_version, "TLS1.2"),))
        if ch.signature_schemes is None:
            signature_schemes = EvidenceValue.unknown("no_signature_algorithms_extension")
        else:
            labels = []
            for cp in ch.signature_schemes:
                v = registry.canonicalize(RegistryKind.SIGNATURE_SCHEME, cp)
                if v.is_known:
                    labels.append(v.value.canonical_name)
                else:
                    labels.append(f"unknown_identifier:0x{cp:04x}")
                    unresolved.append(f"signature_scheme:0x{cp:04x}")
            signature_schemes = EvidenceValue.known(tuple(labels))
        sni = EvidenceValue.known(ch.sni) if ch.sni else EvidenceValue.not_applicable("sni_absent")
        psk_offered = ch.psk_offered

    # ---- negotiation ----
    psk_selected = bool(sh and sh.psk_selected)
    if view.completeness is wire.Completeness.MALFORMED:
        negotiated_version = EvidenceValue.unknown("malformed_capture")
        negotiated_suite = EvidenceValue.unknown("malformed_capture")
        outcome = EvidenceValue.unknown("malformed_capture")
    elif sh is None:
        if view.server_hello is not None and view.server_hello.is_hrr:
            # retry requested but the follow-up never made it into capture
            negotiated_version = _sh_version(view.server_hello)
            negotiated_suite = _suite_label(registry, view.server_hello.cipher_suite)
            outcome = EvidenceValue.unknown("hrr_retry_incomplete")
        else:
            negotiated_version = EvidenceValue.unknown("no_server_hello")
            negotiated_suite = EvidenceValue.unknown("no_server_hello")
            outcome = EvidenceValue.unknown("no_server_hello")
    else:
        negotiated_version = _sh_version(sh)
        negotiated_suite = _suite_label(registry, sh.cipher_suite)
        outcome = EvidenceValue.known("completed")

    selected_group, selected_cp = _selected_group(registry, view)

    # ---- hidden detail ----
    if completeness in (wire.Completeness.MALFORMED, wire.Completeness.TRUNCATED_PRE_SERVERHELLO):
        structure = EvidenceValue.unknown("handshake_structure_not_observed")
    else:
        structure = EvidenceValue.known(
            {
                "completeness": completeness.value,
                "fragmented": view.fragmented,
                "coalesced": view.coalesced,
            }
        )

    version_value = negotiated_version.value if negotiated_version.is_known else None
    embedded_chain = None
    client_chain = None
    if version_value == "TLS1.2":
        flight_complete = view.server_hello_done_seen
        if flight_complete:
            server_flight = EvidenceValue.known(
                {
                    "certificate": view.server_certificate_chain is not None,
                    "server_key_exchange": view.ske_named_curve is not None
                    or view.ske_curve_type is not None,
                    "certificate_request": view.certificate_request_seen,
                    "session_ticket": view.session_ticket_seen,
                }
            )
            mtls = EvidenceValue.known(bool(view.certificate_request_seen))
        else:
            server_flight = EvidenceValue.unknown("flight_truncated")
            mtls = EvidenceValue.unknown("flight_truncated")
        if view.server_certificate_chain:
            embedded_chain = parse_chain_observation(
                view.server_certificate_chain,
                origin=ORIGIN_PASSIVE_TLS12,
                observed_at=observed_at,
                registry=registry,
                threshold_days=threshold_days,
            )
        if view.client_certificate_chain:
            client_chain = parse_chain_observation(
                view.client_certificate_chain,
                origin=ORIGIN_PASSIVE_TLS12,
                observed_at=observed_at,
                registry=registry,
                threshold_days=threshold_days,
            )
    elif version_value == "TLS1.3":
        server_flight = EvidenceValue.unknown("tls13_encrypted_server_flight")
        mtls = EvidenceValue.unknown("tls13_client_auth_encrypted")
    else:
        server_flight = EvidenceValue.unknown("negotiation_not_observed")
        mtls = EvidenceValue.unknown("negotiation_not_observed")

    return PassiveObservation(
        artifact_id=transcript.artifact_id,
        digest=transcript.digest,
        provenance=provenance,
        completeness=completeness.value,
        fragmented=view.fragmented,
        coalesced=view.coalesced,
        hrr_seen=bool(view.server_hello and view.server_hello.is_hrr),
        negotiated_version=negotiated_version,
        negotiated_cipher_suite=negotiated_suite,
        negotiation_outcome=outcome,
        sni=sni,
        selected_group=selected_group,
        selected_group_codepoint=selected_cp,
        offered_groups=offered_groups,
        offered_group_codepoints=group_codepoints,
        offered_versions=offered_versions,
        offered_cipher_suite_codepoints=suite_codepoints,
        signature_schemes=signature_schemes,
        unresolved_offer_identifiers=tuple(unresolved),
        psk_offered=psk_offered,
        psk_selected=psk_selected,
        mtls_client_auth=mtls,
        server_flight_detail=server_flight,
        handshake_structure=structure,
        embedded_chain=embedded_chain,
        client_embedded_chain=client_chain,
    )


def _sh_version(sh: wire.ServerHelloView) -> EvidenceValue:
    if sh.selected_version is not None:
        return EvidenceValue.known(_VERSION_LABELS.get(sh.selected_version, f"0x{sh.selected_version:04x}"))
    return EvidenceValue.known(_VERSION_LABELS.get(sh.legacy_version, f"0x{sh.legacy_version:04x}"))


def _suite_label(registry: RegistryBundle, codepoint: int) -> EvidenceValue:
    name = wire.CIPHER_SUITE_NAMES.get(codepoint)
    if name is None:
        return EvidenceValue.unknown(f"unknown_identifier:0x{codepoint:04x}")
    return EvidenceValue.known(name)


def _group_label(registry: RegistryBundle, codepoint: int) -> str:
    v = registry.canonicalize(RegistryKind.NAMED_GROUP, codepoint)
    if v.is_known:
        return v.value.canonical_name
    return f"unknown_identifier:0x{codepoint:04x}"


def _selected_group(registry: RegistryBundle, view: wire.HandshakeView) -> tuple[EvidenceValue, int | None]:
    sh = view.negotiation_server_hello
    if view.completeness is wire.Completeness.MALFORMED:
        return EvidenceValue.unknown("malformed_capture"), None
    if sh is None:
        if view.server_hello is not None and view.server_hello.is_hrr:
            retry = view.second_client_hello
            candidates = retry.key_share_groups if retry and retry.key_share_groups else None
            if not candidates and view.server_hello.key_share_group is not None:
                candidates = (view.server_hello.key_share_group,)
            if candidates:
                labels = [_group_label(registry, cp) for cp in candidates]
                return EvidenceValue.ambiguous(labels, "hrr_retry_incomplete"), None
        return EvidenceValue.unknown("no_server_hello"), None

    version = sh.selected_version if sh.selected_version is not None else sh.legacy_version
    if version == wire.TLS13:
        if sh.key_share_group is not None:
            label = _group_label(registry, sh.key_share_group)
            if label.startswith("unknown_identifier:"):
                return EvidenceValue.unknown(label), sh.key_share_group
            return EvidenceValue.known(label), sh.key_share_group
        if sh.psk_selected:
            return EvidenceValue.not_applicable("psk_ke_resumption"), None
        return EvidenceValue.unknown("no_key_share_in_server_hello"), None

    # TLS 1.2: the suite decides whether a group exists at all
    kex = wire.TLS12_SUITE_KEX.get(sh.cipher_suite)
    if kex == "static_rsa":
        return EvidenceValue.not_applicable("static_rsa_key_exchange"), None
    if kex == "ecdhe":
        if view.ske_named_curve is not None:
            label = _group_label(registry, view.ske_named_curve)
            if label.startswith("unknown_identifier:"):
                return EvidenceValue.unknown(label), view.ske_named_curve
            return EvidenceValue.known(label), view.ske_named_curve
        return EvidenceValue.unknown("server_key_exchange_not_captured"), None
    return EvidenceValue.unknown("unrecognized_cipher_suite_semantics"), None


# -- active surface (SigmaA) ------------------------------------------------


@dataclass(frozen=True)
class ProbeProfile:
    name: str
    offered_groups: tuple[int, ...]
    cipher_suites: tuple[int, ...]
    offered_versions: tuple[int, ...] | None  # None = legacy 1.2-only client
    key_share_groups: tuple[int, ...] | None = None
    client_auth: bool = False

    def client_hello_bytes(self, rng, sni: str | None) -> bytes:
        shares = self.key_share_groups
        if shares is None and self.offered_versions is not None:
            shares = self.offered_groups
        return wire.build_client_hello(
            rng=rng,
            legacy_version=wire.TLS12,
            cipher_suites=self.cipher_suites,
            offered_versions=self.offered_versions,
            offered_groups=self.offered_groups,
            key_share_groups=shares,
            signature_schemes=(0x0804, 0x0403, 0x0401),
            sni=sni,
        )


def builtin_profiles() -> dict[str, ProbeProfile]:
    return {
        "classical": ProbeProfile(
            name="classical",
            offered_groups=(0x001D,),
            cipher_suites=(0x1301, 0x1302, 0xC02F, 0xC02B, 0x009C),
            offered_versions=(wire.TLS13, wire.TLS12),
        ),
        "hybrid": ProbeProfile(
            name="hybrid",
            offered_groups=(0x11EC, 0x001D),
            cipher_suites=(0x1301, 0x1302, 0xC02F, 0xC02B, 0x009C),
            offered_versions=(wire.TLS13, wire.TLS12),
        ),
        "legacy12": ProbeProfile(
            name="legacy12",
            offered_groups=(0x001D, 0x0017),
            cipher_suites=(0xC02F, 0xC02B, 0x009C),
            offered_versions=None,
        ),
    }


@dataclass(frozen=True)
class ProbeTarget:
    host: str
    port: int
    sni: str | None = None
    tier: str = "public_blind"

    @property
    def is_ip_literal(self) -> bool:
        try:
            ipaddress.ip_address(self.host)
            return True
        except ValueError:
            return False


@dataclass(frozen=True)
class GuardrailPolicy:
    timeout_s: float = 10.0
    max_retries: int = 1
    backoff_s: float = 30.0


@dataclass(frozen=True)
class ProbeResult:
    profile_name: str
    host: str
    port: int
    sni: str | None
    outcome: str  # completed | alert | timeout | connection_reset | connection_refused | protocol_error
    attempts: int
    provenance: Provenance
    offered_group_codepoints: tuple[int, ...]
    offered_version_codepoints: tuple[int, ...] | None
    offered_cipher_suite_codepoints: tuple[int, ...]
    negotiated_version: EvidenceValue
    negotiated_cipher_suite: EvidenceValue
    selected_group: EvidenceValue
    selected_group_codepoint: int | None
    hrr_used: bool = False
    certificate_request: EvidenceValue = field(
        default_factory=lambda: EvidenceValue.unknown("not_reported")
    )
    resumption_accepted: EvidenceValue = field(
        default_factory=lambda: EvidenceValue.unknown("not_reported")
    )
    session_tickets_issued: EvidenceValue = field(
        default_factory=lambda: EvidenceValue.unknown("not_reported")
    )
    observed_chain: ChainObservation | None = None
    alert_code: int | None = None
    detail: str | None = None

    @property
    def completed(self) -> bool:
        return self.outcome == "completed"

    def to_json(self) -> dict:
        return {
            "profile_name": self.profile_name,
            "host": self.host,
            "port": self.port,
            "sni": self.sni,
            "outcome": self.outcome,
            "attempts": self.attempts,
            "provenance": self.provenance.to_json(),
            "offered_group_codepoints": list(self.offered_group_codepoints),
            "offered_version_codepoints": list(self.offered_version_codepoints)
            if self.offered_version_codepoints is not None
            else None,
            "offered_cipher_suite_codepoints": list(self.offered_cipher_suite_codepoints),
            "negotiated_version": self.negotiated_version.to_json(),
            "negotiated_cipher_suite": self.negotiated_cipher_suite.to_json(),
            "selected_group": self.selected_group.to_json(),
            "selected_group_codepoint": self.selected_group_codepoint,
            "hrr_used": self.hrr_used,
            "certificate_request": self.certificate_request.to_json(),
            "resumption_accepted": self.resumption_accepted.to_json(),
            "session_tickets_issued": self.session_tickets_issued.to_json(),
            "observed_chain": self.observed_chain.to_json() if self.observed_chain else None,
            "alert_code": self.alert_code,
            "detail": self.detail,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ProbeResult":
        ev = EvidenceValue.from_json
        return cls(
            profile_name=payload["profile_name"],
            host=payload["host"],
            port=payload["port"],
            sni=payload.get("sni"),
            outcome=payload["outcome"],
            attempts=payload["attempts"],
            provenance=Provenance.from_json(payload["provenance"]),
            offered_group_codepoints=tuple(payload["offered_group_codepoints"]),
            offered_version_codepoints=tuple(payload["offered_version_codepoints"])
            if payload.get("offered_version_codepoints") is not None
            else None,
            offered_cipher_suite_codepoints=tuple(payload["offered_cipher_suite_codepoints"]),
            negotiated_version=ev(payload["negotiated_version"]),
            negotiated_cipher_suite=ev(payload["negotiated_cipher_suite"]),
            selected_group=ev(payload["selected_group"]),
            selected_group_codepoint=payload.get("selected_group_codepoint"),
            hrr_used=payload.get("hrr_used", False),
            certificate_request=ev(payload["certificate_request"]),
            resumption_accepted=ev(payload["resumption_accepted"]),
            session_tickets_issued=ev(payload["session_tickets_issued"]),
            observed_chain=ChainObservation.from_json(payload["observed_chain"])
            if payload.get("observed_chain")
            else None,
            alert_code=payload.get("alert_code"),
            detail=payload.get("detail"),
        )


def check_probe_guardrails(target: ProbeTarget, profile: ProbeProfile) -> None:
    """Raise GuardrailRefusal before any network traffic when disallowed."""
    if not target.is_ip_literal and not target.sni:
        raise GuardrailRefusal(
            "refusing to probe a DNS-named target without SNI",
            host=target.host,
        )
    if profile.client_auth and target.tier == "public_blind":
        raise GuardrailRefusal(
            "client-authenticated probes are not allowed against public_blind targets",
            host=target.host,
            profile=profile.name,
        )


def run_probe(
    target: ProbeTarget,
    profile: ProbeProfile,
    *,
    policy: GuardrailPolicy | None = None,
    registry: RegistryBundle | None = None,
    clock=time.time,
    sleeper=time.sleep,
    rng=None,
) -> ProbeResult:
    """One active probe: connect, offer per profile, classify the response.

    Applies the probe guardrails, retries at most policy.max_retries times
    on timeout/reset with backoff, and never retries a refused connection.
    """
    result, _transcript = run_probe_with_capture(
        target, profile, policy=policy, registry=registry, clock=clock, sleeper=sleeper, rng=rng
    )
    return result


def run_probe_with_capture(
    target: ProbeTarget,
    profile: ProbeProfile,
    *,
    policy: GuardrailPolicy | None = None,
    registry: RegistryBundle | None = None,
    clock=time.time,
    sleeper=time.sleep,
    rng=None,
) -> tuple[ProbeResult, wire.Transcript]:
    """run_probe plus the exchange bytes as a transcript.

    The transcript is what an on-path tap of the probe's own session would
    have captured, so it can feed the passive surface alongside the result.
    """
    policy = policy or GuardrailPolicy()
    registry = registry or default_registry()
    check_probe_guardrails(target, profile)
    rng = rng or random.Random()

    attempts = 0
    while True:
        if attempts:
            sleeper(policy.backoff_s)
        attempts += 1
        outcome, server_bytes, client_payload, alert_code, detail = _probe_once(
            target, profile, policy, rng
        )
        transient = outcome in ("timeout", "connection_reset")
        if not transient or attempts > policy.max_retries:
            break

    observed_at = clock()
    result = result_from_exchange(
        target,
        profile,
        outcome=outcome,
        server_bytes=server_bytes,
        client_payload=client_payload,
        alert_code=alert_code,
        detail=detail,
        attempts=attempts,
        observed_at=observed_at,
        registry=registry,
    )
    transcript = wire.Transcript(
        artifact_id=f"probe-capture:{target.host}:{target.port}:{profile.name}",
        flows=(
            wire.Flow(wire.CLIENT_TO_SERVER, observed_at, client_payload),
            wire.Flow(wire.SERVER_TO_CLIENT, observed_at, server_bytes),
        ),
    )
    return result, transcript


def _probe_once(target, profile, policy, rng):
    ch = profile.client_hello_bytes(rng, target.sni)
    version = wire.TLS12 if profile.offered_versions is None else wire.TLS10
    sent = wire.records_for([ch], version)
    answered_hrr = False

    def finish(outcome, data, code, detail):
        return outcome, data, sent, code, detail

    try:
        with socket.create_connection((target.host, target.port), timeout=policy.timeout_s) as sock:
            sock.settimeout(policy.timeout_s)
            sock.sendall(sent)
            chunks: list[bytes] = []
            while True:
                try:
                    chunk = sock.recv(65536)
                except socket.timeout:
                    return finish("timeout", b"".join(chunks), None, "read timeout")
                if not chunk:
                    break
                chunks.append(chunk)
                data = b"".join(chunks)
                status = _classify_server_bytes(data)
                if status is not None:
                    return finish(status[0], data, status[1], status[2])
                if not answered_hrr:
                    retry_group = _pending_retry_group(sent, data)
                    if retry_group is not None:
                        ch2 = wire.build_client_hello(
                            rng=rng,
                            legacy_version=wire.TLS12,
                            cipher_suites=profile.cipher_suites,
                            offered_versions=profile.offered_versions,
                            offered_groups=profile.offered_groups,
                            key_share_groups=(retry_group,),
                            signature_schemes=(0x0804, 0x0403, 0x0401),
                            sni=target.sni,
                        )
                        follow_up = wire.records_for([ch2])
                        sock.sendall(follow_up)
                        sent += follow_up
                        answered_hrr = True
            data = b"".join(chunks)
            status = _classify_server_bytes(data)
            if status is not None:
                return finish(status[0], data, status[1], status[2])
            return finish("protocol_error", data, None, "connection closed before handshake concluded")
    except ConnectionRefusedError as exc:
        return finish("connection_refused", b"", None, str(exc))
    except ConnectionResetError as exc:
        return finish("connection_reset", b"", None, str(exc))
    except socket.timeout as exc:
        return finish("timeout", b"", None, str(exc))
    except OSError as exc:
        return finish("protocol_error", b"", None, str(exc))


def _pending_retry_group(client_payload: bytes, server_bytes: bytes) -> int | None:
    """Group requested by an unanswered HelloRetryRequest, if any."""
    view = wire.decode_transcript(
        wire.Transcript(
            artifact_id="probe",
            flows=(
                wire.Flow(wire.CLIENT_TO_SERVER, 0.0, client_payload),
                wire.Flow(wire.SERVER_TO_CLIENT, 1.0, server_bytes),
            ),
        )
    )
    if (
        view.server_hello is not None
        and view.server_hello.is_hrr
        and view.negotiation_server_hello is None
    ):
        return view.server_hello.key_share_group
    return None


def _classify_server_bytes(data: bytes):
    """Completed when the endpoint's post-handshake report arrived."""
    records, _pending = wire.split_records(data)
    for rtype, _ver, payload in records:
        if rtype == wire.RECORD_ALERT and len(payload) >= 2 and payload[0] == 2:
            return "alert", payload[1], f"fatal alert {payload[1]}"
        if rtype == wire.RECORD_APPDATA and payload.startswith(REPORT_MAGIC):
            return "completed", None, None
    return None


def result_from_exchange(
    target: ProbeTarget,
    profile: ProbeProfile,
    *,
    outcome: str,
    server_bytes: bytes,
    client_payload: bytes,
    attempts: int,
    observed_at: float,
    registry: RegistryBundle | None = None,
    alert_code: int | None = None,
    detail: str | None = None,
) -> ProbeResult:
    """Classify one probe exchange (live or replayed) into a ProbeResult."""
    registry = registry or default_registry()
    provenance = Provenance(SURFACE_ACTIVE, ORIGIN_ACTIVE_PROBE, observed_at)
    not_negotiated = EvidenceValue.unknown(f"probe_{outcome}")
    negotiated_version = not_negotiated
    negotiated_suite = not_negotiated
    selected_group = not_negotiated
    selected_cp = None
    hrr_used = False
    cert_request = EvidenceValue.unknown("not_reported")
    resumption = EvidenceValue.unknown("not_reported")
    tickets = EvidenceValue.unknown("not_reported")
    observed_chain = None

    if outcome == "completed":
        transcript = wire.Transcript(
            artifact_id="probe",
            flows=(
                wire.Flow(wire.CLIENT_TO_SERVER, 0.0, client_payload),
                wire.Flow(wire.SERVER_TO_CLIENT, 1.0, server_bytes),
            ),
        )
        view = wire.decode_transcript(transcript)
        sh = view.negotiation_server_hello
        if sh is None:
            outcome = "protocol_error"
            detail = "report received without a conclusive ServerHello"
        else:
            hrr_used = bool(view.server_hello and view.server_hello.is_hrr)
            negotiated_version = _sh_version(sh)
            negotiated_suite = _suite_label(registry, sh.cipher_suite)
            selected_group, selected_cp = _selected_group(registry, view)
            report = _extract_report(server_bytes)
            if report is not None:
                if "certificate_request" in report:
                    cert_request = EvidenceValue.known(bool(report["certificate_request"]))
                if "resumption_accepted" in report:
                    resumption = EvidenceValue.known(bool(report["resumption_accepted"]))
                if "session_tickets_issued" in report:
                    tickets = EvidenceValue.known(int(report["session_tickets_issued"]))
            if view.server_certificate_chain:
                observed_chain = parse_chain_observation(
                    view.server_certificate_chain,
                    origin=ORIGIN_ACTIVE_PROBE,
                    observed_at=observed_at,
                    registry=registry,
                )
            if view.certificate_request_seen:
                cert_request = EvidenceValue.known(True)
            elif view.server_hello_done_seen and not view.certificate_request_seen:
                cert_request = EvidenceValue.known(False)

    return ProbeResult(
        profile_name=profile.name,
        host=target.host,
        port=target.port,
        sni=target.sni,
        outcome=outcome,
        attempts=attempts,
        provenance=provenance,
        offered_group_codepoints=profile.offered_groups,
        offered_version_codepoints=profile.offered_versions,
        offered_cipher_suite_codepoints=profile.cipher_suites,
        negotiated_version=negotiated_version,
        negotiated_cipher_suite=negotiated_suite,
        selected_group=selected_group,
        selected_group_codepoint=selected_cp,
        hrr_used=hrr_used,
        certificate_request=cert_request,
        resumption_accepted=resumption,
        session_tickets_issued=tickets,
        observed_chain=observed_chain,
        alert_code=alert_code,
        detail=detail,
    )


def _extract_report(server_bytes: bytes) -> dict | None:
    records, _ = wire.split_records(server_bytes)
    for rtype, _ver, payload in records:
        if rtype == wire.RECORD_APPDATA and payload.startswith(REPORT_MAGIC):
            try:
                return json.loads(payload[len(REPORT_MAGIC) :].decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                return None
    return None


# -- capability aggregation --------------------------------------------------


def aggregate_capability(results: list[ProbeResult], registry: RegistryBundle | None = None) -> dict:
    """Lower-bound capability evidence from a set of probe results.

    supported_groups collects every group some probe negotiated; an
    endpoint reachable only through group-free exchanges (static RSA)
    yields known(()) rather than unknown. Hybrid support is known(False)
    only when a hybrid offer completed without a hybrid selection.
    """
    registry = registry or default_registry()
    if not results:
        return {
            "supported_groups": EvidenceValue.unknown("no_active_probes"),
            "hybrid_key_establishment": EvidenceValue.unknown("no_active_probes"),
            "supported_versions": EvidenceValue.unknown("no_active_probes"),
        }
    completed = [r for r in results if r.completed]
    if not completed:
        reason = "no_successful_probes"
        return {
            "supported_groups": EvidenceValue.unknown(reason),
            "hybrid_key_establishment": EvidenceValue.unknown(reason),
            "supported_versions": EvidenceValue.unknown(reason),
        }

    def _is_hybrid(result: ProbeResult) -> bool:
        return (
            result.selected_group.is_known
            and registry.group_family(result.selected_group.value) is Family.HYBRID
        )

    groups: set[str] = set()
    versions: set[str] = set()
    hybrid_seen = False
    hybrid_offered_and_missed = False
    for r in completed:
        if r.selected_group.is_known:
            groups.add(r.selected_group.value)
            hybrid_seen = hybrid_seen or _is_hybrid(r)
        if r.negotiated_version.is_known:
            versions.add(r.negotiated_version.value)
        offered_hybrid = any(
            (e := registry.canonicalize(RegistryKind.NAMED_GROUP, cp)).is_known
            and e.value.family is Family.HYBRID
            for cp in r.offered_group_codepoints
        )
        if offered_hybrid and not _is_hybrid(r):
            hybrid_offered_and_missed = True

    if hybrid_seen:
        hybrid = EvidenceValue.known(True)
    elif hybrid_offered_and_missed:
        hybrid = EvidenceValue.known(False)
    else:
        hybrid = EvidenceValue.unknown("hybrid_support_not_probed")

    return {
        "supported_groups": EvidenceValue.known(tuple(sorted(groups))),
        "hybrid_key_establishment": hybrid,
        "supported_versions": EvidenceValue.known(tuple(sorted(versions))),
    }
