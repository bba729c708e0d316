import json

import pytest

from pqtlsobs.errors import RegistryError
from pqtlsobs.evidence import EvidenceState, EvidenceValue
from pqtlsobs.registry import (
    EntryStatus,
    Family,
    RegistryBundle,
    RegistryEntry,
    RegistryKind,
    bundle_checksum,
    default_registry,
    load_registry_payload,
)


@pytest.fixture(scope="module")
def reg() -> RegistryBundle:
    return default_registry()


class TestBundledRegistry:
    def test_checksum_verifies(self, reg):
        assert reg.checksum == bundle_checksum(reg.version, [e.to_json() for e in reg.entries])

    def test_hybrid_group_resolves(self, reg):
        v = reg.canonicalize(RegistryKind.NAMED_GROUP, 0x11EC)
        assert v.state is EvidenceState.KNOWN
        entry = v.value
        assert entry.canonical_name == "X25519MLKEM768"
        assert entry.family is Family.HYBRID
        assert entry.components == ("X25519", "ML-KEM-768")

    def test_classical_group_resolves(self, reg):
        entry = reg.canonicalize(RegistryKind.NAMED_GROUP, 0x001D).value
        assert entry.canonical_name == "X25519"
        assert entry.family is Family.CLASSICAL

    def test_obsolete_draft_keeps_status(self, reg):
        entry = reg.canonicalize(RegistryKind.NAMED_GROUP, 0x6399).value
        assert entry.canonical_name == "X25519Kyber768Draft00"
        assert entry.status is EntryStatus.OBSOLETE
        assert entry.family is Family.HYBRID

    def test_grease_is_unknown_not_guessed(self, reg):
        v = reg.canonicalize(RegistryKind.NAMED_GROUP, 0x2A2A)
        assert v.state is EvidenceState.UNKNOWN
        assert v.reasons == ("unknown_identifier:0x2a2a",)

    def test_oid_lookup(self, reg):
        v = reg.canonicalize(RegistryKind.SPKI_OID, "1.2.840.10045.2.1")
        assert v.value.canonical_name == "ECDSA"

    def test_signature_scheme_lookup(self, reg):
        v = reg.canonicalize(RegistryKind.SIGNATURE_SCHEME, 0x0804)
        assert v.value.canonical_name == "rsa_pss_rsae_sha256"

    def test_unknown_oid(self, reg):
        v = reg.canonicalize(RegistryKind.SPKI_OID, "1.2.3.4.5")
        assert v.state is EvidenceState.UNKNOWN
        assert v.reasons == ("unknown_identifier:1.2.3.4.5",)

    def test_group_family_helper(self, reg):
        assert reg.group_family("X25519MLKEM768") is Family.HYBRID
        assert reg.group_family("X25519") is Family.CLASSICAL
        assert reg.group_family("NoSuchGroup") is None

    def test_round_trip_via_json(self, reg):
        again = load_registry_payload(reg.to_json())
        assert again.version == reg.version
        assert again.entries == reg.entries
        assert again.checksum == reg.checksum


def _entry(**overrides) -> RegistryEntry:
    base = dict(
        kind=RegistryKind.NAMED_GROUP,
        canonical_name="X25519",
        codepoint=0x001D,
        family=Family.CLASSICAL,
        status=EntryStatus.STANDARD,
        source_note="test",
    )
    base.update(overrides)
    return RegistryEntry(**base)


class TestValidation:
    def test_duplicate_codepoint_rejected(self):
        entries = (_entry(), _entry(canonical_name="AliasOfSame"))
        with pytest.raises(RegistryError):
            RegistryBundle("t", entries, "")

    def test_alias_collision_rejected(self):
        entries = (_entry(), _entry(canonical_name="Other", codepoint=0x001E, aliases=("X25519",)))
        with pytest.raises(RegistryError):
            RegistryBundle("t", entries, "")

    def test_checksum_mismatch_rejected(self, reg):
        payload = reg.to_json()
        payload["checksum"] = "0" * 64
        with pytest.raises(RegistryError):
            load_registry_payload(payload)

    def test_codepoint_range(self):
        with pytest.raises(RegistryError):
            _entry(codepoint=0x1_0000)

    def test_hybrid_needs_components(self):
        with pytest.raises(RegistryError):
            _entry(family=Family.HYBRID, components=())

    def test_oid_kind_requires_dotted_decimal(self):
        with pytest.raises(RegistryError):
            _entry(kind=RegistryKind.SPKI_OID, codepoint=None, oid="not-an-oid")

    def test_codepoint_kind_rejects_oid(self):
        with pytest.raises(RegistryError):
            _entry(oid="1.2.3")

    def test_tampered_file_rejected(self, tmp_path, reg):
        payload = json.loads(json.dumps(reg.to_json()))
        payload["entries"][0]["canonical_name"] = "Tampered"
        with pytest.raises(RegistryError):
            load_registry_payload(payload)


class TestNameLookups:
    def test_exact_name_is_known(self, reg):
        v = reg.canonicalize(RegistryKind.NAMED_GROUP, "X25519MLKEM768")
        assert v.state is EvidenceState.KNOWN

    def test_unique_case_variant_resolves(self, reg):
        v = reg.canonicalize(RegistryKind.NAMED_GROUP, "x25519mlkem768")
        assert v.state is EvidenceState.KNOWN
        assert v.value.canonical_name == "X25519MLKEM768"

    def test_case_collision_is_ambiguous(self):
        entries = (
            _entry(canonical_name="MLKem768", codepoint=1),
            _entry(canonical_name="mlkem768", codepoint=2),
        )
        bundle = RegistryBundle("t", entries, "")
        v = bundle.canonicalize(RegistryKind.NAMED_GROUP, "MLKEM768")
        assert v.state is EvidenceState.AMBIGUOUS
        assert sorted(v.candidates) == ["MLKem768", "mlkem768"]
        assert not v.resolved


class TestEvidenceValue:
    def test_known_requires_value(self):
        with pytest.raises(ValueError):
            EvidenceValue(state=EvidenceState.KNOWN)

    def test_na_requires_reason(self):
        with pytest.raises(ValueError):
            EvidenceValue(state=EvidenceState.NOT_APPLICABLE)

    def test_ambiguous_requires_candidates(self):
        with pytest.raises(ValueError):
            EvidenceValue(state=EvidenceState.AMBIGUOUS)

    def test_resolved_predicate(self):
        assert EvidenceValue.known(1).resolved
        assert EvidenceValue.not_applicable("n/a").resolved
        assert not EvidenceValue.unknown("why").resolved
        assert not EvidenceValue.ambiguous([1, 2], "two options").resolved

    def test_json_round_trip(self):
        for v in (
            EvidenceValue.known("X25519"),
            EvidenceValue.unknown("no_probe"),
            EvidenceValue.ambiguous(["a", "b"], "case_fold"),
            EvidenceValue.not_applicable("psk_resumption"),
        ):
            assert EvidenceValue.from_json(v.to_json()) == v
