"""Versioned identifier registry: named groups, signature schemes and OIDs.

The registry (surface SigmaR) maps raw wire identifiers to canonical entries
with family metadata. Canonicalization never invents knowledge: identifiers
absent from the bundle come back as unknown with an unknown_identifier
reason, so draft, experimental and GREASE codepoints stay distinguishable
from registered ones.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import RegistryError
from .evidence import EvidenceValue

_OID_RE = re.compile(r"^\d+(\.\d+)+$")


class RegistryKind(str, Enum):
    NAMED_GROUP = "named_group"
    SIGNATURE_SCHEME = "signature_scheme"
    SPKI_OID = "spki_oid"
    SIGNATURE_OID = "signature_oid"


class Family(str, Enum):
    CLASSICAL = "classical"
    HYBRID = "hybrid"
    POST_QUANTUM = "post_quantum"


class EntryStatus(str, Enum):
    STANDARD = "standard"
    DRAFT = "draft"
    OBSOLETE = "obsolete"


_CODEPOINT_KINDS = {RegistryKind.NAMED_GROUP, RegistryKind.SIGNATURE_SCHEME}


@dataclass(frozen=True)
class RegistryEntry:
    kind: RegistryKind
    canonical_name: str
    family: Family
    status: EntryStatus
    source_note: str
    codepoint: int | None = None
    oid: str | None = None
    aliases: tuple[str, ...] = ()
    components: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", RegistryKind(self.kind))
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "status", EntryStatus(self.status))
        object.__setattr__(self, "aliases", tuple(self.aliases))
        object.__setattr__(self, "components", tuple(self.components))
        if self.kind in _CODEPOINT_KINDS:
            if self.oid is not None:
                raise RegistryError(f"{self.canonical_name}: {self.kind.value} entries carry codepoints, not OIDs")
            if not isinstance(self.codepoint, int) or not 0 <= self.codepoint <= 0xFFFF:
                raise RegistryError(f"{self.canonical_name}: codepoint must be a 16-bit unsigned integer")
        else:
            if self.codepoint is not None:
                raise RegistryError(f"{self.canonical_name}: {self.kind.value} entries carry OIDs, not codepoints")
            if not isinstance(self.oid, str) or not _OID_RE.match(self.oid):
                raise RegistryError(f"{self.canonical_name}: OID must be a dotted-decimal string")
        if self.family is Family.HYBRID and len(self.components) < 2:
            raise RegistryError(f"{self.canonical_name}: hybrid entries need at least two components")

    @property
    def raw_id(self):
        return self.codepoint if self.kind in _CODEPOINT_KINDS else self.oid

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "codepoint": self.codepoint,
            "oid": self.oid,
            "canonical_name": self.canonical_name,
            "aliases": list(self.aliases),
            "family": self.family.value,
            "components": list(self.components),
            "status": self.status.value,
            "source_note": self.source_note,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RegistryEntry":
        return cls(
            kind=payload["kind"],
            codepoint=payload.get("codepoint"),
            oid=payload.get("oid"),
            canonical_name=payload["canonical_name"],
            aliases=tuple(payload.get("aliases", ())),
            family=payload["family"],
            components=tuple(payload.get("components", ())),
            status=payload["status"],
            source_note=payload["source_note"],
        )


def bundle_checksum(version: str, entries: list[dict]) -> str:
    canonical = json.dumps({"version": version, "entries": entries}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


class RegistryBundle:
    def __init__(self, version: str, entries: tuple[RegistryEntry, ...], checksum: str):
        self.version = version
        self.entries = entries
        self.checksum = checksum
        self._by_raw: dict[tuple[RegistryKind, object], RegistryEntry] = {}
        self._by_name: dict[tuple[RegistryKind, str], RegistryEntry] = {}
        self._by_name_ci: dict[tuple[RegistryKind, str], list[RegistryEntry]] = {}
        self._index()

    def _index(self):
        for entry in self.entries:
            raw_key = (entry.kind, entry.raw_id)
            if raw_key in self._by_raw:
                raise RegistryError(
                    "duplicate raw identifier",
                    kind=entry.kind.value,
                    raw=entry.raw_id,
                    names=[self._by_raw[raw_key].canonical_name, entry.canonical_name],
                )
            self._by_raw[raw_key] = entry
            for name in (entry.canonical_name, *entry.aliases):
                name_key = (entry.kind, name)
                if name_key in self._by_name and self._by_name[name_key] is not entry:
                    raise RegistryError(
                        "alias collision",
                        kind=entry.kind.value,
                        name=name,
                        names=[self._by_name[name_key].canonical_name, entry.canonical_name],
                    )
                self._by_name[name_key] = entry
                bucket = self._by_name_ci.setdefault((entry.kind, name.lower()), [])
                if entry not in bucket:
                    bucket.append(entry)

    # -- lookups -----------------------------------------------------------

    def entry(self, kind: RegistryKind | str, raw) -> RegistryEntry | None:
        kind = RegistryKind(kind)
        if isinstance(raw, int):
            return self._by_raw.get((kind, raw))
        return self._by_name.get((kind, raw)) or self._by_raw.get((kind, raw))

    def canonicalize(self, kind: RegistryKind | str, raw) -> EvidenceValue:
        """Map a raw codepoint, OID, name or alias to its registry entry.

        Returns known(entry); unknown(unknown_identifier:...) for absent
        identifiers; ambiguous when a case-insensitive name matches several
        entries.
        """
        kind = RegistryKind(kind)
        hit = self.entry(kind, raw)
        if hit is not None:
            return EvidenceValue.known(hit)
        if isinstance(raw, str):
            bucket = self._by_name_ci.get((kind, raw.lower()), [])
            if len(bucket) == 1:
                return EvidenceValue.known(bucket[0])
            if len(bucket) > 1:
                return EvidenceValue.ambiguous(
                    [e.canonical_name for e in bucket], f"alias_case_fold_collision:{raw}"
                )
        return EvidenceValue.unknown(f"unknown_identifier:{format_raw(kind, raw)}")

    def group_family(self, canonical_name: str) -> Family | None:
        hit = self._by_name.get((RegistryKind.NAMED_GROUP, canonical_name))
        return hit.family if hit else None

    def entries_of(self, kind: RegistryKind | str) -> list[RegistryEntry]:
        kind = RegistryKind(kind)
        return [e for e in self.entries if e.kind is kind]

    def to_json(self) -> dict:
        entries = [e.to_json() for e in self.entries]
        return {"version": self.version, "checksum": self.checksum, "entries": entries}


def format_raw(kind: RegistryKind, raw) -> str:
    if isinstance(raw, int):
        return f"0x{raw:04x}"
    return str(raw)


def load_registry_payload(payload: dict, *, verify_checksum: bool = True) -> RegistryBundle:
    try:
        version = payload["version"]
        raw_entries = payload["entries"]
    except (KeyError, TypeError) as exc:
        raise RegistryError(f"registry bundle missing field: {exc}") from exc
    entries = tuple(RegistryEntry.from_json(e) for e in raw_entries)
    expected = bundle_checksum(version, [e.to_json() for e in entries])
    declared = payload.get("checksum", "")
    if verify_checksum and declared and declared != expected:
        raise RegistryError("registry checksum mismatch", declared=declared, computed=expected)
    return RegistryBundle(version, entries, expected)


def load_registry(path: str | Path) -> RegistryBundle:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return load_registry_payload(payload)


_DEFAULT: RegistryBundle | None = None


def default_registry() -> RegistryBundle:
    """The packaged v1 bundle, loaded once."""
    global _DEFAULT
    if _DEFAULT is None:
        data = resources.files("pqtlsobs.data").joinpath("registry_v1.json").read_text()
        _DEFAULT = load_registry_payload(json.loads(data))
    return _DEFAULT
