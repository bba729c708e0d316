"""TLS record and handshake codec for captured byte transcripts.

Covers exactly the slice of TLS 1.2/1.3 that is visible in plaintext:
record framing, ClientHello/ServerHello with the negotiation-relevant
extensions, the plaintext TLS 1.2 server flight, HelloRetryRequest
detection, and the encrypted remainder treated as opaque. Decoding is
total: arbitrary bytes produce a classification, never an exception.

The encoder is the benchmark's transcript synthesizer; it shares the
ClientHello builder with the live prober.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from enum import Enum

from .errors import MutationError, WireError

# -- protocol constants ----------------------------------------------------

RECORD_CCS = 20
RECORD_ALERT = 21
RECORD_HANDSHAKE = 22
RECORD_APPDATA = 23
RECORD_TYPES = {RECORD_CCS, RECORD_ALERT, RECORD_HANDSHAKE, RECORD_APPDATA}

HS_CLIENT_HELLO = 1
HS_SERVER_HELLO = 2
HS_NEW_SESSION_TICKET = 4
HS_ENCRYPTED_EXTENSIONS = 8
HS_CERTIFICATE = 11
HS_SERVER_KEY_EXCHANGE = 12
HS_CERTIFICATE_REQUEST = 13
HS_SERVER_HELLO_DONE = 14
HS_CERTIFICATE_VERIFY = 15
HS_CLIENT_KEY_EXCHANGE = 16
HS_FINISHED = 20

EXT_SERVER_NAME = 0x0000
EXT_SUPPORTED_GROUPS = 0x000A
EXT_EC_POINT_FORMATS = 0x000B
EXT_SIGNATURE_ALGORITHMS = 0x000D
EXT_ALPN = 0x0010
EXT_PRE_SHARED_KEY = 0x0029
EXT_SUPPORTED_VERSIONS = 0x002B
EXT_PSK_KEY_EXCHANGE_MODES = 0x002D
EXT_KEY_SHARE = 0x0033

TLS10 = 0x0301
TLS11 = 0x0302
TLS12 = 0x0303
TLS13 = 0x0304

VERSION_NAMES = {TLS10: "TLS1.0", TLS11: "TLS1.1", TLS12: "TLS1.2", TLS13: "TLS1.3"}

# Fixed ServerHello.random marking a HelloRetryRequest (SHA-256 of the
# ASCII string "HelloRetryRequest").
HRR_RANDOM = bytes.fromhex("cf21ad74e59a6111be1d8c021e65b891c2a211167abb8c5e079e09e2c8a8339c")

MAX_RECORD_PAYLOAD = 2**14
# Decode tolerance: TLS 1.3 allows up to 2^14 + 256 for protected records;
# keep a little extra slack for 1.2-era stacks.
MAX_RECORD_PAYLOAD_DECODE = 2**14 + 2048
MAX_HANDSHAKE_LEN_DECODE = 2**18

CLIENT_TO_SERVER = "client_to_server"
SERVER_TO_CLIENT = "server_to_client"
DIRECTIONS = (CLIENT_TO_SERVER, SERVER_TO_CLIENT)

CIPHER_SUITE_NAMES = {
    0x1301: "TLS_AES_128_GCM_SHA256",
    0x1302: "TLS_AES_256_GCM_SHA384",
    0x1303: "TLS_CHACHA20_POLY1305_SHA256",
    0x009C: "TLS_RSA_WITH_AES_128_GCM_SHA256",
    0x009D: "TLS_RSA_WITH_AES_256_GCM_SHA384",
    0xC02F: "TLS_ECDHE_RSA_WITH_AES_128_GCM_SHA256",
    0xC030: "TLS_ECDHE_RSA_WITH_AES_256_GCM_SHA384",
    0xC02B: "TLS_ECDHE_ECDSA_WITH_AES_128_GCM_SHA256",
    0xC02C: "TLS_ECDHE_ECDSA_WITH_AES_256_GCM_SHA384",
}

# Key-exchange shape encoded in TLS 1.2 suites; TLS 1.3 suites carry none.
TLS12_SUITE_KEX = {
    0x009C: "static_rsa",
    0x009D: "static_rsa",
    0xC02F: "ecdhe",
    0xC030: "ecdhe",
    0xC02B: "ecdhe",
    0xC02C: "ecdhe",
}

TLS13_SUITES = (0x1301, 0x1302)
TLS12_ECDHE_RSA_SUITES = (0xC02F, 0xC030)
TLS12_ECDHE_ECDSA_SUITES = (0xC02B, 0xC02C)
TLS12_STATIC_RSA_SUITES = (0x009C,)

# Realistic key-exchange payload sizes per group codepoint
# (client share, server share).
_KEX_SIZES = {
    0x001D: (32, 32),        # X25519
    0x001E: (56, 56),        # x448
    0x0017: (65, 65),        # secp256r1 uncompressed point
    0x0018: (97, 97),        # secp384r1
    0x11EC: (1216, 1120),    # X25519MLKEM768: encaps key + x25519 / ct + x25519
    0x11EB: (1249, 1153),    # SecP256r1MLKEM768
    0x6399: (1216, 1120),    # X25519Kyber768Draft00
    0x0201: (1184, 1088),    # ML-KEM-768 alone
}
_DEFAULT_KEX_SIZE = (32, 32)


def suite_name(codepoint: int) -> str:
    return CIPHER_SUITE_NAMES.get(codepoint, f"unknown_suite_0x{codepoint:04x}")


def cipher_suite_codepoint(name: str) -> int | None:
    for cp, n in CIPHER_SUITE_NAMES.items():
        if n == name:
            return cp
    return None


class Completeness(str, Enum):
    COMPLETE = "complete"
    TRUNCATED_PRE_SERVERHELLO = "truncated_pre_serverhello"
    TRUNCATED_POST_SERVERHELLO = "truncated_post_serverhello"
    MALFORMED = "malformed"


# -- transcripts -----------------------------------------------------------


@dataclass(frozen=True)
class Flow:
    direction: str
    timestamp: float
    data: bytes

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise WireError(f"invalid flow direction: {self.direction!r}")


@dataclass(frozen=True)
class Transcript:
    artifact_id: str
    flows: tuple[Flow, ...]
    declared_truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "flows", tuple(self.flows))
        times = [f.timestamp for f in self.flows]
        if any(b < a for a, b in zip(times, times[1:])):
            raise WireError("flow timestamps must be non-decreasing", artifact_id=self.artifact_id)

    @property
    def digest(self) -> str:
        """SHA-256 over the concatenated raw flow bytes in file order."""
        h = hashlib.sha256()
        for flow in self.flows:
            h.update(flow.data)
        return h.hexdigest()

    def direction_bytes(self, direction: str) -> bytes:
        return b"".join(f.data for f in self.flows if f.direction == direction)

    def total_length(self) -> int:
        return sum(len(f.data) for f in self.flows)

    def to_json(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "digest": self.digest,
            "declared_truncated": self.declared_truncated,
            "flows": [
                {"direction": f.direction, "timestamp": f.timestamp, "data_hex": f.data.hex()}
                for f in self.flows
            ],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Transcript":
        try:
            flows = tuple(
                Flow(f["direction"], float(f["timestamp"]), bytes.fromhex(f["data_hex"]))
                for f in payload["flows"]
            )
            transcript = cls(
                artifact_id=payload["artifact_id"],
                flows=flows,
                declared_truncated=bool(payload.get("declared_truncated", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise WireError(f"invalid transcript payload: {exc}") from exc
        declared = payload.get("digest")
        if declared and declared != transcript.digest:
            raise WireError(
                "transcript digest mismatch", declared=declared, computed=transcript.digest
            )
        return transcript


# -- decoded views ---------------------------------------------------------


@dataclass
class ClientHelloView:
    legacy_version: int
    random: bytes
    session_id: bytes
    cipher_suites: tuple[int, ...]
    extensions_present: tuple[int, ...] = ()
    offered_versions: tuple[int, ...] | None = None
    offered_groups: tuple[int, ...] | None = None
    key_share_groups: tuple[int, ...] | None = None
    signature_schemes: tuple[int, ...] | None = None
    sni: str | None = None
    psk_offered: bool = False
    psk_modes: tuple[int, ...] | None = None


@dataclass
class ServerHelloView:
    legacy_version: int
    random: bytes
    cipher_suite: int
    is_hrr: bool
    extensions_present: tuple[int, ...] = ()
    selected_version: int | None = None
    key_share_group: int | None = None
    key_share_present: bool = False
    psk_selected: bool = False


@dataclass
class MessageInfo:
    direction: str
    msg_type: int
    length: int
    first_record: int
    last_record: int


@dataclass
class HandshakeView:
    completeness: Completeness
    client_hello: ClientHelloView | None = None
    second_client_hello: ClientHelloView | None = None
    server_hello: ServerHelloView | None = None
    second_server_hello: ServerHelloView | None = None
    server_certificate_chain: tuple[bytes, ...] | None = None
    client_certificate_chain: tuple[bytes, ...] | None = None
    ske_curve_type: int | None = None
    ske_named_curve: int | None = None
    certificate_request_seen: bool = False
    server_hello_done_seen: bool = False
    session_ticket_seen: bool = False
    messages: tuple[MessageInfo, ...] = ()
    fragmented: bool = False
    coalesced: bool = False
    alerts: tuple[tuple[str, int, int], ...] = ()
    errors: tuple[str, ...] = ()
    incomplete_directions: tuple[str, ...] = ()

    @property
    def negotiation_server_hello(self) -> ServerHelloView | None:
        """The ServerHello that fixed the negotiation: post-HRR when present."""
        if self.server_hello is not None and self.server_hello.is_hrr:
            return self.second_server_hello
        return self.server_hello

    def semantic_view(self) -> dict:
        """Layout-independent content, for mutation-equality checks."""

        def sh(v: ServerHelloView | None):
            if v is None:
                return None
            return {
                "legacy_version": v.legacy_version,
                "cipher_suite": v.cipher_suite,
                "is_hrr": v.is_hrr,
                "selected_version": v.selected_version,
                "key_share_group": v.key_share_group,
                "key_share_present": v.key_share_present,
                "psk_selected": v.psk_selected,
                "extensions_present": list(v.extensions_present),
            }

        def ch(v: ClientHelloView | None):
            if v is None:
                return None
            return {
                "legacy_version": v.legacy_version,
                "cipher_suites": list(v.cipher_suites),
                "offered_versions": None if v.offered_versions is None else list(v.offered_versions),
                "offered_groups": None if v.offered_groups is None else list(v.offered_groups),
                "key_share_groups": None if v.key_share_groups is None else list(v.key_share_groups),
                "signature_schemes": None if v.signature_schemes is None else list(v.signature_schemes),
                "sni": v.sni,
                "psk_offered": v.psk_offered,
                "extensions_present": list(v.extensions_present),
            }

        return {
            "completeness": self.completeness.value,
            "client_hello": ch(self.client_hello),
            "second_client_hello": ch(self.second_client_hello),
            "server_hello": sh(self.server_hello),
            "second_server_hello": sh(self.second_server_hello),
            "server_certificate_chain": None
            if self.server_certificate_chain is None
            else [c.hex() for c in self.server_certificate_chain],
            "client_certificate_chain": None
            if self.client_certificate_chain is None
            else [c.hex() for c in self.client_certificate_chain],
            "ske_named_curve": self.ske_named_curve,
            "certificate_request_seen": self.certificate_request_seen,
            "server_hello_done_seen": self.server_hello_done_seen,
            "session_ticket_seen": self.session_ticket_seen,
            "messages": [(m.direction, m.msg_type) for m in self.messages],
        }


# -- primitive readers -----------------------------------------------------


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if self.remaining() < n:
            raise _ParseError(f"need {n} bytes, have {self.remaining()}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        b = self.take(2)
        return (b[0] << 8) | b[1]

    def u24(self) -> int:
        b = self.take(3)
        return (b[0] << 16) | (b[1] << 8) | b[2]

    def vector(self, lenbytes: int) -> "_Reader":
        n = {1: self.u8, 2: self.u16, 3: self.u24}[lenbytes]()
        return _Reader(self.take(n))


class _ParseError(Exception):
    pass


def _u16(v: int) -> bytes:
    return bytes(((v >> 8) & 0xFF, v & 0xFF))


def _u24(v: int) -> bytes:
    return bytes(((v >> 16) & 0xFF, (v >> 8) & 0xFF, v & 0xFF))


def _vec(payload: bytes, lenbytes: int) -> bytes:
    if lenbytes == 1:
        return bytes((len(payload),)) + payload
    if lenbytes == 2:
        return _u16(len(payload)) + payload
    return _u24(len(payload)) + payload


# -- message parsers -------------------------------------------------------


def _parse_extensions(r: _Reader) -> list[tuple[int, bytes]]:
    exts = []
    seen = set()
    while r.remaining():
        ext_type = r.u16()
        data = r.vector(2)
        if ext_type in seen:
            raise _ParseError(f"duplicate extension 0x{ext_type:04x}")
        seen.add(ext_type)
        exts.append((ext_type, data.data))
    return exts


def parse_client_hello(body: bytes) -> ClientHelloView:
    r = _Reader(body)
    legacy = r.u16()
    rnd = r.take(32)
    session_id = r.vector(1).data
    suites_r = r.vector(2)
    if len(suites_r.data) % 2:
        raise _ParseError("odd cipher-suite vector")
    suites = tuple(suites_r.u16() for _ in range(len(suites_r.data) // 2))
    r.vector(1)  # compression methods
    view = ClientHelloView(legacy, rnd, session_id, suites)
    if not r.remaining():
        return view
    exts = _parse_extensions(r.vector(2))
    if r.remaining():
        raise _ParseError("trailing bytes after ClientHello extensions")
    view.extensions_present = tuple(t for t, _ in exts)
    for ext_type, data in exts:
        er = _Reader(data)
        if ext_type == EXT_SUPPORTED_VERSIONS:
            lst = er.vector(1)
            view.offered_versions = tuple(lst.u16() for _ in range(len(lst.data) // 2))
        elif ext_type == EXT_SUPPORTED_GROUPS:
            lst = er.vector(2)
            view.offered_groups = tuple(lst.u16() for _ in range(len(lst.data) // 2))
        elif ext_type == EXT_KEY_SHARE:
            lst = er.vector(2)
            groups = []
            while lst.remaining():
                groups.append(lst.u16())
                lst.vector(2)
            view.key_share_groups = tuple(groups)
        elif ext_type == EXT_SIGNATURE_ALGORITHMS:
            lst = er.vector(2)
            view.signature_schemes = tuple(lst.u16() for _ in range(len(lst.data) // 2))
        elif ext_type == EXT_SERVER_NAME:
            lst = er.vector(2)
            while lst.remaining():
                name_type = lst.u8()
                name = lst.vector(2).data
                if name_type == 0:
                    view.sni = name.decode("ascii", errors="replace")
        elif ext_type == EXT_PSK_KEY_EXCHANGE_MODES:
            lst = er.vector(1)
            view.psk_modes = tuple(lst.u8() for _ in range(len(lst.data)))
        elif ext_type == EXT_PRE_SHARED_KEY:
            view.psk_offered = True
    return view


def parse_server_hello(body: bytes) -> ServerHelloView:
    r = _Reader(body)
    legacy = r.u16()
    rnd = r.take(32)
    r.vector(1)  # legacy_session_id_echo
    suite = r.u16()
    r.u8()  # compression
    is_hrr = rnd == HRR_RANDOM
    view = ServerHelloView(legacy, rnd, suite, is_hrr)
    if not r.remaining():
        return view
    exts = _parse_extensions(r.vector(2))
    if r.remaining():
        raise _ParseError("trailing bytes after ServerHello extensions")
    view.extensions_present = tuple(t for t, _ in exts)
    for ext_type, data in exts:
        er = _Reader(data)
        if ext_type == EXT_SUPPORTED_VERSIONS:
            view.selected_version = er.u16()
        elif ext_type == EXT_KEY_SHARE:
            if is_hrr:
                # HRR carries only the group the server asks the client to
                # retry with; there is no key material.
                view.key_share_group = er.u16()
                view.key_share_present = False
            else:
                view.key_share_group = er.u16()
                er.vector(2)
                view.key_share_present = True
        elif ext_type == EXT_PRE_SHARED_KEY:
            view.psk_selected = True
    return view


def parse_certificate_tls12(body: bytes) -> tuple[bytes, ...]:
    r = _Reader(body)
    chain_r = r.vector(3)
    certs = []
    while chain_r.remaining():
        certs.append(chain_r.vector(3).data)
    return tuple(certs)


def parse_server_key_exchange(body: bytes) -> tuple[int | None, int | None]:
    # ECDHE shape only; anything else is reported as an unknown curve type.
    r = _Reader(body)
    curve_type = r.u8()
    if curve_type != 3:
        return curve_type, None
    return curve_type, r.u16()


# -- record-layer decode ---------------------------------------------------


def split_records(data: bytes) -> tuple[list[tuple[int, int, bytes]], bool]:
    """Split a byte stream into (type, version, payload) records.

    Returns the well-formed prefix and whether trailing bytes were left
    over (an incomplete or invalid record).
    """
    parsed = _parse_records("client_to_server", data)
    consumed = sum(5 + len(p) for _, _, p in parsed.records)
    return parsed.records, consumed < len(data)


@dataclass
class _DirectionParse:
    records: list[tuple[int, int, bytes]] = field(default_factory=list)  # (type, version, payload)
    errors: list[str] = field(default_factory=list)
    incomplete: bool = False


def _parse_records(direction: str, stream: bytes) -> _DirectionParse:
    out = _DirectionParse()
    pos = 0
    while pos < len(stream):
        if len(stream) - pos < 5:
            out.incomplete = True
            break
        rtype = stream[pos]
        version = (stream[pos + 1] << 8) | stream[pos + 2]
        length = (stream[pos + 3] << 8) | stream[pos + 4]
        if rtype not in RECORD_TYPES:
            out.errors.append(f"{direction}: invalid record type {rtype} at offset {pos}")
            break
        if (version >> 8) != 3 or (version & 0xFF) > 4:
            out.errors.append(f"{direction}: implausible record version 0x{version:04x} at offset {pos}")
            break
        if length > MAX_RECORD_PAYLOAD_DECODE:
            out.errors.append(f"{direction}: record length {length} exceeds bound at offset {pos}")
            break
        if len(stream) - pos - 5 < length:
            out.incomplete = True
            break
        payload = stream[pos + 5 : pos + 5 + length]
        out.records.append((rtype, version, payload))
        pos += 5 + length
    return out


@dataclass
class _Reassembly:
    messages: list[tuple[int, bytes, int, int]] = field(default_factory=list)  # type, body, first_rec, last_rec
    pending: bool = False
    errors: list[str] = field(default_factory=list)


def _plaintext_record_indices(parse: _DirectionParse) -> set[int]:
    """Handshake records carrying plaintext handshake bytes.

    After a ChangeCipherSpec, handshake records are opaque ciphertext in
    TLS 1.2; under TLS 1.3 the CCS is compatibility-only, so once a
    ServerHello selecting 1.3 has been seen in this direction (the
    HelloRetryRequest case) later handshake records stay readable.
    """
    out: set[int] = set()
    tls13 = False
    ccs_seen = False
    buf = bytearray()
    for idx, (rtype, _ver, payload) in enumerate(parse.records):
        if rtype == RECORD_CCS:
            ccs_seen = True
            continue
        if rtype != RECORD_HANDSHAKE:
            continue
        if ccs_seen and not tls13:
            continue
        out.add(idx)
        buf.extend(payload)
        while len(buf) >= 4:
            length = (buf[1] << 16) | (buf[2] << 8) | buf[3]
            if length > MAX_HANDSHAKE_LEN_DECODE or len(buf) - 4 < length:
                break
            if buf[0] == HS_SERVER_HELLO:
                try:
                    if parse_server_hello(bytes(buf[4 : 4 + length])).selected_version == TLS13:
                        tls13 = True
                except _ParseError:
                    pass
            del buf[: 4 + length]
    return out


def _reassemble(direction: str, parse: _DirectionParse) -> _Reassembly:
    out = _Reassembly()
    allowed = _plaintext_record_indices(parse)
    buf = bytearray()
    spans: list[int] = []  # record index per buffered byte
    for idx, (rtype, _ver, payload) in enumerate(parse.records):
        if rtype != RECORD_HANDSHAKE or idx not in allowed:
            continue
        buf.extend(payload)
        spans.extend([idx] * len(payload))
        while _extract_message(buf, spans, out, direction):
            pass
    out.pending = bool(buf)
    return out


def _extract_message(buf: bytearray, spans: list[int], out: _Reassembly, direction: str) -> bool:
    if len(buf) < 4:
        return False
    msg_type = buf[0]
    length = (buf[1] << 16) | (buf[2] << 8) | buf[3]
    if length > MAX_HANDSHAKE_LEN_DECODE:
        out.errors.append(f"{direction}: handshake length {length} exceeds bound")
        buf.clear()
        spans.clear()
        return False
    if len(buf) - 4 < length:
        return False
    body = bytes(buf[4 : 4 + length])
    first_rec = spans[0]
    last_rec = spans[3 + length]
    out.messages.append((msg_type, body, first_rec, last_rec))
    del buf[: 4 + length]
    del spans[: 4 + length]
    return True


def decode_transcript(transcript: Transcript) -> HandshakeView:
    """Total decode of a transcript into a handshake view.

    Never raises on content: structural garbage yields completeness
    "malformed", cut captures yield a truncated classification.
    """
    errors: list[str] = []
    incomplete: list[str] = []
    alerts: list[tuple[str, int, int]] = []
    messages: list[MessageInfo] = []
    fragmented = False
    coalesced = False

    view = HandshakeView(completeness=Completeness.COMPLETE)

    for direction in DIRECTIONS:
        stream = transcript.direction_bytes(direction)
        parsed = _parse_records(direction, stream)
        errors.extend(parsed.errors)
        if parsed.incomplete:
            incomplete.append(direction)
        for rtype, _ver, payload in parsed.records:
            if rtype == RECORD_ALERT and len(payload) >= 2:
                alerts.append((direction, payload[0], payload[1]))
        reasm = _reassemble(direction, parsed)
        errors.extend(reasm.errors)
        if reasm.pending:
            incomplete.append(direction)

        # layout flags: a message spanning >1 record is fragmentation; a
        # record overlapping >1 message is coalescing.
        record_msg_count: dict[int, int] = {}
        for msg_type, body, first_rec, last_rec in reasm.messages:
            if last_rec > first_rec:
                fragmented = True
            for rec in range(first_rec, last_rec + 1):
                record_msg_count[rec] = record_msg_count.get(rec, 0) + 1
        if any(count >= 2 for count in record_msg_count.values()):
            coalesced = True

        for msg_type, body, first_rec, last_rec in reasm.messages:
            messages.append(MessageInfo(direction, msg_type, len(body), first_rec, last_rec))
            try:
                _apply_message(view, direction, msg_type, body)
            except _ParseError as exc:
                errors.append(f"{direction}: malformed message type {msg_type}: {exc}")

    view.messages = tuple(messages)
    view.fragmented = fragmented
    view.coalesced = coalesced
    view.alerts = tuple(alerts)
    view.errors = tuple(errors)
    view.incomplete_directions = tuple(sorted(set(incomplete)))

    if errors:
        view.completeness = Completeness.MALFORMED
    elif view.server_hello is None:
        view.completeness = Completeness.TRUNCATED_PRE_SERVERHELLO
    elif incomplete or transcript.declared_truncated:
        view.completeness = Completeness.TRUNCATED_POST_SERVERHELLO
    else:
        view.completeness = Completeness.COMPLETE
    return view


def _apply_message(view: HandshakeView, direction: str, msg_type: int, body: bytes):
    if direction == CLIENT_TO_SERVER:
        if msg_type == HS_CLIENT_HELLO:
            if view.client_hello is None:
                view.client_hello = parse_client_hello(body)
            elif view.second_client_hello is None:
                # legitimate only as a HelloRetryRequest response
                view.second_client_hello = parse_client_hello(body)
            else:
                raise _ParseError("unexpected additional ClientHello")
        elif msg_type == HS_CERTIFICATE:
            view.client_certificate_chain = parse_certificate_tls12(body)
        return
    if msg_type == HS_SERVER_HELLO:
        parsed = parse_server_hello(body)
        if view.server_hello is None:
            view.server_hello = parsed
        elif view.server_hello.is_hrr and view.second_server_hello is None:
            view.second_server_hello = parsed
        else:
            raise _ParseError("unexpected additional ServerHello")
    elif msg_type == HS_CERTIFICATE:
        view.server_certificate_chain = parse_certificate_tls12(body)
    elif msg_type == HS_SERVER_KEY_EXCHANGE:
        view.ske_curve_type, view.ske_named_curve = parse_server_key_exchange(body)
    elif msg_type == HS_CERTIFICATE_REQUEST:
        view.certificate_request_seen = True
    elif msg_type == HS_SERVER_HELLO_DONE:
        view.server_hello_done_seen = True
    elif msg_type == HS_NEW_SESSION_TICKET:
        view.session_ticket_seen = True


# -- encoder ---------------------------------------------------------------


@dataclass(frozen=True)
class PskSpec:
    offered: bool = True
    selected: bool = True
    psk_ke: bool = False  # pure PSK: ServerHello omits key_share
    modes: tuple[int, ...] = (1,)  # psk_ke_modes offered; 0 = psk_ke, 1 = psk_dhe_ke


@dataclass(frozen=True)
class HrrSpec:
    requested_group: int


@dataclass(frozen=True)
class SessionSpec:
    """Declarative description of one synthetic handshake."""

    artifact_id: str
    tls_version: int
    cipher_suite: int
    client_offered_groups: tuple[int, ...] = ()
    client_key_share_groups: tuple[int, ...] | None = None
    client_offered_versions: tuple[int, ...] | None = None
    client_signature_schemes: tuple[int, ...] = (0x0804, 0x0403)
    client_cipher_suites: tuple[int, ...] | None = None
    selected_group: int | None = None
    sni: str | None = None
    hrr: HrrSpec | None = None
    psk: PskSpec | None = None
    tls12_chain: tuple[bytes, ...] = ()
    tls12_client_auth: bool = False
    tls12_client_chain: tuple[bytes, ...] = ()
    tls12_session_ticket: bool = False
    encrypted_flight_records: tuple[int, ...] = (640, 320)
    base_timestamp: float = 1_755_000_000.0
    extra_extensions: tuple[int, ...] = ()

    def __post_init__(self):
        if self.tls_version not in (TLS12, TLS13):
            raise WireError(f"unsupported tls_version 0x{self.tls_version:04x}")
        kex = TLS12_SUITE_KEX.get(self.cipher_suite)
        if self.tls_version == TLS12:
            if kex is None:
                raise WireError("unsupported combination: TLS 1.2 with a non-1.2 cipher suite",
                                cipher_suite=self.cipher_suite)
            if self.psk is not None:
                raise WireError("unsupported combination: PSK spec on a TLS 1.2 session")
            if self.hrr is not None:
                raise WireError("unsupported combination: HelloRetryRequest on TLS 1.2")
            if not self.tls12_chain:
                raise WireError("TLS 1.2 sessions require a server certificate chain")
            if kex == "static_rsa" and self.selected_group is not None:
                raise WireError("unsupported combination: static RSA with a selected group")
            if kex == "ecdhe" and self.selected_group is None:
                raise WireError("unsupported combination: ECDHE without a selected group")
        else:
            if self.cipher_suite not in TLS13_SUITES:
                raise WireError("unsupported combination: TLS 1.3 with a non-1.3 cipher suite",
                                cipher_suite=self.cipher_suite)
            if self.tls12_chain or self.tls12_client_auth:
                raise WireError("unsupported combination: plaintext certificates on TLS 1.3")
            psk_ke = self.psk is not None and self.psk.psk_ke and self.psk.selected
            if psk_ke and self.selected_group is not None:
                raise WireError("unsupported combination: psk_ke resumption with a selected group")
            if not psk_ke and self.selected_group is None:
                raise WireError("TLS 1.3 sessions require a selected group (or psk_ke)")
            if not psk_ke and self.hrr is None and self.selected_group not in self.client_offered_groups:
                raise WireError("selected group must be offered by the client",
                                selected=self.selected_group)


def build_client_hello(
    *,
    rng: random.Random,
    legacy_version: int,
    cipher_suites: tuple[int, ...],
    offered_versions: tuple[int, ...] | None,
    offered_groups: tuple[int, ...],
    key_share_groups: tuple[int, ...] | None,
    signature_schemes: tuple[int, ...],
    sni: str | None,
    psk_offered: bool = False,
    psk_modes: tuple[int, ...] = (),
    extra_extensions: tuple[int, ...] = (),
    client_random: bytes | None = None,
) -> bytes:
    """ClientHello handshake message bytes (no record framing)."""
    rnd = client_random if client_random is not None else rng.randbytes(32)
    session_id = rng.randbytes(32)
    exts = []
    if sni is not None:
        name = sni.encode("ascii")
        exts.append((EXT_SERVER_NAME, _vec(bytes((0,)) + _vec(name, 2), 2)))
    if offered_groups:
        exts.append((EXT_SUPPORTED_GROUPS, _vec(b"".join(_u16(g) for g in offered_groups), 2)))
    if signature_schemes:
        exts.append((EXT_SIGNATURE_ALGORITHMS, _vec(b"".join(_u16(s) for s in signature_schemes), 2)))
    for ext in extra_extensions:
        exts.append((ext, b""))
    if offered_versions:
        exts.append((EXT_SUPPORTED_VERSIONS, _vec(b"".join(_u16(v) for v in offered_versions), 1)))
    if key_share_groups is not None:
        shares = b"".join(
            _u16(g) + _vec(rng.randbytes(_KEX_SIZES.get(g, _DEFAULT_KEX_SIZE)[0]), 2)
            for g in key_share_groups
        )
        exts.append((EXT_KEY_SHARE, _vec(shares, 2)))
    if psk_modes:
        exts.append((EXT_PSK_KEY_EXCHANGE_MODES, _vec(bytes(psk_modes), 1)))
    if psk_offered:
        # Offered identities + binders; pre_shared_key must come last.
        identity = _vec(rng.randbytes(32), 2) + b"\x00\x00\x00\x00"
        binder = _vec(rng.randbytes(32), 1)
        exts.append((EXT_PRE_SHARED_KEY, _vec(identity, 2) + _vec(binder, 2)))
    ext_blob = b"".join(_u16(t) + _vec(d, 2) for t, d in exts)
    body = (
        _u16(legacy_version)
        + rnd
        + _vec(session_id, 1)
        + _vec(b"".join(_u16(s) for s in cipher_suites), 2)
        + _vec(b"\x00", 1)
        + _vec(ext_blob, 2)
    )
    return bytes((HS_CLIENT_HELLO,)) + _u24(len(body)) + body


def build_server_hello(
    *,
    rng: random.Random,
    cipher_suite: int,
    session_id_echo: bytes,
    is_hrr: bool = False,
    selected_version: int | None = None,
    key_share_group: int | None = None,
    psk_selected: bool = False,
) -> bytes:
    rnd = HRR_RANDOM if is_hrr else rng.randbytes(32)
    exts = []
    if psk_selected:
        exts.append((EXT_PRE_SHARED_KEY, _u16(0)))
    if selected_version is not None:
        exts.append((EXT_SUPPORTED_VERSIONS, _u16(selected_version)))
    if key_share_group is not None:
        if is_hrr:
            exts.append((EXT_KEY_SHARE, _u16(key_share_group)))
        else:
            size = _KEX_SIZES.get(key_share_group, _DEFAULT_KEX_SIZE)[1]
            exts.append((EXT_KEY_SHARE, _u16(key_share_group) + _vec(rng.randbytes(size), 2)))
    body = (
        _u16(TLS12)
        + rnd
        + _vec(session_id_echo, 1)
        + _u16(cipher_suite)
        + b"\x00"
    )
    if exts:
        body += _vec(b"".join(_u16(t) + _vec(d, 2) for t, d in exts), 2)
    return bytes((HS_SERVER_HELLO,)) + _u24(len(body)) + body


def build_certificate_tls12(chain: tuple[bytes, ...]) -> bytes:
    blob = b"".join(_vec(c, 3) for c in chain)
    body = _vec(blob, 3)
    return bytes((HS_CERTIFICATE,)) + _u24(len(body)) + body


def build_server_key_exchange(rng: random.Random, named_curve: int) -> bytes:
    point_len = _KEX_SIZES.get(named_curve, _DEFAULT_KEX_SIZE)[1]
    body = bytes((3,)) + _u16(named_curve) + _vec(rng.randbytes(point_len), 1)
    # signature over params: algorithm (2) + signature vector
    body += _u16(0x0804) + _vec(rng.randbytes(256), 2)
    return bytes((HS_SERVER_KEY_EXCHANGE,)) + _u24(len(body)) + body


def build_certificate_request_tls12() -> bytes:
    body = _vec(bytes((1, 64)), 1) + _vec(_u16(0x0804) + _u16(0x0403), 2) + _vec(b"", 2)
    return bytes((HS_CERTIFICATE_REQUEST,)) + _u24(len(body)) + body


def _hs(msg_type: int, body: bytes) -> bytes:
    return bytes((msg_type,)) + _u24(len(body)) + body


def record(rtype: int, payload: bytes, version: int = TLS12) -> bytes:
    if len(payload) > MAX_RECORD_PAYLOAD:
        raise WireError(f"record payload {len(payload)} exceeds maximum")
    return bytes((rtype,)) + _u16(version) + _u16(len(payload)) + payload


def records_for(messages: list[bytes], version: int = TLS12) -> bytes:
    """One record per handshake message; mutations re-layer afterwards."""
    return b"".join(record(RECORD_HANDSHAKE, m, version) for m in messages)


def encode_scenario_transcript(spec: SessionSpec, seed: int = 0) -> Transcript:
    """Deterministic synthetic handshake for a session spec."""
    rng = random.Random(_derive_seed(seed, spec.artifact_id))
    t = spec.base_timestamp
    if spec.tls_version == TLS13:
        flows = _encode_tls13(spec, rng, t)
    else:
        flows = _encode_tls12(spec, rng, t)
    return Transcript(artifact_id=spec.artifact_id, flows=tuple(flows), declared_truncated=False)


def _derive_seed(seed: int, artifact_id: str) -> int:
    h = hashlib.sha256(f"{seed}:{artifact_id}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def _client_hello_for_spec(spec: SessionSpec, rng: random.Random,
                           key_share_groups: tuple[int, ...] | None,
                           client_random: bytes | None = None) -> bytes:
    if spec.tls_version == TLS13:
        offered_versions = spec.client_offered_versions or (TLS13,)
        suites = spec.client_cipher_suites or TLS13_SUITES
    else:
        offered_versions = spec.client_offered_versions
        suites = spec.client_cipher_suites or (0xC02F, 0xC02B, 0x009C)
    psk = spec.psk
    return build_client_hello(
        rng=rng,
        legacy_version=TLS12,
        cipher_suites=tuple(suites),
        offered_versions=offered_versions,
        offered_groups=spec.client_offered_groups,
        key_share_groups=key_share_groups,
        signature_schemes=spec.client_signature_schemes,
        sni=spec.sni,
        psk_offered=bool(psk and psk.offered),
        psk_modes=psk.modes if psk and psk.offered else (),
        extra_extensions=spec.extra_extensions,
        client_random=client_random,
    )


def _encode_tls13(spec: SessionSpec, rng: random.Random, t: float) -> list[Flow]:
    flows: list[Flow] = []
    psk = spec.psk
    psk_ke = bool(psk and psk.psk_ke and psk.selected)
    client_random = rng.randbytes(32)

    if spec.hrr is None:
        shares = spec.client_key_share_groups
        if shares is None:
            # pure-PSK resumption clients omit key_share entirely
            shares = None if psk_ke else spec.client_offered_groups
        ch = _client_hello_for_spec(spec, rng, shares, client_random)
        flows.append(Flow(CLIENT_TO_SERVER, t, records_for([ch], TLS10)))
        session_id = parse_client_hello(ch[4:]).session_id
        sh = build_server_hello(
            rng=rng,
            cipher_suite=spec.cipher_suite,
            session_id_echo=session_id,
            selected_version=TLS13,
            key_share_group=None if psk_ke else spec.selected_group,
            psk_selected=bool(psk and psk.selected),
        )
        server_flight = records_for([sh]) + record(RECORD_CCS, b"\x01")
        for size in spec.encrypted_flight_records:
            server_flight += record(RECORD_APPDATA, rng.randbytes(size))
        flows.append(Flow(SERVER_TO_CLIENT, t + 0.05, server_flight))
        client_fin = record(RECORD_CCS, b"\x01") + record(RECORD_APPDATA, rng.randbytes(74))
        flows.append(Flow(CLIENT_TO_SERVER, t + 0.1, client_fin))
        return flows

    # HelloRetryRequest exchange
    hrr = spec.hrr
    first_shares = spec.client_key_share_groups or ()
    ch1 = _client_hello_for_spec(spec, rng, first_shares, client_random)
    flows.append(Flow(CLIENT_TO_SERVER, t, records_for([ch1], TLS10)))
    session_id = parse_client_hello(ch1[4:]).session_id
    hrr_msg = build_server_hello(
        rng=rng,
        cipher_suite=spec.cipher_suite,
        session_id_echo=session_id,
        is_hrr=True,
        selected_version=TLS13,
        key_share_group=hrr.requested_group,
    )
    flows.append(Flow(SERVER_TO_CLIENT, t + 0.05, records_for([hrr_msg]) + record(RECORD_CCS, b"\x01")))
    ch2 = _client_hello_for_spec(spec, rng, (hrr.requested_group,), client_random)
    flows.append(Flow(CLIENT_TO_SERVER, t + 0.1, records_for([ch2])))
    sh2 = build_server_hello(
        rng=rng,
        cipher_suite=spec.cipher_suite,
        session_id_echo=session_id,
        selected_version=TLS13,
        key_share_group=spec.selected_group,
    )
    second_flight = records_for([sh2])
    for size in spec.encrypted_flight_records:
        second_flight += record(RECORD_APPDATA, rng.randbytes(size))
    flows.append(Flow(SERVER_TO_CLIENT, t + 0.15, second_flight))
    flows.append(Flow(CLIENT_TO_SERVER, t + 0.2, record(RECORD_CCS, b"\x01") + record(RECORD_APPDATA, rng.randbytes(74))))
    return flows


def _encode_tls12(spec: SessionSpec, rng: random.Random, t: float) -> list[Flow]:
    flows: list[Flow] = []
    kex = TLS12_SUITE_KEX[spec.cipher_suite]
    ch = _client_hello_for_spec(spec, rng, None)
    flows.append(Flow(CLIENT_TO_SERVER, t, records_for([ch], TLS10)))
    session_id = parse_client_hello(ch[4:]).session_id

    sh = build_server_hello(rng=rng, cipher_suite=spec.cipher_suite, session_id_echo=session_id)
    server_msgs = [sh, build_certificate_tls12(spec.tls12_chain)]
    if kex == "ecdhe":
        server_msgs.append(build_server_key_exchange(rng, spec.selected_group))
    if spec.tls12_client_auth:
        server_msgs.append(build_certificate_request_tls12())
    server_msgs.append(_hs(HS_SERVER_HELLO_DONE, b""))
    flows.append(Flow(SERVER_TO_CLIENT, t + 0.05, records_for(server_msgs)))

    client_msgs = []
    if spec.tls12_client_auth:
        client_msgs.append(build_certificate_tls12(spec.tls12_client_chain))
    cke_body = _vec(rng.randbytes(65 if kex == "ecdhe" else 256), 1 if kex == "ecdhe" else 2)
    client_msgs.append(_hs(HS_CLIENT_KEY_EXCHANGE, cke_body))
    client_bytes = records_for(client_msgs)
    client_bytes += record(RECORD_CCS, b"\x01")
    client_bytes += record(RECORD_HANDSHAKE, rng.randbytes(48))  # encrypted Finished
    flows.append(Flow(CLIENT_TO_SERVER, t + 0.1, client_bytes))

    server_done = b""
    if spec.tls12_session_ticket:
        server_done += records_for([_hs(HS_NEW_SESSION_TICKET, _vec(rng.randbytes(96), 2) )])
    server_done += record(RECORD_CCS, b"\x01")
    server_done += record(RECORD_HANDSHAKE, rng.randbytes(48))
    flows.append(Flow(SERVER_TO_CLIENT, t + 0.15, server_done))
    return flows


# -- layout mutations ------------------------------------------------------


@dataclass(frozen=True)
class Mutation:
    kind: str  # fragment | coalesce | segment_split
    max_record_len: int | None = None
    segments: int | None = None


def apply_layout_mutation(transcript: Transcript, mutation: Mutation, seed: int = 0) -> Transcript:
    """Re-layer records/segments without touching handshake content."""
    baseline = decode_transcript(transcript)
    if baseline.completeness is not Completeness.COMPLETE:
        raise MutationError(
            "layout mutations require a completely decodable transcript",
            completeness=baseline.completeness.value,
        )
    if mutation.kind == "fragment":
        if not mutation.max_record_len or mutation.max_record_len < 1:
            raise MutationError("fragment requires max_record_len >= 1")
        return _rerecord(transcript, mutation, seed)
    if mutation.kind == "coalesce":
        return _rerecord(transcript, mutation, seed)
    if mutation.kind == "segment_split":
        if not mutation.segments or mutation.segments < 2:
            raise MutationError("segment_split requires segments >= 2")
        return _segment_split(transcript, mutation.segments, seed)
    raise MutationError(f"unknown mutation kind: {mutation.kind}")


def _rerecord(transcript: Transcript, mutation: Mutation, seed: int) -> Transcript:
    changed = False
    new_flows: list[Flow] = []
    for direction in DIRECTIONS:
        stream = transcript.direction_bytes(direction)
        if not stream:
            continue
        parsed = _parse_records(direction, stream)
        out = bytearray()
        run: list[bytes] = []
        run_version = TLS12

        def flush_run():
            nonlocal changed
            if not run:
                return
            payload = b"".join(run)
            if mutation.kind == "fragment":
                size = mutation.max_record_len
                pieces = [payload[i : i + size] for i in range(0, len(payload), size)]
                if len(pieces) > len(run):
                    changed = True
                for piece in pieces:
                    out.extend(record(RECORD_HANDSHAKE, piece, run_version))
            else:  # coalesce
                starts = _count_message_starts(payload)
                if len(run) > 1 and starts >= 2:
                    changed = True
                    for i in range(0, len(payload), MAX_RECORD_PAYLOAD):
                        out.extend(record(RECORD_HANDSHAKE, payload[i : i + MAX_RECORD_PAYLOAD], run_version))
                else:
                    for piece in run:
                        out.extend(record(RECORD_HANDSHAKE, piece, run_version))
            run.clear()

        allowed = _plaintext_record_indices(parsed)
        for idx, (rtype, version, payload) in enumerate(parsed.records):
            if rtype == RECORD_HANDSHAKE and idx in allowed:
                if not run:
                    run_version = version
                run.append(payload)
            else:
                flush_run()
                out.extend(record(rtype, payload, version))
        flush_run()
        first_ts = next(f.timestamp for f in transcript.flows if f.direction == direction)
        new_flows.append(Flow(direction, first_ts, bytes(out)))
    if not changed:
        raise MutationError(f"{mutation.kind}: no record run eligible, layout unchanged")
    new_flows.sort(key=lambda f: f.timestamp)
    return Transcript(
        artifact_id=f"{transcript.artifact_id}.{mutation.kind}",
        flows=tuple(new_flows),
        declared_truncated=transcript.declared_truncated,
    )


def _count_message_starts(payload: bytes) -> int:
    count, pos = 0, 0
    while pos + 4 <= len(payload):
        length = (payload[pos + 1] << 16) | (payload[pos + 2] << 8) | payload[pos + 3]
        count += 1
        pos += 4 + length
    return count


def _segment_split(transcript: Transcript, segments: int, seed: int) -> Transcript:
    rng = random.Random(_derive_seed(seed, transcript.artifact_id + ".split"))
    new_flows: list[Flow] = []
    changed = False
    for direction in DIRECTIONS:
        stream = transcript.direction_bytes(direction)
        if not stream:
            continue
        if len(stream) < segments:
            raise MutationError("segment_split: direction stream shorter than segment count",
                                direction=direction, length=len(stream))
        cuts = sorted(rng.sample(range(1, len(stream)), segments - 1))
        first_ts = next(f.timestamp for f in transcript.flows if f.direction == direction)
        bounds = [0, *cuts, len(stream)]
        for i in range(segments):
            chunk = stream[bounds[i] : bounds[i + 1]]
            new_flows.append(Flow(direction, first_ts + i * 1e-4, chunk))
        changed = True
    if not changed:
        raise MutationError("segment_split: empty transcript")
    new_flows.sort(key=lambda f: f.timestamp)
    return Transcript(
        artifact_id=f"{transcript.artifact_id}.segsplit{segments}",
        flows=tuple(new_flows),
        declared_truncated=transcript.declared_truncated,
    )


# -- truncation ------------------------------------------------------------


@dataclass(frozen=True)
class Cut:
    kind: str  # byte_offset | message_boundary
    value: int


def handshake_message_boundaries(transcript: Transcript) -> list[dict]:
    """File-order byte offsets just past each plaintext handshake message."""
    out = []
    for direction in DIRECTIONS:
        stream = transcript.direction_bytes(direction)
        parsed = _parse_records(direction, stream)
        # map every buffered handshake payload byte to its direction offset
        payload_bytes = bytearray()
        offsets: list[int] = []
        allowed = _plaintext_record_indices(parsed)
        pos = 0
        for idx, (rtype, _v, payload) in enumerate(parsed.records):
            rec_start = pos
            pos += 5 + len(payload)
            if rtype != RECORD_HANDSHAKE or idx not in allowed:
                continue
            payload_bytes.extend(payload)
            offsets.extend(range(rec_start + 5, rec_start + 5 + len(payload)))
        p = 0
        while p + 4 <= len(payload_bytes):
            msg_type = payload_bytes[p]
            length = (payload_bytes[p + 1] << 16) | (payload_bytes[p + 2] << 8) | payload_bytes[p + 3]
            end = p + 4 + length
            if length > MAX_HANDSHAKE_LEN_DECODE or end > len(payload_bytes):
                break
            dir_off = offsets[end - 1] + 1
            out.append(
                {
                    "direction": direction,
                    "msg_type": msg_type,
                    "direction_offset": dir_off,
                    "file_offset": _direction_to_file_offset(transcript, direction, dir_off),
                }
            )
            p = end
    out.sort(key=lambda b: b["file_offset"])
    return out


def _direction_to_file_offset(transcript: Transcript, direction: str, dir_offset: int) -> int:
    file_pos = 0
    seen = 0
    for flow in transcript.flows:
        if flow.direction == direction:
            if seen + len(flow.data) >= dir_offset:
                return file_pos + (dir_offset - seen)
            seen += len(flow.data)
        file_pos += len(flow.data)
    raise WireError("direction offset beyond stream", direction=direction, offset=dir_offset)


def first_server_hello_boundary(transcript: Transcript) -> dict | None:
    for b in handshake_message_boundaries(transcript):
        if b["direction"] == SERVER_TO_CLIENT and b["msg_type"] == HS_SERVER_HELLO:
            return b
    return None


def truncate_transcript(transcript: Transcript, cut: Cut) -> Transcript:
    """Cut a transcript and mark it declared_truncated."""
    if cut.kind == "message_boundary":
        boundaries = handshake_message_boundaries(transcript)
        if not 0 <= cut.value < len(boundaries):
            raise MutationError("message boundary index out of range",
                                boundaries=len(boundaries), requested=cut.value)
        offset = boundaries[cut.value]["file_offset"]
    elif cut.kind == "byte_offset":
        offset = cut.value
    else:
        raise MutationError(f"unknown cut kind: {cut.kind}")
    total = transcript.total_length()
    if not 0 <= offset <= total:
        raise MutationError("cut offset outside transcript", offset=offset, total=total)

    new_flows: list[Flow] = []
    budget = offset
    for flow in transcript.flows:
        if budget <= 0:
            break
        take = min(budget, len(flow.data))
        if take:
            new_flows.append(Flow(flow.direction, flow.timestamp, flow.data[:take]))
        budget -= take
    return Transcript(
        artifact_id=f"{transcript.artifact_id}.cut{offset}",
        flows=tuple(new_flows),
        declared_truncated=True,
    )
