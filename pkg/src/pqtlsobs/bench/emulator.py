"""Emulated TLS endpoints for probe exercises.

An EmulatedEndpoint is a real TCP listener speaking the same synthetic
handshake dialect the transcript codec understands. Negotiation behavior
lives in the pure select_plan function, which the live server and the
offline synth_probe_result share, so a probe against a listener and a
synthesized probe against the same config must agree field for field.

After a completed handshake the endpoint appends one application-data
record carrying a JSON report (certificate request, tickets, resumption).
That record plays the role of the session summary a real TLS library
hands to its application; a passive observer has no counterpart for it.
"""

from __future__ import annotations

import json
import random
import socket
import struct
import threading
import time
from dataclasses import dataclass

from .. import wire
from ..registry import RegistryBundle, default_registry
from ..surfaces import (
    REPORT_MAGIC,
    ProbeProfile,
    ProbeResult,
    ProbeTarget,
    check_probe_guardrails,
    result_from_exchange,
)

ALERT_HANDSHAKE_FAILURE = 40
ALERT_PROTOCOL_VERSION = 70

PSK_MODE_KE = 0
PSK_MODE_DHE_KE = 1


@dataclass(frozen=True)
class EndpointConfig:
    """Declarative behavior of one emulated endpoint."""

    name: str
    tls_versions: tuple[int, ...] = (wire.TLS13, wire.TLS12)
    supported_groups: tuple[int, ...] = (0x001D,)
    cipher_suites_tls13: tuple[int, ...] = (0x1301, 0x1302)
    cipher_suites_tls12: tuple[int, ...] = (0xC02F, 0xC02B, 0x009C)
    chain: tuple[bytes, ...] = ()
    client_auth: bool = False
    session_tickets: int = 0
    accept_resumption: bool = False
    server_preference: bool = False
    failure: str | None = None  # "timeout" | "reset" | "alert:<code>"


@dataclass(frozen=True)
class Plan:
    kind: str  # tls13 | tls12 | hrr | alert | timeout | reset
    version: int | None = None
    cipher_suite: int | None = None
    group: int | None = None
    alert_code: int | None = None
    psk_selected: bool = False
    certificate_request: bool = False
    session_tickets: int = 0
    resumption_accepted: bool = False


def select_plan(config: EndpointConfig, ch: wire.ClientHelloView) -> Plan:
    """Pure negotiation: what this endpoint does with this ClientHello."""
    if config.failure == "timeout":
        return Plan("timeout")
    if config.failure == "reset":
        return Plan("reset")
    if config.failure and config.failure.startswith("alert:"):
        return Plan("alert", alert_code=int(config.failure.split(":", 1)[1]))

    offers_13 = ch.offered_versions is not None and wire.TLS13 in ch.offered_versions
    if wire.TLS13 in config.tls_versions and offers_13:
        return _plan_tls13(config, ch)
    if wire.TLS12 in config.tls_versions:
        return _plan_tls12(config, ch)
    return Plan("alert", alert_code=ALERT_PROTOCOL_VERSION)


def _pick(server_order, client_order, server_preference):
    first, second = (server_order, client_order) if server_preference else (client_order, server_order)
    for item in first:
        if item in second:
            return item
    return None


def _plan_tls13(config: EndpointConfig, ch: wire.ClientHelloView) -> Plan:
    suite = _pick(config.cipher_suites_tls13, ch.cipher_suites, True)
    if suite is None:
        return Plan("alert", alert_code=ALERT_HANDSHAKE_FAILURE)

    resuming = ch.psk_offered and config.accept_resumption
    pure_psk = resuming and PSK_MODE_KE in (ch.psk_modes or ()) and not ch.key_share_groups
    if pure_psk:
        return Plan(
            "tls13",
            version=wire.TLS13,
            cipher_suite=suite,
            group=None,
            psk_selected=True,
            certificate_request=config.client_auth,
            session_tickets=config.session_tickets,
            resumption_accepted=True,
        )

    offered = ch.offered_groups or ()
    group = _pick(config.supported_groups, offered, config.server_preference)
    if group is None:
        return Plan("alert", alert_code=ALERT_HANDSHAKE_FAILURE)
    if group not in (ch.key_share_groups or ()):
        return Plan("hrr", version=wire.TLS13, cipher_suite=suite, group=group)
    return Plan(
        "tls13",
        version=wire.TLS13,
        cipher_suite=suite,
        group=group,
        psk_selected=bool(resuming),
        certificate_request=config.client_auth,
        session_tickets=config.session_tickets,
        resumption_accepted=bool(resuming),
    )


def _plan_tls12(config: EndpointConfig, ch: wire.ClientHelloView) -> Plan:
    for suite in config.cipher_suites_tls12:
        if suite not in ch.cipher_suites:
            continue
        kex = wire.TLS12_SUITE_KEX.get(suite)
        if kex == "ecdhe":
            group = _pick(config.supported_groups, ch.offered_groups or (), config.server_preference)
            if group is None:
                continue
            return Plan(
                "tls12",
                version=wire.TLS12,
                cipher_suite=suite,
                group=group,
                certificate_request=config.client_auth,
                session_tickets=config.session_tickets,
            )
        return Plan(
            "tls12",
            version=wire.TLS12,
            cipher_suite=suite,
            group=None,
            certificate_request=config.client_auth,
            session_tickets=config.session_tickets,
        )
    return Plan("alert", alert_code=ALERT_HANDSHAKE_FAILURE)


def _hs_msg(msg_type: int, body: bytes = b"") -> bytes:
    return bytes((msg_type,)) + len(body).to_bytes(3, "big") + body


def _report_record(config: EndpointConfig, plan: Plan) -> bytes:
    report = {
        "endpoint": config.name,
        "certificate_request": plan.certificate_request,
        "session_tickets_issued": plan.session_tickets,
        "resumption_accepted": plan.resumption_accepted,
    }
    payload = REPORT_MAGIC + json.dumps(report, sort_keys=True).encode("utf-8")
    return wire.record(wire.RECORD_APPDATA, payload)


def flight_bytes(config: EndpointConfig, plan: Plan, ch: wire.ClientHelloView, rng: random.Random) -> bytes:
    """Server bytes for a concluded negotiation, report record included."""
    if plan.kind == "tls13":
        sh = wire.build_server_hello(
            rng=rng,
            cipher_suite=plan.cipher_suite,
            session_id_echo=ch.session_id,
            selected_version=wire.TLS13,
            key_share_group=plan.group,
            psk_selected=plan.psk_selected,
        )
        out = wire.records_for([sh])
        out += wire.record(wire.RECORD_CCS, b"\x01")
        out += wire.record(wire.RECORD_APPDATA, rng.randbytes(640))
        out += wire.record(wire.RECORD_APPDATA, rng.randbytes(320))
        return out + _report_record(config, plan)

    if plan.kind != "tls12":
        raise ValueError(f"no flight for plan kind {plan.kind!r}")
    sh = wire.build_server_hello(
        rng=rng,
        cipher_suite=plan.cipher_suite,
        session_id_echo=ch.session_id,
    )
    msgs = [sh, wire.build_certificate_tls12(config.chain)]
    if plan.group is not None:
        msgs.append(wire.build_server_key_exchange(rng, plan.group))
    if plan.certificate_request:
        msgs.append(wire.build_certificate_request_tls12())
    msgs.append(_hs_msg(wire.HS_SERVER_HELLO_DONE))
    out = wire.records_for(msgs)
    out += wire.record(wire.RECORD_CCS, b"\x01")
    out += wire.record(wire.RECORD_HANDSHAKE, rng.randbytes(48))
    return out + _report_record(config, plan)


def retry_bytes(plan: Plan, ch: wire.ClientHelloView, rng: random.Random) -> bytes:
    hrr = wire.build_server_hello(
        rng=rng,
        cipher_suite=plan.cipher_suite,
        session_id_echo=ch.session_id,
        is_hrr=True,
        selected_version=wire.TLS13,
        key_share_group=plan.group,
    )
    return wire.records_for([hrr]) + wire.record(wire.RECORD_CCS, b"\x01")


def _handshake_messages(buf: bytes) -> list[bytes]:
    """Complete handshake messages reassembled from complete records."""
    records, _ = wire.split_records(buf)
    stream = b"".join(p for t, _v, p in records if t == wire.RECORD_HANDSHAKE)
    msgs = []
    pos = 0
    while pos + 4 <= len(stream):
        length = int.from_bytes(stream[pos + 1 : pos + 4], "big")
        end = pos + 4 + length
        if end > len(stream):
            break
        msgs.append(stream[pos:end])
        pos = end
    return msgs


class EmulatedEndpoint:
    """TCP listener applying an EndpointConfig to each connection.

    Context-manager lifecycle; every concluded exchange is appended to
    handshake_log so tests can assert on what the endpoint actually did.
    """

    def __init__(self, config: EndpointConfig, host: str = "127.0.0.1", port: int = 0, seed: int = 0):
        self.config = config
        self.host = host
        self.port = port
        self.seed = seed
        self.handshake_log: list[dict] = []
        self._sock: socket.socket | None = None
        self._thread: threading.Thread | None = None
        self._stopping = threading.Event()
        self._conn_counter = 0

    @property
    def address(self) -> tuple[str, int]:
        return self.host, self.port

    def start(self) -> "EmulatedEndpoint":
        family = socket.AF_INET6 if ":" in self.host else socket.AF_INET
        self._sock = socket.socket(family, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((self.host, self.port))
        self._sock.listen(16)
        self.port = self._sock.getsockname()[1]
        self._sock.settimeout(0.2)
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stopping.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
        if self._sock is not None:
            self._sock.close()

    def __enter__(self) -> "EmulatedEndpoint":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _serve(self) -> None:
        while not self._stopping.is_set():
            try:
                conn, _addr = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            self._conn_counter += 1
            rng = random.Random((self.seed << 20) ^ self._conn_counter)
            handler = threading.Thread(target=self._handle, args=(conn, rng), daemon=True)
            handler.start()

    def _handle(self, conn: socket.socket, rng: random.Random) -> None:
        try:
            conn.settimeout(10.0)
            buf = self._read_until_client_hello(conn, b"", want=1)
            chs = [m for m in _handshake_messages(buf) if m and m[0] == wire.HS_CLIENT_HELLO]
            if not chs:
                return
            ch = wire.parse_client_hello(chs[0][4:])
            plan = select_plan(self.config, ch)
            self.handshake_log.append(
                {"observed_at": time.time(), "plan": plan.kind, "group": plan.group, "sni": ch.sni}
            )
            if plan.kind == "timeout":
                self._drain(conn)
                return
            if plan.kind == "reset":
                conn.setsockopt(socket.SOL_SOCKET, socket.SO_LINGER, struct.pack("ii", 1, 0))
                return
            if plan.kind == "alert":
                conn.sendall(wire.record(wire.RECORD_ALERT, bytes((2, plan.alert_code))))
                return
            if plan.kind == "hrr":
                conn.sendall(retry_bytes(plan, ch, rng))
                buf = self._read_until_client_hello(conn, buf, want=2)
                chs = [m for m in _handshake_messages(buf) if m and m[0] == wire.HS_CLIENT_HELLO]
                if len(chs) < 2:
                    return
                ch = wire.parse_client_hello(chs[1][4:])
                plan = select_plan(self.config, ch)
                if plan.kind not in ("tls13", "tls12"):
                    conn.sendall(
                        wire.record(wire.RECORD_ALERT, bytes((2, plan.alert_code or ALERT_HANDSHAKE_FAILURE)))
                    )
                    return
            conn.sendall(flight_bytes(self.config, plan, ch, rng))
            self._drain(conn)
        except OSError:
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass

    def _read_until_client_hello(self, conn: socket.socket, buf: bytes, want: int) -> bytes:
        while True:
            chs = [m for m in _handshake_messages(buf) if m and m[0] == wire.HS_CLIENT_HELLO]
            if len(chs) >= want:
                return buf
            try:
                chunk = conn.recv(65536)
            except socket.timeout:
                return buf
            if not chunk:
                return buf
            buf += chunk

    def _drain(self, conn: socket.socket) -> None:
        try:
            while conn.recv(65536):
                pass
        except OSError:
            pass


def synth_exchange(
    config: EndpointConfig,
    profile: ProbeProfile,
    *,
    sni: str | None = None,
    seed: int = 0,
) -> tuple[str, bytes, bytes, int | None, str | None]:
    """One offline exchange: (outcome, client_payload, server_bytes, alert_code, detail).

    The byte streams are exactly what a live probe against the same config
    would put on the wire, so they can double as a passive capture.
    """
    rng = random.Random(seed)
    ch_bytes = profile.client_hello_bytes(rng, sni)
    record_version = wire.TLS12 if profile.offered_versions is None else wire.TLS10
    client_payload = wire.records_for([ch_bytes], record_version)
    ch = wire.parse_client_hello(ch_bytes[4:])
    plan = select_plan(config, ch)

    server_bytes = b""
    outcome = "completed"
    alert_code = None
    detail = None
    if plan.kind == "timeout":
        outcome, detail = "timeout", "read timeout"
    elif plan.kind == "reset":
        outcome, detail = "connection_reset", "connection reset by peer"
    elif plan.kind == "alert":
        outcome, alert_code = "alert", plan.alert_code
        detail = f"fatal alert {plan.alert_code}"
        server_bytes = wire.record(wire.RECORD_ALERT, bytes((2, plan.alert_code)))
    elif plan.kind == "hrr":
        server_bytes = retry_bytes(plan, ch, rng)
        ch2_bytes = wire.build_client_hello(
            rng=rng,
            legacy_version=wire.TLS12,
            cipher_suites=profile.cipher_suites,
            offered_versions=profile.offered_versions,
            offered_groups=profile.offered_groups,
            key_share_groups=(plan.group,),
            signature_schemes=(0x0804, 0x0403, 0x0401),
            sni=sni,
        )
        client_payload += wire.records_for([ch2_bytes])
        ch2 = wire.parse_client_hello(ch2_bytes[4:])
        plan = select_plan(config, ch2)
        if plan.kind in ("tls13", "tls12"):
            server_bytes += flight_bytes(config, plan, ch2, rng)
        else:
            outcome, alert_code = "alert", plan.alert_code or ALERT_HANDSHAKE_FAILURE
            detail = f"fatal alert {alert_code}"
            server_bytes += wire.record(wire.RECORD_ALERT, bytes((2, alert_code)))
    else:
        server_bytes = flight_bytes(config, plan, ch, rng)

    return outcome, client_payload, server_bytes, alert_code, detail


def synth_probe_result(
    config: EndpointConfig,
    profile: ProbeProfile,
    *,
    sni: str | None = None,
    host: str = "192.0.2.1",
    port: int = 443,
    tier: str = "public_blind",
    observed_at: float = 0.0,
    seed: int = 0,
    registry: RegistryBundle | None = None,
) -> ProbeResult:
    """Probe outcome against a config without any network round trip.

    Shares select_plan and the flight builders with the live listener, so
    it predicts exactly what run_probe would return against that config.
    """
    registry = registry or default_registry()
    target = ProbeTarget(host=host, port=port, sni=sni, tier=tier)
    check_probe_guardrails(target, profile)

    outcome, client_payload, server_bytes, alert_code, detail = synth_exchange(
        config, profile, sni=sni, seed=seed
    )
    return result_from_exchange(
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
