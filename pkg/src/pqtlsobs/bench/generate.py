"""Materialise catalog scenarios into transcripts and evidence bundles."""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources

from .. import wire
from ..engine import MODE_B1, MODE_B2, MODE_B3, EvidenceBundle
from ..errors import PqtlsError
from ..registry import RegistryBundle
from ..surfaces import build_passive_observation, builtin_profiles, parse_chain_observation
from .catalog import CHAIN_FIXTURES, T_BASE, Scenario
from .emulator import EndpointConfig, synth_probe_result


class GenerationError(PqtlsError):
    """A catalog entry could not be materialised."""


@lru_cache(maxsize=None)
def _cert_bytes(name: str) -> bytes:
    return resources.files("pqtlsobs.data").joinpath("certs").joinpath(name).read_bytes()


def chain_bytes(fixture: str) -> tuple[bytes, ...]:
    try:
        names = CHAIN_FIXTURES[fixture]
    except KeyError:
        raise GenerationError(f"unknown chain fixture: {fixture}") from None
    return tuple(_cert_bytes(n) for n in names)


def _derive_seed(*parts: object) -> int:
    h = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "big")


def endpoint_config(scn: Scenario, which: str = "current") -> EndpointConfig:
    if which == "current":
        raw = scn.endpoint
    elif which == "drifted":
        if scn.endpoint_after is None:
            raise GenerationError(f"{scn.scenario_id} has no drifted endpoint behaviour")
        raw = scn.endpoint_after
    else:
        raise GenerationError(f"unknown endpoint selector: {which}")
    kwargs = dict(raw)
    if "chain" in kwargs:
        kwargs["chain"] = chain_bytes(kwargs["chain"])
    return EndpointConfig(name=f"{scn.scenario_id}:{which}", **kwargs)


def scenario_transcript(scn: Scenario, seed: int = 0) -> wire.Transcript:
    """Encode, mutate and cut one scenario's capture."""
    session = dict(scn.session)
    for key in ("tls12_chain", "tls12_client_chain"):
        if key in session:
            session[key] = chain_bytes(session[key])
    spec = wire.SessionSpec(artifact_id=scn.scenario_id, **session)
    transcript = wire.encode_scenario_transcript(spec, seed=seed)
    for i, mutation in enumerate(scn.mutations):
        transcript = wire.apply_layout_mutation(
            transcript, mutation, seed=_derive_seed(seed, scn.scenario_id, "mutation", i)
        )
    if scn.cut is not None:
        offset = resolve_cut(transcript, scn.cut)
        cut = wire.truncate_transcript(transcript, wire.Cut("byte_offset", offset))
        # keep the scenario id stable across the cut rename
        transcript = wire.Transcript(
            artifact_id=scn.scenario_id, flows=cut.flows, declared_truncated=True
        )
    return transcript


def _dir_to_file_offset(transcript: wire.Transcript, direction: str, dir_offset: int) -> int:
    file_pos = 0
    seen = 0
    for flow in transcript.flows:
        if flow.direction == direction:
            if seen + len(flow.data) >= dir_offset:
                return file_pos + (dir_offset - seen)
            seen += len(flow.data)
        file_pos += len(flow.data)
    raise GenerationError(f"direction offset {dir_offset} beyond {direction} stream")


def _server_record_ends(transcript: wire.Transcript) -> list[int]:
    stream = transcript.direction_bytes(wire.SERVER_TO_CLIENT)
    records, leftover = wire.split_records(stream)
    if leftover:
        raise GenerationError("cut specs expect whole records before the cut")
    ends = []
    pos = 0
    for _rtype, _version, payload in records:
        pos += 5 + len(payload)
        ends.append(pos)
    return ends


def resolve_cut(transcript: wire.Transcript, spec) -> int:
    """Resolve a declarative cut spec to a file byte offset."""
    kind = spec["kind"]
    if kind == "pre_server_hello":
        file_pos = 0
        for flow in transcript.flows:
            if flow.direction == wire.SERVER_TO_CLIENT:
                return file_pos
            file_pos += len(flow.data)
        raise GenerationError("no server bytes to cut before")
    if kind in ("after_server_record", "mid_server_record"):
        ends = _server_record_ends(transcript)
        index = spec["index"]
        if not 0 <= index < len(ends):
            raise GenerationError(f"server record index {index} out of range ({len(ends)})")
        dir_off = ends[index] - (spec["back"] if kind == "mid_server_record" else 0)
        return _dir_to_file_offset(transcript, wire.SERVER_TO_CLIENT, dir_off)
    boundaries = [
        b
        for b in wire.handshake_message_boundaries(transcript)
        if b["direction"] == spec["direction"] and b["msg_type"] == spec["msg_type"]
    ]
    if kind == "message_boundary":
        if not boundaries:
            raise GenerationError("no matching message boundary")
        return boundaries[spec["occurrence"]]["file_offset"]
    if kind == "within_message":
        # start of the target message = end boundary of its predecessor in
        # the same direction; a small delta lands strictly inside the target
        same_dir = [
            b
            for b in wire.handshake_message_boundaries(transcript)
            if b["direction"] == spec["direction"]
        ]
        for i, b in enumerate(same_dir):
            if b["msg_type"] == spec["msg_type"]:
                if i == 0:
                    raise GenerationError("target message has no predecessor")
                start = same_dir[i - 1]["direction_offset"]
                return _dir_to_file_offset(
                    transcript, spec["direction"], start + spec["delta"]
                )
        raise GenerationError("target message not found")
    raise GenerationError(f"unknown cut kind: {kind}")


def scenario_bundle(
    scn: Scenario,
    *,
    registry: RegistryBundle | None = None,
    seed: int = 0,
) -> EvidenceBundle:
    """Full (B3) evidence for one scenario; trim with bundle_for_mode."""
    transcript = scenario_transcript(scn, seed=seed)
    passive = build_passive_observation(transcript, registry=registry)
    profiles = builtin_profiles()
    probes = []
    for i, ps in enumerate(scn.probes):
        config = endpoint_config(scn, ps.endpoint)
        probes.append(
            synth_probe_result(
                config,
                profiles[ps.profile],
                sni=scn.session.get("sni"),
                host=scn.probe_host,
                observed_at=T_BASE + ps.offset_s,
                seed=_derive_seed(seed, scn.scenario_id, "probe", i, ps.profile),
                registry=registry,
            )
        )
    chains = tuple(
        parse_chain_observation(
            chain_bytes(cs.chain),
            origin=cs.origin,
            observed_at=T_BASE + cs.offset_s,
            registry=registry,
        )
        for cs in scn.artifact_chains
    )
    return EvidenceBundle(passive=passive, probes=tuple(probes), chains=chains)


def bundle_for_mode(bundle: EvidenceBundle, mode: str) -> EvidenceBundle:
    if mode == MODE_B1:
        return EvidenceBundle(passive=bundle.passive)
    if mode == MODE_B2:
        return EvidenceBundle(passive=bundle.passive, probes=bundle.probes)
    if mode == MODE_B3:
        return bundle
    raise GenerationError(f"unknown mode: {mode}")
