import pytest

from pqtlsobs import wire as w
from pqtlsobs.errors import MutationError, WireError

CHAIN = (bytes.fromhex("3082") + b"\x01" * 90,)


def tls13_spec(**overrides) -> w.SessionSpec:
    base = dict(
        artifact_id="t13",
        tls_version=w.TLS13,
        cipher_suite=0x1301,
        client_offered_groups=(0x11EC, 0x001D),
        selected_group=0x11EC,
        sni="pq.example.test",
    )
    base.update(overrides)
    return w.SessionSpec(**base)


def tls12_spec(**overrides) -> w.SessionSpec:
    base = dict(
        artifact_id="t12",
        tls_version=w.TLS12,
        cipher_suite=0xC02F,
        client_offered_groups=(0x001D, 0x0017),
        selected_group=0x001D,
        sni="legacy.example.test",
        tls12_chain=CHAIN,
    )
    base.update(overrides)
    return w.SessionSpec(**base)


class TestDecodeTls13:
    def test_complete_session_fields(self):
        view = w.decode_transcript(w.encode_scenario_transcript(tls13_spec(), seed=1))
        assert view.completeness is w.Completeness.COMPLETE
        ch = view.client_hello
        assert ch.offered_groups == (0x11EC, 0x001D)
        assert ch.key_share_groups == (0x11EC, 0x001D)
        assert ch.sni == "pq.example.test"
        assert w.TLS13 in ch.offered_versions
        sh = view.server_hello
        assert sh.selected_version == w.TLS13
        assert sh.cipher_suite == 0x1301
        assert sh.key_share_group == 0x11EC
        assert sh.key_share_present
        assert not sh.is_hrr
        assert view.negotiation_server_hello is sh

    def test_encrypted_flight_stays_opaque(self):
        view = w.decode_transcript(w.encode_scenario_transcript(tls13_spec(), seed=1))
        types = [m.msg_type for m in view.messages]
        assert types.count(w.HS_CLIENT_HELLO) == 1
        assert types.count(w.HS_SERVER_HELLO) == 1
        assert w.HS_CERTIFICATE not in types
        assert view.server_certificate_chain is None

    def test_grease_codepoints_survive_decode(self):
        spec = tls13_spec(client_offered_groups=(0x2A2A, 0x11EC, 0x001D), selected_group=0x11EC)
        view = w.decode_transcript(w.encode_scenario_transcript(spec, seed=2))
        assert view.client_hello.offered_groups == (0x2A2A, 0x11EC, 0x001D)

    def test_psk_ke_resumption_has_no_key_share(self):
        spec = tls13_spec(
            selected_group=None,
            client_offered_groups=(0x001D,),
            psk=w.PskSpec(psk_ke=True, modes=(0,)),
        )
        view = w.decode_transcript(w.encode_scenario_transcript(spec, seed=3))
        assert view.completeness is w.Completeness.COMPLETE
        assert view.client_hello.psk_offered
        assert view.client_hello.psk_modes == (0,)
        assert view.client_hello.key_share_groups is None
        assert view.server_hello.psk_selected
        assert not view.server_hello.key_share_present
        assert view.server_hello.key_share_group is None


class TestDecodeTls12:
    def test_ecdhe_flight(self):
        view = w.decode_transcript(w.encode_scenario_transcript(tls12_spec(), seed=1))
        assert view.completeness is w.Completeness.COMPLETE
        assert view.server_hello.selected_version is None
        assert view.server_hello.cipher_suite == 0xC02F
        assert view.ske_named_curve == 0x001D
        assert view.server_certificate_chain == CHAIN
        assert view.server_hello_done_seen
        assert not view.certificate_request_seen

    def test_static_rsa_has_no_ske(self):
        spec = tls12_spec(cipher_suite=0x009C, selected_group=None)
        view = w.decode_transcript(w.encode_scenario_transcript(spec, seed=1))
        assert view.completeness is w.Completeness.COMPLETE
        assert view.ske_named_curve is None
        assert view.ske_curve_type is None

    def test_mutual_auth_artifacts(self):
        client_chain = (b"\x30\x82" + b"\x02" * 70,)
        spec = tls12_spec(tls12_client_auth=True, tls12_client_chain=client_chain)
        view = w.decode_transcript(w.encode_scenario_transcript(spec, seed=1))
        assert view.certificate_request_seen
        assert view.client_certificate_chain == client_chain

    def test_encrypted_finished_not_parsed(self):
        view = w.decode_transcript(w.encode_scenario_transcript(tls12_spec(), seed=4))
        assert view.completeness is w.Completeness.COMPLETE
        assert w.HS_FINISHED not in [m.msg_type for m in view.messages]

    def test_session_ticket_seen(self):
        spec = tls12_spec(tls12_session_ticket=True)
        view = w.decode_transcript(w.encode_scenario_transcript(spec, seed=4))
        assert view.session_ticket_seen


class TestHelloRetry:
    def make(self, seed=5):
        spec = tls13_spec(
            client_offered_groups=(0x001D, 0x11EC),
            client_key_share_groups=(0x001D,),
            selected_group=0x11EC,
            hrr=w.HrrSpec(requested_group=0x11EC),
        )
        return w.encode_scenario_transcript(spec, seed=seed)

    def test_both_server_hellos_decoded(self):
        view = w.decode_transcript(self.make())
        assert view.completeness is w.Completeness.COMPLETE
        assert view.server_hello.is_hrr
        assert not view.server_hello.key_share_present
        assert view.server_hello.key_share_group == 0x11EC
        assert view.second_server_hello is not None
        assert not view.second_server_hello.is_hrr
        assert view.second_server_hello.key_share_group == 0x11EC
        assert view.negotiation_server_hello is view.second_server_hello
        assert view.second_client_hello.key_share_groups == (0x11EC,)

    def test_retry_cut_before_second_server_hello(self):
        transcript = self.make()
        boundaries = w.handshake_message_boundaries(transcript)
        idx = max(
            i
            for i, b in enumerate(boundaries)
            if b["direction"] == w.CLIENT_TO_SERVER and b["msg_type"] == w.HS_CLIENT_HELLO
        )
        cut = w.truncate_transcript(transcript, w.Cut("message_boundary", idx))
        view = w.decode_transcript(cut)
        assert view.completeness is w.Completeness.TRUNCATED_POST_SERVERHELLO
        assert view.server_hello.is_hrr
        assert view.second_server_hello is None
        assert view.negotiation_server_hello is None
        assert view.second_client_hello.key_share_groups == (0x11EC,)


class TestCompleteness:
    def test_pre_serverhello_cut(self):
        t = w.encode_scenario_transcript(tls13_spec(), seed=6)
        cut = w.truncate_transcript(t, w.Cut("message_boundary", 0))
        view = w.decode_transcript(cut)
        assert view.completeness is w.Completeness.TRUNCATED_PRE_SERVERHELLO
        assert view.client_hello is not None
        assert view.server_hello is None

    def test_declared_truncated_full_bytes(self):
        t = w.encode_scenario_transcript(tls13_spec(), seed=6)
        cut = w.truncate_transcript(t, w.Cut("byte_offset", t.total_length()))
        view = w.decode_transcript(cut)
        assert view.completeness is w.Completeness.TRUNCATED_POST_SERVERHELLO

    def test_mid_record_cut(self):
        t = w.encode_scenario_transcript(tls13_spec(), seed=6)
        sh_boundary = w.first_server_hello_boundary(t)
        cut = w.truncate_transcript(t, w.Cut("byte_offset", sh_boundary["file_offset"] + 3))
        view = w.decode_transcript(cut)
        assert view.completeness is w.Completeness.TRUNCATED_POST_SERVERHELLO
        assert view.server_hello is not None

    def test_garbage_record_type_is_malformed(self):
        flows = (w.Flow(w.CLIENT_TO_SERVER, 0.0, b"\x99\x03\x03\x00\x05hello"),)
        view = w.decode_transcript(w.Transcript(artifact_id="g", flows=flows))
        assert view.completeness is w.Completeness.MALFORMED
        assert view.errors

    def test_duplicate_extension_is_malformed(self):
        import random

        body = w.build_client_hello(
            rng=random.Random(0),
            legacy_version=w.TLS12,
            cipher_suites=(0x1301,),
            offered_versions=(w.TLS13,),
            offered_groups=(0x001D,),
            key_share_groups=(0x001D,),
            signature_schemes=(0x0403,),
            sni=None,
        )
        inner = body[4:]
        assert w.parse_client_hello(inner).offered_groups == (0x001D,)
        second_groups_ext = b"\x00\x0a\x00\x04\x00\x02\x00\x1d"
        patched = _append_extension(inner, second_groups_ext)
        record = w.record(w.RECORD_HANDSHAKE, b"\x01" + len(patched).to_bytes(3, "big") + patched)
        flows = (w.Flow(w.CLIENT_TO_SERVER, 0.0, record),)
        view = w.decode_transcript(w.Transcript(artifact_id="dup", flows=flows))
        assert view.completeness is w.Completeness.MALFORMED

    def test_empty_transcript_is_pre_serverhello(self):
        view = w.decode_transcript(w.Transcript(artifact_id="empty", flows=()))
        assert view.completeness is w.Completeness.TRUNCATED_PRE_SERVERHELLO


def _append_extension(client_hello_body: bytes, extra: bytes) -> bytes:
    # rebuild the body with extra bytes appended to the extension block
    r = bytearray(client_hello_body)
    ext_len_at = None
    # fixed prefix: version(2) random(32) sid sid_len suites comp
    pos = 2 + 32
    sid_len = r[pos]
    pos += 1 + sid_len
    suites_len = int.from_bytes(r[pos : pos + 2], "big")
    pos += 2 + suites_len
    comp_len = r[pos]
    pos += 1 + comp_len
    ext_len_at = pos
    old = int.from_bytes(r[pos : pos + 2], "big")
    r[pos : pos + 2] = (old + len(extra)).to_bytes(2, "big")
    return bytes(r) + extra


class TestTranscriptContainer:
    def test_json_round_trip(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=8)
        again = w.Transcript.from_json(t.to_json())
        assert again == t
        assert again.digest == t.digest

    def test_digest_mismatch_rejected(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=8)
        payload = t.to_json()
        payload["digest"] = "0" * 64
        with pytest.raises(WireError):
            w.Transcript.from_json(payload)

    def test_timestamps_must_not_decrease(self):
        flows = (
            w.Flow(w.CLIENT_TO_SERVER, 5.0, b"x"),
            w.Flow(w.SERVER_TO_CLIENT, 4.0, b"y"),
        )
        with pytest.raises(WireError):
            w.Transcript(artifact_id="bad", flows=flows)

    def test_encoding_is_seed_deterministic(self):
        a = w.encode_scenario_transcript(tls13_spec(), seed=9)
        b = w.encode_scenario_transcript(tls13_spec(), seed=9)
        c = w.encode_scenario_transcript(tls13_spec(), seed=10)
        assert a.digest == b.digest
        assert a.digest != c.digest


class TestMutations:
    def test_fragment_marks_fragmented(self):
        t = w.encode_scenario_transcript(tls13_spec(), seed=11)
        base = w.decode_transcript(t)
        mutated = w.apply_layout_mutation(t, w.Mutation("fragment", max_record_len=48), seed=1)
        view = w.decode_transcript(mutated)
        assert view.fragmented
        assert view.completeness is w.Completeness.COMPLETE
        assert view.semantic_view() == base.semantic_view()

    def test_coalesce_marks_coalesced(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=11)
        base = w.decode_transcript(t)
        mutated = w.apply_layout_mutation(t, w.Mutation("coalesce"), seed=1)
        view = w.decode_transcript(mutated)
        assert view.coalesced
        assert view.semantic_view() == base.semantic_view()

    def test_segment_split_is_layout_invisible(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=11)
        base = w.decode_transcript(t)
        mutated = w.apply_layout_mutation(t, w.Mutation("segment_split", segments=4), seed=1)
        assert len(mutated.flows) > len(t.flows)
        assert w.decode_transcript(mutated).semantic_view() == base.semantic_view()

    def test_coalesce_refuses_single_message_runs(self):
        t = w.encode_scenario_transcript(tls13_spec(), seed=11)
        with pytest.raises(MutationError):
            w.apply_layout_mutation(t, w.Mutation("coalesce"), seed=1)

    def test_fragment_refuses_when_no_effect(self):
        t = w.encode_scenario_transcript(tls13_spec(), seed=11)
        with pytest.raises(MutationError):
            w.apply_layout_mutation(t, w.Mutation("fragment", max_record_len=w.MAX_RECORD_PAYLOAD), seed=1)

    def test_mutating_truncated_input_refused(self):
        t = w.encode_scenario_transcript(tls13_spec(), seed=11)
        cut = w.truncate_transcript(t, w.Cut("message_boundary", 0))
        with pytest.raises(MutationError):
            w.apply_layout_mutation(cut, w.Mutation("fragment", max_record_len=32), seed=1)

    def test_mutation_never_touches_encrypted_records(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=12)
        mutated = w.apply_layout_mutation(t, w.Mutation("fragment", max_record_len=32), seed=1)
        view = w.decode_transcript(mutated)
        assert view.completeness is w.Completeness.COMPLETE
        assert w.HS_FINISHED not in [m.msg_type for m in view.messages]


class TestBoundariesAndCuts:
    def test_boundaries_are_file_ordered(self):
        t = w.encode_scenario_transcript(tls12_spec(tls12_client_auth=True, tls12_client_chain=CHAIN), seed=13)
        bounds = w.handshake_message_boundaries(t)
        offsets = [b["file_offset"] for b in bounds]
        assert offsets == sorted(offsets)
        assert bounds[0]["msg_type"] == w.HS_CLIENT_HELLO

    def test_every_boundary_cut_classifies(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=13)
        for i in range(len(w.handshake_message_boundaries(t))):
            cut = w.truncate_transcript(t, w.Cut("message_boundary", i))
            view = w.decode_transcript(cut)
            assert view.completeness in (
                w.Completeness.TRUNCATED_PRE_SERVERHELLO,
                w.Completeness.TRUNCATED_POST_SERVERHELLO,
            )

    def test_boundary_index_out_of_range(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=13)
        with pytest.raises(MutationError):
            w.truncate_transcript(t, w.Cut("message_boundary", 99))

    def test_byte_offset_out_of_range(self):
        t = w.encode_scenario_transcript(tls12_spec(), seed=13)
        with pytest.raises(MutationError):
            w.truncate_transcript(t, w.Cut("byte_offset", t.total_length() + 1))


class TestSpecValidation:
    def test_tls12_requires_chain(self):
        with pytest.raises(WireError):
            tls12_spec(tls12_chain=())

    def test_tls12_rejects_13_suite(self):
        with pytest.raises(WireError):
            tls12_spec(cipher_suite=0x1301)

    def test_tls13_rejects_12_suite(self):
        with pytest.raises(WireError):
            tls13_spec(cipher_suite=0xC02F)

    def test_selected_group_must_be_offered(self):
        with pytest.raises(WireError):
            tls13_spec(selected_group=0x0018)

    def test_static_rsa_rejects_group(self):
        with pytest.raises(WireError):
            tls12_spec(cipher_suite=0x009C, selected_group=0x001D)

    def test_psk_ke_rejects_group(self):
        with pytest.raises(WireError):
            tls13_spec(psk=w.PskSpec(psk_ke=True), selected_group=0x11EC)
