import random

from hypothesis import given, settings
from hypothesis import strategies as st

from pqtlsobs import wire as w
from pqtlsobs.errors import MutationError

from _specgen import random_mutation, random_session_spec

settings.register_profile("wire", deadline=None, max_examples=120)
settings.load_profile("wire")


@given(st.integers(min_value=0, max_value=2**32))
def test_encode_decode_round_trip(seed):
    rng = random.Random(seed)
    spec = random_session_spec(rng, f"prop-{seed}")
    transcript = w.encode_scenario_transcript(spec, seed=seed)
    view = w.decode_transcript(transcript)

    assert view.completeness is w.Completeness.COMPLETE
    ch = view.client_hello
    assert ch is not None
    assert ch.offered_groups == tuple(spec.client_offered_groups)
    assert ch.sni == spec.sni
    sh = view.negotiation_server_hello
    assert sh is not None
    assert sh.cipher_suite == spec.cipher_suite
    if spec.tls_version == w.TLS13:
        assert sh.selected_version == w.TLS13
        if spec.psk is not None and spec.psk.psk_ke:
            assert not sh.key_share_present
            assert sh.psk_selected
        else:
            assert sh.key_share_group == spec.selected_group
    else:
        assert sh.selected_version is None
        if w.TLS12_SUITE_KEX[spec.cipher_suite] == "ecdhe":
            assert view.ske_named_curve == spec.selected_group
        else:
            assert view.ske_named_curve is None
        assert view.server_certificate_chain == spec.tls12_chain
        assert view.certificate_request_seen == spec.tls12_client_auth


@given(st.integers(min_value=0, max_value=2**32))
def test_layout_mutations_preserve_content(seed):
    rng = random.Random(seed)
    spec = random_session_spec(rng, f"mut-{seed}")
    transcript = w.encode_scenario_transcript(spec, seed=seed)
    baseline = w.decode_transcript(transcript).semantic_view()
    mutation = random_mutation(rng, spec)
    try:
        mutated = w.apply_layout_mutation(transcript, mutation, seed=seed)
    except MutationError:
        # a generated layout can be ineligible (e.g. nothing to re-chunk)
        return
    assert mutated.digest != transcript.digest or mutation.kind == "segment_split"
    assert w.decode_transcript(mutated).semantic_view() == baseline


@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=0, max_value=10**6))
def test_truncation_always_classifies(seed, cut_seed):
    rng = random.Random(seed)
    spec = random_session_spec(rng, f"cut-{seed}")
    transcript = w.encode_scenario_transcript(spec, seed=seed)
    offset = cut_seed % (transcript.total_length() + 1)
    view = w.decode_transcript(w.truncate_transcript(transcript, w.Cut("byte_offset", offset)))
    assert view.completeness in (
        w.Completeness.TRUNCATED_PRE_SERVERHELLO,
        w.Completeness.TRUNCATED_POST_SERVERHELLO,
        w.Completeness.MALFORMED,
        w.Completeness.COMPLETE,
    )
    # a file-order prefix of a well-formed capture is never malformed
    assert view.completeness is not w.Completeness.MALFORMED


@given(st.binary(max_size=600), st.binary(max_size=600))
def test_decode_is_total_on_arbitrary_bytes(client_bytes, server_bytes):
    flows = (
        w.Flow(w.CLIENT_TO_SERVER, 0.0, client_bytes),
        w.Flow(w.SERVER_TO_CLIENT, 1.0, server_bytes),
    )
    view = w.decode_transcript(w.Transcript(artifact_id="fuzz", flows=flows))
    assert isinstance(view.completeness, w.Completeness)


@given(st.integers(min_value=0, max_value=2**32))
def test_json_serialization_round_trips(seed):
    rng = random.Random(seed)
    spec = random_session_spec(rng, f"json-{seed}")
    transcript = w.encode_scenario_transcript(spec, seed=seed)
    assert w.Transcript.from_json(transcript.to_json()) == transcript


@given(st.integers(min_value=0, max_value=2**32))
def test_boundary_cuts_never_raise(seed):
    rng = random.Random(seed)
    spec = random_session_spec(rng, f"bnd-{seed}")
    transcript = w.encode_scenario_transcript(spec, seed=seed)
    boundaries = w.handshake_message_boundaries(transcript)
    assert boundaries, "well-formed sessions expose at least one boundary"
    for i in range(len(boundaries)):
        cut = w.truncate_transcript(transcript, w.Cut("message_boundary", i))
        view = w.decode_transcript(cut)
        assert view.completeness is not w.Completeness.MALFORMED
