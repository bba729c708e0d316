"""Seeded random session-spec generator shared by property and acceptance tests."""

from __future__ import annotations

import random

from pqtlsobs import wire as w

KNOWN_GROUPS = [0x001D, 0x0017, 0x0018, 0x001E, 0x11EC, 0x11EB, 0x6399, 0x0201]
GREASE_GROUPS = [0x2A2A, 0x6A6A, 0xDADA]
TLS12_SUITES = list(w.TLS12_SUITE_KEX)
SNI_POOL = ["edge.example.test", "pq.example.test", None, "v6.example.test", "api.example.test"]


def random_session_spec(rng: random.Random, artifact_id: str) -> w.SessionSpec:
    if rng.random() < 0.4:
        return _random_tls12_spec(rng, artifact_id)
    return _random_tls13_spec(rng, artifact_id)


def _random_groups(rng: random.Random) -> list[int]:
    groups = rng.sample(KNOWN_GROUPS, rng.randint(1, 4))
    if rng.random() < 0.3:
        groups.insert(rng.randrange(len(groups) + 1), rng.choice(GREASE_GROUPS))
    return groups


def _random_tls13_spec(rng: random.Random, artifact_id: str) -> w.SessionSpec:
    groups = _random_groups(rng)
    selectable = [g for g in groups if g not in GREASE_GROUPS]
    selected = rng.choice(selectable)
    hrr = None
    shares = None
    if rng.random() < 0.2 and len(selectable) >= 2:
        first_share = rng.choice([g for g in selectable if g != selected])
        shares = (first_share,)
        hrr = w.HrrSpec(requested_group=selected)
    psk = None
    if hrr is None and rng.random() < 0.2:
        if rng.random() < 0.5:
            psk = w.PskSpec(psk_ke=True, modes=(0,))
            selected = None
        else:
            psk = w.PskSpec(psk_ke=False, modes=(0, 1))
    return w.SessionSpec(
        artifact_id=artifact_id,
        tls_version=w.TLS13,
        cipher_suite=rng.choice(w.TLS13_SUITES),
        client_offered_groups=tuple(groups),
        client_key_share_groups=shares,
        selected_group=selected,
        sni=rng.choice(SNI_POOL),
        hrr=hrr,
        psk=psk,
        encrypted_flight_records=tuple(rng.randint(100, 900) for _ in range(rng.randint(1, 3))),
    )


def _random_tls12_spec(rng: random.Random, artifact_id: str) -> w.SessionSpec:
    suite = rng.choice(TLS12_SUITES)
    kex = w.TLS12_SUITE_KEX[suite]
    groups = _random_groups(rng)
    ecdhe_selectable = [g for g in groups if g in (0x001D, 0x0017, 0x0018)]
    if kex == "ecdhe" and not ecdhe_selectable:
        groups.append(0x001D)
        ecdhe_selectable = [0x001D]
    client_auth = rng.random() < 0.25
    chain_len = rng.randint(1, 3)
    return w.SessionSpec(
        artifact_id=artifact_id,
        tls_version=w.TLS12,
        cipher_suite=suite,
        client_offered_groups=tuple(groups),
        selected_group=rng.choice(ecdhe_selectable) if kex == "ecdhe" else None,
        sni=rng.choice(SNI_POOL),
        tls12_chain=tuple(rng.randbytes(rng.randint(60, 300)) for _ in range(chain_len)),
        tls12_client_auth=client_auth,
        tls12_client_chain=(rng.randbytes(120),) if client_auth else (),
        tls12_session_ticket=rng.random() < 0.3,
    )


def random_mutation(rng: random.Random, spec: w.SessionSpec) -> w.Mutation:
    kinds = ["fragment", "segment_split"]
    if spec.tls_version == w.TLS12:
        kinds.append("coalesce")
    kind = rng.choice(kinds)
    if kind == "fragment":
        return w.Mutation("fragment", max_record_len=rng.randint(16, 64))
    if kind == "segment_split":
        return w.Mutation("segment_split", segments=rng.randint(2, 6))
    return w.Mutation("coalesce")
