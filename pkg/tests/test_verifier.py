import pytest

from conftest import make_keypair, signed_broadcast, signed_confirmation
from vabnet.pool import PublicKeyPool
from vabnet.verifier import DedupStore, RejectReason, check

SIG = b"\x00" * 64


@pytest.fixture
def env(alice, bob):
    pool = PublicKeyPool(ttl_ms=60_000)
    pool.observe(alice.public_key, (10.0, 20.0), SIG, now_ms=0.0)
    dedup = DedupStore()
    return alice, bob, pool, dedup


def test_valid_packet_verifies_with_position(env):
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 1_000)
    verdict = check(packet, 1_200.0, pool, dedup, bob.public_key)
    assert verdict.verified
    assert verdict.sender_position == (10.0, 20.0)


def test_valid_confirmation_verifies(env):
    alice, bob, pool, dedup = env
    packet = signed_confirmation(alice, 2, 1_000, b"\xcc" * 32, 7)
    assert check(packet, 1_000.0, pool, dedup, bob.public_key).verified


def test_replay_is_duplicate(env):
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 1_000)
    assert check(packet, 1_000.0, pool, dedup, bob.public_key).verified
    verdict = check(packet, 1_001.0, pool, dedup, bob.public_key)
    assert not verdict.verified
    assert verdict.reason is RejectReason.DUPLICATE


def test_expired_beyond_window(env):
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 1_000)
    assert check(packet, 6_000.0, pool, dedup, bob.public_key).verified  # boundary
    packet2 = signed_broadcast(alice, 2, 1_000)
    verdict = check(packet2, 6_000.1, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.EXPIRED


def test_too_new_beyond_window(env):
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 10_000)
    verdict = check(packet, 4_999.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.TOO_NEW


def test_own_packet_rejected(env):
    alice, bob, pool, dedup = env
    pool.observe(bob.public_key, (0.0, 0.0), SIG, now_ms=0.0)
    packet = signed_broadcast(bob, 1, 1_000)
    verdict = check(packet, 1_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.OWN_PACKET


def test_sender_not_sensed(env):
    alice, bob, pool, dedup = env
    carol = make_keypair("carol")
    packet = signed_broadcast(carol, 1, 1_000)
    verdict = check(packet, 1_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.SENDER_NOT_SENSED


def test_sender_expired_from_pool_is_not_sensed(env):
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 120_000)
    verdict = check(packet, 120_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.SENDER_NOT_SENSED


def test_tampered_payload_is_bad_signature(env):
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 1_000, b"brake")
    packet.payload = b"crash"
    verdict = check(packet, 1_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.BAD_SIGNATURE


def test_signature_from_other_key_is_bad(env):
    alice, bob, pool, dedup = env
    forged = signed_broadcast(bob, 1, 1_000)
    forged.sender_public_key = alice.public_key
    verdict = check(forged, 1_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.BAD_SIGNATURE


def test_checklist_order_duplicate_beats_expired(env):
    # A packet that is both a replay and stale reports Duplicate.
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 1_000)
    assert check(packet, 1_000.0, pool, dedup, bob.public_key).verified
    verdict = check(packet, 50_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.DUPLICATE


def test_checklist_order_expired_beats_bad_signature(env):
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 1_000)
    packet.payload = b"tampered"
    verdict = check(packet, 50_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.EXPIRED


def test_checklist_order_not_sensed_beats_bad_signature(env):
    alice, bob, pool, dedup = env
    carol = make_keypair("carol")
    packet = signed_broadcast(carol, 1, 1_000)
    packet.payload = b"tampered"
    verdict = check(packet, 1_000.0, pool, dedup, bob.public_key)
    assert verdict.reason is RejectReason.SENDER_NOT_SENSED


def test_rejected_packet_not_recorded_as_seen(env):
    # A stale packet must not poison the dedup store.
    alice, bob, pool, dedup = env
    packet = signed_broadcast(alice, 1, 1_000)
    assert check(packet, 50_000.0, pool, dedup, bob.public_key).reason \
        is RejectReason.EXPIRED
    assert not dedup.seen(alice.public_key, 1)


def test_same_id_different_senders_both_pass(env):
    alice, bob, pool, dedup = env
    carol = make_keypair("carol")
    pool.observe(carol.public_key, (0.0, 0.0), SIG, now_ms=0.0)
    assert check(signed_broadcast(alice, 1, 1_000), 1_000.0, pool, dedup,
                 bob.public_key).verified
    assert check(signed_broadcast(carol, 1, 1_000), 1_000.0, pool, dedup,
                 bob.public_key).verified


def test_dedup_prune_retention():
    dedup = DedupStore(retention_ms=10_000)
    dedup.record(b"\xaa" * 32, 1, 0.0)
    dedup.record(b"\xaa" * 32, 2, 8_000.0)
    assert dedup.prune(now_ms=11_000.0) == 1
    assert not dedup.seen(b"\xaa" * 32, 1)
    assert dedup.seen(b"\xaa" * 32, 2)
