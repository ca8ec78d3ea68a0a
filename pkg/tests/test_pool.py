import pytest

from vabnet.pool import PublicKeyPool

KEY_A = b"\xaa" * 32
KEY_B = b"\xbb" * 32
SIG = b"\x01" * 64


def test_observe_then_lookup():
    pool = PublicKeyPool(ttl_ms=60_000)
    pool.observe(KEY_A, (1.0, 2.0), SIG, now_ms=0.0)
    entry = pool.lookup(KEY_A, now_ms=100.0)
    assert entry is not None
    assert entry.position == (1.0, 2.0)
    assert entry.vehicle_signature == SIG


def test_unknown_key_is_none():
    pool = PublicKeyPool()
    assert pool.lookup(KEY_A, now_ms=0.0) is None
    assert pool.localize(KEY_A, now_ms=0.0) is None


def test_entry_expires_after_ttl():
    pool = PublicKeyPool(ttl_ms=60_000)
    pool.observe(KEY_A, (0.0, 0.0), SIG, now_ms=0.0)
    assert pool.lookup(KEY_A, now_ms=60_000.0) is not None  # boundary included
    assert pool.lookup(KEY_A, now_ms=60_000.1) is None
    assert len(pool) == 0  # lazily evicted by the failed lookup


def test_reobservation_refreshes_ttl_and_position():
    pool = PublicKeyPool(ttl_ms=60_000)
    pool.observe(KEY_A, (0.0, 0.0), SIG, now_ms=0.0)
    pool.observe(KEY_A, (5.0, 5.0), SIG, now_ms=59_000.0)
    assert len(pool) == 1
    entry = pool.lookup(KEY_A, now_ms=100_000.0)
    assert entry is not None
    assert entry.position == (5.0, 5.0)


def test_remove():
    pool = PublicKeyPool()
    pool.observe(KEY_A, (0.0, 0.0), SIG, now_ms=0.0)
    pool.remove(KEY_A)
    assert pool.lookup(KEY_A, now_ms=0.0) is None
    pool.remove(KEY_A)  # idempotent


def test_evict_expired_counts():
    pool = PublicKeyPool(ttl_ms=1_000)
    pool.observe(KEY_A, (0.0, 0.0), SIG, now_ms=0.0)
    pool.observe(KEY_B, (0.0, 0.0), SIG, now_ms=900.0)
    assert pool.evict_expired(now_ms=1_500.0) == 1
    assert len(pool) == 1
    assert pool.lookup(KEY_B, now_ms=1_500.0) is not None


def test_rejects_bad_key_length_and_ttl():
    pool = PublicKeyPool()
    with pytest.raises(ValueError):
        pool.observe(b"\xaa" * 31, (0.0, 0.0), SIG, now_ms=0.0)
    with pytest.raises(ValueError):
        PublicKeyPool(ttl_ms=0)
