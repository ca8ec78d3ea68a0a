"""Signing, key agreement, and authenticated encryption primitives.

Identity keys are Ed25519 (32-byte public keys, 64-byte signatures).
Point-to-point sessions use X25519 ephemeral key agreement and AES-GCM.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

KEY_LEN = 32
SIGNATURE_LEN = 64
NONCE_LEN = 12


class MalformedInputError(ValueError):
    """Key, seed, signature, or nonce has the wrong length.

    Distinct from a verification failure: a 63-byte signature is an error,
    a 64-byte signature that does not match is just ``False``.
    """


class AuthenticationError(Exception):
    """AEAD open failed: wrong key or tampered ciphertext."""


@dataclass(frozen=True)
class KeyPair:
    private_key: bytes
    public_key: bytes

    def __post_init__(self):
        if len(self.private_key) != KEY_LEN or len(self.public_key) != KEY_LEN:
            raise MalformedInputError("keys must be 32 bytes")


def generate_keypair(seed: bytes) -> KeyPair:
    """Derive a deterministic Ed25519 signing keypair from a 32-byte seed."""
    if len(seed) != KEY_LEN:
        raise MalformedInputError(f"seed must be {KEY_LEN} bytes, got {len(seed)}")
    private = Ed25519PrivateKey.from_private_bytes(seed)
    public = private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    return KeyPair(private_key=seed, public_key=public)


def sign(keypair: KeyPair, message: bytes) -> bytes:
    """Sign a message with the keypair's private key (deterministic)."""
    return Ed25519PrivateKey.from_private_bytes(keypair.private_key).sign(message)


# Verification results are memoized process-wide: in the simulator the same
# signed packet is verified independently by up to 20 receiver nodes.
_verify_cache: dict[tuple[bytes, bytes, bytes], bool] = {}
_VERIFY_CACHE_MAX = 2_000_000


def verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    """True iff signature was produced over message by the matching private key."""
    if len(public_key) != KEY_LEN:
        raise MalformedInputError(f"public key must be {KEY_LEN} bytes")
    if len(signature) != SIGNATURE_LEN:
        raise MalformedInputError(f"signature must be {SIGNATURE_LEN} bytes")
    cache_key = (public_key, message, signature)
    cached = _verify_cache.get(cache_key)
    if cached is not None:
        return cached
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        result = True
    except InvalidSignature:
        result = False
    if len(_verify_cache) >= _VERIFY_CACHE_MAX:
        _verify_cache.clear()
    _verify_cache[cache_key] = result
    return result


def generate_dh_keypair(seed: bytes) -> KeyPair:
    """Derive an X25519 ephemeral keypair for one point-to-point session."""
    if len(seed) != KEY_LEN:
        raise MalformedInputError(f"seed must be {KEY_LEN} bytes, got {len(seed)}")
    private = X25519PrivateKey.from_private_bytes(seed)
    public = private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    raw = private.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption())
    return KeyPair(private_key=raw, public_key=public)


def derive_shared_key(own_private: bytes, peer_public: bytes) -> bytes:
    """X25519 agreement; symmetric in the two parties' key material.

    Raises MalformedInputError for bad lengths and ValueError for low-order
    peer keys (all-zero shared secret).
    """
    if len(own_private) != KEY_LEN or len(peer_public) != KEY_LEN:
        raise MalformedInputError("DH keys must be 32 bytes")
    private = X25519PrivateKey.from_private_bytes(own_private)
    return private.exchange(X25519PublicKey.from_public_bytes(peer_public))


def seal(key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
    """AES-256-GCM encrypt. The caller must never reuse a nonce under one key."""
    if len(key) != KEY_LEN:
        raise MalformedInputError(f"symmetric key must be {KEY_LEN} bytes")
    if len(nonce) != NONCE_LEN:
        raise MalformedInputError(f"nonce must be {NONCE_LEN} bytes")
    return AESGCM(key).encrypt(nonce, plaintext, None)


def open_sealed(key: bytes, nonce: bytes, ciphertext: bytes) -> bytes:
    """Inverse of seal. Raises AuthenticationError on any modification."""
    if len(key) != KEY_LEN:
        raise MalformedInputError(f"symmetric key must be {KEY_LEN} bytes")
    if len(nonce) != NONCE_LEN:
        raise MalformedInputError(f"nonce must be {NONCE_LEN} bytes")
    try:
        return AESGCM(key).decrypt(nonce, ciphertext, None)
    except InvalidTag as exc:
        raise AuthenticationError("ciphertext failed authentication") from exc
