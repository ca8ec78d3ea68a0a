import hashlib

import pytest

from vabnet import crypto, wire
from vabnet.node import Node, NodeConfig


def seed_for(label: str) -> bytes:
    return hashlib.sha256(label.encode()).digest()


def make_keypair(label: str) -> crypto.KeyPair:
    return crypto.generate_keypair(seed_for(label))


def make_node(label: str, position=(0.0, 0.0), **config_kwargs) -> Node:
    return Node(NodeConfig(keypair=make_keypair(label), position=position,
                           **config_kwargs))


def signed_broadcast(keypair: crypto.KeyPair, packet_id: int, timestamp_ms: int,
                     payload: bytes = b"") -> wire.BroadcastPacket:
    p = wire.BroadcastPacket(packet_id, timestamp_ms, keypair.public_key,
                             bytes(64), payload)
    p.signature = crypto.sign(keypair, wire.signed_region(p))
    return p


def signed_confirmation(keypair: crypto.KeyPair, packet_id: int, timestamp_ms: int,
                        confirmed_key: bytes, confirmed_id: int,
                        east_cm: int = 0, north_cm: int = 0) -> wire.ConfirmationPacket:
    p = wire.ConfirmationPacket(packet_id, timestamp_ms, keypair.public_key,
                                bytes(64), confirmed_id, confirmed_key,
                                east_cm, north_cm)
    p.signature = crypto.sign(keypair, wire.signed_region(p))
    return p


def pytest_terminal_summary(terminalreporter):
    """Print the one-line verdict per acceptance criterion, if any ran."""
    try:
        from test_acceptance import CRITERION_RESULTS
    except ImportError:
        return
    if not CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERION_RESULTS):
        terminalreporter.write_line(CRITERION_RESULTS[number])


@pytest.fixture
def alice():
    return make_keypair("alice")


@pytest.fixture
def bob():
    return make_keypair("bob")
