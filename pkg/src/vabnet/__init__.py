"""Location-aware VANET authentication protocol and simulation harness."""

from .confirmation import (
    AcceptancePolicy,
    ConfidenceFunction,
    ConfirmationGraph,
    RecordStatus,
)
from .crypto import KeyPair, generate_keypair, sign, verify
from .graphs import VisibilityGraph, make_graph
from .node import Node, NodeConfig
from .pool import PkpEntry, PublicKeyPool
from .sim import EventLog, LoadProfile, PropagationModel, ProtocolConfig, run_simulation
from .verifier import DedupStore, RejectReason, Verdict, check
from .wire import (
    BroadcastPacket,
    ConfirmationPacket,
    decode_packet,
    encode_broadcast,
    encode_confirmation,
    signed_region,
)

__version__ = "0.1.0"
