import random

import networkx as nx
import pytest

from vabnet.confirmation import (
    AcceptancePolicy,
    ConfidenceFunction,
    ConfirmationGraph,
    RecordStatus,
)

A = b"\x0a" * 32
B = b"\x0b" * 32
C = b"\x0c" * 32
D = b"\x0d" * 32
ORIGIN = (A, 1)


def graph_with_depths(depths):
    """Build a graph whose counted confirmations sit at the given depths
    by growing a single chain and branching off it."""
    g = ConfirmationGraph(ORIGIN)
    chain = [ORIGIN]
    next_key = 0x10
    for i, want in enumerate(sorted(depths)):
        while len(chain) <= want - 1:
            raise AssertionError("depths must be buildable incrementally")
        parent = chain[want - 1]
        key = bytes([next_key + i]) * 32
        ident = (key, 100 + i)
        outcome = g.record_confirmation(ident, parent)
        assert outcome.accepted and outcome.depth == want
        if want == len(chain):
            chain.append(ident)
    return g


def brute_force_confidence(records, origin, f):
    """Independent recomputation from the raw (confirmation, target) pairs:
    walk each confirmation back to the origin to find its depth, then sum
    the per-confirmation contributions."""
    target_of = dict(records)

    def depth_of(ident):
        if ident == origin:
            return 0
        return 1 + depth_of(target_of[ident])

    total = 0.0
    for ident, _ in records:
        d = depth_of(ident)
        if f is ConfidenceFunction.HARMONIC:
            total += 1.0 / (d + 1)
        else:
            total += 0.5 ** d
    return total


def test_single_depth1_confirmation_harmonic():
    g = ConfirmationGraph(ORIGIN)
    assert g.record_confirmation((B, 2), ORIGIN).accepted
    assert g.confidence(ConfidenceFunction.HARMONIC) == pytest.approx(0.5)
    assert g.confidence(ConfidenceFunction.GEOMETRIC) == pytest.approx(0.5)


def test_threshold_examples():
    policy = AcceptancePolicy(threshold=1.0)
    h = ConfidenceFunction.HARMONIC
    cases = [((1,), False), ((1, 1), True), ((1, 2), False), ((1, 2, 3), True)]
    for depths, expect in cases:
        g = graph_with_depths(depths)
        assert g.is_accepted(h, policy) is expect, depths
    assert graph_with_depths((1, 2)).confidence(h) == pytest.approx(0.5 + 1 / 3)
    assert graph_with_depths((1, 2, 3)).confidence(h) == pytest.approx(
        0.5 + 1 / 3 + 0.25)


def test_cycle_example_rejected_graph_unchanged():
    # A sends the original, B confirms it, then A confirms B's confirmation:
    # that edge would close the A -> B -> A loop and is refused outright.
    g = ConfirmationGraph(ORIGIN)
    b_conf = (B, 2)
    assert g.record_confirmation(b_conf, ORIGIN).accepted
    edges_before = g.edges
    depths_before = g.counted_depths
    conf_before = g.confidence(ConfidenceFunction.HARMONIC)

    outcome = g.record_confirmation((A, 3), b_conf)
    assert outcome.status is RecordStatus.CYCLE
    assert g.edges == edges_before
    assert g.counted_depths == depths_before
    assert g.confidence(ConfidenceFunction.HARMONIC) == conf_before


def test_self_confirmation_is_cycle():
    g = ConfirmationGraph(ORIGIN)
    assert g.record_confirmation((A, 2), ORIGIN).status is RecordStatus.CYCLE


def test_longer_cycle_rejected():
    g = ConfirmationGraph(ORIGIN)
    b_conf = (B, 2)
    c_conf = (C, 3)
    assert g.record_confirmation(b_conf, ORIGIN).accepted
    assert g.record_confirmation(c_conf, b_conf).accepted
    assert g.record_confirmation((A, 4), c_conf).status is RecordStatus.CYCLE


def test_unknown_target():
    g = ConfirmationGraph(ORIGIN)
    outcome = g.record_confirmation((B, 2), (C, 99))
    assert outcome.status is RecordStatus.UNKNOWN_TARGET
    assert g.counted_depths == ()


def test_duplicate_confirmer_of_same_sender():
    g = ConfirmationGraph(ORIGIN)
    assert g.record_confirmation((B, 2), ORIGIN).accepted
    outcome = g.record_confirmation((B, 3), ORIGIN)
    assert outcome.status is RecordStatus.DUPLICATE
    assert g.confidence(ConfidenceFunction.HARMONIC) == pytest.approx(0.5)


def test_depth_cap():
    g = ConfirmationGraph(ORIGIN)
    b_conf = (B, 2)
    assert g.record_confirmation(b_conf, ORIGIN, max_depth=1).accepted
    outcome = g.record_confirmation((C, 3), b_conf, max_depth=1)
    assert outcome.status is RecordStatus.DEPTH_CAP
    assert g.edges == {(B, A)}


def test_uncounted_confirmation_adds_no_confidence():
    g = ConfirmationGraph(ORIGIN)
    assert g.record_confirmation((B, 2), ORIGIN, counted=False).accepted
    assert g.confidence(ConfidenceFunction.HARMONIC) == 0.0
    # but the edge exists and can be built upon
    assert g.record_confirmation((C, 3), (B, 2)).accepted
    assert g.confidence(ConfidenceFunction.HARMONIC) == pytest.approx(1 / 3)


def test_depths_assigned_from_parent():
    g = ConfirmationGraph(ORIGIN)
    b_conf, c_conf = (B, 2), (C, 3)
    g.record_confirmation(b_conf, ORIGIN)
    g.record_confirmation(c_conf, b_conf)
    assert g.depth(ORIGIN) == 0
    assert g.depth(b_conf) == 1
    assert g.depth(c_conf) == 2
    with pytest.raises(KeyError):
        g.depth((D, 99))


def _random_dag_session(rng):
    """Drive a graph with random record calls; return the graph plus the
    accepted (confirmation, target) pairs."""
    keys = [bytes([k]) * 32 for k in range(1, 16)]
    origin = (keys[0], 0)
    g = ConfirmationGraph(origin)
    identities = [origin]
    accepted = []
    for pid in range(1, rng.randint(4, 13)):
        confirmer = rng.choice(keys)
        target = rng.choice(identities)
        ident = (confirmer, pid)
        outcome = g.record_confirmation(ident, target)
        if outcome.accepted:
            identities.append(ident)
            accepted.append((ident, target))
    return g, origin, accepted


def test_confidence_matches_brute_force_oracle():
    rng = random.Random(202)
    for _ in range(300):
        g, origin, records = _random_dag_session(rng)
        for f in ConfidenceFunction:
            expected = brute_force_confidence(records, origin, f)
            assert g.confidence(f) == pytest.approx(expected, abs=1e-12)


def test_graph_stays_acyclic_model_based():
    # Model test: replay every session against networkx's cycle detector.
    rng = random.Random(303)
    for _ in range(200):
        g, origin, records = _random_dag_session(rng)
        edges = [(ident[0], target[0]) for ident, target in records]
        model = nx.DiGraph(edges)
        assert nx.is_directed_acyclic_graph(model)
        assert set(model.edges) == g.edges


def test_geometric_never_exceeds_harmonic():
    rng = random.Random(404)
    for _ in range(200):
        g, _, _ = _random_dag_session(rng)
        geo = g.confidence(ConfidenceFunction.GEOMETRIC)
        har = g.confidence(ConfidenceFunction.HARMONIC)
        assert geo <= har + 1e-12
        if any(d > 1 for d in g.counted_depths):
            assert geo < har
        else:
            assert geo == pytest.approx(har)


def test_confidence_monotone_in_accepted_confirmations():
    rng = random.Random(505)
    keys = [bytes([k]) * 32 for k in range(1, 16)]
    origin = (keys[0], 0)
    g = ConfirmationGraph(origin)
    identities = [origin]
    last = 0.0
    for pid in range(1, 40):
        ident = (rng.choice(keys), pid)
        outcome = g.record_confirmation(ident, rng.choice(identities))
        current = g.confidence(ConfidenceFunction.HARMONIC)
        if outcome.accepted:
            identities.append(ident)
            assert current > last
        else:
            assert current == last
        last = current


def test_policy_validation():
    with pytest.raises(ValueError):
        AcceptancePolicy(threshold=0.0)
    with pytest.raises(ValueError):
        AcceptancePolicy(max_depth=0)
