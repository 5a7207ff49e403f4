import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_net
from dosn import crypto
from dosn.errors import (
    ContractDeactivated,
    InvalidThreshold,
    NotEnoughMiners,
    NotOwner,
    UnknownContent,
)
from dosn.protocol import FetchFailure, PublishParams, compare_costs, expected_dosn_bytes
from dosn.rng import Rng

MiB = 1 << 20


def test_publish_counts():
    net = make_net(6)
    content = Rng(1).randbytes(MiB)
    rec = net.publish(net.users["alice"], content, {}, ["friend"], PublishParams(3, 5, 2, 256 * 1024))
    # ciphertext = content + 28 octets of nonce and tag, so one extra short leaf
    assert len(rec.manifest.leaf_cids) == 5
    assert rec.manifest.total_len == MiB + crypto.OVERHEAD
    policy = net.ledger.policy(rec.policy_id)
    assert sum(len(m) for m in policy.shard_locations.values()) == 10
    assert len(policy.key_holders) == 5 and len({a for a, _ in policy.key_holders}) == 5
    assert len(net.ledger.state.anchors) == 1 and rec.policy_id == 1
    assert sum(len(m.key_shares) for m in net.storage.miners.values()) == 5
    assert net.ledger.get_root(rec.content_id) == rec.manifest.root == rec.content_id


def test_publish_not_enough_miners_leaves_ledger_untouched():
    net = make_net(4)
    before = net.ledger.get_state_digest()
    with pytest.raises(NotEnoughMiners):
        net.publish(net.users["alice"], b"post", {}, [], PublishParams(3, 5, 2))
    with pytest.raises(InvalidThreshold):
        net.publish(net.users["alice"], b"post", {}, [], PublishParams(4, 3, 2))
    assert net.ledger.get_state_digest() == before
    assert net.storage.total_bytes() == 0


def test_failed_policy_creation_rolls_back_miners():
    net = make_net(6)
    alice = net.users["alice"]
    net.publish(alice, b"first", {}, [], PublishParams(2, 3, 2))
    bytes_before = net.storage.total_bytes()
    net.delete_acc(alice)
    with pytest.raises(ContractDeactivated):
        net.publish(alice, b"second", {}, [], PublishParams(2, 3, 2))
    assert net.storage.total_bytes() == bytes_before
    assert all(m.recount() == m.bytes_stored for m in net.storage.miners.values())


def test_empty_content(posted):
    net = make_net(6)
    bob = net.users["bob"]
    rec = net.publish(net.users["alice"], b"", {bob.address: "friend"}, ["friend"], PublishParams(2, 3, 1))
    assert len(rec.manifest.leaf_cids) == 1
    out = net.fetch(bob, rec.content_id)
    assert out.ok and out.plaintext == b""


def test_authorized_fetch_bit_exact(posted):
    net, rec, content = posted
    out = net.fetch(net.users["bob"], rec.content_id)
    assert out.ok and out.plaintext == content and out.warnings == []


def test_denied_fetch_contacts_no_miner(posted):
    net, rec, _ = posted
    before = net.storage.request_count
    out = net.fetch(net.users["carol"], rec.content_id)
    assert out.reason is FetchFailure.ACCESS_DENIED and out.detail == "NotInAcl"
    assert net.storage.request_count == before
    assert net.fetch(net.users["carol"], "ab" * 32).reason is FetchFailure.ACCESS_DENIED


def test_tampering_replica_falls_back(posted):
    net, rec, content = posted
    policy = net.ledger.policy(rec.policy_id)
    first = {m[0] for m in policy.shard_locations.values()}
    for addr in first:
        net.storage.set_behavior(addr, "tamper")
    out = net.fetch(net.users["bob"], rec.content_id)
    assert out.ok and out.plaintext == content
    assert any("failing Merkle verification" in w for w in out.warnings)


def test_both_replicas_tampering_is_integrity_failure(posted):
    net, rec, _ = posted
    policy = net.ledger.policy(rec.policy_id)
    for addr in policy.shard_locations[policy.leaf_cids[0]]:
        net.storage.set_behavior(addr, "tamper")
    out = net.fetch(net.users["bob"], rec.content_id)
    assert out.reason is FetchFailure.INTEGRITY_FAILURE and out.plaintext is None


def test_all_replicas_offline_is_unavailable(posted):
    net, rec, _ = posted
    policy = net.ledger.policy(rec.policy_id)
    for addr in policy.shard_locations[policy.leaf_cids[0]]:
        net.storage.set_behavior(addr, "offline")
    assert net.fetch(net.users["bob"], rec.content_id).reason is FetchFailure.UNAVAILABLE


def test_tampered_share_detected_and_routed_around(posted):
    net, rec, content = posted
    # the first key holder is always among the first t shares tried
    holder = net.ledger.policy(rec.policy_id).key_holders[0][0]
    net.storage.set_behavior(holder, "tamper")
    out = net.fetch(net.users["bob"], rec.content_id)
    assert out.ok and out.plaintext == content
    assert any("failed authentication" in w for w in out.warnings)


def test_tampered_share_among_exactly_t_fails_decryption():
    net = make_net(6)
    bob = net.users["bob"]
    rec = net.publish(net.users["alice"], b"x" * 100, {bob.address: "friend"}, ["friend"], PublishParams(3, 3, 1))
    policy = net.ledger.policy(rec.policy_id)
    shard_holders = {a for m in policy.shard_locations.values() for a in m}
    holder = next(a for a, _ in policy.key_holders if a not in shard_holders)
    net.storage.set_behavior(holder, "tamper")
    assert net.fetch(bob, rec.content_id).reason is FetchFailure.DECRYPTION_FAILED


def test_update_and_revoke_flow(posted):
    net, rec, _ = posted
    alice, bob, carol = (net.users[u] for u in ("alice", "bob", "carol"))
    net.grant(alice, rec.content_id, carol.address, "friend")
    assert net.fetch(carol, rec.content_id).ok
    net.remove_member(alice, rec.content_id, bob.address)
    assert net.fetch(bob, rec.content_id).detail == "NotInAcl"
    with pytest.raises(NotOwner):
        net.revoke(carol, rec.content_id)
    net.revoke(alice, rec.content_id)
    assert net.fetch(carol, rec.content_id).detail == "Revoked"


def test_forget_two_layers(posted):
    net, rec, _ = posted
    alice, bob = net.users["alice"], net.users["bob"]
    with pytest.raises(NotOwner):
        net.forget(bob, rec.content_id)
    net.forget(alice, rec.content_id)
    assert net.fetch(bob, rec.content_id).reason is FetchFailure.ACCESS_DENIED
    bypass = net.retrieve(net.grant_bypassing_acc(rec.content_id))
    assert bypass.reason is FetchFailure.INSUFFICIENT_SHARES
    assert sum(len(m.key_shares) for m in net.storage.miners.values()) == 0
    assert sum(len(m.shards) for m in net.storage.miners.values()) > 0
    with pytest.raises(UnknownContent):
        net.forget(alice, rec.content_id)


@pytest.mark.parametrize("deleted,expect_ok", [(2, True), (3, False)])
def test_share_deletion_threshold_boundary(deleted, expect_ok):
    # t=3, n=5: deleting n-t shares keeps the content readable, n-t+1 does not
    from dosn.storage import authorize_deletion
    net = make_net(6)
    alice, bob = net.users["alice"], net.users["bob"]
    rec = net.publish(alice, b"boundary", {bob.address: "friend"}, ["friend"], PublishParams(3, 5, 2))
    holders = net.ledger.policy(rec.policy_id).key_holders
    for addr, _ in holders[:deleted]:
        net.storage.delete_key_share(addr, rec.content_id, authorize_deletion(alice, addr, rec.content_id))
    out = net.fetch(bob, rec.content_id)
    assert out.ok is expect_ok
    if not expect_ok:
        assert out.reason is FetchFailure.INSUFFICIENT_SHARES


def test_threshold_law_small():
    for n in range(1, 4):
        for t in range(1, n + 1):
            net = make_net(n + 1)
            bob = net.users["bob"]
            rec = net.publish(net.users["alice"], b"law", {bob.address: "f"}, ["f"], PublishParams(t, n, 1))
            holders = [a for a, _ in net.ledger.policy(rec.policy_id).key_holders]
            for mask in itertools.product((True, False), repeat=n):
                for a, up in zip(holders, mask):
                    net.storage.set_behavior(a, "honest" if up else "offline")
                assert net.fetch(bob, rec.content_id).ok is (sum(mask) >= t)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 300_000), st.integers(0, 10**6))
def test_roundtrip_property(size, seed):
    net = make_net(5, seed)
    bob = net.users["bob"]
    content = Rng(seed).randbytes(size)
    rec = net.publish(net.users["alice"], content, {bob.address: "r"}, ["r"], PublishParams(2, 4, 2, 64 * 1024))
    assert net.fetch(bob, rec.content_id).plaintext == content


def test_replay_matches_live_after_flow(posted):
    net, rec, _ = posted
    net.fetch(net.users["carol"], rec.content_id)
    net.forget(net.users["alice"], rec.content_id)
    assert net.ledger.verify_chain() == net.ledger.get_state_digest()


def test_determinism_same_seed():
    digests = []
    for _ in range(2):
        net = make_net(6, seed=7)
        net.publish(net.users["alice"], b"same", {}, [], PublishParams(2, 3, 2))
        digests.append((net.ledger.get_state_digest(), net.storage.stats()))
    assert digests[0] == digests[1]


def test_compare_costs_exact_accounting():
    contents = [Rng(i).randbytes(10_000) for i in range(3)]
    params = PublishParams(2, 3, 2, 4096)
    rep = compare_costs(contents, k_nodes=4, miners=5, params=params)
    assert rep["baseline_bytes"] == 4 * 30_000
    assert rep["dosn_bytes"] == rep["dosn_expected_bytes"] == expected_dosn_bytes([10_000] * 3, params)
