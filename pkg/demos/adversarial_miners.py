"""
Tampering and offline miners
============================

Replicas let a reader route around a bad miner. When every replica of a
shard lies, the fetch fails loudly instead of returning garbage.
"""
# %%
from dosn import DOSN, PublishParams, Rng

net = DOSN(seed=5)
for _ in range(13):
    net.add_miner()
alice, bob = net.add_user("alice"), net.add_user("bob")
content = Rng(5).randbytes(14_000)
rec = net.publish(alice, content, {bob.address: "friend"}, ["friend"],
                  PublishParams(t=3, n=5, r=2, chunk_size=4096))
policy = net.ledger.policy(rec.policy_id)
replicas = [policy.shard_locations[c] for c in policy.leaf_cids]
for i, pair in enumerate(replicas):
    print("shard", i, [net.miner_name(a) for a in pair])

# %%
# one bad replica per shard
for i, pair in enumerate(replicas):
    net.storage.set_behavior(pair[0], "tamper" if i % 2 else "offline")
out = net.fetch(bob, rec.content_id)
print("ok:", out.ok, "exact:", out.plaintext == content)
for w in out.warnings:
    print("  ", w)

# %%
# both replicas of shard 0 lie
for a in replicas[0]:
    net.storage.set_behavior(a, "tamper")
out = net.fetch(bob, rec.content_id)
print("reason:", out.reason, "plaintext:", out.plaintext)
