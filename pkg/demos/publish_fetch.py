"""
Publish, share, fetch, forget
=============================

One owner posts to friends only. A friend reads it, a colleague is turned
away, then the owner forgets the post and nobody can read it again.
"""
# %%
from dosn import DOSN, PublishParams

net = DOSN(seed=42)
for _ in range(8):
    net.add_miner()
alice, bob, carol = (net.add_user(n) for n in ("alice", "bob", "carol"))

post = b"dinner at 8, bring the good bread"
rec = net.publish(alice, post, acl={bob.address: "friend", carol.address: "colleague"},
                  allowed_roles=["friend"], params=PublishParams(t=3, n=5, r=2))
print("content id:", rec.content_id[:16], "policy:", rec.policy_id)

# %%
print("bob  :", net.fetch(bob, rec.content_id).plaintext)
print("carol:", net.fetch(carol, rec.content_id).reason)

# %%
# widening the policy is a ledger transaction, no re-encryption needed
net.update_policy(alice, rec.content_id, {bob.address: "friend", carol.address: "colleague"},
                  ["friend", "colleague"])
print("carol after update:", net.fetch(carol, rec.content_id).plaintext)

# %%
# forget revokes the policy and deletes every key share
net.forget(alice, rec.content_id)
for name, u in net.users.items():
    print(name, "->", net.fetch(u, rec.content_id).reason)
bypass = net.retrieve(net.grant_bypassing_acc(rec.content_id))
print("skipping the contract ->", bypass.reason)
