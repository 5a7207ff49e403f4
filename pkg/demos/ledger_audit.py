"""
Auditing the ledger
===================

Anyone holding the blocks can replay them and land on the same state
digest. Editing a single block is caught.
"""
# %%
from dosn import DOSN, PublishParams, verify_chain
from dosn.ledger import Block
from dosn.errors import ChainInvalid

net = DOSN(seed=3)
for _ in range(6):
    net.add_miner()
alice, bob = net.add_user("alice"), net.add_user("bob")
rec = net.publish(alice, b"audit me", {bob.address: "friend"}, ["friend"], PublishParams(2, 3, 2))
net.fetch(bob, rec.content_id)
net.revoke(alice, rec.content_id)

print("height:", net.ledger.height)
print("live  :", net.ledger.get_state_digest())
print("replay:", verify_chain(net.ledger.blocks))

# %%
for e in net.ledger.state.acc.access_log:
    print(e["height"], e["policy_id"], e["granted"], e.get("reason"))

# %%
blocks = list(net.ledger.blocks)
forged = Block.from_json(blocks[2].to_json())
forged.txs[0].payload["op"] = "something_else"
blocks[2] = forged
try:
    verify_chain(blocks)
except ChainInvalid as e:
    print("tampered chain:", e)
