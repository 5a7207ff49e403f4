"""
Merkle proofs over content chunks
=================================

Chunk a blob, build the DAG, prove a leaf, then flip one bit and watch the
proof fail.
"""
# %%
from dosn import Rng, build_dag, chunk, prove, verify

data = Rng(1).randbytes(10_000)
chunks = chunk(data, chunk_size=1024)
manifest = build_dag(chunks, chunk_size=1024)
print("leaves:", len(manifest.leaf_cids), "root:", manifest.root)

# %%
proof = prove(manifest, 6)
print("path length:", len(proof.path))
print("genuine chunk verifies:", verify(manifest.root, chunks[6], 6, proof))

# %%
bad = bytearray(chunks[6])
bad[100] ^= 0x01
print("one flipped bit verifies:", verify(manifest.root, bytes(bad), 6, proof))
print("right chunk, wrong index:", verify(manifest.root, chunks[6], 5, proof))
