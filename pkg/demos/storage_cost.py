"""
Storage cost against trusted nodes
==================================

Ten 1 MiB posts. Full replication to 5 trusted nodes costs 5x. DOSN with
two replicas per shard costs about 2x, however many miners join.
"""
# %%
from dosn import PublishParams, Rng, compare_costs

MiB = 1 << 20
posts = [Rng(i).randbytes(MiB) for i in range(10)]
params = PublishParams(t=3, n=5, r=2)

for miners in (5, 20, 50):
    r = compare_costs(posts, k_nodes=5, miners=miners, params=params)
    print(f"miners={miners:3d} baseline={r['baseline_bytes']:>11,} dosn={r['dosn_bytes']:>11,} "
          f"ratio={r['dosn_bytes'] / r['content_bytes']:.4f}")

# %%
# overhead per post: r * 28 bytes of AEAD framing plus n * 32 bytes of key shares
print("expected:", r["dosn_expected_bytes"])
