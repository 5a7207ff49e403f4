"""
Threshold key sharing
=====================

Split a 32 byte content key into 5 shares so that any 3 rebuild it and
2 reveal nothing.
"""
# %%
import itertools

from dosn import Rng, reconstruct, split
from dosn.errors import InsufficientShares
from dosn.shamir import gf_mul

rng = Rng(7)
key = rng.randbytes(32)
shares = split(key, n=5, t=3, rng=rng, content_id="demo")
for s in shares:
    print(s.x, s.y.hex()[:16], "...")

# %%
# every 3-subset gives the key back
ok = all(reconstruct(c) == key for c in itertools.combinations(shares, 3))
print("all 3-subsets reconstruct:", ok)

# %%
# two shares are not enough, the library refuses instead of guessing
try:
    reconstruct(shares[:2])
except InsufficientShares as e:
    print("2 shares ->", e.code)

# %%
# why 2 shares leak nothing: with t=2 a single share (x, y) of a one byte
# secret s fits s + a1*x = y for exactly one a1 per candidate s
x, y = 3, 0x5C
fits = [s for s in range(256) if any(s ^ gf_mul(a, x) == y for a in range(256))]
print("candidate secrets consistent with one share:", len(fits))
