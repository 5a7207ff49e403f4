"""In-process decentralized storage network and the trusted-node baseline.

Miners hold encrypted shards keyed by CID and key shares keyed by content id.
Each miner has a behavior flag that changes only what it *returns*:

* ``honest``  - stored bytes and a valid proof
* ``tamper``  - one flipped bit in a shard, or one altered octet in a share
* ``offline`` - raises :class:`Unavailable`

``bytes_stored`` counts shard octets (once per distinct CID per miner) plus
share ``y`` octets.  DAG manifests kept for proof generation are metadata
and are not counted.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import crypto, merkle
from .errors import BadAuthorization, NotEnoughMiners, NotStored, Unavailable, UnknownMiner
from .merkle import DagManifest, MerkleProof
from .shamir import KeyShare

HONEST = "honest"
TAMPER = "tamper"
OFFLINE = "offline"
BEHAVIORS = (HONEST, TAMPER, OFFLINE)


@dataclass
class MinerRecord:
    address: str
    name: str = ""
    behavior: str = HONEST
    shards: dict[str, bytes] = field(default_factory=dict)
    key_shares: dict[str, KeyShare] = field(default_factory=dict)
    share_owners: dict[str, str] = field(default_factory=dict)
    manifests: dict[str, DagManifest] = field(default_factory=dict)
    bytes_stored: int = 0
    requests: int = 0

    def recount(self) -> int:
        return sum(len(b) for b in self.shards.values()) + sum(len(s.y) for s in self.key_shares.values())

    def _tamper_rng(self) -> random.Random:
        return random.Random(f"{self.address}:{self.requests}")

    def to_json(self) -> dict:
        return {
            "address": self.address,
            "name": self.name,
            "behavior": self.behavior,
            "bytes_stored": self.bytes_stored,
            "requests": self.requests,
            "shards": {c: b.hex() for c, b in sorted(self.shards.items())},
            "key_shares": {c: s.to_json() for c, s in sorted(self.key_shares.items())},
            "share_owners": dict(sorted(self.share_owners.items())),
            "manifests": {r: m.to_json() for r, m in sorted(self.manifests.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MinerRecord":
        m = cls(obj["address"], obj.get("name", ""), obj.get("behavior", HONEST))
        m.shards = {c: bytes.fromhex(h) for c, h in obj.get("shards", {}).items()}
        m.key_shares = {c: KeyShare.from_json(s) for c, s in obj.get("key_shares", {}).items()}
        m.share_owners = dict(obj.get("share_owners", {}))
        m.manifests = {r: DagManifest.from_json(d) for r, d in obj.get("manifests", {}).items()}
        m.requests = int(obj.get("requests", 0))
        m.bytes_stored = m.recount()
        return m


@dataclass(frozen=True)
class PlacementPlan:
    shards: dict[str, tuple[str, ...]]
    shares: dict[int, str]

    @property
    def shard_placements(self) -> int:
        return sum(len(v) for v in self.shards.values())


def place(leaf_cids, n_shares: int, r: int, miner_set, seed) -> PlacementPlan:
    """Deterministic placement of shards and key shares.

    Miners are shuffled under ``seed``.  Each distinct CID goes to ``r``
    consecutive miners of that order, round-robin from the front.  Share
    ``x`` = 1..n goes to the miners at the back of the order, so shares and
    shards overlap only when the network is small.
    """
    miners = list(miner_set)
    if r < 1:
        raise ValueError("replication factor must be >= 1")
    if len(set(miners)) != len(miners):
        raise ValueError("miner_set contains duplicates")
    if len(miners) < max(r, n_shares):
        raise NotEnoughMiners(f"{len(miners)} miners for r={r}, n={n_shares}")
    order = sorted(miners)
    random.Random(seed).shuffle(order)
    m = len(order)
    unique = list(dict.fromkeys(leaf_cids))
    shards = {c: tuple(order[(i * r + j) % m] for j in range(r)) for i, c in enumerate(unique)}
    shares = {x: order[m - x] for x in range(1, n_shares + 1)}
    return PlacementPlan(shards, shares)


@dataclass(frozen=True)
class Authorization:
    owner: str
    signature: bytes


def deletion_message(miner: str, content_id: str) -> bytes:
    return b"dosn/delete-key-share|" + miner.encode() + b"|" + content_id.encode()


def authorize_deletion(owner: crypto.KeyPair, miner: str, content_id: str) -> Authorization:
    return Authorization(owner.address, owner.sign(deletion_message(miner, content_id)))


class StorageNetwork:
    def __init__(self):
        self.miners: dict[str, MinerRecord] = {}

    def register(self, address: str, name: str = "", behavior: str = HONEST) -> MinerRecord:
        if behavior not in BEHAVIORS:
            raise ValueError(f"unknown behavior {behavior!r}")
        rec = self.miners.setdefault(address, MinerRecord(address, name or address[:8]))
        rec.behavior = behavior
        return rec

    def miner(self, address: str) -> MinerRecord:
        try:
            return self.miners[address]
        except KeyError:
            raise UnknownMiner(address) from None

    def by_name(self, name: str) -> MinerRecord:
        for m in self.miners.values():
            if m.name == name or m.address == name:
                return m
        raise UnknownMiner(name)

    def set_behavior(self, address: str, behavior: str) -> None:
        if behavior not in BEHAVIORS:
            raise ValueError(f"unknown behavior {behavior!r}")
        self.miner(address).behavior = behavior

    @property
    def addresses(self) -> list[str]:
        return list(self.miners)

    @property
    def request_count(self) -> int:
        return sum(m.requests for m in self.miners.values())

    # writes

    def store_shard(self, address: str, cid: str, data: bytes, manifest: DagManifest | None = None) -> bool:
        """Store a shard; returns False when the miner already held this CID."""
        m = self.miner(address)
        if manifest is not None:
            m.manifests.setdefault(manifest.root, manifest)
        if cid in m.shards:
            return False
        m.shards[cid] = bytes(data)
        m.bytes_stored += len(data)
        return True

    def store_key_share(self, address: str, content_id: str, share: KeyShare, owner: str = "") -> None:
        m = self.miner(address)
        old = m.key_shares.get(content_id)
        if old is not None:
            if old.x != share.x:
                raise ValueError("a miner may hold only one share per content")
            m.bytes_stored -= len(old.y)
        m.key_shares[content_id] = share
        m.share_owners[content_id] = owner
        m.bytes_stored += len(share.y)

    def delete_shard(self, address: str, cid: str) -> None:
        m = self.miner(address)
        data = m.shards.pop(cid, None)
        if data is None:
            raise NotStored(cid)
        m.bytes_stored -= len(data)

    def drop_manifest(self, address: str, root: str) -> None:
        self.miner(address).manifests.pop(root, None)

    def delete_key_share(self, address: str, content_id: str, authorization: Authorization) -> None:
        m = self.miner(address)
        if content_id not in m.key_shares:
            raise NotStored(content_id)
        owner = m.share_owners.get(content_id)
        if (authorization is None or authorization.owner != owner
                or not crypto.verify(owner, deletion_message(address, content_id), authorization.signature)):
            raise BadAuthorization(f"deletion of share for {content_id[:12]} not signed by its owner")
        share = m.key_shares.pop(content_id)
        m.share_owners.pop(content_id, None)
        m.bytes_stored -= len(share.y)

    def _remove_share_unchecked(self, address: str, content_id: str) -> None:
        m = self.miner(address)
        share = m.key_shares.pop(content_id, None)
        if share is None:
            raise NotStored(content_id)
        m.share_owners.pop(content_id, None)
        m.bytes_stored -= len(share.y)

    # reads

    def retrieve_shard(self, address: str, cid: str, root: str | None = None,
                       leaf_index: int | None = None) -> tuple[bytes, MerkleProof | None]:
        m = self.miner(address)
        m.requests += 1
        if m.behavior == OFFLINE:
            raise Unavailable(m.name)
        if cid not in m.shards:
            raise NotStored(cid)
        data = m.shards[cid]
        proof = None
        if root is not None:
            manifest = m.manifests.get(root)
            if manifest is None:
                raise NotStored(f"manifest {root[:12]}")
            if leaf_index is None:
                leaf_index = manifest.leaf_cids.index(cid)
            proof = merkle.prove(manifest, leaf_index)
        if m.behavior == TAMPER:
            data = flip_bit(data, m._tamper_rng())
        return data, proof

    def retrieve_key_share(self, address: str, content_id: str) -> KeyShare:
        m = self.miner(address)
        m.requests += 1
        if m.behavior == OFFLINE:
            raise Unavailable(m.name)
        share = m.key_shares.get(content_id)
        if share is None:
            raise NotStored(content_id)
        if m.behavior == TAMPER:
            rng = m._tamper_rng()
            y = bytearray(share.y)
            y[rng.randrange(len(y))] ^= rng.randrange(1, 256)
            share = KeyShare(share.x, bytes(y), share.threshold, share.share_count, share.content_id)
        return share

    # accounting

    def total_bytes(self) -> int:
        return sum(m.bytes_stored for m in self.miners.values())

    def stats(self) -> dict:
        return {
            "mode": "dosn",
            "miners": len(self.miners),
            "total_bytes": self.total_bytes(),
            "shard_bytes": sum(len(b) for m in self.miners.values() for b in m.shards.values()),
            "share_bytes": sum(len(s.y) for m in self.miners.values() for s in m.key_shares.values()),
            "per_miner": [
                {"name": m.name, "address": m.address, "behavior": m.behavior,
                 "shards": len(m.shards), "key_shares": len(m.key_shares),
                 "bytes_stored": m.bytes_stored, "requests": m.requests}
                for m in self.miners.values()
            ],
        }


def flip_bit(data: bytes, rng: random.Random, bit: int | None = None) -> bytes:
    if not data:
        return b"\x01"
    if bit is None:
        bit = rng.randrange(len(data) * 8)
    out = bytearray(data)
    out[bit // 8] ^= 1 << (bit % 8)
    return bytes(out)


class TrustedNodeBaseline:
    """k trusted nodes, each holding a full plaintext replica of every content."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("baseline needs at least one trusted node")
        self.k = k
        self.nodes: list[dict[str, bytes]] = [{} for _ in range(k)]

    def store(self, content_id: str, content: bytes) -> None:
        for node in self.nodes:
            node[content_id] = bytes(content)

    def retrieve(self, node: int, content_id: str) -> bytes:
        return self.nodes[node][content_id]

    def total_bytes(self) -> int:
        return sum(len(v) for node in self.nodes for v in node.values())

    def stats(self) -> dict:
        return {
            "mode": "baseline",
            "nodes": self.k,
            "contents": len(self.nodes[0]),
            "total_bytes": self.total_bytes(),
        }


def total_bytes(target) -> dict:
    """Accounting report for a :class:`StorageNetwork` or :class:`TrustedNodeBaseline`."""
    return target.stats()
