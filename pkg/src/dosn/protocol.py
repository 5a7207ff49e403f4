"""Owner publish and reader fetch pipelines over the ledger and storage network.

Publish: encrypt -> chunk + DAG -> plan placement -> anchor root -> store
shards -> split and store key shares -> create policy.  Any miner-side
failure after the anchor is compensated by deleting what this publish
stored.  Fetch: access check -> anchored root -> Merkle-verified shards with
replica fallback -> key shares -> reconstruct -> authenticated decrypt.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

from . import crypto, merkle, shamir
from .contract import ACTIVE, AccessGrant, Denied, grant_for
from .crypto import KeyPair, NonceSource
from .errors import (
    AuthenticationFailed,
    DosnError,
    InvalidParameters,
    InvalidThreshold,
    MismatchedShares,
    NotEnoughMiners,
    NotOwner,
    NotStored,
    RollbackIncomplete,
    TransactionRejected,
    Unavailable,
    UnknownContent,
    UnknownMiner,
)
from .ledger import Ledger, anchor_root
from .merkle import DEFAULT_CHUNK_SIZE, DagManifest
from .rng import Rng
from .storage import StorageNetwork, TrustedNodeBaseline, authorize_deletion, place

# cap on share subsets tried when a reconstructed key fails authentication
MAX_SHARE_COMBINATIONS = 5000


class FetchFailure(str, Enum):
    ACCESS_DENIED = "AccessDenied"
    INTEGRITY_FAILURE = "IntegrityFailure"
    INSUFFICIENT_SHARES = "InsufficientShares"
    DECRYPTION_FAILED = "DecryptionFailed"
    UNAVAILABLE = "Unavailable"


@dataclass(frozen=True)
class PublishParams:
    t: int = 3
    n: int = 5
    r: int = 2
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def to_json(self) -> dict:
        return {"t": self.t, "n": self.n, "r": self.r, "chunk_size": self.chunk_size}


@dataclass
class ContentRecord:
    content_id: str
    owner: str
    manifest: DagManifest
    policy_id: int
    params: PublishParams
    forgotten: bool = False

    def to_json(self) -> dict:
        return {
            "content_id": self.content_id,
            "owner": self.owner,
            "manifest": self.manifest.to_json(),
            "policy_id": self.policy_id,
            "params": self.params.to_json(),
            "forgotten": self.forgotten,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ContentRecord":
        return cls(obj["content_id"], obj["owner"], DagManifest.from_json(obj["manifest"]),
                   int(obj["policy_id"]), PublishParams(**obj["params"]), bool(obj.get("forgotten")))


@dataclass
class FetchOutcome:
    plaintext: bytes | None = None
    reason: FetchFailure | None = None
    detail: str = ""
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.reason is None

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "reason": None if self.reason is None else self.reason.value,
            "detail": self.detail,
            "warnings": list(self.warnings),
            "length": None if self.plaintext is None else len(self.plaintext),
        }


def _fail(reason: FetchFailure, detail: str = "", warnings=None) -> FetchOutcome:
    return FetchOutcome(None, reason, detail, list(warnings or []))


class DOSN:
    """One simulated network: a ledger, a set of miners, and client logic."""

    def __init__(self, seed: int = 0, block_size: int = 1):
        self.seed = seed
        self.rng = Rng(seed)
        self.nonces = NonceSource(self.rng)
        self.ledger = Ledger(block_size)
        self.storage = StorageNetwork()
        self.users: dict[str, KeyPair] = {}
        self.records: dict[str, ContentRecord] = {}

    # membership

    def add_miner(self, name: str | None = None, behavior: str = "honest") -> str:
        kp = KeyPair.generate(self.rng)
        name = name or f"m{len(self.storage.miners) + 1}"
        self.storage.register(kp.address, name, behavior)
        return kp.address

    def add_user(self, name: str) -> KeyPair:
        if name in self.users:
            raise ValueError(f"user {name!r} already exists")
        kp = KeyPair.generate(self.rng)
        self.users[name] = kp
        return kp

    def miner_name(self, address: str) -> str:
        m = self.storage.miners.get(address)
        return m.name if m else address[:12]

    # owner side

    def publish(self, owner: KeyPair, content: bytes, acl: dict[str, str], allowed_roles,
                params: PublishParams | None = None, **overrides) -> ContentRecord:
        params = params or PublishParams(**overrides)
        if not 1 <= params.t <= params.n <= shamir.MAX_SHARES:
            raise InvalidThreshold(f"need 1 <= t <= n <= 255, got t={params.t}, n={params.n}")
        if params.r < 1 or params.chunk_size < 1:
            raise InvalidParameters("r and chunk_size must be positive")
        miners = self.storage.addresses
        if len(miners) < max(params.n, params.r):
            raise NotEnoughMiners(f"{len(miners)} miners for n={params.n}, r={params.r}")

        key = crypto.generate_key(self.rng)
        ct = crypto.encrypt(key, content, owner.address.encode(), nonce=self.nonces.next())
        chunks = merkle.chunk(ct.to_bytes(), params.chunk_size, allow_empty=True)
        manifest = merkle.build_dag(chunks, params.chunk_size)
        content_id = manifest.root
        plan = place(manifest.leaf_cids, params.n, params.r, miners, seed=self.rng.randrange(2**63))
        shares = shamir.split(key.bytes, params.n, params.t, self.rng, content_id)

        anchor_root(self.ledger, owner, content_id, manifest.root).raise_for_status()

        stored_shards: list[tuple[str, str]] = []
        stored_shares: list[str] = []
        try:
            for i, c in enumerate(manifest.leaf_cids):
                for addr in plan.shards[c]:
                    if self.storage.store_shard(addr, c, chunks[i], manifest):
                        stored_shards.append((addr, c))
            for share in shares:
                addr = plan.shares[share.x]
                self.storage.store_key_share(addr, content_id, share, owner.address)
                stored_shares.append(addr)
            receipt = self.ledger.transact(owner, {
                "op": "create_policy",
                "content_id": content_id,
                "acl": dict(acl),
                "allowed_roles": sorted(allowed_roles),
                "key_holders": [[plan.shares[s.x], s.x] for s in shares],
                "leaf_cids": list(manifest.leaf_cids),
                "shard_locations": {c: list(m) for c, m in plan.shards.items()},
                "threshold": params.t,
            })
            receipt.raise_for_status()
        except DosnError:
            self._rollback(stored_shards, stored_shares, content_id, manifest.root)
            raise
        record = ContentRecord(content_id, owner.address, manifest, receipt.result["policy_id"], params)
        self.records[content_id] = record
        return record

    def _rollback(self, shards, shares, content_id, root) -> None:
        failures = []
        for addr, c in shards:
            try:
                self.storage.delete_shard(addr, c)
            except DosnError as exc:
                failures.append(exc)
        for addr in self.storage.addresses:
            self.storage.drop_manifest(addr, root)
        for addr in shares:
            try:
                self.storage._remove_share_unchecked(addr, content_id)
            except DosnError as exc:
                failures.append(exc)
        if failures:
            raise RollbackIncomplete(f"{len(failures)} compensating deletes failed")

    def _policy_id(self, content_id: str) -> int | None:
        rec = self.records.get(content_id)
        if rec is not None:
            return rec.policy_id
        policies = self.ledger.state.acc.policies_for(content_id)
        return policies[-1].policy_id if policies else None

    def _owned_record(self, owner: KeyPair, content_id: str) -> ContentRecord:
        rec = self.records.get(content_id)
        if rec is None:
            raise UnknownContent(content_id)
        if rec.owner != owner.address:
            raise NotOwner(f"{content_id[:12]} is not owned by caller")
        return rec

    def update_policy(self, owner: KeyPair, content_id: str, acl=None, allowed_roles=None) -> None:
        rec = self._owned_record(owner, content_id)
        payload = {"op": "update_policy", "policy_id": rec.policy_id}
        if acl is not None:
            payload["acl"] = dict(acl)
        if allowed_roles is not None:
            payload["allowed_roles"] = sorted(allowed_roles)
        self.ledger.transact(owner, payload).raise_for_status()

    def grant(self, owner: KeyPair, content_id: str, member: str, role: str) -> None:
        rec = self._owned_record(owner, content_id)
        acl = dict(self.ledger.policy(rec.policy_id).acl)
        acl[member] = role
        self.update_policy(owner, content_id, acl=acl)

    def remove_member(self, owner: KeyPair, content_id: str, member: str) -> None:
        rec = self._owned_record(owner, content_id)
        acl = dict(self.ledger.policy(rec.policy_id).acl)
        acl.pop(member, None)
        self.update_policy(owner, content_id, acl=acl)

    def revoke(self, owner: KeyPair, content_id: str) -> None:
        rec = self._owned_record(owner, content_id)
        self.ledger.transact(owner, {"op": "revoke_policy", "policy_id": rec.policy_id}).raise_for_status()

    def delete_acc(self, owner: KeyPair) -> None:
        self.ledger.transact(owner, {"op": "delete_acc", "contract": owner.address}).raise_for_status()

    def forget(self, owner: KeyPair, content_id: str) -> None:
        """Revoke the content's policy and destroy every key share.

        Ciphertext shards stay on the miners; without the shares they can no
        longer be decrypted.  Share deletion is a control-plane operation and
        ignores miner behavior flags.
        """
        rec = self._owned_record(owner, content_id)
        if rec.forgotten:
            raise UnknownContent(f"{content_id[:12]} was already forgotten")
        policy = self.ledger.policy(rec.policy_id)
        if policy.status == ACTIVE:
            self.ledger.transact(owner, {"op": "revoke_policy", "policy_id": rec.policy_id}).raise_for_status()
        for addr, _ in policy.key_holders:
            try:
                self.storage.delete_key_share(addr, content_id, authorize_deletion(owner, addr, content_id))
            except (NotStored, UnknownMiner):
                pass
        rec.forgotten = True

    # reader side

    def check_access(self, requester: KeyPair, content_id: str) -> AccessGrant | Denied:
        pid = self._policy_id(content_id)
        if pid is None:
            return Denied("NoPolicy")
        receipt = self.ledger.transact(requester, {"op": "check_access", "policy_id": pid})
        return receipt.raise_for_status().result

    def fetch(self, requester: KeyPair, content_id: str) -> FetchOutcome:
        try:
            decision = self.check_access(requester, content_id)
        except TransactionRejected as exc:
            return _fail(FetchFailure.ACCESS_DENIED, exc.code)
        if not decision.granted:
            return _fail(FetchFailure.ACCESS_DENIED, decision.reason)
        return self.retrieve(decision)

    def grant_bypassing_acc(self, content_id: str) -> AccessGrant:
        """Grant built straight from ledger state, skipping the access check (test harness)."""
        pid = self._policy_id(content_id)
        if pid is None:
            raise UnknownContent(content_id)
        return grant_for(self.ledger.policy(pid), self.ledger.get_root(content_id))

    def retrieve(self, grant: AccessGrant) -> FetchOutcome:
        """Everything after a successful access check."""
        warnings: list[str] = []
        root = self.ledger.get_root(grant.content_id)
        owner = self.ledger.anchor_owner(grant.content_id)
        if root is None or root != grant.root:
            return _fail(FetchFailure.INTEGRITY_FAILURE, "grant root does not match anchored root")

        chunks = []
        for idx, c in enumerate(grant.leaf_cids):
            data, tampered = None, False
            for addr in grant.shard_locations.get(c, ()):
                try:
                    got, proof = self.storage.retrieve_shard(addr, c, root, idx)
                except (Unavailable, NotStored, UnknownMiner) as exc:
                    warnings.append(f"miner {self.miner_name(addr)} could not serve shard {idx}: {exc.code}")
                    continue
                if proof is not None and merkle.verify(root, got, idx, proof):
                    data = got
                    break
                tampered = True
                warnings.append(f"miner {self.miner_name(addr)} returned shard {idx} failing Merkle verification")
            if data is None:
                reason = FetchFailure.INTEGRITY_FAILURE if tampered else FetchFailure.UNAVAILABLE
                return _fail(reason, f"no verifiable replica for shard {idx}", warnings)
            chunks.append(data)
        try:
            ct = crypto.Ciphertext.from_bytes(b"".join(chunks))
        except AuthenticationFailed:
            return _fail(FetchFailure.DECRYPTION_FAILED, "ciphertext malformed", warnings)

        holders = list(grant.key_holders)
        shares: list[shamir.KeyShare] = []
        pos = 0

        def collect(limit: int) -> None:
            nonlocal pos
            while pos < len(holders) and len(shares) < limit:
                addr, x = holders[pos]
                pos += 1
                try:
                    s = self.storage.retrieve_key_share(addr, grant.content_id)
                except (Unavailable, NotStored, UnknownMiner) as exc:
                    warnings.append(f"miner {self.miner_name(addr)} could not serve key share: {exc.code}")
                    continue
                if (s.x != x or s.content_id != grant.content_id or s.threshold != grant.threshold
                        or s.share_count != len(holders) or len(s.y) != crypto.KEY_SIZE):
                    warnings.append(f"miner {self.miner_name(addr)} returned a malformed key share")
                    continue
                shares.append(s)

        t = grant.threshold
        collect(t)
        if len(shares) < t:
            return _fail(FetchFailure.INSUFFICIENT_SHARES, f"{len(shares)} of {t} key shares", warnings)
        plaintext = self._try_decrypt(shares[:t], ct, owner)
        if plaintext is None:
            warnings.append("reconstructed key failed authentication; trying other share subsets")
            collect(len(holders))
            for n_tried, subset in enumerate(itertools.combinations(shares, t)):
                if n_tried >= MAX_SHARE_COMBINATIONS:
                    break
                plaintext = self._try_decrypt(list(subset), ct, owner)
                if plaintext is not None:
                    break
        if plaintext is None:
            return _fail(FetchFailure.DECRYPTION_FAILED, "no share subset yields an authentic key", warnings)
        return FetchOutcome(plaintext, None, "", warnings)

    @staticmethod
    def _try_decrypt(shares, ct, owner) -> bytes | None:
        try:
            key = crypto.SymmetricKey(shamir.reconstruct(shares))
            return crypto.decrypt(key, ct, (owner or "").encode())
        except (AuthenticationFailed, MismatchedShares):
            return None

    # comparison

    def publish_baseline(self, k_nodes: int, contents) -> TrustedNodeBaseline:
        return publish_baseline(k_nodes, contents)


def publish_baseline(k_nodes: int, contents) -> TrustedNodeBaseline:
    baseline = TrustedNodeBaseline(k_nodes)
    for i, content in enumerate(contents):
        baseline.store(f"{i}:{merkle.cid(content)}", content)
    return baseline


def expected_dosn_bytes(sizes, params: PublishParams) -> int:
    """Exact DOSN storage for contents of ``sizes`` with no cross-content dedup."""
    return sum(params.r * (s + crypto.OVERHEAD) + params.n * crypto.KEY_SIZE for s in sizes)


def compare_costs(contents, k_nodes: int = 5, miners: int = 6, params: PublishParams | None = None,
                  seed: int = 0) -> dict:
    """Store ``contents`` both ways and report total bytes for each."""
    params = params or PublishParams()
    baseline = publish_baseline(k_nodes, contents)
    net = DOSN(seed)
    for _ in range(miners):
        net.add_miner()
    owner = net.add_user("owner")
    for content in contents:
        net.publish(owner, content, {}, [], params)
    sizes = [len(c) for c in contents]
    return {
        "k_nodes": k_nodes,
        "miners": miners,
        "contents": len(contents),
        "content_bytes": sum(sizes),
        "baseline_bytes": baseline.total_bytes(),
        "dosn_bytes": net.storage.total_bytes(),
        "dosn_expected_bytes": expected_dosn_bytes(sizes, params),
        "params": params.to_json(),
    }
