"""Single-writer, instantly final ledger.

Transactions are signed by their sender, carry a strictly increasing
per-sender nonce, and hold exactly one payload: a root anchor or one
Access Control Contract call.  By default every accepted transaction is
sealed into its own block, so the first transaction lands at height 1 on
top of the empty genesis block.  The contract state is a pure fold over the
committed transactions; :func:`replay` rebuilds it from blocks and checks
every digest and signature on the way.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import crypto
from .contract import CONTRACT_OPS, AccessControl, AccessGrant, Denied, Policy
from .errors import (
    BadNonce,
    BadSignature,
    ChainInvalid,
    DosnError,
    DuplicateContent,
    MalformedTransaction,
    TransactionRejected,
    error_by_name,
)

ZERO_DIGEST = "00" * 32
ACCEPTED = "accepted"
REJECTED = "rejected"


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()


def length_prefixed(*fields: bytes) -> bytes:
    return b"".join(len(f).to_bytes(8, "big") + f for f in fields)


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class Transaction:
    sender: str
    nonce: int
    payload: dict
    signature: bytes = b""

    def signing_bytes(self) -> bytes:
        return length_prefixed(self.sender.encode(), str(self.nonce).encode(), canonical_json(self.payload))

    @property
    def digest(self) -> str:
        return digest(length_prefixed(self.signing_bytes(), self.signature))

    @classmethod
    def create(cls, keypair: crypto.KeyPair, nonce: int, payload: dict) -> "Transaction":
        unsigned = cls(keypair.address, nonce, payload)
        return cls(keypair.address, nonce, payload, keypair.sign(unsigned.signing_bytes()))

    def signature_valid(self) -> bool:
        return crypto.verify(self.sender, self.signing_bytes(), self.signature)

    def to_json(self) -> dict:
        return {"sender": self.sender, "nonce": self.nonce, "payload": self.payload,
                "signature": self.signature.hex()}

    @classmethod
    def from_json(cls, obj: dict) -> "Transaction":
        return cls(obj["sender"], int(obj["nonce"]), obj["payload"], bytes.fromhex(obj["signature"]))


@dataclass
class Block:
    height: int
    parent_digest: str
    txs: list[Transaction] = field(default_factory=list)
    digest: str = ""

    def compute_digest(self) -> str:
        return digest(length_prefixed(str(self.height).encode(), self.parent_digest.encode(),
                                      *(t.digest.encode() for t in self.txs)))

    def seal(self) -> "Block":
        self.digest = self.compute_digest()
        return self

    def to_json(self) -> dict:
        return {"height": self.height, "parent": self.parent_digest, "digest": self.digest,
                "txs": [t.to_json() for t in self.txs]}

    @classmethod
    def from_json(cls, obj: dict) -> "Block":
        return cls(int(obj["height"]), obj["parent"], [Transaction.from_json(t) for t in obj["txs"]],
                   obj["digest"])


def genesis() -> Block:
    return Block(0, ZERO_DIGEST).seal()


@dataclass
class Receipt:
    tx_digest: str
    height: int | None
    status: str
    reason: str | None = None
    result: object = None
    error: DosnError | None = field(default=None, repr=False, compare=False)

    @property
    def accepted(self) -> bool:
        return self.status == ACCEPTED

    def raise_for_status(self) -> "Receipt":
        if not self.accepted:
            raise self.error if self.error is not None else error_by_name(self.reason)(self.reason)
        return self

    def to_json(self) -> dict:
        result = self.result.to_json() if hasattr(self.result, "to_json") else self.result
        return {"tx": self.tx_digest, "height": self.height, "status": self.status,
                "reason": self.reason, "result": result}


class LedgerState:
    def __init__(self):
        self.nonces: dict[str, int] = {}
        self.anchors: dict[str, dict] = {}
        self.acc = AccessControl()

    def to_json(self) -> dict:
        return {
            "nonces": dict(sorted(self.nonces.items())),
            "anchors": dict(sorted(self.anchors.items())),
            "acc": self.acc.to_json(),
        }

    def digest(self) -> str:
        return digest(canonical_json(self.to_json()))

    def apply(self, tx: Transaction, height: int):
        """Validate and apply ``tx``; raises without side effects on rejection."""
        if not isinstance(tx.payload, dict) or not isinstance(tx.payload.get("op"), str):
            raise MalformedTransaction("payload must be an object with an 'op'")
        if not tx.signature_valid():
            raise BadSignature("signature does not verify under sender")
        if tx.nonce <= self.nonces.get(tx.sender, 0):
            raise BadNonce(f"nonce {tx.nonce} not above {self.nonces.get(tx.sender, 0)}")
        op = tx.payload["op"]
        if op == "anchor_root":
            result = self._anchor(tx.sender, tx.payload, height)
        elif op in CONTRACT_OPS:
            result = self.acc.apply(tx.sender, tx.payload, self.anchors, height)
        else:
            raise MalformedTransaction(f"unknown op {op!r}")
        self.nonces[tx.sender] = tx.nonce
        return result

    def _anchor(self, sender: str, payload: dict, height: int) -> dict:
        content_id, root = payload.get("content_id"), payload.get("root")
        if not isinstance(content_id, str) or not isinstance(root, str) or len(root) != 64:
            raise MalformedTransaction("anchor needs string content_id and 32-octet hex root")
        if content_id in self.anchors:
            raise DuplicateContent(f"content {content_id[:12]} already anchored")
        self.anchors[content_id] = {"owner": sender, "root": root, "height": height}
        return {"content_id": content_id, "root": root}


class Ledger:
    def __init__(self, block_size: int = 1):
        if block_size < 1:
            raise ValueError("block_size must be >= 1")
        self.block_size = block_size
        self.blocks: list[Block] = [genesis()]
        self.pending: list[Transaction] = []
        self.state = LedgerState()

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    def submit(self, tx: Transaction) -> Receipt:
        height = self.height + 1
        try:
            result = self.state.apply(tx, height)
        except TransactionRejected as exc:
            return Receipt(tx.digest, None, REJECTED, exc.code, None, exc)
        self.pending.append(tx)
        if len(self.pending) >= self.block_size:
            self.seal()
        return Receipt(tx.digest, height, ACCEPTED, None, result)

    def seal(self) -> Block | None:
        if not self.pending:
            return None
        block = Block(self.height + 1, self.blocks[-1].digest, self.pending).seal()
        self.blocks.append(block)
        self.pending = []
        return block

    def next_nonce(self, address: str) -> int:
        pend = [t.nonce for t in self.pending if t.sender == address]
        return max([self.state.nonces.get(address, 0)] + pend) + 1

    def transact(self, keypair: crypto.KeyPair, payload: dict) -> Receipt:
        """Sign ``payload`` with the sender's next nonce and submit it."""
        return self.submit(Transaction.create(keypair, self.next_nonce(keypair.address), payload))

    # reads

    def get_root(self, content_id: str) -> str | None:
        anchor = self.state.anchors.get(content_id)
        return anchor["root"] if anchor else None

    def anchor_owner(self, content_id: str) -> str | None:
        anchor = self.state.anchors.get(content_id)
        return anchor["owner"] if anchor else None

    def get_state_digest(self) -> str:
        return self.state.digest()

    def policy(self, policy_id: int) -> Policy | None:
        return self.state.acc.policy(policy_id)

    def transactions(self) -> list[Transaction]:
        return [t for b in self.blocks for t in b.txs] + list(self.pending)

    def verify_chain(self) -> str:
        return verify_chain(self.blocks)

    # persistence

    def save(self, path) -> None:
        self.seal()
        tmp = Path(path).with_suffix(".tmp")
        with open(tmp, "w") as f:
            for b in self.blocks:
                f.write(json.dumps(b.to_json(), sort_keys=True) + "\n")
        tmp.replace(path)

    @classmethod
    def load(cls, path, block_size: int = 1) -> "Ledger":
        with open(path) as f:
            blocks = [Block.from_json(json.loads(line)) for line in f if line.strip()]
        return replay(blocks, block_size)


def replay(blocks: list[Block], block_size: int = 1) -> Ledger:
    """Rebuild a ledger from committed blocks, checking linkage, digests and signatures."""
    if not blocks:
        raise ChainInvalid("chain is empty")
    g = blocks[0]
    if g.height != 0 or g.parent_digest != ZERO_DIGEST or g.txs or g.digest != genesis().digest:
        raise ChainInvalid("bad genesis block")
    ledger = Ledger(block_size)
    for expect_height, block in enumerate(blocks[1:], start=1):
        if block.height != expect_height:
            raise ChainInvalid(f"block height {block.height}, expected {expect_height}")
        if block.parent_digest != ledger.blocks[-1].digest:
            raise ChainInvalid(f"block {block.height} does not link to its parent")
        if block.compute_digest() != block.digest:
            raise ChainInvalid(f"block {block.height} digest mismatch")
        if not block.txs:
            raise ChainInvalid(f"block {block.height} is empty")
        for tx in block.txs:
            try:
                ledger.state.apply(tx, block.height)
            except TransactionRejected as exc:
                raise ChainInvalid(f"block {block.height}: committed tx rejected ({exc.code})") from exc
        ledger.blocks.append(Block(block.height, block.parent_digest, list(block.txs), block.digest))
    return ledger


def replay_transactions(txs: list[Transaction]) -> Ledger:
    """Fold a bare transaction log into a fresh ledger, one block per tx."""
    ledger = Ledger()
    for tx in txs:
        ledger.submit(tx).raise_for_status()
    return ledger


def verify_chain(blocks: list[Block]) -> str:
    """Re-validate the full chain; returns the resulting state digest."""
    return replay(blocks).get_state_digest()


def anchor_root(ledger: Ledger, owner: crypto.KeyPair, content_id: str, root: str) -> Receipt:
    return ledger.transact(owner, {"op": "anchor_root", "content_id": content_id, "root": root})


def decision_from_json(obj: dict) -> AccessGrant | Denied:
    if not obj.get("granted"):
        return Denied(obj["reason"])
    return AccessGrant(
        policy_id=obj["policy_id"],
        content_id=obj["content_id"],
        root=obj["root"],
        leaf_cids=tuple(obj["leaf_cids"]),
        shard_locations={c: tuple(m) for c, m in obj["shard_locations"].items()},
        key_holders=tuple((a, x) for a, x in obj["key_holders"]),
        threshold=obj["threshold"],
    )
