"""Chunking, content identifiers and binary Merkle trees with inclusion proofs.

A chunk's identifier is the plain SHA-256 of its octets.  Tree nodes are
domain separated: a leaf node hashes ``0x00 || cid`` and an interior node
hashes ``0x01 || left || right``.  An odd node at the end of a level is
promoted unchanged, so proofs may be shorter than ``ceil(log2(leaves))``.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import EmptyContent, IndexOutOfRange

LEAF_PREFIX = b"\x00"
INTERIOR_PREFIX = b"\x01"
DEFAULT_CHUNK_SIZE = 256 * 1024

LEFT = "left"
RIGHT = "right"


def cid(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _h(*parts: bytes) -> bytes:
    return hashlib.sha256(b"".join(parts)).digest()


def leaf_node(leaf_cid: str) -> bytes:
    return _h(LEAF_PREFIX, bytes.fromhex(leaf_cid))


def interior_node(left: bytes, right: bytes) -> bytes:
    return _h(INTERIOR_PREFIX, left, right)


def chunk(content: bytes, chunk_size: int = DEFAULT_CHUNK_SIZE, allow_empty: bool = False) -> list[bytes]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    if not content:
        if allow_empty:
            return [b""]
        raise EmptyContent("cannot chunk zero octets without allow_empty")
    return [content[i:i + chunk_size] for i in range(0, len(content), chunk_size)]


def _levels(leaf_cids: list[str]) -> list[list[bytes]]:
    level = [leaf_node(c) for c in leaf_cids]
    levels = [level]
    while len(level) > 1:
        nxt = [interior_node(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        levels.append(nxt)
        level = nxt
    return levels


def merkle_root(leaf_cids: list[str]) -> str:
    if not leaf_cids:
        raise EmptyContent("a tree needs at least one leaf")
    return _levels(leaf_cids)[-1][0].hex()


@dataclass(frozen=True)
class DagManifest:
    root: str
    leaf_cids: tuple[str, ...]
    chunk_size: int
    total_len: int

    @property
    def empty(self) -> bool:
        return self.total_len == 0

    def __post_init__(self):
        if not self.leaf_cids:
            raise ValueError("manifest needs at least one leaf")
        if self.total_len > len(self.leaf_cids) * self.chunk_size:
            raise ValueError("total_len exceeds leaf capacity")

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "chunk_size": self.chunk_size,
            "total_len": self.total_len,
            "leaves": list(self.leaf_cids),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DagManifest":
        return cls(obj["root"], tuple(obj["leaves"]), int(obj["chunk_size"]), int(obj["total_len"]))


def build_dag(chunks: list[bytes], chunk_size: int | None = None) -> DagManifest:
    if not chunks:
        raise EmptyContent("build_dag needs at least one chunk")
    if chunk_size is None:
        chunk_size = max(max(len(c) for c in chunks), 1)
    leaves = tuple(cid(c) for c in chunks)
    return DagManifest(merkle_root(list(leaves)), leaves, chunk_size, sum(len(c) for c in chunks))


@dataclass(frozen=True)
class MerkleProof:
    leaf_index: int
    leaf_count: int
    path: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "leaf_index": self.leaf_index,
            "leaf_count": self.leaf_count,
            "path": [{"digest": d, "side": s} for d, s in self.path],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MerkleProof":
        path = tuple((p["digest"], p["side"]) for p in obj["path"])
        return cls(int(obj["leaf_index"]), int(obj["leaf_count"]), path)


def _expected_sides(index: int, count: int) -> list[str | None]:
    """Sibling side per level for ``index``; None where the node is promoted."""
    sides = []
    while count > 1:
        if index % 2:
            sides.append(LEFT)
        elif index + 1 < count:
            sides.append(RIGHT)
        else:
            sides.append(None)
        index //= 2
        count = (count + 1) // 2
    return sides


def prove(manifest: DagManifest, leaf_index: int) -> MerkleProof:
    leaves = list(manifest.leaf_cids)
    if not 0 <= leaf_index < len(leaves):
        raise IndexOutOfRange(f"leaf {leaf_index} not in 0..{len(leaves) - 1}")
    path = []
    idx = leaf_index
    for level in _levels(leaves)[:-1]:
        sib = idx ^ 1
        if sib < len(level):
            path.append((level[sib].hex(), LEFT if sib < idx else RIGHT))
        idx //= 2
    return MerkleProof(leaf_index, len(leaves), tuple(path))


def verify(root: str, chunk_data: bytes, leaf_index: int, proof: MerkleProof) -> bool:
    try:
        if proof.leaf_index != leaf_index or not 0 <= leaf_index < proof.leaf_count:
            return False
        expected = [s for s in _expected_sides(leaf_index, proof.leaf_count) if s is not None]
        if len(expected) != len(proof.path):
            return False
        node = leaf_node(cid(chunk_data))
        for (digest, side), want in zip(proof.path, expected):
            if side != want:
                return False
            sib = bytes.fromhex(digest)
            node = interior_node(sib, node) if side == LEFT else interior_node(node, sib)
        return node.hex() == root
    except (ValueError, TypeError, AttributeError):
        return False
