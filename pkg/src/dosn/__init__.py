"""Decentralized social network simulator.

Owners encrypt posts, shard the ciphertext across simulated storage miners
under Merkle content addressing, split the content key with threshold
secret sharing, and gate every read through an on-ledger access control
contract.
"""
from .contract import AccessGrant, Denied, Policy
from .crypto import Ciphertext, KeyPair, SymmetricKey, decrypt, encrypt, generate_key
from .ledger import Ledger, Transaction, replay, verify_chain
from .merkle import DagManifest, MerkleProof, build_dag, chunk, cid, prove, verify
from .protocol import DOSN, ContentRecord, FetchFailure, FetchOutcome, PublishParams, compare_costs
from .rng import Rng
from .shamir import KeyShare, reconstruct, split
from .storage import StorageNetwork, TrustedNodeBaseline, place

__version__ = "0.1.0"

__all__ = [
    "AccessGrant",
    "Denied",
    "Policy",
    "Ciphertext",
    "KeyPair",
    "SymmetricKey",
    "decrypt",
    "encrypt",
    "generate_key",
    "Ledger",
    "Transaction",
    "replay",
    "verify_chain",
    "DagManifest",
    "MerkleProof",
    "build_dag",
    "chunk",
    "cid",
    "prove",
    "verify",
    "DOSN",
    "ContentRecord",
    "FetchFailure",
    "FetchOutcome",
    "PublishParams",
    "compare_costs",
    "Rng",
    "KeyShare",
    "reconstruct",
    "split",
    "StorageNetwork",
    "TrustedNodeBaseline",
    "place",
]
