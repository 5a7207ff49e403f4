"""Content encryption and actor identities.

Content is sealed with ChaCha20-Poly1305 under a fresh 32-octet key; actors
are Ed25519 key pairs whose address is the hex of the raw verification key.
"""
from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from .errors import AuthenticationFailed

KEY_SIZE = 32
NONCE_SIZE = 12
TAG_SIZE = 16
OVERHEAD = NONCE_SIZE + TAG_SIZE

Address = str


@dataclass(frozen=True)
class SymmetricKey:
    bytes: bytes

    def __post_init__(self):
        if len(self.bytes) != KEY_SIZE:
            raise ValueError(f"key must be {KEY_SIZE} octets, got {len(self.bytes)}")

    def hex(self) -> str:
        return self.bytes.hex()

    def __repr__(self) -> str:
        return "SymmetricKey(<redacted>)"


@dataclass(frozen=True)
class Ciphertext:
    nonce: bytes
    body: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return self.nonce + self.body + self.tag

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Ciphertext":
        if len(blob) < OVERHEAD:
            raise AuthenticationFailed("ciphertext shorter than nonce and tag")
        return cls(blob[:NONCE_SIZE], blob[NONCE_SIZE:-TAG_SIZE], blob[-TAG_SIZE:])

    def __len__(self) -> int:
        return len(self.nonce) + len(self.body) + len(self.tag)


class NonceSource:
    """Random 4-octet prefix followed by a 64-bit big-endian counter."""

    def __init__(self, rng, prefix: bytes | None = None, counter: int = 0):
        self.prefix = prefix if prefix is not None else rng.randbytes(4)
        self.counter = counter

    def next(self) -> bytes:
        self.counter += 1
        return self.prefix + self.counter.to_bytes(8, "big")


def generate_key(rng) -> SymmetricKey:
    return SymmetricKey(rng.randbytes(KEY_SIZE))


def encrypt(key: SymmetricKey, plaintext: bytes, ad: bytes = b"", nonce: bytes | None = None,
            rng=None) -> Ciphertext:
    """Seal ``plaintext``; the nonce comes from ``nonce`` or is drawn from ``rng``."""
    if nonce is None:
        if rng is None:
            raise ValueError("encrypt needs either a nonce or an rng")
        nonce = rng.randbytes(NONCE_SIZE)
    if len(nonce) != NONCE_SIZE:
        raise ValueError(f"nonce must be {NONCE_SIZE} octets")
    sealed = ChaCha20Poly1305(key.bytes).encrypt(nonce, bytes(plaintext), ad)
    return Ciphertext(nonce, sealed[:-TAG_SIZE], sealed[-TAG_SIZE:])


def decrypt(key: SymmetricKey, ct: Ciphertext, ad: bytes = b"") -> bytes:
    if len(ct.nonce) != NONCE_SIZE or len(ct.tag) != TAG_SIZE:
        raise AuthenticationFailed("malformed ciphertext")
    try:
        return ChaCha20Poly1305(key.bytes).decrypt(ct.nonce, ct.body + ct.tag, ad)
    except InvalidTag:
        raise AuthenticationFailed("ciphertext failed authentication") from None


@dataclass(frozen=True)
class KeyPair:
    signing_key: bytes
    address: Address

    @classmethod
    def from_signing_key(cls, signing_key: bytes) -> "KeyPair":
        sk = Ed25519PrivateKey.from_private_bytes(signing_key)
        vk = sk.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return cls(signing_key, vk.hex())

    @classmethod
    def generate(cls, rng) -> "KeyPair":
        return cls.from_signing_key(rng.randbytes(32))

    def sign(self, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(self.signing_key).sign(message)

    def __repr__(self) -> str:
        return f"KeyPair(address={self.address[:16]}...)"


def sign(keypair: KeyPair, message: bytes) -> bytes:
    return keypair.sign(message)


def verify(address: Address, message: bytes, signature: bytes) -> bool:
    try:
        vk = Ed25519PublicKey.from_public_bytes(bytes.fromhex(address))
        vk.verify(signature, message)
    except (InvalidSignature, ValueError, TypeError):
        return False
    return True
