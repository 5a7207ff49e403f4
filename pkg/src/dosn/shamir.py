"""Threshold secret sharing over GF(2^8), one polynomial per secret octet.

The field uses the AES reduction polynomial x^8 + x^4 + x^3 + x + 1.  Scalar
helpers (:func:`gf_add`, :func:`gf_mul`, :func:`gf_inv`) are exact reference
routines; :func:`split` and :func:`reconstruct` run the same arithmetic over
whole octet vectors with log/antilog tables.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivisionByZero, InsufficientShares, InvalidThreshold, MismatchedShares

POLY = 0x11B
GENERATOR = 0x03
MAX_SHARES = 255


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    """Carry-less multiply with interleaved reduction."""
    product = 0
    while b:
        if b & 1:
            product ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= POLY
    return product


def _build_tables():
    exp = np.zeros(512, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = gf_mul(x, GENERATOR)
    exp[255:510] = exp[:255]
    return exp, log


EXP, LOG = _build_tables()


def gf_inv(a: int) -> int:
    if a == 0:
        raise DivisionByZero("zero has no multiplicative inverse in GF(256)")
    return int(EXP[255 - LOG[a]])


def _mul_scalar(vec: np.ndarray, c: int) -> np.ndarray:
    if c == 0:
        return np.zeros_like(vec)
    out = EXP[LOG[vec] + LOG[c]]
    out[vec == 0] = 0
    return out


@dataclass(frozen=True)
class KeyShare:
    x: int
    y: bytes
    threshold: int
    share_count: int
    content_id: str = ""

    def to_json(self) -> dict:
        return {
            "content_id": self.content_id,
            "x": self.x,
            "t": self.threshold,
            "n": self.share_count,
            "y": self.y.hex(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KeyShare":
        return cls(int(obj["x"]), bytes.fromhex(obj["y"]), int(obj["t"]), int(obj["n"]),
                   obj.get("content_id", ""))


def split(secret: bytes, n: int, t: int, rng, content_id: str = "") -> list[KeyShare]:
    """Split ``secret`` into ``n`` shares, any ``t`` of which recover it.

    Coefficients of degree 1..t-1 are drawn from ``rng.randbytes`` in
    ascending degree order, one octet per secret position.
    """
    if not (1 <= t <= n <= MAX_SHARES):
        raise InvalidThreshold(f"need 1 <= t <= n <= {MAX_SHARES}, got t={t}, n={n}")
    if len(secret) == 0:
        raise ValueError("secret must be at least one octet")
    coeffs = [np.frombuffer(bytes(secret), dtype=np.uint8)]
    coeffs += [np.frombuffer(rng.randbytes(len(secret)), dtype=np.uint8) for _ in range(t - 1)]
    shares = []
    for x in range(1, n + 1):
        # Horner from the highest degree down
        y = coeffs[-1].copy()
        for c in reversed(coeffs[:-1]):
            y = _mul_scalar(y, x) ^ c
        shares.append(KeyShare(x, y.tobytes(), t, n, content_id))
    return shares


def reconstruct(shares) -> bytes:
    """Lagrange interpolation at x = 0 using the first ``t`` shares given."""
    shares = list(shares)
    if not shares:
        raise InsufficientShares("no shares supplied")
    head = shares[0]
    t = head.threshold
    seen = set()
    for s in shares:
        if (s.threshold, s.share_count, s.content_id, len(s.y)) != (
                t, head.share_count, head.content_id, len(head.y)):
            raise MismatchedShares("shares disagree on threshold, count, content or length")
        if s.x in seen:
            raise MismatchedShares(f"duplicate share index {s.x}")
        if not 1 <= s.x <= MAX_SHARES:
            raise MismatchedShares(f"share index {s.x} out of range")
        seen.add(s.x)
    if len(shares) < t:
        raise InsufficientShares(f"need {t} shares, got {len(shares)}")
    use = shares[:t]
    xs = [s.x for s in use]
    secret = np.zeros(len(head.y), dtype=np.uint8)
    for i, s in enumerate(use):
        # basis_i(0) = prod_{j != i} x_j / (x_j - x_i); subtraction is XOR
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if j != i:
                num = gf_mul(num, xj)
                den = gf_mul(den, xj ^ s.x)
        coef = gf_mul(num, gf_inv(den))
        secret ^= _mul_scalar(np.frombuffer(s.y, dtype=np.uint8), coef)
    return secret.tobytes()
