"""Seeded randomness source.

Every random draw in the simulation (keys, nonces, polynomial coefficients,
placement shuffles, tamper positions) goes through :class:`Rng` so that a
run is reproducible from its seed.  The state round-trips through JSON so a
workspace can be resumed in a later process.
"""
from __future__ import annotations

import random


class Rng:
    def __init__(self, seed: int | str | None = 0):
        self._r = random.Random(seed)

    def randbytes(self, n: int) -> bytes:
        return self._r.randbytes(n)

    def randrange(self, *args) -> int:
        return self._r.randrange(*args)

    def random(self) -> float:
        return self._r.random()

    def choice(self, seq):
        return self._r.choice(seq)

    def sample(self, population, k):
        return self._r.sample(population, k)

    def shuffle(self, seq) -> None:
        self._r.shuffle(seq)

    def fork(self, label: str) -> "Rng":
        """Child generator seeded from this one and ``label``."""
        return Rng(f"{self._r.getrandbits(64)}:{label}")

    def getstate(self) -> list:
        version, internal, gauss = self._r.getstate()
        return [version, list(internal), gauss]

    def setstate(self, state: list) -> None:
        version, internal, gauss = state
        self._r.setstate((version, tuple(internal), gauss))

    @classmethod
    def from_state(cls, state: list) -> "Rng":
        rng = cls(0)
        rng.setstate(state)
        return rng
