"""Deterministic RNG derivation.

Every random draw in the toolkit descends from a single 64-bit master
seed. Child streams are split off per operation by hashing a label path
(e.g. seed -> "twi" -> model_id -> "shuffle"), so adding or reordering
unrelated operations never perturbs an existing stream, and regenerating
with the same seed is byte-identical.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def child_seed(seed: int, *labels: object) -> int:
    """Derive a 64-bit child seed from a master seed and a label path."""
    h = hashlib.sha256()
    h.update(int(seed).to_bytes(16, "little", signed=True))
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


def derive_rng(seed: int, *labels: object) -> np.random.Generator:
    """A PCG64 generator for one operation, split off the master seed."""
    return np.random.Generator(np.random.PCG64(child_seed(seed, *labels)))


class HashRng:
    """Counter-based deterministic stream: SHA-256 over (key, counter).

    Slower than PCG64 but its output is fixed by this file alone, with no
    dependency on numpy internals, so artifacts built from it (task
    bundles, golden files) stay byte-identical across library versions
    and platforms. Used for all task-generation randomness.
    """

    def __init__(self, seed: int, *labels: object):
        h = hashlib.sha256()
        h.update(int(seed).to_bytes(16, "little", signed=True))
        for label in labels:
            h.update(b"/")
            h.update(str(label).encode("utf-8"))
        self._key = h.digest()
        self._counter = 0
        self._buf = b""

    def next_u64(self) -> int:
        if len(self._buf) < 8:
            self._buf = hashlib.sha256(
                self._key + self._counter.to_bytes(8, "little")).digest()
            self._counter += 1
        v = int.from_bytes(self._buf[:8], "little")
        self._buf = self._buf[8:]
        return v

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid bias."""
        if n <= 0:
            raise ValueError("below() needs n > 0")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def coin(self) -> bool:
        return self.below(2) == 1

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, n: int, k: int) -> list:
        """k distinct indices drawn without replacement from range(n)."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]

    def pick(self, items):
        return items[self.below(len(items))]
