"""Password codes, syndrome-based error correction and the message MAC."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from ..errors import ParameterError
from ..fieldmath import binary_entropy


# ---------------------------------------------------------------------------
# password code: |W| basis strings with a minimum pairwise distance

@dataclass(frozen=True, eq=False)
class PasswordCode:
    words: np.ndarray  # |W| x n, uint8
    min_distance: int

    @property
    def n(self) -> int:
        return self.words.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __getitem__(self, w: int) -> np.ndarray:
        if not 0 <= w < len(self.words):
            raise ParameterError(f"password {w} outside the dictionary of size {len(self.words)}")
        return self.words[w]

    def decode(self, word) -> int:
        """Index of the nearest codeword (smallest index on ties)."""
        d = (self.words != np.asarray(word, dtype=np.uint8)).sum(axis=1)
        return int(np.argmin(d))

    def restricted(self, positions) -> "PasswordCode":
        words = self.words[:, positions]
        return PasswordCode(words, pairwise_min_distance(words))


def pairwise_min_distance(words: np.ndarray) -> int:
    if len(words) < 2:
        return words.shape[1]
    d = (words[:, None, :] != words[None, :, :]).sum(axis=2)
    return int(d[np.triu_indices(len(words), 1)].min())


def random_code(size: int, n: int, delta: float, rng: np.random.Generator, max_tries: int = 10000) -> PasswordCode:
    """Random codewords, each redrawn until it is at distance ``>= delta n`` from the earlier ones."""
    if not 1 <= size <= 256:
        raise ParameterError("dictionary size must be between 1 and 256")
    d = math.ceil(delta * n)
    words: list[np.ndarray] = []
    tries = 0
    while len(words) < size:
        cand = rng.integers(0, 2, size=n, dtype=np.uint8)
        if all(int((cand != w).sum()) >= d for w in words):
            words.append(cand)
        tries += 1
        if tries > max_tries:
            raise ParameterError(f"could not find {size} words of length {n} at distance {d}")
    arr = np.stack(words)
    return PasswordCode(arr, pairwise_min_distance(arr))


# ---------------------------------------------------------------------------
# syndromes of random linear codes, applied chunk-wise

CHUNK = 16


@dataclass(frozen=True)
class SyndromeSpec:
    length: int
    phi2: float  # correctable error fraction

    def chunks(self) -> list[tuple[int, int, int]]:
        """(start, length, rows) per chunk."""
        out = []
        for start in range(0, self.length, CHUNK):
            L = min(CHUNK, self.length - start)
            r = min(L, math.ceil(L * binary_entropy(min(self.phi2, 0.5))) + 2)
            out.append((start, L, r))
        return out


def parity_checks(spec: SyndromeSpec, j: int) -> list[np.ndarray]:
    """Parity-check matrices selected by index ``j``."""
    rng = np.random.default_rng([j & 0xFFFFFFFFFFFFFFFF, spec.length])
    return [rng.integers(0, 2, size=(r, L), dtype=np.uint8) for _, L, r in spec.chunks()]


def syndrome(spec: SyndromeSpec, j: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if x.size != spec.length:
        raise ParameterError(f"syndrome input must have {spec.length} bits")
    parts = [(H.astype(np.int64) @ x[s:s + L]) & 1 for H, (s, L, _) in zip(parity_checks(spec, j), spec.chunks())]
    return np.concatenate(parts).astype(np.uint8) if parts else np.zeros(0, dtype=np.uint8)


MAX_LEADER_WEIGHT = 4


@lru_cache(maxsize=64)
def _patterns(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Error patterns of weight <= MAX_LEADER_WEIGHT in enumeration order, as bit rows and ints."""
    rows = [()]
    for w in range(1, min(MAX_LEADER_WEIGHT, L) + 1):
        rows.extend(combinations(range(L), w))
    bits = np.zeros((len(rows), L), dtype=np.uint8)
    ints = np.zeros(len(rows), dtype=np.int64)
    for k, pos in enumerate(rows):
        for i in pos:
            bits[k, i] = 1
            ints[k] |= 1 << i
    return bits, ints


@lru_cache(maxsize=4096)
def _leaders(H_bytes: bytes, r: int, L: int) -> dict[int, int]:
    """Minimum-weight error pattern (as an int) for each reachable syndrome.

    Among patterns of equal weight the first in enumeration order wins.
    """
    H = np.frombuffer(H_bytes, dtype=np.uint8).reshape(r, L)
    bits, ints = _patterns(L)
    syn = ((bits.astype(np.int64) @ H.T.astype(np.int64)) & 1) @ (1 << np.arange(r - 1, -1, -1, dtype=np.int64))
    keys, first = np.unique(syn, return_index=True)
    return dict(zip(keys.tolist(), ints[first].tolist()))


def correct(spec: SyndromeSpec, j: int, x_hat, syn) -> np.ndarray | None:
    """Move ``x_hat`` to the nearest string with syndrome ``syn``; ``None`` if no pattern fits."""
    x_hat = np.asarray(x_hat, dtype=np.uint8).copy()
    syn = np.asarray(syn, dtype=np.uint8)
    if x_hat.size != spec.length:
        raise ParameterError("wrong input length")
    if syn.size != sum(r for _, _, r in spec.chunks()):
        raise ParameterError("wrong syndrome length")
    off = 0
    for H, (s, L, r) in zip(parity_checks(spec, j), spec.chunks()):
        diff = ((H.astype(np.int64) @ x_hat[s:s + L]) & 1).astype(np.uint8) ^ syn[off:off + r]
        off += r
        key = int("".join(map(str, diff)) or "0", 2)
        e = _leaders(H.tobytes(), r, L).get(key)
        if e is None:
            return None
        for i in range(L):
            if (e >> i) & 1:
                x_hat[s + i] ^= 1
    return x_hat


# ---------------------------------------------------------------------------
# message authentication: polynomial evaluation over GF(2^127 - 1)

MAC_PRIME = (1 << 127) - 1
TAG_BITS = 16
_WORD = 15  # bytes per field element, below the prime


@dataclass(frozen=True)
class MacKey:
    slope: int
    offset: int

    @classmethod
    def random(cls, rng: np.random.Generator) -> "MacKey":
        def draw():
            return int.from_bytes(rng.bytes(16), "little") % MAC_PRIME
        return cls(draw(), draw())


def mac(key: MacKey, parts: list[bytes]) -> int:
    """Tag of a sequence of byte strings, truncated to ``TAG_BITS`` bits.

    Each part is first compressed with SHA-256 (hash-then-MAC), then the
    fixed-length digests are evaluated as a polynomial in the key, so
    different splittings of the same bytes give different inputs.
    """
    acc = 0
    k = key.slope
    p = MAC_PRIME
    for part in parts:
        data = hashlib.sha256(part).digest()
        for i in range(0, len(data), _WORD):
            acc = (acc * k + int.from_bytes(data[i:i + _WORD], "little") + 1) % p
    return ((acc * k + key.offset) % p) & ((1 << TAG_BITS) - 1)
