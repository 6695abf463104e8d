"""Bit commitments: Naor's PRG scheme and a Regev-style dual-mode scheme.

The dual-mode scheme is keyed.  Under a *hiding* key ``(A, b)`` is uniform
and a commitment reveals (statistically) nothing; under a *binding* key
``b = As + e`` and the secret ``s`` extracts the committed bit.  Openings
are the subset of rows summed by the committer, stored as a bitmask.

All bit-strings are numpy ``uint8`` arrays of zeros and ones.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError, UsageError


# ---------------------------------------------------------------------------
# Naor's commitment

def _bytes_to_bits(data: bytes, nbits: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:nbits]


def _bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


@dataclass(frozen=True)
class NaorParams:
    n: int = 64
    toy: bool = False  # use the small enumerable expander (n <= 12)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("seed length must be positive")
        if self.toy and self.n > 12:
            raise ParameterError("the toy expander supports n <= 12 only")

    @property
    def expansion(self) -> int:
        return 3 * self.n

    def prg(self, seed) -> np.ndarray:
        """Expand an ``n``-bit seed to ``3n`` bits."""
        seed = np.asarray(seed, dtype=np.uint8)
        if seed.size != self.n:
            raise ParameterError(f"seed must have {self.n} bits")
        if self.toy:
            idx = int(seed @ (1 << np.arange(self.n - 1, -1, -1)))
            return _toy_table(self.n)[idx].copy()
        return _shake_expand(seed, self.n)


def _shake_expand(seed: np.ndarray, n: int) -> np.ndarray:
    h = hashlib.shake_128(b"naor-prg" + struct.pack("<I", n) + _bits_to_bytes(seed))
    return _bytes_to_bits(h.digest((3 * n + 7) // 8), 3 * n)


@lru_cache(maxsize=None)
def _toy_table(n: int) -> np.ndarray:
    """Output of the toy expander for every seed, row ``i`` for seed ``i``."""
    rows = []
    for i in range(1 << n):
        h = hashlib.shake_128(b"naor-toy" + struct.pack("<II", n, i)).digest((3 * n + 7) // 8)
        rows.append(_bytes_to_bits(h, 3 * n))
    return np.stack(rows)


def naor_commit(params: NaorParams, a: int, seed, rb) -> np.ndarray:
    """``r'_i = G_i(s)`` where ``rb_i = 0`` and ``G_i(s) xor a`` where ``rb_i = 1``."""
    rb = np.asarray(rb, dtype=np.uint8)
    if rb.size != params.expansion:
        raise ParameterError(f"receiver vector must have {params.expansion} bits")
    if a not in (0, 1):
        raise ParameterError("committed value must be a bit")
    return params.prg(seed) ^ (rb & np.uint8(a))


def naor_verify(params: NaorParams, commitment, rb, a: int, seed) -> bool:
    if a not in (0, 1):
        return False
    seed = np.asarray(seed, dtype=np.uint8)
    if seed.size != params.n or np.any(seed > 1):
        return False
    return bool(np.array_equal(naor_commit(params, a, seed, rb), np.asarray(commitment, dtype=np.uint8)))


def naor_equivocation_probability(params: NaorParams) -> float:
    """Exact probability over ``rb`` that some seed pair opens one commitment both ways.

    A double opening needs ``G(s1) = G(s2) xor rb``, so the bad receiver
    vectors are exactly the pairwise differences of PRG outputs.
    """
    if not params.toy:
        raise ParameterError("exhaustive search needs the toy expander")
    table = _toy_table(params.n)
    packed = np.packbits(table, axis=1)
    ints = np.zeros(len(table), dtype=np.uint64)
    for col in range(packed.shape[1]):
        ints = (ints << np.uint64(8)) | packed[:, col].astype(np.uint64)
    # s1 = s2 contributes rb = 0, for which both openings coincide
    diffs = np.unique((ints[:, None] ^ ints[None, :]).ravel())
    return len(diffs) / float(1 << params.expansion)


# ---------------------------------------------------------------------------
# Regev-style dual-mode commitment

def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class LweParams:
    n_dim: int
    p: int
    m_samples: int
    err_sigma: float

    def __post_init__(self):
        n = self.n_dim
        if n < 1:
            raise ParameterError("lattice dimension must be positive")
        if not (n * n <= self.p <= 2 * n * n and is_prime(self.p)):
            raise ParameterError(f"p={self.p} must be a prime in [{n * n}, {2 * n * n}]")
        need = 2 * (n + 1) * math.ceil(math.log2(self.p))
        if self.m_samples < need:
            raise ParameterError(f"m_samples={self.m_samples} below the minimum {need}")
        if self.err_sigma < 0:
            raise ParameterError("error width must be nonnegative")

    @property
    def half(self) -> int:
        return self.p // 2

    @property
    def error_budget(self) -> float:
        """Largest total error magnitude that still extracts correctly."""
        return self.p / 4 - 1

    @classmethod
    def standard(cls) -> "LweParams":
        return cls(16, 257, 306, 0.4)

    @classmethod
    def small(cls) -> "LweParams":
        """Tiny keys (a few hundred bits), used where keys are themselves coin-flipped."""
        return cls(2, 5, 18, 0.3)


@dataclass(frozen=True, eq=False)
class CommitKey:
    params: LweParams
    mode: str  # "hiding" or "binding"
    A: np.ndarray  # m x n over Z_p
    b: np.ndarray  # m over Z_p
    sk: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in ("hiding", "binding"):
            raise ParameterError(f"unknown key mode {self.mode!r}")
        m, n = self.params.m_samples, self.params.n_dim
        if self.A.shape != (m, n) or self.b.shape != (m,):
            raise ParameterError("key shape does not match parameters")
        if (self.sk is not None) != (self.mode == "binding"):
            raise ParameterError("a secret is present exactly for binding keys")

    def public(self) -> "CommitKey":
        """The same key seen by someone without the secret (treated as hiding-or-unknown)."""
        return CommitKey(self.params, "hiding", self.A, self.b, None)

    def __eq__(self, other):
        return (isinstance(other, CommitKey) and self.params == other.params and self.mode == other.mode
                and np.array_equal(self.A, other.A) and np.array_equal(self.b, other.b)
                and (self.sk is None) == (other.sk is None)
                and (self.sk is None or np.array_equal(self.sk, other.sk)))

    __hash__ = None


def _sample_error(params: LweParams, rng: np.random.Generator) -> np.ndarray:
    budget = params.error_budget
    while True:
        e = np.rint(rng.normal(0.0, params.err_sigma, size=params.m_samples)).astype(np.int64)
        # every subset sum lies between the negative and positive totals
        if e[e > 0].sum() < budget and -e[e < 0].sum() < budget:
            return e


def gen_binding(params: LweParams, rng: np.random.Generator) -> CommitKey:
    p = params.p
    A = rng.integers(0, p, size=(params.m_samples, params.n_dim), dtype=np.int64)
    s = rng.integers(0, p, size=params.n_dim, dtype=np.int64)
    b = (A @ s + _sample_error(params, rng)) % p
    return CommitKey(params, "binding", A, b, s)


def gen_hiding(params: LweParams, rng: np.random.Generator) -> CommitKey:
    p = params.p
    A = rng.integers(0, p, size=(params.m_samples, params.n_dim), dtype=np.int64)
    b = rng.integers(0, p, size=params.m_samples, dtype=np.int64)
    return CommitKey(params, "hiding", A, b, None)


def key_from_values(params: LweParams, values: np.ndarray) -> CommitKey:
    """Build a public key from ``m(n+1)`` residues (A row-major, then b)."""
    m, n = params.m_samples, params.n_dim
    values = np.asarray(values, dtype=np.int64)
    if values.shape != (m * (n + 1),):
        raise ParameterError("wrong number of key entries")
    return CommitKey(params, "hiding", values[: m * n].reshape(m, n) % params.p, values[m * n:] % params.p)


def key_to_values(key: CommitKey) -> np.ndarray:
    return np.concatenate([key.A.ravel(), key.b])


@dataclass(frozen=True)
class LweCommitment:
    a_vec: np.ndarray
    c_val: int

    def __eq__(self, other):
        return isinstance(other, LweCommitment) and self.c_val == other.c_val and np.array_equal(self.a_vec, other.a_vec)

    __hash__ = None


@dataclass(frozen=True)
class LweOpening:
    bit: int
    subset: np.ndarray  # bitmask of length m_samples


def lwe_commit(key: CommitKey, bit: int, rng: np.random.Generator, subset=None) -> tuple[LweCommitment, LweOpening]:
    if bit not in (0, 1):
        raise ParameterError("committed value must be a bit")
    m = key.params.m_samples
    mask = rng.integers(0, 2, size=m, dtype=np.uint8) if subset is None else np.asarray(subset, dtype=np.uint8)
    if mask.shape != (m,):
        raise ParameterError("subset mask has the wrong length")
    return _commit_with(key, bit, mask), LweOpening(bit, mask)


def _commit_with(key: CommitKey, bit: int, mask: np.ndarray) -> LweCommitment:
    p = key.params.p
    w = mask.astype(np.int64)
    a = (w @ key.A) % p
    c = int((w @ key.b + bit * key.params.half) % p)
    return LweCommitment(a, c)


def lwe_verify(key: CommitKey, com: LweCommitment, opening: LweOpening) -> bool:
    mask = np.asarray(opening.subset)
    if opening.bit not in (0, 1) or mask.shape != (key.params.m_samples,) or np.any((mask != 0) & (mask != 1)):
        return False
    return _commit_with(key, opening.bit, mask.astype(np.uint8)) == com


def lwe_extract(key: CommitKey, com: LweCommitment) -> int:
    if key.mode != "binding":
        raise UsageError("extraction needs a binding key")
    p = key.params.p
    d = int((com.c_val - int(np.asarray(com.a_vec, dtype=np.int64) @ key.sk)) % p)
    if d > p // 2:
        d -= p
    return 0 if abs(d) < p / 4 else 1


# batched forms, one row per committed bit

def commit_many(key: CommitKey, bits, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Commit to each bit of ``bits``; returns ``(a_rows, c_vals, masks)``."""
    bits = np.asarray(bits, dtype=np.int64)
    masks = rng.integers(0, 2, size=(bits.size, key.params.m_samples), dtype=np.uint8)
    a, c = commit_with_masks(key, bits, masks)
    return a, c, masks


def commit_with_masks(key: CommitKey, bits, masks) -> tuple[np.ndarray, np.ndarray]:
    p = key.params.p
    w = np.asarray(masks, dtype=np.int64)
    a = (w @ key.A) % p
    c = (w @ key.b + np.asarray(bits, dtype=np.int64) * key.params.half) % p
    return a, c


def verify_many(key: CommitKey, a_rows, c_vals, bits, masks) -> np.ndarray:
    """Per-row acceptance of openings ``(bits, masks)``."""
    bits = np.asarray(bits, dtype=np.int64)
    masks = np.asarray(masks)
    ok = np.isin(bits, (0, 1)) & np.all((masks == 0) | (masks == 1), axis=-1)
    a, c = commit_with_masks(key, np.where(ok, bits, 0), np.where(ok[:, None], masks, 0))
    return ok & np.all(a == np.asarray(a_rows), axis=1) & (c == np.asarray(c_vals))


def extract_many(key: CommitKey, a_rows, c_vals) -> np.ndarray:
    if key.mode != "binding":
        raise UsageError("extraction needs a binding key")
    p = key.params.p
    d = (np.asarray(c_vals, dtype=np.int64) - np.asarray(a_rows, dtype=np.int64) @ key.sk) % p
    d = np.where(d > p // 2, d - p, d)
    return (np.abs(d) >= p / 4).astype(np.uint8)


# ---------------------------------------------------------------------------
# key serialization: length-prefixed little-endian u64 arrays

def _pack_array(values) -> bytes:
    arr = np.asarray(values, dtype="<u8").ravel()
    return struct.pack("<Q", arr.size) + arr.tobytes()


def serialize_key(key: CommitKey) -> bytes:
    pr = key.params
    parts = [_pack_array([pr.p]), _pack_array([pr.n_dim]), _pack_array([pr.m_samples]),
             _pack_array(key.A), _pack_array(key.b)]
    if key.sk is not None:
        parts.append(_pack_array(key.sk))
    return b"".join(parts)


def deserialize_key(data: bytes, err_sigma: float = 0.0) -> CommitKey:
    arrays = []
    pos = 0
    while pos < len(data):
        if pos + 8 > len(data):
            raise ParameterError("truncated key encoding")
        (count,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        end = pos + 8 * count
        if end > len(data):
            raise ParameterError("truncated key encoding")
        arrays.append(np.frombuffer(data[pos:end], dtype="<u8").astype(np.int64))
        pos = end
    if len(arrays) not in (5, 6) or any(len(a) != 1 for a in arrays[:3]):
        raise ParameterError("malformed key encoding")
    p, n, m = (int(a[0]) for a in arrays[:3])
    params = LweParams(n, p, m, err_sigma)
    A, b = arrays[3], arrays[4]
    if A.size != m * n or b.size != m:
        raise ParameterError("key arrays do not match the header")
    if len(arrays) == 6:
        return CommitKey(params, "binding", A.reshape(m, n), b, arrays[5])
    return CommitKey(params, "hiding", A.reshape(m, n), b, None)
