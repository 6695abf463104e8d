"""Two-universal hashing, the privacy-amplification bound and distance estimates.

The hash families are random binary matrices (two-universal) and random
affine maps ``x -> Mx + b`` (strongly two-universal).  Bit-strings are
numpy ``uint8`` arrays of zeros and ones throughout.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError
from .fieldmath import Distribution


@dataclass(frozen=True)
class HashFunc:
    kind: str  # "matrix" or "affine"
    matrix: np.ndarray  # ell x n, uint8
    offset: np.ndarray | None  # ell bits for the affine kind

    def __post_init__(self):
        if self.kind not in ("matrix", "affine"):
            raise ParameterError(f"unknown hash kind {self.kind!r}")
        if self.matrix.ndim != 2:
            raise ParameterError("hash matrix must be two-dimensional")
        if self.kind == "affine":
            if self.offset is None or self.offset.shape != (self.matrix.shape[0],):
                raise ParameterError("affine hash needs an offset of length ell")

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def ell(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x) -> np.ndarray:
        return apply_hash(self, x)

    def describe(self) -> dict:
        """Wire form: the bits that define the function."""
        out = {"kind": self.kind, "matrix": self.matrix}
        if self.offset is not None:
            out["offset"] = self.offset
        return out

    @classmethod
    def from_description(cls, d: dict) -> "HashFunc":
        offset = d.get("offset")
        return cls(d["kind"], np.asarray(d["matrix"], dtype=np.uint8),
                   None if offset is None else np.asarray(offset, dtype=np.uint8))


def sample_hash(n: int, ell: int, strong: bool, rng: np.random.Generator) -> HashFunc:
    """Draw a member of the matrix family (or the affine family if ``strong``)."""
    if n < 1 or not 1 <= ell <= n:
        raise ParameterError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    matrix = rng.integers(0, 2, size=(ell, n), dtype=np.uint8)
    if strong:
        return HashFunc("affine", matrix, rng.integers(0, 2, size=ell, dtype=np.uint8))
    return HashFunc("matrix", matrix, None)


def apply_hash(f: HashFunc, x) -> np.ndarray:
    """``Mx (+ b)`` over GF(2); inputs shorter than ``n`` are zero-padded."""
    x = np.asarray(x, dtype=np.uint8)
    if x.size > f.n:
        raise ParameterError(f"input of {x.size} bits exceeds hash domain of {f.n} bits")
    # padding with zeros is the same as dropping the unused columns
    out = (f.matrix[:, : x.size].astype(np.int64) @ x.astype(np.int64)) & 1
    out = out.astype(np.uint8)
    if f.offset is not None:
        out ^= f.offset
    return out


def apply_hash_many(f: HashFunc, xs: np.ndarray) -> np.ndarray:
    """Hash each row of ``xs`` (shape k x n', n' <= n)."""
    xs = np.asarray(xs, dtype=np.uint8)
    if xs.shape[1] > f.n:
        raise ParameterError("inputs exceed hash domain")
    out = ((xs.astype(np.int64) @ f.matrix[:, : xs.shape[1]].T.astype(np.int64)) & 1).astype(np.uint8)
    if f.offset is not None:
        out ^= f.offset
    return out


@dataclass(frozen=True)
class PaBoundInput:
    hmin_X_given_U: float
    h0_E: float
    ell: int

    def __post_init__(self):
        for v in (self.hmin_X_given_U, self.h0_E):
            if not math.isfinite(v):
                raise ParameterError("entropies must be finite")
        if self.ell < 1:
            raise ParameterError("ell must be at least 1")


def pa_bound(inp: PaBoundInput) -> float:
    """½ · 2^{-(H_min(X|U) - H_0(E) - ell)/2}."""
    return 0.5 * 2.0 ** (-0.5 * (inp.hmin_X_given_U - inp.h0_E - inp.ell))


def empirical_tvd(samples_a: Iterable, samples_b: Iterable) -> float:
    """Total variation distance between the empirical histograms of two samples.

    Samples may be any hashable values; numpy rows are converted to bytes.
    """
    ca = Counter(_key(s) for s in samples_a)
    cb = Counter(_key(s) for s in samples_b)
    na, nb = sum(ca.values()), sum(cb.values())
    if na == 0 or nb == 0:
        raise ParameterError("both samples must be nonempty")
    return 0.5 * sum(abs(ca[k] / na - cb[k] / nb) for k in ca.keys() | cb.keys())


def _key(s):
    if isinstance(s, np.ndarray):
        return s.tobytes()
    if isinstance(s, list):
        return tuple(s)
    return s


def histogram_tvd(counts_a: np.ndarray, counts_b: np.ndarray) -> float:
    """TVD between two count vectors over the same cells."""
    pa = counts_a / counts_a.sum()
    pb = counts_b / counts_b.sum()
    return 0.5 * float(np.abs(pa - pb).sum())


# ---------------------------------------------------------------------------
# privacy-amplification experiment

MAX_SUPPORT = 1 << 16


def _outcome_bits(outcome, n: int) -> np.ndarray:
    if isinstance(outcome, str):
        return np.frombuffer(outcome.encode("ascii"), dtype=np.uint8) - ord("0")
    if isinstance(outcome, (int, np.integer)):
        return np.array([(int(outcome) >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)
    return np.asarray(outcome, dtype=np.uint8)


def conditional_min_entropy(xs: np.ndarray, probs: np.ndarray, leak: Sequence[int]) -> float:
    """Average-case H_min(X | X_leak) = -log2 sum_u max_x P(x, u)."""
    u = _leak_index(xs, leak)
    best: dict[int, float] = {}
    for ui, p in zip(u.tolist(), probs.tolist()):
        if p > best.get(ui, 0.0):
            best[ui] = p
    return -math.log2(sum(best.values()))


def _leak_index(xs: np.ndarray, leak: Sequence[int]) -> np.ndarray:
    if len(leak) == 0:
        return np.zeros(len(xs), dtype=np.int64)
    weights = 1 << np.arange(len(leak), dtype=np.int64)
    return xs[:, list(leak)].astype(np.int64) @ weights


def hash_distance(f: HashFunc, xs: np.ndarray, probs: np.ndarray, leak: Sequence[int]) -> float:
    """Exact δ(P_{F(X) U | F=f}, uniform × P_U) by enumeration of the support."""
    z = apply_hash_many(f, xs).astype(np.int64) @ (1 << np.arange(f.ell, dtype=np.int64))
    u = _leak_index(xs, leak)
    _, u_ids = np.unique(u, return_inverse=True)
    n_u = int(u_ids.max()) + 1
    cells = u_ids * (1 << f.ell) + z
    joint = np.bincount(cells, weights=probs, minlength=n_u << f.ell).reshape(n_u, 1 << f.ell)
    pu = joint.sum(axis=1, keepdims=True)
    return 0.5 * float(np.abs(joint - pu / (1 << f.ell)).sum())


@dataclass
class PaResult:
    empirical: float  # mean exact distance over sampled hash functions
    std_err: float
    bound: float
    hmin: float
    trials: int

    @property
    def holds(self) -> bool:
        return self.empirical <= self.bound + 3 * self.std_err + 1e-12


def pa_experiment(dist_X: Distribution, leak_bits: Sequence[int], ell: int, trials: int,
                  rng: np.random.Generator, n: int | None = None) -> PaResult:
    """Hash X down to ``ell`` bits while the bits at ``leak_bits`` are public.

    For each of ``trials`` sampled matrices the distance of (F(X), leak)
    from (uniform, leak) is computed exactly; the mean is compared with
    the bound at H_0(E) = 0.
    """
    if len(dist_X) > MAX_SUPPORT:
        raise ParameterError(f"support of {len(dist_X)} exceeds {MAX_SUPPORT}")
    if trials < 1:
        raise ParameterError("trials must be positive")
    outcomes = [o for o, _ in dist_X]
    if n is None:
        first = outcomes[0]
        if isinstance(first, (int, np.integer)):
            raise ParameterError("pass n for integer-coded outcomes")
        n = len(first)
    xs = np.stack([_outcome_bits(o, n) for o in outcomes])
    probs = np.array([float(p) for _, p in dist_X])
    hmin = conditional_min_entropy(xs, probs, leak_bits)
    bound = pa_bound(PaBoundInput(hmin, 0.0, ell))
    ds = np.array([hash_distance(sample_hash(n, ell, False, rng), xs, probs, leak_bits) for _ in range(trials)])
    se = float(ds.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return PaResult(float(ds.mean()), se, bound, hmin, trials)
