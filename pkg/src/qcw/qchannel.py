"""Classical simulation of BB84 prepare-and-measure transmission.

A BB84 state ``|x>_theta`` measured position-wise in the computational
(``+``, coded 0) or diagonal (``x``, coded 1) basis is simulated exactly:
a matching basis returns the encoded bit, a non-matching basis a fresh
uniform bit.  Coherent multi-qubit attacks are out of scope.

Party code only ever holds :class:`QubitBatch` / :class:`StoredQubit`
handles.  The prepared states live in a module-private registry and are
reachable only through :func:`measure` and the test helper in
``qcw.testing``.
"""

from __future__ import annotations

import enum
import weakref
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UsageError


class Basis(enum.IntEnum):
    PLUS = 0
    CROSS = 1


@dataclass(frozen=True)
class Bb84State:
    bit: int
    basis: Basis


@dataclass(frozen=True)
class ChannelConfig:
    noise_phi: float = 0.0
    rng_seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.noise_phi < 0.5:
            raise ParameterError(f"noise must satisfy 0 <= phi < 1/2, got {self.noise_phi}")


# batch -> (bits, bases); kept out of the handle objects on purpose
_STATES: "weakref.WeakKeyDictionary[QubitBatch, tuple[np.ndarray, np.ndarray]]" = weakref.WeakKeyDictionary()


class QubitBatch:
    """Handle to ``n`` transmitted qubits.

    Each position can be measured once, either individually through
    ``batch[i]`` or in bulk with :meth:`measure_all` / :meth:`measure_at`.
    """

    __slots__ = ("_consumed", "__weakref__")

    def __init__(self, n: int):
        self._consumed = np.zeros(n, dtype=bool)

    def __len__(self) -> int:
        return len(self._consumed)

    def __getitem__(self, i: int) -> "StoredQubit":
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        return StoredQubit(self, i % len(self))

    def __iter__(self):
        return (StoredQubit(self, i) for i in range(len(self)))

    @property
    def consumed(self) -> np.ndarray:
        return self._consumed.copy()

    def fresh(self) -> bool:
        return not self._consumed.any()

    def measure_at(self, positions, bases, rng: np.random.Generator) -> np.ndarray:
        """Measure the qubits at ``positions`` in ``bases``; returns the outcomes."""
        positions = np.asarray(positions, dtype=np.int64)
        bases = np.asarray(bases, dtype=np.uint8)
        if positions.shape != bases.shape:
            raise ParameterError("positions and bases differ in length")
        if positions.size == 0:
            return np.zeros(0, dtype=np.uint8)
        if len(np.unique(positions)) != positions.size:
            raise UsageError("a qubit cannot be measured twice")
        if self._consumed[positions].any():
            raise UsageError("qubit already measured")
        bits, true_bases = _STATES[self]
        self._consumed[positions] = True
        random_bits = rng.integers(0, 2, size=positions.size, dtype=np.uint8)
        return np.where(true_bases[positions] == bases, bits[positions], random_bits).astype(np.uint8)

    def measure_all(self, bases, rng: np.random.Generator) -> np.ndarray:
        return self.measure_at(np.arange(len(self)), bases, rng)


@dataclass(frozen=True)
class StoredQubit:
    """Handle to one position of a batch."""

    batch: QubitBatch = field(repr=False)
    index: int

    @property
    def consumed(self) -> bool:
        return bool(self.batch._consumed[self.index])


def send_bb84(x, theta, cfg: ChannelConfig, rng: np.random.Generator | None = None) -> QubitBatch:
    """Prepare ``|x>_theta``; each position is flipped independently with probability φ."""
    x = np.asarray(x, dtype=np.uint8)
    theta = np.asarray(theta, dtype=np.uint8)
    if x.shape != theta.shape or x.ndim != 1:
        raise ParameterError(f"bit and basis strings differ in length ({x.size} vs {theta.size})")
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    bits = x.copy()
    if cfg.noise_phi > 0 and x.size:
        bits ^= (rng.random(x.size) < cfg.noise_phi).astype(np.uint8)
    batch = QubitBatch(x.size)
    _STATES[batch] = (bits, theta.copy())
    return batch


def measure(q: StoredQubit, basis: Basis | int, rng: np.random.Generator) -> int:
    return int(q.batch.measure_at([q.index], [int(basis)], rng)[0])


def random_bits(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def receiver_honest(qs: QubitBatch, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Measure every qubit in a uniformly random basis; returns ``(theta_hat, x_hat)``."""
    if not qs.fresh():
        raise UsageError("honest receiver needs fresh qubits")
    theta_hat = random_bits(len(qs), rng)
    return theta_hat, qs.measure_all(theta_hat, rng)


@dataclass
class StorageView:
    """What a bounded-storage receiver ends up knowing.

    ``known`` marks positions whose bit the receiver learned with certainty
    (stored and later measured in the right basis, or measured immediately
    in a basis that turned out to match).
    """

    theta_hat: np.ndarray  # basis used per position (stored ones: the announced basis)
    x_hat: np.ndarray
    stored: np.ndarray  # bool mask
    known: np.ndarray  # bool mask


class BoundedStorageReceiver:
    """Receiver that keeps ⌊γn⌋ qubits until the bases are announced.

    ``immediate_bases`` may be given to fix the bases used for the positions
    measured right away; the default is uniform random.
    """

    def __init__(self, gamma: float, rng: np.random.Generator, store_positions=None, immediate_bases=None):
        if not 0.0 <= gamma <= 1.0:
            raise ParameterError(f"gamma must lie in [0, 1], got {gamma}")
        self.gamma = gamma
        self.rng = rng
        self._store_positions = store_positions
        self._immediate_bases = immediate_bases
        self._qs: QubitBatch | None = None
        self.stored = None
        self.theta_hat = None
        self.x_hat = None

    def receive(self, qs: QubitBatch) -> None:
        n = len(qs)
        k = int(np.floor(self.gamma * n))
        if self._store_positions is None:
            pos = np.sort(self.rng.choice(n, size=k, replace=False)) if k else np.zeros(0, dtype=np.int64)
        else:
            pos = np.asarray(self._store_positions, dtype=np.int64)
            if pos.size > k:
                raise ParameterError(f"cannot store {pos.size} qubits with capacity {k}")
        self.stored = np.zeros(n, dtype=bool)
        self.stored[pos] = True
        now = np.flatnonzero(~self.stored)
        bases = random_bits(now.size, self.rng) if self._immediate_bases is None \
            else np.asarray(self._immediate_bases, dtype=np.uint8)[now]
        self.theta_hat = np.zeros(n, dtype=np.uint8)
        self.x_hat = np.zeros(n, dtype=np.uint8)
        self.theta_hat[now] = bases
        self.x_hat[now] = qs.measure_at(now, bases, self.rng)
        self._qs = qs

    def announce(self, theta) -> StorageView:
        """Measure the stored qubits in the announced bases."""
        if self._qs is None:
            raise UsageError("announce before receive")
        theta = np.asarray(theta, dtype=np.uint8)
        pos = np.flatnonzero(self.stored)
        self.theta_hat[pos] = theta[pos]
        self.x_hat[pos] = self._qs.measure_at(pos, theta[pos], self.rng)
        known = self.stored | (self.theta_hat == theta)
        return StorageView(self.theta_hat.copy(), self.x_hat.copy(), self.stored.copy(), known)


def receiver_bounded_storage(qs: QubitBatch, gamma: float, announce_theta, rng: np.random.Generator) -> StorageView:
    """Store ⌊γn⌋ random positions, measure the rest at random, then use the announced bases."""
    r = BoundedStorageReceiver(gamma, rng)
    r.receive(qs)
    return r.announce(announce_theta)


@dataclass(frozen=True)
class SamplingCheck:
    test_err: float
    remainder_err: float
    degenerate: bool  # no matching-basis position in the test set


def sampling_estimate_check(x, x_hat, theta, theta_hat, test_set) -> SamplingCheck:
    """Relative error on the matching-basis positions inside and outside ``test_set``."""
    x, x_hat = np.asarray(x, dtype=np.uint8), np.asarray(x_hat, dtype=np.uint8)
    match = np.asarray(theta, dtype=np.uint8) == np.asarray(theta_hat, dtype=np.uint8)
    in_t = np.zeros(x.size, dtype=bool)
    test_set = np.asarray(test_set, dtype=np.int64)
    if test_set.size and (test_set.min() < 0 or test_set.max() >= x.size):
        raise ParameterError("test set out of range")
    in_t[test_set] = True
    err = x != x_hat
    t_mask, r_mask = in_t & match, ~in_t & match
    test_err = float(err[t_mask].mean()) if t_mask.any() else 0.0
    rem_err = float(err[r_mask].mean()) if r_mask.any() else 0.0
    return SamplingCheck(test_err, rem_err, not t_mask.any())


def _inspect(batch: QubitBatch) -> tuple[np.ndarray, np.ndarray]:
    bits, bases = _STATES[batch]
    return bits.copy(), bases.copy()


def reprepare(batch: QubitBatch, positions, bits, bases) -> QubitBatch:
    """Forward ``batch`` with already-measured ``positions`` replaced by fresh states.

    Unmeasured positions move to the new batch untouched (and are marked
    used in the old one); this is how an interceptor resends qubits
    without ever reading the states it did not measure.
    """
    positions = np.asarray(positions, dtype=np.int64)
    if positions.size and not batch._consumed[positions].all():
        raise UsageError("only measured positions can be re-prepared")
    old_bits, old_bases = _STATES[batch]
    if batch._consumed.sum() != positions.size:
        raise UsageError("some qubits were measured but not re-prepared")
    new_bits, new_bases = old_bits.copy(), old_bases.copy()
    new_bits[positions] = np.asarray(bits, dtype=np.uint8)
    new_bases[positions] = np.asarray(bases, dtype=np.uint8)
    out = QubitBatch(len(batch))
    _STATES[out] = (new_bits, new_bases)
    batch._consumed[:] = True
    return out
