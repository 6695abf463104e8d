"""BB84-type preparation and the commit-and-open verification step.

Alice prepares ``|x>_theta`` for random ``x`` and ``theta``; Bob measures.
In the compiled form Bob then commits position-wise to ``(theta_hat_i,
x_hat_i)``, Alice picks a random test set ``T`` of size ``ceil(alpha m)``,
Bob opens there, and Alice accepts if the openings verify and at most a
``phi'`` fraction of the tested matching-basis positions disagree.  Both
sides then keep only the positions outside ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import ParameterError
from ..harness.session import Aborted, Session
from ..mixedcommit import CommitKey, LweParams, commit_many, gen_binding, verify_many
from ..qchannel import BoundedStorageReceiver, ChannelConfig, QubitBatch, random_bits, send_bb84

MIN_QUBITS = 8


@dataclass
class Bb84Run:
    """Alice's and Bob's strings; ``keep`` is the surviving index set."""

    x: np.ndarray
    theta: np.ndarray
    theta_hat: np.ndarray | None = None
    x_hat: np.ndarray | None = None
    keep: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.x.size


@lru_cache(maxsize=8)
def default_key(seed: int = 0) -> CommitKey:
    """Binding key used for Bob's commitments when the config supplies none."""
    return gen_binding(LweParams.standard(), np.random.default_rng([seed, 0x6B6579]))


def commit_key(cfg: dict) -> CommitKey:
    key = cfg.get("key")
    return key if key is not None else default_key(int(cfg.get("key_seed", 0)))


# ---------------------------------------------------------------------------
# receivers

class HonestReceiver:
    """Measures every qubit in a random basis on arrival."""

    def __init__(self, rng: np.random.Generator, cfg: dict):
        self.rng = rng
        self.cfg = cfg
        self.theta_hat = None
        self.x_hat = None
        self._masks = None
        self._committed = None

    def receive(self, qs: QubitBatch) -> None:
        self.theta_hat = random_bits(len(qs), self.rng)
        self.x_hat = qs.measure_all(self.theta_hat, self.rng)

    def committed_values(self) -> tuple[np.ndarray, np.ndarray]:
        return self.theta_hat, self.x_hat

    def commit(self, key: CommitKey) -> dict:
        th, xh = self.committed_values()
        self._committed = (th.copy(), xh.copy())
        bits = np.stack([th, xh], axis=1).ravel()
        a, c, masks = commit_many(key, bits, self.rng)
        m = th.size
        self._masks = masks.reshape(m, 2, -1)
        return {"a": a.reshape(m, 2, -1), "c": c.reshape(m, 2)}

    def open(self, test_set) -> dict:
        t = np.asarray(test_set, dtype=np.int64)
        th, xh = self._committed
        return {"theta_hat": th[t], "x_hat": xh[t], "masks": self._masks[t]}

    def restrict(self, keep: np.ndarray) -> None:
        self.theta_hat = self.theta_hat[keep]
        self.x_hat = self.x_hat[keep]

    def learn_theta(self, theta) -> None:
        """Hook for receivers that act once the bases are public."""


class DelayedMeasurementReceiver(HonestReceiver):
    """Commits to guesses without measuring; measures the survivors afterwards."""

    def receive(self, qs: QubitBatch) -> None:
        self._qs = qs
        self.theta_hat = random_bits(len(qs), self.rng)
        self.x_hat = random_bits(len(qs), self.rng)

    def restrict(self, keep: np.ndarray) -> None:
        self.theta_hat = self.theta_hat[keep]
        self.x_hat = self._qs.measure_at(keep, self.theta_hat, self.rng)
        self._qs = None

    def learn_theta(self, theta) -> None:
        # without a verification step nothing has been measured yet: use the announced bases
        if self._qs is not None:
            self.x_hat = self._qs.measure_all(np.asarray(theta, dtype=np.uint8), self.rng)
            self._qs = None


class BoundedStorageBob(HonestReceiver):
    """Stores a ``gamma`` fraction of all qubits and measures them once the bases are public.

    For stored positions it commits to random guesses.
    """

    def __init__(self, rng: np.random.Generator, cfg: dict):
        super().__init__(rng, cfg)
        self.gamma = float(cfg.get("gamma", 0.04))
        self._store = None
        self.stored = None

    def receive(self, qs: QubitBatch) -> None:
        self._store = BoundedStorageReceiver(self.gamma, self.rng)
        self._store.receive(qs)
        self.stored = self._store.stored.copy()
        self.theta_hat = self._store.theta_hat.copy()
        self.x_hat = self._store.x_hat.copy()
        s = np.flatnonzero(self.stored)
        self.theta_hat[s] = random_bits(s.size, self.rng)
        self.x_hat[s] = random_bits(s.size, self.rng)
        self._keep = np.arange(len(qs))

    def restrict(self, keep: np.ndarray) -> None:
        super().restrict(keep)
        self._keep = keep
        self.stored = self.stored[keep]

    def learn_theta(self, theta) -> None:
        theta = np.asarray(theta, dtype=np.uint8)
        full = np.zeros(self._store.stored.size, dtype=np.uint8)
        full[self._keep] = theta
        # stored qubits that fell into the test set are of no further use
        lost = np.setdiff1d(np.flatnonzero(self._store.stored), self._keep)
        full[lost] = 0
        view = self._store.announce(full)
        self.theta_hat[self.stored] = theta[self.stored]
        self.x_hat[self.stored] = view.x_hat[self._keep][self.stored]


RECEIVERS = {
    "honest": HonestReceiver,
    "delayed": DelayedMeasurementReceiver,
    "bqsm": BoundedStorageBob,
}


# ---------------------------------------------------------------------------
# protocol steps

def test_set_size(m: int, alpha: float) -> int:
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return math.ceil(alpha * m)


def surviving_count(m: int, cfg: dict) -> int:
    return m - test_set_size(m, cfg["alpha"]) if cfg.get("compiled") else m


def run_preparation(session: Session, cfg: dict, alice_rng: np.random.Generator, bob) -> Bb84Run:
    m = int(cfg["m"])
    if m < MIN_QUBITS:
        raise ParameterError(f"need at least {MIN_QUBITS} qubits, got {m}")
    x = random_bits(m, alice_rng)
    theta = random_bits(m, alice_rng)
    qs = send_bb84(x, theta, ChannelConfig(float(cfg.get("phi", 0.0))), session.rng("channel"))
    bob.receive(session.send_qubits("A", qs))
    return Bb84Run(x, theta)


def compile_verification(session: Session, cfg: dict, run: Bb84Run, alice_rng: np.random.Generator, bob) -> Bb84Run:
    """Commit, challenge, open and test; aborts on failure, else restricts both sides."""
    key = commit_key(cfg)
    m = run.m
    com = session.send("B", "commit", bob.commit(key.public()))
    size = test_set_size(m, float(cfg["alpha"]))
    t = np.sort(alice_rng.choice(m, size=size, replace=False))
    delivered_t = session.send("A", "test_set", {"T": t})
    opening = session.send("B", "open", bob.open(_index_array(delivered_t["T"], m)))
    accepted, reason = check_opening(key, com, t, opening, run, float(cfg.get("phi_prime", 0.0)))
    if not accepted:
        raise Aborted(reason, "A")
    keep = np.setdiff1d(np.arange(m), t)
    bob.restrict(np.setdiff1d(np.arange(m), _index_array(delivered_t["T"], m)))
    return Bb84Run(run.x[keep], run.theta[keep], keep=keep)


def _index_array(values, m: int) -> np.ndarray:
    t = np.asarray(values, dtype=np.int64).ravel()
    if t.size and (t.min() < 0 or t.max() >= m or len(np.unique(t)) != t.size):
        raise ParameterError("malformed index set")
    return t


def check_opening(key: CommitKey, com: dict, t: np.ndarray, opening: dict, run: Bb84Run,
                  phi_prime: float) -> tuple[bool, str | None]:
    th = np.asarray(opening["theta_hat"], dtype=np.int64).ravel()
    xh = np.asarray(opening["x_hat"], dtype=np.int64).ravel()
    masks = np.asarray(opening["masks"])
    mdim = key.params.m_samples
    if th.size != t.size or xh.size != t.size or masks.shape != (t.size, 2, mdim):
        return False, "bad-opening"
    a = np.asarray(com["a"])[t].reshape(-1, key.params.n_dim)
    c = np.asarray(com["c"])[t].reshape(-1)
    bits = np.stack([th, xh], axis=1).ravel()
    if not verify_many(key, a, c, bits, masks.reshape(-1, mdim)).all():
        return False, "bad-opening"
    match = run.theta[t] == th
    errors = int((run.x[t][match] != xh[match]).sum())
    if errors > phi_prime * int(match.sum()):
        return False, "error-rate"
    return True, None
