"""1-out-of-2 string oblivious transfer from BB84 states, plain and compiled.

After the (optional) verification, Alice announces ``theta``; Bob splits
the positions into ``I_k`` (matching bases) and ``I_{1-k}`` and sends the
pair in fixed order; Alice masks ``s_0`` and ``s_1`` with two-universal
hashes of ``x`` restricted to the two sets.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from ..harness.session import Aborted, Outcome, Protocol, Schedule, Session
from ..hashing import HashFunc, apply_hash, sample_hash
from ..qchannel import random_bits
from .bb84 import (BoundedStorageBob, DelayedMeasurementReceiver, HonestReceiver, compile_verification,
                   run_preparation, surviving_count)

DEFAULTS = {"m": 256, "alpha": 0.5, "phi": 0.0, "phi_prime": 0.03, "lam": 0.1, "compiled": True, "k": None,
            "gamma": 0.04}


def string_length(n: int, lam: float) -> int:
    ell = math.floor(lam * n)
    if ell < 1:
        raise ParameterError(f"lambda={lam} leaves no output bits at n={n}")
    return ell


def schedule(cfg: dict) -> Schedule:
    steps = [("A", "qubits")]
    if cfg.get("compiled"):
        steps += [("B", "commit"), ("A", "test_set"), ("B", "open")]
    steps += [("A", "theta"), ("B", "partition"), ("A", "masked")]
    return Schedule(steps)


class OtBob:
    """Honest receiver side of the post-processing."""

    receiver_class = HonestReceiver

    def __init__(self, rng: np.random.Generator, cfg: dict):
        self.rng = rng
        self.cfg = cfg
        self.rx = self.receiver_class(rng, cfg)

    def partition(self, theta: np.ndarray, k: int, ell: int) -> tuple[np.ndarray, np.ndarray]:
        good = np.flatnonzero(theta == self.rx.theta_hat)
        bad = np.flatnonzero(theta != self.rx.theta_hat)
        if good.size < ell:
            raise Aborted("short-set", "B")
        return (good, bad) if k == 0 else (bad, good)

    def output(self, msg: dict, sets, k: int) -> dict:
        f = HashFunc("matrix", np.asarray(msg[f"f{k}"], dtype=np.uint8), None)
        return {"output": np.asarray(msg[f"m{k}"], dtype=np.uint8) ^ apply_hash(f, self.rx.x_hat[sets[k]])}


class DelayedOtBob(OtBob):
    """Postpones measurement; if nothing forces it earlier, learns both strings."""

    receiver_class = DelayedMeasurementReceiver

    def partition(self, theta, k, ell):
        self.rx.learn_theta(theta)
        return super().partition(theta, k, ell)

    def output(self, msg, sets, k):
        out = super().output(msg, sets, k)
        other = super().output(msg, sets, 1 - k)["output"]
        out["other"] = other
        return out


class StorageOtBob(OtBob):
    """Keeps stored (later fully known) positions out of the good set and guesses both strings."""

    receiver_class = BoundedStorageBob

    def partition(self, theta, k, ell):
        self.rx.learn_theta(theta)
        stored = self.rx.stored
        matched = (theta == self.rx.theta_hat) & ~stored
        good = np.flatnonzero(matched)
        bad = np.flatnonzero(~matched)
        if good.size < ell:
            raise Aborted("short-set", "B")
        return (good, bad) if k == 0 else (bad, good)

    def output(self, msg, sets, k):
        out = {}
        for b in (0, 1):
            f = HashFunc("matrix", np.asarray(msg[f"f{b}"], dtype=np.uint8), None)
            out[f"guess{b}"] = np.asarray(msg[f"m{b}"], dtype=np.uint8) ^ apply_hash(f, self.rx.x_hat[sets[b]])
        out["output"] = out[f"guess{k}"]
        return out


def _check_partition(sets, n: int) -> tuple[np.ndarray, np.ndarray]:
    i0 = np.asarray(sets["I0"], dtype=np.int64).ravel()
    i1 = np.asarray(sets["I1"], dtype=np.int64).ravel()
    both = np.concatenate([i0, i1])
    if both.size and (both.min() < 0 or both.max() >= n or len(np.unique(both)) != both.size):
        raise Aborted("bad-partition", "A")
    return i0, i1


def driver(session: Session, cfg: dict, parties: dict) -> Outcome:
    inputs = session.rng("inputs")
    a_rng = session.rng("A")
    bob = parties["B"](session.rng("B"), cfg)
    n = surviving_count(int(cfg["m"]), cfg)
    ell = string_length(n, float(cfg["lam"]))
    s = [random_bits(ell, inputs), random_bits(ell, inputs)]
    k = int(inputs.integers(0, 2)) if cfg.get("k") is None else int(cfg["k"])

    run = run_preparation(session, cfg, a_rng, bob.rx)
    if cfg.get("compiled"):
        run = compile_verification(session, cfg, run, a_rng, bob.rx)
    theta = session.send("A", "theta", {"theta": run.theta})["theta"]
    sets = bob.partition(np.asarray(theta, dtype=np.uint8), k, ell)
    got = session.send("B", "partition", {"I0": sets[0], "I1": sets[1]})
    i0, i1 = _check_partition(got, n)
    payload = {}
    for b, idx in ((0, i0), (1, i1)):
        f = sample_hash(n, ell, False, a_rng)
        payload[f"f{b}"] = f.matrix
        payload[f"m{b}"] = s[b] ^ apply_hash(f, run.x[idx])
    msg = session.send("A", "masked", payload)
    values = bob.output(msg, sets, k)
    values.update({"s0": s[0], "s1": s[1], "k": k, "I0": sets[0], "I1": sets[1], "n": n, "ell": ell})
    ok = bool(np.array_equal(values["output"], s[k]))
    return Outcome(ok, None if ok else "wrong-output", None, values)


def protocol() -> Protocol:
    return Protocol("ot", schedule, driver,
                    {"A": {"honest": None}, "B": {"honest": OtBob, "delayed": DelayedOtBob, "bqsm": StorageOtBob}},
                    supports_eve=False, defaults=dict(DEFAULTS))
