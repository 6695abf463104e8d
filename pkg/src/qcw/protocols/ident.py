"""Password-based identification from BB84 states, with the man-in-the-middle extension.

Alice is the user and prepares the qubits; Bob is the server and
measures them.  Both hold a password ``w`` from a dictionary encoded by a
:class:`PasswordCode`.  Bob announces the shift ``kappa`` between his bases
and the codeword of ``w``; Alice announces ``theta`` and a hash ``f``;
Bob picks ``g``; Alice answers ``z = f(x|I_w) xor g(w)``.

With ``plus`` set, Alice also sends a syndrome of ``x|I_w`` so Bob can
correct noise, and a MAC over everything sent so far, keyed by a key
shared exactly when the passwords agree.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..errors import ParameterError
from ..harness import wire
from ..harness.session import Aborted, EveTap, Outcome, Protocol, Schedule, Session, derive_seed
from ..hashing import HashFunc, apply_hash, sample_hash
from ..qchannel import QubitBatch, random_bits, reprepare
from .bb84 import DelayedMeasurementReceiver, HonestReceiver, compile_verification, run_preparation, surviving_count
from .codes import MacKey, PasswordCode, SyndromeSpec, correct, mac, random_code, syndrome

DEFAULTS = {"m": 256, "alpha": 0.5, "phi": 0.0, "phi_prime": 0.03, "phi2": 0.1, "compiled": False, "plus": False,
            "ell": 8, "words": 16, "delta": 0.25, "code_seed": 0, "w_A": 0, "w_B": 0, "eve_fraction": 0.1}


@lru_cache(maxsize=64)
def shared_code(size: int, n: int, delta: float, seed: int) -> PasswordCode:
    return random_code(size, n, delta, np.random.default_rng([seed, n, size]))


def password_bits(w: int, size: int) -> np.ndarray:
    b = max(1, math.ceil(math.log2(size)))
    return np.array([(w >> (b - 1 - i)) & 1 for i in range(b)], dtype=np.uint8)


def sample_password_hash(size: int, ell: int, rng: np.random.Generator) -> HashFunc:
    """Strongly two-universal affine map from password bits to ``ell`` bits."""
    b = password_bits(0, size).size
    return HashFunc("affine", rng.integers(0, 2, size=(ell, b), dtype=np.uint8),
                    rng.integers(0, 2, size=ell, dtype=np.uint8))


def schedule(cfg: dict) -> Schedule:
    steps = [("A", "qubits")]
    if cfg.get("compiled") or cfg.get("plus"):
        steps += [("B", "commit"), ("A", "test_set"), ("B", "open")]
    steps += [("B", "kappa"), ("A", "theta_f"), ("B", "g"), ("A", "z")]
    return Schedule(steps)


def match_set(theta: np.ndarray, codeword: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    return np.flatnonzero(theta == (codeword ^ kappa))


class Server:
    receiver_class = HonestReceiver

    def __init__(self, rng: np.random.Generator, cfg: dict):
        self.rng = rng
        self.rx = self.receiver_class(rng, cfg)


class DelayedServer(Server):
    receiver_class = DelayedMeasurementReceiver


def _mac_key(session: Session, w: int) -> MacKey:
    return MacKey.random(np.random.default_rng(derive_seed(session.seed, f"mac-key-{w}")))


def driver(session: Session, cfg: dict, parties: dict) -> Outcome:
    plus = bool(cfg.get("plus"))
    compiled = plus or bool(cfg.get("compiled"))
    cfg = dict(cfg, compiled=compiled)
    a_rng = session.rng("A")
    bob = parties["B"](session.rng("B"), cfg)
    n = surviving_count(int(cfg["m"]), cfg)
    ell = int(cfg["ell"])
    size = int(cfg["words"])
    code = shared_code(size, n, float(cfg["delta"]), int(cfg["code_seed"]))
    w_a, w_b = int(cfg["w_A"]), int(cfg["w_B"])

    run = run_preparation(session, cfg, a_rng, bob.rx)
    if compiled:
        run = compile_verification(session, cfg, run, a_rng, bob.rx)

    kappa = bob.rx.theta_hat ^ code[w_b]
    kappa_a = np.asarray(session.send("B", "kappa", {"kappa": kappa})["kappa"], dtype=np.uint8)
    if kappa_a.shape != (n,):
        raise Aborted("malformed-message", "A")

    # Alice
    i_a = match_set(run.theta, code[w_a], kappa_a)
    f = sample_hash(n, ell, False, a_rng)
    msg = {"theta": run.theta, "f": f.matrix}
    if plus:
        j = int(a_rng.integers(0, 1 << 62))
        spec = SyndromeSpec(i_a.size, float(cfg["phi2"]))
        msg.update({"j": j, "syn": syndrome(spec, j, run.x[i_a])})
    got = session.send("A", "theta_f", msg)

    # Bob
    theta_b = np.asarray(got["theta"], dtype=np.uint8)
    f_b = HashFunc("matrix", np.asarray(got["f"], dtype=np.uint8), None)
    i_b = match_set(theta_b, code[w_b], kappa)
    x_b = bob.rx.x_hat[i_b]
    g = sample_password_hash(size, ell, bob.rng)
    got_g = session.send("B", "g", {"g": g.matrix, "offset": g.offset})

    # Alice
    g_a = HashFunc("affine", np.asarray(got_g["g"], dtype=np.uint8), np.asarray(got_g["offset"], dtype=np.uint8))
    z = apply_hash(f, run.x[i_a]) ^ apply_hash(g_a, password_bits(w_a, size))
    final = {"z": z}
    if plus:
        final["tag"] = mac(_mac_key(session, w_a), session.views["A"] + [wire.encode({"z": z}), run.x[i_a].tobytes()])
    got_z = session.send("A", "z", final)

    # Bob
    values = {"kappa": kappa, "n": n, "w_A": w_a, "w_B": w_b, "z": np.asarray(got_z["z"])}
    if plus:
        spec = SyndromeSpec(i_b.size, float(cfg["phi2"]))
        try:
            fixed = correct(spec, int(got["j"]), x_b, got["syn"])
        except ParameterError:
            fixed = None
        if fixed is None:
            return Outcome(False, "decode-failure", "B", values)
        x_b = fixed
        expect = mac(_mac_key(session, w_b),
                     session.views["B"][:-1] + [wire.encode({"z": np.asarray(got_z["z"])}), x_b.tobytes()])
        if int(got_z["tag"]) != expect:
            return Outcome(False, "mac-reject", "B", values)
    want = apply_hash(f_b, x_b) ^ apply_hash(g, password_bits(w_b, size))
    ok = bool(np.array_equal(np.asarray(got_z["z"], dtype=np.uint8), want))
    return Outcome(ok, None if ok else "wrong-response", None if ok else "B", values)


# ---------------------------------------------------------------------------
# eavesdroppers

class TamperEve(EveTap):
    """Flips one bit of one classical message, chosen uniformly."""

    def __init__(self, rng: np.random.Generator, cfg: dict):
        super().__init__(rng)
        steps = schedule(dict(DEFAULTS, **cfg)).steps
        classical = [i for i, (_, t) in enumerate(steps) if t != "qubits"]
        self.target = int(rng.choice(classical))
        self.done = False

    def on_message(self, round_index, sender, msg_type, payload):
        if round_index != self.target:
            return None
        return flip_one_bit(payload, self.rng)


def flip_one_bit(payload: dict, rng: np.random.Generator) -> dict:
    leaves = [k for k in sorted(payload) if _size(payload[k]) > 0]
    key = leaves[int(rng.integers(0, len(leaves)))]
    v = payload[key]
    if isinstance(v, np.ndarray):
        v = v.copy()
        flat = v.reshape(-1)
        i = int(rng.integers(0, flat.size))
        flat[i] ^= 1
        payload[key] = v
    elif isinstance(v, (list, tuple)):
        v = list(v)
        i = int(rng.integers(0, len(v)))
        v[i] = int(v[i]) ^ 1
        payload[key] = v
    else:
        payload[key] = int(v) ^ 1
    return payload


def _size(v) -> int:
    if isinstance(v, np.ndarray):
        return v.size
    if isinstance(v, (list, tuple)):
        return len(v)
    return 1


class MeasuringEve(EveTap):
    """Measures a fraction of the qubits in the + basis and re-sends what she saw."""

    def __init__(self, rng: np.random.Generator, cfg: dict):
        super().__init__(rng)
        self.fraction = float(cfg.get("eve_fraction", 0.1))

    def on_qubits(self, batch: QubitBatch) -> QubitBatch:
        n = len(batch)
        pos = np.sort(self.rng.choice(n, size=int(round(self.fraction * n)), replace=False))
        bases = np.zeros(pos.size, dtype=np.uint8)
        seen = batch.measure_at(pos, bases, self.rng)
        return reprepare(batch, pos, seen, bases)


def passthrough(rng, cfg) -> EveTap:
    return EveTap(rng)


def protocols() -> list[Protocol]:
    servers = {"honest": Server, "delayed": DelayedServer}
    plain = Protocol("id", schedule, driver, {"A": {"honest": None}, "B": servers},
                     supports_eve=False, defaults=dict(DEFAULTS))
    plus = Protocol("idplus", schedule, driver,
                    {"A": {"honest": None}, "B": servers,
                     "E": {"passthrough": passthrough, "tamper": TamperEve, "measure": MeasuringEve}},
                    supports_eve=True, defaults=dict(DEFAULTS, plus=True, compiled=True, m=512, keep_views=True))
    return [plain, plus]
