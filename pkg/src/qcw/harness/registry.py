"""Built-in protocols for the session runner.

Importing this module registers ``ot``, ``id``, ``idplus``, ``coin``,
``commit``, ``ssscommit``, ``zkpk`` and ``iqzk``.
"""

from __future__ import annotations

import numpy as np

from .. import coinflip as cf
from ..errors import ParameterError
from ..mixedcommit import LweParams, NaorParams, gen_binding, gen_hiding, lwe_commit, lwe_extract, lwe_verify
from ..mixedcommit import LweCommitment, LweOpening, naor_commit, naor_verify
from ..protocols import ident, ot
from ..ssscommit import (HonestOpener, OpenReceiver, SssCommitment, SssParams, challenge_bit_count, commit_phase,
                         random_challenge, random_sharing, trapdoor_open)
from ..zkpk import PROVERS, SquareRootNizk, ham_encoding, iqzk_run, random_hamiltonian, zkpk_run
from .session import Outcome, Protocol, Schedule, Session, register

PRESETS = {"standard": LweParams.standard, "small": LweParams.small}


def lwe_preset(name: str) -> LweParams:
    if name not in PRESETS:
        raise ParameterError(f"unknown parameter preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]()


# ---------------------------------------------------------------------------
# message schedules of the coin protocols

def coin_steps(ell: int, committer: str = "A", responder: str = "B") -> list[tuple[str, str]]:
    return [(responder, "coin_setup"), (committer, "coin_commit"), (responder, "coin_response"),
            (committer, "coin_open")] * ell


def force_random_steps(ell: int, cfg: cf.ForceConfig, a: str = "A", b: str = "B") -> list[tuple[str, str]]:
    steps = [] if cfg.base == "ideal" else coin_steps(cfg.key_bits(), b, a)
    return steps + [(a, "string_commit"), (b, "string_response"), (a, "string_open")]


def force_force_steps(sigma: int, cfg: cf.ForceConfig) -> list[tuple[str, str]]:
    nbits = challenge_bit_count(SssParams(sigma))
    return (force_random_steps(cfg.key_bits(), cfg, "A", "B")
            + [("A", "sss_commit"), ("B", "response"), ("A", "shares")]
            + force_random_steps(nbits, cfg, "B", "A") + [("A", "open")])


# ---------------------------------------------------------------------------
# coin

COIN_DEFAULTS = {"bits": 8, "flavor": "sequential", "sigma": 8, "naor_n": 64, "base": "sequential"}
FLAVORS = ("sequential", "force_random", "force_force")


def _force_cfg(cfg: dict) -> cf.ForceConfig:
    return cf.ForceConfig(naor=NaorParams(int(cfg["naor_n"])), base=str(cfg["base"]))


def coin_schedule(cfg: dict) -> Schedule:
    flavor = cfg["flavor"]
    ell = int(cfg["bits"])
    if flavor == "sequential":
        return Schedule(coin_steps(ell))
    if flavor == "force_random":
        return Schedule(force_random_steps(ell, _force_cfg(cfg)))
    if flavor == "force_force":
        return Schedule(force_force_steps(int(cfg["sigma"]), _force_cfg(cfg)))
    raise ParameterError(f"unknown coin flavor {flavor!r}; choose from {FLAVORS}")


def coin_driver(session: Session, cfg: dict, parties: dict) -> Outcome:
    ell = int(cfg["bits"])
    alice = parties["A"](session.rng("A"))
    bob = parties["B"](session.rng("B"))
    flavor = cfg["flavor"]
    if flavor == "sequential":
        out = cf.flip_string(ell, alice, bob, cf.NaorScheme(NaorParams(int(cfg["naor_n"]))), session)
    elif flavor == "force_random":
        out = cf.force_random(ell, alice, bob, _force_cfg(cfg), session, ("A", "B"), session.rng("sim"))
    else:
        out = cf.force_force(ell, int(cfg["sigma"]), alice, bob, _force_cfg(cfg), session, session.rng("sim"))
    if out.aborted:
        return Outcome(False, out.reason, None, {"coin": None})
    return Outcome(True, None, None, {"coin": out.hex(), "bits": out.value})


# ---------------------------------------------------------------------------
# single bit commitment

COMMIT_DEFAULTS = {"scheme": "lwe", "preset": "standard", "mode": "hiding", "naor_n": 64, "bit": None}


def commit_schedule(cfg: dict) -> Schedule:
    if cfg["scheme"] == "naor":
        return Schedule([("B", "setup"), ("A", "commit"), ("A", "open")])
    if cfg["scheme"] == "lwe":
        return Schedule([("A", "commit"), ("A", "open")])
    raise ParameterError(f"unknown commitment scheme {cfg['scheme']!r}")


class CommitAlice:
    def __init__(self, rng: np.random.Generator, cfg: dict):
        self.rng = rng
        self.bit = int(rng.integers(0, 2)) if cfg.get("bit") is None else int(cfg["bit"]) & 1


class FlippingAlice(CommitAlice):
    """Commits to one bit and claims the other when opening."""

    claim_flip = True


def commit_driver(session: Session, cfg: dict, parties: dict) -> Outcome:
    alice = parties["A"](session.rng("A"), cfg)
    flip = getattr(alice, "claim_flip", False)
    if cfg["scheme"] == "naor":
        params = NaorParams(int(cfg["naor_n"]))
        rb = session.send("B", "setup", {"rb": session.rng("B").integers(0, 2, size=params.expansion,
                                                                         dtype=np.uint8)})["rb"]
        seed = alice.rng.integers(0, 2, size=params.n, dtype=np.uint8)
        com = session.send("A", "commit", {"com": naor_commit(params, alice.bit, seed, rb)})
        op = session.send("A", "open", {"bit": alice.bit ^ flip, "seed": seed})
        ok = naor_verify(params, np.asarray(com["com"]), rb, int(op["bit"]), np.asarray(op["seed"]))
        values = {"bit": alice.bit, "opened": int(op["bit"])}
    else:
        params = lwe_preset(cfg["preset"])
        key_rng = session.rng("key")
        key = gen_binding(params, key_rng) if cfg["mode"] == "binding" else gen_hiding(params, key_rng)
        com, opening = lwe_commit(key.public(), alice.bit, alice.rng)
        got = session.send("A", "commit", {"a": com.a_vec, "c": com.c_val})
        op = session.send("A", "open", {"bit": opening.bit ^ flip, "mask": opening.subset})
        ok = lwe_verify(key, LweCommitment(np.asarray(got["a"]), int(got["c"])),
                        LweOpening(int(op["bit"]), np.asarray(op["mask"])))
        values = {"bit": alice.bit, "opened": int(op["bit"])}
        if key.mode == "binding":
            values["extracted"] = lwe_extract(key, com)
    return Outcome(bool(ok), None if ok else "bad-opening", None if ok else "B", values)


# ---------------------------------------------------------------------------
# secret-sharing commitment

SSS_DEFAULTS = {"sigma": 4, "preset": "small", "mode": "binding", "corrupt": None}


def sss_schedule(cfg: dict) -> Schedule:
    return Schedule([("A", "commit"), ("A", "shares"), ("B", "challenge"), ("A", "open")])


class SssCommitter:
    def __init__(self, rng: np.random.Generator, cfg: dict):
        self.rng = rng
        self.cfg = cfg

    def commit(self, params: SssParams, key) -> HonestOpener:
        m = params.field.random(self.rng, params.sigma)
        return HonestOpener(commit_phase(params, key, m, self.rng))


class CorruptingCommitter(SssCommitter):
    """Commits to wrong values at ``corrupt`` positions (default ``sigma``) and announces the honest shares."""

    def commit(self, params, key):
        m = params.field.random(self.rng, params.sigma)
        k = int(self.cfg.get("corrupt") or params.sigma)
        sharing = random_sharing(params, m, self.rng)
        bad = self.rng.choice(params.big_sigma, size=k, replace=False)
        values = list(sharing.shares)
        for i in bad:
            values[i] ^= int(self.rng.integers(1, params.field.order))
        state = commit_phase(params, key, m, self.rng, committed_override=values)
        state.sharing = sharing
        return HonestOpener(state, sharing.shares)


class GuessingCommitter(SssCommitter):
    """Commits to one message, then announces a sharing of another that agrees on a guessed challenge."""

    def commit(self, params, key):
        m = params.field.random(self.rng, params.sigma)
        state = commit_phase(params, key, m, self.rng)
        other = list(m)
        other[0] ^= int(self.rng.integers(1, params.field.order))
        return trapdoor_open(state, other, random_challenge(params, self.rng))


def sss_driver(session: Session, cfg: dict, parties: dict) -> Outcome:
    params = SssParams(int(cfg["sigma"]))
    lwe = lwe_preset(cfg["preset"])
    key_rng = session.rng("key")
    key = gen_binding(lwe, key_rng) if cfg["mode"] == "binding" else gen_hiding(lwe, key_rng)
    opener = parties["A"](session.rng("A"), cfg).commit(params, key.public())
    com = session.send("A", "commit", opener.state.commitment.payload())
    receiver = OpenReceiver(params, key.public(), SssCommitment.from_payload(com))
    reason = receiver.receive_shares(session.send("A", "shares", opener.shares()))
    if reason:
        return Outcome(False, reason, "B")
    ch = session.send("B", "challenge", receiver.set_challenge(random_challenge(params, session.rng("B"))))
    out = receiver.finish(session.send("A", "open", opener.respond(ch["challenge"])))
    values = {"message": list(out.message) if out.message else None}
    return Outcome(out.accepted, out.reason, None if out.accepted else "B", values)


# ---------------------------------------------------------------------------
# zero-knowledge proofs

ZKPK_DEFAULTS = {"vertices": 8, "sigma": 8, "kappa": 256, "coin": "ideal", "preset": "standard", "graph": None}


def zkpk_schedule(cfg: dict) -> Schedule:
    if cfg["coin"] == "ideal":
        return Schedule([("A", "commit"), ("A", "open")])
    return Schedule(coin_steps(int(cfg["kappa"])) + [("A", "commit")] + coin_steps(int(cfg["sigma"]))
                    + [("A", "open")])


def _instance(session: Session, cfg: dict):
    from ..zkpk import HamInstance
    if cfg.get("graph") is not None:
        g = cfg["graph"]
        return HamInstance.from_adjacency_list(g["adjacency"], g.get("cycle"))
    return random_hamiltonian(int(cfg["vertices"]), session.rng("instance"))


def zkpk_driver(session: Session, cfg: dict, parties: dict) -> Outcome:
    x = _instance(session, cfg)
    sigma = int(cfg["sigma"])
    prover = parties["A"](ham_encoding(sigma), x, x.cycle, session.rng("A"))
    res = zkpk_run(x, prover, sigma, session.rng("coins"), int(cfg["kappa"]), lwe_preset(cfg["preset"]),
                   str(cfg["coin"]), session)
    return Outcome(res.accepted, res.reason, None if res.accepted else "B",
                   {"verdict": res.verdict, "challenge": res.s})


IQZK_DEFAULTS = {"kappa": 8, "x": 4, "coin": "sequential"}


def iqzk_schedule(cfg: dict) -> Schedule:
    steps = [] if cfg["coin"] == "ideal" else coin_steps(int(cfg["kappa"]))
    return Schedule(steps + [("A", "proof")])


class IqzkProver:
    def __init__(self, nizk: SquareRootNizk, x: int):
        self.w = nizk.witness(x)


class WitnesslessProver:
    def __init__(self, nizk, x):
        self.w = None


def iqzk_driver(session: Session, cfg: dict, parties: dict) -> Outcome:
    nizk = SquareRootNizk()
    x = int(cfg["x"])
    prover = parties["A"](nizk, x)
    res = iqzk_run(x, nizk, int(cfg["kappa"]), session.rng("coins"), prover.w, str(cfg["coin"]), session)
    omega = None if res.omega is None else cf.bits_to_hex(res.omega)
    return Outcome(res.accepted, res.reason, None if res.accepted else "B", {"omega": omega, "member": nizk.member(x)})


# ---------------------------------------------------------------------------

def _coin_table() -> dict:
    return dict(cf.STRATEGIES)


def _register_all() -> None:
    register(ot.protocol())
    for p in ident.protocols():
        register(p)
    register(Protocol("coin", coin_schedule, coin_driver, {"A": _coin_table(), "B": _coin_table()},
                      defaults=dict(COIN_DEFAULTS)))
    register(Protocol("commit", commit_schedule, commit_driver,
                      {"A": {"honest": CommitAlice, "flip": FlippingAlice}, "B": {"honest": None}},
                      defaults=dict(COMMIT_DEFAULTS)))
    register(Protocol("ssscommit", sss_schedule, sss_driver,
                      {"A": {"honest": SssCommitter, "corrupt": CorruptingCommitter, "guess": GuessingCommitter}, "B": {"honest": None}},
                      defaults=dict(SSS_DEFAULTS)))
    register(Protocol("zkpk", zkpk_schedule, zkpk_driver, {"A": dict(PROVERS), "B": {"honest": None}},
                      defaults=dict(ZKPK_DEFAULTS)))
    register(Protocol("iqzk", iqzk_schedule, iqzk_driver,
                      {"A": {"honest": IqzkProver, "witnessless": WitnesslessProver}, "B": {"honest": None}},
                      defaults=dict(IQZK_DEFAULTS)))


_register_all()
