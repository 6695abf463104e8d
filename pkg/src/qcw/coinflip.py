"""Coin flipping: single coins, strings, amplified flavors and enforcing simulators.

A single coin: the committer commits to a random bit ``a``, the responder
answers with ``b``, the committer opens and the coin is ``a xor b``.
Strings are flipped bit by bit; any abort yields no output at all.

Two amplification steps raise the guarantees:

* :func:`force_random` flips a commitment key, commits to ``a`` under it,
  receives ``b`` and opens; a simulator can steer it against the
  committing side.
* :func:`force_force` commits with the secret-sharing scheme and flips the
  opening challenge with :func:`force_random` with the roles swapped, so a
  simulator can steer it against either side.

Simulators that steer a run ("enforce a target") are provided for every
protocol; rewinding a party means restoring a deep copy of its state.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Protocol as TypingProtocol

import numpy as np

from .errors import ParameterError
from .mixedcommit import (CommitKey, LweParams, NaorParams, commit_many, extract_many, gen_binding, gen_hiding,
                          key_from_values, key_to_values, naor_commit, naor_verify, verify_many)
from .ssscommit import (HonestOpener, OpenReceiver, SssParams, bits_to_elems, challenge_bit_count, check_challenge,
                        commit_phase, elems_to_bits, extract_commitment, is_consistent, rank_subset,
                        subset_from_bits, trapdoor_open, verify_positions)

MAX_RETRIES = 64


# ---------------------------------------------------------------------------
# message logging

class Channel(TypingProtocol):
    def send(self, sender: str, msg_type: str, payload: dict) -> dict: ...


class NullChannel:
    """Delivers messages unchanged and records nothing."""

    def send(self, sender: str, msg_type: str, payload: dict) -> dict:
        return payload


class ListChannel:
    """Records ``(sender, msg_type, payload)`` triples."""

    def __init__(self):
        self.log: list[tuple[str, str, dict]] = []

    def send(self, sender, msg_type, payload):
        self.log.append((sender, msg_type, payload))
        return payload


NULL = NullChannel()


# ---------------------------------------------------------------------------
# outcomes

@dataclass
class CoinOutcome:
    value: np.ndarray | None  # bits, or None for abort
    reason: str | None = None
    retries: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def aborted(self) -> bool:
        return self.value is None

    def hex(self) -> str | None:
        return None if self.value is None else bits_to_hex(self.value)


def bits_to_int(bits) -> int:
    v = 0
    for b in np.asarray(bits, dtype=np.uint8).tolist():
        v = (v << 1) | b
    return v


def int_to_bits(value: int, n: int) -> np.ndarray:
    if value < 0 or value >> n:
        raise ParameterError(f"{value} does not fit in {n} bits")
    return np.array([(value >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


def bits_to_hex(bits) -> str:
    bits = np.asarray(bits, dtype=np.uint8)
    return format(bits_to_int(bits), f"0{(bits.size + 3) // 4}x") if bits.size else ""


def hex_to_bits(text: str, n: int) -> np.ndarray:
    try:
        value = int(text, 16)
    except ValueError as exc:
        raise ParameterError(f"not a hex string: {text!r}") from exc
    return int_to_bits(value, n)


# ---------------------------------------------------------------------------
# bit-commitment schemes used inside the coin protocols

class NaorScheme:
    """Naor's scheme; the responder sends its random vector first."""

    needs_setup = True

    def __init__(self, params: NaorParams | None = None):
        self.params = params or NaorParams()

    def setup(self, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, 2, size=self.params.expansion, dtype=np.uint8)

    def commit(self, bit: int, setup, rng: np.random.Generator) -> tuple[dict, dict]:
        seed = rng.integers(0, 2, size=self.params.n, dtype=np.uint8)
        return {"com": naor_commit(self.params, bit, seed, setup)}, {"bit": bit, "seed": seed}

    def verify(self, setup, com: dict, opening: dict) -> int | None:
        try:
            bit = int(opening["bit"])
            ok = naor_verify(self.params, np.asarray(com["com"]), setup, bit, np.asarray(opening["seed"]))
        except (KeyError, TypeError, ValueError, ParameterError):
            return None
        return bit if ok else None


class LweScheme:
    """Dual-mode scheme under a fixed key; strings are committed bit by bit."""

    needs_setup = False

    def __init__(self, key: CommitKey):
        self.key = key

    def setup(self, rng):
        return None

    def commit(self, bit: int, setup, rng) -> tuple[dict, dict]:
        com, op = self.commit_bits(np.array([bit], dtype=np.uint8), rng)
        return com, op

    def verify(self, setup, com: dict, opening: dict) -> int | None:
        bits = self.verify_bits(com, opening)
        return None if bits is None else int(bits[0])

    def commit_bits(self, bits, rng) -> tuple[dict, dict]:
        a, c, masks = commit_many(self.key, bits, rng)
        return {"a": a, "c": c}, {"bits": np.asarray(bits, dtype=np.uint8), "masks": masks}

    def verify_bits(self, com: dict, opening: dict) -> np.ndarray | None:
        try:
            a, c = np.asarray(com["a"]), np.asarray(com["c"])
            bits, masks = np.asarray(opening["bits"]), np.asarray(opening["masks"])
            if bits.shape != c.shape or masks.shape != (c.size, self.key.params.m_samples):
                return None
            ok = verify_many(self.key, a, c, bits, masks)
        except (KeyError, TypeError, ValueError):
            return None
        return bits.astype(np.uint8) if ok.all() else None

    def extract_bits(self, com: dict) -> np.ndarray:
        return extract_many(self.key, np.asarray(com["a"]), np.asarray(com["c"]))


# ---------------------------------------------------------------------------
# keys from coin strings

KEY_SLACK = 32


def key_bit_count(params: LweParams) -> int:
    """Coin bits needed to encode a public key directly (with 32 bits of slack)."""
    entries = params.m_samples * (params.n_dim + 1)
    return math.ceil(entries * math.log2(params.p)) + KEY_SLACK


def key_from_bits(bits, params: LweParams) -> CommitKey:
    """Direct mode: read the bits as an integer, reduce mod p^N, take base-p digits."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != key_bit_count(params):
        raise ParameterError(f"need {key_bit_count(params)} key bits, got {bits.size}")
    entries = params.m_samples * (params.n_dim + 1)
    value = bits_to_int(bits) % (params.p ** entries)
    digits = []
    for _ in range(entries):
        value, d = divmod(value, params.p)
        digits.append(d)
    return key_from_values(params, np.array(digits, dtype=np.int64))


def key_to_bits(key: CommitKey, rng: np.random.Generator) -> np.ndarray:
    """A uniformly chosen coin string that :func:`key_from_bits` maps to ``key``."""
    params = key.params
    entries = params.m_samples * (params.n_dim + 1)
    nbits = key_bit_count(params)
    modulus = params.p ** entries
    value = 0
    for d in reversed(key_to_values(key).tolist()):
        value = value * params.p + int(d)
    copies = (1 << nbits) // modulus
    u = int(rng.integers(0, copies)) if copies <= (1 << 62) else _big_below(copies, rng)
    return int_to_bits(value + modulus * u, nbits)


def _big_below(bound: int, rng: np.random.Generator) -> int:
    nbytes = (bound.bit_length() + 7) // 8 + 8
    return int.from_bytes(rng.bytes(nbytes), "little") % bound


def key_from_seed_bits(bits, params: LweParams) -> CommitKey:
    """Seed-expansion mode: the coin string seeds a uniform (hiding) key."""
    seed = bits_to_int(bits)
    return gen_hiding(params, np.random.default_rng([seed & ((1 << 64) - 1), seed >> 64]))


# ---------------------------------------------------------------------------
# party strategies

class CoinParty:
    """Honest behaviour in every role of every coin protocol here.

    Subclasses override single methods to deviate.  All randomness comes
    from ``self.rng`` so that a deep copy is a full checkpoint.
    """

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._pending = None
        self._string_pending = None
        self._sss = None

    # single coin
    def coin_setup(self, scheme):
        return scheme.setup(self.rng)

    def coin_commit(self, scheme, setup) -> dict:
        a = int(self.rng.integers(0, 2))
        com, opening = scheme.commit(a, setup, self.rng)
        self._pending = opening
        return com

    def coin_respond(self, com: dict) -> int:
        return int(self.rng.integers(0, 2))

    def coin_open(self, b: int) -> dict | None:
        return self._pending

    # string commit (force/random)
    def string_commit(self, scheme: LweScheme, ell: int) -> dict:
        a = self.rng.integers(0, 2, size=ell, dtype=np.uint8)
        com, opening = scheme.commit_bits(a, self.rng)
        self._string_pending = opening
        return com

    def string_respond(self, com: dict, ell: int) -> np.ndarray:
        return self.rng.integers(0, 2, size=ell, dtype=np.uint8)

    def string_open(self, b) -> dict | None:
        return self._string_pending

    # secret-sharing commit (force/force)
    def sss_commit(self, params: SssParams, key: CommitKey) -> dict:
        a = params.field.random(self.rng, params.sigma)
        self._sss = commit_phase(params, key, a, self.rng)
        self._opener = HonestOpener(self._sss)
        return self._sss.commitment.payload()

    def sss_shares(self, b) -> dict:
        return self._opener.shares()

    def sss_open(self, challenge) -> dict:
        return self._opener.respond(challenge)


class RefusingParty(CoinParty):
    """Never opens its commitments."""

    def coin_open(self, b):
        return None

    def string_open(self, b):
        return None


class ZeroResponder(CoinParty):
    """Always answers zero."""

    def coin_respond(self, com):
        return 0

    def string_respond(self, com, ell):
        return np.zeros(ell, dtype=np.uint8)


class PatternResponder(CoinParty):
    """Answers a fixed alternating pattern."""

    def coin_respond(self, com):
        return 1

    def string_respond(self, com, ell):
        return (np.arange(ell) % 2).astype(np.uint8)


class ShareSwapper(CoinParty):
    """Commits to one sharing and announces a sharing of a different message."""

    def sss_commit(self, params, key):
        com = super().sss_commit(params, key)
        other = [(v + 1) % params.field.order for v in self._sss.sharing.message]
        from .ssscommit import random_sharing
        alt = random_sharing(params, other, self.rng)
        self._opener = HonestOpener(self._sss, alt.shares)
        return com


STRATEGIES = {
    "honest": CoinParty,
    "refuse": RefusingParty,
    "zero": ZeroResponder,
    "pattern": PatternResponder,
    "swap-shares": ShareSwapper,
}


# ---------------------------------------------------------------------------
# protocols

def flip_one(committer: CoinParty, responder: CoinParty, scheme=None, channel: Channel = NULL,
                names=("A", "B")) -> CoinOutcome:
    """One coin; ``names`` label committer and responder in the log."""
    scheme = scheme or NaorScheme()
    c_name, r_name = names
    setup = None
    if scheme.needs_setup:
        setup = channel.send(r_name, "coin_setup", {"rb": responder.coin_setup(scheme)})["rb"]
    com = channel.send(c_name, "coin_commit", committer.coin_commit(scheme, setup))
    b = int(channel.send(r_name, "coin_response", {"b": responder.coin_respond(com)})["b"]) & 1
    opening = committer.coin_open(b)
    if opening is None:
        return CoinOutcome(None, "refusal")
    opening = channel.send(c_name, "coin_open", opening)
    a = scheme.verify(setup, com, opening)
    if a is None:
        return CoinOutcome(None, "bad-opening")
    return CoinOutcome(np.array([a ^ b], dtype=np.uint8))


def flip_string(ell: int, committer: CoinParty, responder: CoinParty, scheme=None,
                    channel: Channel = NULL, names=("A", "B")) -> CoinOutcome:
    if ell < 1:
        raise ParameterError("need at least one coin")
    bits = np.zeros(ell, dtype=np.uint8)
    for i in range(ell):
        out = flip_one(committer, responder, scheme, channel, names)
        if out.aborted:
            return CoinOutcome(None, out.reason, extra={"round": i})
        bits[i] = out.value[0]
    return CoinOutcome(bits)


def ideal_coin(ell: int, rng: np.random.Generator) -> CoinOutcome:
    """The trusted-party functionality: a uniform string."""
    return CoinOutcome(rng.integers(0, 2, size=ell, dtype=np.uint8))


@dataclass
class ForceConfig:
    """Parameters shared by the amplified protocols."""

    key_params: LweParams = field(default_factory=LweParams.small)
    naor: NaorParams = field(default_factory=NaorParams)
    base: str = "sequential"  # or "ideal": flip the key with the trusted functionality
    key_mode: str = "direct"  # or "seed"

    def key_bits(self) -> int:
        return key_bit_count(self.key_params) if self.key_mode == "direct" else 256

    def key_from(self, bits) -> CommitKey:
        if self.key_mode == "direct":
            return key_from_bits(bits, self.key_params)
        return key_from_seed_bits(bits, self.key_params)


def _flip_key(cfg: ForceConfig, a_party: CoinParty, b_party: CoinParty, channel, names, rng) -> CoinOutcome:
    # the committing side of the key flip is the B-role so that the A-role can be rewound
    if cfg.base == "ideal":
        return ideal_coin(cfg.key_bits(), rng)
    return flip_string(cfg.key_bits(), b_party, a_party, NaorScheme(cfg.naor), channel, (names[1], names[0]))


def force_random(ell: int, a_party: CoinParty, b_party: CoinParty, cfg: ForceConfig | None = None,
                 channel: Channel = NULL, names=("A", "B"), rng: np.random.Generator | None = None) -> CoinOutcome:
    """Flip a key, commit to ``a`` under it, receive ``b``, open; outcome ``a xor b``."""
    cfg = cfg or ForceConfig()
    rng = rng if rng is not None else np.random.default_rng()
    keyflip = _flip_key(cfg, a_party, b_party, channel, names, rng)
    if keyflip.aborted:
        return CoinOutcome(None, keyflip.reason, extra={"stage": "key"})
    scheme = LweScheme(cfg.key_from(keyflip.value))
    com = channel.send(names[0], "string_commit", a_party.string_commit(scheme, ell))
    b = np.asarray(channel.send(names[1], "string_response", {"b": b_party.string_respond(com, ell)})["b"],
                   dtype=np.uint8)
    opening = a_party.string_open(b)
    if opening is None:
        return CoinOutcome(None, "refusal")
    opening = channel.send(names[0], "string_open", opening)
    a = scheme.verify_bits(com, opening)
    if a is None or a.shape != (ell,) or b.shape != (ell,):
        return CoinOutcome(None, "bad-opening")
    return CoinOutcome(a ^ b)


def ff_field_params(sigma: int) -> SssParams:
    return SssParams(sigma)


def force_force(ell: int, sigma: int, alice: CoinParty, bob: CoinParty, cfg: ForceConfig | None = None,
                channel: Channel = NULL, rng: np.random.Generator | None = None) -> CoinOutcome:
    """Coin flip enforceable against both sides; ``ell <= sigma * kappa``."""
    cfg = cfg or ForceConfig()
    rng = rng if rng is not None else np.random.default_rng()
    params = ff_field_params(sigma)
    _check_ff_length(ell, params)
    keyflip = force_random(cfg.key_bits(), alice, bob, cfg, channel, ("A", "B"), rng)
    if keyflip.aborted:
        return CoinOutcome(None, keyflip.reason, extra={"stage": "key"})
    key = cfg.key_from(keyflip.value)
    com_payload = channel.send("A", "sss_commit", alice.sss_commit(params, key))
    b = np.asarray(channel.send("B", "response", {"b": bob.string_respond(com_payload, ell)})["b"], dtype=np.uint8)
    return _ff_finish(ell, params, key, com_payload, b, alice, bob, cfg, channel, rng)


def _check_ff_length(ell: int, params: SssParams) -> None:
    if not 1 <= ell <= params.sigma * params.kappa:
        raise ParameterError(f"ell must be in [1, {params.sigma * params.kappa}]")


def _ff_finish(ell, params, key, com_payload, b, alice, bob, cfg, channel, rng, challenge_flip=None) -> CoinOutcome:
    from .ssscommit import SssCommitment
    com = SssCommitment.from_payload(com_payload)
    receiver = OpenReceiver(params, key, com)
    shares = channel.send("A", "shares", alice.sss_shares(b))
    reason = receiver.receive_shares(shares)
    if reason:
        return CoinOutcome(None, reason)
    nbits = challenge_bit_count(params)
    if challenge_flip is None:
        flip = force_random(nbits, bob, alice, cfg, channel, ("B", "A"), rng)
    else:
        flip = challenge_flip(nbits)
    if flip.aborted:
        return CoinOutcome(None, flip.reason, extra={"stage": "challenge"})
    challenge = subset_from_bits(params, flip.value)
    receiver.set_challenge(challenge)
    opening = channel.send("A", "open", alice.sss_open(challenge))
    out = receiver.finish(opening)
    if not out.accepted:
        return CoinOutcome(None, out.reason)
    a_bits = elems_to_bits(out.message, params.kappa)[:ell]
    return CoinOutcome(a_bits ^ b, extra={"challenge": challenge})


# ---------------------------------------------------------------------------
# enforcing simulators

def _refresh(party: CoinParty, rng: np.random.Generator) -> CoinParty:
    """Rewound copy of ``party`` with a fresh random tape."""
    fresh = np.random.default_rng(rng.integers(0, 1 << 63, size=2))
    return copy.deepcopy(party, {id(party.rng): fresh})


def _checkpoint(party: CoinParty) -> CoinParty:
    # the random tape is replaced on every rewind, so it is shared rather than copied
    return copy.deepcopy(party, {id(party.rng): party.rng})


@dataclass
class EnforceResult:
    outcome: CoinOutcome
    party: CoinParty  # the adversary's state after the successful run
    attempts: list[int] = field(default_factory=list)  # per bit


def enforce_against_responder(target, responder: CoinParty, scheme=None, max_retries: int = MAX_RETRIES,
                              rng: np.random.Generator | None = None, channel: Channel = NULL,
                              names=("A", "B")) -> EnforceResult:
    """Steer a coin string to ``target`` by rewinding the responding side.

    The simulator commits to a guess ``a``; if ``a xor b`` misses the target
    bit it rewinds the responder and guesses ``target_i xor b`` next.
    Only the successful attempt of each bit is logged.
    """
    scheme = scheme or NaorScheme()
    rng = rng if rng is not None else np.random.default_rng()
    target = np.asarray(target, dtype=np.uint8)
    sim = _Committer(rng)
    attempts: list[int] = []
    current = responder
    for i, t in enumerate(target.tolist()):
        checkpoint = current
        guess = int(rng.integers(0, 2))
        for attempt in range(1, max_retries + 2):
            trial = current if attempt == 1 else _refresh(checkpoint, rng)
            if attempt == 1:
                checkpoint = _checkpoint(current)
            log = ListChannel()
            sim.next_bit = guess
            out = flip_one(sim, trial, scheme, log, names)
            if out.aborted:
                _replay(log, channel)
                attempts.append(attempt)
                return EnforceResult(CoinOutcome(None, out.reason, sum(a - 1 for a in attempts)), trial, attempts)
            if int(out.value[0]) == t:
                _replay(log, channel)
                attempts.append(attempt)
                current = trial
                break
            guess = t ^ int(log.log[-2][2]["b"])
        else:
            attempts.append(max_retries + 1)
            return EnforceResult(CoinOutcome(None, "enforcement-failure", sum(a - 1 for a in attempts)), current,
                                 attempts)
    return EnforceResult(CoinOutcome(target.copy(), None, sum(a - 1 for a in attempts)), current, attempts)


def _replay(log: ListChannel, channel: Channel) -> None:
    for sender, msg_type, payload in log.log:
        channel.send(sender, msg_type, payload)


class _Committer(CoinParty):
    """Simulator-side committer that commits to a chosen bit."""

    next_bit = 0

    def coin_commit(self, scheme, setup):
        com, opening = scheme.commit(self.next_bit, setup, self.rng)
        self._pending = opening
        return com


def enforce_against_committer(target, committer: CoinParty, key: CommitKey, rng: np.random.Generator | None = None,
                              channel: Channel = NULL, names=("A", "B")) -> CoinOutcome:
    """Steer a coin string to ``target`` by extracting each committed bit with the binding secret."""
    if key.mode != "binding":
        raise ParameterError("enforcement against the committer needs a binding key")
    rng = rng if rng is not None else np.random.default_rng()
    scheme = LweScheme(key)
    target = np.asarray(target, dtype=np.uint8)
    c_name, r_name = names
    for t in target.tolist():
        com = channel.send(c_name, "coin_commit", committer.coin_commit(scheme, None))
        a = int(scheme.extract_bits(com)[0])
        b = t ^ a
        channel.send(r_name, "coin_response", {"b": b})
        opening = committer.coin_open(b)
        if opening is None:
            return CoinOutcome(None, "refusal")
        opening = channel.send(c_name, "coin_open", opening)
        if scheme.verify(None, com, opening) is None:
            return CoinOutcome(None, "bad-opening")
    return CoinOutcome(target.copy())


def enforce_force_random(target, a_party: CoinParty, cfg: ForceConfig | None = None,
                         rng: np.random.Generator | None = None, channel: Channel = NULL,
                         names=("A", "B"), max_retries: int = MAX_RETRIES) -> CoinOutcome:
    """Simulator for the B-role steering :func:`force_random` against its committing A-role.

    The key flip is steered to a binding key by rewinding ``a_party`` (the
    responder there); ``a`` is then extracted and ``b = target xor a``.
    """
    cfg = cfg or ForceConfig()
    rng = rng if rng is not None else np.random.default_rng()
    target = np.asarray(target, dtype=np.uint8)
    key = gen_binding(cfg.key_params, rng)
    if cfg.key_mode != "direct":
        raise ParameterError("enforcement needs keys flipped in direct mode")
    retries = 0
    if cfg.base == "ideal":
        party = a_party
    else:
        res = enforce_against_responder(key_to_bits(key, rng), a_party, NaorScheme(cfg.naor), max_retries, rng,
                                        channel, (names[1], names[0]))
        retries = res.outcome.retries
        if res.outcome.aborted:
            return CoinOutcome(None, res.outcome.reason, retries, {"stage": "key"})
        party = res.party
    scheme = LweScheme(key)
    com = channel.send(names[0], "string_commit", party.string_commit(LweScheme(key.public()), target.size))
    a = scheme.extract_bits(com)
    b = target ^ a
    channel.send(names[1], "string_response", {"b": b})
    opening = party.string_open(b)
    if opening is None:
        return CoinOutcome(None, "refusal", retries, {"party": party})
    opening = channel.send(names[0], "string_open", opening)
    got = scheme.verify_bits(com, opening)
    if got is None:
        return CoinOutcome(None, "bad-opening", retries, {"party": party})
    return CoinOutcome(got ^ b, None, retries, {"party": party})


def enforce_ff_against_alice(target, alice: CoinParty, ell: int, sigma: int, cfg: ForceConfig | None = None,
                             rng: np.random.Generator | None = None, channel: Channel = NULL) -> CoinOutcome:
    """Simulated Bob: force a binding key, extract ``a'`` from the shares, answer ``b = h xor a'``."""
    cfg = cfg or ForceConfig()
    rng = rng if rng is not None else np.random.default_rng()
    params = ff_field_params(sigma)
    _check_ff_length(ell, params)
    target = np.asarray(target, dtype=np.uint8)
    if target.size != ell:
        raise ParameterError(f"target must have {ell} bits")
    key = gen_binding(cfg.key_params, rng)
    key_target = key_to_bits(key, rng) if cfg.key_mode == "direct" else None
    if key_target is None:
        raise ParameterError("enforcement needs keys flipped in direct mode")
    flip = enforce_force_random(key_target, alice, cfg, rng, channel, ("A", "B"))
    if flip.aborted:
        return CoinOutcome(None, flip.reason, flip.retries, {"stage": "key"})
    alice = flip.extra["party"]
    com_payload = channel.send("A", "sss_commit", alice.sss_commit(params, key.public()))
    from .ssscommit import SssCommitment
    decoded = extract_commitment(params, key, SssCommitment.from_payload(com_payload))
    a_prime = elems_to_bits(decoded.message, params.kappa)[:ell]
    b = target ^ a_prime
    channel.send("B", "response", {"b": b})
    bob = CoinParty(np.random.default_rng(rng.integers(0, 1 << 63, size=2)))
    out = _ff_finish(ell, params, key.public(), com_payload, b, alice, bob, cfg, channel, rng)
    out.retries = flip.retries
    return out


class _TrapdoorAlice(CoinParty):
    """Simulated Alice: commits to random shares, later announces a fabricated sharing."""

    def __init__(self, rng, target, ell, challenge):
        super().__init__(rng)
        self.target = np.asarray(target, dtype=np.uint8)
        self.ell = ell
        self.challenge = challenge

    def sss_shares(self, b):
        params = self._sss.params
        a_bits = elems_to_bits(self._sss.sharing.message, params.kappa)
        a_bits[: self.ell] = np.asarray(b, dtype=np.uint8) ^ self.target
        self._opener = trapdoor_open(self._sss, bits_to_elems(a_bits, params.kappa), self.challenge)
        return self._opener.shares()


def enforce_ff_against_bob(target, bob: CoinParty, ell: int, sigma: int, cfg: ForceConfig | None = None,
                           rng: np.random.Generator | None = None, channel: Channel = NULL,
                           max_retries: int = MAX_RETRIES) -> CoinOutcome:
    """Simulated Alice: fabricate shares for ``b xor h`` on a pre-chosen challenge and steer the challenge flip."""
    cfg = cfg or ForceConfig()
    rng = rng if rng is not None else np.random.default_rng()
    params = ff_field_params(sigma)
    _check_ff_length(ell, params)
    target = np.asarray(target, dtype=np.uint8)
    if target.size != ell:
        raise ParameterError(f"target must have {ell} bits")
    challenge = sorted(int(i) for i in rng.choice(params.big_sigma, size=params.sigma, replace=False))
    sim = _TrapdoorAlice(np.random.default_rng(rng.integers(0, 1 << 63, size=2)), target, ell, challenge)
    keyflip = force_random(cfg.key_bits(), sim, bob, cfg, channel, ("A", "B"), rng)
    if keyflip.aborted:
        return CoinOutcome(None, keyflip.reason, extra={"stage": "key"})
    key = cfg.key_from(keyflip.value)
    com_payload = channel.send("A", "sss_commit", sim.sss_commit(params, key))
    b = np.asarray(channel.send("B", "response", {"b": bob.string_respond(com_payload, ell)})["b"], dtype=np.uint8)
    nbits = challenge_bit_count(params)
    state = {"retries": 0}

    def steered(n):
        flip = enforce_force_random(challenge_target(params, challenge, nbits, rng), bob, cfg, rng, channel,
                                    ("B", "A"), max_retries)
        state["retries"] = flip.retries
        return flip

    out = _ff_finish(ell, params, key, com_payload, b, sim, bob, cfg, channel, rng, steered)
    out.retries = state["retries"]
    return out


def challenge_target(params: SssParams, challenge, nbits: int, rng: np.random.Generator) -> np.ndarray:
    """A uniform coin string that maps to ``challenge``."""
    check_challenge(params, challenge)
    total = math.comb(params.big_sigma, params.sigma)
    copies = (1 << nbits) // total
    return int_to_bits(rank_subset(params.big_sigma, challenge) + total * _big_below(copies, rng), nbits)


# ---------------------------------------------------------------------------
# entry points named by party: Alice commits, Bob responds

FLAVORS = ("uncont", "random", "force")


@dataclass(frozen=True)
class CoinFlavor:
    """Claimed guarantee against a dishonest Alice and a dishonest Bob."""

    alice_side: str
    bob_side: str

    def __post_init__(self):
        for side in (self.alice_side, self.bob_side):
            if side not in FLAVORS:
                raise ParameterError(f"unknown flavor {side!r}; choose from {FLAVORS}")

    def __str__(self) -> str:
        return f"({self.alice_side},{self.bob_side})"


FLAVOR_OF = {
    "single": CoinFlavor("random", "force"),
    "sequential": CoinFlavor("random", "force"),
    "force_random": CoinFlavor("force", "random"),
    "force_force": CoinFlavor("force", "force"),
}


class IdealCoinFunc:
    """Trusted party for ``lam``-bit coins.

    Draws ``h``, shows it to Alice, and hands it to Bob unless Alice then
    answers with ``abort``.
    """

    def __init__(self, lam: int, rng: np.random.Generator):
        if lam < 1:
            raise ParameterError("need at least one coin")
        self.lam = lam
        self.rng = rng
        self.h: np.ndarray | None = None
        self.aborted = False

    def to_alice(self) -> np.ndarray:
        self.h = self.rng.integers(0, 2, size=self.lam, dtype=np.uint8)
        self.aborted = False
        return self.h.copy()

    def to_bob(self, alice_accepts: bool = True) -> CoinOutcome:
        if self.h is None:
            raise ParameterError("the coin has not been drawn yet")
        if not alice_accepts:
            self.aborted = True
            return CoinOutcome(None, "abort")
        return CoinOutcome(self.h.copy())

    def run(self, alice_accepts: bool = True) -> CoinOutcome:
        self.to_alice()
        return self.to_bob(alice_accepts)


def make_party(strategy, rng: np.random.Generator) -> CoinParty:
    """A :class:`CoinParty` from an instance, a strategy name, or ``None`` (honest)."""
    if isinstance(strategy, CoinParty):
        return strategy
    name = strategy or "honest"
    if name not in STRATEGIES:
        raise ParameterError(f"unknown coin strategy {name!r}; choose from {sorted(STRATEGIES)}")
    return STRATEGIES[name](np.random.default_rng(rng.integers(0, 1 << 63, size=2)))


def _rng(rng):
    return rng if rng is not None else np.random.default_rng()


def coin_single(alice=None, bob=None, naor_params: NaorParams | None = None, rng=None,
                channel: Channel = NULL) -> CoinOutcome:
    """One coin with Naor's commitment."""
    rng = _rng(rng)
    return flip_one(make_party(alice, rng), make_party(bob, rng), NaorScheme(naor_params), channel)


def coin_sequential(ell: int, alice=None, bob=None, naor_params: NaorParams | None = None, rng=None,
                    channel: Channel = NULL) -> CoinOutcome:
    """``ell`` coins one after the other; an abort anywhere voids the string."""
    rng = _rng(rng)
    return flip_string(ell, make_party(alice, rng), make_party(bob, rng), NaorScheme(naor_params), channel)


def enforce_against_bob(target, bob=None, max_retries: int = MAX_RETRIES, rng=None,
                        naor_params: NaorParams | None = None, channel: Channel = NULL) -> tuple[CoinOutcome, int]:
    """Simulated Alice steering a coin string to ``target`` by rewinding Bob."""
    rng = _rng(rng)
    res = enforce_against_responder(target, make_party(bob, rng), NaorScheme(naor_params), max_retries, rng, channel)
    res.outcome.extra["attempts"] = res.attempts
    return res.outcome, res.outcome.retries


def enforce_against_alice(target, alice=None, key: CommitKey | None = None, rng=None,
                          channel: Channel = NULL) -> CoinOutcome:
    """Simulated Bob steering a coin string to ``target`` by extraction under a binding key."""
    rng = _rng(rng)
    key = key if key is not None else gen_binding(LweParams.small(), rng)
    return enforce_against_committer(target, make_party(alice, rng), key, rng, channel)


def amplify_force_random(ell: int, alice=None, bob=None, cfg: ForceConfig | None = None, rng=None,
                         channel: Channel = NULL) -> CoinOutcome:
    rng = _rng(rng)
    return force_random(ell, make_party(alice, rng), make_party(bob, rng), cfg, channel, ("A", "B"), rng)


def amplify_force_force(ell: int, sigma: int, alice=None, bob=None, cfg: ForceConfig | None = None, rng=None,
                        channel: Channel = NULL) -> CoinOutcome:
    rng = _rng(rng)
    return force_force(ell, sigma, make_party(alice, rng), make_party(bob, rng), cfg, channel, rng)
