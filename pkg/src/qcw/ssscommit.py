"""Commitment to a field vector by secret sharing and cut-and-choose opening.

The committer encodes a message ``m`` of ``sigma`` field elements with
``sigma`` random elements ``s`` into ``Sigma = 4 sigma`` evaluations of a
polynomial of degree at most ``2 sigma - 1`` and commits to every share bit
with the dual-mode scheme.  To open, it reveals all shares, the receiver
checks they lie on such a polynomial, picks ``sigma`` positions, and the
committer opens the bit commitments there.

Point labels: the message sits at labels ``0, -1, ..., -sigma+1`` and share
``i`` (1-based) at label ``i``.  Labels are mapped into the field by
``enc(t) = t + sigma``, so the field must have more than ``5 sigma``
elements.  Share positions are 0-based in code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import ParameterError, UsageError
from .fieldmath import IRREDUCIBLE, GF2k, solve_linear
from .mixedcommit import CommitKey, commit_many, commit_with_masks, extract_many, verify_many


@dataclass(frozen=True)
class SssParams:
    sigma: int
    kappa: int | None = None

    def __post_init__(self):
        if self.sigma < 1:
            raise ParameterError("sigma must be positive")
        if self.kappa is None:
            object.__setattr__(self, "kappa", smallest_kappa(self.sigma))
        if self.kappa not in IRREDUCIBLE:
            raise ParameterError(f"unsupported field size kappa={self.kappa}")
        if (1 << self.kappa) <= 5 * self.sigma:
            raise ParameterError(f"need 2^kappa > 5 sigma; kappa={self.kappa} is too small for sigma={self.sigma}")

    @property
    def big_sigma(self) -> int:
        return 4 * self.sigma

    @property
    def field(self) -> GF2k:
        return GF2k.get(self.kappa)

    def message_labels(self) -> list[int]:
        return [enc(-i + 1, self.sigma) for i in range(1, self.sigma + 1)]

    def share_labels(self) -> list[int]:
        return [enc(i, self.sigma) for i in range(1, self.big_sigma + 1)]


def smallest_kappa(sigma: int) -> int:
    for k in sorted(IRREDUCIBLE):
        if (1 << k) > 5 * sigma:
            return k
    raise ParameterError(f"no supported field is large enough for sigma={sigma}")


def enc(t: int, sigma: int) -> int:
    """Field label of integer point ``t`` in ``{-sigma+1, ..., 4 sigma}``."""
    if not -sigma + 1 <= t <= 4 * sigma:
        raise ParameterError(f"label {t} outside [{-sigma + 1}, {4 * sigma}]")
    return t + sigma


# ---------------------------------------------------------------------------
# linear algebra over the field with cached Lagrange matrices

@lru_cache(maxsize=256)
def lagrange_matrix(kappa: int, xs: tuple[int, ...], targets: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """Row ``t`` holds the Lagrange basis values of ``xs`` at ``targets[t]``."""
    F = GF2k.get(kappa)
    if len(set(xs)) != len(xs):
        raise ParameterError("duplicate x-coordinates")
    if F._exp is not None:
        return _lagrange_logs(kappa, xs, targets)
    weights = []
    for j, xj in enumerate(xs):
        d = 1
        for m, xm in enumerate(xs):
            if m != j:
                d = F.mul(d, xj ^ xm)
        weights.append(F.inv(d))
    rows = []
    n = len(xs)
    for t in targets:
        if t in xs:
            row = [0] * n
            row[xs.index(t)] = 1
            rows.append(tuple(row))
            continue
        # prefix and suffix products of (t - x_m) give each leave-one-out product in O(1)
        pre = [1] * (n + 1)
        for m, xm in enumerate(xs):
            pre[m + 1] = F.mul(pre[m], t ^ xm)
        suf = 1
        row = [0] * n
        for j in range(n - 1, -1, -1):
            row[j] = F.mul(weights[j], F.mul(pre[j], suf))
            suf = F.mul(suf, t ^ xs[j])
        rows.append(tuple(row))
    return tuple(rows)


def _lagrange_logs(kappa: int, xs: tuple[int, ...], targets: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    # every factor is nonzero, so products and quotients become sums and differences of logs
    exp, log = _np_tables(kappa)
    q1 = (1 << kappa) - 1
    x = np.asarray(xs, dtype=np.int64)
    n = x.size
    diff = x[:, None] ^ x[None, :]
    np.fill_diagonal(diff, 1)
    log_w = -log[diff].sum(axis=1)
    t = np.asarray(targets, dtype=np.int64)
    rows = np.zeros((t.size, n), dtype=np.int64)
    hit = (t[:, None] == x[None, :])
    free = ~hit.any(axis=1)
    if free.any():
        lt = log[t[free][:, None] ^ x[None, :]]
        rows[free] = exp[(log_w[None, :] + lt.sum(axis=1, keepdims=True) - lt) % q1]
    rows[hit] = 1
    return tuple(map(tuple, rows.tolist()))


@lru_cache(maxsize=None)
def _np_tables(kappa: int) -> tuple[np.ndarray, np.ndarray]:
    F = GF2k.get(kappa)
    return np.asarray(F._exp, dtype=np.int64), np.asarray(F._log, dtype=np.int64)


@lru_cache(maxsize=256)
def _log_rows(kappa: int, rows: tuple[tuple[int, ...], ...]) -> tuple[np.ndarray, np.ndarray]:
    F = GF2k.get(kappa)
    R = np.array(rows, dtype=np.int64).reshape(len(rows), -1)
    return _np_tables(kappa)[1][R], R == 0


def _matvec(F: GF2k, rows, vec: Sequence[int]) -> list[int]:
    if F._exp is not None and rows:
        # log/antilog lookups for every product, then an XOR reduction per row
        exp, log = _np_tables(F.kappa)
        lr, zr = _log_rows(F.kappa, rows)
        v = np.asarray(vec, dtype=np.int64)
        prod = exp[lr + log[v]]
        prod[zr | (v == 0)] = 0
        return np.bitwise_xor.reduce(prod, axis=1).tolist()
    mul = F.mul
    out = []
    for row in rows:
        acc = 0
        for a, v in zip(row, vec):
            if a and v:
                acc ^= mul(a, v)
        out.append(acc)
    return out


def eval_through(F: GF2k, xs: Sequence[int], ys: Sequence[int], targets: Sequence[int]) -> list[int]:
    return _matvec(F, lagrange_matrix(F.kappa, tuple(xs), tuple(targets)), ys)


# ---------------------------------------------------------------------------
# sharing

@dataclass(frozen=True)
class ShareVector:
    shares: tuple[int, ...]
    message: tuple[int, ...]
    randomizer: tuple[int, ...]


def sss_share(params: SssParams, m: Sequence[int], s: Sequence[int]) -> ShareVector:
    """Shares ``f(enc(1)), ..., f(enc(Sigma))`` of the polynomial through ``m`` and ``s``."""
    sg = params.sigma
    if len(m) != sg or len(s) != sg:
        raise ParameterError(f"message and randomizer need {sg} elements each")
    F = params.field
    m = [F.check(int(v)) for v in m]
    s = [F.check(int(v)) for v in s]
    labels = params.share_labels()
    xs = params.message_labels() + labels[:sg]
    rest = eval_through(F, xs, m + s, labels[sg:])
    return ShareVector(tuple(s + rest), tuple(m), tuple(s))


def random_sharing(params: SssParams, m: Sequence[int], rng: np.random.Generator) -> ShareVector:
    return sss_share(params, m, params.field.random(rng, params.sigma))


def is_consistent(params: SssParams, positions: Sequence[int], values: Sequence[int]) -> bool:
    """Whether the points lie on one polynomial of degree at most ``2 sigma - 1``."""
    k = 2 * params.sigma
    if len(positions) != len(values):
        raise ParameterError("positions and values differ in length")
    if len(positions) <= k:
        return True
    labels = params.share_labels()
    xs = [labels[i] for i in positions]
    pred = eval_through(params.field, xs[:k], values[:k], xs[k:])
    return pred == [int(v) for v in values[k:]]


def sss_reconstruct(params: SssParams, positions: Sequence[int], values: Sequence[int]) -> tuple[int, ...]:
    """Message encoded by at least ``2 sigma`` consistent shares."""
    k = 2 * params.sigma
    if len(positions) < k:
        raise ParameterError(f"need at least {k} shares, got {len(positions)}")
    if len(set(positions)) != len(positions):
        raise ParameterError("duplicate share positions")
    if not all(0 <= i < params.big_sigma for i in positions):
        raise ParameterError("share position out of range")
    values = [params.field.check(int(v)) for v in values]
    if not is_consistent(params, positions, values):
        raise ParameterError("shares are not consistent with a polynomial of degree at most 2 sigma - 1")
    labels = params.share_labels()
    xs = [labels[i] for i in positions[:k]]
    return tuple(eval_through(params.field, xs, values[:k], params.message_labels()))


# ---------------------------------------------------------------------------
# nearest-codeword decoding

@dataclass(frozen=True)
class DecodeResult:
    message: tuple[int, ...]
    shares: tuple[int, ...]
    distance: int
    method: str  # "berlekamp-welch", "enumeration" or "fallback"
    flagged: bool  # tie or beyond unique-decoding radius


def _codeword_from(params: SssParams, positions: Sequence[int], values: Sequence[int]) -> list[int]:
    labels = params.share_labels()
    xs = [labels[i] for i in positions]
    return eval_through(params.field, xs, values, labels)


def _poly_divmod(F: GF2k, num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    num = list(num)
    while den and den[-1] == 0:
        den = den[:-1]
    inv_lead = F.inv(den[-1])
    q = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        c = F.mul(num[i + len(den) - 1], inv_lead)
        q[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] ^= F.mul(c, d)
    return q, num[: len(den) - 1]


def berlekamp_welch(params: SssParams, received: Sequence[int]) -> list[int] | None:
    """Codeword within distance ``sigma`` of ``received``, or ``None``."""
    F = params.field
    k, e = 2 * params.sigma, params.sigma
    xs = params.share_labels()
    rows, rhs = [], []
    for x, y in zip(xs, received):
        # Q(x) - y * (E_0 + ... + E_{e-1} x^{e-1}) = y * x^e
        pw = [1]
        for _ in range(k + e - 1):
            pw.append(F.mul(pw[-1], x))
        rows.append(pw[: k + e] + [F.mul(y, pw[j]) for j in range(e)])
        rhs.append(F.mul(y, pw[e]))
    sol = solve_linear(F, rows, rhs)
    if sol is None:
        return None
    q_poly, e_poly = sol[: k + e], sol[k + e:] + [1]
    p_poly, rem = _poly_divmod(F, q_poly, e_poly)
    if any(rem) or len([c for c in p_poly[k:] if c]):
        return None
    word = []
    for x in xs:
        acc = 0
        for c in reversed(p_poly[:k]):
            acc = F.mul(acc, x) ^ c
        word.append(acc)
    if sum(a != b for a, b in zip(word, received)) > e:
        return None
    return word


ENUMERATION_LIMIT = 20000


def decode_by_enumeration(params: SssParams, received: Sequence[int]) -> DecodeResult:
    """Exact minimum-distance decoding by trying every ``2 sigma``-subset of positions.

    The nearest codeword is always within distance ``2 sigma`` and so agrees
    with ``received`` on some such subset.  Ties go to the lexicographically
    smallest share vector.
    """
    k = 2 * params.sigma
    received = [int(v) for v in received]
    best = None
    tie = False
    seen = set()
    for pos in combinations(range(params.big_sigma), k):
        word = tuple(_codeword_from(params, pos, [received[i] for i in pos]))
        if word in seen:
            continue
        seen.add(word)
        d = sum(a != b for a, b in zip(word, received))
        if best is None or (d, word) < (best[0], best[1]):
            tie = best is not None and d == best[0]
            best = (d, word)
        elif d == best[0]:
            tie = True
    d, word = best
    return DecodeResult(_message_of(params, word), word, d, "enumeration", tie)


def _message_of(params: SssParams, word: Sequence[int]) -> tuple[int, ...]:
    k = 2 * params.sigma
    labels = params.share_labels()
    return tuple(eval_through(params.field, labels[:k], list(word[:k]), params.message_labels()))


def nearest_codeword(params: SssParams, received: Sequence[int]) -> DecodeResult:
    """Decode to the closest sharing; unique when at most ``sigma`` shares are wrong."""
    received = [params.field.check(int(v)) for v in received]
    if len(received) != params.big_sigma:
        raise ParameterError(f"need {params.big_sigma} shares")
    word = berlekamp_welch(params, received)
    if word is not None:
        d = sum(a != b for a, b in zip(word, received))
        return DecodeResult(_message_of(params, word), tuple(word), d, "berlekamp-welch", False)
    if math.comb(params.big_sigma, 2 * params.sigma) <= ENUMERATION_LIMIT:
        res = decode_by_enumeration(params, received)
        return DecodeResult(res.message, res.shares, res.distance, res.method, True)
    k = 2 * params.sigma
    word = tuple(_codeword_from(params, range(k), received[:k]))
    d = sum(a != b for a, b in zip(word, received))
    return DecodeResult(_message_of(params, word), word, d, "fallback", True)


# ---------------------------------------------------------------------------
# commitments to share vectors

def elems_to_bits(values: Sequence[int], kappa: int) -> np.ndarray:
    """Most significant bit first, ``kappa`` bits per element."""
    v = np.asarray(values, dtype=np.int64)[:, None]
    return ((v >> np.arange(kappa - 1, -1, -1)) & 1).astype(np.uint8).ravel()


def bits_to_elems(bits: np.ndarray, kappa: int) -> list[int]:
    b = np.asarray(bits, dtype=np.int64).reshape(-1, kappa)
    return [int(x) for x in b @ (1 << np.arange(kappa - 1, -1, -1))]


@dataclass(frozen=True, eq=False)
class SssCommitment:
    """Per share, ``kappa`` bit commitments: ``a`` has shape (Sigma, kappa, n), ``c`` (Sigma, kappa)."""

    a: np.ndarray
    c: np.ndarray

    def payload(self) -> dict:
        return {"a": self.a, "c": self.c}

    @classmethod
    def from_payload(cls, d: dict) -> "SssCommitment":
        return cls(np.asarray(d["a"], dtype=np.int64), np.asarray(d["c"], dtype=np.int64))


@dataclass
class CommitterState:
    params: SssParams
    key: CommitKey
    sharing: ShareVector
    committed: tuple[int, ...]  # share values actually committed
    masks: np.ndarray  # (Sigma, kappa, m)
    commitment: SssCommitment


def commit_phase(params: SssParams, key: CommitKey, m: Sequence[int], rng: np.random.Generator,
                 committed_override: Sequence[int] | None = None) -> CommitterState:
    """Share ``m`` and commit to every share bit.

    ``committed_override`` lets a (cheating) committer commit to values
    other than the honest shares; the retained sharing is still the honest one.
    """
    sharing = random_sharing(params, m, rng)
    values = tuple(sharing.shares if committed_override is None else (int(v) for v in committed_override))
    if len(values) != params.big_sigma:
        raise ParameterError(f"need {params.big_sigma} committed values")
    bits = elems_to_bits(values, params.kappa)
    a, c, masks = commit_many(key, bits, rng)
    n = key.params.n_dim
    com = SssCommitment(a.reshape(params.big_sigma, params.kappa, n), c.reshape(params.big_sigma, params.kappa))
    return CommitterState(params, key, sharing, values, masks.reshape(params.big_sigma, params.kappa, -1), com)


def verify_positions(params: SssParams, key: CommitKey, com: SssCommitment, positions: Sequence[int],
                     values: Sequence[int], masks: np.ndarray) -> bool:
    """Check the openings of the share commitments at ``positions``."""
    positions = list(positions)
    if not positions:
        return True
    masks = np.asarray(masks)
    kap = params.kappa
    if masks.shape != (len(positions), kap, key.params.m_samples):
        return False
    bits = elems_to_bits(values, kap)
    a = com.a[positions].reshape(-1, key.params.n_dim)
    c = com.c[positions].reshape(-1)
    return bool(verify_many(key, a, c, bits, masks.reshape(-1, key.params.m_samples)).all())


def extract_commitment(params: SssParams, key: CommitKey, com: SssCommitment) -> DecodeResult:
    """Extract every share with the binding secret and decode to the nearest sharing."""
    if key.mode != "binding":
        raise UsageError("extraction needs a binding key")
    bits = extract_many(key, com.a.reshape(-1, key.params.n_dim), com.c.reshape(-1))
    return nearest_codeword(params, bits_to_elems(bits, params.kappa))


# ---------------------------------------------------------------------------
# opening

@dataclass(frozen=True)
class OpenOutcome:
    accepted: bool
    message: tuple[int, ...] | None
    reason: str | None  # "inconsistent-shares" or "bad-opening" on abort
    transcript: list = field(default_factory=list)


class HonestOpener:
    """Committer side of the opening; may announce a different share vector."""

    def __init__(self, state: CommitterState, announced: Sequence[int] | None = None):
        self.state = state
        self.announced = tuple(state.sharing.shares if announced is None else (int(v) for v in announced))

    def shares(self) -> dict:
        return {"shares": list(self.announced)}

    def respond(self, challenge: Sequence[int]) -> dict:
        return {"masks": self.state.masks[list(challenge)]}


class OpenReceiver:
    def __init__(self, params: SssParams, key: CommitKey, com: SssCommitment):
        self.params = params
        self.key = key
        self.com = com
        self.shares: list[int] | None = None
        self.challenge: list[int] | None = None

    def receive_shares(self, msg: dict) -> str | None:
        shares = [int(v) for v in msg["shares"]]
        if len(shares) != self.params.big_sigma or any(not 0 <= v < self.params.field.order for v in shares):
            return "inconsistent-shares"
        if not is_consistent(self.params, range(self.params.big_sigma), shares):
            return "inconsistent-shares"
        self.shares = shares
        return None

    def set_challenge(self, challenge: Sequence[int]) -> dict:
        challenge = sorted(int(i) for i in challenge)
        check_challenge(self.params, challenge)
        self.challenge = challenge
        return {"challenge": challenge}

    def finish(self, msg: dict) -> OpenOutcome:
        vals = [self.shares[i] for i in self.challenge]
        if not verify_positions(self.params, self.key, self.com, self.challenge, vals, msg["masks"]):
            return OpenOutcome(False, None, "bad-opening")
        return OpenOutcome(True, sss_reconstruct(self.params, list(range(self.params.big_sigma)), self.shares), None)


def check_challenge(params: SssParams, challenge: Sequence[int]) -> None:
    if len(challenge) != params.sigma or len(set(challenge)) != params.sigma:
        raise ParameterError(f"challenge must be {params.sigma} distinct positions")
    if not all(0 <= i < params.big_sigma for i in challenge):
        raise ParameterError("challenge position out of range")


def random_challenge(params: SssParams, rng: np.random.Generator) -> list[int]:
    return sorted(int(i) for i in rng.choice(params.big_sigma, size=params.sigma, replace=False))


def open_phase(opener: HonestOpener, receiver: OpenReceiver, challenge: Sequence[int]) -> OpenOutcome:
    """Run the three opening messages with a challenge supplied by the caller."""
    transcript = []
    msg = opener.shares()
    transcript.append(("committer", msg))
    reason = receiver.receive_shares(msg)
    if reason:
        return OpenOutcome(False, None, reason, transcript)
    ch = receiver.set_challenge(challenge)
    transcript.append(("receiver", ch))
    resp = opener.respond(ch["challenge"])
    transcript.append(("committer", resp))
    out = receiver.finish(resp)
    return OpenOutcome(out.accepted, out.message, out.reason, transcript)


def trapdoor_open(state: CommitterState, target: Sequence[int], challenge: Sequence[int]) -> HonestOpener:
    """Opener that makes the receiver reconstruct ``target`` when it knows ``challenge`` in advance.

    The announced shares agree with the committed ones on ``challenge``
    and lie on the polynomial through ``target`` at the message labels.
    """
    params = state.params
    challenge = sorted(int(i) for i in challenge)
    check_challenge(params, challenge)
    target = [params.field.check(int(v)) for v in target]
    if len(target) != params.sigma:
        raise ParameterError(f"target needs {params.sigma} elements")
    labels = params.share_labels()
    xs = params.message_labels() + [labels[i] for i in challenge]
    ys = target + [state.committed[i] for i in challenge]
    fabricated = eval_through(params.field, xs, ys, labels)
    return HonestOpener(state, fabricated)


# ---------------------------------------------------------------------------
# challenge from coin bits

def challenge_bit_count(params: SssParams, slack: int = 32) -> int:
    return math.ceil(math.log2(math.comb(params.big_sigma, params.sigma))) + slack


def unrank_subset(n: int, k: int, rank: int) -> list[int]:
    """The ``rank``-th ``k``-subset of ``range(n)`` in lexicographic order."""
    if not 0 <= rank < math.comb(n, k):
        raise ParameterError("rank out of range")
    out = []
    x = 0
    while k:
        c = math.comb(n - x - 1, k - 1)
        if rank < c:
            out.append(x)
            k -= 1
        else:
            rank -= c
        x += 1
    return out


def rank_subset(n: int, subset: Sequence[int]) -> int:
    subset = sorted(subset)
    k = len(subset)
    rank = 0
    prev = -1
    for j, s in enumerate(subset):
        for x in range(prev + 1, s):
            rank += math.comb(n - x - 1, k - j - 1)
        prev = s
    return rank


def subset_from_bits(params: SssParams, bits) -> list[int]:
    """Map flipped coins to a challenge; the bias is below 2^-slack."""
    bits = np.asarray(bits, dtype=np.uint8)
    value = int("".join(map(str, bits.tolist())) or "0", 2)
    return unrank_subset(params.big_sigma, params.sigma, value % math.comb(params.big_sigma, params.sigma))
