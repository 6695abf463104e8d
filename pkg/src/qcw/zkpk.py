"""Zero-knowledge proofs of knowledge from simulatable witness encodings.

A witness encoding scheme is five algorithms: an encoder ``E``, a decoder
``D``, a selector ``S`` naming the positions revealed for a challenge, a
judge ``J`` that sees only those positions, and a simulator ``Ê`` that
produces the revealed positions without the witness.

The concrete scheme here encodes a Hamiltonian cycle Blum-style, repeated
``sigma`` times.  Repetition ``i`` is the bit string ``pi | C | M``:

* ``pi``: a random vertex relabelling, ``v`` fixed-width indices;
* ``C``: the witness cycle under the relabelling, ``v`` indices;
* ``M``: the relabelled adjacency matrix, ``v * v`` bits, row-major.

Challenge bit 0 reveals ``pi`` and ``M`` (the judge checks ``M = pi(G)``);
bit 1 reveals ``C`` and the ``v`` cells ``M[C_j, C_{j+1}]`` (the judge checks
that ``C`` is a permutation and the cells are all 1).  The cells opened
for bit 1 are named by ``C``, so ``S`` is a function of the challenge and
the ``C`` part of the encoding.

The protocol commits to the encoding position-wise under a flipped key,
flips the challenge and opens the selected positions.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Protocol as TypingProtocol, Sequence

import numpy as np

from .coinflip import NULL, Channel, IdealCoinFunc, coin_sequential, key_from_seed_bits
from .errors import ParameterError, UsageError
from .mixedcommit import CommitKey, LweParams, commit_many, extract_many, gen_binding, verify_many

SUCCESS = "success"
ABORT = "abort"


# ---------------------------------------------------------------------------
# graphs

@dataclass(frozen=True, eq=False)
class HamInstance:
    """Undirected graph and, optionally, a Hamiltonian cycle as a vertex sequence."""

    adj: np.ndarray  # v x v, uint8, symmetric, zero diagonal
    cycle: tuple[int, ...] | None = None

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=np.uint8)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 3:
            raise ParameterError("adjacency matrix must be square with at least 3 vertices")
        if not np.array_equal(adj, adj.T) or adj.diagonal().any() or (adj > 1).any():
            raise ParameterError("adjacency matrix must be symmetric 0/1 with zero diagonal")
        object.__setattr__(self, "adj", adj)
        if self.cycle is not None:
            object.__setattr__(self, "cycle", tuple(int(c) for c in self.cycle))

    @property
    def v(self) -> int:
        return self.adj.shape[0]

    def to_adjacency_list(self) -> dict[str, list[int]]:
        return {str(i): [int(j) for j in np.flatnonzero(self.adj[i])] for i in range(self.v)}

    @classmethod
    def from_adjacency_list(cls, data: dict, cycle=None) -> "HamInstance":
        v = len(data)
        adj = np.zeros((v, v), dtype=np.uint8)
        for key, nbrs in data.items():
            i = int(key)
            if not 0 <= i < v:
                raise ParameterError(f"vertex {i} out of range")
            for j in nbrs:
                if not 0 <= int(j) < v:
                    raise ParameterError(f"vertex {j} out of range")
                adj[i, int(j)] = adj[int(j), i] = 1
        return cls(adj, cycle)


def is_hamiltonian_cycle(adj: np.ndarray, cycle: Sequence[int]) -> bool:
    """Independent check: ``cycle`` visits every vertex once along edges of ``adj``."""
    adj = np.asarray(adj)
    v = adj.shape[0]
    try:
        cyc = [int(c) for c in cycle]
    except (TypeError, ValueError):
        return False
    if len(cyc) != v or sorted(cyc) != list(range(v)):
        return False
    return all(adj[cyc[j], cyc[(j + 1) % v]] == 1 for j in range(v))


def random_hamiltonian(v: int, rng: np.random.Generator, extra_edges: float = 0.3) -> HamInstance:
    """A random graph with a planted Hamiltonian cycle and extra edges with probability ``extra_edges``."""
    if v < 3:
        raise ParameterError("need at least 3 vertices")
    cycle = tuple(int(c) for c in rng.permutation(v))
    upper = np.triu(rng.random((v, v)) < extra_edges, 1)
    adj = (upper | upper.T).astype(np.uint8)
    for j in range(v):
        a, b = cycle[j], cycle[(j + 1) % v]
        adj[a, b] = adj[b, a] = 1
    return HamInstance(adj, cycle)


def relabel(adj: np.ndarray, pi: Sequence[int]) -> np.ndarray:
    """The graph with vertex ``a`` renamed ``pi[a]``."""
    pi = np.asarray(pi, dtype=np.int64)
    out = np.zeros_like(adj)
    out[np.ix_(pi, pi)] = adj
    return out


# ---------------------------------------------------------------------------
# the scheme interface

class WitnessEncodingScheme(TypingProtocol):
    sigma: int

    def length(self, x) -> int: ...
    def encode(self, x, w, r) -> np.ndarray: ...
    def decode(self, x, e) -> object: ...
    def select(self, x, s, e_c=None) -> np.ndarray: ...
    def judge(self, x, s, opened: dict[int, int]) -> str: ...
    def simulate(self, x, s, rng) -> dict[int, int]: ...


@dataclass(frozen=True)
class RepLayout:
    """Offsets within one repetition for ``v`` vertices."""

    v: int

    @property
    def width(self) -> int:
        return max(1, math.ceil(math.log2(self.v)))

    @property
    def pi(self) -> slice:
        return slice(0, self.v * self.width)

    @property
    def cyc(self) -> slice:
        return slice(self.v * self.width, 2 * self.v * self.width)

    @property
    def mat(self) -> slice:
        start = 2 * self.v * self.width
        return slice(start, start + self.v * self.v)

    @property
    def size(self) -> int:
        return 2 * self.v * self.width + self.v * self.v

    def pack(self, labels: Sequence[int]) -> np.ndarray:
        w = self.width
        return np.array([(int(a) >> (w - 1 - k)) & 1 for a in labels for k in range(w)], dtype=np.uint8)

    def unpack(self, bits) -> list[int]:
        bits = np.asarray(bits, dtype=np.int64).reshape(self.v, self.width)
        weights = 1 << np.arange(self.width - 1, -1, -1)
        return [int(x) for x in bits @ weights]


def _is_perm(labels: Sequence[int], v: int) -> bool:
    return sorted(labels) == list(range(v))


class HamEncoding:
    """Blum-style encoding of a Hamiltonian cycle, ``sigma`` parallel repetitions."""

    def __init__(self, sigma: int):
        if sigma < 1:
            raise ParameterError("sigma must be at least 1")
        self.sigma = sigma

    def layout(self, x: HamInstance) -> RepLayout:
        return RepLayout(x.v)

    def length(self, x: HamInstance) -> int:
        return self.sigma * self.layout(x).size

    def random_tape(self, x: HamInstance, rng: np.random.Generator) -> list[tuple[int, ...]]:
        return [tuple(int(a) for a in rng.permutation(x.v)) for _ in range(self.sigma)]

    # E
    def encode(self, x: HamInstance, w: Sequence[int], r: Sequence[Sequence[int]]) -> np.ndarray:
        if not is_hamiltonian_cycle(x.adj, w):
            raise UsageError("the witness is not a Hamiltonian cycle of the instance; refusing to encode")
        if len(r) != self.sigma:
            raise ParameterError(f"need {self.sigma} relabellings")
        return np.concatenate([self.encode_rep(x, w, pi) for pi in r])

    def encode_rep(self, x: HamInstance, w: Sequence[int], pi: Sequence[int]) -> np.ndarray:
        lay = self.layout(x)
        if not _is_perm(pi, x.v):
            raise ParameterError("relabelling must be a permutation")
        c = [pi[a] for a in w]
        return np.concatenate([lay.pack(pi), lay.pack(c), relabel(x.adj, pi).reshape(-1)]).astype(np.uint8)

    # D
    def decode(self, x: HamInstance, e) -> tuple[int, ...] | None:
        """Try every repetition; return the first candidate that is a Hamiltonian cycle of ``x``."""
        lay = self.layout(x)
        e = np.asarray(e, dtype=np.uint8)
        if e.size != self.length(x):
            raise ParameterError(f"encoding must have {self.length(x)} bits")
        for i in range(self.sigma):
            rep = e[i * lay.size:(i + 1) * lay.size]
            pi = lay.unpack(rep[lay.pi])
            c = lay.unpack(rep[lay.cyc])
            if not _is_perm(pi, x.v):
                continue
            inv = {b: a for a, b in enumerate(pi)}
            w = tuple(inv.get(b, -1) for b in c)
            if is_hamiltonian_cycle(x.adj, w):
                return w
        return None

    # S
    def select(self, x: HamInstance, s, e_c: dict[int, Sequence[int]] | None = None) -> np.ndarray:
        """Positions revealed for challenge ``s``.

        ``e_c`` maps each repetition with challenge bit 1 to its ``C``
        labels; without it only the fixed part of the selection is returned.
        """
        s = _challenge(s, self.sigma)
        lay = self.layout(x)
        out: list[np.ndarray] = []
        for i, bit in enumerate(s):
            base = i * lay.size
            if bit == 0:
                out.append(np.arange(lay.pi.start, lay.pi.stop) + base)
                out.append(np.arange(lay.mat.start, lay.mat.stop) + base)
            else:
                out.append(np.arange(lay.cyc.start, lay.cyc.stop) + base)
                if e_c is not None and i in e_c:
                    out.append(np.array(self._cycle_cells(lay, e_c[i]), dtype=np.int64) + base)
        return np.unique(np.concatenate(out)) if out else np.zeros(0, dtype=np.int64)

    @staticmethod
    def _cycle_cells(lay: RepLayout, c: Sequence[int]) -> list[int]:
        v = lay.v
        cells = []
        for j in range(v):
            a, b = int(c[j]), int(c[(j + 1) % v])
            if 0 <= a < v and 0 <= b < v:
                cells.append(lay.mat.start + a * v + b)
        return cells

    def cycle_labels(self, x: HamInstance, s, opened: dict[int, int]) -> dict[int, list[int]]:
        """Read the ``C`` labels of every bit-1 repetition from opened positions."""
        lay = self.layout(x)
        out = {}
        for i, bit in enumerate(_challenge(s, self.sigma)):
            if bit == 1:
                base = i * lay.size
                idx = range(base + lay.cyc.start, base + lay.cyc.stop)
                if all(k in opened for k in idx):
                    out[i] = lay.unpack([opened[k] for k in idx])
        return out

    def select_for(self, x: HamInstance, s, e) -> np.ndarray:
        """``S`` applied to a full encoding ``e``."""
        e = np.asarray(e, dtype=np.uint8)
        fixed = self.select(x, s)
        return self.select(x, s, self.cycle_labels(x, s, {int(k): int(e[k]) for k in fixed}))

    # J
    def judge(self, x: HamInstance, s, opened: dict[int, int]) -> str:
        """Verdict from the revealed bits only."""
        s = _challenge(s, self.sigma)
        lay = self.layout(x)
        labels = self.cycle_labels(x, s, opened)
        expected = self.select(x, s, labels)
        if sorted(opened) != expected.tolist():
            return ABORT
        v = x.v
        for i, bit in enumerate(s):
            base = i * lay.size
            if bit == 0:
                pi = lay.unpack([opened[base + k] for k in range(lay.pi.start, lay.pi.stop)])
                if not _is_perm(pi, v):
                    return ABORT
                m = np.array([opened[base + k] for k in range(lay.mat.start, lay.mat.stop)], dtype=np.uint8)
                if not np.array_equal(m, relabel(x.adj, pi).reshape(-1)):
                    return ABORT
            else:
                c = labels.get(i)
                if c is None or not _is_perm(c, v):
                    return ABORT
                if any(opened[base + k] != 1 for k in self._cycle_cells(lay, c)):
                    return ABORT
        return SUCCESS

    # Ê
    def simulate(self, x: HamInstance, s, rng: np.random.Generator) -> dict[int, int]:
        """Revealed bits for challenge ``s`` without a witness."""
        s = _challenge(s, self.sigma)
        perms = [tuple(int(a) for a in rng.permutation(x.v)) for _ in s]
        return self.simulate_with(x, s, perms)

    def simulate_with(self, x: HamInstance, s, perms: Sequence[Sequence[int]]) -> dict[int, int]:
        """Ê with its randomness given explicitly: one permutation per repetition."""
        lay = self.layout(x)
        out: dict[int, int] = {}
        for i, (bit, rho) in enumerate(zip(_challenge(s, self.sigma), perms)):
            base = i * lay.size
            if bit == 0:
                bits = np.concatenate([lay.pack(rho), relabel(x.adj, rho).reshape(-1)])
                idx = list(range(lay.pi.start, lay.pi.stop)) + list(range(lay.mat.start, lay.mat.stop))
                out.update({base + k: int(b) for k, b in zip(idx, bits)})
            else:
                out.update({base + lay.cyc.start + k: int(b) for k, b in enumerate(lay.pack(rho))})
                out.update({base + k: 1 for k in self._cycle_cells(lay, rho)})
        return out

    def reveal(self, x: HamInstance, s, e) -> dict[int, int]:
        """``e`` restricted to ``S(s)``."""
        e = np.asarray(e, dtype=np.uint8)
        return {int(k): int(e[k]) for k in self.select_for(x, s, e)}


def ham_encoding(sigma: int) -> HamEncoding:
    return HamEncoding(sigma)


def _challenge(s, sigma: int) -> list[int]:
    s = [int(b) for b in np.asarray(s).reshape(-1).tolist()]
    if len(s) != sigma or any(b not in (0, 1) for b in s):
        raise ParameterError(f"challenge must be {sigma} bits")
    return s


# per-definition helpers

def we_encode(scheme: HamEncoding, x, w, r):
    return scheme.encode(x, w, r)


def we_decode(scheme: HamEncoding, x, e):
    return scheme.decode(x, e)


def we_select(scheme: HamEncoding, x, s, e):
    return scheme.select_for(x, s, e)


def we_judge(scheme: HamEncoding, x, s, opened):
    return scheme.judge(x, s, opened)


def we_simulate(scheme: HamEncoding, x, s, rng):
    return scheme.simulate(x, s, rng)


def is_admissible(scheme: HamEncoding, x: HamInstance, e) -> bool:
    """Whether two distinct challenges both pass on ``e`` (exhaustive over challenges)."""
    passing = 0
    for s in product((0, 1), repeat=scheme.sigma):
        if scheme.judge(x, s, scheme.reveal(x, s, e)) == SUCCESS:
            passing += 1
            if passing >= 2:
                return True
    return False


def revealed_distribution(scheme: HamEncoding, x: HamInstance, w, s) -> dict[frozenset, Fraction]:
    """Exact law of ``e`` restricted to ``S(s)``, enumerating all encoder randomness."""
    counts: Counter = Counter()
    all_perms = list(permutations(range(x.v)))
    for r in product(all_perms, repeat=scheme.sigma):
        counts[frozenset(scheme.reveal(x, s, scheme.encode(x, w, r)).items())] += 1
    total = sum(counts.values())
    return {k: Fraction(c, total) for k, c in counts.items()}


def simulated_distribution(scheme: HamEncoding, x: HamInstance, s) -> dict[frozenset, Fraction]:
    """Exact law of Ê's output, enumerating all of its randomness."""
    counts: Counter = Counter()
    all_perms = list(permutations(range(x.v)))
    for perms in product(all_perms, repeat=scheme.sigma):
        counts[frozenset(scheme.simulate_with(x, s, perms).items())] += 1
    total = sum(counts.values())
    return {k: Fraction(c, total) for k, c in counts.items()}


# ---------------------------------------------------------------------------
# provers

class HonestProver:
    """Encodes the witness honestly; refuses if the witness is invalid."""

    def __init__(self, scheme: HamEncoding, x: HamInstance, w, rng: np.random.Generator):
        self.scheme = scheme
        self.x = x
        self.w = w
        self.rng = rng
        self.e: np.ndarray | None = None
        self._masks = None

    def encoding(self) -> np.ndarray:
        return self.scheme.encode(self.x, self.w, self.scheme.random_tape(self.x, self.rng))

    def commit(self, key: CommitKey) -> dict:
        self.e = self.encoding()
        a, c, masks = commit_many(key, self.e, self.rng)
        self._masks = masks
        return {"a": a, "c": c}

    def open(self, s) -> dict:
        pos = self.scheme.select_for(self.x, s, self.e)
        return {"positions": pos, "bits": self.e[pos], "masks": self._masks[pos]}


class GuessingProver(HonestProver):
    """No witness: per repetition, guesses the challenge bit and prepares an answer for that bit only."""

    def __init__(self, scheme: HamEncoding, x: HamInstance, w, rng: np.random.Generator):
        super().__init__(scheme, x, None, rng)
        self.guess: list[int] = []

    def encoding(self) -> np.ndarray:
        lay = self.scheme.layout(self.x)
        v = self.x.v
        reps = []
        self.guess = [int(b) for b in self.rng.integers(0, 2, size=self.scheme.sigma)]
        for bit in self.guess:
            pi = self.rng.permutation(v)
            rho = self.rng.permutation(v)
            if bit == 0:
                mat = relabel(self.x.adj, pi)
            else:
                mat = np.zeros((v, v), dtype=np.uint8)
                for j in range(v):
                    mat[rho[j], rho[(j + 1) % v]] = 1
            reps.append(np.concatenate([lay.pack(pi), lay.pack(rho), mat.reshape(-1)]))
        return np.concatenate(reps).astype(np.uint8)


PROVERS = {"honest": HonestProver, "cheat": GuessingProver}


# ---------------------------------------------------------------------------
# the protocol

@dataclass
class ZkpkResult:
    verdict: str
    s: list[int] | None = None
    reason: str | None = None
    opened: dict[int, int] = field(default_factory=dict)
    extracted: tuple[int, ...] | None = None
    key: CommitKey | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict == SUCCESS


DEFAULT_KAPPA = 256


def flip_bits(n: int, coin: str, rng: np.random.Generator, channel: Channel = NULL) -> np.ndarray | None:
    """Coins from the trusted functionality (``ideal``) or the sequential protocol."""
    if coin == "ideal":
        return IdealCoinFunc(n, rng).run().value
    if coin == "sequential":
        return coin_sequential(n, None, None, rng=rng, channel=channel).value
    raise ParameterError(f"unknown coin source {coin!r}")


def zkpk_run(x: HamInstance, prover, sigma: int, rng: np.random.Generator, kappa: int = DEFAULT_KAPPA,
             key_params: LweParams | None = None, coin: str = "ideal", channel: Channel = NULL,
             key: CommitKey | None = None, challenge=None) -> ZkpkResult:
    """One proof.

    ``prover`` is a prover object or a name from :data:`PROVERS`.  A
    supplied ``key`` (or ``challenge``) stands in for the outcome of the
    corresponding coin flip, as a simulator enforcing it would.
    """
    scheme = ham_encoding(sigma)
    key_params = key_params or LweParams.standard()
    if isinstance(prover, str):
        if prover not in PROVERS:
            raise ParameterError(f"unknown prover {prover!r}; choose from {sorted(PROVERS)}")
        prover = PROVERS[prover](scheme, x, x.cycle, np.random.default_rng(rng.integers(0, 1 << 63, size=2)))
    if key is None:
        bits = flip_bits(kappa, coin, rng, channel)
        if bits is None:
            return ZkpkResult(ABORT, reason="coin-abort")
        key = key_from_seed_bits(bits, key_params)
    try:
        com = channel.send("A", "commit", prover.commit(key.public()))
    except UsageError:
        return ZkpkResult(ABORT, reason="no-witness", key=key)
    if challenge is None:
        challenge = flip_bits(sigma, coin, rng, channel)
        if challenge is None:
            return ZkpkResult(ABORT, reason="coin-abort", key=key)
    s = _challenge(challenge, sigma)
    opening = channel.send("A", "open", prover.open(s))
    return _verify(scheme, x, key, com, s, opening)


def _verify(scheme: HamEncoding, x: HamInstance, key: CommitKey, com: dict, s, opening: dict) -> ZkpkResult:
    n = scheme.length(x)
    a, c = np.asarray(com["a"]), np.asarray(com["c"])
    pos = np.asarray(opening["positions"], dtype=np.int64).reshape(-1)
    bits = np.asarray(opening["bits"], dtype=np.int64).reshape(-1)
    masks = np.asarray(opening["masks"])
    if a.shape != (n, key.params.n_dim) or c.shape != (n,):
        return ZkpkResult(ABORT, s, "bad-commitment", key=key)
    if (pos.size != bits.size or masks.shape != (pos.size, key.params.m_samples)
            or (pos.size and (pos.min() < 0 or pos.max() >= n)) or np.unique(pos).size != pos.size
            or ((bits != 0) & (bits != 1)).any()):
        return ZkpkResult(ABORT, s, "bad-opening", key=key)
    if not verify_many(key, a[pos], c[pos], bits, masks).all():
        return ZkpkResult(ABORT, s, "bad-opening", key=key)
    opened = {int(k): int(b) for k, b in zip(pos, bits)}
    verdict = scheme.judge(x, s, opened)
    return ZkpkResult(verdict, s, None if verdict == SUCCESS else "judge", opened, key=key)


def zkpk_extract(x: HamInstance, sigma: int, key: CommitKey, com: dict) -> tuple[int, ...] | None:
    """Extract the whole encoding with the binding secret and decode it."""
    if key.mode != "binding":
        raise UsageError("extraction needs a binding key")
    e = extract_many(key, np.asarray(com["a"]), np.asarray(com["c"]))
    return ham_encoding(sigma).decode(x, e)


def simulate_against_prover(x: HamInstance, prover, sigma: int, rng: np.random.Generator,
                            key_params: LweParams | None = None) -> ZkpkResult:
    """Simulated verifier: enforce a binding key, run the proof, extract a witness on success."""
    key = gen_binding(key_params or LweParams.standard(), rng)
    log: list = []

    class _Tap:
        def send(self, sender, msg_type, payload):
            log.append((msg_type, payload))
            return payload

    res = zkpk_run(x, prover, sigma, rng, key_params=key.params, key=key, channel=_Tap())
    res.key = key
    if res.accepted:
        com = next(p for t, p in log if t == "commit")
        res.extracted = zkpk_extract(x, sigma, key, com)
    return res


# ---------------------------------------------------------------------------
# proofs over a flipped reference string

class Nizk(TypingProtocol):
    def prove(self, omega: np.ndarray, x, w) -> dict | None: ...
    def verify(self, omega: np.ndarray, x, proof: dict) -> bool: ...


class SquareRootNizk:
    """Test double for a non-interactive proof, NOT zero-knowledge.

    The language is the squares modulo a prime ``P``; the proof is the
    square root itself, bound to the reference string.  Completeness and
    soundness hold by construction.
    """

    P = 1019

    def member(self, x: int) -> bool:
        return pow(int(x) % self.P, (self.P - 1) // 2, self.P) in (0, 1)

    def witness(self, x: int) -> int | None:
        x = int(x) % self.P
        for w in range(self.P):
            if w * w % self.P == x:
                return w
        return None

    def prove(self, omega, x, w) -> dict | None:
        if w is None or (int(w) * int(w) - int(x)) % self.P:
            return None
        return {"omega": np.asarray(omega, dtype=np.uint8), "w": int(w)}

    def verify(self, omega, x, proof) -> bool:
        if proof is None:
            return False
        try:
            same = np.array_equal(np.asarray(proof["omega"], dtype=np.uint8), np.asarray(omega, dtype=np.uint8))
            w = int(proof["w"])
        except (KeyError, TypeError, ValueError):
            return False
        return same and (w * w - int(x)) % self.P == 0


@dataclass
class IqzkResult:
    accepted: bool
    omega: np.ndarray | None
    reason: str | None = None


def iqzk_run(x, nizk: Nizk, kappa: int, rng: np.random.Generator, w=None, coin: str = "sequential",
             channel: Channel = NULL) -> IqzkResult:
    """Flip the reference string, then send the non-interactive proof over it."""
    omega = flip_bits(kappa, coin, rng, channel)
    if omega is None:
        return IqzkResult(False, None, "coin-abort")
    proof = nizk.prove(omega, x, w)
    if proof is None:
        return IqzkResult(False, omega, "no-proof")
    proof = channel.send("A", "proof", proof)
    ok = nizk.verify(omega, x, proof)
    return IqzkResult(ok, omega, None if ok else "reject")
