"""The fourteen acceptance criteria as one reproducible suite.

Every criterion draws its randomness from a seed derived from the master
seed and its index, so a suite run is a pure function of ``(seed, scale)``.
The JSON report holds estimates and verdicts only; wall-clock timings are
kept apart so that two runs can be compared byte for byte.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .. import coinflip as cf
from ..errors import ParameterError
from ..fieldmath import Distribution, min_entropy, min_entropy_split_witness
from ..hashing import pa_experiment
from ..mixedcommit import (LweParams, NaorParams, commit_many, extract_many, gen_binding, gen_hiding,
                           naor_equivocation_probability, verify_many)
from ..ssscommit import (HonestOpener, OpenReceiver, SssParams, commit_phase, open_phase, random_challenge,
                         trapdoor_open)
from ..zkpk import (ham_encoding, is_hamiltonian_cycle, random_hamiltonian, revealed_distribution,
                    simulate_against_prover, simulated_distribution)
from . import wire
from .session import derive_seed, run_session
from .stats import (StatReport, chi_square_uniform, exact_report, lower_report, proportion, rate_lower, rate_upper,
                    strict_upper_report, upper_report, within_report)

REPRO_SCALE = 0.01


@dataclass
class CriterionResult:
    id: int
    name: str
    reports: list[StatReport]
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0  # seconds; not part of the JSON report
    limit: float | None = None  # runtime limit in seconds, if the criterion states one

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def in_time(self) -> bool:
        return self.limit is None or self.elapsed < self.limit

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "passed": self.passed,
                "reports": [r.to_dict() for r in self.reports], "details": _plain(self.details)}

    def line(self) -> str:
        verdict = "PASS" if self.passed and self.in_time else "FAIL"
        limit = f" (limit {self.limit:.0f}s)" if self.limit is not None else ""
        return f"[{verdict}] {self.id:2d} {self.name}: {self.elapsed:.1f}s{limit}"


@dataclass
class SuiteReport:
    seed: int
    scale: float
    results: list[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "scale": self.scale, "passed": self.passed,
                "criteria": [r.to_dict() for r in self.results]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.12g}")
    if isinstance(v, Fraction):
        return str(v)
    return v


class Ctx:
    """Per-criterion randomness and trial scaling."""

    def __init__(self, index: int, master: int, scale: float):
        self.seed = derive_seed(master, f"criterion-{index}")
        self.rng = np.random.default_rng(self.seed)
        self.scale = scale

    def n(self, full: int, floor: int = 20) -> int:
        return max(min(floor, full), int(round(full * self.scale)))

    def sub(self, label) -> int:
        return derive_seed(self.seed, label)

    def child(self, label) -> np.random.Generator:
        return np.random.default_rng(self.sub(label))


# ---------------------------------------------------------------------------
# 1-3: hashing and entropy

def collision_fractions(n: int, ell: int) -> dict[int, Fraction]:
    """Exact fraction of all ``ell x n`` binary matrices mapping ``x`` and ``y`` together, keyed by ``x xor y``.

    The whole family of ``2^(ell n)`` matrices is enumerated; a pair collides
    under ``M`` iff ``M (x xor y) = 0``.
    """
    rows = np.arange(1 << n)
    ds = np.arange(1, 1 << n)
    # parity[r, d] = <r, d> over GF(2)
    anded = rows[:, None] & ds[None, :]
    parity = np.zeros_like(anded)
    for b in range(n):
        parity ^= (anded >> b) & 1
    hit = np.ones((1, ds.size), dtype=bool)
    # every matrix is a tuple of ell rows; enumerate them all
    for _ in range(ell):
        hit = (hit[:, None, :] & (parity[None, :, :] == 0)).reshape(-1, ds.size)
    counts = hit.sum(axis=0)
    total = 1 << (n * ell)
    return {int(d): Fraction(int(c), total) for d, c in zip(ds, counts)}


def c1_two_universal(ctx: Ctx) -> tuple[list, dict]:
    worst = {}
    ok = True
    for n in range(4, 7):
        for ell in range(1, 4):
            fr = collision_fractions(n, ell)
            target = Fraction(1, 1 << ell)
            bad = [d for d, f in fr.items() if f != target]
            ok &= not bad
            worst[f"n{n}_l{ell}"] = {"distinct_fractions": sorted({str(f) for f in fr.values()}),
                                     "target": str(target)}
    return [exact_report("collision_fraction_equals_2^-l", int(ok), 1)], worst


def _random_source(rng: np.random.Generator) -> tuple[Distribution, int]:
    n = int(rng.integers(4, 13))
    k = int(rng.integers(2, min(1 << n, 512) + 1))
    support = rng.choice(1 << n, size=k, replace=False)
    w = rng.random(k) ** float(rng.uniform(1.0, 6.0))
    w = w / w.sum()
    return Distribution({int(x): float(p) for x, p in zip(support, w)}), n


def c2_privacy_amplification(ctx: Ctx) -> tuple[list, dict]:
    instances = ctx.n(1000)
    violations = 0
    worst = -math.inf
    for i in range(instances):
        rng = ctx.child(i)
        dist, n = _random_source(rng)
        leak = sorted(int(j) for j in rng.choice(n, size=int(rng.integers(0, 4)), replace=False))
        ell = int(rng.integers(1, 5))
        res = pa_experiment(dist, leak, ell, 16, rng, n)
        violations += not res.holds
        worst = max(worst, res.empirical - res.bound)
    return ([exact_report("pa_bound_violations", violations, 0)],
            {"instances": instances, "max_empirical_minus_bound": worst})


def c3_min_entropy_split(ctx: Ctx) -> tuple[list, dict]:
    joints = ctx.n(200)
    failures = 0
    for i in range(joints):
        rng = ctx.child(i)
        cells = [(a, b) for a in range(4) for b in range(4)]
        keep = rng.choice(16, size=int(rng.integers(1, 17)), replace=False)
        w = rng.random(keep.size) ** float(rng.uniform(1.0, 4.0))
        w = w / w.sum()
        joint = Distribution({cells[j]: float(p) for j, p in zip(keep, w)})
        wit = min_entropy_split_witness(joint, min_entropy(joint))
        failures += not wit.found
    return [exact_report("split_witness_failures", failures, 0)], {"joints": joints}


# ---------------------------------------------------------------------------
# 4-7: commitments

def _projection(a: np.ndarray, c: np.ndarray) -> np.ndarray:
    return (a[:, 0] % 4) * 16 + (c * 16) // 257


def c4_mixed_commitment(ctx: Ctx) -> tuple[list, dict]:
    params = LweParams.standard()
    rng = ctx.rng
    bkey = gen_binding(params, rng)
    n_ext = ctx.n(10_000)
    bits = rng.integers(0, 2, size=n_ext)
    a, c, _ = commit_many(bkey, bits, rng)
    ext_ok = int((extract_many(bkey, a, c) == bits).sum())

    n_bind = ctx.n(100_000)
    bind_ok = 0
    chunk = 10_000
    for start in range(0, n_bind, chunk):
        size = min(chunk, n_bind - start)
        bits = rng.integers(0, 2, size=size)
        a, c, masks = commit_many(bkey, bits, rng)
        honest = verify_many(bkey, a, c, bits, masks)
        flipped = verify_many(bkey, a, c, 1 - bits, masks)
        ext = extract_many(bkey, a, c)
        bind_ok += int((honest & ~flipped & (ext == bits)).sum())

    hkey = gen_hiding(params, rng)
    n_hide = ctx.n(100_000)
    hist = np.zeros((2, 64), dtype=np.int64)
    for bit in (0, 1):
        for start in range(0, n_hide, chunk):
            size = min(chunk, n_hide - start)
            a, c, _ = commit_many(hkey, np.full(size, bit), rng)
            hist[bit] += np.bincount(_projection(a, c), minlength=64)
    p = hist / hist.sum(axis=1, keepdims=True)
    tvd = 0.5 * float(np.abs(p[0] - p[1]).sum())
    return ([exact_report("extraction_correct", ext_ok, n_ext),
             exact_report("binding_consistent", bind_ok, n_bind),
             strict_upper_report("hiding_projection_tvd", tvd, 0.05)],
            {"extraction_trials": n_ext, "binding_trials": n_bind, "hiding_samples_per_bit": n_hide})


def c5_naor_toy(ctx: Ctx) -> tuple[list, dict]:
    p = naor_equivocation_probability(NaorParams(8, toy=True))
    return [upper_report("equivocation_probability", p, 0.0, 4 * 2.0 ** -8)], {"n": 8}


def c6_cut_and_choose(ctx: Ctx) -> tuple[list, dict]:
    n_a = ctx.n(100_000)
    passed = 0
    for i in range(n_a):
        out, _ = run_session("ssscommit", {"A": "corrupt"}, {"sigma": 4}, ctx.sub(f"a-{i}"))
        passed += out.accepted
    target = math.comb(12, 4) / math.comb(16, 4)
    est = passed / n_a
    se = math.sqrt(target * (1 - target) / n_a)
    n_b = ctx.n(10_000)
    cheats = 0
    for i in range(n_b):
        out, _ = run_session("ssscommit", {"A": "guess"}, {"sigma": 16}, ctx.sub(f"b-{i}"))
        cheats += out.accepted
    return ([within_report("corrupt_sigma4_pass_rate", est, se, target),
             rate_upper("generic_cheat_sigma16_pass_rate", cheats, n_b, 0.75 ** 16)],
            {"trials_sigma4": n_a, "trials_sigma16": n_b})


def _transcript_bytes(transcript) -> bytes:
    return b"".join(role.encode() + wire.encode(msg) for role, msg in transcript)


def c7_trapdoor(ctx: Ctx) -> tuple[list, dict]:
    params = SssParams(8)
    lwe = LweParams.small()
    trials = ctx.n(1000)
    identical = 0
    accepted = 0
    for i in range(trials):
        rng = ctx.child(i)
        key = gen_hiding(lwe, rng)
        m = params.field.random(rng, params.sigma)
        state = commit_phase(params, key, m, rng)
        ch = random_challenge(params, rng)
        honest = open_phase(HonestOpener(state), OpenReceiver(params, key, state.commitment), ch)
        sim = open_phase(trapdoor_open(state, m, ch), OpenReceiver(params, key, state.commitment), ch)
        identical += _transcript_bytes(honest.transcript) == _transcript_bytes(sim.transcript)
        other = params.field.random(rng, params.sigma)
        while other == list(m):
            other = params.field.random(rng, params.sigma)
        fake = open_phase(trapdoor_open(state, other, ch), OpenReceiver(params, key, state.commitment), ch)
        accepted += fake.accepted and list(fake.message) == other
    return ([exact_report("same_message_transcripts_identical", identical, trials),
             exact_report("other_message_accepted", accepted, trials)], {"trials": trials, "sigma": 8})


# ---------------------------------------------------------------------------
# 8-11: oblivious transfer and identification

OT_CFG = {"m": 256, "alpha": 0.5, "lam": 0.1, "phi": 0.0}


def _positions_cell(i0) -> int:
    s = set(int(v) for v in i0)
    return sum(1 << j for j in range(4) if j in s)


def _bqsm_advantage(ctx: Ctx, gamma: float, trials: int) -> float:
    acc = []
    for i in range(trials):
        out, _ = run_session("ot", {"B": "bqsm"}, {"m": 512, "gamma": gamma}, ctx.sub(f"bqsm-{gamma}-{i}"))
        v = out.values
        if "guess0" not in v:
            continue
        other = 1 - v["k"]
        acc.append(float((v[f"guess{other}"] == v[f"s{other}"]).mean()))
    return float(np.mean(acc)) - 0.5 if acc else 0.0


def c8_ot(ctx: Ctx) -> tuple[list, dict]:
    n_c = ctx.n(1000)
    ok = sum(run_session("ot", {}, OT_CFG, ctx.sub(f"c-{i}"))[0].accepted for i in range(n_c))
    n_p = ctx.n(5000)
    hist = np.zeros((2, 16), dtype=np.int64)
    for k in (0, 1):
        for i in range(n_p):
            out, _ = run_session("ot", {}, dict(OT_CFG, k=k), ctx.sub(f"p{k}-{i}"))
            hist[k, _positions_cell(out.values["I0"])] += 1
    p = hist / hist.sum(axis=1, keepdims=True)
    tvd = 0.5 * float(np.abs(p[0] - p[1]).sum())
    n_b = ctx.n(300)
    honored = _bqsm_advantage(ctx, 0.08, n_b)
    violated = _bqsm_advantage(ctx, 0.3, n_b)
    return ([exact_report("completeness", ok, n_c),
             strict_upper_report("receiver_privacy_tvd", tvd, 0.05),
             strict_upper_report("bqsm_advantage_honored_regime", honored, 0.05)],
            {"completeness_trials": n_c, "privacy_runs_per_choice": n_p, "bqsm_trials": n_b,
             "bqsm_advantage_violated_regime": violated})


def c9_delayed(ctx: Ctx) -> tuple[list, dict]:
    trials = ctx.n(1000)
    rejected = sum(not run_session("ot", {"B": "delayed"}, dict(OT_CFG, phi_prime=0.02), ctx.sub(i))[0].accepted
                   for i in range(trials))
    return [rate_lower("delayed_receiver_rejected", rejected, trials, 0.99)], {"trials": trials}


def _kappa_cell(out) -> int:
    kap = out.values["kappa"]
    return int(kap[0]) << 3 | int(kap[1]) << 2 | int(kap[2]) << 1 | int(kap[3])


def c10_identification(ctx: Ctx) -> tuple[list, dict]:
    cells = np.zeros(16, dtype=np.int64)
    n_c = ctx.n(1000)
    ok = 0
    for i in range(n_c):
        rng = ctx.child(f"w-{i}")
        w = int(rng.integers(0, 16))
        out, _ = run_session("id", {}, {"w_A": w, "w_B": w}, ctx.sub(f"c-{i}"))
        ok += out.accepted
        cells[_kappa_cell(out)] += 1
    n_w = ctx.n(10_000)
    wrong = 0
    for i in range(n_w):
        rng = ctx.child(f"x-{i}")
        wa, wb = (int(v) for v in rng.choice(16, size=2, replace=False))
        out, _ = run_session("id", {}, {"w_A": wa, "w_B": wb}, ctx.sub(f"x-{i}"))
        wrong += out.accepted
        cells[_kappa_cell(out)] += 1
    est, se = proportion(wrong, n_w)
    return ([exact_report("completeness", ok, n_c),
             upper_report("wrong_password_acceptance", est, 0.0, 2.0 ** -8 + 0.02),
             chi_square_uniform("kappa_prefix_uniformity", cells)],
            {"completeness_trials": n_c, "wrong_password_trials": n_w, "wrong_password_se": se})


def c11_tamper(ctx: Ctx) -> tuple[list, dict]:
    n_t = ctx.n(1000)
    rejected = sum(not run_session("idplus", {"E": "tamper"}, {}, ctx.sub(f"t-{i}"))[0].accepted
                   for i in range(n_t))
    n_m = ctx.n(500)
    caught = sum(not run_session("idplus", {"E": "measure"}, {"phi_prime": 0.005, "eve_fraction": 0.1},
                                 ctx.sub(f"m-{i}"))[0].accepted for i in range(n_m))
    return ([rate_lower("tamper_rejected", rejected, n_t, 1 - 2.0 ** -16 - 0.01),
             rate_lower("measuring_eve_rejected", caught, n_m, 0.9)],
            {"tamper_trials": n_t, "measure_trials": n_m})


# ---------------------------------------------------------------------------
# 12-13: coins and proofs

def c12_coins(ctx: Ctx) -> tuple[list, dict]:
    ell = 8
    n_u = ctx.n(100_000)
    alice, bob = cf.CoinParty(ctx.child("alice")), cf.CoinParty(ctx.child("bob"))
    scheme = cf.NaorScheme()
    counts = np.zeros(1 << ell, dtype=np.int64)
    for _ in range(n_u):
        counts[cf.bits_to_int(cf.flip_string(ell, alice, bob, scheme).value)] += 1

    n_a = ctx.n(1000)
    key = gen_binding(LweParams.small(), ctx.child("key"))
    hits = nonabort = 0
    for i in range(n_a):
        rng = ctx.child(f"ea-{i}")
        target = rng.integers(0, 2, size=ell).astype(np.uint8)
        out = cf.enforce_against_alice(target, ("honest", "zero", "pattern")[i % 3], key, rng)
        if not out.aborted:
            nonabort += 1
            hits += bool(np.array_equal(out.value, target))

    n_b = ctx.n(1000)
    b_hits = b_nonabort = 0
    for i in range(n_b):
        rng = ctx.child(f"fb-{i}")
        target = rng.integers(0, 2, size=ell).astype(np.uint8)
        bob = cf.make_party(("honest", "zero", "pattern")[i % 3], rng)
        out = cf.enforce_ff_against_bob(target, bob, ell, 8, rng=rng)
        if not out.aborted:
            b_nonabort += 1
            b_hits += bool(np.array_equal(out.value, target))

    n_f = ctx.n(1000)
    failures = 0
    for i in range(n_f):
        rng = ctx.child(f"fa-{i}")
        target = rng.integers(0, 2, size=ell).astype(np.uint8)
        alice = cf.make_party(("honest", "swap-shares")[i % 2], rng)
        out = cf.enforce_ff_against_alice(target, alice, ell, 8, rng=rng)
        failures += (not out.aborted) and not np.array_equal(out.value, target)
    return ([chi_square_uniform("honest_uniformity", counts),
             exact_report("enforce_against_alice_hits", hits, nonabort),
             exact_report("force_bob_side_hits", b_hits, b_nonabort),
             rate_upper("force_alice_side_failure", failures, n_f, 0.75 ** 8)],
            {"uniformity_runs": n_u, "alice_runs": n_a, "alice_nonabort": nonabort, "bob_side_runs": n_b,
             "bob_side_nonabort": b_nonabort, "alice_side_runs": n_f})


def c13_zkpk(ctx: Ctx) -> tuple[list, dict]:
    n_c = ctx.n(200)
    ok = sum(run_session("zkpk", {}, {"vertices": 8, "sigma": 8}, ctx.sub(f"c-{i}"))[0].accepted for i in range(n_c))
    n_s = ctx.n(10_000)
    cheats = sum(run_session("zkpk", {"A": "cheat"}, {"vertices": 8, "sigma": 8}, ctx.sub(f"s-{i}"))[0].accepted
                 for i in range(n_s))
    n_e = ctx.n(200)
    extracted = accepted = 0
    for i in range(n_e):
        rng = ctx.child(f"e-{i}")
        x = random_hamiltonian(8, rng)
        res = simulate_against_prover(x, "honest", 8, rng)
        if res.accepted:
            accepted += 1
            extracted += res.extracted is not None and is_hamiltonian_cycle(x.adj, res.extracted)
    scheme = ham_encoding(2)
    x = random_hamiltonian(4, ctx.child("sim"))
    equal = all(revealed_distribution(scheme, x, x.cycle, list(s)) == simulated_distribution(scheme, x, list(s))
                for s in itertools.product((0, 1), repeat=2))
    return ([exact_report("completeness", ok, n_c),
             rate_upper("witnessless_acceptance", cheats, n_s, 2.0 ** -8),
             exact_report("extraction_on_accepting_runs", extracted, accepted),
             exact_report("simulation_exact_v4", int(equal), 1)],
            {"completeness_trials": n_c, "cheat_trials": n_s, "extraction_runs": n_e})


# ---------------------------------------------------------------------------
# 14 and the driver

def c14_reproducible(ctx: Ctx) -> tuple[list, dict]:
    scale = min(ctx.scale, REPRO_SCALE)
    first = run_suite(ctx.seed, scale, only=range(1, 14)).to_json()
    second = run_suite(ctx.seed, scale, only=range(1, 14)).to_json()
    return ([exact_report("reports_identical", int(first == second), 1)],
            {"scale": scale, "sha256": hashlib.sha256(first.encode()).hexdigest()})


CRITERIA: dict[int, tuple[str, Callable[[Ctx], tuple[list, dict]], float | None]] = {
    1: ("two-universality exact", c1_two_universal, 10),
    2: ("privacy-amplification bound", c2_privacy_amplification, 120),
    3: ("min-entropy splitting", c3_min_entropy_split, 60),
    4: ("mixed commitment", c4_mixed_commitment, 180),
    5: ("toy-scale Naor binding", c5_naor_toy, 120),
    6: ("cut-and-choose soundness", c6_cut_and_choose, 180),
    7: ("trapdoor opening", c7_trapdoor, None),
    8: ("oblivious transfer", c8_ot, 300),
    9: ("compiler catches delayed measurement", c9_delayed, None),
    10: ("identification", c10_identification, None),
    11: ("tamper detection with MAC", c11_tamper, None),
    12: ("coin flipping", c12_coins, 300),
    13: ("zero-knowledge proof of knowledge", c13_zkpk, None),
    14: ("reproducibility", c14_reproducible, None),
}


def run_criterion(index: int, master_seed: int = 0, scale: float = 1.0) -> CriterionResult:
    if index not in CRITERIA:
        raise ParameterError(f"no criterion {index}; choose from 1..{len(CRITERIA)}")
    name, fn, limit = CRITERIA[index]
    start = time.perf_counter()
    reports, details = fn(Ctx(index, master_seed, scale))
    return CriterionResult(index, name, reports, details, time.perf_counter() - start, limit)


def run_suite(master_seed: int = 0, scale: float = 1.0, only=None,
              progress: Callable[[CriterionResult], None] | None = None) -> SuiteReport:
    """Run the criteria in ``only`` (default: all) and collect one report."""
    if not scale > 0:
        raise ParameterError("scale must be positive")
    results = []
    for i in sorted(only if only is not None else CRITERIA):
        res = run_criterion(i, master_seed, scale)
        results.append(res)
        if progress is not None:
            progress(res)
    return SuiteReport(master_seed, scale, results)
