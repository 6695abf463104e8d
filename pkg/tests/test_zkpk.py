"""Witness encoding for Hamiltonicity, the compiled proof and its simulators."""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcw.errors import ParameterError, UsageError
from qcw.harness.session import run_session
from qcw.mixedcommit import LweParams, gen_hiding
from qcw.zkpk import (ABORT, SUCCESS, GuessingProver, HamInstance, HonestProver, SquareRootNizk, ham_encoding,
                      iqzk_run, is_admissible, is_hamiltonian_cycle, random_hamiltonian, relabel,
                      revealed_distribution, simulate_against_prover, simulated_distribution, zkpk_extract, zkpk_run)

SMALL = LweParams.small()


def square() -> HamInstance:
    adj = np.zeros((4, 4), np.uint8)
    for a, b in ((0, 1), (1, 2), (2, 3), (3, 0)):
        adj[a, b] = adj[b, a] = 1
    return HamInstance(adj, (0, 1, 2, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 12), st.integers(0, 2 ** 32 - 1))
def test_planted_cycle_is_hamiltonian(v, seed):
    x = random_hamiltonian(v, np.random.default_rng(seed))
    assert is_hamiltonian_cycle(x.adj, x.cycle)
    back = HamInstance.from_adjacency_list(x.to_adjacency_list())
    assert np.array_equal(back.adj, x.adj)


def test_cycle_checker_rejects_non_cycles():
    x = square()
    assert not is_hamiltonian_cycle(x.adj, (0, 2, 1, 3))
    assert not is_hamiltonian_cycle(x.adj, (0, 1, 2))
    assert not is_hamiltonian_cycle(x.adj, (0, 1, 1, 3))
    assert not is_hamiltonian_cycle(x.adj, "abcd")


def test_instance_validation():
    with pytest.raises(ParameterError):
        HamInstance(np.zeros((2, 2), np.uint8))
    with pytest.raises(ParameterError):
        HamInstance(np.array([[0, 1, 0], [0, 0, 1], [1, 1, 0]], np.uint8))
    with pytest.raises(ParameterError):
        HamInstance.from_adjacency_list({"0": [5], "1": [], "2": []})
    with pytest.raises(ParameterError):
        random_hamiltonian(2, np.random.default_rng(0))


def test_relabel_is_an_isomorphism():
    x = random_hamiltonian(6, np.random.default_rng(1))
    pi = [3, 5, 0, 1, 4, 2]
    g = relabel(x.adj, pi)
    assert is_hamiltonian_cycle(g, [pi[a] for a in x.cycle])
    assert g.sum() == x.adj.sum()


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 8), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_honest_encoding_decodes_and_passes_every_challenge(v, sigma, seed):
    rng = np.random.default_rng(seed)
    x = random_hamiltonian(v, rng)
    scheme = ham_encoding(sigma)
    e = scheme.encode(x, x.cycle, scheme.random_tape(x, rng))
    assert e.size == scheme.length(x)
    assert is_hamiltonian_cycle(x.adj, scheme.decode(x, e))
    s = rng.integers(0, 2, size=sigma)
    assert scheme.judge(x, s, scheme.reveal(x, s, e)) == SUCCESS


def test_encoder_refuses_a_bad_witness():
    x = square()
    scheme = ham_encoding(1)
    with pytest.raises(UsageError):
        scheme.encode(x, (0, 2, 1, 3), scheme.random_tape(x, np.random.default_rng(0)))
    with pytest.raises(ParameterError):
        scheme.encode(x, x.cycle, [])
    with pytest.raises(ParameterError):
        scheme.judge(x, [0, 1], {})


def test_judge_rejects_missing_or_extra_bits():
    rng = np.random.default_rng(2)
    x = random_hamiltonian(5, rng)
    scheme = ham_encoding(2)
    e = scheme.encode(x, x.cycle, scheme.random_tape(x, rng))
    opened = scheme.reveal(x, [0, 1], e)
    fewer = dict(opened)
    fewer.pop(next(iter(fewer)))
    assert scheme.judge(x, [0, 1], fewer) == ABORT
    more = dict(opened)
    extra = next(k for k in range(e.size) if k not in opened)
    more[extra] = int(e[extra])
    assert scheme.judge(x, [0, 1], more) == ABORT


def test_every_passing_pair_of_challenges_yields_a_witness():
    # special soundness: an encoding passing two challenges decodes to a cycle
    rng = np.random.default_rng(3)
    x = random_hamiltonian(5, rng)
    scheme = ham_encoding(2)
    honest = scheme.encode(x, x.cycle, scheme.random_tape(x, rng))
    assert is_admissible(scheme, x, honest)
    assert is_hamiltonian_cycle(x.adj, scheme.decode(x, honest))
    cheat = GuessingProver(scheme, x, None, rng)
    for _ in range(20):
        e = cheat.encoding()
        passing = [s for s in product((0, 1), repeat=2) if scheme.judge(x, s, scheme.reveal(x, s, e)) == SUCCESS]
        assert len(passing) <= 1 or scheme.decode(x, e) is not None


@pytest.mark.parametrize("s", [(0,), (1,)])
def test_simulator_matches_the_revealed_bits_exactly(s):
    x = square()
    scheme = ham_encoding(1)
    assert revealed_distribution(scheme, x, x.cycle, s) == simulated_distribution(scheme, x, s)


def test_simulator_output_is_accepted():
    rng = np.random.default_rng(4)
    x = random_hamiltonian(6, rng)
    scheme = ham_encoding(3)
    for s in product((0, 1), repeat=3):
        assert scheme.judge(x, s, scheme.simulate(x, s, rng)) == SUCCESS


def test_honest_proof_accepts():
    rng = np.random.default_rng(5)
    x = random_hamiltonian(5, rng)
    for coin in ("ideal", "sequential"):
        res = zkpk_run(x, "honest", 3, rng, kappa=32, key_params=SMALL, coin=coin)
        assert res.accepted and len(res.s) == 3


def test_cheating_prover_passes_about_one_in_two_to_the_sigma():
    rng = np.random.default_rng(6)
    x = random_hamiltonian(5, rng)
    n = 400
    hits = sum(zkpk_run(x, "cheat", 2, rng, key_params=SMALL).accepted for _ in range(n))
    assert abs(hits / n - 0.25) < 4 * np.sqrt(0.25 * 0.75 / n)


def test_proof_without_witness_aborts():
    rng = np.random.default_rng(7)
    x = random_hamiltonian(5, rng)
    bad = HamInstance(x.adj, None)
    res = zkpk_run(bad, HonestProver(ham_encoding(2), bad, None, rng), 2, rng, key_params=SMALL)
    assert res.verdict == ABORT and res.reason == "no-witness"
    with pytest.raises(ParameterError):
        zkpk_run(x, "oracle", 2, rng)


def test_extraction_recovers_a_witness():
    rng = np.random.default_rng(8)
    x = random_hamiltonian(6, rng)
    for _ in range(5):
        res = simulate_against_prover(x, "honest", 3, rng, SMALL)
        assert res.accepted and is_hamiltonian_cycle(x.adj, res.extracted)


def test_extraction_needs_the_binding_trapdoor():
    rng = np.random.default_rng(9)
    x = random_hamiltonian(4, rng)
    with pytest.raises(UsageError):
        zkpk_extract(x, 1, gen_hiding(SMALL, rng), {"a": np.zeros((1, 2)), "c": np.zeros(1)})


def test_zkpk_session():
    out, session = run_session("zkpk", config={"vertices": 5, "sigma": 3, "preset": "small"}, seed=1)
    assert out.accepted and out.values["verdict"] == SUCCESS
    cfg = {"vertices": 5, "sigma": 3, "preset": "small"}
    cheats = sum(run_session("zkpk", {"A": "cheat"}, cfg, seed=s)[0].accepted for s in range(40))
    assert cheats < 15


def test_square_root_proofs():
    nizk = SquareRootNizk()
    rng = np.random.default_rng(10)
    x = 16
    assert nizk.member(x) and nizk.witness(x) in (4, nizk.P - 4)
    res = iqzk_run(x, nizk, 16, rng, nizk.witness(x), coin="ideal")
    assert res.accepted and res.omega.size == 16
    assert not iqzk_run(x, nizk, 16, rng, 3, coin="ideal").accepted
    proof = nizk.prove(np.zeros(4, np.uint8), x, 4)
    assert not nizk.verify(np.ones(4, np.uint8), x, proof)
    assert not nizk.verify(np.zeros(4, np.uint8), x, {"omega": 1})


def test_iqzk_session():
    out, _ = run_session("iqzk", config={"x": 4, "kappa": 8}, seed=2)
    assert out.accepted
    out, _ = run_session("iqzk", {"A": "witnessless"}, {"x": 4, "kappa": 8}, seed=2)
    assert not out.accepted
