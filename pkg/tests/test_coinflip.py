"""Coin flipping, the amplified flavors and the enforcing simulators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcw import coinflip as cf
from qcw.errors import ParameterError
from qcw.harness.session import run_session
from qcw.harness.stats import chi_square_uniform
from qcw.mixedcommit import LweParams, NaorParams, gen_binding, gen_hiding
from qcw.ssscommit import SssParams, challenge_bit_count, subset_from_bits

IDEAL = cf.ForceConfig(base="ideal")


def party(name="honest", seed=0):
    return cf.STRATEGIES[name](np.random.default_rng(seed))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=70))
def test_bit_hex_roundtrip(bits):
    n = len(bits)
    assert cf.hex_to_bits(cf.bits_to_hex(bits), n).tolist() == bits
    assert cf.int_to_bits(cf.bits_to_int(bits), n).tolist() == bits


def test_conversion_errors():
    with pytest.raises(ParameterError):
        cf.int_to_bits(8, 3)
    with pytest.raises(ParameterError):
        cf.hex_to_bits("xyz", 8)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_key_bits_roundtrip(seed):
    rng = np.random.default_rng(seed)
    params = LweParams.small()
    key = gen_binding(params, rng)
    bits = cf.key_to_bits(key, rng)
    assert bits.size == cf.key_bit_count(params)
    back = cf.key_from_bits(bits, params)
    assert np.array_equal(back.A, key.A) and np.array_equal(back.b, key.b)


def test_seed_mode_keys_are_hiding():
    key = cf.key_from_seed_bits(np.ones(256, np.uint8), LweParams.small())
    assert key.mode == "hiding"


def test_single_coin_transcript():
    log = cf.ListChannel()
    out = cf.flip_one(party(seed=1), party(seed=2), cf.NaorScheme(NaorParams(16)), log)
    assert out.value.shape == (1,)
    assert [t for _, t, _ in log.log] == ["coin_setup", "coin_commit", "coin_response", "coin_open"]
    assert [s for s, _, _ in log.log] == ["B", "A", "B", "A"]


def test_refusal_voids_the_string():
    out = cf.flip_string(8, party("refuse"), party(), cf.NaorScheme(NaorParams(16)))
    assert out.aborted and out.reason == "refusal" and out.hex() is None
    with pytest.raises(ParameterError):
        cf.flip_string(0, party(), party())


def test_honest_coins_are_uniform():
    counts = np.zeros(16, int)
    scheme = cf.NaorScheme(NaorParams(16))
    a, b = party(seed=6), party(seed=7)
    for _ in range(800):
        counts[cf.bits_to_int(cf.flip_string(4, a, b, scheme).value)] += 1
    assert chi_square_uniform("coins", counts).passed


@pytest.mark.parametrize("strategy", ["honest", "zero", "pattern"])
def test_rewinding_simulator_hits_the_target(strategy):
    rng = np.random.default_rng(8)
    for _ in range(5):
        target = rng.integers(0, 2, size=8, dtype=np.uint8)
        log = cf.ListChannel()
        out, retries = cf.enforce_against_bob(target, strategy, rng=rng, naor_params=NaorParams(16), channel=log)
        assert np.array_equal(out.value, target)
        assert retries == sum(a - 1 for a in out.extra["attempts"])
        # only successful attempts reach the transcript
        assert len(log.log) == 4 * 8


def test_refusing_to_open_does_not_matter_on_the_responding_side():
    out, _ = cf.enforce_against_bob([1, 0], "refuse", rng=np.random.default_rng(0), naor_params=NaorParams(16))
    assert out.value.tolist() == [1, 0]


@pytest.mark.parametrize("strategy", ["honest", "zero", "pattern"])
def test_extracting_simulator_hits_the_target(strategy):
    rng = np.random.default_rng(9)
    key = gen_binding(LweParams.small(), rng)
    for _ in range(5):
        target = rng.integers(0, 2, size=8, dtype=np.uint8)
        assert np.array_equal(cf.enforce_against_alice(target, strategy, key, rng).value, target)


def test_extracting_simulator_needs_the_trapdoor():
    rng = np.random.default_rng(0)
    with pytest.raises(ParameterError):
        cf.enforce_against_alice([0], None, gen_hiding(LweParams.small(), rng), rng)
    assert cf.enforce_against_alice([0, 1], "refuse", None, rng).aborted


def test_force_random_honest_run():
    rng = np.random.default_rng(10)
    log = cf.ListChannel()
    out = cf.amplify_force_random(12, cfg=IDEAL, rng=rng, channel=log)
    assert out.value.shape == (12,)
    assert [t for _, t, _ in log.log] == ["string_commit", "string_response", "string_open"]


def test_force_random_with_a_flipped_key():
    out = cf.amplify_force_random(4, cfg=cf.ForceConfig(naor=NaorParams(16)), rng=np.random.default_rng(11))
    assert out.value.shape == (4,)


def test_force_random_enforcement_against_the_committer():
    rng = np.random.default_rng(12)
    for strategy in ("honest", "zero"):
        target = rng.integers(0, 2, size=10, dtype=np.uint8)
        out = cf.enforce_force_random(target, party(strategy, 1), cf.ForceConfig(naor=NaorParams(16)), rng)
        assert np.array_equal(out.value, target)


def test_force_force_honest_run_and_length_limit():
    rng = np.random.default_rng(13)
    out = cf.amplify_force_force(8, 4, cfg=IDEAL, rng=rng)
    assert out.value.shape == (8,)
    with pytest.raises(ParameterError):
        cf.amplify_force_force(4 * SssParams(4).kappa + 1, 4, cfg=IDEAL, rng=rng)


def test_challenge_target_maps_to_the_challenge():
    params = SssParams(4)
    rng = np.random.default_rng(14)
    nbits = challenge_bit_count(params)
    for _ in range(20):
        ch = sorted(int(i) for i in rng.choice(16, size=4, replace=False))
        assert subset_from_bits(params, cf.challenge_target(params, ch, nbits, rng)) == ch


@pytest.mark.parametrize("strategy", ["honest", "zero", "pattern"])
def test_force_force_enforcement_against_bob(strategy):
    rng = np.random.default_rng(15)
    for _ in range(3):
        target = rng.integers(0, 2, size=8, dtype=np.uint8)
        out = cf.enforce_ff_against_bob(target, party(strategy, 2), 8, 4, IDEAL, rng)
        assert np.array_equal(out.value, target)


def test_force_force_enforcement_against_alice():
    rng = np.random.default_rng(16)
    for _ in range(3):
        target = rng.integers(0, 2, size=8, dtype=np.uint8)
        assert np.array_equal(cf.enforce_ff_against_alice(target, party("honest", 3), 8, 4, IDEAL, rng).value,
                              target)
    with pytest.raises(ParameterError):
        cf.enforce_ff_against_alice([0, 1], party(), 8, 4, IDEAL, rng)


def test_share_swapping_alice_never_forces_a_wrong_value():
    rng = np.random.default_rng(17)
    for _ in range(10):
        target = rng.integers(0, 2, size=8, dtype=np.uint8)
        out = cf.enforce_ff_against_alice(target, party("swap-shares", int(rng.integers(1 << 30))), 8, 4, IDEAL, rng)
        assert out.aborted or np.array_equal(out.value, target)


def test_ideal_functionality():
    f = cf.IdealCoinFunc(6, np.random.default_rng(0))
    with pytest.raises(ParameterError):
        f.to_bob()
    h = f.to_alice()
    assert np.array_equal(f.to_bob().value, h)
    assert f.run(alice_accepts=False).aborted and f.aborted
    with pytest.raises(ParameterError):
        cf.IdealCoinFunc(0, np.random.default_rng(0))


def test_flavors():
    assert str(cf.FLAVOR_OF["force_force"]) == "(force,force)"
    with pytest.raises(ParameterError):
        cf.CoinFlavor("force", "strong")
    with pytest.raises(ParameterError):
        cf.make_party("nobody", np.random.default_rng(0))


@pytest.mark.parametrize("flavor", ["sequential", "force_random", "force_force"])
def test_coin_sessions_follow_their_schedule(flavor):
    cfg = {"flavor": flavor, "bits": 8, "sigma": 4, "base": "ideal", "naor_n": 16}
    out, session = run_session("coin", config=cfg, seed=3)
    assert out.accepted and len(out.values["coin"]) == 2
    again, session2 = run_session("coin", config=cfg, seed=3)
    assert again.values["coin"] == out.values["coin"]
    assert session.transcript_bytes() == session2.transcript_bytes()
