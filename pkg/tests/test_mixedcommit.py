"""Naor's bit commitment and the dual-mode lattice commitment."""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcw.errors import ParameterError, UsageError
from qcw.mixedcommit import (LweCommitment, LweOpening, LweParams, NaorParams, commit_many, deserialize_key,
                             extract_many, gen_binding, gen_hiding, is_prime, key_from_values, key_to_values,
                             lwe_commit, lwe_extract, lwe_verify, naor_commit, naor_equivocation_probability,
                             naor_verify, serialize_key, verify_many)


@pytest.fixture(scope="module")
def bkey():
    return gen_binding(LweParams.standard(), np.random.default_rng(11))


@pytest.fixture(scope="module")
def hkey():
    return gen_hiding(LweParams.standard(), np.random.default_rng(12))


# ---------------------------------------------------------------------------
# Naor

@pytest.mark.parametrize("toy", [False, True])
def test_naor_honest_opening_verifies(toy):
    params = NaorParams(8, toy=toy)
    rng = np.random.default_rng(0)
    for a in (0, 1):
        rb = rng.integers(0, 2, size=params.expansion, dtype=np.uint8)
        seed = rng.integers(0, 2, size=params.n, dtype=np.uint8)
        com = naor_commit(params, a, seed, rb)
        assert naor_verify(params, com, rb, a, seed)
        assert not naor_verify(params, com, rb, 1 - a, seed)
        assert not naor_verify(params, com, rb, 2, seed)


def test_naor_equivocation_matches_brute_force():
    params = NaorParams(4, toy=True)
    outputs = [params.prg(np.array([(s >> (3 - i)) & 1 for i in range(4)], np.uint8)) for s in range(16)]
    bad = 0
    for rb_bits in product((0, 1), repeat=params.expansion):
        rb = np.array(rb_bits, np.uint8)
        bad += any(np.array_equal(g1 ^ g2, rb) for g1 in outputs for g2 in outputs)
    assert naor_equivocation_probability(params) == pytest.approx(bad / 2 ** params.expansion)


def test_naor_toy_bound_at_n8():
    assert naor_equivocation_probability(NaorParams(8, toy=True)) <= 4 * 2 ** -8


def test_naor_parameter_checks():
    with pytest.raises(ParameterError):
        NaorParams(20, toy=True)
    with pytest.raises(ParameterError):
        NaorParams(0)
    with pytest.raises(ParameterError):
        naor_commit(NaorParams(4), 0, np.zeros(4, np.uint8), np.zeros(3, np.uint8))
    with pytest.raises(ParameterError):
        naor_equivocation_probability(NaorParams(8))


# ---------------------------------------------------------------------------
# lattice commitment

def test_presets_satisfy_the_parameter_rules():
    for params in (LweParams.standard(), LweParams.small()):
        assert is_prime(params.p)
        assert params.n_dim ** 2 <= params.p <= 2 * params.n_dim ** 2
    with pytest.raises(ParameterError):
        LweParams(16, 256, 306, 0.4)
    with pytest.raises(ParameterError):
        LweParams(16, 257, 100, 0.4)


def test_binding_key_errors_stay_within_budget(bkey):
    e = (bkey.b - bkey.A @ bkey.sk) % bkey.params.p
    e = np.where(e > bkey.params.p // 2, e - bkey.params.p, e)
    assert e[e > 0].sum() < bkey.params.error_budget
    assert -e[e < 0].sum() < bkey.params.error_budget


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 1), st.integers(0, 2 ** 32 - 1))
def test_extraction_recovers_committed_bit(bit, seed):
    key = gen_binding(LweParams.standard(), np.random.default_rng(seed))
    com, opening = lwe_commit(key, bit, np.random.default_rng(seed + 1))
    assert lwe_verify(key, com, opening)
    assert lwe_extract(key, com) == bit
    assert not lwe_verify(key, com, LweOpening(1 - bit, opening.subset))


def test_batched_forms_agree_with_single(bkey):
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, size=50)
    a, c, masks = commit_many(bkey, bits, rng)
    for i in range(50):
        com = LweCommitment(a[i], int(c[i]))
        assert lwe_verify(bkey, com, LweOpening(int(bits[i]), masks[i]))
    assert verify_many(bkey, a, c, bits, masks).all()
    assert not verify_many(bkey, a, c, 1 - bits, masks).any()
    assert np.array_equal(extract_many(bkey, a, c), bits)


def test_malformed_openings_rejected(bkey):
    com, opening = lwe_commit(bkey, 1, np.random.default_rng(0))
    bad = opening.subset.copy()
    bad[0] = 2
    assert not lwe_verify(bkey, com, LweOpening(1, bad))
    assert not lwe_verify(bkey, com, LweOpening(1, bad[:-1]))
    assert not verify_many(bkey, com.a_vec[None], np.array([com.c_val]), np.array([3]), opening.subset[None]).any()


def test_hiding_key_has_no_trapdoor(hkey):
    com, _ = lwe_commit(hkey, 0, np.random.default_rng(0))
    with pytest.raises(UsageError):
        lwe_extract(hkey, com)
    with pytest.raises(UsageError):
        extract_many(hkey, com.a_vec[None], np.array([com.c_val]))


def test_hiding_key_can_be_equivocated_in_principle(hkey):
    # under a uniform key, many masks give the same a-vector distribution for either bit;
    # check the c-values of both bits look alike on a coarse histogram
    rng = np.random.default_rng(5)
    _, c0, _ = commit_many(hkey, np.zeros(20000, np.int64), rng)
    _, c1, _ = commit_many(hkey, np.ones(20000, np.int64), rng)
    h0 = np.bincount(c0 * 8 // 257, minlength=8) / 20000
    h1 = np.bincount(c1 * 8 // 257, minlength=8) / 20000
    assert 0.5 * np.abs(h0 - h1).sum() < 0.05


def test_public_view_drops_the_secret(bkey):
    pub = bkey.public()
    assert pub.sk is None and pub.mode == "hiding"
    assert np.array_equal(pub.A, bkey.A)


def test_key_serialization_roundtrip(bkey, hkey):
    for key in (bkey, hkey):
        back = deserialize_key(serialize_key(key), key.params.err_sigma)
        assert back == key
    with pytest.raises(ParameterError):
        deserialize_key(serialize_key(hkey)[:-3])


def test_key_values_roundtrip():
    params = LweParams.small()
    key = gen_hiding(params, np.random.default_rng(0))
    assert key_from_values(params, key_to_values(key)) == key
    with pytest.raises(ParameterError):
        key_from_values(params, np.zeros(3, np.int64))


def test_commit_argument_checks(bkey):
    with pytest.raises(ParameterError):
        lwe_commit(bkey, 2, np.random.default_rng(0))
    with pytest.raises(ParameterError):
        lwe_commit(bkey, 0, np.random.default_rng(0), subset=np.zeros(3, np.uint8))
