"""Packed Shamir sharing, nearest-codeword decoding and the share commitment."""

import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcw.errors import ParameterError, UsageError
from qcw.mixedcommit import LweParams, gen_binding, gen_hiding
from qcw.ssscommit import (HonestOpener, OpenReceiver, SssParams, berlekamp_welch, bits_to_elems,
                           challenge_bit_count, check_challenge, commit_phase, decode_by_enumeration, elems_to_bits,
                           enc, extract_commitment, is_consistent, nearest_codeword, open_phase, random_challenge,
                           random_sharing, rank_subset, sss_reconstruct, sss_share, subset_from_bits, trapdoor_open,
                           unrank_subset)


def corrupt(params, shares, positions, rng):
    out = list(shares)
    for i in positions:
        out[i] ^= int(rng.integers(1, params.field.order))
    return out


def test_labels_are_distinct_and_in_range():
    for sigma in (1, 4, 16):
        p = SssParams(sigma)
        labels = p.message_labels() + p.share_labels()
        assert len(set(labels)) == 5 * sigma
        assert all(0 <= x < p.field.order for x in labels)
    with pytest.raises(ParameterError):
        enc(5, 1)
    with pytest.raises(ParameterError):
        SssParams(4, kappa=3)
    with pytest.raises(ParameterError):
        SssParams(0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_any_two_sigma_shares_reconstruct(sigma, seed):
    rng = np.random.default_rng(seed)
    params = SssParams(sigma)
    m = params.field.random(rng, sigma)
    sh = random_sharing(params, m, rng)
    pos = sorted(int(i) for i in rng.choice(4 * sigma, size=2 * sigma, replace=False))
    assert sss_reconstruct(params, pos, [sh.shares[i] for i in pos]) == tuple(m)
    assert is_consistent(params, range(4 * sigma), sh.shares)


def test_first_shares_are_the_randomizer():
    params = SssParams(3)
    sh = sss_share(params, [1, 2, 3], [4, 5, 6])
    assert sh.shares[:3] == (4, 5, 6)


def test_sigma_shares_reveal_nothing():
    # for sigma = 1 over GF(8): any single share is uniform whatever the message
    params = SssParams(1)
    F = params.field
    for m in range(F.order):
        counts = np.zeros(F.order, int)
        for s in range(F.order):
            counts[sss_share(params, [m], [s]).shares[2]] += 1
        assert (counts == 1).all()


def test_reconstruct_rejects_bad_input():
    params = SssParams(2)
    sh = random_sharing(params, [1, 2], np.random.default_rng(0))
    with pytest.raises(ParameterError):
        sss_reconstruct(params, [0, 1, 2], list(sh.shares[:3]))
    with pytest.raises(ParameterError):
        sss_reconstruct(params, [0, 0, 1, 2], [sh.shares[i] for i in (0, 0, 1, 2)])
    bad = corrupt(params, sh.shares, [0], np.random.default_rng(1))
    with pytest.raises(ParameterError):
        sss_reconstruct(params, range(8), bad)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1), st.data())
def test_decoding_corrects_up_to_sigma_errors(sigma, seed, data):
    rng = np.random.default_rng(seed)
    params = SssParams(sigma)
    m = params.field.random(rng, sigma)
    sh = random_sharing(params, m, rng)
    errs = data.draw(st.integers(0, sigma))
    received = corrupt(params, sh.shares, rng.choice(4 * sigma, size=errs, replace=False), rng)
    res = nearest_codeword(params, received)
    assert res.message == tuple(m)
    assert res.distance == errs
    assert not res.flagged


def test_berlekamp_welch_agrees_with_enumeration_oracle():
    rng = np.random.default_rng(3)
    params = SssParams(2)
    for _ in range(40):
        sh = random_sharing(params, params.field.random(rng, 2), rng)
        received = corrupt(params, sh.shares, rng.choice(8, size=int(rng.integers(0, 3)), replace=False), rng)
        bw = berlekamp_welch(params, received)
        brute = decode_by_enumeration(params, received)
        assert bw is not None and tuple(bw) == brute.shares


def test_beyond_radius_is_flagged():
    rng = np.random.default_rng(4)
    params = SssParams(2)
    flagged = 0
    for _ in range(30):
        sh = random_sharing(params, params.field.random(rng, 2), rng)
        received = corrupt(params, sh.shares, rng.choice(8, size=4, replace=False), rng)
        res = nearest_codeword(params, received)
        # the decoder always returns a codeword no farther than the truth
        assert res.distance <= 4
        flagged += res.flagged or res.distance < 4
    assert flagged == 30


def test_element_bit_conversion_roundtrip():
    vals = [0, 1, 127, 64]
    bits = elems_to_bits(vals, 7)
    assert bits.size == 28 and bits[:7].tolist() == [0] * 7
    assert bits_to_elems(bits, 7) == vals


def test_subset_ranking_is_a_bijection():
    n, k = 8, 3
    subsets = list(combinations(range(n), k))
    assert [unrank_subset(n, k, r) for r in range(len(subsets))] == [list(s) for s in subsets]
    assert all(rank_subset(n, s) == r for r, s in enumerate(subsets))
    with pytest.raises(ParameterError):
        unrank_subset(n, k, len(subsets))


def test_coin_bits_map_to_valid_challenges():
    params = SssParams(4)
    nbits = challenge_bit_count(params)
    assert 2 ** (nbits - 32) >= math.comb(16, 4)
    rng = np.random.default_rng(0)
    for _ in range(50):
        ch = subset_from_bits(params, rng.integers(0, 2, size=nbits))
        check_challenge(params, ch)
    with pytest.raises(ParameterError):
        check_challenge(params, [0, 0, 1, 2])
    with pytest.raises(ParameterError):
        check_challenge(params, [0, 1, 2, 16])


@pytest.fixture(scope="module")
def keys():
    rng = np.random.default_rng(9)
    return gen_binding(LweParams.small(), rng), gen_hiding(LweParams.small(), rng)


def test_honest_commit_and_open(keys):
    bkey, _ = keys
    params = SssParams(4)
    rng = np.random.default_rng(1)
    m = params.field.random(rng, 4)
    state = commit_phase(params, bkey.public(), m, rng)
    out = open_phase(HonestOpener(state), OpenReceiver(params, bkey.public(), state.commitment),
                     random_challenge(params, rng))
    assert out.accepted and out.message == tuple(m)
    assert extract_commitment(params, bkey, state.commitment).message == tuple(m)
    with pytest.raises(UsageError):
        extract_commitment(params, bkey.public(), state.commitment)


def test_inconsistent_announcement_rejected(keys):
    _, hkey = keys
    params = SssParams(4)
    rng = np.random.default_rng(2)
    state = commit_phase(params, hkey, params.field.random(rng, 4), rng)
    bad = corrupt(params, state.sharing.shares, [3], rng)
    out = open_phase(HonestOpener(state, bad), OpenReceiver(params, hkey, state.commitment),
                     random_challenge(params, rng))
    assert not out.accepted and out.reason == "inconsistent-shares"


def test_cheat_caught_exactly_when_challenge_hits_a_corrupted_position(keys):
    bkey, _ = keys
    params = SssParams(2)
    rng = np.random.default_rng(3)
    m = params.field.random(rng, 2)
    sharing = random_sharing(params, m, rng)
    bad_pos = [1, 5]
    committed = corrupt(params, sharing.shares, bad_pos, rng)
    state = commit_phase(params, bkey.public(), m, rng, committed_override=committed)
    state.sharing = sharing
    for ch in combinations(range(8), 2):
        out = open_phase(HonestOpener(state, sharing.shares), OpenReceiver(params, bkey.public(), state.commitment),
                         list(ch))
        assert out.accepted == (not set(ch) & set(bad_pos))


def test_trapdoor_opening(keys):
    _, hkey = keys
    params = SssParams(4)
    rng = np.random.default_rng(4)
    m = params.field.random(rng, 4)
    state = commit_phase(params, hkey, m, rng)
    ch = random_challenge(params, rng)
    same = trapdoor_open(state, m, ch)
    assert same.announced == state.sharing.shares
    target = params.field.random(rng, 4)
    out = open_phase(trapdoor_open(state, target, ch), OpenReceiver(params, hkey, state.commitment), ch)
    assert out.accepted and out.message == tuple(target)
    other = [i for i in range(16) if i not in ch][:4]
    if list(target) != list(m):
        assert not open_phase(trapdoor_open(state, target, ch), OpenReceiver(params, hkey, state.commitment),
                              other).accepted
