"""Hash families, the amplification bound and distance estimates."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcw.errors import ParameterError
from qcw.fieldmath import Distribution
from qcw.harness.suite import collision_fractions
from qcw.hashing import (HashFunc, PaBoundInput, apply_hash, apply_hash_many, conditional_min_entropy,
                         empirical_tvd, hash_distance, histogram_tvd, pa_bound, pa_experiment, sample_hash)


def brute_collision(n, ell, x, y):
    """Oracle: loop over every matrix explicitly."""
    hits = 0
    for entries in product((0, 1), repeat=n * ell):
        M = np.array(entries, dtype=np.uint8).reshape(ell, n)
        f = HashFunc("matrix", M, None)
        hits += np.array_equal(apply_hash(f, x), apply_hash(f, y))
    return Fraction(hits, 2 ** (n * ell))


def test_vectorised_collision_count_matches_explicit_loop():
    fr = collision_fractions(3, 2)
    for d in range(1, 8):
        x = np.zeros(3, dtype=np.uint8)
        y = np.array([(d >> i) & 1 for i in range(3)], dtype=np.uint8)
        assert fr[d] == brute_collision(3, 2, x, y) == Fraction(1, 4)


@pytest.mark.parametrize("n,ell", [(4, 1), (4, 3), (5, 2)])
def test_matrix_family_is_exactly_two_universal(n, ell):
    assert set(collision_fractions(n, ell).values()) == {Fraction(1, 2 ** ell)}


def test_affine_family_is_strongly_universal():
    # for fixed x != y and targets (a, b), exactly 2^{-2 ell} of the affine maps send x -> a and y -> b
    n, ell = 3, 1
    x, y = np.array([1, 0, 0], np.uint8), np.array([0, 1, 1], np.uint8)
    counts = {}
    for entries in product((0, 1), repeat=n * ell + ell):
        M = np.array(entries[: n * ell], np.uint8).reshape(ell, n)
        f = HashFunc("affine", M, np.array(entries[n * ell:], np.uint8))
        key = (int(apply_hash(f, x)[0]), int(apply_hash(f, y)[0]))
        counts[key] = counts.get(key, 0) + 1
    assert set(counts.values()) == {2 ** (n * ell + ell) // 4}


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n), st.integers(0, 2 ** 32 - 1))))
def test_hash_is_linear(args):
    n, ell, seed = args
    rng = np.random.default_rng(seed)
    f = sample_hash(n, ell, False, rng)
    x, y = rng.integers(0, 2, size=(2, n), dtype=np.uint8)
    assert np.array_equal(apply_hash(f, x ^ y), apply_hash(f, x) ^ apply_hash(f, y))
    assert np.array_equal(apply_hash_many(f, np.stack([x, y]))[1], apply_hash(f, y))


def test_short_inputs_are_zero_padded():
    f = sample_hash(6, 2, True, np.random.default_rng(0))
    x = np.array([1, 0, 1], np.uint8)
    assert np.array_equal(apply_hash(f, x), apply_hash(f, np.concatenate([x, np.zeros(3, np.uint8)])))


def test_hash_parameter_checks():
    rng = np.random.default_rng(0)
    with pytest.raises(ParameterError):
        sample_hash(3, 4, False, rng)
    with pytest.raises(ParameterError):
        apply_hash(sample_hash(3, 1, False, rng), np.zeros(4, np.uint8))
    with pytest.raises(ParameterError):
        HashFunc("affine", np.zeros((1, 2), np.uint8), None)
    with pytest.raises(ParameterError):
        HashFunc("other", np.zeros((1, 2), np.uint8), None)


def test_describe_roundtrip():
    f = sample_hash(5, 3, True, np.random.default_rng(3))
    g = HashFunc.from_description(f.describe())
    assert np.array_equal(f.matrix, g.matrix) and np.array_equal(f.offset, g.offset)


def test_pa_bound_formula():
    assert pa_bound(PaBoundInput(10.0, 2.0, 4)) == pytest.approx(0.5 * 2 ** -2)
    with pytest.raises(ParameterError):
        PaBoundInput(float("inf"), 0.0, 1)
    with pytest.raises(ParameterError):
        PaBoundInput(1.0, 0.0, 0)


def test_conditional_min_entropy_oracle():
    # X uniform on 2 bits, first bit leaked: H_min(X | X_0) = 1
    xs = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], np.uint8)
    probs = np.full(4, 0.25)
    assert conditional_min_entropy(xs, probs, [0]) == pytest.approx(1.0)
    assert conditional_min_entropy(xs, probs, []) == pytest.approx(2.0)


def test_hash_distance_against_direct_enumeration():
    rng = np.random.default_rng(5)
    xs = np.array(list(product((0, 1), repeat=4)), np.uint8)
    probs = rng.random(16)
    probs /= probs.sum()
    f = sample_hash(4, 2, False, rng)
    leak = [3]
    joint = {}
    pu = {}
    for x, p in zip(xs, probs):
        key = (int(x[3]), tuple(apply_hash(f, x)))
        joint[key] = joint.get(key, 0.0) + p
        pu[int(x[3])] = pu.get(int(x[3]), 0.0) + p
    direct = 0.5 * sum(abs(joint.get((u, z), 0.0) - pu[u] / 4) for u in pu for z in product((0, 1), repeat=2))
    assert hash_distance(f, xs, probs, leak) == pytest.approx(direct)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_amplification_bound_holds_on_random_sources(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    support = rng.choice(2 ** n, size=int(rng.integers(2, 2 ** n + 1)), replace=False)
    w = rng.random(support.size) ** 2
    w /= w.sum()
    dist = Distribution({int(x): float(p) for x, p in zip(support, w)})
    res = pa_experiment(dist, [0], int(rng.integers(1, n + 1)), 8, rng, n)
    assert res.holds


def test_pa_experiment_needs_length_for_integers():
    with pytest.raises(ParameterError):
        pa_experiment(Distribution.uniform([0, 1]), [], 1, 2, np.random.default_rng(0))
    res = pa_experiment(Distribution.uniform(["00", "01", "10", "11"]), [], 1, 4, np.random.default_rng(0))
    assert res.empirical <= res.bound + 1e-12


def test_tvd_estimators():
    assert empirical_tvd([0, 0, 1, 1], [0, 1]) == 0.0
    assert empirical_tvd([np.array([1, 0])], [np.array([0, 1])]) == 1.0
    assert histogram_tvd(np.array([1, 3]), np.array([3, 1])) == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        empirical_tvd([], [1])
