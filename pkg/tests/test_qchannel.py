"""Classical simulation of BB84 transmission and measurement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcw.errors import ParameterError, UsageError
from qcw.qchannel import (Basis, BoundedStorageReceiver, ChannelConfig, measure, random_bits, receiver_bounded_storage,
                          receiver_honest, reprepare, sampling_estimate_check, send_bb84)
from qcw.testing import inspect_batch


def test_matching_basis_returns_the_sent_bit():
    rng = np.random.default_rng(0)
    x, theta = random_bits(200, rng), random_bits(200, rng)
    qs = send_bb84(x, theta, ChannelConfig())
    assert np.array_equal(qs.measure_all(theta, rng), x)


def test_wrong_basis_gives_uniform_bits():
    rng = np.random.default_rng(1)
    n = 20000
    x = np.zeros(n, np.uint8)
    qs = send_bb84(x, np.zeros(n, np.uint8), ChannelConfig())
    out = qs.measure_all(np.ones(n, np.uint8), rng)
    assert abs(out.mean() - 0.5) < 4 * 0.5 / np.sqrt(n)


def test_noise_rate():
    rng = np.random.default_rng(2)
    n = 20000
    x = random_bits(n, rng)
    qs = send_bb84(x, np.zeros(n, np.uint8), ChannelConfig(0.1), rng)
    err = (qs.measure_all(np.zeros(n, np.uint8), rng) != x).mean()
    assert abs(err - 0.1) < 4 * np.sqrt(0.09 / n)


def test_qubits_can_be_measured_once():
    rng = np.random.default_rng(3)
    qs = send_bb84([0, 1, 0], [0, 0, 1], ChannelConfig())
    assert measure(qs[1], Basis.PLUS, rng) == 1
    assert qs[1].consumed
    with pytest.raises(UsageError):
        measure(qs[1], Basis.PLUS, rng)
    with pytest.raises(UsageError):
        qs.measure_at([0, 0], [0, 0], rng)
    with pytest.raises(UsageError):
        receiver_honest(qs, rng)


def test_configuration_checks():
    with pytest.raises(ParameterError):
        ChannelConfig(0.5)
    with pytest.raises(ParameterError):
        send_bb84([0, 1], [0], ChannelConfig())
    with pytest.raises(ParameterError):
        BoundedStorageReceiver(1.5, np.random.default_rng(0))


def test_handles_do_not_expose_the_states():
    qs = send_bb84([1, 0], [1, 1], ChannelConfig())
    assert not any(isinstance(getattr(qs, name, None), np.ndarray) and name not in ("consumed", "_consumed")
                   for name in dir(qs) if not name.startswith("__"))
    bits, bases = inspect_batch(qs)
    assert bits.tolist() == [1, 0] and bases.tolist() == [1, 1]


def test_bounded_storage_knows_stored_and_matching_positions():
    rng = np.random.default_rng(4)
    n = 400
    x, theta = random_bits(n, rng), random_bits(n, rng)
    view = receiver_bounded_storage(send_bb84(x, theta, ChannelConfig()), 0.25, theta, rng)
    assert view.stored.sum() == 100
    assert np.array_equal(view.x_hat[view.known], x[view.known])
    assert view.known[view.stored].all()


def test_storage_capacity_enforced():
    r = BoundedStorageReceiver(0.1, np.random.default_rng(0), store_positions=[0, 1, 2])
    with pytest.raises(ParameterError):
        r.receive(send_bb84(np.zeros(10, np.uint8), np.zeros(10, np.uint8), ChannelConfig()))
    with pytest.raises(UsageError):
        BoundedStorageReceiver(0.1, np.random.default_rng(0)).announce([0])


def test_reprepare_replaces_measured_positions():
    rng = np.random.default_rng(5)
    qs = send_bb84([1, 1, 1, 1], [1, 1, 1, 1], ChannelConfig())
    seen = qs.measure_at([0, 1], [0, 0], rng)
    fresh = reprepare(qs, [0, 1], seen, [0, 0])
    bits, bases = inspect_batch(fresh)
    assert bases.tolist() == [0, 0, 1, 1]
    assert bits[2:].tolist() == [1, 1]
    with pytest.raises(UsageError):
        reprepare(fresh, [0], [0], [0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_sampling_check_without_errors_is_zero(seed):
    rng = np.random.default_rng(seed)
    n = 64
    x, theta, theta_hat = random_bits(n, rng), random_bits(n, rng), random_bits(n, rng)
    test = rng.choice(n, size=32, replace=False)
    chk = sampling_estimate_check(x, x, theta, theta_hat, test)
    assert chk.test_err == 0.0 and chk.remainder_err == 0.0
