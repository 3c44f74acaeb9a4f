import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tlnet.blockop import haar_unitary, rng
from tlnet.errors import IllPosedError
from tlnet.paths import (
    PROPAGATOR_WORD,
    TIME_TRAVEL,
    closed_form_from_paths,
    path_sum,
    transfer_coefficients,
    truncation_curve,
)
from tlnet.timeloop import LoopNetwork, gs_network, open_loop, reduce_loop

seeds = st.integers(0, 2**32 - 1)


def random_scalar(seed):
    g = rng(seed)
    phases = np.exp(1j * g.uniform(-np.pi, np.pi, 3))
    return LoopNetwork(haar_unitary(2, g), haar_unitary(2, g), [[phases[0]]], [[phases[1]]], [[phases[2]]])


@given(seeds)
def test_sum_rules(seed):
    net = random_scalar(seed)
    t = transfer_coefficients(net)
    s = open_loop(net)
    assert np.allclose(t.direct, s.block(1, 1), atol=1e-14)
    assert np.allclose(t.looped, s.block(1, 0) @ net.m @ s.block(0, 1), atol=1e-14)
    assert np.allclose(t.loop_gain, s.block(0, 0) @ net.m, atol=1e-14)


@given(seeds)
def test_closed_form_equals_reduction(seed):
    net = random_scalar(seed)
    try:
        ref = reduce_loop(net)
    except IllPosedError:
        return
    assert np.allclose(closed_form_from_paths(transfer_coefficients(net)), ref, atol=1e-10)


def test_coefficients_times_words_give_transfer():
    # kappa * propagator word reproduces every scalar path amplitude
    g1, g2, m = np.exp(0.3j), np.exp(1.7j), np.exp(-0.6j)
    t = transfer_coefficients(gs_network(0.35, g1, g2, m))
    words = {"G1": g1, "G2": g2, "G2 M G1": g2 * m * g1, "G1 M G2": g1 * m * g2, "G2 M G2": g2 * m * g2, "G1 M G1": g1 * m * g1}
    for label in ("I", "II", *TIME_TRAVEL):
        assert t.kappa[label] * words[PROPAGATOR_WORD[label]] == pytest.approx(t.feed_through[label][0, 0], abs=1e-15)
    assert t.beta["I"] * m * g1 == pytest.approx(t.loop["I"][0, 0], abs=1e-15)


def test_gs_kappa_beta():
    R, T = 0.3, 0.7
    t = transfer_coefficients(gs_network(R, 1, 1j, 1))
    expect = {"I": T, "II": R, "III": -R * T, "IV": -R * T, "VII": R * T, "VIII": R * T}
    for k, v in expect.items():
        assert t.kappa[k] == pytest.approx(v, abs=1e-15)
    for k, v in {"I": R, "II": T, "V": T, "VI": R}.items():
        assert t.beta[k] == pytest.approx(v, abs=1e-15)


def test_operator_table_has_no_scalars():
    g = rng(1)
    net = LoopNetwork(haar_unitary(4, g), haar_unitary(4, g), np.eye(2), np.eye(2), haar_unitary(2, g))
    t = transfer_coefficients(net)
    assert t.kappa == {} and t.direct.shape == (2, 2)


def test_operator_closed_form():
    g = rng(11)
    net = LoopNetwork(haar_unitary(6, g), haar_unitary(6, g), haar_unitary(3, g), haar_unitary(3, g), haar_unitary(3, g))
    assert np.allclose(closed_form_from_paths(transfer_coefficients(net)), reduce_loop(net), atol=1e-10)


def test_path_sum_zero_loops():
    t = transfer_coefficients(gs_network(0.4, 1, -1, 1))
    assert np.allclose(path_sum(t, 0), t.direct + t.looped)
    with pytest.raises(ValueError):
        path_sum(t, -1)


@given(seeds)
def test_truncation_within_bound(seed):
    net = random_scalar(seed)
    t = transfer_coefficients(net)
    if abs(t.loop_gain[0, 0]) > 0.98:
        return
    for n, err, bound in truncation_curve(t, 30):
        assert err <= bound + 1e-14


def test_unit_gain_bound_infinite():
    t = transfer_coefficients(gs_network(0.4, np.exp(0.5j), np.exp(0.5j), 1))
    assert all(b == float("inf") for _, _, b in truncation_curve(t, 3))
