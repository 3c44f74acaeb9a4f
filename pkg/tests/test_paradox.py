import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tlnet.blockop import haar_unitary, rng, spectral_norm
from tlnet.errors import BlockDiagonalError, NoRootError, ProjectionError
from tlnet.paradox import (
    absorber_reduce,
    balanced_loop,
    bisect,
    detection_amplitude,
    guardian_angel_solve,
    guardian_angel_solve_a,
    guardian_f,
    guardian_tune_network,
    projective_loop_reduce,
)
from tlnet.timeloop import LoopNetwork, gs_beamsplitter, gs_network, reduce_loop

seeds = st.integers(0, 2**32 - 1)
unit = st.floats(0.01, 0.99)


def random_net(seed, d=1):
    g = rng(seed)
    return LoopNetwork(
        haar_unitary(2 * d, g), haar_unitary(2 * d, g), haar_unitary(d, g), haar_unitary(d, g), haar_unitary(d, g)
    )


@given(seeds)
def test_absorber_conservation(seed):
    res = absorber_reduce(random_net(seed))
    total = abs(res.s1_tilde[0, 0]) ** 2 + abs(res.s_fb_tilde[0, 0]) ** 2
    assert total == pytest.approx(1.0, abs=1e-10)


@given(seeds)
def test_absorber_is_g1_zero(seed):
    net = random_net(seed)
    res = absorber_reduce(net)
    cut = net.replace(g1=np.zeros((1, 1)), unitary_propagation=False)
    assert np.allclose(res.s_fb_tilde, reduce_loop(cut), atol=1e-12)


def test_absorber_operator_conservation():
    net = random_net(3, d=3)
    res = absorber_reduce(net)
    gram = res.s1_tilde.conj().T @ res.s1_tilde + res.s_fb_tilde.conj().T @ res.s_fb_tilde
    assert np.allclose(gram, np.eye(3), atol=1e-10)


def test_both_branches_dead():
    net = LoopNetwork(gs_beamsplitter(0.5), gs_beamsplitter(0.5), [[1.0]], [[0.0]], [[1.0]], unitary_propagation=False)
    assert np.allclose(absorber_reduce(net).s_fb_tilde, 0.0)


def test_half_split_example():
    res = absorber_reduce(gs_network(0.5, 1.0, 1.0, 1.0))
    assert abs(res.s1_tilde[0, 0]) ** 2 + abs(res.s_fb_tilde[0, 0]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_guardian_boundary():
    assert guardian_f(0.3, 0.0) == pytest.approx(0.3)


@given(unit)
def test_guardian_root_closed_form(x):
    # f(x, y) = 0  <=>  y = x / (x^2 + sqrt(1 - x^2))
    y = guardian_angel_solve(x)
    assert abs(guardian_f(x, y)) <= 1e-12
    assert y == pytest.approx(x / (x * x + np.sqrt(1 - x * x)), abs=1e-10)


def test_guardian_half():
    assert guardian_angel_solve(0.5) == pytest.approx(0.44802, abs=5e-6)


@given(unit)
def test_guardian_symmetric_solver(y):
    # f(0, y) = -y < 0 and f(1, y) = 1 > 0 bracket a root
    x = guardian_angel_solve_a(y)
    assert abs(guardian_f(x, y)) <= 1e-12


@given(unit, unit)
def test_network_detection_amplitude(x, y):
    # branch-1 amplitude of the tuned network, derived from the beamsplitter elements by hand
    assert detection_amplitude(x, y) == pytest.approx(x - (1 - x * x) * y / (1 - x * y), abs=1e-12)


@given(unit, st.floats(-np.pi, np.pi))
def test_network_tuning_zeroes_detection(x, phi):
    y = guardian_tune_network(x)
    assert y == pytest.approx(x, abs=1e-10)
    assert abs(detection_amplitude(x, y, np.exp(1j * phi))) <= 1e-10


def test_bisect_no_sign_change():
    with pytest.raises(NoRootError):
        bisect(lambda t: t * t + 1.0, 0.0, 1.0)


@given(seeds)
def test_projective_identity_is_plain(seed):
    net = random_net(seed)
    res = projective_loop_reduce(net, np.eye(1))
    assert np.allclose(res.out_in, reduce_loop(net), atol=1e-12)


@given(seeds)
def test_projective_zero_is_absorber(seed):
    net = random_net(seed)
    res = projective_loop_reduce(net, np.zeros((1, 1)))
    assert np.allclose(res.out_in, absorber_reduce(net).s_fb_tilde, atol=1e-12)
    # the aux port carries exactly what the absorber detects
    assert np.allclose(np.abs(res.aux_in), np.abs(absorber_reduce(net).s1_tilde), atol=1e-12)


@given(seeds, st.sampled_from([2, 3]))
def test_projective_contraction(seed, d):
    g = rng(seed)
    net = random_net(seed, d)
    k = int(g.integers(0, d))
    v = haar_unitary(d, g)[:, :k]
    p = v @ v.conj().T
    res = projective_loop_reduce(net, p)
    assert spectral_norm(res.s3.matrix) <= 1 + 1e-10
    assert spectral_norm(res.s_fb_blocks.matrix) <= 1 + 1e-10
    assert np.all(np.linalg.norm(res.s_fb_blocks.matrix, axis=0) <= 1 + 1e-10)


def test_projection_validated():
    with pytest.raises(ProjectionError):
        projective_loop_reduce(random_net(0), 0.5 * np.eye(1))


def test_balanced_self_inverse():
    g = np.exp(0.7j)
    res = balanced_loop(gs_network(0.3, g, g, 1.0))
    assert np.allclose(res.m, [[1 / g]], atol=1e-14)
    assert np.allclose(res.s_out_in, [[g]], atol=1e-14)
    assert res.residual < 1e-12


def test_balanced_identity_devices():
    g1, g2 = np.exp(0.2j), np.exp(-1.1j)
    net = LoopNetwork(np.eye(2), np.eye(2), [[g1]], [[g2]], [[1.0]])
    res = balanced_loop(net)
    assert np.allclose(res.m, [[1 / g1]]) and np.allclose(res.s_out_in, [[g2]])


def test_balanced_mismatch():
    with pytest.raises(BlockDiagonalError) as exc:
        balanced_loop(gs_network(0.3, 1.0, -1.0, 1.0))
    assert exc.value.off_diagonal_norm == pytest.approx(2 * np.sqrt(0.21))
