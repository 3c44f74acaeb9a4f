import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import deutsch_fixed_point_nullspace, lloyd_state_vector, trace_distance
from tlnet.blockop import haar_unitary, rng
from tlnet.ctc import (
    BipartiteUnitary,
    DensityMatrix,
    deutsch_fixed_point,
    deutsch_map,
    lloyd_pctc,
    max_entangled,
    partial_trace_first,
    partial_trace_second,
    swap,
    trace_norm,
)
from tlnet.errors import DimensionError, NoConvergenceError, ParadoxError

seeds = st.integers(0, 2**32 - 1)


def random_state(d, g):
    z = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
    r = z @ z.conj().T
    return DensityMatrix(r / np.trace(r).real)


def test_density_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    assert DensityMatrix.pure([1, 1j]).matrix[0, 1] == pytest.approx(-0.5j)


def test_bipartite_validation():
    with pytest.raises(DimensionError):
        BipartiteUnitary(np.eye(4), 2, 3)
    with pytest.raises(ValueError):
        BipartiteUnitary(2 * np.eye(4), 2, 2)


def test_partial_traces():
    g = rng(0)
    a, b = random_state(2, g).matrix, random_state(3, g).matrix
    ab = np.kron(a, b)
    assert np.allclose(partial_trace_first(ab, 2, 3), b)
    assert np.allclose(partial_trace_second(ab, 2, 3), a)


def test_swap_operator():
    g = rng(1)
    u, v = g.standard_normal(2), g.standard_normal(3)
    assert np.allclose(swap(2, 3) @ np.kron(u, v), np.kron(v, u))


@given(seeds)
def test_swap_fixed_point_is_input(seed):
    g = rng(seed)
    rho = random_state(2, g)
    res = deutsch_fixed_point(BipartiteUnitary(swap(2, 2), 2, 2), rho, random_state(2, g))
    assert trace_distance(res.state.matrix, rho.matrix) <= 1e-9


@given(seeds)
def test_fixed_point_matches_nullspace_oracle(seed):
    g = rng(seed)
    u = haar_unitary(4, g)
    rho = random_state(2, g)
    ref, sv = deutsch_fixed_point_nullspace(u, rho.matrix, 2, 2)
    if sv[-2] < 1e-6:  # fixed point not unique
        return
    res = deutsch_fixed_point(BipartiteUnitary(u, 2, 2), rho, DensityMatrix.maximally_mixed(2))
    assert res.residual <= 1e-10
    assert trace_distance(res.state.matrix, ref) <= 1e-8


def test_cycling_map_needs_damping():
    # classical NOT on the loop bit: undamped iteration flips forever
    x = np.array([[0, 1], [1, 0]])
    u = BipartiteUnitary(np.kron(np.eye(2), x), 2, 2)
    rho = DensityMatrix(np.diag([1.0, 0.0]))
    seed = DensityMatrix(np.diag([1.0, 0.0]))
    with pytest.raises(NoConvergenceError, match="damping"):
        deutsch_fixed_point(u, rho, seed, damping=1.0, max_iter=50)
    res = deutsch_fixed_point(u, rho, seed, damping=0.5)
    assert np.allclose(res.state.matrix, np.eye(2) / 2, atol=1e-10)


def test_deutsch_map_is_trace_preserving():
    g = rng(3)
    u = BipartiteUnitary(haar_unitary(6, g), 2, 3)
    out = deutsch_map(u, random_state(2, g), random_state(3, g).matrix)
    assert np.trace(out).real == pytest.approx(1.0)


def test_lloyd_identity():
    g = rng(4)
    rho = random_state(2, g)
    res = lloyd_pctc(BipartiteUnitary(np.eye(8), 2, 4), rho)
    assert res.probability == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.state.matrix, rho.matrix, atol=1e-12)


@given(seeds)
def test_lloyd_matches_state_vector(seed):
    g = rng(seed)
    u = haar_unitary(8, g)
    psi = haar_unitary(2, g)[:, 0]
    out, p = lloyd_state_vector(u, psi, 2, 2)
    res = lloyd_pctc(BipartiteUnitary(u, 2, 4), DensityMatrix.pure(psi))
    assert res.probability == pytest.approx(p, abs=1e-12)
    assert np.allclose(res.state.matrix, np.outer(out, out.conj()) / p, atol=1e-9)
    assert -1e-10 <= res.probability <= 1 + 1e-10


def test_lloyd_paradox():
    x = np.array([[0, 1], [1, 0]])
    u = BipartiteUnitary(np.kron(np.eye(2), np.kron(x, np.eye(2))), 2, 4)
    with pytest.raises(ParadoxError) as exc:
        lloyd_pctc(u, DensityMatrix.maximally_mixed(2))
    assert exc.value.probability == pytest.approx(0.0, abs=1e-15)


def test_max_entangled_normalised():
    assert np.linalg.norm(max_entangled(3)) == pytest.approx(1.0)


def test_trace_norm():
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)
