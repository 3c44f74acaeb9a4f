"""Closed-timelike-curve comparators: Deutsch fixed points and Lloyd post-selection.

Tensor ordering is row-major with the external factor first: index
``i_ext * d_ctc + i_ctc``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockop import as_matrix, unitarity_deviation
from .errors import DimensionError, NoConvergenceError, ParadoxError

STATE_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        rho = as_matrix(self.matrix, "density matrix")
        if rho.shape[0] != rho.shape[1]:
            raise DimensionError(f"density matrix must be square, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > STATE_TOL:
            raise ValueError(f"density matrix has trace {np.trace(rho).real:.12g}")
        if np.min(np.linalg.eigvalsh(rho)) < -STATE_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", rho)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d) / d)


@dataclass(frozen=True)
class BipartiteUnitary:
    u: np.ndarray
    dim_ext: int
    dim_ctc: int

    def __post_init__(self):
        u = as_matrix(self.u, "bipartite unitary")
        n = self.dim_ext * self.dim_ctc
        if u.shape != (n, n):
            raise DimensionError(f"unitary must be {n}x{n} for dims ({self.dim_ext}, {self.dim_ctc}), got {u.shape}")
        err = unitarity_deviation(u)
        if err > STATE_TOL:
            raise ValueError(f"bipartite operator is not unitary (deviation {err:.2e})")
        object.__setattr__(self, "u", u)


@dataclass(frozen=True)
class DeutschResult:
    state: DensityMatrix
    iterations: int
    residual: float  # trace norm of sigma - Phi(sigma)


@dataclass(frozen=True)
class LloydResult:
    state: DensityMatrix
    probability: float


def partial_trace_first(rho: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out the first (major) factor of a (d1*d2)-dimensional operator."""
    return np.einsum("ijik->jk", rho.reshape(d1, d2, d1, d2))


def partial_trace_second(rho: np.ndarray, d1: int, d2: int) -> np.ndarray:
    return np.einsum("ijkj->ik", rho.reshape(d1, d2, d1, d2))


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def deutsch_map(u: BipartiteUnitary, rho_ext: DensityMatrix, sigma: np.ndarray) -> np.ndarray:
    """sigma -> tr_ext{ U (rho_ext x sigma) U^dagger }."""
    joint = u.u @ np.kron(rho_ext.matrix, sigma) @ u.u.conj().T
    return partial_trace_first(joint, u.dim_ext, u.dim_ctc)


def deutsch_superoperator(u: BipartiteUnitary, rho_ext: DensityMatrix) -> np.ndarray:
    """Matrix of the Deutsch map on row-major vec(sigma)."""
    d = u.dim_ctc
    cols = []
    for k in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[k] = 1.0
        cols.append(deutsch_map(u, rho_ext, e.reshape(d, d)).reshape(-1))
    return np.array(cols).T


def _check_dims(u: BipartiteUnitary, rho_ext: DensityMatrix):
    if rho_ext.dim != u.dim_ext:
        raise DimensionError(f"external state has dim {rho_ext.dim}, unitary expects {u.dim_ext}")


def deutsch_fixed_point(
    u: BipartiteUnitary,
    rho_ext: DensityMatrix,
    seed_state: DensityMatrix,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> DeutschResult:
    """Damped iteration sigma <- (1 - damping) sigma + damping Phi(sigma) until ||sigma - Phi(sigma)||_1 <= tol.

    The fixed point reached depends on ``seed_state`` when the map has several.
    """
    _check_dims(u, rho_ext)
    if seed_state.dim != u.dim_ctc:
        raise DimensionError(f"seed state has dim {seed_state.dim}, loop system has {u.dim_ctc}")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    d = u.dim_ctc
    phi = deutsch_superoperator(u, rho_ext)
    v = seed_state.matrix.reshape(-1).astype(complex)
    for it in range(max_iter + 1):
        pv = phi @ v
        residual = trace_norm((v - pv).reshape(d, d))
        if residual <= tol:
            sigma = v.reshape(d, d)
            sigma = 0.5 * (sigma + sigma.conj().T)
            return DeutschResult(DensityMatrix(sigma / np.trace(sigma).real), it, residual)
        if it == max_iter:
            break
        v = (1.0 - damping) * v + damping * pv
        h = v.reshape(d, d)
        v = (0.5 * (h + h.conj().T)).reshape(-1)
    raise NoConvergenceError(
        f"no fixed point within {max_iter} iterations (residual {residual:.3e}); "
        "the iteration may be cycling, retry with a smaller damping"
    )


def max_entangled(d: int) -> np.ndarray:
    """(1/sqrt d) sum_k |k>_+ |k>_-."""
    return np.eye(d).reshape(-1).astype(complex) / np.sqrt(d)


def lloyd_pctc(u: BipartiteUnitary, rho_ext: DensityMatrix, min_probability: float = 1e-12) -> LloydResult:
    """Prepare rho_ext x |Psi><Psi| on ext x (+ x -), apply U, post-select the pair on |Psi>.

    ``u.dim_ctc`` is the pair dimension d*d.
    """
    _check_dims(u, rho_ext)
    d = int(round(np.sqrt(u.dim_ctc)))
    if d * d != u.dim_ctc:
        raise DimensionError(f"pair space dimension {u.dim_ctc} is not a square")
    de = u.dim_ext
    psi = max_entangled(d)
    # K = (1 x <Psi|) U (1 x |Psi>) acts on the external system alone
    u4 = u.u.reshape(de, d * d, de, d * d)
    k = np.einsum("p,ipjq,q->ij", psi.conj(), u4, psi)
    out = k @ rho_ext.matrix @ k.conj().T
    prob = float(np.trace(out).real)
    if prob < min_probability:
        raise ParadoxError(f"post-selection probability {prob:.3e} is zero: the loop cannot close", prob)
    out = out / prob
    return LloydResult(DensityMatrix(0.5 * (out + out.conj().T)), prob)


def swap(d1: int, d2: int) -> np.ndarray:
    """Operator on C^d1 x C^d2 -> C^d2 x C^d1; square when d1 == d2."""
    s = np.zeros((d1 * d2, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            s[j * d1 + i, i * d2 + j] = 1.0
    return s
