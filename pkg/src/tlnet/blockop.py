"""Dense complex matrices partitioned over direct sums.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``;
``BlockOperator`` only adds the bookkeeping of which rows and columns belong
to which direct summand.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, IllPosedError

DEFAULT_COND_LIMIT = 1e12


def as_matrix(m, name="matrix") -> np.ndarray:
    """Coerce to a finite 2-d complex array (a copy, never a view)."""
    a = np.array(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


def _offsets(dims):
    return np.concatenate([[0], np.cumsum(dims)]).astype(int)


@dataclass(frozen=True)
class BlockOperator:
    """A matrix together with row and column direct-sum partitions."""

    matrix: np.ndarray
    row_dims: tuple[int, ...]
    col_dims: tuple[int, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        rows, cols = tuple(int(d) for d in self.row_dims), tuple(int(d) for d in self.col_dims)
        for dims in (rows, cols):
            if not dims or any(d < 1 for d in dims):
                raise DimensionError(f"block dims must be positive, got {dims}")
        if sum(rows) != m.shape[0] or sum(cols) != m.shape[1]:
            raise DimensionError(
                f"partition {rows} x {cols} does not fit a {m.shape[0]}x{m.shape[1]} matrix"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "row_dims", rows)
        object.__setattr__(self, "col_dims", cols)

    @property
    def nblocks(self) -> int:
        return len(self.row_dims)

    def row_slice(self, i: int) -> slice:
        off = _offsets(self.row_dims)
        return slice(off[i], off[i + 1])

    def col_slice(self, j: int) -> slice:
        off = _offsets(self.col_dims)
        return slice(off[j], off[j + 1])

    def block(self, i: int, j: int) -> np.ndarray:
        return self.matrix[self.row_slice(i), self.col_slice(j)]

    def blocks(self) -> list[list[np.ndarray]]:
        return [[self.block(i, j) for j in range(len(self.col_dims))] for i in range(len(self.row_dims))]

    def reassemble(self) -> np.ndarray:
        return np.block(self.blocks())

    @property
    def nontrivial(self) -> bool:
        """True when the operator is not block diagonal (2-block case: S12 != 0 and S21 != 0)."""
        if self.nblocks != 2 or len(self.col_dims) != 2:
            return any(
                np.any(self.block(i, j) != 0)
                for i in range(self.nblocks)
                for j in range(len(self.col_dims))
                if i != j
            )
        return bool(np.any(self.block(0, 1) != 0) and np.any(self.block(1, 0) != 0))


def partition(m, dims: Sequence[int], col_dims: Sequence[int] | None = None) -> BlockOperator:
    """Partition ``m``; square matrices with one ``dims`` list get the same split on both sides."""
    a = as_matrix(m)
    if col_dims is None:
        if a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got {a.shape}")
        col_dims = dims
    return BlockOperator(a, tuple(dims), tuple(col_dims))


def block_diag(*mats) -> np.ndarray:
    return scipy.linalg.block_diag(*[as_matrix(m) for m in mats])


def _require_square(a, what):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{what} requires a square matrix, got {a.shape}")


def unitarity_deviation(m) -> float:
    """Max-norm of m^dagger m - I."""
    a = as_matrix(m)
    _require_square(a, "unitarity check")
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


def is_unitary(m, tol: float = 1e-10) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return unitarity_deviation(m) <= tol


def spectral_norm(m) -> float:
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def is_contraction(m, tol: float = 1e-10) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return spectral_norm(m) <= 1.0 + tol


def solve_resolvent(a, cond_limit: float = DEFAULT_COND_LIMIT) -> tuple[np.ndarray, float]:
    """Invert ``a`` by pivoted LU; return ``(inverse, cond)`` with ``cond`` the 1-norm condition number.

    Raises IllPosedError (carrying the estimate) when ``cond > cond_limit`` or
    the factorization hits an exactly zero pivot.
    """
    a = as_matrix(a)
    _require_square(a, "solve_resolvent")
    n = a.shape[0]
    with warnings.catch_warnings():
        # singular input is detected below from the zero pivot
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.any(np.diag(lu) == 0):
        raise IllPosedError("resolvent is singular", float("inf"))
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)
    cond = float(np.linalg.norm(a, 1) * np.linalg.norm(inv, 1))
    if not np.isfinite(cond) or cond > cond_limit:
        raise IllPosedError(f"resolvent condition {cond:.3e} exceeds limit {cond_limit:.1e}", cond)
    return inv, cond


def rng(seed=None) -> np.random.Generator:
    """The seeded generator used by every random utility in the package."""
    return np.random.default_rng(seed)


def haar_unitary(n: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary: QR of a complex Ginibre matrix with R's diagonal phases fixed."""
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_contraction(n: int, gen: np.random.Generator, scale: float = 0.9) -> np.ndarray:
    return scale * haar_unitary(n, gen)


def matrix_to_json(m) -> list:
    """Matrix literal: rows of [re, im] pairs."""
    a = as_matrix(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows, name="matrix") -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"{name}: ragged or non-numeric matrix literal") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DimensionError(f"{name}: expected rows of [re, im] pairs, got array of shape {arr.shape}")
    return as_matrix(arr[..., 0] + 1j * arr[..., 1], name)


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]
