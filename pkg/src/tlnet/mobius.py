"""Noncommutative Moebius (linear-fractional) reduction of block operators.

Shorting summand ``s`` of a block operator ``S`` under the constraint
``phi_s = X phi_s'`` leaves, on the retained summands ``r``,

    Mob(S, X) = S_rr + S_rs (1 - X S_ss)^{-1} X S_sr .

Blocks are selected by index mapping; the matrix is never permuted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockop import (
    DEFAULT_COND_LIMIT,
    BlockOperator,
    as_matrix,
    haar_unitary,
    rng,
    solve_resolvent,
    spectral_norm,
    unitarity_deviation,
)
from .errors import DimensionError, IllPosedError


@dataclass(frozen=True)
class FeedbackSpec:
    shorted_block: int
    gain: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gain", as_matrix(self.gain, "feedback gain"))


@dataclass(frozen=True)
class WellPosednessReport:
    invertible: bool
    condition_estimate: float
    resolvent_norm: float


@dataclass(frozen=True)
class SeriesResult:
    value: np.ndarray
    loop_gain_norm: float  # power-iteration estimate of ||S_ss X||
    warning: bool  # loop gain >= 1: the series need not converge to the closed form


@dataclass(frozen=True)
class SiegelReport:
    trials: int
    skipped: int
    max_deviation: float  # worst max|R^dagger R - I| over accepted trials
    max_singular_value: float
    unitary: bool
    contraction: bool


def _indices(s: BlockOperator, blocks) -> np.ndarray:
    rows = [np.arange(s.row_slice(b).start, s.row_slice(b).stop) for b in blocks]
    return np.concatenate(rows) if rows else np.zeros(0, dtype=int)


def split(s: BlockOperator, shorted: int):
    """Return (S_rr, S_rs, S_sr, S_ss) for shorted summand ``shorted``."""
    if s.row_dims != s.col_dims:
        raise DimensionError("Moebius reduction needs identical row and column partitions")
    if not 0 <= shorted < s.nblocks or s.nblocks < 2:
        raise DimensionError(f"cannot short block {shorted} of a {s.nblocks}-block operator")
    kept = _indices(s, [b for b in range(s.nblocks) if b != shorted])
    sh = _indices(s, [shorted])
    m = s.matrix
    return m[np.ix_(kept, kept)], m[np.ix_(kept, sh)], m[np.ix_(sh, kept)], m[np.ix_(sh, sh)]


def retained_dims(s: BlockOperator, shorted: int) -> tuple[int, ...]:
    return tuple(d for b, d in enumerate(s.row_dims) if b != shorted)


def _check_gain(s: BlockOperator, fb: FeedbackSpec):
    d = s.row_dims[fb.shorted_block] if 0 <= fb.shorted_block < s.nblocks else None
    if d is None or fb.gain.shape != (d, d):
        raise DimensionError(
            f"gain of shape {fb.gain.shape} does not match shorted block {fb.shorted_block}"
        )


def _resolvent(x, s_ss, cond_limit):
    a = np.eye(x.shape[0]) - x @ s_ss
    inv, cond = solve_resolvent(a, cond_limit)
    rnorm = spectral_norm(inv)
    # for scalar loops the condition number is always 1; gate the resolvent size too
    if rnorm > cond_limit:
        raise IllPosedError(f"resolvent norm {rnorm:.3e} exceeds limit {cond_limit:.1e}", max(cond, rnorm))
    return inv, cond, rnorm


def well_posedness(s: BlockOperator, fb: FeedbackSpec, cond_limit: float = DEFAULT_COND_LIMIT) -> WellPosednessReport:
    _check_gain(s, fb)
    _, _, _, s_ss = split(s, fb.shorted_block)
    try:
        _, cond, rnorm = _resolvent(fb.gain, s_ss, cond_limit)
    except IllPosedError as exc:
        return WellPosednessReport(False, exc.condition, float("inf"))
    return WellPosednessReport(True, cond, rnorm)


def moebius(s: BlockOperator, fb: FeedbackSpec, cond_limit: float = DEFAULT_COND_LIMIT) -> np.ndarray:
    """Short-circuit block ``fb.shorted_block`` of ``s`` through gain ``fb.gain``."""
    _check_gain(s, fb)
    s_rr, s_rs, s_sr, s_ss = split(s, fb.shorted_block)
    x = fb.gain
    inv, _, _ = _resolvent(x, s_ss, cond_limit)
    return s_rr + s_rs @ inv @ x @ s_sr


def moebius_series(s: BlockOperator, fb: FeedbackSpec, loops: int, power_steps: int = 50) -> SeriesResult:
    """Truncated multi-loop expansion S_rr + sum_{n<=loops} S_rs X (S_ss X)^n S_sr."""
    if loops < 0:
        raise ValueError("loops must be >= 0")
    _check_gain(s, fb)
    s_rr, s_rs, s_sr, s_ss = split(s, fb.shorted_block)
    x = fb.gain
    loop = s_ss @ x
    total = s_rr.copy()
    left = s_rs @ x
    for _ in range(loops + 1):
        total = total + left @ s_sr
        left = left @ loop
    q = _power_norm(loop, power_steps)
    return SeriesResult(total, q, q >= 1.0)


def _power_norm(a: np.ndarray, steps: int) -> float:
    """Spectral norm estimate by power iteration on a^dagger a."""
    v = rng(0).standard_normal(a.shape[1]) + 0j
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(steps):
        w = a.conj().T @ (a @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        est = np.sqrt(nw)
        v = w / nw
    return float(est)


def check_siegel(
    s: BlockOperator,
    shorted_block: int,
    trials: int,
    seed: int,
    tol: float = 1e-10,
    cond_limit: float = DEFAULT_COND_LIMIT,
) -> SiegelReport:
    """Reduce ``s`` against ``trials`` Haar-random unitary gains and collect unitarity statistics.

    Ill-posed draws are skipped and counted.
    """
    gen = rng(seed)
    d = s.row_dims[shorted_block]
    worst, worst_sv, skipped = 0.0, 0.0, 0
    for _ in range(trials):
        x = haar_unitary(d, gen)
        try:
            r = moebius(s, FeedbackSpec(shorted_block, x), cond_limit)
        except IllPosedError:
            skipped += 1
            continue
        worst = max(worst, unitarity_deviation(r))
        worst_sv = max(worst_sv, spectral_norm(r))
    return SiegelReport(trials, skipped, worst, worst_sv, worst <= tol, worst_sv <= 1.0 + tol)
