"""Grandfather-paradox constructions on the two-device loop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockop import (
    DEFAULT_COND_LIMIT,
    BlockOperator,
    as_matrix,
    block_diag,
    partition,
    solve_resolvent,
)
from .errors import BlockDiagonalError, DimensionError, NoRootError, ProjectionError
from .mobius import FeedbackSpec, moebius
from .timeloop import BACK, EXT, LoopNetwork, gs_beamsplitter, open_loop


@dataclass(frozen=True)
class AbsorberResult:
    s_fb_tilde: np.ndarray  # in -> out transfer given no detection
    s1_tilde: np.ndarray  # in -> branch-1 amplitude at t_A (what the detector sees)
    s_tilde: BlockOperator


@dataclass(frozen=True)
class ProjectiveLoop:
    p: np.ndarray
    s3: BlockOperator  # (aux, back, out) x (aux, back, in)
    s_fb_blocks: BlockOperator  # (aux, out) x (aux, in)

    @property
    def aux_in(self) -> np.ndarray:
        return self.s_fb_blocks.block(0, 1)

    @property
    def out_in(self) -> np.ndarray:
        return self.s_fb_blocks.block(1, 1)


@dataclass(frozen=True)
class BalancedLoop:
    m: np.ndarray  # backward propagator required for consistency
    s_out_in: np.ndarray  # decoupled external transfer
    s_back_back: np.ndarray
    residual: float  # max deviation of the decoupled relations


def absorber_reduce(net: LoopNetwork, cond_limit: float = DEFAULT_COND_LIMIT) -> AbsorberResult:
    """Demolition detector on branch 1: open loop S^B diag(0, G2) S^A, then close through M.

    The detected amplitude is psi_1(t_A) = S^A_1,in psi_in + S^A_1,back psi_back(t_A)
    with psi_back(t_A) = (1 - M S~_bb)^{-1} M S~_b,in psi_in.
    """
    d = net.dim
    zero = np.zeros((d, d))
    s_tilde = partition(net.device_b @ block_diag(zero, net.g2) @ net.device_a, (d, d))
    fb = FeedbackSpec(BACK, net.m)
    s_fb = moebius(s_tilde, fb, cond_limit)
    s_bb, s_b_in = s_tilde.block(BACK, BACK), s_tilde.block(BACK, EXT)
    inv, _ = solve_resolvent(np.eye(d) - net.m @ s_bb, cond_limit)
    back_at_a = inv @ net.m @ s_b_in
    a = net.device_a
    s1 = a[:d, d:] + a[:d, :d] @ back_at_a
    return AbsorberResult(s_fb, s1, s_tilde)


def guardian_f(x: float, y: float) -> float:
    """Detection function x - sqrt(1 - x^2) y / (1 - x y)."""
    return x - np.sqrt(1.0 - x * x) * y / (1.0 - x * y)


def bisect(fun, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    flo, fhi = fun(lo), fun(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoRootError(f"no sign change on [{lo}, {hi}]: f = {flo:.3e}, {fhi:.3e}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0 or hi - lo < 1e-16:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if abs(fun(mid)) > tol:
        raise NoRootError(f"bisection did not reach |f| <= {tol}")
    return mid


_BRACKET = (1e-9, 1.0 - 1e-9)


def guardian_angel_solve(tau_a: float, tol: float = 1e-12) -> float:
    """Root tau_b in (0, 1) of guardian_f(tau_a, .)."""
    if not 0.0 < tau_a < 1.0:
        raise ValueError("tau_a must lie in (0, 1)")
    y = bisect(lambda y: guardian_f(tau_a, y), *_BRACKET, tol=tol)
    if abs(guardian_f(tau_a, y)) > tol:
        raise NoRootError(f"|f| = {abs(guardian_f(tau_a, y)):.3e} at the bracketed root")
    return y


def guardian_angel_solve_a(tau_b: float, tol: float = 1e-12) -> float:
    """Root tau_a in (0, 1) of guardian_f(., tau_b)."""
    if not 0.0 < tau_b < 1.0:
        raise ValueError("tau_b must lie in (0, 1)")
    x = bisect(lambda x: guardian_f(x, tau_b), *_BRACKET, tol=tol)
    if abs(guardian_f(x, tau_b)) > tol:
        raise NoRootError(f"|f| = {abs(guardian_f(x, tau_b)):.3e} at the bracketed root")
    return x


def guardian_network(tau_a: float, tau_b: float, g: complex = 1.0) -> LoopNetwork:
    """Beamsplitters with transmissivities tau_a^2, tau_b^2; G1 = G2 = g and M = G1^{-1}."""
    g = complex(g)
    return LoopNetwork(
        gs_beamsplitter(1.0 - tau_a**2),
        gs_beamsplitter(1.0 - tau_b**2),
        [[g]], [[g]], [[1.0 / g]],
    )


def detection_amplitude(tau_a: float, tau_b: float, g: complex = 1.0) -> complex:
    """Branch-1 amplitude at t_A per unit input, computed from the guardian network itself."""
    return complex(absorber_reduce(guardian_network(tau_a, tau_b, g)).s1_tilde[0, 0])


def guardian_tune_network(tau_a: float, tol: float = 1e-12) -> float:
    """tau_b in (0, 1) that zeroes the detected amplitude of ``guardian_network``."""
    if not 0.0 < tau_a < 1.0:
        raise ValueError("tau_a must lie in (0, 1)")
    return bisect(lambda y: detection_amplitude(tau_a, y).real, *_BRACKET, tol=tol)


def check_projection(p, tol: float = 1e-10) -> float:
    """Raise ProjectionError unless p^2 = p = p^dagger; return the larger defect."""
    p = as_matrix(p, "projection")
    if p.shape[0] != p.shape[1]:
        raise DimensionError(f"projection must be square, got {p.shape}")
    idem = float(np.max(np.abs(p @ p - p))) if p.size else 0.0
    herm = float(np.max(np.abs(p - p.conj().T))) if p.size else 0.0
    if idem > tol or herm > tol:
        raise ProjectionError(f"not an orthogonal projection: |p^2 - p| = {idem:.2e}, |p - p^+| = {herm:.2e}")
    return max(idem, herm)


def projective_open_loop(net: LoopNetwork, p) -> BlockOperator:
    """Open loop on aux + back + in with a projective measurement on branch 1 at t_A.

    The P-component of psi_1 continues along G1 into port 1 of device B; the
    complementary component leaves on the aux output, and the aux input takes
    its place in port 1. P = I is the plain loop, P = 0 the full absorber.
    """
    d = net.dim
    p = as_matrix(p, "projection")
    if p.shape != (d, d):
        raise DimensionError(f"projection must be {d}x{d}, got {p.shape}")
    check_projection(p)
    eye, zero = np.eye(d), np.zeros((d, d))
    q = eye - p
    # blocks ordered (aux, branch 1, branch 2)
    router = np.block([[p, q, zero], [q, p, zero], [zero, zero, eye]])
    forward = block_diag(eye, net.g1, net.g2)
    s3 = block_diag(eye, net.device_b) @ forward @ router @ block_diag(eye, net.device_a)
    return partition(s3, (d, d, d))


def projective_loop_reduce(net: LoopNetwork, p, cond_limit: float = DEFAULT_COND_LIMIT) -> ProjectiveLoop:
    d = net.dim
    s3 = projective_open_loop(net, p)
    s_fb = moebius(s3, FeedbackSpec(1, net.m), cond_limit)
    return ProjectiveLoop(as_matrix(p), s3, partition(s_fb, (d, d)))


def balanced_loop(net: LoopNetwork, tol: float = 1e-10) -> BalancedLoop:
    """Consistent backward propagator for a block-diagonal (balanced) open loop.

    Off-diagonal blocks must vanish; then psi_back(t_B) = S_bb psi_back(t_A) and
    consistency forces M = S_bb^{-1} (G1^{-1} for the balanced interferometer).
    The loop resolvent 1 - S_bb M is then singular, so no Moebius reduction is
    attempted: the external transfer is S_out,in.
    """
    s = open_loop(net)
    off = max(float(np.max(np.abs(s.block(0, 1)))), float(np.max(np.abs(s.block(1, 0)))))
    if off > tol:
        raise BlockDiagonalError(f"open loop is not block diagonal (off-diagonal max {off:.3e})", off)
    s_bb, s_oi = s.block(BACK, BACK), s.block(EXT, EXT)
    m = np.linalg.inv(s_bb)
    d = net.dim
    gen = np.random.default_rng(0)
    psi_in = gen.standard_normal(d) + 1j * gen.standard_normal(d)
    back_a = gen.standard_normal(d) + 1j * gen.standard_normal(d)
    out = s.matrix @ np.concatenate([back_a, psi_in])
    back_b, psi_out = out[:d], out[d:]
    residual = max(
        float(np.max(np.abs(psi_out - s_oi @ psi_in))),
        float(np.max(np.abs(m @ back_b - back_a))),
    )
    return BalancedLoop(m, s_oi, s_bb, residual)

