"""Passive linear devices on coherent states: Weyl triples (S, beta, theta).

A device sends the coherent state |alpha> to e^{i theta} |S alpha + beta>.
Devices compose under the extended Heisenberg group law and close feedback
loops through a Moebius reduction of their model matrix

    V(S, beta, theta) = [[-|beta|^2/2 - i theta, -beta^dagger S],
                         [beta,                  S            ]].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockop import (
    DEFAULT_COND_LIMIT,
    BlockOperator,
    as_matrix,
    block_diag,
    partition,
    unitarity_deviation,
)
from .errors import DimensionError
from .mobius import FeedbackSpec, moebius


def _vector(v, name="beta") -> np.ndarray:
    a = np.array(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LinearDevice:
    s: np.ndarray
    beta: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        s = as_matrix(self.s, "scattering matrix")
        beta = _vector(self.beta)
        if s.shape[0] != s.shape[1] or beta.shape[0] != s.shape[0]:
            raise DimensionError(f"scattering {s.shape} and displacement {beta.shape} do not match")
        err = unitarity_deviation(s)
        if err > 1e-10:
            raise ValueError(f"scattering matrix is not unitary (deviation {err:.2e})")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @classmethod
    def identity(cls, n: int) -> "LinearDevice":
        return cls(np.eye(n), np.zeros(n), 0.0)


def weyl_compose(b: LinearDevice, a: LinearDevice) -> LinearDevice:
    """b after a: (S^B S^A, beta^B + S^B beta^A, theta^A + theta^B + Im beta^B* S^B beta^A)."""
    if a.n != b.n:
        raise DimensionError(f"cannot compose devices on {b.n} and {a.n} modes")
    sba = b.s @ a.beta
    phase = a.theta + b.theta + float(np.imag(np.vdot(b.beta, sba)))
    return LinearDevice(b.s @ a.s, b.beta + sba, phase)


def sandwich(device_a: LinearDevice, device_b: LinearDevice, g1, g2) -> LinearDevice:
    """B after (diag(G1, G2), 0, 0) after A."""
    g = block_diag(g1, g2)
    if g.shape[0] != device_a.n:
        raise DimensionError(f"propagators span {g.shape[0]} modes, devices {device_a.n}")
    middle = LinearDevice(g, np.zeros(g.shape[0]), 0.0)
    return weyl_compose(device_b, weyl_compose(middle, device_a))


def apply_device(device: LinearDevice, alpha) -> tuple[np.ndarray, float]:
    alpha = _vector(alpha, "alpha")
    if alpha.shape[0] != device.n:
        raise DimensionError(f"{alpha.shape[0]} amplitudes for a {device.n}-mode device")
    return device.s @ alpha + device.beta, device.theta


def model_matrix(device: LinearDevice) -> BlockOperator:
    beta, s = device.beta, device.s
    corner = -0.5 * np.vdot(beta, beta) - 1j * device.theta
    top = -(beta.conj() @ s)
    v = np.block([[np.array([[corner]]), top[None, :]], [beta[:, None], s]])
    return partition(v, (1, device.n))


def from_model_matrix(v, tol: float = 1e-10) -> LinearDevice:
    """Read (S, beta, theta) back from a model matrix, checking its bordered structure.

    theta = -Im(corner); the corner's real part must be -|beta|^2/2 and the
    top row -beta^dagger S.
    """
    v = as_matrix(v, "model matrix")
    s, beta, corner = v[1:, 1:], v[1:, 0], complex(v[0, 0])
    if abs(corner.real + 0.5 * np.vdot(beta, beta).real) > tol:
        raise ValueError(f"corner real part {corner.real:.12g} != -|beta|^2/2")
    if np.max(np.abs(v[0, 1:] + beta.conj() @ s), initial=0.0) > tol:
        raise ValueError("top row is not -beta^dagger S")
    return LinearDevice(s, beta, -corner.imag)


def feedback_model_matrix(
    device: LinearDevice, m, loop_dim: int | None = None, cond_limit: float = DEFAULT_COND_LIMIT
) -> BlockOperator:
    """Moebius-reduced model matrix with the first ``loop_dim`` modes fed back through ``m``.

    Partitioned (1, n - loop_dim). For non-unitary ``m`` (lossy or severed loops) the
    result need not have the bordered Weyl form.
    """
    m = as_matrix(m, "M")
    loop_dim = m.shape[0] if loop_dim is None else loop_dim
    if m.shape != (loop_dim, loop_dim) or not 0 < loop_dim < device.n:
        raise DimensionError(f"feedback gain {m.shape} does not fit a {loop_dim}-mode loop of {device.n}")
    v = model_matrix(device)
    v3 = partition(v.matrix, (1, loop_dim, device.n - loop_dim))
    return partition(moebius(v3, FeedbackSpec(1, m), cond_limit), (1, device.n - loop_dim))


def gaussian_feedback(
    device: LinearDevice, m, loop_dim: int | None = None, cond_limit: float = DEFAULT_COND_LIMIT
) -> LinearDevice:
    """Close the first ``loop_dim`` modes (alpha_1 = M alpha_1') and return the reduced device.

    ``m`` must be unitary: only then is the reduced model matrix again of Weyl form.
    """
    m = as_matrix(m, "M")
    err = unitarity_deviation(m) if m.shape[0] == m.shape[1] else np.inf
    if err > 1e-10:
        raise ValueError(f"feedback gain must be unitary for a passive reduced device (deviation {err:.2e})")
    return from_model_matrix(feedback_model_matrix(device, m, loop_dim, cond_limit).matrix)
