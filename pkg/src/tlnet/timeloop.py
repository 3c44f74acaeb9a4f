"""Two-device time loops: open-loop composition, loop closure, scalar closed forms.

Port conventions: device A maps (back, in) to branches (1, 2); device B maps
branches (1, 2) to (back, out). Each leg carries C^d.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockop import (
    DEFAULT_COND_LIMIT,
    BlockOperator,
    as_matrix,
    block_diag,
    is_contraction,
    partition,
    unitarity_deviation,
)
from .errors import DimensionError, IllPosedError
from .mobius import FeedbackSpec, moebius

BACK, EXT = 0, 1


@dataclass(frozen=True)
class BeamsplitterParams:
    R: float

    def __post_init__(self):
        if not 0.0 <= self.R <= 1.0:
            raise ValueError(f"reflectivity must lie in [0, 1], got {self.R}")

    @property
    def T(self) -> float:
        return 1.0 - self.R


@dataclass(frozen=True)
class LoopNetwork:
    """Devices A and B, forward branch propagators g1, g2 and backward propagator m.

    With ``unitary_propagation=False`` the propagators only need to be
    contractions (absorbers, lossy legs).
    """

    device_a: np.ndarray
    device_b: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    m: np.ndarray
    unitary_propagation: bool = True
    tol: float = 1e-10

    def __post_init__(self):
        for name in ("device_a", "device_b", "g1", "g2", "m"):
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        d = self.g1.shape[0]
        for name in ("g1", "g2", "m"):
            if getattr(self, name).shape != (d, d):
                raise DimensionError(f"{name} must be {d}x{d}, got {getattr(self, name).shape}")
        for name in ("device_a", "device_b"):
            dev = getattr(self, name)
            if dev.shape != (2 * d, 2 * d):
                raise DimensionError(f"{name} must be {2 * d}x{2 * d}, got {dev.shape}")
            dev_err = unitarity_deviation(dev)
            if dev_err > self.tol:
                raise ValueError(f"{name} is not unitary (deviation {dev_err:.2e})")
        for name in ("g1", "g2", "m"):
            op = getattr(self, name)
            if self.unitary_propagation:
                err = unitarity_deviation(op)
                if err > self.tol:
                    raise ValueError(f"propagator {name} is not unitary (deviation {err:.2e})")
            elif not is_contraction(op, self.tol):
                raise ValueError(f"propagator {name} is not a contraction")

    @property
    def dim(self) -> int:
        return self.g1.shape[0]

    def replace(self, **changes) -> "LoopNetwork":
        fields = dict(
            device_a=self.device_a, device_b=self.device_b, g1=self.g1, g2=self.g2, m=self.m,
            unitary_propagation=self.unitary_propagation, tol=self.tol,
        )
        fields.update(changes)
        return LoopNetwork(**fields)


def gs_beamsplitter(p: BeamsplitterParams | float, d: int = 1) -> np.ndarray:
    """[[sqrt R, sqrt T], [sqrt T, -sqrt R]] (tensored with I_d). Hermitian and self-inverse."""
    p = p if isinstance(p, BeamsplitterParams) else BeamsplitterParams(float(p))
    r, t = np.sqrt(p.R), np.sqrt(p.T)
    return np.kron(np.array([[r, t], [t, -r]], dtype=complex), np.eye(d))


def reversed_beamsplitter(p: BeamsplitterParams | float, d: int = 1) -> np.ndarray:
    """Later beamsplitter with reversed polarity: [[sqrt T, -sqrt R], [sqrt R, sqrt T]]."""
    p = p if isinstance(p, BeamsplitterParams) else BeamsplitterParams(float(p))
    r, t = np.sqrt(p.R), np.sqrt(p.T)
    return np.kron(np.array([[t, -r], [r, t]], dtype=complex), np.eye(d))


def gs_network(R: float, g1, g2, m, reversed_b: bool = False, d: int = 1) -> LoopNetwork:
    eye = np.eye(d)
    b = reversed_beamsplitter(R, d) if reversed_b else gs_beamsplitter(R, d)
    return LoopNetwork(gs_beamsplitter(R, d), b, g1 * eye, g2 * eye, m * eye)


def open_loop(net: LoopNetwork) -> BlockOperator:
    """S = S^B diag(G1, G2) S^A, partitioned [back | external]."""
    s = net.device_b @ block_diag(net.g1, net.g2) @ net.device_a
    return partition(s, (net.dim, net.dim))


def reduce_loop(net: LoopNetwork, cond_limit: float = DEFAULT_COND_LIMIT) -> np.ndarray:
    """Closed-loop external transfer S_fb: short the backward leg through M."""
    return moebius(open_loop(net), FeedbackSpec(BACK, net.m), cond_limit)


def _pole_check(den: complex, cond_limit: float):
    if den == 0 or 1.0 / abs(den) > cond_limit:
        raise IllPosedError(f"closed form at a pole (denominator {abs(den):.3e})", float("inf"))


def gs_closed_form(R: float, g1: complex, g2: complex, m: complex, cond_limit: float = DEFAULT_COND_LIMIT) -> complex:
    T = 1.0 - R
    den = 1.0 - (R * g1 + T * g2) * m
    _pole_check(den, cond_limit)
    return T * g1 + R * g2 + R * T * (g1 - g2) ** 2 * m / den


def reversed_polarity_closed_form(
    R: float, g1: complex, g2: complex, m: complex, cond_limit: float = DEFAULT_COND_LIMIT
) -> complex:
    """Scalar S_fb when device B is the reversed-polarity beamsplitter.

    sqrt(RT)(G1 - G2) + (R G1 + T G2)(R G2 + T G1) M / (1 - sqrt(RT)(G1 - G2) M).
    """
    T = 1.0 - R
    c = np.sqrt(R * T) * (g1 - g2)
    den = 1.0 - c * m
    _pole_check(den, cond_limit)
    return c + (R * g1 + T * g2) * (R * g2 + T * g1) * m / den
