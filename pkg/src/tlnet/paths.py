"""Welcher-weg path bookkeeping for the two-beamsplitter loop.

Every coefficient is read off the open-loop composition
S = S^B diag(G1, G2) S^A. Feed-through paths I/II are the i = 1, 2 terms of
S_out,in; the time-travelling paths are the (i, j) terms of
S_out,back M S_back,in with III = (2, 1), IV = (1, 2), VII = (2, 2),
VIII = (1, 1); the loop coefficients C_I, C_II are the i = 1, 2 terms of
S_back,back M. Paths V and VI repeat the feed-throughs of I and II with the
loops of branches 2 and 1.

For operator-valued legs each (i, j) term factors as exit[i] @ entry[j] with
exit[i] = S^B_out,i G_i S^A_i,back M and entry[j] = S^B_back,j G_j S^A_j,in;
the loop resolvent is inserted between the two factors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blockop import DEFAULT_COND_LIMIT, solve_resolvent
from .errors import IllPosedError
from .timeloop import LoopNetwork

FEED_THROUGH = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")
LOOPS = ("I", "II", "V", "VI")
TIME_TRAVEL = {"III": (2, 1), "IV": (1, 2), "VII": (2, 2), "VIII": (1, 1)}
PROPAGATOR_WORD = {
    "I": "G1", "II": "G2", "III": "G2 M G1", "IV": "G1 M G2",
    "V": "G1", "VI": "G2", "VII": "G2 M G2", "VIII": "G1 M G1",
}
LOOP_WORD = {"I": "M G1", "II": "M G2", "V": "M G2", "VI": "M G1"}


@dataclass(frozen=True)
class PathTable:
    feed_through: dict[str, np.ndarray]
    loop: dict[str, np.ndarray]
    exit_legs: dict[int, np.ndarray]
    entry_legs: dict[int, np.ndarray]
    kappa: dict[str, complex] = field(default_factory=dict)  # scalar networks only
    beta: dict[str, complex] = field(default_factory=dict)

    @property
    def direct(self) -> np.ndarray:
        return self.feed_through["I"] + self.feed_through["II"]

    @property
    def looped(self) -> np.ndarray:
        return sum(self.feed_through[k] for k in TIME_TRAVEL)

    @property
    def loop_gain(self) -> np.ndarray:
        return self.loop["I"] + self.loop["II"]


def _blocks(dev: np.ndarray, d: int):
    """Split a 2d x 2d device into its four d x d blocks, keyed by (row, col) in {0, 1}."""
    return {(i, j): dev[i * d:(i + 1) * d, j * d:(j + 1) * d] for i in (0, 1) for j in (0, 1)}


def transfer_coefficients(net: LoopNetwork) -> PathTable:
    d = net.dim
    a = _blocks(net.device_a, d)  # rows: branch 1, 2; cols: back, in
    b = _blocks(net.device_b, d)  # rows: back, out; cols: branch 1, 2
    g = {1: net.g1, 2: net.g2}
    m = net.m
    a_back = {i: a[(i - 1, 0)] for i in (1, 2)}
    a_in = {i: a[(i - 1, 1)] for i in (1, 2)}
    b_back = {i: b[(0, i - 1)] for i in (1, 2)}
    b_out = {i: b[(1, i - 1)] for i in (1, 2)}

    direct = {i: b_out[i] @ g[i] @ a_in[i] for i in (1, 2)}
    exit_legs = {i: b_out[i] @ g[i] @ a_back[i] @ m for i in (1, 2)}
    entry_legs = {j: b_back[j] @ g[j] @ a_in[j] for j in (1, 2)}
    loops = {i: b_back[i] @ g[i] @ a_back[i] @ m for i in (1, 2)}

    ft = {"I": direct[1], "II": direct[2], "V": direct[1], "VI": direct[2]}
    for label, (i, j) in TIME_TRAVEL.items():
        ft[label] = exit_legs[i] @ entry_legs[j]
    lp = {"I": loops[1], "II": loops[2], "V": loops[2], "VI": loops[1]}

    kappa, beta = {}, {}
    if d == 1:
        el = lambda x: complex(x[0, 0])  # noqa: E731
        kappa = {"I": el(b_out[1] * a_in[1]), "II": el(b_out[2] * a_in[2])}
        kappa["V"], kappa["VI"] = kappa["I"], kappa["II"]
        for label, (i, j) in TIME_TRAVEL.items():
            kappa[label] = el(b_out[i] * a_back[i] * b_back[j] * a_in[j])
        beta = {"I": el(b_back[1] * a_back[1]), "II": el(b_back[2] * a_back[2])}
        beta["V"], beta["VI"] = beta["II"], beta["I"]
    return PathTable(ft, lp, exit_legs, entry_legs, kappa, beta)


def path_sum(table: PathTable, max_loops: int) -> np.ndarray:
    """Direct paths plus time-travelling paths with up to ``max_loops`` extra loop passes."""
    if max_loops < 0:
        raise ValueError("max_loops must be >= 0")
    left = table.exit_legs[1] + table.exit_legs[2]
    right = table.entry_legs[1] + table.entry_legs[2]
    c = table.loop_gain
    total = table.direct.copy()
    power = np.eye(c.shape[0], dtype=complex)
    for _ in range(max_loops + 1):
        total = total + left @ power @ right
        power = power @ c
    return total


def closed_form_from_paths(table: PathTable, cond_limit: float = DEFAULT_COND_LIMIT) -> np.ndarray:
    """G_I + G_II + (exit legs)(1 - C_I - C_II)^{-1}(entry legs)."""
    c = table.loop_gain
    inv, _ = solve_resolvent(np.eye(c.shape[0]) - c, cond_limit)
    if np.linalg.norm(inv, 2) > cond_limit:
        raise IllPosedError("loop resolvent too large", float("inf"))
    left = table.exit_legs[1] + table.exit_legs[2]
    right = table.entry_legs[1] + table.entry_legs[2]
    return table.direct + left @ inv @ right


def truncation_curve(table: PathTable, max_loops: int) -> list[tuple[int, float, float]]:
    """(N, |path_sum(N) - closed form|, geometric bound) for N = 0..max_loops.

    The bound is ||exit|| ||entry|| q^{N+1} / (1 - q) with q = ||C_I + C_II||,
    reported as inf when q >= 1.
    """
    exact = closed_form_from_paths(table)
    left = table.exit_legs[1] + table.exit_legs[2]
    right = table.entry_legs[1] + table.entry_legs[2]
    q = float(np.linalg.norm(table.loop_gain, 2))
    scale = float(np.linalg.norm(left, 2) * np.linalg.norm(right, 2))
    out = []
    for n in range(max_loops + 1):
        err = float(np.linalg.norm(path_sum(table, n) - exact, 2))
        bound = scale * q ** (n + 1) / (1.0 - q) if q < 1.0 else float("inf")
        out.append((n, err, bound))
    return out
