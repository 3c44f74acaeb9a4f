"""Regenerate the checked-in network files under networks/.

    python scripts/make_networks.py [outdir]
"""
import json
import sys
from pathlib import Path

import numpy as np

from tlnet.blockop import haar_unitary, matrix_to_json, rng
from tlnet.ctc import swap

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "networks"


def c(z):
    z = complex(z)
    return [z.real, z.imag]


def ph(t):
    return c(np.exp(1j * t))


def bs(R, reversed_=False):
    return {"beamsplitter": {"R": R, "reversed": reversed_}}


def dm(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return matrix_to_json(np.outer(psi, psi.conj()))


def loop_file(scenario, description, a, b, g1, g2, m=None, d=1, params=None):
    props = {"g1": g1, "g2": g2}
    if m is not None:
        props["m"] = m
    doc = {
        "schema_version": "1",
        "scenario": scenario,
        "description": description,
        "leg_dim": d,
        "devices": {"A": a, "B": b},
        "wiring": {"a": "A", "b": "B"},
        "propagators": props,
    }
    if params:
        doc["scenario_params"] = params
    return doc


def networks():
    gen = rng(20240611)
    files = {}
    files["gs_plain"] = loop_file(
        "plain", "balanced beamsplitters, opposite branch signs: the loop transmits perfectly",
        bs(0.5), bs(0.5), [1.0, 0.0], [-1.0, 0.0], [1.0, 0.0],
    )
    files["gs_phases"] = loop_file(
        "plain", "unequal beamsplitters R = 0.3 with generic branch and loop phases",
        bs(0.3), bs(0.3), ph(0.4), ph(1.9), ph(-0.7), params={"max_loops": 60},
    )
    files["reversed"] = loop_file(
        "plain", "second beamsplitter with reversed polarity",
        bs(0.35), bs(0.35, True), ph(0.8), ph(-1.3), ph(2.1),
    )
    files["unit_gain"] = loop_file(
        "plain", "equal branch phases: loop gain has unit modulus, path sum does not converge",
        bs(0.4), bs(0.4), ph(0.5), ph(0.5), [1.0, 0.0],
    )
    d = 2
    files["operator_d2"] = loop_file(
        "plain", "Haar-random devices on two-dimensional legs",
        {"matrix": matrix_to_json(haar_unitary(2 * d, gen)), "unitary": True},
        {"matrix": matrix_to_json(haar_unitary(2 * d, gen)), "unitary": True},
        matrix_to_json(haar_unitary(d, gen)), matrix_to_json(haar_unitary(d, gen)),
        matrix_to_json(haar_unitary(d, gen)), d=d, params={"max_loops": 80},
    )
    files["absorber"] = loop_file(
        "absorber", "demolition detector on branch 1, R = T = 1/2, G2 = M = 1",
        bs(0.5), bs(0.5), [1.0, 0.0], [1.0, 0.0], [1.0, 0.0],
    )
    files["absorber_phases"] = loop_file(
        "absorber", "demolition detector on branch 1 with generic phases",
        bs(0.7), bs(0.2), ph(0.3), ph(2.2), ph(-0.9),
    )
    files["guardian"] = {
        "schema_version": "1",
        "scenario": "guardian",
        "description": "tune the second transmissivity so the in-loop detector never fires",
        "scenario_params": {"tau_a": 0.5, "g": [1.0, 0.0]},
    }
    for name, p, desc in (
        ("projective_identity", [[[1.0, 0.0]]], "projection onto everything: the plain loop"),
        ("projective_zero", [[[0.0, 0.0]]], "projection onto nothing: the full absorber"),
    ):
        files[name] = loop_file(
            "projective", desc, bs(0.3), bs(0.6), ph(0.2), ph(1.4), ph(-0.5), params={"p": p},
        )
    v = haar_unitary(2, gen)[:, 0]
    files["projective_rank1"] = loop_file(
        "projective", "rank-one projective measurement on a two-dimensional branch",
        {"matrix": matrix_to_json(haar_unitary(4, gen)), "unitary": True},
        {"matrix": matrix_to_json(haar_unitary(4, gen)), "unitary": True},
        matrix_to_json(haar_unitary(2, gen)), matrix_to_json(haar_unitary(2, gen)),
        matrix_to_json(haar_unitary(2, gen)), d=2, params={"p": matrix_to_json(np.outer(v, v.conj()))},
    )
    files["balanced"] = loop_file(
        "balanced", "self-inverse beamsplitters and equal branches: open loop is block diagonal",
        bs(0.3), bs(0.3), ph(0.6), ph(0.6),
    )
    eye2 = {"matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]], "unitary": True, "tensor_extend": True}
    files["balanced_identity"] = loop_file(
        "balanced", "trivial devices: branches decouple for any propagators",
        eye2, eye2, ph(0.9), ph(-0.4), ph(-0.9),
    )
    files["balanced_mismatch"] = loop_file(
        "balanced", "beamsplitters with unequal branches: not block diagonal (input error)",
        bs(0.3), bs(0.3), ph(0.6), ph(-0.6),
    )

    rho = dm([np.cos(0.4), np.exp(0.7j) * np.sin(0.4)])
    files["deutsch_swap"] = {
        "schema_version": "1",
        "scenario": "deutsch",
        "description": "SWAP: the loop state must equal the incoming external state",
        "scenario_params": {
            "u": matrix_to_json(swap(2, 2)), "dim_ext": 2, "dim_ctc": 2,
            "rho_ext": rho, "seed_state": dm([0.0, 1.0]), "damping": 0.5, "tol": 1e-12,
            "max_iter": 100000, "expected": rho,
        },
    }
    cnot = np.eye(4)[[0, 1, 3, 2]]  # external qubit controls a flip of the loop qubit
    files["deutsch_cnot"] = {
        "schema_version": "1",
        "scenario": "deutsch",
        "description": "classical grandfather: external |1> flips the loop bit; the consistent state is mixed",
        "scenario_params": {
            "u": matrix_to_json(cnot), "dim_ext": 2, "dim_ctc": 2,
            "rho_ext": dm([0.0, 1.0]), "seed_state": dm([1.0, 0.0]), "damping": 0.5, "tol": 1e-12,
            "max_iter": 100000, "expected": matrix_to_json(np.eye(2) / 2),
        },
    }
    rho3 = dm([0.6, 0.8j])
    files["lloyd_identity"] = {
        "schema_version": "1",
        "scenario": "lloyd",
        "description": "identity interaction: certain post-selection, state unchanged",
        "scenario_params": {
            "u": matrix_to_json(np.eye(8)), "dim_ext": 2, "pair_dim": 2,
            "rho_ext": rho3, "expected": rho3,
        },
    }
    files["lloyd_swap"] = {
        "schema_version": "1",
        "scenario": "lloyd",
        "description": "external qubit swapped with the loop half of the pair: teleported back unchanged",
        "scenario_params": {
            "u": matrix_to_json(np.kron(swap(2, 2), np.eye(2))), "dim_ext": 2, "pair_dim": 2,
            "rho_ext": rho3, "expected": rho3,
        },
    }
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    files["lloyd_orthogonal"] = {
        "schema_version": "1",
        "scenario": "lloyd",
        "description": "the loop qubit is always flipped: post-selection is impossible",
        "scenario_params": {
            "u": matrix_to_json(np.kron(np.eye(2), np.kron(x, np.eye(2)))), "dim_ext": 2, "pair_dim": 2,
            "rho_ext": rho3,
        },
    }
    sa, sb = haar_unitary(2, gen), haar_unitary(2, gen)
    files["gaussian"] = {
        "schema_version": "1",
        "scenario": "gaussian",
        "description": "two displaced two-mode devices around a one-mode loop",
        "devices": {
            "A": {"S": matrix_to_json(sa), "beta": [c(0.3 - 0.2j), c(-0.5 + 0.1j)], "theta": 0.25},
            "B": {"S": matrix_to_json(sb), "beta": [c(0.1 + 0.4j), c(0.2)], "theta": -0.6},
        },
        "propagators": {"g1": ph(0.7), "g2": ph(-1.1), "m": ph(0.35)},
    }
    return files


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in networks().items():
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(OUT / f"{name}.json")


if __name__ == "__main__":
    main()
