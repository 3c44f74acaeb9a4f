"""tlnet command line: reduce, paths, scenario and check on network files.

Exit codes: 0 success, 1 input or validation error, 2 ill-posed loop or
impossible post-selection, 3 internal error. Reports go to stdout, diagnostics
to stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import ctc, gaussian, paradox, paths
from .blockop import (
    haar_unitary,
    rng,
    spectral_norm,
    unitarity_deviation,
)
from .errors import (
    BlockDiagonalError,
    DimensionError,
    IllPosedError,
    NetworkSyntaxError,
    NetworkValueError,
    NoConvergenceError,
    NoRootError,
    ParadoxError,
    ProjectionError,
    SchemaError,
)
from .mobius import FeedbackSpec, check_siegel, moebius, moebius_series, well_posedness
from .netdesc import LOOP_SCENARIOS, NetworkDescription, ProjectiveInputs, build, load, validate
from .timeloop import (
    BACK,
    gs_closed_form,
    open_loop,
    reduce_loop,
    reversed_polarity_closed_form,
)

EXIT_OK, EXIT_INPUT, EXIT_ILL_POSED, EXIT_INTERNAL = 0, 1, 2, 3
CLOSED_FORM_TOL = 1e-12
# absolute floor on truncation checks: the closed form itself carries rounding error
ROUNDING_FLOOR = 1e-14


class InputError(Exception):
    pass


@dataclass
class Report:
    command: str
    scenario: str
    file: str
    outputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0

    def check(self, name: str, value: float, tolerance: float) -> bool:
        value = float(value)
        passed = math.isfinite(value) and value <= tolerance
        self.checks.append({"name": name, "passed": passed, "value": value, "tolerance": float(tolerance)})
        return passed

    def put(self, name: str, value, kind: str | None = None):
        self.outputs[name] = encode_output(value, kind)

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "tool": "tlnet",
            "command": self.command,
            "scenario": self.scenario,
            "file": self.file,
            "outputs": self.outputs,
            "checks": self.checks,
            "all_passed": self.all_passed,
            "warnings": self.warnings,
            "wall_time": self.wall_time,
        }


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_output(value, kind=None) -> dict:
    if kind is None:
        if isinstance(value, (bool, np.bool_)):
            kind = "boolean"
        elif isinstance(value, (int, np.integer)):
            kind = "integer"
        elif isinstance(value, (float, np.floating)):
            kind = "real"
        elif isinstance(value, (complex, np.complexfloating)):
            kind = "complex"
        elif isinstance(value, np.ndarray) and value.ndim == 2:
            kind = "matrix"
        elif isinstance(value, np.ndarray) and value.ndim == 1:
            kind = "vector"
        else:
            raise TypeError(f"cannot infer output kind for {type(value).__name__}")
    if kind == "matrix":
        value = [[_c(z) for z in row] for row in np.asarray(value)]
    elif kind == "vector":
        value = [_c(z) for z in np.asarray(value)]
    elif kind == "complex":
        value = _c(value)
    elif kind == "real":
        value = float(value)
    elif kind == "integer":
        value = int(value)
    elif kind == "boolean":
        value = bool(value)
    return {"kind": kind, "value": value}


def dumps17(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits; non-finite floats become null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(dumps17(x, indent, _level + 1) for x in obj) + "]"
        items = [inner + dumps17(x, indent, _level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _fmt(v) -> str:
    kind, value = v["kind"], v["value"]
    if kind == "complex":
        return f"{value[0]:.12g}{value[1]:+.12g}j"
    if kind in ("matrix", "vector"):
        rows = value if kind == "matrix" else [value]
        return "; ".join(" ".join(f"{re:.6g}{im:+.6g}j" for re, im in row) for row in rows)
    if kind in ("table", "series"):
        return json.dumps(value)[:200]
    return str(value)


def print_text(report: Report, out=None):
    out = out or sys.stdout
    print(f"tlnet {report.command}: scenario {report.scenario} ({report.file})", file=out)
    for name, v in report.outputs.items():
        print(f"  {name} = {_fmt(v)}", file=out)
    for c in report.checks:
        flag = "PASS" if c["passed"] else "FAIL"
        print(f"  [{flag}] {c['name']}: {c['value']:.3e} <= {c['tolerance']:.1e}", file=out)
    for w in report.warnings:
        print(f"  warning: {w}", file=out)
    print(f"  all checks passed: {report.all_passed}; wall time {report.wall_time:.3f}s", file=out)


# ---- commands ------------------------------------------------------------


def _network(desc: NetworkDescription):
    if desc.scenario not in LOOP_SCENARIOS:
        raise InputError(f"scenario {desc.scenario!r} does not describe a two-device loop")
    if desc.scenario == "balanced" and "m" not in desc.propagators:
        raise InputError("balanced file has no m; use 'scenario' to derive it")
    obj = build(desc)
    return obj.network if isinstance(obj, ProjectiveInputs) else obj


def _closed_form_check(report: Report, desc: NetworkDescription, net, s_fb):
    """Compare with the scalar closed forms when both devices are beamsplitter shorthands."""
    if net.dim != 1:
        return
    a_name, b_name = desc.device_names
    a, b = desc.devices[a_name], desc.devices[b_name]
    if "beamsplitter" not in a or "beamsplitter" not in b:
        return
    ra, rb = a["beamsplitter"], b["beamsplitter"]
    if ra.get("reversed", False) or ra["R"] != rb["R"]:
        return
    g1, g2, m = net.g1[0, 0], net.g2[0, 0], net.m[0, 0]
    form = reversed_polarity_closed_form if rb.get("reversed", False) else gs_closed_form
    expected = form(ra["R"], g1, g2, m)
    report.put("closed_form", expected, "complex")
    report.check("closed_form_agreement", abs(s_fb[0, 0] - expected), CLOSED_FORM_TOL)


def _reduce(report: Report, desc: NetworkDescription, tol: float):
    net = _network(desc)
    s = open_loop(net)
    wp = well_posedness(s, FeedbackSpec(BACK, net.m))
    report.put("open_loop", s.matrix)
    report.outputs["well_posedness"] = encode_output(
        {"invertible": wp.invertible, "condition_estimate": wp.condition_estimate, "resolvent_norm": wp.resolvent_norm},
        "table",
    )
    s_fb = reduce_loop(net)
    report.put("s_fb", s_fb)
    report.check("open_loop_unitary", unitarity_deviation(s.matrix), tol)
    report.check("s_fb_unitary", unitarity_deviation(s_fb), tol)
    _closed_form_check(report, desc, net, s_fb)


def cmd_reduce(desc, args, report):
    _reduce(report, desc, args.tol)


def cmd_paths(desc, args, report):
    net = _network(desc)
    n_max = args.max_loops if args.max_loops is not None else desc.scenario_params.get("max_loops", 40)
    table = paths.transfer_coefficients(net)
    s = open_loop(net)
    tab = {
        "feed_through": {k: _mat_json(v) for k, v in table.feed_through.items()},
        "loop": {k: _mat_json(v) for k, v in table.loop.items()},
        "kappa": {k: _c(v) for k, v in table.kappa.items()},
        "beta": {k: _c(v) for k, v in table.beta.items()},
        "propagator_words": paths.PROPAGATOR_WORD,
    }
    report.put("table", tab, "table")
    q = spectral_norm(table.loop_gain)
    report.put("loop_gain_norm", q)
    report.put("warning_loop_gain_ge_1", q >= 1.0)
    if q >= 1.0:
        report.warnings.append(f"loop gain norm {q:.6g} >= 1: the path sum need not converge")
    d = net.dim
    report.check("sum_rule_direct", np.max(np.abs(table.direct - s.block(1, 1))), CLOSED_FORM_TOL)
    report.check(
        "sum_rule_time_travel",
        np.max(np.abs(table.looped - s.block(1, 0) @ net.m @ s.block(0, 1))),
        CLOSED_FORM_TOL,
    )
    report.check("sum_rule_loop", np.max(np.abs(table.loop_gain - s.block(0, 0) @ net.m)), CLOSED_FORM_TOL)
    truncated = paths.path_sum(table, n_max)
    report.put("path_sum", truncated)
    try:
        closed = paths.closed_form_from_paths(table)
    except IllPosedError:
        report.warnings.append("loop resolvent is singular; no closed form")
        return
    report.put("closed_form_from_paths", closed)
    s_fb = reduce_loop(net)
    report.put("s_fb", s_fb)
    report.check("paths_vs_moebius", np.max(np.abs(closed - s_fb)), CLOSED_FORM_TOL)
    if q < 1.0:
        curve = paths.truncation_curve(table, n_max)
        report.put("truncation_curve", [[n, e, b] for n, e, b in curve], "series")
        worst = max(e - (b + ROUNDING_FLOOR) for _, e, b in curve)
        report.check("truncation_within_geometric_bound", max(worst, 0.0), 0.0)
    if d == 1:
        _gs_kappa_check(report, desc, table)


def _mat_json(m):
    return [[_c(z) for z in row] for row in np.asarray(m)]


def _gs_kappa_check(report, desc, table):
    a_name, b_name = desc.device_names
    a, b = desc.devices[a_name], desc.devices[b_name]
    if not ("beamsplitter" in a and "beamsplitter" in b):
        return
    if a["beamsplitter"].get("reversed") or b["beamsplitter"].get("reversed") or a["beamsplitter"]["R"] != b["beamsplitter"]["R"]:
        return
    R = a["beamsplitter"]["R"]
    T = 1.0 - R
    expected_k = {"I": T, "II": R, "III": -T * R, "IV": -T * R, "VII": T * R, "VIII": R * T}
    expected_b = {"I": R, "II": T, "V": T, "VI": R}
    dev = max(
        [abs(table.kappa[k] - v) for k, v in expected_k.items()]
        + [abs(table.beta[k] - v) for k, v in expected_b.items()]
    )
    report.check("gs_kappa_beta_table", dev, CLOSED_FORM_TOL)


def cmd_scenario(desc, args, report):
    handler = {
        "plain": lambda: _reduce(report, desc, args.tol),
        "absorber": lambda: _absorber(report, desc, args.tol),
        "guardian": lambda: _guardian(report, desc),
        "projective": lambda: _projective(report, desc, args.tol),
        "balanced": lambda: _balanced(report, desc, args.tol),
        "deutsch": lambda: _deutsch(report, desc, args.tol),
        "lloyd": lambda: _lloyd(report, desc, args.tol),
        "gaussian": lambda: _gaussian(report, desc, args.tol, _seed(args)),
    }[desc.scenario]
    handler()


def _absorber(report, desc, tol):
    net = build(desc)
    res = paradox.absorber_reduce(net)
    report.put("s_fb_tilde", res.s_fb_tilde)
    report.put("s1_tilde", res.s1_tilde)
    d = net.dim
    gram = res.s1_tilde.conj().T @ res.s1_tilde + res.s_fb_tilde.conj().T @ res.s_fb_tilde
    report.check("conservation", np.max(np.abs(gram - np.eye(d))), tol)
    cut = net.replace(g1=np.zeros((d, d)), unitary_propagation=False)
    report.check("absorber_equals_g1_zero", np.max(np.abs(res.s_fb_tilde - reduce_loop(cut))), CLOSED_FORM_TOL)


def _guardian(report, desc):
    inp = build(desc)
    tau_b = paradox.guardian_angel_solve(inp.tau_a)
    report.put("tau_a", inp.tau_a)
    report.put("tau_b", tau_b)
    report.check("root_residual", abs(paradox.guardian_f(inp.tau_a, tau_b)), 1e-12)
    detected = paradox.detection_amplitude(inp.tau_a, tau_b, inp.g)
    report.put("detected_amplitude", detected, "complex")
    report.check("detected_amplitude_at_root", abs(detected), 1e-10)
    tau_b_net = paradox.guardian_tune_network(inp.tau_a)
    detected_net = paradox.detection_amplitude(inp.tau_a, tau_b_net, inp.g)
    report.put("tau_b_network", tau_b_net)
    report.put("detected_amplitude_network", detected_net, "complex")
    report.check("detected_amplitude_network_tuned", abs(detected_net), 1e-10)


def _projective(report, desc, tol):
    inp = build(desc)
    res = paradox.projective_loop_reduce(inp.network, inp.p)
    report.put("s_fb_blocks", res.s_fb_blocks.matrix)
    report.put("aux_in", res.aux_in)
    report.put("out_in", res.out_in)
    report.check("open_loop_contraction", max(spectral_norm(res.s3.matrix) - 1.0, 0.0), tol)
    report.check("s_fb_contraction", max(spectral_norm(res.s_fb_blocks.matrix) - 1.0, 0.0), tol)
    d = inp.network.dim
    if np.allclose(inp.p, np.eye(d), atol=1e-12, rtol=0):
        report.check("identity_projection_is_plain", np.max(np.abs(res.out_in - reduce_loop(inp.network))), CLOSED_FORM_TOL)
    if np.allclose(inp.p, 0, atol=1e-12, rtol=0):
        ab = paradox.absorber_reduce(inp.network)
        report.check("zero_projection_is_absorber", np.max(np.abs(res.out_in - ab.s_fb_tilde)), CLOSED_FORM_TOL)


def _balanced(report, desc, tol):
    net = build(desc)
    res = paradox.balanced_loop(net)
    report.put("m", res.m)
    report.put("s_out_in", res.s_out_in)
    report.check("decoupled_relations", res.residual, tol)
    report.check("m_unitary", unitarity_deviation(res.m), tol)
    if "m" in desc.propagators:
        report.check("file_m_matches", np.max(np.abs(net.m - res.m)), tol)


def _state_defect(rho: np.ndarray) -> float:
    herm = np.max(np.abs(rho - rho.conj().T))
    tr = abs(np.trace(rho) - 1.0)
    neg = max(-float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))), 0.0)
    return float(max(herm, tr, neg))


def _deutsch(report, desc, tol):
    inp = build(desc)
    res = ctc.deutsch_fixed_point(inp.u, inp.rho_ext, inp.seed_state, inp.damping, inp.tol, inp.max_iter)
    sigma = res.state.matrix
    report.put("rho_ctc", sigma)
    report.put("iterations", res.iterations)
    report.put("residual", res.residual)
    recomputed = ctc.trace_norm(sigma - ctc.deutsch_map(inp.u, inp.rho_ext, sigma))
    report.check("self_consistency_residual", recomputed, max(inp.tol, 1e-10))
    report.check("valid_density_matrix", _state_defect(sigma), tol)
    if inp.expected is not None:
        report.check("trace_distance_to_expected", 0.5 * ctc.trace_norm(sigma - inp.expected.matrix), 1e-9)


def _lloyd(report, desc, tol):
    inp = build(desc)
    res = ctc.lloyd_pctc(inp.u, inp.rho_ext)
    report.put("rho_out", res.state.matrix)
    report.put("probability", res.probability)
    report.check("probability_in_unit_interval", max(-res.probability, res.probability - 1.0, 0.0), 1e-10)
    report.check("valid_density_matrix", _state_defect(res.state.matrix), tol)
    if inp.expected is not None:
        report.check("trace_distance_to_expected", 0.5 * ctc.trace_norm(res.state.matrix - inp.expected.matrix), 1e-10)


def _gaussian(report, desc, tol, seed):
    inp = build(desc)
    dev = gaussian.sandwich(inp.device_a, inp.device_b, inp.g1, inp.g2)
    n1 = inp.g1.shape[0]
    fb = gaussian.gaussian_feedback(dev, inp.m, n1)
    report.put("s_open", dev.s)
    report.put("beta_open", dev.beta)
    report.put("theta_open", dev.theta)
    report.put("s_fb", fb.s)
    report.put("beta_fb", fb.beta)
    report.put("theta_fb", fb.theta)
    gen = rng(seed)
    worst = 0.0
    s = dev.s
    s11, s12, s21, s22 = s[:n1, :n1], s[:n1, n1:], s[n1:, :n1], s[n1:, n1:]
    b1, b2 = dev.beta[:n1], dev.beta[n1:]
    for _ in range(8):
        a2 = gen.standard_normal(dev.n - n1) + 1j * gen.standard_normal(dev.n - n1)
        a1 = np.linalg.solve(np.eye(n1) - inp.m @ s11, inp.m @ (s12 @ a2 + b1))
        direct = s21 @ a1 + s22 @ a2 + b2
        reduced, _ = gaussian.apply_device(fb, a2)
        worst = max(worst, float(np.max(np.abs(direct - reduced))))
    report.check("amplitude_oracle", worst, CLOSED_FORM_TOL)
    report.check("s_fb_unitary", unitarity_deviation(fb.s), tol)


def cmd_check(desc, args, report):
    seed = _seed(args)
    report.put("seed", seed)
    if desc.scenario not in LOOP_SCENARIOS:
        cmd_scenario(desc, args, report)
        return
    if desc.scenario == "balanced" and "m" not in desc.propagators:
        net = build(desc)  # Siegel check does not involve the file's m
    else:
        net = _network(desc)
    s = open_loop(net)
    rep = check_siegel(s, BACK, args.trials, seed, tol=args.tol)
    report.put("trials", rep.trials)
    report.put("skipped", rep.skipped)
    report.put("max_deviation", rep.max_deviation)
    report.check("siegel_unitary", rep.max_deviation, args.tol)
    report.check("skipped_fraction", rep.skipped / max(rep.trials, 1), 0.01)
    gen = rng(seed)
    worst = 0.0
    for _ in range(min(args.trials, 50)):
        x = 0.5 * haar_unitary(net.dim, gen)
        fb = FeedbackSpec(BACK, x)
        exact = moebius(s, fb)
        ser = moebius_series(s, fb, 60)
        q = spectral_norm(s.block(0, 0) @ x)
        bound = spectral_norm(s.block(1, 0)) * spectral_norm(x) * spectral_norm(s.block(0, 1)) * q**61 / (1 - q)
        worst = max(worst, spectral_norm(ser.value - exact) - bound - ROUNDING_FLOOR)
    report.check("series_within_tail_bound", max(worst, 0.0), 0.0)
    cmd_scenario(desc, args, report)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TLNET_SEED")
    return int(env) if env else 0


COMMANDS = {"reduce": cmd_reduce, "paths": cmd_paths, "scenario": cmd_scenario, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlnet", description="Reduce quantum time-loop networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("file")
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        p.add_argument("--tol", type=float, default=1e-10, help="tolerance for unitarity/contraction checks")
        p.add_argument("--max-loops", type=int, default=None)
        p.add_argument("--seed", type=int, default=None, help="random seed (fallback: TLNET_SEED, then 0)")
        p.add_argument("--trials", type=int, default=200)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        desc = load(args.file)
        diags = [d for d in validate(desc) if d.severity == "error"]
        if diags:
            for d in diags:
                print(f"error: {d.location}: {d.message}", file=sys.stderr)
            return EXIT_INPUT
        report = Report(args.command, desc.scenario, args.file)
        COMMANDS[args.command](desc, args, report)
    except (IllPosedError, ParadoxError, NoConvergenceError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    except (
        OSError, NetworkSyntaxError, SchemaError, NetworkValueError, DimensionError,
        BlockDiagonalError, ProjectionError, NoRootError, InputError, ValueError,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - contract: anything else is internal
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report.wall_time = time.perf_counter() - start
    if args.json:
        print(dumps17(report.to_json()))
    else:
        print_text(report)
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
