"""Network description files: parsing, validation and construction of scenario inputs.

A file is UTF-8 JSON checked against ``schemas/network.schema.json``.
Complex numbers are ``[re, im]``; matrices are arrays of rows of complex
numbers. Devices come in three forms:

* ``{"beamsplitter": {"R": r, "reversed": false}}`` - the standard
  two-port beamsplitter (or its reversed-polarity variant), tensored with the
  leg identity;
* ``{"matrix": ..., "unitary": true, "tensor_extend": false}`` - an explicit
  2d x 2d device, or a 2x2 one extended by the leg identity;
* ``{"S": ..., "beta": [...], "theta": t}`` - a Weyl triple (gaussian only).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .blockop import matrix_from_json, unitarity_deviation
from .ctc import BipartiteUnitary, DensityMatrix
from .errors import DimensionError, NetworkSyntaxError, NetworkValueError, SchemaError
from .gaussian import LinearDevice
from .timeloop import LoopNetwork, gs_beamsplitter, reversed_beamsplitter

SCHEMA_VERSION = "1"
LOOP_SCENARIOS = ("plain", "absorber", "projective", "balanced")
UNITARY_TOL = 1e-10


@lru_cache(maxsize=None)
def load_schema(name: str = "network.schema.json") -> dict:
    text = resources.files("tlnet").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    location: str  # JSON pointer into the document
    message: str


@dataclass
class NetworkDescription:
    schema_version: str
    scenario: str
    leg_dim: int | None = None
    devices: dict[str, Any] = field(default_factory=dict)
    wiring: dict[str, str] | None = None
    propagators: dict[str, Any] = field(default_factory=dict)
    scenario_params: dict[str, Any] = field(default_factory=dict)
    description: str | None = None

    def to_document(self) -> dict:
        doc = {"schema_version": self.schema_version, "scenario": self.scenario}
        for key in ("description", "leg_dim", "wiring"):
            if getattr(self, key) is not None:
                doc[key] = getattr(self, key)
        for key in ("devices", "propagators", "scenario_params"):
            if getattr(self, key):
                doc[key] = getattr(self, key)
        return doc

    @property
    def device_names(self) -> tuple[str, str]:
        w = self.wiring or {"a": "A", "b": "B"}
        return w["a"], w["b"]


def _reject_constant(name):
    raise NetworkValueError(f"non-finite number {name} is not allowed")


def _check_finite(node, path=""):
    if isinstance(node, float) and not math.isfinite(node):
        raise NetworkValueError(f"{path or '/'}: non-finite number")
    if isinstance(node, dict):
        for k, v in node.items():
            _check_finite(v, f"{path}/{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _check_finite(v, f"{path}/{i}")


def _pointer(parts) -> str:
    return "".join(f"/{p}" for p in parts)


def parse_network(text: bytes | str) -> NetworkDescription:
    """Parse and structurally validate a network file.

    Raises NetworkSyntaxError (bad JSON or encoding, with offset), SchemaError
    (every schema violation with its JSON pointer), NetworkValueError
    (non-finite numbers, declared-unitary matrices that are not unitary).
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetworkSyntaxError(f"not UTF-8: {exc.reason}", exc.start) from exc
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise NetworkSyntaxError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", exc.pos) from exc
    _check_finite(doc)
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise SchemaError([(_pointer(e.absolute_path), _describe(e)) for e in errors])
    desc = NetworkDescription(
        schema_version=doc["schema_version"],
        scenario=doc["scenario"],
        leg_dim=doc.get("leg_dim"),
        devices=doc.get("devices", {}),
        wiring=doc.get("wiring"),
        propagators=doc.get("propagators", {}),
        scenario_params=doc.get("scenario_params", {}),
        description=doc.get("description"),
    )
    _check_declared_unitary(desc)
    return desc


def _describe(err: jsonschema.ValidationError) -> str:
    if err.validator == "oneOf" and err.context:
        # report the branch that got furthest instead of the opaque oneOf message
        best = max(err.context, key=lambda e: len(e.absolute_path))
        return f"{best.message} (expected one of the {len(err.validator_value)} allowed forms)"
    return err.message


def _check_declared_unitary(desc: NetworkDescription):
    for name, dev in desc.devices.items():
        if "matrix" in dev and dev.get("unitary", False):
            mat, where = dev["matrix"], f"/devices/{name}/matrix"
        elif "S" in dev:
            mat, where = dev["S"], f"/devices/{name}/S"
        else:
            continue
        try:
            m = matrix_from_json(mat, where)
        except DimensionError as exc:
            raise SchemaError([(where, str(exc))]) from exc
        if m.shape[0] != m.shape[1]:
            raise SchemaError([(where, f"expected a square matrix, found {m.shape[0]}x{m.shape[1]}")])
        dev_err = unitarity_deviation(m)
        if dev_err > UNITARY_TOL:
            raise NetworkValueError(f"{where}: declared unitary but max|M^+M - I| = {dev_err:.3e}")


def serialize(desc: NetworkDescription) -> str:
    """Canonical text: sorted keys, two-space indent, shortest round-trip floats."""
    return json.dumps(desc.to_document(), sort_keys=True, indent=2) + "\n"


def _complex(v) -> complex:
    return complex(v[0], v[1])


def _is_scalar_literal(v) -> bool:
    return isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)


def operator_from_json(v, d: int, where: str) -> np.ndarray:
    if _is_scalar_literal(v):
        return _complex(v) * np.eye(d, dtype=complex)
    m = matrix_from_json(v, where)
    if m.shape != (d, d):
        raise DimensionError(f"{where}: expected {d}x{d}, found {m.shape[0]}x{m.shape[1]}")
    return m


def device_matrix(dev: dict, d: int, where: str) -> np.ndarray:
    if "beamsplitter" in dev:
        bs = dev["beamsplitter"]
        build = reversed_beamsplitter if bs.get("reversed", False) else gs_beamsplitter
        return build(bs["R"], d)
    if "matrix" in dev:
        m = matrix_from_json(dev["matrix"], where)
        if dev.get("tensor_extend", False):
            if m.shape != (2, 2):
                raise DimensionError(f"{where}: tensor_extend needs a 2x2 matrix, found {m.shape[0]}x{m.shape[1]}")
            return np.kron(m, np.eye(d))
        if m.shape != (2 * d, 2 * d):
            raise DimensionError(
                f"{where}: leg_dim {d} needs a {2 * d}x{2 * d} device, found {m.shape[0]}x{m.shape[1]}"
                " (set tensor_extend for a 2x2 device)"
            )
        return m
    raise DimensionError(f"{where}: Weyl triples are only meaningful in the gaussian scenario")


def linear_device(dev: dict, where: str) -> LinearDevice:
    if "S" not in dev:
        raise DimensionError(f"{where}: gaussian scenario needs {{S, beta, theta}} devices")
    s = matrix_from_json(dev["S"], f"{where}/S")
    beta = np.array([_complex(z) for z in dev["beta"]])
    return LinearDevice(s, beta, dev["theta"])


def _density(v, where: str) -> DensityMatrix:
    try:
        return DensityMatrix(matrix_from_json(v, where))
    except (ValueError, DimensionError) as exc:
        raise NetworkValueError(f"{where}: {exc}") from exc


# ---- construction --------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveInputs:
    network: LoopNetwork
    p: np.ndarray


@dataclass(frozen=True)
class GuardianInputs:
    tau_a: float
    g: complex


@dataclass(frozen=True)
class DeutschInputs:
    u: BipartiteUnitary
    rho_ext: DensityMatrix
    seed_state: DensityMatrix
    damping: float
    tol: float
    max_iter: int
    expected: DensityMatrix | None


@dataclass(frozen=True)
class LloydInputs:
    u: BipartiteUnitary
    rho_ext: DensityMatrix
    expected: DensityMatrix | None


@dataclass(frozen=True)
class GaussianInputs:
    device_a: LinearDevice
    device_b: LinearDevice
    g1: np.ndarray
    g2: np.ndarray
    m: np.ndarray


def _loop_network(desc: NetworkDescription, need_m: bool = True) -> LoopNetwork:
    d = desc.leg_dim
    a_name, b_name = desc.device_names
    for name in (a_name, b_name):
        if name not in desc.devices:
            raise DimensionError(f"/wiring: device {name!r} is not defined")
    a = device_matrix(desc.devices[a_name], d, f"/devices/{a_name}")
    b = device_matrix(desc.devices[b_name], d, f"/devices/{b_name}")
    g1 = operator_from_json(desc.propagators["g1"], d, "/propagators/g1")
    g2 = operator_from_json(desc.propagators["g2"], d, "/propagators/g2")
    if "m" in desc.propagators:
        m = operator_from_json(desc.propagators["m"], d, "/propagators/m")
    elif need_m:
        raise DimensionError("/propagators/m is required")
    else:
        m = np.eye(d)
    return LoopNetwork(a, b, g1, g2, m)


def build(desc: NetworkDescription):
    """Construct the domain objects for ``desc.scenario``."""
    sc, params = desc.scenario, desc.scenario_params
    if sc in ("plain", "absorber"):
        return _loop_network(desc)
    if sc == "balanced":
        return _loop_network(desc, need_m=False)
    if sc == "projective":
        net = _loop_network(desc)
        p = matrix_from_json(params["p"], "/scenario_params/p")
        if p.shape != (net.dim, net.dim):
            raise DimensionError(f"/scenario_params/p: expected {net.dim}x{net.dim}, found {p.shape}")
        return ProjectiveInputs(net, p)
    if sc == "guardian":
        return GuardianInputs(float(params["tau_a"]), _complex(params.get("g", [1.0, 0.0])))
    if sc == "deutsch":
        de, dc = params["dim_ext"], params["dim_ctc"]
        u = BipartiteUnitary(matrix_from_json(params["u"], "/scenario_params/u"), de, dc)
        rho = _density(params["rho_ext"], "/scenario_params/rho_ext")
        seed = (
            _density(params["seed_state"], "/scenario_params/seed_state")
            if "seed_state" in params
            else DensityMatrix.maximally_mixed(dc)
        )
        expected = _density(params["expected"], "/scenario_params/expected") if "expected" in params else None
        return DeutschInputs(
            u, rho, seed, float(params.get("damping", 0.5)), float(params.get("tol", 1e-10)),
            int(params.get("max_iter", 100_000)), expected,
        )
    if sc == "lloyd":
        de, d = params["dim_ext"], params["pair_dim"]
        u = BipartiteUnitary(matrix_from_json(params["u"], "/scenario_params/u"), de, d * d)
        rho = _density(params["rho_ext"], "/scenario_params/rho_ext")
        expected = _density(params["expected"], "/scenario_params/expected") if "expected" in params else None
        return LloydInputs(u, rho, expected)
    if sc == "gaussian":
        a_name, b_name = desc.device_names
        a = linear_device(desc.devices[a_name], f"/devices/{a_name}")
        b = linear_device(desc.devices[b_name], f"/devices/{b_name}")
        d = desc.leg_dim or 1
        g1 = _gaussian_operator(desc.propagators["g1"], d, "/propagators/g1")
        g2 = _gaussian_operator(desc.propagators["g2"], d, "/propagators/g2")
        m = _gaussian_operator(desc.propagators["m"], d, "/propagators/m")
        return GaussianInputs(a, b, g1, g2, m)
    raise ValueError(f"unknown scenario {sc!r}")  # pragma: no cover - schema forbids it


def _gaussian_operator(v, d, where):
    if _is_scalar_literal(v):
        return _complex(v) * np.eye(d, dtype=complex)
    m = matrix_from_json(v, where)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{where}: expected a square matrix")
    return m


# ---- validation ----------------------------------------------------------


def validate(desc: NetworkDescription) -> list[Diagnostic]:
    """Semantic checks beyond the schema; an empty list means ``build`` will succeed."""
    diags: list[Diagnostic] = []

    def err(loc, msg):
        diags.append(Diagnostic("error", loc, msg))

    sc = desc.scenario
    if sc in LOOP_SCENARIOS or sc == "gaussian":
        for role, name in zip(("a", "b"), desc.device_names):
            if name not in desc.devices:
                err(f"/wiring/{role}", f"device {name!r} is not defined")
    if diags:
        return diags

    if sc in LOOP_SCENARIOS:
        d = desc.leg_dim
        for name in desc.device_names:
            try:
                dev = device_matrix(desc.devices[name], d, f"/devices/{name}")
            except DimensionError as exc:
                err(f"/devices/{name}", str(exc))
                continue
            dev_err = unitarity_deviation(dev)
            if dev_err > UNITARY_TOL:
                err(f"/devices/{name}", f"device is not unitary (max|M^+M - I| = {dev_err:.3e})")
        for key, v in desc.propagators.items():
            try:
                op = operator_from_json(v, d, f"/propagators/{key}")
            except DimensionError as exc:
                err(f"/propagators/{key}", str(exc))
                continue
            dev_err = unitarity_deviation(op)
            if dev_err > UNITARY_TOL:
                err(f"/propagators/{key}", f"propagator is not unitary (max|G^+G - I| = {dev_err:.3e})")
        if sc == "projective":
            _validate_projection(desc, d, err)
    elif sc == "guardian":
        g = desc.scenario_params.get("g")
        if g is not None and abs(abs(_complex(g)) - 1.0) > UNITARY_TOL:
            err("/scenario_params/g", f"branch phase must be unimodular, |g| = {abs(_complex(g)):.12g}")
    elif sc in ("deutsch", "lloyd"):
        _validate_ctc(desc, err)
    elif sc == "gaussian":
        _validate_gaussian(desc, err)
    return diags


def _validate_projection(desc, d, err):
    try:
        p = matrix_from_json(desc.scenario_params["p"], "/scenario_params/p")
    except DimensionError as exc:
        err("/scenario_params/p", str(exc))
        return
    if p.shape != (d, d):
        err("/scenario_params/p", f"expected {d}x{d}, found {p.shape[0]}x{p.shape[1]}")
        return
    idem = float(np.max(np.abs(p @ p - p)))
    herm = float(np.max(np.abs(p - p.conj().T)))
    if idem > UNITARY_TOL:
        err("/scenario_params/p", f"projection is not idempotent: max|p^2 - p| = {idem:.3e}")
    if herm > UNITARY_TOL:
        err("/scenario_params/p", f"projection is not self-adjoint: max|p - p^+| = {herm:.3e}")


def _validate_ctc(desc, err):
    params = desc.scenario_params
    de = params["dim_ext"]
    dc = params["dim_ctc"] if desc.scenario == "deutsch" else params["pair_dim"] ** 2
    checks = [("u", de * dc, False), ("rho_ext", de, True)]
    if desc.scenario == "deutsch":
        checks.append(("seed_state", dc, True))
        checks.append(("expected", dc, True))
    else:
        checks.append(("expected", de, True))
    for key, n, is_state in checks:
        if key not in params:
            continue
        where = f"/scenario_params/{key}"
        try:
            m = matrix_from_json(params[key], where)
        except DimensionError as exc:
            err(where, str(exc))
            continue
        if m.shape != (n, n):
            err(where, f"expected {n}x{n}, found {m.shape[0]}x{m.shape[1]}")
            continue
        if is_state:
            try:
                DensityMatrix(m)
            except ValueError as exc:
                err(where, str(exc))
        else:
            dev_err = unitarity_deviation(m)
            if dev_err > UNITARY_TOL:
                err(where, f"not unitary (max|U^+U - I| = {dev_err:.3e})")


def _validate_gaussian(desc, err):
    devs = []
    for name in desc.device_names:
        where = f"/devices/{name}"
        try:
            devs.append(linear_device(desc.devices[name], where))
        except (ValueError, DimensionError) as exc:
            err(where, str(exc))
    if len(devs) != 2:
        return
    if devs[0].n != devs[1].n:
        err("/devices", f"devices act on {devs[0].n} and {devs[1].n} modes")
        return
    d = desc.leg_dim or 1
    ops = {}
    for key in ("g1", "g2", "m"):
        try:
            ops[key] = _gaussian_operator(desc.propagators[key], d, f"/propagators/{key}")
        except DimensionError as exc:
            err(f"/propagators/{key}", str(exc))
    if len(ops) != 3:
        return
    n1, n2 = ops["g1"].shape[0], ops["g2"].shape[0]
    if n1 + n2 != devs[0].n:
        err("/propagators", f"g1 and g2 span {n1 + n2} modes, devices act on {devs[0].n}")
    if ops["m"].shape[0] != n1:
        err("/propagators/m", f"m must act on the {n1}-mode loop leg, found {ops['m'].shape[0]}")
    for key, op in ops.items():
        dev_err = unitarity_deviation(op)
        if dev_err > UNITARY_TOL:
            err(f"/propagators/{key}", f"propagator is not unitary (max|G^+G - I| = {dev_err:.3e})")


def load(path) -> NetworkDescription:
    with open(path, "rb") as fh:
        return parse_network(fh.read())
