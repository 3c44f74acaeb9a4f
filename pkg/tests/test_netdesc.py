import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tlnet.errors import NetworkSyntaxError, NetworkValueError, SchemaError
from tlnet.netdesc import GuardianInputs, ProjectiveInputs, build, load, parse_network, serialize, validate
from tlnet.timeloop import LoopNetwork

NETWORKS = Path(__file__).resolve().parent.parent / "networks"


def plain(**over):
    doc = {
        "schema_version": "1",
        "scenario": "plain",
        "leg_dim": 1,
        "devices": {"A": {"beamsplitter": {"R": 0.5}}, "B": {"beamsplitter": {"R": 0.5}}},
        "propagators": {"g1": [1.0, 0.0], "g2": [-1.0, 0.0], "m": [1.0, 0.0]},
    }
    doc.update(over)
    return doc


def test_plain_builds():
    net = build(parse_network(json.dumps(plain())))
    assert isinstance(net, LoopNetwork) and net.dim == 1


@pytest.mark.parametrize("path", sorted(NETWORKS.glob("*.json")), ids=lambda p: p.stem)
def test_checked_in_files_parse(path):
    desc = load(path)
    assert validate(desc) == []


def test_malformed_json_offset():
    with pytest.raises(NetworkSyntaxError) as exc:
        parse_network('{"schema_version": "1",, }')
    assert exc.value.offset == 23


def test_bad_utf8():
    with pytest.raises(NetworkSyntaxError):
        parse_network(b'{"a": "\xff"}')


def test_nan_rejected():
    with pytest.raises(NetworkValueError):
        parse_network('{"schema_version": "1", "scenario": "plain", "leg_dim": NaN}')


def test_schema_errors_carry_pointers():
    doc = plain(leg_dim=0)
    doc["devices"]["A"] = {"beamsplitter": {"R": 1.5}}
    with pytest.raises(SchemaError) as exc:
        parse_network(json.dumps(doc))
    where = [p for p, _ in exc.value.errors]
    assert "/leg_dim" in where and "/devices/A" in where


def test_unknown_field_rejected():
    with pytest.raises(SchemaError):
        parse_network(json.dumps(plain(colour="blue")))


def test_missing_m_rejected_for_plain():
    doc = plain()
    del doc["propagators"]["m"]
    with pytest.raises(SchemaError):
        parse_network(json.dumps(doc))


def test_declared_unitary_checked():
    doc = plain()
    doc["devices"]["A"] = {"matrix": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]], "unitary": True, "tensor_extend": True}
    with pytest.raises(NetworkValueError):
        parse_network(json.dumps(doc))


def test_validate_reports_dimension_and_unitarity():
    doc = plain(leg_dim=2)
    doc["propagators"]["g1"] = [0.5, 0.0]
    diags = validate(parse_network(json.dumps(doc)))
    locs = {d.location for d in diags}
    assert "/propagators/g1" in locs


def test_validate_missing_device():
    doc = plain(wiring={"a": "A", "b": "C"})
    diags = validate(parse_network(json.dumps(doc)))
    assert diags and diags[0].location == "/wiring/b"


def test_projection_validation():
    doc = plain(scenario="projective", scenario_params={"p": [[[0.5, 0.0]]]})
    diags = validate(parse_network(json.dumps(doc)))
    assert any("idempotent" in d.message for d in diags)


def test_projective_and_guardian_build():
    doc = plain(scenario="projective", scenario_params={"p": [[[1.0, 0.0]]]})
    assert isinstance(build(parse_network(json.dumps(doc))), ProjectiveInputs)
    g = {"schema_version": "1", "scenario": "guardian", "scenario_params": {"tau_a": 0.5}}
    assert build(parse_network(json.dumps(g))) == GuardianInputs(0.5, 1.0)


@pytest.mark.parametrize("path", sorted(NETWORKS.glob("*.json")), ids=lambda p: p.stem)
def test_serialize_roundtrip(path):
    desc = load(path)
    again = parse_network(serialize(desc))
    assert again == desc
    assert serialize(again) == serialize(desc)


@given(st.floats(0, 1), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_roundtrip_numbers(R, re, im):
    doc = plain()
    doc["devices"]["A"]["beamsplitter"]["R"] = R
    doc["propagators"]["g1"] = [re, im]
    desc = parse_network(json.dumps(doc))
    assert parse_network(serialize(desc)) == desc


def test_scalar_operator_is_identity_multiple():
    doc = plain(leg_dim=3)
    net = build(parse_network(json.dumps(doc)))
    assert np.array_equal(net.g2, -np.eye(3))
