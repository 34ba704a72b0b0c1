import json

import numpy as np
import pytest

from helpers import example1_structure, load
from netident.cli import bundled_examples
from netident.model import Properness, Tag, instantiate
from netident.rational import Rat
from netident.specfile import SPEC_VERSION, SpecError, parse_spec, serialize_spec, spec_from_dict, spec_to_dict

MINIMAL = {
    "version": SPEC_VERSION, "L": 2, "K": 1, "p": 0,
    "G": [["0", {"param": {"properness": "strict"}}], ["0", "0"]],
    "R": [[{"fixed": {"num": [1], "den": [1]}}], [0]],
}


def doc(**changes):
    d = json.loads(json.dumps(MINIMAL))
    d.update(changes)
    return d


def test_minimal_parse():
    s = spec_from_dict(doc()).structure
    assert (s.L, s.K, s.p) == (2, 1, 0)
    assert s.G[0][1].tag is Tag.PARAM and s.G[0][1].properness is Properness.STRICT
    assert s.R[0][0].value == Rat.one() and s.R[1][0].is_zero


def test_param_default_is_proper():
    d = doc(G=[["0", {"param": {}}], ["0", "0"]])
    assert spec_from_dict(d).structure.G[0][1].properness is Properness.PROPER


def test_example1_matches_handbuilt_structure():
    s = load("example1.json").structure
    assert s.param_positions() == example1_structure().param_positions()


def test_theta_block_is_one_based():
    d = doc(theta={"G": {"1,2": {"num": [1], "den": ["-1/2", 1]}}})
    th = spec_from_dict(d).theta
    assert th.entries[("G", 0, 1)] == Rat.from_coeffs([1], ["-1/2", 1])


@pytest.mark.parametrize("change, where", [
    ({"version": "netident/0"}, "$.version"),
    ({"L": 0}, "$.L"),
    ({"G": [["0", "0"]]}, "$.G"),
    ({"G": [["0", {"param": {"properness": "weird"}}], ["0", "0"]]}, "$.G[0][1]"),
    ({"R": [[{"fixed": {"num": [1], "den": [0]}}], ["0"]]}, "$.R[0][0]"),
    ({"extra": 1}, "$"),
    ({"theta": {"G": {"2,1": {"num": [1], "den": [0, 1]}}}}, "$.theta"),
])
def test_semantic_errors_carry_paths(change, where):
    with pytest.raises(SpecError) as exc:
        spec_from_dict(doc(**change))
    assert exc.value.where.startswith(where)


def test_diagonal_must_be_zero():
    with pytest.raises(SpecError, match="diagonal"):
        spec_from_dict(doc(G=[[{"param": {}}, "0"], ["0", "0"]]))


def test_syntax_error_reports_line_and_column():
    with pytest.raises(SpecError) as exc:
        parse_spec('{\n  "version": "netident/1",\n  oops\n}')
    assert exc.value.where == "line 3 column 3"


def test_missing_theta_value():
    with pytest.raises(SpecError, match="missing"):
        spec_from_dict(doc(theta={}))


@pytest.mark.parametrize("name", bundled_examples())
def test_bundled_round_trip(name):
    d = load(name)
    text = serialize_spec(d)
    again = parse_spec(text)
    assert again == d
    assert serialize_spec(again) == text
    if d.theta is not None:
        instantiate(d.structure, d.theta)


def test_lambda_forms():
    d = load("closedloop.json")
    assert d.structure.lambda_is_param and np.allclose(d.theta.Lambda, [[1]])
    out = spec_to_dict(d)
    assert out["Lambda"] == {"param": {}} and out["diagonal_feedthrough"] is True
    fixed = doc(p=1, H=[[{"param": {}}], ["0"]], Lambda={"fixed": [[2]]})
    assert np.allclose(spec_from_dict(fixed).structure.lambda_fixed, [[2]])
    with pytest.raises(SpecError):
        spec_from_dict(doc(p=1, H=[[{"param": {}}], ["0"]], Lambda={"fixed": [[-1]]}))
