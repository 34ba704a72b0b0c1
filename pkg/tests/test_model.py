from fractions import Fraction

import numpy as np
import pytest

from helpers import example1_model, example1_structure, load, random_valid_model, rat
from netident.model import (
    ZERO,
    AssignmentError,
    ModelSetStructure,
    StructureError,
    ThetaAssignment,
    ValidationError,
    build_model,
    extract_theta,
    feedthrough_matrices,
    fixed,
    instantiate,
    network_transfer,
    param,
    validate_model,
)
from netident.rational import Rat, RMat

A, B = rat([1], [0, 1]), rat([2], [0, 1])


def codes(m):
    return {v.code for v in validate_model(m)}


def test_s1_is_valid():
    assert validate_model(example1_model(A, B, 1)) == []


def test_nonzero_diagonal_reported():
    m = build_model([[rat([1], [0, 1]), 0], [0, 0]], [[1], [0]])
    assert "nonzero-diagonal" in codes(m)
    assert any(v.where == "G[1][1]" for v in validate_model(m))


def test_closed_loop_is_valid():
    doc = load("closedloop.json")
    m = instantiate(doc.structure, doc.theta)
    assert validate_model(m) == []
    # loop determinant 1 - 0.1/z has its root at 0.1
    det = Rat.one() - m.G[0, 1] * m.G[1, 0]
    assert np.allclose(det.zeros(), [0.1])


def test_unstable_module_and_inverse():
    assert "unstable" in codes(build_model([[0, rat([1], [-2, 1])], [0, 0]], [[1], [1]]))
    # two stable modules forming an unstable loop: 1 - 4/z^2 has roots +-2
    m = build_model([[0, rat([2], [0, 1])], [rat([2], [0, 1]), 0]], [[1], [0]])
    assert "inverse-unstable" in codes(m)


def test_ill_posed_feedthrough_loop():
    m = build_model([[0, Rat.one()], [Rat.one(), 0]], [[1], [0]])
    assert "ill-posed" in codes(m)


def test_noise_model_checks():
    base = dict(G=[[0, 0], [0, 0]], R=[[1], [0]])
    assert "h-not-monic" in codes(build_model(**base, H=[[Rat.const(2)], [0]], Lambda=[[1]]))
    assert "h-nonminphase" in codes(build_model(**base, H=[[rat([-2, 1], [0, 1])], [0]], Lambda=[[1]]))
    assert "lambda-not-pd" in codes(build_model(**base, H=[[1], [0]], Lambda=[[-1]]))
    assert validate_model(build_model(**base, H=[[1], [rat([1], [0, 1])]], Lambda=[[1]])) == []


def test_instantiate_example1_s1():
    s = example1_structure()
    keys = s.param_positions()
    theta = {k: Rat.zero() for k in keys}
    theta[("G", 1, 0)], theta[("G", 2, 1)] = A, B
    m = instantiate(s, ThetaAssignment(theta))
    assert m == example1_model(A, B, 1)


def test_instantiate_without_params_returns_fixed_model():
    one = fixed(Rat.one())
    s = ModelSetStructure(2, 1, 0, [[ZERO, fixed(rat([1], [0, 1]))], [ZERO, ZERO]], [[one], [ZERO]], [[], []])
    m = instantiate(s, ThetaAssignment({}))
    assert m.G[0, 1] == rat([1], [0, 1]) and m.R[0, 0] == Rat.one()


def test_instantiate_rejects_improper_and_missing():
    s = example1_structure()
    theta = {k: Rat.zero() for k in s.param_positions()}
    theta[("G", 1, 2)] = rat([0, 1])
    with pytest.raises(AssignmentError):
        instantiate(s, ThetaAssignment(theta))
    theta[("G", 1, 2)] = Rat.one()  # proper but the position is flagged strict
    with pytest.raises(AssignmentError):
        instantiate(s, ThetaAssignment(theta))
    del theta[("G", 1, 2)]
    with pytest.raises(AssignmentError, match="missing"):
        instantiate(s, ThetaAssignment(theta))
    theta[("G", 1, 2)] = Rat.zero()
    theta[("R", 0, 0)] = Rat.one()
    with pytest.raises(AssignmentError, match="non-parameterized"):
        instantiate(s, ThetaAssignment(theta))


def test_instantiate_reports_validation_failure():
    P = param(strict=True)
    s = ModelSetStructure(2, 1, 0, [[ZERO, P], [P, ZERO]], [[fixed(Rat.one())], [ZERO]], [[], []])
    theta = {("G", 0, 1): rat([2], [0, 1]), ("G", 1, 0): rat([2], [0, 1])}
    with pytest.raises(ValidationError) as exc:
        instantiate(s, ThetaAssignment(theta))
    assert "inverse-unstable" in {v.code for v in exc.value.violations}


def test_structure_invariants():
    with pytest.raises(StructureError, match="diagonal"):
        ModelSetStructure(1, 0, 0, [[param()]], [[]], [[]])
    with pytest.raises(StructureError, match="shape"):
        ModelSetStructure(2, 0, 1, [[ZERO, ZERO], [ZERO, ZERO]], [[], []], [[param()]])
    with pytest.raises(StructureError, match="monic"):
        ModelSetStructure(1, 0, 1, [[ZERO]], [[]], [[ZERO]])


def test_network_transfer_example1():
    T1 = network_transfer(example1_model(A, B, 1))
    assert T1 == RMat.from_rows([[1, 0], [A, 1], [rat([2, 0, 1], [0, 0, 1]), B]])
    T2 = network_transfer(example1_model(A, B, 2))
    assert T2 == RMat.from_rows([[1, 0], [rat([2, 2], [0, 0, 1]), 1], [rat([1, 1], [0, 1]), 0]])
    # symbolic forms (A+1)B and A+1
    one = Rat.one()
    assert T2[1, 0] == (A + one) * B and T2[2, 0] == A + one


def test_network_transfer_trivial():
    m = build_model([[0, 0], [0, 0]], [[1, 0], [0, 1]], [[1, 0], [0, 1]])
    assert network_transfer(m) == RMat.from_rows([[1, 0, 1, 0], [0, 1, 0, 1]])


def test_feedthrough_matrices():
    ft = feedthrough_matrices(example1_model(A, B, 1))
    assert not ft.G_inf.any()
    assert (ft.Twr_inf == ft.R_inf).all()
    doc = load("closedloop.json")
    ft = feedthrough_matrices(instantiate(doc.structure, doc.theta))
    assert ft.G_inf.tolist() == [[0, 0], [Fraction(1, 5), 0]]
    assert ft.H_inf.tolist() == [[1], [0]]


def test_monic_block_feedthrough():
    rng = np.random.default_rng(3)
    for _ in range(5):
        s, m = random_valid_model(rng, "prop1", L=3, p=2)
        h = feedthrough_matrices(m).H_inf
        assert h[:2].tolist() == [[1, 0], [0, 1]]


def test_extract_then_instantiate_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(10):
        s, m = random_valid_model(rng, "prop3")
        assert instantiate(s, extract_theta(s, m)) == m
