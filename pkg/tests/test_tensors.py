import json
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from heatkl.errors import InvalidInputError
from heatkl.tensors import (CurvatureJet, constant_curvature_jet,
                            constant_curvature_riemann, direct_sum_jet,
                            flat_jet, jet_from_json_obj, jet_to_json_obj,
                            load_jet, random_curvature_jet,
                            ricci_from_riemann, save_jet, scalar_from_ricci)


def test_ricci_matches_direct_loops():
    rng = np.random.default_rng(3)
    for d in (2, 3, 4):
        R = rng.standard_normal((d, d, d, d))
        ric = ricci_from_riemann(R)
        for u in range(d):
            for v in range(d):
                assert_allclose(ric[u, v], sum(R[i, u, i, v] for i in range(d)), rtol=1e-14)
        assert_allclose(scalar_from_ricci(ric), np.trace(ric), rtol=1e-14)


def test_constant_curvature_entries():
    R = constant_curvature_riemann(Fraction(1, 2), 3)
    assert R[0, 1, 0, 1] == Fraction(1, 2)
    assert R[0, 1, 1, 0] == Fraction(-1, 2)
    assert R[0, 0, 1, 1] == 0
    assert R[0, 1, 2, 2] == 0


def test_constant_curvature_jet_invariants():
    for K in (0.0, 1.0, -2.5):
        for d in (2, 3, 4):
            jet = constant_curvature_jet(K, d)
            jet.validate()
            assert jet.bianchi
            assert_allclose(np.asarray(jet.ric, dtype=float), K * (d - 1) * np.eye(d))
            assert_allclose(float(jet.sc), K * d * (d - 1))


def test_exact_rational_jet():
    jet = constant_curvature_jet(Fraction(1, 3), 2)
    assert jet.sc == Fraction(2, 3)
    assert jet.ric[0, 0] == Fraction(1, 3)
    jet.validate()


def test_random_jet_deterministic():
    a = random_curvature_jet(11, 3)
    b = random_curvature_jet(11, 3)
    assert np.array_equal(a.riemann, b.riemann)
    assert np.array_equal(a.ric_d2, b.ric_d2)
    assert np.array_equal(a.sc_grad, b.sc_grad)
    c = random_curvature_jet(12, 3)
    assert not np.array_equal(a.riemann, c.riemann)


def test_random_jet_symmetries_bitwise():
    for d in (2, 3, 5):
        jet = random_curvature_jet(77, d)
        R = jet.riemann
        assert np.array_equal(R, -np.transpose(R, (1, 0, 2, 3)))
        assert np.array_equal(R, -np.transpose(R, (0, 1, 3, 2)))
        assert np.array_equal(R, np.transpose(R, (2, 3, 0, 1)))
        assert np.array_equal(jet.ric_d2, np.transpose(jet.ric_d2, (1, 0, 2, 3)))
        jet.validate()


def test_random_jet_bianchi_enforced():
    for d in (2, 3, 4):
        jet = random_curvature_jet(5, d, enforce_bianchi=True)
        R = jet.riemann
        cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
        assert np.max(np.abs(cyc)) < 1e-13
        # contracted second Bianchi: sum_ij Ric_ij;ij = (1/2) sum_i Sc_;ii
        lhs = np.einsum("ijij->", jet.ric_d2)
        rhs = 0.5 * np.trace(jet.sc_hess)
        assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)
        jet.validate()
        assert jet.bianchi


def test_random_jet_not_bianchi_by_default():
    # the Bianchi-violating component is the Lambda^4 part, so it can only
    # be nonzero for d >= 4
    jet = random_curvature_jet(5, 4)
    R = jet.riemann
    cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
    assert np.max(np.abs(cyc)) > 1e-3
    assert not jet.bianchi


def test_bianchi_automatic_below_dim_four():
    # pair symmetries alone force the cyclic identity when d < 4
    for d in (2, 3):
        jet = random_curvature_jet(6, d)
        R = jet.riemann
        cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
        assert np.max(np.abs(cyc)) < 1e-13


def test_validate_rejects_broken_symmetry():
    jet = random_curvature_jet(1, 3)
    R = np.array(jet.riemann)
    R[0, 1, 0, 1] += 1e-6
    bad = CurvatureJet(riemann=R, ric=jet.ric, sc=jet.sc, sc_grad=jet.sc_grad,
                       sc_hess=jet.sc_hess, ric_d2=jet.ric_d2)
    with pytest.raises(InvalidInputError):
        bad.validate()


def test_validate_rejects_wrong_trace():
    jet = random_curvature_jet(2, 3)
    bad = CurvatureJet(riemann=jet.riemann, ric=jet.ric, sc=float(jet.sc) + 1e-6,
                       sc_grad=jet.sc_grad, sc_hess=jet.sc_hess, ric_d2=jet.ric_d2)
    with pytest.raises(InvalidInputError):
        bad.validate()


def test_jet_arrays_frozen():
    jet = random_curvature_jet(4, 2)
    with pytest.raises(ValueError):
        jet.riemann[0, 0, 0, 0] = 1.0


def test_direct_sum_blocks_and_scalars():
    j1 = random_curvature_jet(8, 2, enforce_bianchi=True)
    j2 = random_curvature_jet(9, 3, enforce_bianchi=True)
    js = direct_sum_jet(j1, j2)
    assert js.dim == 5
    assert_allclose(float(js.sc), float(j1.sc) + float(j2.sc), rtol=1e-14)
    assert np.array_equal(js.riemann[:2, :2, :2, :2], j1.riemann)
    assert np.array_equal(js.riemann[2:, 2:, 2:, 2:], j2.riemann)
    assert np.max(np.abs(js.riemann[:2, 2:, :, :])) == 0.0
    assert np.max(np.abs(js.ric[:2, 2:])) == 0.0
    js.validate()
    assert js.bianchi


def test_direct_sum_with_flat_factor():
    j = random_curvature_jet(3, 3, enforce_bianchi=True)
    js = direct_sum_jet(j, flat_jet(2))
    assert js.dim == 5
    assert_allclose(float(js.sc), float(j.sc), rtol=1e-15)
    js.validate()


def test_json_round_trip_exact(tmp_path):
    jet = random_curvature_jet(21, 3, enforce_bianchi=True)
    path = tmp_path / "jet.json"
    save_jet(jet, str(path))
    back = load_jet(str(path))
    assert np.array_equal(back.riemann, jet.riemann)
    assert np.array_equal(back.ric_d2, jet.ric_d2)
    assert np.array_equal(back.sc_grad, jet.sc_grad)
    assert np.array_equal(back.sc_hess, jet.sc_hess)
    assert back.bianchi == jet.bianchi
    # file content is plain JSON
    with open(path) as fh:
        obj = json.load(fh)
    assert obj["dim"] == 3


def test_json_rejects_inconsistent_ric():
    jet = random_curvature_jet(22, 2)
    obj = jet_to_json_obj(jet)
    obj["ric"] = [[0, 0, 9.0], [1, 1, 9.0]]
    with pytest.raises(InvalidInputError):
        jet_from_json_obj(obj)


def test_json_accepts_consistent_ric():
    jet = random_curvature_jet(23, 2)
    obj = jet_to_json_obj(jet)
    ric = np.asarray(jet.ric)
    obj["ric"] = [[i, j, float(ric[i, j])] for i in range(2) for j in range(2)
                  if ric[i, j] != 0.0]
    back = jet_from_json_obj(obj)
    assert np.array_equal(back.riemann, jet.riemann)


def test_flat_jet_is_zero():
    jet = flat_jet(3)
    assert float(jet.sc) == 0.0
    assert np.max(np.abs(jet.riemann)) == 0.0
    jet.validate()


def test_dimension_errors():
    with pytest.raises(InvalidInputError):
        flat_jet(0)
    with pytest.raises(InvalidInputError):
        constant_curvature_riemann(1.0, 0)
