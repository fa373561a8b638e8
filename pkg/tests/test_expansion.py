import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from heatkl.errors import InvalidInputError, UnsupportedOrderError
from heatkl.expansion import (build_P_Q, c0, c1, c2_closed, c_i_via_wick,
                              expansion_from_jet, kl_asymptotic)
from heatkl.parametrix import parametrix_from_jet
from heatkl.tensors import (constant_curvature_jet, direct_sum_jet, flat_jet,
                            random_curvature_jet)
from heatkl.wick import PolynomialY, integrate_polynomial


def _loop_c2_oracle(jet):
    """c2 recomputed with direct index loops, no shared contraction code."""
    d = jet.dim
    R = np.asarray(jet.riemann, dtype=float)
    ric = np.asarray(jet.ric, dtype=float)
    sch = np.asarray(jet.sc_hess, dtype=float)
    rd2 = np.asarray(jet.ric_d2, dtype=float)
    sc_lap = sum(sch[i, i] for i in range(d))
    ric_dot = sum(ric[i, j] ** 2 for i in range(d) for j in range(d))
    ric_div2 = sum(rd2[i, j, i, j] for i in range(d) for j in range(d))
    riem_dot = sum(R[i, j, k, l] ** 2
                   for i, j, k, l in itertools.product(range(d), repeat=4))
    riem_mix = sum(R[i, u, j, v] * R[j, u, i, v]
                   for i, u, j, v in itertools.product(range(d), repeat=4))
    return (-(3 * d - 22) / 480.0 * sc_lap
            - ric_dot / 48.0
            + (d + 6) / 80.0 * ric_div2
            - (d - 14) / 1440.0 * riem_dot
            + (d + 6) / 720.0 * riem_mix)


def test_c0_values():
    assert c0(1) == -0.5
    assert c0(2) == -1.0
    assert c0(5) == -2.5
    with pytest.raises(InvalidInputError):
        c0(0)


def test_c1_is_quarter_scalar():
    jet = constant_curvature_jet(1.0, 3)
    assert_allclose(c1(jet), 6.0 / 4.0)
    assert_allclose(c1(flat_jet(2)), 0.0)


def test_c2_sphere_values():
    # constant curvature K, dim d: c2 = K^2 d(d-1)(-(d-1)/48 + 1/36)
    for K in (0.25, 1.0, 4.0):
        for d in (2, 3, 4):
            expect = K * K * d * (d - 1) * (-(d - 1) / 48.0 + 1.0 / 36.0)
            assert_allclose(c2_closed(constant_curvature_jet(K, d)), expect,
                            rtol=1e-13, atol=1e-15)
    assert_allclose(c2_closed(constant_curvature_jet(1.0, 2)), 1.0 / 72.0, rtol=1e-14)


def test_c2_sphere_exact_rational_wick():
    # independent exact-rational derivation of c2 = 1/72 on the unit 2-sphere:
    # rebuild the order-2 integrands from scratch with Fractions and integrate
    # with the exact Gaussian moments, so no float rounding can hide a bug
    d = 2
    half = Fraction(1, 2)
    R = np.empty((d, d, d, d), dtype=object)
    for i, j, k, l in itertools.product(range(d), repeat=4):
        R[i, j, k, l] = Fraction(int(i == k) * int(j == l) - int(i == l) * int(j == k))
    ric = np.empty((d, d), dtype=object)
    for u, v in itertools.product(range(d), repeat=2):
        ric[u, v] = sum(R[i, u, i, v] for i in range(d))
    sc = sum(ric[i, i] for i in range(d))

    mixed = np.empty((d, d, d, d), dtype=object)
    for i, j, k, l in itertools.product(range(d), repeat=4):
        mixed[i, j, k, l] = sum(R[i, u, j, v] * R[k, u, l, v]
                                for u in range(d) for v in range(d))
    ric_sq = np.empty((d, d), dtype=object)
    ric_mix = np.empty((d, d), dtype=object)
    riem_sq = np.empty((d, d), dtype=object)
    for i, j in itertools.product(range(d), repeat=2):
        ric_sq[i, j] = sum(ric[i, u] * ric[u, j] for u in range(d))
        ric_mix[i, j] = sum(ric[u, v] * R[i, u, j, v]
                            for u in range(d) for v in range(d))
        riem_sq[i, j] = sum(R[i, u, v, w] * R[j, u, v, w]
                            for u in range(d) for v in range(d) for w in range(d))

    e2 = PolynomialY.from_quadratic(-ric * Fraction(1, 6))
    a2 = PolynomialY.from_quadratic(ric * Fraction(1, 12))
    b0 = sc * Fraction(1, 12)
    e4 = PolynomialY.from_quartic(
        (2 * np.multiply.outer(ric, ric) - Fraction(4, 5) * mixed) * Fraction(1, 144))
    a4 = PolynomialY.from_quartic(
        (Fraction(1, 12) * np.multiply.outer(ric, ric) + Fraction(1, 15) * mixed)
        * Fraction(1, 24))
    b2 = PolynomialY.from_quadratic(
        (5 * sc * ric - 4 * ric_sq + 2 * ric_mix + 2 * riem_sq) * Fraction(1, 720))
    c0_const = (5 * sc * sc
                - 4 * sum(ric[i, j] ** 2 for i in range(d) for j in range(d))
                + 2 * sum(ric_mix[i, i] for i in range(d))
                + 2 * sum(riem_sq[i, i] for i in range(d))) * Fraction(1, 1440)

    e2a2 = e2 * a2
    p2 = c0_const + b2 + b0 * e2 + a4 + e2a2 + e4
    q2 = (c0_const + half * b0 * b0 + b2 + b0 * a2 + b0 * e2 + a4
          + half * (a2 * a2) + e2a2)
    val = -integrate_polynomial(p2, "half_norm_sq") + integrate_polynomial(q2, "plain")
    assert val == Fraction(1, 72)
    assert_allclose(c2_closed(constant_curvature_jet(1.0, 2)), float(val), rtol=1e-13)


def test_c2_matches_loop_oracle():
    for d in (2, 3, 4):
        for seed in (0, 1):
            jet = random_curvature_jet(100 + seed, d)
            assert_allclose(c2_closed(jet), _loop_c2_oracle(jet), rtol=1e-12, atol=1e-14)


def test_c2_breakdown_recombines_to_total():
    jet = random_curvature_jet(7, 3)
    d = jet.dim
    breakdown = {}
    total = c2_closed(jet, breakdown)
    assert len(breakdown) == 5
    recombined = (-(3 * d - 22) / 480.0 * breakdown["sc_lap"]
                  - breakdown["ric_dot"] / 48.0
                  + (d + 6) / 80.0 * breakdown["ric_div2"]
                  - (d - 14) / 1440.0 * breakdown["riem_dot"]
                  + (d + 6) / 720.0 * breakdown["riem_mix"])
    assert_allclose(recombined, total, rtol=1e-13)


def test_build_P_Q_order0():
    p = parametrix_from_jet(constant_curvature_jet(1.0, 2))
    P, Q = build_P_Q(p, 0)
    assert P.degree() == 0
    assert integrate_polynomial(Q, "plain") == 0
    assert_allclose(float(integrate_polynomial(P, "plain")), 1.0)


def test_build_P_Q_rejects_high_order():
    p = parametrix_from_jet(flat_jet(2))
    with pytest.raises(UnsupportedOrderError):
        build_P_Q(p, 3)


def test_wick_path_on_spheres():
    for K, d in ((1.0, 2), (1.0, 3), (0.25, 3)):
        jet = constant_curvature_jet(K, d)
        p = parametrix_from_jet(jet)
        assert_allclose(c_i_via_wick(p, 0), c0(d), rtol=1e-14)
        assert_allclose(c_i_via_wick(p, 1), c1(jet), rtol=1e-14)
        assert_allclose(c_i_via_wick(p, 2), c2_closed(jet), rtol=1e-13, atol=1e-16)


def test_wick_path_random_jets_spot():
    for d, seed in ((2, 0), (3, 5), (5, 9)):
        jet = random_curvature_jet(seed, d)
        p = parametrix_from_jet(jet)
        closed = (c0(d), c1(jet), c2_closed(jet))
        for i in range(3):
            got = c_i_via_wick(p, i)
            assert abs(got - closed[i]) <= 1e-10 * (1.0 + abs(closed[i]))


def test_flat_extension_invariance():
    # zero-padding a Bianchi jet must not change c2 despite the explicit
    # d-dependence of the closed-form weights
    for d in (2, 3):
        jet = random_curvature_jet(42 + d, d, enforce_bianchi=True)
        base = c2_closed(jet)
        for m in (1, 2):
            ext = direct_sum_jet(jet, flat_jet(m))
            assert abs(c2_closed(ext) - base) <= 1e-12


def test_flat_extension_needs_bianchi():
    # without the differential Bianchi constraints the d-shift terms do not
    # cancel, so invariance must fail for a generic jet
    jet = random_curvature_jet(4, 3)
    ext = direct_sum_jet(jet, flat_jet(2))
    assert abs(c2_closed(ext) - c2_closed(jet)) > 1e-6


def test_kl_asymptotic_terms():
    d, vol = 2, 4.0 * math.pi
    coeffs = (-1.0, 0.5, 1.0 / 72.0)
    t = 0.01
    base = -0.5 * d * math.log(2.0 * math.pi * t) + math.log(vol)
    assert_allclose(kl_asymptotic(t, d, vol, coeffs, 0), base - 1.0, rtol=1e-15)
    assert_allclose(kl_asymptotic(t, d, vol, coeffs, 1), base - 1.0 + 0.5 * t, rtol=1e-15)
    assert_allclose(kl_asymptotic(t, d, vol, coeffs, 2),
                    base - 1.0 + 0.5 * t + t * t / 72.0, rtol=1e-15)


def test_kl_asymptotic_rejects_bad_input():
    coeffs = (-1.0, 0.0, 0.0)
    with pytest.raises(InvalidInputError):
        kl_asymptotic(-0.1, 2, 1.0, coeffs, 2)
    with pytest.raises(InvalidInputError):
        kl_asymptotic(0.1, 2, -1.0, coeffs, 2)
    with pytest.raises(UnsupportedOrderError):
        kl_asymptotic(0.1, 2, 1.0, coeffs, 3)


def test_expansion_from_jet_both_methods():
    jet = constant_curvature_jet(1.0, 2)
    closed = expansion_from_jet(jet, method="closed_form", vol=4.0 * math.pi)
    wick = expansion_from_jet(jet, method="wick", vol=4.0 * math.pi)
    assert closed.method == "closed_form"
    assert wick.method == "wick"
    assert closed.d == 2 and wick.d == 2
    assert_allclose(closed.c, wick.c, rtol=1e-12, atol=1e-15)
    assert_allclose(closed.c, (-1.0, 0.5, 1.0 / 72.0), rtol=1e-13)
    obj = closed.to_json_obj()
    assert obj["d"] == 2
    assert obj["method"] == "closed_form"
    assert len(obj["c"]) == 3


def test_expansion_from_jet_rejects_unknown_method():
    with pytest.raises(InvalidInputError):
        expansion_from_jet(flat_jet(2), method="montecarlo")
