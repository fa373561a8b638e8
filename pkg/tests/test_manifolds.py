import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from heatkl.errors import InvalidInputError
from heatkl.manifolds import (REFERENCE_SPECS, FlatTorus, Product, Sphere,
                              circle_density, curvature_jet, dimension,
                              format_manifold, heat_kernel, parse_manifold,
                              sphere_density, sqrt_det_g_normal, volume)

TWO_PI = 2.0 * math.pi


def test_volumes():
    assert_allclose(volume(Sphere(1, 1.0)), TWO_PI, rtol=1e-15)
    assert_allclose(volume(Sphere(1, 2.0)), 2.0 * TWO_PI, rtol=1e-15)
    assert_allclose(volume(Sphere(2, 1.0)), 4.0 * math.pi, rtol=1e-15)
    assert_allclose(volume(Sphere(2, 3.0)), 36.0 * math.pi, rtol=1e-15)
    assert_allclose(volume(Sphere(3, 1.0)), 2.0 * math.pi ** 2, rtol=1e-15)
    assert_allclose(volume(FlatTorus((2.0, 3.0))), 6.0, rtol=1e-15)
    assert_allclose(volume(Product(Sphere(2, 1.0), FlatTorus((2.0,)))),
                    8.0 * math.pi, rtol=1e-15)


def test_dimensions_and_jets():
    assert dimension(Sphere(3, 1.0)) == 3
    assert dimension(FlatTorus((1.0, 1.0, 1.0))) == 3
    prod = Product(Sphere(2, 2.0), FlatTorus((1.0,)))
    assert dimension(prod) == 3
    jet = curvature_jet(prod)
    assert jet.dim == 3
    assert_allclose(float(jet.sc), 2.0 / 4.0, rtol=1e-14)  # Sc of radius-2 sphere
    # d=1 sphere is intrinsically flat
    assert float(curvature_jet(Sphere(1, 5.0)).sc) == 0.0


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        Sphere(4, 1.0)
    with pytest.raises(InvalidInputError):
        Sphere(2, -1.0)
    with pytest.raises(InvalidInputError):
        FlatTorus(())
    with pytest.raises(InvalidInputError):
        FlatTorus((1.0, -2.0))


@pytest.mark.parametrize("text", [
    "sphere:d=2,r=1",
    "sphere:d=3,r=0.5",
    "sphere:d=1",
    "torus:L=6.283",
    "torus:L=1,2",
    "product(sphere:d=2,r=1;torus:L=6.283)",
    "product(product(sphere:d=1,r=1;sphere:d=2,r=1);torus:L=2,3)",
])
def test_parse_format_round_trip(text):
    spec = parse_manifold(text)
    again = parse_manifold(format_manifold(spec))
    assert again == spec


def test_parse_defaults_and_errors():
    assert parse_manifold("sphere:d=2") == Sphere(2, 1.0)
    assert parse_manifold("torus:L=2,3") == FlatTorus((2.0, 3.0))
    for bad in ("sphere", "sphere:r=1", "klein:L=1", "product(sphere:d=1)",
                "torus:l=2", "sphere:d=two", ""):
        with pytest.raises(InvalidInputError):
            parse_manifold(bad)


def test_sphere1_matches_circle():
    # the d=1 sphere of radius r is the circle of circumference 2 pi r,
    # computed through an entirely different series
    r = 1.3
    s = np.array([0.0, 0.4, 2.0, math.pi * r])
    for t in (0.01, 0.5, 3.0):
        spectral, _, _ = sphere_density(Sphere(1, r), t, s)
        wrapped, _, _ = circle_density(TWO_PI * r, t, s)
        # absolute floor: series are guaranteed to tol * sup only
        sup = max(1.0 / (TWO_PI * r), 1.0 / math.sqrt(TWO_PI * t))
        assert_allclose(spectral, wrapped, rtol=1e-10, atol=1e-11 * sup)


def test_sphere2_matches_legendre_sum():
    # independent oracle: q = sum (2l+1) e^{-l(l+1)t/2} P_l(cos s) / (4 pi)
    t = 0.05
    for s in (0.0, 0.3, 1.5, 3.0):
        coeffs = [(2 * l + 1) * math.exp(-l * (l + 1) * t / 2.0) / (4.0 * math.pi)
                  for l in range(120)]
        expect = np.polynomial.legendre.legval(math.cos(s), coeffs)
        got, _, _ = sphere_density(Sphere(2, 1.0), t, s)
        assert_allclose(got[0], expect, rtol=1e-12, atol=1e-13 / (TWO_PI * t))


def test_sphere3_matches_sine_ratio():
    # on S^3, C_l^1(cos h)/C_l^1(1) = sin((l+1)h)/((l+1) sin h)
    t = 0.08
    vol = 2.0 * math.pi ** 2
    for s in (0.3, 1.0, 2.5):
        expect = sum((l + 1) * math.exp(-l * (l + 2) * t / 2.0) * math.sin((l + 1) * s)
                     for l in range(150)) / (vol * math.sin(s))
        got, _, _ = sphere_density(Sphere(3, 1.0), t, s)
        assert_allclose(got[0], expect, rtol=1e-12, atol=1e-13 / (TWO_PI * t) ** 1.5)


def test_sphere_radius_scaling():
    # q_{S^d_r}(t, s) = r^{-d} q_{S^d_1}(t/r^2, s/r)
    r, t, s = 2.0, 0.1, 0.7
    big, _, _ = sphere_density(Sphere(2, r), t, s)
    unit, _, _ = sphere_density(Sphere(2, 1.0), t / r ** 2, s / r)
    assert_allclose(big[0], unit[0] / r ** 2, rtol=1e-12)


def test_circle_methods_agree_near_crossover():
    L = 1.0
    x = np.linspace(0.0, 0.5, 7)
    for t in (0.1, 0.15, 0.2):
        w, _, _ = circle_density(L, t, x, method="wrapped")
        sp, _, _ = circle_density(L, t, x, method="spectral")
        assert_allclose(w, sp, rtol=1e-12, atol=1e-15)


def test_circle_wraps_argument():
    # exact binary values keep the shifted arguments representable
    L, t = 2.0, 0.3
    a, _, _ = circle_density(L, t, 0.25)
    b, _, _ = circle_density(L, t, 0.25 + 4 * L)
    c, _, _ = circle_density(L, t, 0.25 - L)
    assert a[0] == b[0] == c[0]


def test_tail_bound_is_honest():
    for spec, s in ((Sphere(2, 1.0), 0.4), (Sphere(3, 1.0), 1.0)):
        for t in (0.01, 0.1, 1.0):
            loose = heat_kernel(spec, t, s, tol=1e-6)
            tight = heat_kernel(spec, t, s, tol=1e-13)
            assert abs(loose.q - tight.q) <= loose.tail_bound + 1e-15
            assert loose.terms <= tight.terms


def test_kernel_positivity_near_antipode():
    # worst cancellation point of the alternating Gegenbauer series; raw
    # series noise must stay below the advertised tol * sup accuracy
    for t in (0.005, 0.02, 0.1):
        vals, _, _ = sphere_density(Sphere(2, 1.0), t, math.pi)
        assert vals[0] >= -1e-12 * max(1.0, (TWO_PI * t) ** -1.0)
        ev = heat_kernel(Sphere(2, 1.0), t, math.pi)
        assert ev.q >= 0.0


def test_heat_kernel_product_factorizes():
    s2 = Sphere(2, 1.0)
    t1 = FlatTorus((3.0,))
    prod = Product(s2, t1)
    t = 0.07
    qp = heat_kernel(prod, t, (0.4, 1.1))
    q1 = heat_kernel(s2, t, 0.4)
    q2 = heat_kernel(t1, t, 1.1)
    assert_allclose(qp.q, q1.q * q2.q, rtol=1e-12)
    assert qp.terms == q1.terms + q2.terms


def test_heat_kernel_input_checks():
    with pytest.raises(InvalidInputError):
        heat_kernel(Sphere(2, 1.0), -0.1, 0.3)
    with pytest.raises(InvalidInputError):
        heat_kernel(Sphere(2, 1.0), 0.1, 4.0)  # beyond pi r
    with pytest.raises(InvalidInputError):
        heat_kernel(FlatTorus((2.0,)), 0.1, 1.5)  # beyond L/2
    with pytest.raises(InvalidInputError):
        heat_kernel(Product(Sphere(2, 1.0), FlatTorus((2.0,))), 0.1, (0.3,))


def test_sqrt_det_g_normal_values():
    spec = Sphere(2, 1.0)
    assert sqrt_det_g_normal(spec, 0.0) == 1.0
    for s in (0.1, 1.0, 3.0):
        assert_allclose(sqrt_det_g_normal(spec, s), math.sin(s) / s, rtol=1e-14)
    spec3 = Sphere(3, 2.0)
    for s in (0.5, 2.0):
        u = s / 2.0
        assert_allclose(sqrt_det_g_normal(spec3, s), (math.sin(u) / u) ** 2, rtol=1e-14)
    with pytest.raises(InvalidInputError):
        sqrt_det_g_normal(spec, -0.1)
    with pytest.raises(InvalidInputError):
        sqrt_det_g_normal(spec, math.pi)
    with pytest.raises(InvalidInputError):
        sqrt_det_g_normal(FlatTorus((1.0,)), 0.1)


def test_reference_specs_cover_contract():
    dims = sorted(dimension(s) for s in REFERENCE_SPECS)
    assert len(REFERENCE_SPECS) >= 5
    assert any(isinstance(s, Product) for s in REFERENCE_SPECS)
    assert any(isinstance(s, FlatTorus) for s in REFERENCE_SPECS)
    assert 1 in dims and 2 in dims and 3 in dims
