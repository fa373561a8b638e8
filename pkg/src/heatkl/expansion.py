"""Small-time expansion coefficients of the heat-kernel KL divergence.

For a closed d-manifold with heat kernel q (half-Laplacian convention) and
uniform reference measure, the divergence expands as

    KL(t) = -(d/2) ln(2 pi t) + ln vol + c0 + c1 t + c2 t^2 + o(t^2).

Two independent routes to the coefficients are implemented:

* closed forms: c0 = -d/2, c1 = Sc/4, and an explicit curvature polynomial
  for c2 (c2_closed).
* the generic route: assemble the integrand polynomials P_i, Q_i from a
  ParametrixJet and integrate them against the standard Gaussian
  (build_P_Q + c_i_via_wick).

The two share no contraction code; their agreement on random jets is the
central self-check of the package.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError, UnsupportedOrderError
from .parametrix import parametrix_from_jet
from .wick import PolynomialY, integrate_polynomial

__all__ = [
    "ExpansionResult",
    "c0",
    "c1",
    "c2_closed",
    "build_P_Q",
    "c_i_via_wick",
    "kl_asymptotic",
    "expansion_from_jet",
]


@dataclass(frozen=True)
class ExpansionResult:
    """Coefficients c[0..n] for one point, with the method that produced
    them.  vol is None when the input was a bare jet (no manifold given)."""

    d: int
    vol: Optional[float]
    c: tuple
    method: str
    breakdown: Optional[dict] = None

    def to_json_obj(self):
        obj = {
            "d": self.d,
            "vol": self.vol,
            "c": [float(v) for v in self.c],
            "method": self.method,
        }
        if self.breakdown is not None:
            obj["breakdown"] = {k: float(v) for k, v in self.breakdown.items()}
        return obj


def c0(d):
    if d < 1:
        raise InvalidInputError("need d >= 1, got d=%d" % d)
    return -d / 2.0


def c1(jet):
    return float(jet.sc) / 4.0


def c2_closed(jet, breakdown=None):
    """Closed-form c2 as a curvature polynomial.

    c2 = -(3d-22)/480 Sc_;ii - (1/48) Ric.Ric + (d+6)/80 Ric_ij;ij
         - (d-14)/1440 R_iujv R_iujv + (d+6)/720 R_iujv R_juiv

    If breakdown is a dict it receives the five contraction values.
    """
    d = jet.dim
    R = np.asarray(jet.riemann, dtype=np.float64)
    ric = np.asarray(jet.ric, dtype=np.float64)
    sc_hess = np.asarray(jet.sc_hess, dtype=np.float64)
    ric_d2 = np.asarray(jet.ric_d2, dtype=np.float64)

    sc_lap = float(np.trace(sc_hess))
    ric_dot = float(np.sum(ric * ric))
    ric_div2 = float(np.einsum("ijij->", ric_d2))
    riem_dot = float(np.sum(R * R))
    riem_mix = float(np.einsum("iujv,juiv->", R, R))
    if breakdown is not None:
        breakdown.update(sc_lap=sc_lap, ric_dot=ric_dot, ric_div2=ric_div2,
                         riem_dot=riem_dot, riem_mix=riem_mix)
    return (-(3.0 * d - 22.0) / 480.0 * sc_lap
            - ric_dot / 48.0
            + (d + 6.0) / 80.0 * ric_div2
            - (d - 14.0) / 1440.0 * riem_dot
            + (d + 6.0) / 720.0 * riem_mix)


def build_P_Q(pjet, i):
    """The order-i integrand polynomials of the Gaussian-integration step.

    P_i multiplies -|Y|^2/2, Q_i enters plainly:

        i=0:  P = 1,  Q = 0
        i=1:  P = B0 + A2(Y) + E2(Y)
              Q = B0 + A2(Y)
        i=2:  P = C0 + B2(Y) + B0 E2(Y) + A4(Y) + E2(Y) A2(Y) + E4(Y)
              Q = C0 + B0^2/2 + B2(Y) + B0 A2(Y) + B0 E2(Y) + A4(Y)
                  + A2(Y)^2/2 + E2(Y) A2(Y)
    """
    d = pjet.dim
    if i == 0:
        return PolynomialY.constant(d, 1.0), PolynomialY(d)
    if i == 1:
        a2 = PolynomialY.from_quadratic(pjet.a2)
        e2 = PolynomialY.from_quadratic(pjet.e2)
        p = pjet.b0 + a2 + e2
        q = pjet.b0 + a2
        return p, q
    if i == 2:
        a2 = PolynomialY.from_quadratic(pjet.a2)
        e2 = PolynomialY.from_quadratic(pjet.e2)
        a4 = PolynomialY.from_quartic(pjet.a4)
        e4 = PolynomialY.from_quartic(pjet.e4)
        b2 = PolynomialY.from_quadratic(pjet.b2)
        e2a2 = e2 * a2
        p = pjet.c0 + b2 + pjet.b0 * e2 + a4 + e2a2 + e4
        q = (pjet.c0 + 0.5 * pjet.b0 ** 2 + b2 + pjet.b0 * a2 + pjet.b0 * e2
             + a4 + 0.5 * (a2 * a2) + e2a2)
        return p, q
    raise UnsupportedOrderError("Taylor data available only through order 2, got i=%d" % i)


def c_i_via_wick(pjet, i):
    """c_i = -int P_i |Y|^2/2 dgamma + int Q_i dgamma."""
    p, q = build_P_Q(pjet, i)
    return float(-integrate_polynomial(p, "half_norm_sq")
                 + integrate_polynomial(q, "plain"))


def kl_asymptotic(t, d, vol, coeffs, order):
    """Truncated expansion -(d/2) ln(2 pi t) + ln vol + sum_{i<=order} c_i t^i.

    coeffs may be an ExpansionResult or a plain coefficient sequence.
    """
    if t <= 0:
        raise InvalidInputError("t must be positive, got %g" % t)
    if vol is None or vol <= 0:
        raise InvalidInputError("vol must be positive, got %r" % (vol,))
    c = coeffs.c if isinstance(coeffs, ExpansionResult) else coeffs
    if order < 0 or order > 2:
        raise UnsupportedOrderError("order must be in {0,1,2}, got %d" % order)
    if len(c) < order + 1:
        raise InvalidInputError("need %d coefficients for order %d, got %d"
                                % (order + 1, order, len(c)))
    out = -0.5 * d * np.log(2.0 * np.pi * t) + np.log(vol)
    for i in range(order + 1):
        out += float(c[i]) * t ** i
    return float(out)


def expansion_from_jet(jet, method="closed_form", vol=None, want_breakdown=False):
    """ExpansionResult with c0..c2 for a curvature jet.

    method 'closed_form' uses the explicit curvature polynomials; 'wick'
    runs the parametrix + Gaussian-integration route.
    """
    d = jet.dim
    if method == "closed_form":
        bd = {} if want_breakdown else None
        c = (c0(d), c1(jet), c2_closed(jet, breakdown=bd))
        return ExpansionResult(d=d, vol=vol, c=c, method="closed_form", breakdown=bd)
    if method == "wick":
        pjet = parametrix_from_jet(jet)
        c = tuple(c_i_via_wick(pjet, i) for i in range(3))
        return ExpansionResult(d=d, vol=vol, c=c, method="wick")
    raise InvalidInputError("method must be 'closed_form' or 'wick', got %r" % (method,))
