"""Taylor coefficient tensors of the heat parametrix and volume density.

For a point z with curvature jet data, normal coordinates y, and the
half-Laplacian (Brownian motion) normalization, the square root of the
metric determinant and the first parametrix coefficients expand as

    sqrt(det g(y)) = 1 + E2(y) + E4(y) + odd terms
    u0(y)          = 1 + A2(y) + A4(y) + odd terms
    u1(y)          = B0 + B1(y) + B2(y) + ...
    u2(0)          = C0

where X(y) denotes contraction of the coefficient array with copies of y.
The quartic arrays A4 and E4 are stored exactly as derived (not
symmetrized); downstream contractions use the iijj/ijij/ijji patterns of
the as-written arrays, so symmetrizing here would silently change
intermediate quantities while preserving only their sum.

The odd coefficient arrays A3 and E3 have no closed formulas at this order
and integrate to zero against the Gaussian; they are structurally zero
here and not represented.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ParametrixJet",
    "parametrix_from_jet",
    "sqrt_det_g_taylor",
    "parametrix_to_json_obj",
    "parametrix_from_json_obj",
]


@dataclass(frozen=True)
class ParametrixJet:
    """Coefficient arrays (e2, a2, b2 symmetric matrices; e4, a4 quartic
    arrays as-written; b1 a vector; b0, c0 scalars)."""

    e2: np.ndarray
    e4: np.ndarray
    a2: np.ndarray
    a4: np.ndarray
    b0: float
    b1: np.ndarray
    b2: np.ndarray
    c0: float

    def __post_init__(self):
        for name in ("e2", "e4", "a2", "a4", "b1", "b2"):
            a = getattr(self, name)
            if isinstance(a, np.ndarray):
                a.flags.writeable = False

    @property
    def dim(self):
        return self.e2.shape[0]


def parametrix_from_jet(jet):
    """Populate all coefficient arrays from a curvature jet.

    e2 = -ric/6
    e4_ijkl = (1/144) (-(18/5) ric_ij;kl + 2 ric_ij ric_kl
                       - (4/5) sum_uv R_iujv R_kulv)
    a2 = ric/12
    a4_ijkl = (1/24) ((3/10) ric_ij;kl + (1/12) ric_ij ric_kl
                      + (1/15) sum_uv R_iujv R_kulv)
    b0 = sc/12
    b1_i = sc_;i/24
    b2_ij = (1/720) (9 sc_;ij + 3 ric_ij;uu + 5 sc ric_ij
                     - 4 ric_iu ric_ju + 2 ric_uv R_iujv + 2 R_iuvw R_juvw)
    c0 = (1/1440) (9 sc_;ii + 3 ric_ii;uu + 5 sc^2 - 4 ric.ric
                   + 2 ric_uv R_iuiv + 2 R.R)
    """
    jet.validate()
    R = np.asarray(jet.riemann, dtype=np.float64)
    ric = np.asarray(jet.ric, dtype=np.float64)
    sc = float(jet.sc)
    sc_grad = np.asarray(jet.sc_grad, dtype=np.float64)
    sc_hess = np.asarray(jet.sc_hess, dtype=np.float64)
    ric_d2 = np.asarray(jet.ric_d2, dtype=np.float64)

    mixed = np.einsum("iujv,kulv->ijkl", R, R)
    ric_lap = np.einsum("ijuu->ij", ric_d2)
    ric_sq = ric @ ric
    ric_mix = np.einsum("uv,iujv->ij", ric, R)
    riem_sq = np.einsum("iuvw,juvw->ij", R, R)

    e2 = -ric / 6.0
    a2 = ric / 12.0
    e4 = (-(18.0 / 5.0) * ric_d2 + 2.0 * np.einsum("ij,kl->ijkl", ric, ric)
          - (4.0 / 5.0) * mixed) / 144.0
    a4 = ((3.0 / 10.0) * ric_d2 + (1.0 / 12.0) * np.einsum("ij,kl->ijkl", ric, ric)
          + (1.0 / 15.0) * mixed) / 24.0
    b0 = sc / 12.0
    b1 = sc_grad / 24.0
    b2 = (9.0 * sc_hess + 3.0 * ric_lap + 5.0 * sc * ric
          - 4.0 * ric_sq + 2.0 * ric_mix + 2.0 * riem_sq) / 720.0
    c0 = (9.0 * np.trace(sc_hess) + 3.0 * np.trace(ric_lap) + 5.0 * sc * sc
          - 4.0 * float(np.sum(ric * ric)) + 2.0 * float(np.trace(ric_mix))
          + 2.0 * float(np.sum(R * R))) / 1440.0
    return ParametrixJet(e2=e2, e4=e4, a2=a2, a4=a4, b0=b0, b1=b1, b2=b2, c0=float(c0))


def sqrt_det_g_taylor(pjet, y):
    """1 + E2(y) + E4(y), the even volume-density Taylor polynomial."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (pjet.dim,):
        raise InvalidInputError("y must be a %d-vector, got shape %s" % (pjet.dim, y.shape))
    e2 = float(y @ pjet.e2 @ y)
    e4 = float(np.einsum("ijkl,i,j,k,l->", pjet.e4, y, y, y, y))
    return 1.0 + e2 + e4


def _sparse(a):
    out = []
    a = np.asarray(a)
    for idx in np.ndindex(*a.shape):
        v = a[idx]
        if v != 0:
            out.append(list(idx) + [float(v)])
    return out


def _dense(entries, shape):
    a = np.zeros(shape)
    for row in entries:
        *idx, v = row
        idx = tuple(int(i) for i in idx)
        if any(i < 0 or i >= n for i, n in zip(idx, shape)) or len(idx) != len(shape):
            raise InvalidInputError("bad index %s for shape %s" % (idx, shape))
        a[idx] = float(v)
    return a


def parametrix_to_json_obj(pjet):
    d = pjet.dim
    return {
        "dim": d,
        "e2": _sparse(pjet.e2),
        "e4": _sparse(pjet.e4),
        "a2": _sparse(pjet.a2),
        "a4": _sparse(pjet.a4),
        "b0": float(pjet.b0),
        "b1": [float(v) for v in pjet.b1],
        "b2": _sparse(pjet.b2),
        "c0": float(pjet.c0),
    }


def parametrix_from_json_obj(obj):
    try:
        d = int(obj["dim"])
        return ParametrixJet(
            e2=_dense(obj["e2"], (d, d)),
            e4=_dense(obj["e4"], (d, d, d, d)),
            a2=_dense(obj["a2"], (d, d)),
            a4=_dense(obj["a4"], (d, d, d, d)),
            b0=float(obj["b0"]),
            b1=np.asarray([float(v) for v in obj["b1"]], dtype=np.float64),
            b2=_dense(obj["b2"], (d, d)),
            c0=float(obj["c0"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError("malformed parametrix object: %s" % exc) from exc
