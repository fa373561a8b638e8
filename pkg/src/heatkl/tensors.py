"""Dense small-dimension curvature tensors and jets.

Conventions
-----------
Indices are 0-based.  The Riemann tensor R[i,j,k,l] carries the usual
symmetries

    R_ijkl = -R_jikl = -R_ijlk = R_klij,

the Ricci tensor is the contraction Ric_uv = sum_i R_iuiv (positive on
spheres), and Sc = trace(Ric).  Space forms use

    R_ijkl = K (delta_ik delta_jl - delta_il delta_jk).

A jet bundles the pointwise curvature data needed by the order-2 expansion:
the Riemann tensor, Sc_;i, Sc_;ij and Ric_ij;kl.  Entries may be floats or
exact rationals (fractions.Fraction); the identity-checking code paths keep
whatever arithmetic they are given.
"""

import json
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "CurvatureJet",
    "ricci_from_riemann",
    "constant_curvature_riemann",
    "constant_curvature_jet",
    "flat_jet",
    "random_curvature_jet",
    "direct_sum_jet",
    "jet_to_json_obj",
    "jet_from_json_obj",
    "save_jet",
    "load_jet",
]


def _as_array(x):
    a = np.asarray(x)
    if a.dtype != object:
        a = np.asarray(a, dtype=np.float64)
    return a


def ricci_from_riemann(R):
    """Contract a Riemann tensor to the Ricci tensor, Ric_uv = sum_i R_iuiv.

    Works for float and exact-rational entries alike (plain loops; the
    dimensions here are tiny).
    """
    R = _as_array(R)
    if R.ndim != 4 or len(set(R.shape)) != 1:
        raise InvalidInputError("riemann tensor must be a d^4 array, got shape %s" % (R.shape,))
    d = R.shape[0]
    ric = np.empty((d, d), dtype=R.dtype)
    for u in range(d):
        for v in range(d):
            s = R[0, u, 0, v]
            for i in range(1, d):
                s = s + R[i, u, i, v]
            ric[u, v] = s
    return ric


def scalar_from_ricci(ric):
    ric = _as_array(ric)
    s = ric[0, 0]
    for i in range(1, ric.shape[0]):
        s = s + ric[i, i]
    return s


def constant_curvature_riemann(K, d):
    """Space-form curvature tensor R_ijkl = K(d_ik d_jl - d_il d_jk).

    K may be a float or a Fraction; the entries inherit its type, so the
    exact-rational identity tests can run without rounding.
    """
    if d < 2:
        raise InvalidInputError("space forms need d >= 2, got d=%d" % d)
    dtype = object if isinstance(K, Fraction) else np.float64
    zero = K * 0
    R = np.full((d, d, d, d), zero, dtype=dtype)
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            R[i, j, i, j] = K
            R[i, j, j, i] = -K
    return R


@dataclass(frozen=True)
class CurvatureJet:
    """Pointwise curvature data for the order-2 expansion.

    riemann : (d,d,d,d) array, R_ijkl
    ric     : (d,d) array, derived contraction
    sc      : scalar, derived trace
    sc_grad : (d,) array, Sc_;i
    sc_hess : (d,d) array, Sc_;ij
    ric_d2  : (d,d,d,d) array, Ric_ij;kl (symmetric in i,j)
    bianchi : whether the first Bianchi identity is asserted to hold
    """

    riemann: np.ndarray
    ric: np.ndarray
    sc: object
    sc_grad: np.ndarray
    sc_hess: np.ndarray
    ric_d2: np.ndarray
    bianchi: bool = False

    def __post_init__(self):
        for name in ("riemann", "ric", "sc_grad", "sc_hess", "ric_d2"):
            a = getattr(self, name)
            if isinstance(a, np.ndarray):
                a.flags.writeable = False

    @property
    def dim(self):
        return self.riemann.shape[0]

    @classmethod
    def from_data(cls, riemann, sc_grad=None, sc_hess=None, ric_d2=None, bianchi=False):
        """Build a jet from the primary fields, deriving ric and sc.

        Omitted derivative tensors default to zero (covariantly constant
        curvature, as on space forms).  sc_hess defaults to the first-pair
        trace of ric_d2 so the derived-trace invariant holds by construction.
        """
        riemann = _as_array(riemann)
        d = riemann.shape[0]
        dtype = riemann.dtype
        if sc_grad is None:
            sc_grad = np.zeros(d, dtype=dtype)
        if ric_d2 is None:
            ric_d2 = np.zeros((d, d, d, d), dtype=dtype)
        sc_grad = _as_array(sc_grad)
        ric_d2 = _as_array(ric_d2)
        if sc_hess is None:
            sc_hess = np.trace(ric_d2, axis1=0, axis2=1)
        sc_hess = _as_array(sc_hess)
        ric = ricci_from_riemann(riemann)
        sc = scalar_from_ricci(ric)
        return cls(riemann=riemann, ric=ric, sc=sc, sc_grad=sc_grad,
                   sc_hess=sc_hess, ric_d2=ric_d2, bianchi=bianchi)

    def validate(self, tol=1e-10):
        """Check all jet invariants; raise InvalidInputError on violation."""
        R = self.riemann
        d = self.dim
        shapes = [(R, (d, d, d, d)), (self.ric, (d, d)), (self.sc_grad, (d,)),
                  (self.sc_hess, (d, d)), (self.ric_d2, (d, d, d, d))]
        for a, shape in shapes:
            if a.shape != shape:
                raise InvalidInputError("jet field has shape %s, expected %s" % (a.shape, shape))

        def check(err, what):
            m = float(max(abs(x) for x in np.asarray(err, dtype=object).flat)) if err.dtype == object \
                else float(np.max(np.abs(err)))
            if m > tol:
                raise InvalidInputError("jet invariant violated: %s (max %.3e > %.1e)" % (what, m, tol))

        check(R + np.transpose(R, (1, 0, 2, 3)), "R_ijkl = -R_jikl")
        check(R + np.transpose(R, (0, 1, 3, 2)), "R_ijkl = -R_ijlk")
        check(R - np.transpose(R, (2, 3, 0, 1)), "R_ijkl = R_klij")
        check(self.ric - ricci_from_riemann(R), "ric = contraction of riemann")
        sc_err = np.asarray([[self.sc - scalar_from_ricci(self.ric)]])
        check(sc_err, "sc = trace(ric)")
        check(self.ric_d2 - np.transpose(self.ric_d2, (1, 0, 2, 3)), "ric_d2 symmetric in i,j")
        check(np.trace(self.ric_d2, axis1=0, axis2=1) - self.sc_hess,
              "sum_i ric_d2[iikl] = sc_hess[kl]")
        check(self.sc_hess - self.sc_hess.T, "sc_hess symmetric")
        if self.bianchi:
            check(_cyclic_sum(R), "first Bianchi identity")
        return self


def _cyclic_sum(R):
    """R_ijkl + R_iklj + R_iljk as an array (zero iff first Bianchi holds)."""
    return R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))


def _project_pair_symmetries(R):
    # Sequential group averaging; each step preserves the previous exact
    # symmetries because x - y and y - x are exact negations in IEEE floats.
    R = (R - np.transpose(R, (1, 0, 2, 3))) / 2.0
    R = (R - np.transpose(R, (0, 1, 3, 2))) / 2.0
    R = (R + np.transpose(R, (2, 3, 0, 1))) / 2.0
    return R


def constant_curvature_jet(K, d, bianchi=True):
    """Jet of a space form: R = K(dd - dd), all derivative tensors zero."""
    return CurvatureJet.from_data(constant_curvature_riemann(K, d), bianchi=bianchi)


def flat_jet(d):
    """All-zero jet in dimension d >= 1."""
    if d < 1:
        raise InvalidInputError("need d >= 1, got d=%d" % d)
    return CurvatureJet.from_data(np.zeros((d, d, d, d)), bianchi=True)


def random_curvature_jet(seed, d, enforce_bianchi=False):
    """Deterministic random jet with all symmetry invariants enforced.

    Entries are sampled i.i.d. standard normal and projected onto the
    symmetry class by group averaging.  With enforce_bianchi the cyclic
    average is subtracted from the Riemann tensor (an exact projection,
    since the cyclic sum of a pair-symmetric tensor is totally
    antisymmetric), and ric_d2 receives a trace adjustment so that the
    contracted second Bianchi identity sum_ij ric_d2[ijij] = (1/2) sum_i
    sc_hess[ii] holds as well.
    """
    if d < 2:
        raise InvalidInputError("need d >= 2, got d=%d" % d)
    rng = np.random.default_rng(seed)
    R = _project_pair_symmetries(rng.standard_normal((d, d, d, d)))
    if enforce_bianchi:
        R = R - _cyclic_sum(R) / 3.0
        # re-project: the subtraction can disturb the symmetries by an ulp
        R = _project_pair_symmetries(R)

    B = rng.standard_normal((d, d, d, d))
    B = (B + np.transpose(B, (1, 0, 2, 3))) / 2.0
    B = (B + np.transpose(B, (0, 1, 3, 2))) / 2.0
    if enforce_bianchi:
        # Delta has zero first-pair trace, so sc_hess is unaffected, and its
        # ijij-trace is (d^2+d)/2 - 1 > 0, so one scalar shift suffices.
        delta = np.zeros((d, d, d, d))
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    for l in range(d):
                        delta[i, j, k, l] = (
                            ((i == k) * (j == l) + (i == l) * (j == k)) / 2.0
                            - (i == j) * (k == l) / d
                        )
        v = np.einsum("ijij->", B)
        w = 0.5 * np.einsum("iijj->", B)
        B = B + (w - v) / ((d * d + d) / 2.0 - 1.0) * delta

    sc_grad = rng.standard_normal(d)
    return CurvatureJet.from_data(R, sc_grad=sc_grad, ric_d2=B, bianchi=enforce_bianchi)


def direct_sum_jet(j1, j2):
    """Block direct sum of two jets (curvature of a product manifold)."""
    d1, d2 = j1.dim, j2.dim
    d = d1 + d2
    if j1.riemann.dtype == object or j2.riemann.dtype == object:
        dtype = object
    else:
        dtype = np.float64
    R = np.zeros((d, d, d, d), dtype=dtype)
    ric_d2 = np.zeros((d, d, d, d), dtype=dtype)
    if dtype == object:
        R[...] = 0
        ric_d2[...] = 0
    R[:d1, :d1, :d1, :d1] = j1.riemann
    R[d1:, d1:, d1:, d1:] = j2.riemann
    ric_d2[:d1, :d1, :d1, :d1] = j1.ric_d2
    ric_d2[d1:, d1:, d1:, d1:] = j2.ric_d2
    sc_grad = np.concatenate([np.asarray(j1.sc_grad), np.asarray(j2.sc_grad)])
    return CurvatureJet.from_data(R, sc_grad=sc_grad, ric_d2=ric_d2,
                                  bianchi=j1.bianchi and j2.bianchi)


def to_float_jet(jet):
    """Convert a possibly exact-rational jet to double precision."""
    return CurvatureJet.from_data(
        np.asarray(jet.riemann, dtype=np.float64),
        sc_grad=np.asarray(jet.sc_grad, dtype=np.float64),
        sc_hess=np.asarray(jet.sc_hess, dtype=np.float64),
        ric_d2=np.asarray(jet.ric_d2, dtype=np.float64),
        bianchi=jet.bianchi,
    )


def _sparse_entries(a):
    out = []
    for idx in np.ndindex(*a.shape):
        v = a[idx]
        if v != 0:
            out.append(list(idx) + [float(v)])
    return out


def _dense_from_sparse(entries, shape, what):
    a = np.zeros(shape)
    for row in entries:
        *idx, v = row
        idx = tuple(int(i) for i in idx)
        if len(idx) != len(shape) or any(i < 0 or i >= n for i, n in zip(idx, shape)):
            raise InvalidInputError("bad %s index %s for shape %s" % (what, idx, shape))
        a[idx] = float(v)
    return a


def jet_to_json_obj(jet):
    """Serialize a jet: sparse [i,j,k,l,value] lists for the 4-tensors,
    dense row-major list for sc_hess.  Derived fields are not stored."""
    jet = to_float_jet(jet) if jet.riemann.dtype == object else jet
    return {
        "dim": jet.dim,
        "riemann": _sparse_entries(np.asarray(jet.riemann)),
        "sc_grad": [float(v) for v in jet.sc_grad],
        "sc_hess": [float(v) for v in np.asarray(jet.sc_hess).ravel()],
        "ric_d2": _sparse_entries(np.asarray(jet.ric_d2)),
    }


def jet_from_json_obj(obj, tol=1e-8):
    """Deserialize and validate a jet.

    ric and sc are always recomputed; if the file carries its own "ric" or
    "sc" they must agree with the recomputed values or the file is rejected.
    """
    try:
        d = int(obj["dim"])
        riemann = _dense_from_sparse(obj["riemann"], (d, d, d, d), "riemann")
        sc_grad = np.asarray([float(v) for v in obj.get("sc_grad", [0.0] * d)])
        hess_list = obj.get("sc_hess")
        ric_d2 = _dense_from_sparse(obj.get("ric_d2", []), (d, d, d, d), "ric_d2")
        sc_hess = (np.asarray([float(v) for v in hess_list]).reshape(d, d)
                   if hess_list is not None else None)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError("malformed jet object: %s" % exc) from exc
    jet = CurvatureJet.from_data(riemann, sc_grad=sc_grad, sc_hess=sc_hess,
                                 ric_d2=ric_d2, bianchi=bool(obj.get("bianchi", False)))
    if "ric" in obj:
        given = _dense_from_sparse(obj["ric"], (d, d), "ric")
        if np.max(np.abs(given - np.asarray(jet.ric, dtype=float))) > tol:
            raise InvalidInputError("jet file supplies a ric inconsistent with riemann")
    if "sc" in obj and abs(float(obj["sc"]) - float(jet.sc)) > tol:
        raise InvalidInputError("jet file supplies an sc inconsistent with riemann")
    jet.validate(tol=tol)
    if not jet.bianchi:
        # record whether the loaded tensor happens to satisfy first Bianchi
        cyc = float(np.max(np.abs(_cyclic_sum(jet.riemann))))
        if cyc <= tol:
            jet = replace(jet, bianchi=True)
    return jet


def save_jet(jet, path):
    with open(path, "w") as fh:
        json.dump(jet_to_json_obj(jet), fh, indent=1)
        fh.write("\n")


def load_jet(path):
    with open(path) as fh:
        return jet_from_json_obj(json.load(fh))
