"""Reference manifolds with exactly known heat kernels.

All kernels use the half-Laplacian (Brownian motion) normalization
dq/dt = (1/2) Laplacian q: spectral eigenvalues are halved relative to the
analyst's convention and the flat-space density at time t is the Gaussian
of variance t.

Supported specs: round spheres S^d (d = 1..3) of any radius, flat tori with
arbitrary axis lengths, and binary products of specs.  Kernel values depend
only on per-factor geodesic distances; products take one distance per
sphere factor and one per torus axis, flattened left to right.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import _series
from .errors import AccuracyError, InvalidInputError
from .tensors import constant_curvature_jet, direct_sum_jet, flat_jet

__all__ = [
    "Sphere",
    "FlatTorus",
    "Product",
    "KernelEval",
    "dimension",
    "volume",
    "coordinate_arity",
    "curvature_jet",
    "heat_kernel",
    "sphere_density",
    "circle_density",
    "sqrt_det_g_normal",
    "parse_manifold",
    "format_manifold",
    "REFERENCE_SPECS",
]

_MAX_TERMS = 500000
_TORUS_CROSSOVER = 0.15  # switch wrapped -> spectral at t/L^2 = 0.15


@dataclass(frozen=True)
class Sphere:
    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 1 or self.dim > 3:
            raise InvalidInputError("sphere dimension must be 1..3, got %d" % self.dim)
        if self.radius <= 0:
            raise InvalidInputError("sphere radius must be positive, got %g" % self.radius)


@dataclass(frozen=True)
class FlatTorus:
    lengths: Tuple[float, ...]

    def __post_init__(self):
        ls = tuple(float(L) for L in self.lengths)
        if not ls or any(L <= 0 for L in ls):
            raise InvalidInputError("torus lengths must be positive, got %r" % (self.lengths,))
        object.__setattr__(self, "lengths", ls)


@dataclass(frozen=True)
class Product:
    left: object
    right: object


@dataclass(frozen=True)
class KernelEval:
    """One kernel evaluation with truncation diagnostics.

    tail_bound is an absolute bound on the truncation error; heat_kernel
    guarantees tail_bound <= tol * max(1/vol, (2 pi t)^{-d/2}) (the sup
    scale of the kernel).
    """

    t: float
    s: object
    q: float
    terms: int
    tail_bound: float


def dimension(spec):
    if isinstance(spec, Sphere):
        return spec.dim
    if isinstance(spec, FlatTorus):
        return len(spec.lengths)
    if isinstance(spec, Product):
        return dimension(spec.left) + dimension(spec.right)
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


def volume(spec):
    if isinstance(spec, Sphere):
        d, r = spec.dim, spec.radius
        return 2.0 * math.pi ** ((d + 1) / 2.0) * r ** d / math.gamma((d + 1) / 2.0)
    if isinstance(spec, FlatTorus):
        return float(np.prod(spec.lengths))
    if isinstance(spec, Product):
        return volume(spec.left) * volume(spec.right)
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


def coordinate_arity(spec):
    """Number of scalar distance coordinates heat_kernel expects."""
    if isinstance(spec, Sphere):
        return 1
    if isinstance(spec, FlatTorus):
        return len(spec.lengths)
    if isinstance(spec, Product):
        return coordinate_arity(spec.left) + coordinate_arity(spec.right)
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


def curvature_jet(spec):
    """Curvature jet at any point (all our specs are homogeneous)."""
    if isinstance(spec, Sphere):
        if spec.dim == 1:
            return flat_jet(1)
        return constant_curvature_jet(1.0 / spec.radius ** 2, spec.dim)
    if isinstance(spec, FlatTorus):
        return flat_jet(len(spec.lengths))
    if isinstance(spec, Product):
        return direct_sum_jet(curvature_jet(spec.left), curvature_jet(spec.right))
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


def _kernel_sup(spec, t):
    return max(1.0 / volume(spec), (2.0 * math.pi * t) ** (-dimension(spec) / 2.0))


def _sphere_weights(d, r, t, tol_abs, vol):
    """Series weights w_l = m_l e^{-l(l+d-1) t/(2 r^2)} / (vol C_l(1)) and a
    rigorous tail bound (|C_l(x)| <= C_l(1) on [-1,1])."""
    alpha = (d - 1) / 2.0
    theta = t / (2.0 * r * r)

    def mult(l):
        # eigenspace dimension of the l-th band on S^d
        if l == 0:
            return 1.0
        if d == 1:
            return 2.0
        return (2 * l + d - 1) / (l + d - 1) * math.comb(l + d - 1, l)

    weights = []
    cl = 1.0
    l = 0
    while True:
        weights.append(mult(l) * math.exp(-l * (l + d - 1) * theta) / (vol * cl))
        nxt = mult(l + 1) * math.exp(-(l + 1) * (l + d) * theta) / vol
        nxt2 = mult(l + 2) * math.exp(-(l + 2) * (l + 1 + d) * theta) / vol
        rho = nxt2 / nxt if nxt > 0 else 0.0
        if rho < 1.0 and nxt * 10.0 / (1.0 - rho) <= tol_abs:
            tail = nxt * 10.0 / (1.0 - rho)
            return np.asarray(weights), alpha, tail
        l += 1
        if l > _MAX_TERMS:
            raise AccuracyError("sphere series tolerance unreachable within term cap",
                                estimate=nxt)
        if alpha == 0.0:
            cl = 1.0
        else:
            cl = cl * (l + 2.0 * alpha - 1.0) / l


def sphere_density(spec, t, s, tol=1e-12):
    """Heat kernel values on a sphere at geodesic distances s (array ok).

    Returns (values, terms, tail_bound); the bound is absolute and at most
    tol * max(1/vol, (2 pi t)^{-d/2}).
    """
    if t <= 0:
        raise InvalidInputError("t must be positive, got %g" % t)
    d, r = spec.dim, spec.radius
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    if np.any(s_arr < 0) or np.any(s_arr > math.pi * r + 1e-12):
        raise InvalidInputError("sphere distance out of range [0, pi r]")
    vol = volume(spec)
    tol_abs = tol * _kernel_sup(spec, t)
    weights, alpha, tail = _sphere_weights(d, r, t, tol_abs, vol)
    x = np.cos(s_arr / r)
    np.clip(x, -1.0, 1.0, out=x)
    vals = _series.gegenbauer_sum(np.ascontiguousarray(x), np.ascontiguousarray(weights), alpha)
    return vals, len(weights), tail


def circle_density(L, t, x, tol=1e-12, method="auto"):
    """Heat kernel values on a circle of circumference L at offsets x.

    x is wrapped into the fundamental domain (the density is periodic).
    method 'wrapped' sums Gaussian images, 'spectral' the dual cosine
    series; 'auto' switches at t/L^2 = 0.15.  Returns (values, terms,
    tail_bound).
    """
    if t <= 0:
        raise InvalidInputError("t must be positive, got %g" % t)
    if L <= 0:
        raise InvalidInputError("circumference must be positive, got %g" % L)
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    x_arr = x_arr - L * np.round(x_arr / L)
    scale = max(1.0 / L, 1.0 / math.sqrt(2.0 * math.pi * t))
    tol_abs = min(tol, 1e-15) * scale
    if method == "auto":
        method = "wrapped" if t / (L * L) < _TORUS_CROSSOVER else "spectral"

    if method == "wrapped":
        norm = 1.0 / math.sqrt(2.0 * math.pi * t)
        n = 1
        while True:
            # images at |n| >= N+1 lie at distance >= (N+1/2) L
            first = 2.0 * norm * math.exp(-((n + 0.5) * L) ** 2 / (2.0 * t))
            nxt = 2.0 * norm * math.exp(-((n + 1.5) * L) ** 2 / (2.0 * t))
            rho = nxt / first if first > 0 else 0.0
            if first == 0.0 or (rho < 1.0 and first * 10.0 / (1.0 - rho) <= tol_abs):
                tail = first * 10.0 / (1.0 - rho) if first > 0 else 0.0
                break
            n += 1
            if n > 10000:
                raise AccuracyError("wrapped sum tolerance unreachable", estimate=first)
        vals = _series.wrapped_gaussian_sum(np.ascontiguousarray(x_arr), L, t, n)
        return vals, 2 * n + 1, tail

    if method == "spectral":
        k = 1
        weights = [1.0 / L]
        while True:
            w = 2.0 / L * math.exp(-2.0 * math.pi ** 2 * k * k * t / (L * L))
            weights.append(w)
            nxt = 2.0 / L * math.exp(-2.0 * math.pi ** 2 * (k + 1) ** 2 * t / (L * L))
            nxt2 = 2.0 / L * math.exp(-2.0 * math.pi ** 2 * (k + 2) ** 2 * t / (L * L))
            rho = nxt2 / nxt if nxt > 0 else 0.0
            if nxt == 0.0 or (rho < 1.0 and nxt * 10.0 / (1.0 - rho) <= tol_abs):
                tail = nxt * 10.0 / (1.0 - rho) if nxt > 0 else 0.0
                break
            k += 1
            if k > _MAX_TERMS:
                raise AccuracyError("spectral sum tolerance unreachable", estimate=nxt)
        phi = np.cos(2.0 * math.pi * x_arr / L)
        vals = _series.gegenbauer_sum(np.ascontiguousarray(phi),
                                      np.ascontiguousarray(np.asarray(weights)), 0.0)
        return vals, len(weights), tail

    raise InvalidInputError("method must be auto|wrapped|spectral, got %r" % (method,))


def _flatten_coords(spec, s):
    arity = coordinate_arity(spec)
    if np.isscalar(s):
        coords = (float(s),)
    else:
        coords = tuple(float(v) for v in s)
    if len(coords) != arity:
        raise InvalidInputError("spec expects %d distance coordinates, got %d"
                                % (arity, len(coords)))
    return coords


def _eval_factors(spec, t, coords, tol):
    """Multiply per-factor kernels; returns (q, terms, tail_bound)."""
    if isinstance(spec, Sphere):
        s = coords[0]
        vals, terms, tail = sphere_density(spec, t, s, tol)
        return float(vals[0]), terms, tail
    if isinstance(spec, FlatTorus):
        q = 1.0
        terms = 0
        tail = 0.0
        for L, x in zip(spec.lengths, coords):
            if abs(x) > L / 2.0 + 1e-12:
                raise InvalidInputError("torus distance |%g| exceeds L/2 = %g" % (x, L / 2.0))
            vals, n, tl = circle_density(L, t, x, tol)
            # first-order combination; factor sups bound the other terms
            tail = tail * max(1.0 / L, 1.0 / math.sqrt(2 * math.pi * t)) + tl * abs(q)
            q *= float(vals[0])
            terms += n
        return q, terms, tail
    if isinstance(spec, Product):
        nl = coordinate_arity(spec.left)
        ql, tl_terms, tl_tail = _eval_factors(spec.left, t, coords[:nl], tol)
        qr, tr_terms, tr_tail = _eval_factors(spec.right, t, coords[nl:], tol)
        supl = _kernel_sup(spec.left, t)
        supr = _kernel_sup(spec.right, t)
        tail = tl_tail * supr + tr_tail * supl + tl_tail * tr_tail
        return ql * qr, tl_terms + tr_terms, tail
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


def heat_kernel(spec, t, s, tol=1e-12):
    """Evaluate the heat kernel at time t and geodesic distance(s) s.

    s is a scalar for single-factor specs, else one distance per sphere
    factor and per torus axis (flattened left to right).  The returned
    KernelEval carries the term count and an absolute tail bound no larger
    than tol times the kernel sup scale.
    """
    if t <= 0:
        raise InvalidInputError("t must be positive, got %g" % t)
    coords = _flatten_coords(spec, s)
    # per-factor tolerance split keeps the product bound within tol overall
    nfac = max(1, _count_factors(spec))
    q, terms, tail = _eval_factors(spec, t, coords, tol / (2.0 * nfac))
    return KernelEval(t=float(t), s=s if np.isscalar(s) else tuple(coords),
                      q=max(float(q), 0.0), terms=terms, tail_bound=float(tail))


def _count_factors(spec):
    if isinstance(spec, Sphere):
        return 1
    if isinstance(spec, FlatTorus):
        return len(spec.lengths)
    if isinstance(spec, Product):
        return _count_factors(spec.left) + _count_factors(spec.right)
    return 1


def sqrt_det_g_normal(spec, s):
    """Space-form volume density (sin(s/r)/(s/r))^{d-1} in normal
    coordinates; the removable singularity at s=0 evaluates to 1."""
    if not isinstance(spec, Sphere):
        raise InvalidInputError("sqrt_det_g_normal is defined for spheres, got %r" % (spec,))
    r = spec.radius
    if s < 0 or s >= math.pi * r:
        raise InvalidInputError("s must lie in [0, pi r), got %g" % s)
    if s == 0:
        return 1.0
    u = s / r
    return (math.sin(u) / u) ** (spec.dim - 1)


def parse_manifold(text):
    """Parse the compact spec grammar.

    sphere:d=2,r=1      torus:L=6.283[,L2,...]      product(spec;spec)
    """
    text = text.strip()
    if text.startswith("product(") and text.endswith(")"):
        inner = text[len("product("):-1]
        depth = 0
        for pos, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == ";" and depth == 0:
                return Product(parse_manifold(inner[:pos]), parse_manifold(inner[pos + 1:]))
        raise InvalidInputError("product spec needs two ;-separated factors: %r" % text)
    if ":" not in text:
        raise InvalidInputError("unparseable manifold spec: %r" % text)
    kind, _, params = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "sphere":
            kv = dict(p.split("=", 1) for p in params.split(",") if p)
            d = int(kv["d"])
            r = float(kv.get("r", 1.0))
            return Sphere(dim=d, radius=r)
        if kind == "torus":
            if not params.startswith("L="):
                raise InvalidInputError("torus spec needs L=..., got %r" % text)
            lengths = tuple(float(v) for v in params[2:].split(","))
            return FlatTorus(lengths=lengths)
    except InvalidInputError:
        raise
    except (KeyError, ValueError) as exc:
        raise InvalidInputError("unparseable manifold spec %r: %s" % (text, exc)) from exc
    raise InvalidInputError("unknown manifold kind %r" % kind)


def format_manifold(spec):
    if isinstance(spec, Sphere):
        return "sphere:d=%d,r=%.17g" % (spec.dim, spec.radius)
    if isinstance(spec, FlatTorus):
        return "torus:L=" + ",".join("%.17g" % L for L in spec.lengths)
    if isinstance(spec, Product):
        return "product(%s;%s)" % (format_manifold(spec.left), format_manifold(spec.right))
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


_TWO_PI = 2.0 * math.pi

REFERENCE_SPECS = (
    Sphere(1, 1.0),
    Sphere(2, 1.0),
    Sphere(3, 1.0),
    Sphere(2, 2.0),
    FlatTorus((_TWO_PI,)),
    FlatTorus((_TWO_PI, _TWO_PI)),
    Product(Sphere(2, 1.0), Sphere(1, 1.0)),
)
