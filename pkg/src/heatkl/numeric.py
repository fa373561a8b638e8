"""Numeric KL divergence and small-t coefficient extraction.

All reference kernels are isotropic, so the KL integral collapses to one
radial dimension per factor: spheres integrate q ln(q vol) against the
area element A(s) = surf(S^{d-1}) r^{d-1} sin^{d-1}(s/r) over [0, pi r],
torus axes integrate over [0, L/2] with A = 2, and product specs sum the
factor divergences (an exact identity for product measures, which the
tensor-quadrature oracle below cross-checks).

Quadrature is composite Gauss-Legendre with panels that start at width
origin_scale * sqrt(t) near s = 0 (where q ln q varies on the sqrt(t)
scale) and grow geometrically to a cap.  Every result is recomputed with
doubled nodes; the difference is the error estimate and must stay within
the configured tolerance.
"""

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .errors import AccuracyError, ConditioningError, InvalidInputError
from .expansion import c0, c1, c2_closed, kl_asymptotic
from .manifolds import (FlatTorus, Product, Sphere, circle_density, curvature_jet,
                        dimension, sphere_density, volume)

__all__ = [
    "QuadratureConfig",
    "SweepRow",
    "FitReport",
    "kl_numeric",
    "kernel_mass",
    "product_kl_tensor",
    "sweep",
    "fit_coefficients",
    "render_sweep_csv",
    "parse_sweep_csv",
]

_Q_FLOOR = 1e-300  # ln argument clamp at antipodal underflow
_KERNEL_TOL = 1e-14  # series truncation used inside quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    """panels: far-region panel count; nodes: Gauss-Legendre nodes per
    panel; origin_scale: first-panel width in multiples of sqrt(t);
    tol: target absolute accuracy of the KL integral."""

    panels: int = 16
    nodes: int = 32
    origin_scale: float = 1.0
    tol: float = 1e-9

    def __post_init__(self):
        if self.panels < 1 or self.nodes < 2 or self.origin_scale <= 0:
            raise InvalidInputError("quadrature parameters must be positive")
        if not (0.0 < self.tol <= 1e-4):
            raise InvalidInputError("tolerance must lie in (0, 1e-4], got %g" % self.tol)


@lru_cache(maxsize=None)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_edges(smax, t, cfg):
    h = min(cfg.origin_scale * math.sqrt(t), smax / cfg.panels)
    cap = smax / cfg.panels
    edges = [0.0]
    while edges[-1] < smax:
        edges.append(min(edges[-1] + h, smax))
        h = min(h * 1.5, cap)
    return np.asarray(edges)


def _panel_nodes(smax, t, cfg, nodes):
    x, w = _leggauss(nodes)
    edges = _panel_edges(smax, t, cfg)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return s, ws


def _surface_area_unit(dm1):
    # area of the unit sphere S^{dm1}
    return 2.0 * math.pi ** ((dm1 + 1) / 2.0) / math.gamma((dm1 + 1) / 2.0)


def _kl_once(spec, t, cfg, nodes, kernel_tol):
    if isinstance(spec, Sphere):
        d, r = spec.dim, spec.radius
        vol = volume(spec)
        s, ws = _panel_nodes(math.pi * r, t, cfg, nodes)
        q, _, _ = sphere_density(spec, t, s, kernel_tol)
        area = _surface_area_unit(d - 1) * r ** (d - 1) * np.sin(s / r) ** (d - 1)
        qc = np.maximum(q, _Q_FLOOR)
        return float(np.sum(ws * qc * np.log(qc * vol) * area))
    if isinstance(spec, FlatTorus):
        total = 0.0
        for L in spec.lengths:
            s, ws = _panel_nodes(L / 2.0, t, cfg, nodes)
            q, _, _ = circle_density(L, t, s, kernel_tol)
            qc = np.maximum(q, _Q_FLOOR)
            total += float(np.sum(ws * qc * np.log(qc * L) * 2.0))
        return total
    if isinstance(spec, Product):
        return (_kl_once(spec.left, t, cfg, nodes, kernel_tol)
                + _kl_once(spec.right, t, cfg, nodes, kernel_tol))
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


def kl_numeric(spec, t, cfg=None, kernel_tol=_KERNEL_TOL):
    """KL(q_t || uniform) by radial quadrature.

    The value is computed twice (nodes and doubled nodes); the refined
    value is returned and the difference must be below cfg.tol, else an
    AccuracyError carrying the achieved estimate is raised.
    """
    if t <= 0:
        raise InvalidInputError("t must be positive, got %g" % t)
    cfg = cfg or QuadratureConfig()
    coarse = _kl_once(spec, t, cfg, cfg.nodes, kernel_tol)
    fine = _kl_once(spec, t, cfg, 2 * cfg.nodes, kernel_tol)
    est = abs(fine - coarse)
    if est > cfg.tol:
        raise AccuracyError("quadrature tolerance %g not met (estimate %.3e)"
                            % (cfg.tol, est), value=fine, estimate=est)
    return fine


def _mass_once(spec, t, cfg, nodes, kernel_tol):
    if isinstance(spec, Sphere):
        d, r = spec.dim, spec.radius
        s, ws = _panel_nodes(math.pi * r, t, cfg, nodes)
        q, _, _ = sphere_density(spec, t, s, kernel_tol)
        area = _surface_area_unit(d - 1) * r ** (d - 1) * np.sin(s / r) ** (d - 1)
        return float(np.sum(ws * q * area))
    if isinstance(spec, FlatTorus):
        total = 1.0
        for L in spec.lengths:
            s, ws = _panel_nodes(L / 2.0, t, cfg, nodes)
            q, _, _ = circle_density(L, t, s, kernel_tol)
            total *= 2.0 * float(np.sum(ws * q))
        return total
    if isinstance(spec, Product):
        return (_mass_once(spec.left, t, cfg, nodes, kernel_tol)
                * _mass_once(spec.right, t, cfg, nodes, kernel_tol))
    raise InvalidInputError("not a manifold spec: %r" % (spec,))


def kernel_mass(spec, t, cfg=None, kernel_tol=_KERNEL_TOL):
    """int q dVol by the same quadrature (1 up to quadrature error)."""
    if t <= 0:
        raise InvalidInputError("t must be positive, got %g" % t)
    cfg = cfg or QuadratureConfig()
    return _mass_once(spec, t, cfg, 2 * cfg.nodes, kernel_tol)


def _radial_parts(spec, t, cfg, nodes, kernel_tol):
    if isinstance(spec, Sphere):
        d, r = spec.dim, spec.radius
        s, ws = _panel_nodes(math.pi * r, t, cfg, nodes)
        q, _, _ = sphere_density(spec, t, s, kernel_tol)
        area = _surface_area_unit(d - 1) * r ** (d - 1) * np.sin(s / r) ** (d - 1)
        return q, ws * area, volume(spec)
    if isinstance(spec, FlatTorus) and len(spec.lengths) == 1:
        L = spec.lengths[0]
        s, ws = _panel_nodes(L / 2.0, t, cfg, nodes)
        q, _, _ = circle_density(L, t, s, kernel_tol)
        return q, ws * 2.0, L
    raise InvalidInputError("tensor oracle needs single-coordinate factors, got %r" % (spec,))


def product_kl_tensor(spec, t, cfg=None, kernel_tol=_KERNEL_TOL):
    """KL of a two-factor product by full tensor-product quadrature.

    Slow-path oracle for the additivity identity; factors must be radial
    (a sphere or a one-axis torus).
    """
    if not isinstance(spec, Product):
        raise InvalidInputError("expected a Product spec, got %r" % (spec,))
    cfg = cfg or QuadratureConfig()
    q1, w1, v1 = _radial_parts(spec.left, t, cfg, 2 * cfg.nodes, kernel_tol)
    q2, w2, v2 = _radial_parts(spec.right, t, cfg, 2 * cfg.nodes, kernel_tol)
    q = np.outer(q1, q2)
    w = np.outer(w1, w2)
    qc = np.maximum(q, _Q_FLOOR)
    return float(np.sum(w * qc * np.log(qc * (v1 * v2))))


@dataclass(frozen=True)
class SweepRow:
    t: float
    kl_numeric: float
    kl_asym0: float
    kl_asym1: float
    kl_asym2: float
    residual: float
    error: Optional[str] = None


def _thread_count(n):
    env = os.environ.get("HEATKL_THREADS")
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise InvalidInputError("HEATKL_THREADS must be an integer, got %r" % env)
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n))


def sweep(spec, t_grid, cfg=None, kernel_tol=_KERNEL_TOL):
    """Evaluate kl_numeric and the order-0/1/2 asymptotics on a t grid.

    Rows are computed concurrently (capped by HEATKL_THREADS) and returned
    in grid order.  Per-row failures are recorded in the row's error field
    with NaN values rather than aborting the sweep.
    """
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        return []
    cfg = cfg or QuadratureConfig()
    d = dimension(spec)
    vol = volume(spec)
    jet = curvature_jet(spec)
    coeffs = (c0(d), c1(jet), c2_closed(jet))

    def row(t):
        a0 = kl_asymptotic(t, d, vol, coeffs, 0)
        a1 = kl_asymptotic(t, d, vol, coeffs, 1)
        a2 = kl_asymptotic(t, d, vol, coeffs, 2)
        try:
            kl = kl_numeric(spec, t, cfg, kernel_tol)
            err = None
        except AccuracyError as exc:
            kl = float("nan") if exc.value is None else float(exc.value)
            err = str(exc)
        if math.isfinite(kl):
            resid = kl + 0.5 * d * math.log(2.0 * math.pi * t) - math.log(vol)
        else:
            resid = float("nan")
        return SweepRow(t=t, kl_numeric=kl, kl_asym0=a0, kl_asym1=a1, kl_asym2=a2,
                        residual=resid, error=err)

    with ThreadPoolExecutor(max_workers=_thread_count(len(t_grid))) as pool:
        return list(pool.map(row, t_grid))


def render_sweep_csv(rows):
    buf = io.StringIO()
    buf.write("t,kl_numeric,kl_asym0,kl_asym1,kl_asym2,residual\n")
    for r in rows:
        buf.write(",".join("%.17g" % v for v in
                           (r.t, r.kl_numeric, r.kl_asym0, r.kl_asym1, r.kl_asym2, r.residual)))
        buf.write("\n")
    return buf.getvalue()


def parse_sweep_csv(text):
    """Read back a sweep CSV; returns a list of (t, kl_numeric, residual)."""
    reader = csv.DictReader(io.StringIO(text))
    need = {"t", "kl_numeric", "residual"}
    if reader.fieldnames is None or not need.issubset(reader.fieldnames):
        raise InvalidInputError("sweep CSV must have columns %s" % sorted(need))
    out = []
    for rec in reader:
        out.append((float(rec["t"]), float(rec["kl_numeric"]), float(rec["residual"])))
    if not out:
        raise InvalidInputError("sweep CSV has no data rows")
    return out


@dataclass(frozen=True)
class FitReport:
    """Weighted least-squares fit of the residual curve.

    coeffs has length fit_order+1 with pinned entries repeated verbatim;
    stderr entries are NaN for pinned coefficients.
    """

    t_grid: Tuple[float, ...]
    residuals: Tuple[float, ...]
    coeffs: Tuple[float, ...]
    stderr: Tuple[float, ...]
    cond: float
    fit_order: int
    pinned: dict
    d: int
    vol: float

    def to_json_obj(self):
        return {
            "t_grid": list(self.t_grid),
            "residuals": list(self.residuals),
            "coeffs": list(self.coeffs),
            "stderr": list(self.stderr),
            "cond": self.cond,
            "fit_order": self.fit_order,
            "pinned": {str(k): v for k, v in sorted(self.pinned.items())},
            "d": self.d,
            "vol": self.vol,
        }


def fit_coefficients(rows, d, vol, fit_order, pinned=None):
    """Fit residuals rho(t) = KL + (d/2)ln(2 pi t) - ln vol to a polynomial
    sum_i c_i t^i, i <= fit_order, by least squares with weights 1/t^2.

    rows: SweepRow list or (t, kl) pairs.  pinned maps coefficient indices
    to fixed values (e.g. {0: -d/2}); pinned terms are subtracted before
    fitting the rest.
    """
    if fit_order not in (1, 2, 3):
        raise InvalidInputError("fit_order must be 1, 2 or 3, got %r" % (fit_order,))
    pts = []
    for row in rows:
        if isinstance(row, SweepRow):
            if row.error is not None:
                continue
            pts.append((row.t, row.kl_numeric))
        else:
            t, kl = row[0], row[1]
            pts.append((float(t), float(kl)))
    pts.sort(key=lambda p: p[0])
    if len(pts) < fit_order + 2:
        raise InvalidInputError("need at least fit_order+2 = %d usable rows, got %d"
                                % (fit_order + 2, len(pts)))
    t = np.asarray([p[0] for p in pts])
    kl = np.asarray([p[1] for p in pts])
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise InvalidInputError("t grid must be positive and strictly increasing")
    if not np.all(np.isfinite(kl)):
        raise InvalidInputError("non-finite KL values in fit input")
    rho = kl + 0.5 * d * np.log(2.0 * np.pi * t) - math.log(vol)

    pinned = dict(pinned or {})
    for i, v in pinned.items():
        if i < 0 or i > fit_order:
            raise InvalidInputError("pinned index %r outside 0..%d" % (i, fit_order))
        rho = rho - float(v) * t ** i
    free = [i for i in range(fit_order + 1) if i not in pinned]
    sqw = 1.0 / t  # sqrt of the 1/t^2 weights
    X = np.stack([t ** i for i in free], axis=1) * sqw[:, None]
    y = rho * sqw
    if np.linalg.matrix_rank(X) < len(free):
        raise ConditioningError("rank-deficient design matrix (%d columns, rank %d)"
                                % (len(free), np.linalg.matrix_rank(X)))
    cond = float(np.linalg.cond(X))
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = len(t) - len(free)
    sigma2 = float(resid @ resid) / dof if dof > 0 else float("nan")
    cov = sigma2 * np.linalg.inv(X.T @ X) if dof > 0 else None

    coeffs = [0.0] * (fit_order + 1)
    stderr = [float("nan")] * (fit_order + 1)
    for i, v in pinned.items():
        coeffs[i] = float(v)
    for j, i in enumerate(free):
        coeffs[i] = float(beta[j])
        if cov is not None:
            stderr[i] = float(math.sqrt(max(cov[j, j], 0.0)))
    resid_full = kl + 0.5 * d * np.log(2.0 * np.pi * t) - math.log(vol)
    return FitReport(t_grid=tuple(float(v) for v in t),
                     residuals=tuple(float(v) for v in resid_full),
                     coeffs=tuple(coeffs), stderr=tuple(stderr), cond=cond,
                     fit_order=fit_order, pinned=pinned, d=int(d), vol=float(vol))
