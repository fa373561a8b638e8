"""Self-contained acceptance checks.

Each check returns a CheckResult with a one-line measured summary; the CLI
prints one line per check and exits nonzero if any fail.  The pytest suite
wraps the same functions, so there is a single source of truth for what
"passing" means.

Checks that need an independent oracle carry it inline (direct index loops,
pairing enumeration, exact series algebra); none of them call the code path
they are checking.
"""

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .expansion import c0, c1, c2_closed, c_i_via_wick
from .manifolds import (REFERENCE_SPECS, FlatTorus, Product, Sphere, volume)
from .numeric import (QuadratureConfig, fit_coefficients, kernel_mass, kl_numeric,
                      product_kl_tensor, sweep)
from .parametrix import parametrix_from_jet
from .tensors import constant_curvature_jet, direct_sum_jet, flat_jet, random_curvature_jet
from .wick import PolynomialY, contract2, contract4, isserlis_oracle, nu, truncation_defect

__all__ = ["CheckResult", "run_checks", "CHECKS"]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: str
    seconds: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return "%s criterion-%02d %s: %s (%.2fs)" % (status, self.number, self.name,
                                                     self.measured, self.seconds)


def _index_patterns(length, d):
    """Index tuples of the given length, canonical up to coordinate
    relabeling (restricted growth strings with fewer than d labels)."""
    out = []

    def rec(prefix, used):
        if len(prefix) == length:
            out.append(tuple(prefix))
            return
        for v in range(min(used + 1, d)):
            rec(prefix + [v], used + (1 if v == used else 0))

    rec([], 0)
    return out


def check_wick_exactness(quick=False):
    max_len = 6 if quick else 8
    checked = 0
    bad = 0
    for d in (2, 3, 4):
        for k in range(max_len + 1):
            for idx in _index_patterns(k, d):
                checked += 1
                if nu(idx, d) != isserlis_oracle(idx, d):
                    bad += 1
    return bad == 0, "%d canonical index patterns (length <= %d, d <= 4), %d mismatches" % (
        checked, max_len, bad)


def check_contraction_identities(quick=False):
    reps = 5 if quick else 50
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for d in (2, 3, 4, 5):
        for _ in range(reps):
            T = rng.standard_normal((d, d))
            R = rng.standard_normal((d, d, d, d))
            tr = sum(T[i, i] for i in range(d))
            s3 = 0.0
            for i in range(d):
                for j in range(d):
                    s3 += R[i, i, j, j] + R[i, j, i, j] + R[i, j, j, i]
            cases = [
                (float(contract4(R, "mu")), (d + 4) / 2.0 * s3),
                (float(contract4(R, "nu")), s3),
                (float(contract2(T, "mu")), (d + 2) / 2.0 * tr),
                (float(contract2(T, "nu")), tr),
            ]
            for lhs, rhs in cases:
                worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return worst <= 1e-12, "max normalized deviation %.3e over %d tensors/d, d in 2..5" % (
        worst, reps)


def _full_symmetrize4(T):
    acc = np.zeros_like(T)
    for perm in itertools.permutations(range(4)):
        acc += np.transpose(T, perm)
    return acc / 24.0


def check_parametrix_consistency(quick=False):
    reps = 10 if quick else 100
    worst2 = 0.0
    worst4 = 0.0
    for d in (2, 3, 4, 5):
        for seed in range(reps):
            jet = random_curvature_jet(seed, d)
            p = parametrix_from_jet(jet)
            worst2 = max(worst2, float(np.max(np.abs(2.0 * p.a2 + p.e2))))
            quart = (2.0 * p.a4 + p.e4
                     + np.einsum("ij,kl->ijkl", p.a2, p.a2)
                     + 2.0 * np.einsum("ij,kl->ijkl", p.a2, p.e2))
            worst4 = max(worst4, float(np.max(np.abs(_full_symmetrize4(quart)))))
    ok = worst2 <= 1e-13 and worst4 <= 1e-13
    return ok, "order-2 max %.3e, symmetrized order-4 max %.3e over %d jets/d" % (
        worst2, worst4, reps)


def _sine_series_coeffs(K, power):
    """Exact s^0, s^2, s^4 coefficients of (sin(sqrt(K) s)/(sqrt(K) s))^power.

    sin(u)/u = 1 - u^2/6 + u^4/120 - ..., u^2 = K s^2; the power is taken by
    truncated polynomial multiplication in exact rationals.
    """
    K = Fraction(K)
    base = [Fraction(1), -K / 6, K * K / 120]
    out = [Fraction(1), Fraction(0), Fraction(0)]
    for _ in range(power):
        nxt = [Fraction(0)] * 3
        for a in range(3):
            for b in range(3 - a):
                nxt[a + b] += out[a] * base[b]
        out = nxt
    return out


def check_space_form_density(quick=False):
    worst = 0.0
    for K in (Fraction(1, 4), Fraction(1), Fraction(4)):
        for d in (2, 3):
            jet = constant_curvature_jet(float(K), d)
            p = parametrix_from_jet(jet)
            coeffs = _sine_series_coeffs(K, d - 1)
            # contraction along a unit direction picks the [0,...,0] entries
            worst = max(worst, abs(float(p.e2[0, 0]) - float(coeffs[1])))
            worst = max(worst, abs(float(p.e4[0, 0, 0, 0]) - float(coeffs[2])))
    return worst <= 1e-12, "max coefficient deviation %.3e over K in {1/4,1,4}, d in {2,3}" % worst


def check_wick_vs_closed(quick=False):
    reps = 10 if quick else 100
    worst = 0.0
    for d in (2, 3, 4, 5):
        for seed in range(reps):
            jet = random_curvature_jet(10000 + seed, d)
            p = parametrix_from_jet(jet)
            closed = (c0(d), c1(jet), c2_closed(jet))
            for i in range(3):
                w = c_i_via_wick(p, i)
                worst = max(worst, abs(w - closed[i]) / (1.0 + abs(closed[i])))
    return worst <= 1e-10, "max relative deviation %.3e over %d jets/d, d in 2..5" % (worst, reps)


@lru_cache(maxsize=4)
def _sphere_sweep_rows():
    grid = np.geomspace(1e-3, 5e-2, 20)
    return tuple(sweep(Sphere(2, 1.0), grid, QuadratureConfig()))


def check_sphere_fit_c0_c1(quick=False):
    rows = _sphere_sweep_rows()
    rep = fit_coefficients(rows, d=2, vol=volume(Sphere(2, 1.0)), fit_order=3)
    e0 = abs(rep.coeffs[0] - (-1.0))
    e1 = abs(rep.coeffs[1] - 0.5)
    ok = e0 <= 1e-4 and e1 <= 0.005
    return ok, "c0hat=%.8f (err %.2e <= 1e-4), c1hat=%.6f (err %.2e <= 5e-3)" % (
        rep.coeffs[0], e0, rep.coeffs[1], e1)


def check_sphere_fit_c2(quick=False):
    rows = _sphere_sweep_rows()
    rep = fit_coefficients(rows, d=2, vol=volume(Sphere(2, 1.0)), fit_order=3,
                           pinned={0: -1.0, 1: 0.5})
    target = 1.0 / 72.0
    rel = abs(rep.coeffs[2] - target) / target
    return rel <= 0.10, "c2hat=%.8f vs 1/72=%.8f (rel err %.2e <= 0.1)" % (
        rep.coeffs[2], target, rel)


def check_torus_residual(quick=False):
    npts = 5 if quick else 20
    grid = np.geomspace(1e-3, 5e-2, npts)
    worst = 0.0
    for spec, d in ((FlatTorus((_TWO_PI,)), 1), (FlatTorus((_TWO_PI, _TWO_PI)), 2)):
        rows = sweep(spec, grid, QuadratureConfig())
        for row in rows:
            if row.error is not None:
                return False, "sweep row failed: %s" % row.error
            worst = max(worst, abs(row.residual + d / 2.0))
    return worst <= 1e-10, "max |rho + d/2| = %.3e over %d points, d in {1,2}" % (worst, npts)


def check_normalization(quick=False):
    specs = (Sphere(2, 1.0), FlatTorus((_TWO_PI,))) if quick else REFERENCE_SPECS
    times = (0.01, 1.0) if quick else (0.01, 0.1, 1.0)
    cfg = QuadratureConfig()
    worst_mass = 0.0
    worst_kl = 0.0
    for spec in specs:
        for t in times:
            worst_mass = max(worst_mass, abs(kernel_mass(spec, t, cfg) - 1.0))
        worst_kl = max(worst_kl, abs(kl_numeric(spec, 100.0, cfg)))
    ok = worst_mass <= 1e-8 and worst_kl <= 1e-8
    return ok, "max |mass-1| = %.3e, max KL(t=100) = %.3e over %d specs" % (
        worst_mass, worst_kl, len(specs))


def check_product_additivity(quick=False):
    cfg = QuadratureConfig()
    s2, s1 = Sphere(2, 1.0), Sphere(1, 1.0)
    prod = Product(s2, s1)
    worst_kl = 0.0
    for t in (0.01, 0.05):
        lhs = product_kl_tensor(prod, t, cfg)
        rhs = kl_numeric(s2, t, cfg) + kl_numeric(s1, t, cfg)
        worst_kl = max(worst_kl, abs(lhs - rhs))
    worst_c2 = 0.0
    seeds = (0,) if quick else (0, 1, 2)
    for d in (2, 3):
        for seed in seeds:
            jet = random_curvature_jet(555 + seed, d, enforce_bianchi=True)
            base = c2_closed(jet)
            for m in (1, 2, 3):
                ext = direct_sum_jet(jet, flat_jet(m))
                worst_c2 = max(worst_c2, abs(c2_closed(ext) - base))
    ok = worst_kl <= 1e-8 and worst_c2 <= 1e-12
    return ok, "tensor-vs-sum KL dev %.3e, flat-extension c2 dev %.3e" % (worst_kl, worst_c2)


def check_truncation_decay(quick=False):
    p = PolynomialY(1, {(2,): 1.0})
    d_small = truncation_defect(p, 1.0, 0.025)
    d_big = truncation_defect(p, 1.0, 0.1)
    ratio = d_small / d_big if d_big > 0 else float("inf")
    return ratio < 0.25 ** 2, "defect(0.025)/defect(0.1) = %.3e < 0.0625" % ratio


CHECKS = (
    (1, "wick-exactness", check_wick_exactness),
    (2, "moment-contraction-identities", check_contraction_identities),
    (3, "parametrix-cancellation", check_parametrix_consistency),
    (4, "space-form-density", check_space_form_density),
    (5, "wick-vs-closed-forms", check_wick_vs_closed),
    (6, "sphere-fit-c0-c1", check_sphere_fit_c0_c1),
    (7, "sphere-fit-c2", check_sphere_fit_c2),
    (8, "torus-residual", check_torus_residual),
    (9, "kernel-normalization", check_normalization),
    (10, "product-additivity", check_product_additivity),
    (11, "truncation-decay", check_truncation_decay),
)

_QUICK_SKIP = {6, 7}  # the sphere sweep dominates runtime; quick mode skips it


def run_checks(quick=False, numbers=None):
    results = []
    for number, name, fn in CHECKS:
        if numbers is not None and number not in numbers:
            continue
        if quick and number in _QUICK_SKIP:
            continue
        start = time.perf_counter()
        passed, measured = fn(quick=quick)
        results.append(CheckResult(number=number, name=name, passed=passed,
                                   measured=measured, seconds=time.perf_counter() - start))
    return results
