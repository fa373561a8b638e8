"""Exact Gaussian moment engine.

Everything here is about integrals against the standard Gaussian
gamma(dY) = (2pi)^{-d/2} exp(-|Y|^2/2) dY.  Two moment arrays appear:

    nu(i1..ik) = int Y^{i1}...Y^{ik} dgamma
    mu(i1..ik) = int Y^{i1}...Y^{ik} (|Y|^2/2) dgamma

Moments are computed per coordinate from the double factorial (the fast
path) and exact rational arithmetic is the default; the pairing-enumeration
oracle isserlis_oracle exists only so tests can check the fast path against
an independent implementation.
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "moment_1d",
    "nu",
    "mu",
    "isserlis_oracle",
    "PolynomialY",
    "integrate_polynomial",
    "contract2",
    "contract4",
    "truncation_defect",
]


def moment_1d(p):
    """p-th moment of the standard 1-D Gaussian, as an exact rational.

    Zero for odd p, the double factorial (p-1)!! for even p.  For variance
    sigma the moment scales as sigma^{p/2} (p-1)!!; only sigma = 1 is used
    here.
    """
    if p < 0:
        raise InvalidInputError("moment order must be non-negative, got %d" % p)
    if p % 2 == 1:
        return Fraction(0)
    out = 1
    for k in range(1, p, 2):
        out *= k
    return Fraction(out)


def _multiplicities(idx, d):
    counts = [0] * d
    for i in idx:
        i = int(i)
        if i < 0 or i >= d:
            raise InvalidInputError("index %d out of range for d=%d" % (i, d))
        counts[i] += 1
    return counts


@lru_cache(maxsize=None)
def _nu_counts(counts):
    out = Fraction(1)
    for c in counts:
        if c % 2 == 1:
            return Fraction(0)
        out *= moment_1d(c)
    return out


def nu(idx, d):
    """Plain Gaussian moment of the monomial with index string idx."""
    return _nu_counts(tuple(_multiplicities(idx, d)))


def mu(idx, d):
    """Moment of the monomial times the weight |Y|^2/2.

    Equals (1/2) sum_j nu(idx ++ (j,j)).
    """
    counts = _multiplicities(idx, d)
    total = Fraction(0)
    for j in range(d):
        counts[j] += 2
        total += _nu_counts(tuple(counts))
        counts[j] -= 2
    return total / 2


def isserlis_oracle(idx, d):
    """Sum over perfect pairings of idx, each pairing contributing the
    product of index-equality deltas.  Brute force on purpose; this is the
    independent check of nu, never the production path."""
    _multiplicities(idx, d)
    idx = tuple(int(i) for i in idx)

    def pairings(rest):
        if not rest:
            return 1
        if len(rest) % 2 == 1:
            return 0
        first, tail = rest[0], rest[1:]
        total = 0
        for k in range(len(tail)):
            if tail[k] == first:
                total += pairings(tail[:k] + tail[k + 1:])
        return total

    return Fraction(pairings(idx))


class PolynomialY(object):
    """Polynomial in the Gaussian variable Y = (Y_0..Y_{d-1}).

    Stored as a map from exponent vectors to coefficients; zero
    coefficients are never kept.  Coefficients may be exact rationals or
    floats and the arithmetic preserves whichever it is given.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=None):
        self.dim = int(dim)
        self.terms = {}
        if terms:
            for e, c in terms.items():
                self._add(e, c)

    def _add(self, e, c):
        e = tuple(int(x) for x in e)
        if len(e) != self.dim or any(x < 0 for x in e):
            raise InvalidInputError("bad exponent vector %s for d=%d" % (e, self.dim))
        new = self.terms.get(e, 0) + c
        if new == 0:
            self.terms.pop(e, None)
        else:
            self.terms[e] = new

    @classmethod
    def constant(cls, dim, c):
        p = cls(dim)
        if c != 0:
            p.terms[(0,) * dim] = c
        return p

    @classmethod
    def from_quadratic(cls, T):
        """sum_ij T[i,j] Y_i Y_j from a coefficient matrix."""
        T = np.asarray(T)
        d = T.shape[0]
        p = cls(d)
        for i in range(d):
            for j in range(d):
                c = T[i, j]
                if c == 0:
                    continue
                e = [0] * d
                e[i] += 1
                e[j] += 1
                p._add(tuple(e), c)
        return p

    @classmethod
    def from_quartic(cls, T4):
        """sum_ijkl T4[i,j,k,l] Y_i Y_j Y_k Y_l from a coefficient array."""
        T4 = np.asarray(T4)
        d = T4.shape[0]
        p = cls(d)
        for idx in np.ndindex(*T4.shape):
            c = T4[idx]
            if c == 0:
                continue
            e = [0] * d
            for i in idx:
                e[i] += 1
            p._add(tuple(e), c)
        return p

    def __add__(self, other):
        if not isinstance(other, PolynomialY):
            other = PolynomialY.constant(self.dim, other)
        if other.dim != self.dim:
            raise InvalidInputError("dimension mismatch %d vs %d" % (self.dim, other.dim))
        out = PolynomialY(self.dim, self.terms)
        for e, c in other.terms.items():
            out._add(e, c)
        return out

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PolynomialY):
            if other.dim != self.dim:
                raise InvalidInputError("dimension mismatch %d vs %d" % (self.dim, other.dim))
            out = PolynomialY(self.dim)
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    out._add(tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
            return out
        out = PolynomialY(self.dim)
        if other != 0:
            for e, c in self.terms.items():
                out._add(e, c * other)
        return out

    __rmul__ = __mul__

    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def evaluate(self, y):
        y = np.asarray(y)
        total = 0
        for e, c in self.terms.items():
            v = c
            for j, p in enumerate(e):
                if p:
                    v = v * y[j] ** p
            total = total + v
        return total

    def __repr__(self):
        return "PolynomialY(dim=%d, terms=%r)" % (self.dim, self.terms)


def _nu_expvec(e):
    return _nu_counts(tuple(e))


def _mu_expvec(e):
    e = list(e)
    total = Fraction(0)
    for j in range(len(e)):
        e[j] += 2
        total += _nu_counts(tuple(e))
        e[j] -= 2
    return total / 2


def integrate_polynomial(p, weight):
    """Gaussian integral of the polynomial, optionally weighted by |Y|^2/2.

    Exact rational if every coefficient is; float otherwise.
    """
    if weight == "plain":
        momf = _nu_expvec
    elif weight == "half_norm_sq":
        momf = _mu_expvec
    else:
        raise InvalidInputError("weight must be 'plain' or 'half_norm_sq', got %r" % (weight,))
    total = 0
    for e, c in p.terms.items():
        m = momf(e)
        if m != 0:
            total = total + c * m
    return total


def _contract(T, kind, order):
    T = np.asarray(T)
    if T.ndim != order or len(set(T.shape)) != 1:
        raise InvalidInputError("expected a d^%d array, got shape %s" % (order, T.shape))
    d = T.shape[0]
    momf = {"nu": _nu_expvec, "mu": _mu_expvec}.get(kind)
    if momf is None:
        raise InvalidInputError("kind must be 'mu' or 'nu', got %r" % (kind,))
    exact = T.dtype == object
    total = Fraction(0) if exact else 0.0
    for idx in np.ndindex(*T.shape):
        counts = [0] * d
        for i in idx:
            counts[i] += 1
        m = momf(counts)
        if m == 0:
            continue
        total = total + T[idx] * (m if exact else float(m))
    return total


def contract2(T, kind):
    """Full Einstein sum T_ij (mu or nu)^{ij}."""
    return _contract(T, kind, 2)


def contract4(R, kind):
    """Full Einstein sum R_ijkl (mu or nu)^{ijkl}."""
    return _contract(R, kind, 4)


def truncation_defect(p, epsilon, t):
    """|full-space Gaussian integral - integral over the ball of radius
    epsilon/sqrt(t)|.

    The ball integral uses tensorized 64-node Gauss-Legendre on the bounding
    box with a ball indicator; accuracy is order-of-magnitude (the quantity
    is used only for decay-rate checks).
    """
    if t <= 0:
        raise InvalidInputError("t must be positive, got %g" % t)
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive, got %g" % epsilon)
    d = p.dim
    if d > 3:
        raise InvalidInputError("ball quadrature implemented for d <= 3, got d=%d" % d)
    radius = epsilon / math.sqrt(t)
    full = float(integrate_polynomial(p, "plain"))

    x, w = np.polynomial.legendre.leggauss(64)
    x = x * radius
    w = w * radius
    axes = np.meshgrid(*([x] * d), indexing="ij")
    r2 = sum(a * a for a in axes)
    inside = r2 <= radius * radius
    dens = np.exp(-r2 / 2.0) * (2.0 * np.pi) ** (-d / 2.0)
    vals = np.zeros_like(dens)
    for e, c in p.terms.items():
        term = np.full_like(dens, float(c))
        for j, pw in enumerate(e):
            if pw:
                term = term * axes[j] ** pw
        vals += term
    wgrid = np.ones_like(dens)
    for j in range(d):
        shape = [1] * d
        shape[j] = 64
        wgrid = wgrid * w.reshape(shape)
    ball = float(np.sum(vals * dens * wgrid * inside))
    return abs(full - ball)
