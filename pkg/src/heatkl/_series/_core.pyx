# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for spectral and wrapped-Gaussian series.

Both routines use Kahan-compensated accumulation: the spectral sums are
alternating near the antipode and the compensation keeps the cancellation
noise a few ulp instead of O(n_terms * eps).
"""

from libc.math cimport exp, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

M_2PI = 6.283185307179586476925286766559


def gegenbauer_sum(double[::1] x, double[::1] weights, double alpha):
    """Evaluate sum_l weights[l] * C_l^alpha(x[i]) for each node x[i].

    alpha == 0 is treated as the Chebyshev-T limit (C_l^0 -> cos(l acos x)),
    which covers both circles and plain cosine series.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nl = weights.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, l
    cdef double xi, pm2, pm1, p, acc, comp, term, y, tmp

    for i in range(n):
        xi = x[i]
        acc = weights[0]
        comp = 0.0
        if nl > 1:
            pm2 = 1.0
            if alpha == 0.0:
                pm1 = xi
            else:
                pm1 = 2.0 * alpha * xi
            term = weights[1] * pm1
            y = term - comp
            tmp = acc + y
            comp = (tmp - acc) - y
            acc = tmp
            for l in range(2, nl):
                if alpha == 0.0:
                    p = 2.0 * xi * pm1 - pm2
                else:
                    p = (2.0 * xi * (l + alpha - 1.0) * pm1
                         - (l + 2.0 * alpha - 2.0) * pm2) / l
                term = weights[l] * p
                y = term - comp
                tmp = acc + y
                comp = (tmp - acc) - y
                acc = tmp
                pm2 = pm1
                pm1 = p
        out[i] = acc
    return out


def wrapped_gaussian_sum(double[::1] x, double period, double t, int nmax):
    """Evaluate the wrapped heat density sum_{|n|<=nmax} phi_t(x[i] + n*period).

    phi_t is the centred Gaussian density with variance t.
    """
    cdef Py_ssize_t npts = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(npts, dtype=np.float64)
    cdef Py_ssize_t i
    cdef int n
    cdef double norm = 1.0 / sqrt(M_2PI * t)
    cdef double inv2t = 0.5 / t
    cdef double xi, acc, comp, term, y, tmp, z

    for i in range(npts):
        xi = x[i]
        acc = 0.0
        comp = 0.0
        for n in range(-nmax, nmax + 1):
            z = xi + n * period
            term = exp(-z * z * inv2t)
            y = term - comp
            tmp = acc + y
            comp = (tmp - acc) - y
            acc = tmp
        out[i] = acc * norm
    return out
