"""Pure-NumPy implementations of the series kernels.

Mirrors _core.pyx term for term (including the Kahan compensation) so the
two backends agree to rounding error and can be benchmarked against each
other.
"""

import numpy as np


def gegenbauer_sum(x, weights, alpha):
    """Evaluate sum_l weights[l] * C_l^alpha(x) elementwise over the nodes x.

    alpha == 0 means the Chebyshev-T limit, i.e. cos(l * acos x).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    nl = weights.shape[0]
    acc = np.full_like(x, weights[0])
    comp = np.zeros_like(x)
    if nl > 1:
        pm2 = np.ones_like(x)
        pm1 = x.copy() if alpha == 0.0 else 2.0 * alpha * x
        for l in range(1, nl):
            if l == 1:
                p = pm1
            else:
                if alpha == 0.0:
                    p = 2.0 * x * pm1 - pm2
                else:
                    p = (2.0 * x * (l + alpha - 1.0) * pm1
                         - (l + 2.0 * alpha - 2.0) * pm2) / l
                pm2 = pm1
                pm1 = p
            term = weights[l] * p
            y = term - comp
            tmp = acc + y
            comp = (tmp - acc) - y
            acc = tmp
    return acc


def wrapped_gaussian_sum(x, period, t, nmax):
    """Evaluate the wrapped Gaussian density of variance t at the nodes x."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    norm = 1.0 / np.sqrt(2.0 * np.pi * t)
    inv2t = 0.5 / t
    acc = np.zeros_like(x)
    comp = np.zeros_like(x)
    for n in range(-nmax, nmax + 1):
        z = x + n * period
        term = np.exp(-z * z * inv2t)
        y = term - comp
        tmp = acc + y
        comp = (tmp - acc) - y
        acc = tmp
    return acc * norm
