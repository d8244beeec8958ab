"""Series-evaluated special functions used by the closed forms."""
from __future__ import annotations

import numpy as np
from scipy.special import eval_genlaguerre, ive, logsumexp

from .errors import ConvergenceError

_CHUNK = 256


def log_hyp_pfq(a, b, x, rtol=1e-17, max_terms=200_000):
    """log pFq(a; b; x) by direct summation, for x >= 0 and positive parameters.

    Terms are accumulated in log space so large x (terms ~ e^{2 sqrt x}) do not
    overflow. Requires p <= q + 1 and x < 1 when p == q + 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if x < 0:
        raise ValueError("log_hyp_pfq needs x >= 0")
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("parameters must be positive")
    if x == 0:
        return 0.0
    if len(a) > len(b) + 1 or (len(a) == len(b) + 1 and x >= 1):
        raise ConvergenceError("pFq series diverges")
    logs = [np.array([0.0])]
    last = 0.0
    peak = 0.0
    k0 = 0
    while k0 < max_terms:
        k = np.arange(k0, k0 + _CHUNK, dtype=float)
        step = (np.log(a[:, None] + k).sum(0) - np.log(b[:, None] + k).sum(0)
                + np.log(x) - np.log(k + 1.0))
        chunk = last + np.cumsum(step)
        logs.append(chunk)
        last = chunk[-1]
        peak = max(peak, chunk.max())
        k0 += _CHUNK
        if step[-1] < 0 and last < peak + np.log(rtol):
            return float(logsumexp(np.concatenate(logs)))
    raise ConvergenceError(f"pFq series not converged after {max_terms} terms")


def hyp_pfq(a, b, x, **kw):
    return float(np.exp(log_hyp_pfq(a, b, x, **kw)))


def log_bessel_i(nu, z):
    """log I_nu(z) for z > 0, overflow-safe."""
    return float(np.log(ive(nu, z)) + z)


def laguerre(m, x):
    """Laguerre polynomial L_m(x)."""
    return float(eval_genlaguerre(m, 0, x))
