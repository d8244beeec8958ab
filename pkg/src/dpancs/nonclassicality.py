"""Photon statistics and squeezing criteria for DPANCSs.

Two independent routes to the six expectation values: closed series over
the state's weights (``moments_series``) and quadratic forms with dense
truncated matrices (``moments_oracle``).
"""
from __future__ import annotations

import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConvergenceError, DPANCSError
from .nonlinearity import NonlinearityFn, deformed_factorial
from .operators import annihilation
from .states import FockVector, StateSpec, _full_series, _n_log_x, check_convergent, log_terms

SWEEP_HEADER = ["alpha", "m", "Q", "g2", "sx", "sp", "SX", "SP", "N_used", "status"]


@dataclass(frozen=True)
class MomentSet:
    """<a>, <a^2>, <a^4>, <a^dag a>, <a^dag^2 a^2>, <(a^dag a)^2>."""

    a: complex
    a2: complex
    a4: complex
    n: float
    ad2a2: float
    n_sq: float
    N_used: int | None = None

    @property
    def ad(self):
        return np.conj(self.a)

    @property
    def ad2(self):
        return np.conj(self.a2)

    @property
    def ad4(self):
        return np.conj(self.a4)


@dataclass(frozen=True)
class CriteriaReport:
    Q: float | None
    g2: float | None
    sx: float
    sp: float
    SX: float
    SP: float
    alpha: complex | None = None
    m: int | None = None
    f: str | None = None
    N_used: int | None = None
    flags: tuple[str, ...] = ()
    status: str = "ok"


def moments_series(spec: StateSpec, tol: float = 1e-12) -> MomentSet:
    """Expectation values from the closed weight series of a DPANCS (m >= 0)."""
    if spec.negative:
        raise ValueError("moments_series covers the m >= 0 families; use moments_oracle")
    check_convergent(spec)
    m, f, x, alpha = spec.order, spec.f, spec.x, spec.alpha
    if x == 0:
        return MomentSet(a=0j, a2=0j, a4=0j, n=float(m), ad2a2=float(m * (m - 1)),
                         n_sq=float(m * m), N_used=m)
    base, _ = _full_series(lambda k: log_terms(spec, k))
    significant = np.nonzero(base > base.max() + np.log(1e-40))[0]
    K = int(significant[-1]) + 16
    n = np.arange(K)
    lp = log_terms(spec, n)
    tab = deformed_factorial(f, K + m + 6)
    L2 = tab.log_f2
    log_f2 = lambda k: np.log(f.f2(k))

    lr1 = np.log(n + m + 1.0) + 0.5 * log_f2(n + m + 1) - np.log(n + 1.0) - log_f2(n + 1)
    lr1_next = np.log(n + m + 2.0) + 0.5 * log_f2(n + m + 2) - np.log(n + 2.0) - log_f2(n + 2)
    la4 = (_n_log_x(n, x) + gammaln(n + m + 5) + 0.5 * L2(n + m + 4) + 0.5 * L2(n + m)
           - gammaln(n + 1) - gammaln(n + 5) - L2(n) - L2(n + 4))
    k = n + m
    with np.errstate(divide="ignore"):
        series = {
            "a": lp + lr1,
            "a2": lp + lr1 + lr1_next,
            "a4": la4,
            "n": lp + np.log(k.astype(float)),
            "ad2a2": lp + np.log((k * (k - 1)).astype(float)),
            "n_sq": lp + 2 * np.log(k.astype(float)),
        }
    log_norm = logsumexp(lp)
    vals = {}
    for name, terms in series.items():
        total = logsumexp(terms)
        vals[name] = float(np.exp(total - log_norm)) if np.isfinite(total) else 0.0
        if np.isfinite(total) and terms[-1] - total > np.log(tol) - 5:
            raise ConvergenceError(f"<{name}> series tail above tolerance", partial=vals)
    return MomentSet(a=alpha * vals["a"], a2=alpha ** 2 * vals["a2"], a4=alpha ** 4 * vals["a4"],
                     n=vals["n"], ad2a2=vals["ad2a2"], n_sq=vals["n_sq"], N_used=K - 1 + m)


def moments_oracle(state: FockVector) -> MomentSet:
    """Expectation values as <psi|M|psi> with dense truncated matrices."""
    psi = state.coefficients
    N = state.N
    a = annihilation(N)
    a2 = a @ a
    a4 = a2 @ a2
    num = np.diag(np.arange(N + 1, dtype=float))
    ev = lambda M: np.vdot(psi, M @ psi)
    return MomentSet(a=complex(ev(a)), a2=complex(ev(a2)), a4=complex(ev(a4)),
                     n=float(ev(num).real), ad2a2=float(ev(a2.T @ a2).real),
                     n_sq=float(ev(num @ num).real), N_used=N)


def _real(z, scale, what):
    if abs(z.imag) > 1e-12 * max(1.0, scale):
        raise ValueError(f"{what} has imaginary part {z.imag:g}")
    return float(z.real)


def criteria(ms: MomentSet, *, alpha=None, m=None, f=None) -> CriteriaReport:
    """Mandel Q, g2(0), quadrature (sx, sp) and amplitude-squared (SX, SP) squeezing."""
    flags = []
    if ms.n > 0:
        Q = (ms.n_sq - ms.n ** 2) / ms.n - 1.0
        g2 = ms.ad2a2 / ms.n ** 2
    else:
        Q = g2 = None
        flags += ["Q undefined", "g2 undefined"]
    a, ad, a2, ad2 = ms.a, ms.ad, ms.a2, ms.ad2
    scale = 2 * ms.n + 2 * abs(a2) + 4 * abs(a) ** 2
    sx = _real(2 * ms.n + a2 + ad2 - a ** 2 - ad ** 2 - 2 * a * ad, scale, "sx")
    sp = _real(2 * ms.n - a2 - ad2 + a ** 2 + ad ** 2 - 2 * a * ad, scale, "sp")
    half = ms.n + 0.5
    scale2 = abs(ms.a4) + ms.ad2a2 + abs(a2) ** 2
    SX = _real(0.25 * (ms.ad4 + ms.a4 + 2 * ms.ad2a2) - 0.25 * (ad2 + a2) ** 2, scale2, "SX") / half
    SP = _real(0.25 * (-ms.ad4 - ms.a4 + 2 * ms.ad2a2) + 0.25 * (ad2 - a2) ** 2, scale2, "SP") / half
    return CriteriaReport(Q=Q, g2=g2, sx=sx, sp=sp, SX=SX, SP=SP, alpha=alpha, m=m,
                          f=f.label if isinstance(f, NonlinearityFn) else f,
                          N_used=ms.N_used, flags=tuple(flags),
                          status="ok" if not flags else "undefined:Q,g2")


def _sweep_point(args):
    alpha, m, f, tol = args
    try:
        ms = moments_series(StateSpec(alpha, m, f), tol)
        return criteria(ms, alpha=alpha, m=m, f=f)
    except (DPANCSError, ValueError) as exc:
        nan = float("nan")
        return CriteriaReport(Q=None, g2=None, sx=nan, sp=nan, SX=nan, SP=nan, alpha=alpha,
                              m=m, f=f.label, status=f"error:{type(exc).__name__}")


def sweep(alphas, ms, f: NonlinearityFn, tol: float = 1e-12, workers: int = 1) -> list[CriteriaReport]:
    """One report per (m, alpha) grid point, ordered by m then alpha."""
    alphas = list(alphas)
    if not alphas or not all(np.isfinite(complex(a)) for a in alphas):
        raise ValueError("alpha grid must be nonempty and finite")
    jobs = [(a, int(m), f, tol) for m in ms for a in alphas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, complex):
        v = v.real if v.imag == 0 else v
        if isinstance(v, complex):
            return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_sweep_csv(rows, stream=None):
    stream = sys.stdout if stream is None else stream
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([_fmt(r.alpha), r.m, _fmt(r.Q), _fmt(r.g2), _fmt(r.sx), _fmt(r.sp),
                    _fmt(r.SX), _fmt(r.SP), "" if r.N_used is None else r.N_used, r.status])
