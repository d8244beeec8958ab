"""Resolution-of-identity weight functions and their moment problems.

For a positive-m state the weight factorizes as

    W(x) = Sigma2(x) x^m W~(x),

where Sigma2 is the state's squared-norm series and W~ solves the Stieltjes
moment problem

    int_0^inf x^(k-1) W~(x) dx = ((k-m-1)!)^2 [f^4(k-m-1)]! / ((k-1)! [f^2(k-1)]!),

for k >= m+1. For gamma-ratio nonlinearities the right-hand side is a ratio
of gamma functions of s = k, so W~ is a Meijer G-function kernel whose
parameters are read off that ratio. Negative-m states lead to the kernel
K(x) with int x^n K dx = ((n+m)!)^2 [f^4(n+m)]! / (n! [f^2(n)]!).
"""
from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp

from .errors import FiniteDomainError, NoClosedFormError, QuadratureError
from .meijer import ContourConfig, MeijerGSpec, meijer_g
from .nonlinearity import Kind, NonlinearityFn
from .special import log_hyp_pfq
from .states import Family, StateSpec, log_norm_sums

TAGS = ("generic", "pt", "negative_m", "klauder")


@dataclass(frozen=True)
class WeightKernel:
    """C * G^{q,0}_{p,q}(x | a; b) with C = exp(log_const)."""

    spec: MeijerGSpec
    log_const: float
    label: str = ""
    cfg: ContourConfig | None = None

    def __call__(self, x):
        return np.exp(self.log_const) * meijer_g(self.spec, x, self.cfg)

    def log_mellin(self, s):
        """log of int x^(s-1) K(x) dx (real s inside the strip)."""
        return self.log_const + self.spec.log_mellin_real(s)


def _kernel_params(f: NonlinearityFn, m: int):
    """Meijer parameters for the moment sequence with signed shift m.

    Mellin transform Gamma(s-m)^2 [f^4(s-m-1)]! / (Gamma(s) [f^2(s-1)]!),
    expanded with [f^2(n)]! = prod Gamma(n+a)/Gamma(a) * prod Gamma(b)/Gamma(n+b).
    """
    fa, fb = f.gamma_params
    upper = [0.0] + [p - 1 for p in fa] + [p - m - 1 for p in fb for _ in range(2)]
    lower = [-m, -m] + [p - m - 1 for p in fa for _ in range(2)] + [p - 1 for p in fb]
    log_c = -sum(gammaln(p) for p in fa) + sum(gammaln(p) for p in fb)
    if not len(upper) < len(lower):
        raise FiniteDomainError(
            f"{f.label}: the moment problem lives on a finite disk (p >= q), not supported")
    return MeijerGSpec.kernel(upper, lower), float(log_c)


def tilde_kernel(f: NonlinearityFn, m: int, cfg: ContourConfig | None = None) -> WeightKernel:
    """W~ for the positive-m family (m >= 0)."""
    if m < 0:
        raise ValueError("tilde_kernel needs m >= 0; use negative_kernel")
    spec, log_c = _kernel_params(f, m)
    return WeightKernel(spec, log_c, f"tilde[{f.label},m={m}]", cfg)


def negative_kernel(f: NonlinearityFn, m: int, cfg: ContourConfig | None = None) -> WeightKernel:
    """K = x^m W~^(-m) for the negative-m family (order m >= 0)."""
    m = abs(int(m))
    spec, log_c = _kernel_params(f, -m)
    return WeightKernel(spec, log_c, f"negative[{f.label},m={m}]", cfg)


def weight_tilde(f: NonlinearityFn, m: int, x, cfg: ContourConfig | None = None):
    if m < 1:
        raise ValueError("weight_tilde needs m >= 1")
    return tilde_kernel(f, m, cfg)(x)


def _log_sigma2_series(f, m, x):
    return log_norm_sums(StateSpec(np.sqrt(x), m, f))[1]


def weight_full(f: NonlinearityFn, m: int, x, cfg: ContourConfig | None = None):
    """W(x) = Sigma2(x) x^m W~(x), Sigma2 by direct summation."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    k = tilde_kernel(f, m, cfg)(xs)
    log_pre = np.array([_log_sigma2_series(f, m, v) for v in xs]) + m * np.log(xs)
    out = np.exp(log_pre) * k
    return out if np.ndim(x) else float(out[0])


def log_sigma2_closed(f: NonlinearityFn, m: int, x: float) -> float:
    """log Sigma2 via its hypergeometric closed form (P-T, sqrt n, unity)."""
    kind = f.kind
    if kind is Kind.SQRT_SHIFT:
        nu = f.nu
        return (gammaln(m + 1) + gammaln(m + nu + 1) - gammaln(nu + 1)
                + log_hyp_pfq([m + 1, m + nu + 1], [1, nu + 1, nu + 1], x))
    if kind is Kind.SQRT:
        return 2 * gammaln(m + 1) + log_hyp_pfq([m + 1, m + 1], [1, 1, 1], x)
    if kind is Kind.UNITY:
        return gammaln(m + 1) + log_hyp_pfq([m + 1], [1], x)
    raise NoClosedFormError(f"no closed product for f={f.label}")


def weight_closed_product(f: NonlinearityFn, m: int, x, cfg: ContourConfig | None = None):
    """W(x) as the closed product: hypergeometric prefactor times x^m W~."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    k = tilde_kernel(f, m, cfg)(xs)
    log_pre = np.array([log_sigma2_closed(f, m, v) for v in xs]) + m * np.log(xs)
    out = np.exp(log_pre) * k
    return out if np.ndim(x) else float(out[0])


def _log_negative_sum(f, m, x):
    """log sum_n x^n n! [f^2(n)]! / (((n+m)!)^2 [f^4(n+m)]!)."""
    spec = StateSpec(np.sqrt(x), -m if m else 0, f, Family.NEGATIVE_M)
    log_const = 2 * gammaln(m + 1) + 2 * float(f.log_f2_factorial(m))
    return log_norm_sums(spec)[1] - log_const


def weight_negative_m(f: NonlinearityFn, m: int, x, cfg: ContourConfig | None = None):
    """W^(-m)(x) = K(x) * (normalization series of the negative-m state at |alpha|^2 = x)."""
    m = abs(int(m))
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    k = negative_kernel(f, m, cfg)(xs)
    out = np.exp([_log_negative_sum(f, m, v) for v in xs]) * k
    return out if np.ndim(x) else float(out[0])


def weight_klauder(x):
    """x e^(-x) (x - 1)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("weight_klauder needs x >= 0")
    out = x * np.exp(-x) * (x - 1.0)
    return out[()] if out.ndim == 0 else out


# -- moment targets ---------------------------------------------------------

@dataclass(frozen=True)
class MomentTarget:
    """Expected value of int x^(k-1) kernel(x) dx, stored as a logarithm."""

    k: int
    log_value: float
    tag: str = "generic"
    f: NonlinearityFn | None = None
    m: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    def recompute(self) -> float:
        """log target recomputed from its formula tag."""
        return _TARGET_FORMULAS[self.tag](self.k, self.f, self.m)


def _lf2(f, n):
    return float(f.log_f2_factorial(n))


def _generic(k, f, m):
    n = k - m - 1
    if n < 0:
        raise ValueError(f"moment k={k} diverges for m={m} (need k >= m+1)")
    return 2 * gammaln(n + 1) + 2 * _lf2(f, n) - gammaln(k) - _lf2(f, k - 1)


def _pt(k, f, m):
    nu = f.nu
    n = k - m - 1
    if n < 0:
        raise ValueError(f"moment k={k} diverges for m={m} (need k >= m+1)")
    fact = lambda j: gammaln(j + nu + 1) - gammaln(nu + 1)
    return 2 * gammaln(n + 1) + 2 * fact(n) - gammaln(k) - fact(k - 1)


def _negative(k, f, m):
    n = k - 1
    return 2 * gammaln(n + m + 1) + 2 * _lf2(f, n + m) - gammaln(n + 1) - _lf2(f, n)


def _klauder(k, f, m):
    n = k - 1
    return math.log(n + 1) + gammaln(n + 2)


_TARGET_FORMULAS = {"generic": _generic, "pt": _pt, "negative_m": _negative, "klauder": _klauder}


def moment_targets(f: NonlinearityFn, m: int, count: int = 12, tag: str | None = None):
    """First ``count`` finite moments of W~ (k = m+1 .. m+count)."""
    if tag is None:
        tag = "pt" if f.kind is Kind.SQRT_SHIFT else "generic"
    return [MomentTarget(k, float(_TARGET_FORMULAS[tag](k, f, m)), tag, f, m)
            for k in range(m + 1, m + count + 1)]


def negative_moment_targets(f: NonlinearityFn, m: int, count: int = 12):
    m = abs(int(m))
    return [MomentTarget(n + 1, float(_negative(n + 1, f, m)), "negative_m", f, m)
            for n in range(count)]


def klauder_targets(count: int = 9):
    """int x^n W dx = (n+1)(n+1)! for n = 0..count-1."""
    return [MomentTarget(n + 1, float(_klauder(n + 1, None, 0)), "klauder") for n in range(count)]


# -- moment quadrature -------------------------------------------------------

@dataclass(frozen=True)
class MomentResult:
    k: int
    target: float
    computed: float
    rel_error: float
    tail: float


MOMENT_HEADER = ["k", "target", "computed", "rel_error"]


def _integration_window(g, u_lo=-40.0, u_hi=4.0, step=0.25, floor=1e-16, reach=400.0):
    """[u0, u1] in u = log x outside which |g(e^u) e^u| < floor * peak.

    The scan window grows outward (up to ``reach`` in u) until both ends
    fall below the floor.
    """
    while True:
        u = np.arange(u_lo, u_hi + step / 2, step)
        with np.errstate(over="ignore", under="ignore"):
            vals = np.abs(g(np.exp(u)) * np.exp(u))
        vals = np.where(np.isfinite(vals), vals, 0.0)
        peak = vals.max()
        if not peak > 0:
            raise QuadratureError("integrand vanishes on the scan window")
        big = np.nonzero(vals > floor * peak)[0]
        low_open, high_open = big[0] == 0, big[-1] == len(u) - 1
        if not (low_open or high_open):
            return u[big[0] - 1], u[big[-1] + 1], peak
        if u_hi - u_lo > reach:
            raise QuadratureError("integrand above the floor at the edge of the scan window")
        if low_open:
            u_lo -= 40.0
        if high_open:
            u_hi += 2.0


def _tail(h, u, outward):
    """Exponential-decay tail beyond u.

    The decay rate comes from envelopes (max |h| over short stretches) one
    unit apart, so oscillating kernels do not spoil the slope.
    """
    offs = np.linspace(0.0, 0.5, 6)
    env = lambda c: max(abs(h(c + outward * o)) for o in offs)
    a, b = env(u), env(u + outward)
    if a == 0:
        return 0.0
    rate = math.log(a / b) if b > 0 else np.inf
    if not rate > 0:
        raise QuadratureError("integrand is not decaying at the window edge")
    return a / rate


def moment_check(kernel, targets, *, rtol: float = 1e-10, tail_budget: float = 1e-9,
                 limit: int = 400) -> list[MomentResult]:
    """Quadrature of int x^(k-1) kernel(x) dx against each target.

    The integral is taken in u = log x over the window where the integrand
    exceeds 1e-16 of its peak, with exponential tail estimates at both ends.
    """
    results = []
    for t in targets:
        k = t.k
        g = lambda x, k=k: x ** (k - 1) * kernel(x)
        u0, u1, peak = _integration_window(g)
        h = lambda u: float(g(math.exp(u)) * math.exp(u))
        scale = quad(lambda u: abs(h(u)), u0, u1, limit=limit, epsrel=1e-6)[0]
        val, err, *info = quad(h, u0, u1, limit=limit, epsabs=rtol * scale * 1e-2,
                               epsrel=rtol, full_output=True)
        if len(info) > 1 and err > 1e3 * rtol * abs(val):
            raise QuadratureError(f"k={k}: quadrature not converged ({info[1][:60]})")
        tail = _tail(h, u1, +1) + _tail(h, u0, -1)
        if tail > tail_budget * scale:
            raise QuadratureError(f"k={k}: tail estimate {tail:.3g} exceeds budget")
        total = val + math.copysign(tail, val)
        results.append(MomentResult(k, t.value, total, abs(total - t.value) / t.value, tail))
    return results


def write_moment_csv(results, stream=None):
    stream = sys.stdout if stream is None else stream
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(MOMENT_HEADER)
    for r in results:
        w.writerow([r.k, f"{r.target:.17g}", f"{r.computed:.17g}", f"{r.rel_error:.17g}"])


# -- sign scan ----------------------------------------------------------------

@dataclass(frozen=True)
class SignReport:
    """Sign changes (bracketing x pairs) and the most negative sample."""

    sign_changes: tuple[tuple[float, float], ...]
    min_value: float
    argmin: float
    n_points: int

    @property
    def positive(self) -> bool:
        return not self.sign_changes and self.min_value > 0


def log_grid(lo=1e-2, hi=40.0, n=200):
    return np.geomspace(lo, hi, n)


def positivity_scan(kernel, grid) -> SignReport:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 200:
        raise ValueError("positivity_scan needs a 1-d grid of at least 200 points")
    if np.any(grid <= 0):
        raise ValueError("grid must be positive")
    ratios = np.diff(np.log(grid))
    if not np.allclose(ratios, ratios[0], rtol=1e-6, atol=0) or ratios[0] <= 0:
        raise ValueError("grid must be increasing and log-spaced")
    vals = np.asarray(kernel(grid), dtype=float)
    nz = np.nonzero(vals != 0)[0]
    s = np.sign(vals[nz])
    flips = np.nonzero(s[1:] != s[:-1])[0]
    changes = tuple((float(grid[nz[i]]), float(grid[nz[i + 1]])) for i in flips)
    i = int(np.argmin(vals))
    return SignReport(changes, float(vals[i]), float(grid[i]), len(grid))


def write_weight_csv(xs, ws, stream=None, report: SignReport | None = None):
    """Rows ``x,W``; an optional sign-scan summary as trailing '#' lines."""
    stream = sys.stdout if stream is None else stream
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["x", "W"])
    for x, v in zip(xs, ws):
        w.writerow([f"{x:.17g}", f"{v:.17g}"])
    if report is not None:
        stream.write(f"# sign_changes={len(report.sign_changes)}\n")
        for lo, hi in report.sign_changes:
            stream.write(f"# sign_change_between={lo:.17g},{hi:.17g}\n")
        stream.write(f"# min_value={report.min_value:.17g}\n# argmin={report.argmin:.17g}\n")


# -- determinacy heuristic -------------------------------------------------------

@dataclass(frozen=True)
class CarlemanReport:
    """HEURISTIC: partial sums of mu_e^(-1/(2e)); not a determinacy proof."""

    orders: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray
    slope: float
    trend: str
    label: str = "HEURISTIC"


def carleman_diagnostic(moments, threshold: float = -0.5) -> CarlemanReport:
    """Stieltjes-form Carleman partial sums with a divergence-trend flag.

    Moment orders are e = k - 1 (the power of x); e = 0 is skipped. The
    flag fits log(e * t_e) against log e over the upper half of the orders:
    harmonic-like terms give slope >= 0 (divergent trend, determinacy
    suggested), summable c/e^2 terms give slope near -1.
    """
    moments = list(moments)
    if len(moments) < 10:
        raise ValueError("carleman_diagnostic needs at least 10 moments")
    e = np.array([t.k - 1 for t in moments], dtype=float)
    lv = np.array([t.log_value for t in moments])
    keep = e > 0
    e, lv = e[keep], lv[keep]
    terms = np.exp(-lv / (2 * e))
    sums = np.cumsum(terms)
    half = len(e) // 2
    slope = float(np.polyfit(np.log(e[half:]), np.log(e[half:] * terms[half:]), 1)[0])
    trend = "divergent" if slope > threshold else "convergent"
    return CarlemanReport(e, terms, sums, slope, trend)


def shift_property_error(spec: MeijerGSpec, x, s: float, cfg: ContourConfig | None = None):
    """Relative mismatch of x^s G(x | a; b) against G(x | a+s; b+s)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lhs = x ** s * meijer_g(spec, x, cfg)
    rhs = meijer_g(spec.shifted(s), x, cfg)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)))
