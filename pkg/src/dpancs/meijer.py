"""Meijer G-function by numerical Mellin-Barnes contour quadrature.

    G^{m,n}_{p,q}(x | a; b) = (1/2 pi i) int M(s) x^{-s} ds,

    M(s) = prod_{j<=m} Gamma(b_j + s) prod_{j<=n} Gamma(1 - a_j - s)
           / (prod_{j>m} Gamma(1 - b_j - s) prod_{j>n} Gamma(a_j + s)),

along the vertical line Re s = sigma separating the two pole families.
No residue sums are used, so repeated b_j (high-order poles) need no
special handling. Only real parameters with 2(m+n) > p+q are supported;
the integrand then decays exponentially along the line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, loggamma

from .errors import ContourError

_TAIL = np.log(1e-18)
_SIGMA_GRID = 16.0


@dataclass(frozen=True)
class MeijerGSpec:
    """Orders (m, n) and parameter lists a (length p), b (length q)."""

    a: tuple[float, ...]
    b: tuple[float, ...]
    m: int
    n: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError(f"invalid orders m={self.m}, n={self.n} for p={self.p}, q={self.q}")
        if not self.p < self.q:
            raise ValueError("only p < q is supported")

    @property
    def p(self):
        return len(self.a)

    @property
    def q(self):
        return len(self.b)

    @classmethod
    def kernel(cls, a, b, cancel=True):
        """G^{q,0}_{p,q}: Mellin transform prod Gamma(b+s) / prod Gamma(a+s).

        Equal a/b pairs cancel exactly in that ratio and are dropped.
        """
        a, b = sorted(map(float, a)), sorted(map(float, b))
        if cancel:
            for v in list(a):
                if v in b:
                    a.remove(v)
                    b.remove(v)
        return cls(tuple(a), tuple(b), m=len(b), n=0)

    def shifted(self, s):
        """Parameters shifted by s: equals x^s G(x)."""
        return MeijerGSpec(tuple(v + s for v in self.a), tuple(v + s for v in self.b),
                           self.m, self.n)

    @property
    def strip(self):
        """Open interval of admissible contour abscissae.

        For G^{q,0}_{p,q} kernels, poles of Gamma(b_j + s) cancelled by zeros
        of 1/Gamma(a_i + s) (b_j - a_i a non-negative integer) are ignored;
        the left edge is the rightmost pole that survives.
        """
        hi = 1.0 - max(self.a[:self.n]) if self.n else np.inf
        if not self.m:
            return -np.inf, hi
        if self.n == 0 and self.m == self.q:
            return _surviving_pole(self.a, self.b), hi
        return -min(self.b[:self.m]), hi

    def log_mellin(self, s):
        """log M(s) (complex); -inf where a denominator gamma has a pole."""
        s = np.asarray(s, dtype=complex)
        a, b, m, n = self.a, self.b, self.m, self.n
        num = sum((loggamma(bj + s) for bj in b[:m]), np.zeros_like(s))
        num = num + sum((loggamma(1 - aj - s) for aj in a[:n]), np.zeros_like(s))
        den = np.zeros_like(s)
        dead = np.zeros(s.shape, dtype=bool)
        for z in [1 - bj - s for bj in b[m:]] + [aj + s for aj in a[n:]]:
            lg = loggamma(z)
            pole = ~np.isfinite(lg)
            dead |= pole
            den = den + np.where(pole, 0, lg)
        out = num - den
        return np.where(dead, -np.inf + 0j, out)

    def log_mellin_real(self, c):
        """log |M(c)| for real c inside the strip."""
        a, b, m, n = self.a, self.b, self.m, self.n
        return (sum(gammaln(bj + c) for bj in b[:m]) + sum(gammaln(1 - aj - c) for aj in a[:n])
                - sum(gammaln(1 - bj - c) for bj in b[m:]) - sum(gammaln(aj + c) for aj in a[n:]))


def _lattice_count(params, s0):
    """Number of params with -s0 - param a non-negative integer."""
    k = -s0 - np.asarray(params)
    return int(np.sum((k > -1e-9) & (np.abs(k - np.round(k)) < 1e-9)))


def _surviving_pole(a, b, depth=400):
    """Rightmost s with net pole order > 0 in prod Gamma(b+s)/prod Gamma(a+s)."""
    cands = sorted({-bj - k for bj in b for k in range(depth)}, reverse=True)
    for s0 in cands:
        if _lattice_count(b, s0) > _lattice_count(a, s0):
            return float(s0)
    raise ContourError("no surviving poles within search depth")


@dataclass(frozen=True)
class ContourConfig:
    """Vertical-line trapezoid rule on [sigma - iT, sigma + iT].

    ``sigma=None`` selects the saddle point of |M(sigma)| x^-sigma, kept at
    least ``margin`` inside the admissible strip. With ``auto_extend`` the
    half-extent is doubled (node count with it, so the step is unchanged)
    until the integrand at |t| = T is below 1e-18 of its peak.
    """

    sigma: float | None = None
    half_extent: float = 60.0
    nodes: int = 2048
    rule: str = "trapezoid"
    margin: float = 0.5
    auto_extend: bool = True
    max_half_extent: float = 4000.0

    def __post_init__(self):
        if self.nodes < 64:
            raise ValueError("node count must be >= 64")
        if self.rule != "trapezoid":
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")

    @property
    def step(self):
        return 2.0 * self.half_extent / (self.nodes - 1)

    def refined(self, factor=2):
        """Both extent and node count scaled (same step)."""
        return ContourConfig(self.sigma, self.half_extent * factor, self.nodes * factor,
                             self.rule, self.margin, self.auto_extend, self.max_half_extent)


DEFAULT_CONTOUR = ContourConfig()


def _check(spec: MeijerGSpec):
    if not 2 * (spec.m + spec.n) > spec.p + spec.q:
        raise ContourError("integrand does not decay along a vertical line (need 2(m+n) > p+q)")
    lo, hi = spec.strip
    if not lo < hi:
        raise ContourError(f"poles are not separable: strip ({lo}, {hi}) is empty")
    return lo, hi


def choose_sigma(spec: MeijerGSpec, x: float, margin: float = 0.5) -> float:
    lo, hi = _check(spec)
    if np.isfinite(lo) and np.isfinite(hi):
        delta = min(margin, (hi - lo) / 4)
    else:
        delta = margin
    left = lo + delta if np.isfinite(lo) else hi - delta - 50.0 - 4 * abs(np.log(x))
    right = hi - delta if np.isfinite(hi) else left + 50.0 + 4 * x
    lx = np.log(x)
    # evaluated half a unit off the real axis: smooth across polynomial zeros
    res = minimize_scalar(lambda c: spec.log_mellin(c + 0.5j).real - c * lx,
                          bounds=(left, right), method="bounded",
                          options={"xatol": 1e-3})
    c = np.round(res.x * _SIGMA_GRID) / _SIGMA_GRID
    c = float(min(max(c, left), right))
    return _off_lattice(spec, c)


def _off_lattice(spec, c):
    """Nudge c so that no gamma argument sits on a pole at t = 0."""
    params = [*spec.a, *spec.b]
    while any(abs(c + p - round(c + p)) < 1e-9 and c + p < 0.5 for p in params):
        c += 1.0 / (2 * _SIGMA_GRID)
    return c


@lru_cache(maxsize=512)
def _nodes(spec: MeijerGSpec, sigma: float, step: float, count: int):
    t = step * np.arange(count)
    return t, spec.log_mellin(sigma + 1j * t)


def _line_integral(spec, sigma, cfg, lx):
    step = cfg.step
    T = cfg.half_extent
    while True:
        count = int(round(T / step)) + 1
        t, lm = _nodes(spec, sigma, step, count)
        expo = lm - (sigma + 1j * t)[None, :] * lx[:, None]
        peak = np.max(expo.real, axis=1)
        tail = expo.real[:, -1] - peak
        if np.all(tail < _TAIL):
            break
        if not cfg.auto_extend or 2 * T > cfg.max_half_extent:
            raise ContourError(
                f"contour tail not converged at T={T:g} (relative {np.exp(tail.max()):.3g})")
        T *= 2
    w = np.full(count, step)
    w[0] = w[-1] = step / 2
    vals = np.exp(expo) @ w
    return vals.real / np.pi


def meijer_g(spec: MeijerGSpec, x, cfg: ContourConfig | None = None):
    """Evaluate G^{m,n}_{p,q}(x | a; b) for x > 0 (scalar or array)."""
    cfg = DEFAULT_CONTOUR if cfg is None else cfg
    lo, hi = _check(spec)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xs > 0)):
        raise ValueError("meijer_g needs x > 0")
    if cfg.sigma is not None:
        if not lo < cfg.sigma < hi:
            raise ContourError(f"sigma={cfg.sigma} outside admissible strip ({lo}, {hi})")
        sigmas = np.full(xs.shape, float(cfg.sigma))
    else:
        sigmas = np.array([choose_sigma(spec, v, cfg.margin) for v in xs])
    out = np.empty_like(xs)
    for sig in np.unique(sigmas):
        sel = sigmas == sig
        out[sel] = _line_integral(spec, float(sig), cfg, np.log(xs[sel]))
    return out if np.ndim(x) else float(out[0])


def self_consistency(spec: MeijerGSpec, x, cfg: ContourConfig | None = None) -> float:
    """Max relative change when T and node count are both doubled."""
    cfg = DEFAULT_CONTOUR if cfg is None else cfg
    v1 = np.atleast_1d(meijer_g(spec, x, cfg))
    v2 = np.atleast_1d(meijer_g(spec, x, cfg.refined()))
    return float(np.max(np.abs(v1 - v2) / np.maximum(np.abs(v2), 1e-300)))
