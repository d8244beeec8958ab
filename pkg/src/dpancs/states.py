"""Deformed photon-added nonlinear coherent states in truncated Fock space.

Coefficients are assembled in log space and exponentiated only at the end;
direct factorial products overflow double precision near n ~ 170.
"""
from __future__ import annotations

import csv
import enum
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DivergenceError, NoClosedFormError
from .nonlinearity import Kind, NonlinearityFn, deformed_factorial
from .special import laguerre, log_bessel_i, log_hyp_pfq

_CHUNK = 512
_MAX_TERMS = 2_000_000
_FAR = np.log(1e-40)


class Family(enum.Enum):
    NLCS = "nlcs"
    PACS = "pacs"
    DPANCS = "dpancs"
    NEGATIVE_M = "negative"


@dataclass(frozen=True)
class StateSpec:
    """Parameters of one state.

    ``m`` is the photon-addition order. For ``Family.NEGATIVE_M`` it may be
    given as either sign; the order used is ``abs(m)``.
    """

    alpha: complex
    m: int = 0
    f: NonlinearityFn | None = None
    family: Family = Family.DPANCS

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if int(self.m) != self.m:
            raise ValueError("m must be an integer")
        object.__setattr__(self, "m", int(self.m))
        if self.family is Family.PACS:
            if self.f is not None and self.f.kind is not Kind.UNITY:
                raise ValueError("PACS family requires f = Unity")
            object.__setattr__(self, "f", NonlinearityFn.unity())
        elif self.f is None:
            object.__setattr__(self, "f", NonlinearityFn.unity())
        if self.family is Family.NLCS and self.m != 0:
            raise ValueError("NLCS family has m = 0")
        if self.m < 0 and self.family is not Family.NEGATIVE_M:
            raise ValueError("negative m requires family NEGATIVE_M")

    @property
    def order(self) -> int:
        return abs(self.m)

    @property
    def x(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def negative(self) -> bool:
        return self.family is Family.NEGATIVE_M

    @property
    def offset(self) -> int:
        """Fock index of the first series term."""
        return 0 if self.negative else self.order


@dataclass(frozen=True)
class FockVector:
    """Normalized coefficients over |0>..|N>.

    ``tail_bound`` is the relative squared weight dropped beyond N.
    """

    coefficients: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def N(self) -> int:
        return len(self.coefficients) - 1

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)

    def padded(self, N: int) -> np.ndarray:
        out = np.zeros(N + 1, dtype=complex)
        k = min(N, self.N) + 1
        out[:k] = self.coefficients[:k]
        return out

    def to_csv(self, stream=None, skip_zeros=False):
        """Write ``n,re,im`` rows with 17 significant digits."""
        stream = sys.stdout if stream is None else stream
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n, c in enumerate(self.coefficients):
            if skip_zeros and c == 0:
                continue
            w.writerow([n, f"{c.real:.17g}", f"{c.imag:.17g}"])


def _log_fact2(f, n):
    """log [f^2(n)]! on an integer array via the product recurrence."""
    n = np.asarray(n)
    table = deformed_factorial(f, int(n.max()) if n.size else 0)
    return table.log_f2(n)


def _n_log_x(n, x):
    if x == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return n * np.log(x)


def log_terms(spec: StateSpec, n: np.ndarray) -> np.ndarray:
    """log of the squared-magnitude series terms of the state, index n >= 0.

    DPANCS/PACS/NLCS: x^n (n+m)! [f^2(n+m)]! / ((n!)^2 [f^4(n)]!), Fock index n+m.
    NEGATIVE_M: x^n n! (m!)^2 [f^2(n)]! [f^4(m)]! / (((n+m)!)^2 [f^4(n+m)]!), Fock index n.
    """
    n = np.asarray(n)
    m, f, x = spec.order, spec.f, spec.x
    top = int(n.max()) + m if n.size else m
    tab = deformed_factorial(f, top)
    if spec.negative:
        return (_n_log_x(n, x) + gammaln(n + 1) + tab.log_f2(n) + 2 * gammaln(m + 1)
                + tab.log_f4(m) - 2 * gammaln(n + m + 1) - tab.log_f4(n + m))
    return (_n_log_x(n, x) + gammaln(n + m + 1) + tab.log_f2(n + m)
            - 2 * gammaln(n + 1) - tab.log_f4(n))


def log_nlcs_terms(f: NonlinearityFn, x: float, n: np.ndarray) -> np.ndarray:
    """log of x^n / (n! [f^2(n)]!), the nonlinear-coherent-state sum."""
    n = np.asarray(n)
    return _n_log_x(n, x) - gammaln(n + 1) - _log_fact2(f, n)


def check_convergent(spec_or_f, x=None):
    """Raise DivergenceError when the state series diverges.

    Term ratios behave like x n^-(1+d) with f(n)^2 ~ n^d, so the series
    converges for d > -1, for d == -1 only inside the unit disk.
    """
    if isinstance(spec_or_f, StateSpec):
        f, x = spec_or_f.f, spec_or_f.x
    else:
        f = spec_or_f
    if x == 0:
        return
    e = 1 + f.growth
    if e > 0 or (e == 0 and x < 1):
        return
    raise DivergenceError(
        f"series diverges for f={f.label} at |alpha|^2={x:g} "
        "(finite convergence disk or none)")


def _full_series(logfn):
    """Evaluate logfn on 0, 1, ... until terms are negligible and decreasing.

    Returns (log_terms, log_remainder) where log_remainder bounds the
    geometric tail beyond the returned array.
    """
    parts = []
    peak = -np.inf
    n0 = 0
    while n0 < _MAX_TERMS:
        chunk = logfn(np.arange(n0, n0 + _CHUNK))
        parts.append(chunk)
        peak = max(peak, chunk.max())
        n0 += _CHUNK
        if np.isneginf(chunk[-1]) and np.isfinite(peak) and np.all(np.isneginf(chunk[1:])):
            return np.concatenate(parts), -np.inf
        dr = chunk[-1] - chunk[-2]
        if dr < 0 and chunk[-1] < peak + _FAR:
            r = np.exp(dr)
            return np.concatenate(parts), chunk[-1] + np.log(r / (1 - r))
    raise DivergenceError("series terms did not decay within the term cap")


def _suffix_logsum(lt):
    """s[k] = log sum_{j >= k} exp(lt[j])."""
    return np.logaddexp.accumulate(lt[::-1])[::-1]


def _relative_tails(lt, log_rem):
    """tail[k] = (sum_{j > k} t_j) / (sum_j t_j), including the remainder."""
    suffix = np.logaddexp(_suffix_logsum(lt), log_rem)
    total = suffix[0]
    tails = np.empty_like(lt)
    tails[:-1] = suffix[1:] - total
    tails[-1] = log_rem - total
    return np.exp(tails)


def choose_truncation(spec: StateSpec, tol: float = 1e-14) -> int:
    """Smallest Fock cutoff N with relative squared tail < tol (N >= |m| + 10)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    check_convergent(spec)
    lt, rem = _full_series(lambda n: log_terms(spec, n))
    tails = _relative_tails(lt, rem)
    k = int(np.argmax(tails < tol))
    if not spec.negative and spec.order > 0:
        lt1, rem1 = _full_series(lambda n: log_nlcs_terms(spec.f, spec.x, n))
        t1 = _relative_tails(lt1, rem1)
        k = max(k, int(np.argmax(t1 < tol)))
    return max(k + spec.offset, spec.order + 10)


def build_state(spec: StateSpec, N: int | None = None, tol: float = 1e-14) -> FockVector:
    """Normalized truncated Fock expansion of ``spec``.

    If ``N`` is None it is chosen by ``choose_truncation(spec, tol)``. The
    normalization is recomputed from the retained coefficients.
    """
    check_convergent(spec)
    if N is None:
        N = choose_truncation(spec, tol)
    if N < spec.offset:
        raise ValueError(f"N={N} is below the first populated level {spec.offset}")
    n = np.arange(N - spec.offset + 1)
    lt = log_terms(spec, n)
    log_total = logsumexp(lt)
    mags = np.exp(0.5 * (lt - log_total))
    phase = np.exp(1j * np.angle(spec.alpha) * n)
    c = np.zeros(N + 1, dtype=complex)
    c[spec.offset:] = mags * phase
    c /= np.linalg.norm(c)
    lt_full, rem = _full_series(lambda k: log_terms(spec, k))
    if len(lt_full) > len(n):
        tail = float(np.exp(np.logaddexp(logsumexp(lt_full[len(n):]), rem)
                            - np.logaddexp(logsumexp(lt_full), rem)))
    else:
        tail = float(np.exp(rem - np.logaddexp(logsumexp(lt_full), rem)))
    return FockVector(c, tail)


def log_norm_sums(spec: StateSpec) -> tuple[float, float]:
    """(log Sigma1, log Sigma2): NLCS sum and the state's squared-norm sum."""
    check_convergent(spec)
    lt2, rem2 = _full_series(lambda n: log_terms(spec, n))
    lt1, rem1 = _full_series(lambda n: log_nlcs_terms(spec.f, spec.x, n))
    return (float(np.logaddexp(logsumexp(lt1), rem1)),
            float(np.logaddexp(logsumexp(lt2), rem2)))


def normalization_series(spec: StateSpec) -> float:
    """N^{m,f}_alpha from the defining sums (negative family: its own sum)."""
    s1, s2 = log_norm_sums(spec)
    if spec.negative:
        return float(np.exp(-0.5 * s2))
    return float(np.exp(0.5 * (s1 - s2)))


def normalization_closed_form(spec: StateSpec) -> float:
    """N^{m,f}_alpha via modified Bessel and 2F3 closed forms.

    Supported: f = sqrt(n + nu), f = sqrt(n), f = 1 (Laguerre form).
    Raises NoClosedFormError otherwise.
    """
    if spec.negative:
        raise NoClosedFormError("no closed form for negative-m states")
    m, x, kind = spec.order, spec.x, spec.f.kind
    if kind is Kind.UNITY:
        return 1.0 / np.sqrt(gamma_fact(m) * laguerre(m, -x))
    if kind is Kind.SQRT:
        log_s1 = log_bessel_i(0, 2 * np.sqrt(x)) if x > 0 else 0.0
        log_s2 = 2 * gammaln(m + 1) + log_hyp_pfq([m + 1, m + 1], [1, 1, 1], x)
        return float(np.exp(0.5 * (log_s1 - log_s2)))
    if kind is Kind.SQRT_SHIFT:
        nu = spec.f.nu
        if x > 0:
            log_s1 = gammaln(nu + 1) - 0.5 * nu * np.log(x) + log_bessel_i(nu, 2 * np.sqrt(x))
        else:
            log_s1 = 0.0
        log_s2 = (gammaln(m + 1) + gammaln(m + nu + 1) - gammaln(nu + 1)
                  + log_hyp_pfq([m + 1, m + nu + 1], [1, nu + 1, nu + 1], x))
        return float(np.exp(0.5 * (log_s1 - log_s2)))
    raise NoClosedFormError(f"no closed form for f={spec.f.label}")


def gamma_fact(m):
    return float(np.exp(gammaln(m + 1)))


def f_d(n, f: NonlinearityFn, m: int):
    """Nonlinearity of the DPANCS viewed as an f-deformed coherent state.

    m >= 0: (n-m+1) f^2(n-m+1) / ((n+1) f(n+1)); values for n < m are
    outside the state's support and returned as 0.
    m < 0: (n+|m|+1) f^2(n+|m|+1) / ((n+1) f(n+1)).
    """
    n = np.asarray(n, dtype=float)
    if m >= 0:
        k = n - m + 1
        with np.errstate(invalid="ignore", divide="ignore"):
            val = k * f.f2(k) / ((n + 1) * f(n + 1))
        out = np.where(n >= m, val, 0.0)
    else:
        k = n - m + 1
        out = k * f.f2(k) / ((n + 1) * f(n + 1))
    return out[()] if out.ndim == 0 else out


def f_d_support(n, m):
    """Mask of n where f_d is defined by the formula (not the n < m fill)."""
    n = np.asarray(n)
    return n >= m if m >= 0 else np.ones_like(n, dtype=bool)


def g_commutator(n, f: NonlinearityFn, m: int):
    """g(n, m) = (n+1) f^2(n+1) - (n-m+1) f^2(n-m+1)."""
    n = np.asarray(n, dtype=float)
    k = n - m + 1
    if np.any(k < 0):
        raise ValueError("g(n, m) needs n >= m - 1")
    with np.errstate(invalid="ignore", divide="ignore"):
        second = np.where(k == 0, 0.0, k * f.f2(k))
    out = (n + 1) * f.f2(n + 1) - second
    return out[()] if out.ndim == 0 else out
