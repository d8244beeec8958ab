"""Deformation functions f(n) and their deformed factorials.

Every supported kind is a gamma-ratio nonlinearity,

    f(n)^2 = prod_i (n - 1 + a_i) / prod_j (n - 1 + b_j),

so that [f^2(n)]! = prod_i Gamma(n + a_i)/Gamma(a_i) * prod_j Gamma(b_j)/Gamma(n + b_j).
The (a, b) lists are what the weight-function code needs to assemble
Meijer G parameters.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import NonlinearityError


class Kind(enum.Enum):
    UNITY = "unity"
    SQRT_SHIFT = "pt"
    SQRT = "sqrtn"
    INV_SQRT = "invsqrtn"
    INV_SQRT_SHIFT = "bg"
    GAMMA_RATIO = "gamma"


@dataclass(frozen=True)
class NonlinearityFn:
    """Deformation function f(n) with convention [f(0)]! = 1.

    Use the constructors (``unity``, ``pt``, ``sqrt``, ``inv_sqrt``,
    ``barut_girardello``, ``gamma_ratio``) rather than the raw fields.
    """

    kind: Kind
    nu: float | None = None
    kappa: float | None = None
    num: tuple[float, ...] = ()
    den: tuple[float, ...] = ()
    allow_nu2: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.kind is Kind.SQRT_SHIFT:
            if self.nu is None:
                raise NonlinearityError("SqrtShift needs nu")
            if not (self.nu > 2 or (self.nu == 2 and self.allow_nu2)):
                raise NonlinearityError(
                    f"nu must be > 2 (nu = 2 needs allow_nu2=True), got {self.nu}")
        if self.kind is Kind.INV_SQRT_SHIFT and not (self.kappa is not None and self.kappa > 0):
            raise NonlinearityError(f"kappa must be > 0, got {self.kappa}")
        if self.kind is Kind.GAMMA_RATIO:
            if any(p <= 0 for p in (*self.num, *self.den)):
                raise NonlinearityError("gamma-ratio parameters must be positive")

    @classmethod
    def unity(cls):
        return cls(Kind.UNITY)

    @classmethod
    def pt(cls, nu=3.0, allow_nu2=False):
        """Poschl-Teller: f(n) = sqrt(n + nu)."""
        return cls(Kind.SQRT_SHIFT, nu=float(nu), allow_nu2=allow_nu2)

    @classmethod
    def sqrt(cls):
        return cls(Kind.SQRT)

    @classmethod
    def inv_sqrt(cls):
        """Harmonious states: f(n) = 1/sqrt(n)."""
        return cls(Kind.INV_SQRT)

    @classmethod
    def barut_girardello(cls, kappa):
        """f(n) = 1/sqrt(n + 2 kappa - 1)."""
        return cls(Kind.INV_SQRT_SHIFT, kappa=float(kappa))

    @classmethod
    def gamma_ratio(cls, num=(), den=()):
        return cls(Kind.GAMMA_RATIO, num=tuple(map(float, num)), den=tuple(map(float, den)))

    @property
    def gamma_params(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(a, b) with f(n)^2 = prod(n-1+a)/prod(n-1+b)."""
        k = self.kind
        if k is Kind.UNITY:
            return (), ()
        if k is Kind.SQRT_SHIFT:
            return (self.nu + 1.0,), ()
        if k is Kind.SQRT:
            return (1.0,), ()
        if k is Kind.INV_SQRT:
            return (), (1.0,)
        if k is Kind.INV_SQRT_SHIFT:
            return (), (2.0 * self.kappa,)
        return self.num, self.den

    @property
    def growth(self) -> int:
        """Exponent d in f(n)^2 ~ n^d as n -> infinity."""
        a, b = self.gamma_params
        return len(a) - len(b)

    def f2(self, n):
        """f(n)^2, elementwise. f2(0) may be 0 or inf."""
        n = np.asarray(n, dtype=float)
        a, b = self.gamma_params
        out = np.ones_like(n)
        with np.errstate(divide="ignore"):
            for p in a:
                out = out * (n - 1.0 + p)
            for p in b:
                out = out / (n - 1.0 + p)
        return out

    def __call__(self, n):
        return np.sqrt(self.f2(n))

    def log_f2_factorial(self, n):
        """log [f^2(n)]! for real n >= 0 via log-gamma (no recurrence)."""
        n = np.asarray(n, dtype=float)
        a, b = self.gamma_params
        out = np.zeros_like(n)
        for p in a:
            out = out + gammaln(n + p) - gammaln(p)
        for p in b:
            out = out - gammaln(n + p) + gammaln(p)
        return out

    @property
    def label(self) -> str:
        k = self.kind
        if k is Kind.SQRT_SHIFT:
            return f"pt(nu={self.nu:g})"
        if k is Kind.INV_SQRT_SHIFT:
            return f"bg(kappa={self.kappa:g})"
        if k is Kind.GAMMA_RATIO:
            return f"gamma(num={list(self.num)},den={list(self.den)})"
        return k.value


@dataclass(frozen=True)
class DeformedFactorial:
    """log [f(n)]! for n = 0..N, built by the exact product recurrence."""

    log_table: np.ndarray
    source: NonlinearityFn

    @property
    def N(self) -> int:
        return len(self.log_table) - 1

    def log_f2(self, n):
        """log [f^2(n)]! (twice the table)."""
        return 2.0 * self.log_table[n]

    def log_f4(self, n):
        return 4.0 * self.log_table[n]


def deformed_factorial(f: NonlinearityFn, N: int) -> DeformedFactorial:
    """Tabulate log [f(n)]! for n = 0..N.

    Raises NonlinearityError if f(n) <= 0 (or not finite) for some 1 <= n <= N.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    n = np.arange(1, N + 1)
    f2 = f.f2(n)
    if not np.all(np.isfinite(f2) & (f2 > 0)):
        bad = int(n[~(np.isfinite(f2) & (f2 > 0))][0])
        raise NonlinearityError(f"{f.label}: f({bad}) is not positive")
    table = np.zeros(N + 1)
    table[1:] = np.cumsum(0.5 * np.log(f2))
    table.setflags(write=False)
    return DeformedFactorial(table, f)
