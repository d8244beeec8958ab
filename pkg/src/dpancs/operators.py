"""Dense truncated ladder-operator matrices and algebra checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nonlinearity import NonlinearityFn
from .states import FockVector, StateSpec, f_d, g_commutator


def _f_values(f, idx):
    """f at integer indices; 0 where the index is negative or f is not finite."""
    idx = np.asarray(idx, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = f(np.where(idx < 0, 1.0, idx))
    return np.where((idx < 0) | ~np.isfinite(v), 0.0, v)


@dataclass(frozen=True)
class LadderMatrices:
    a: np.ndarray
    ad: np.ndarray
    A: np.ndarray
    Ad: np.ndarray
    n: np.ndarray
    f: NonlinearityFn

    @property
    def N(self):
        return self.a.shape[0] - 1


def annihilation(N):
    return np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), 1)


def ladder_matrices(f: NonlinearityFn, N: int) -> LadderMatrices:
    a = annihilation(N)
    fn = np.diag(_f_values(f, np.arange(N + 1)))
    A = a @ fn
    return LadderMatrices(a=a, ad=a.T.copy(), A=A, Ad=A.T.copy(),
                          n=np.diag(np.arange(N + 1, dtype=float)), f=f)


@dataclass(frozen=True)
class AlgebraResiduals:
    """Max-norm residuals relative to the left-hand side's max-norm."""

    power: float
    shift: float
    commutator: float

    @property
    def worst(self):
        return max(self.power, self.shift, self.commutator)


def _rel(lhs, rhs, rows):
    scale = np.max(np.abs(lhs[:rows])) or 1.0
    return float(np.max(np.abs(lhs[:rows] - rhs[:rows])) / scale)


def verify_algebra(f: NonlinearityFn, m: int, N: int) -> AlgebraResiduals:
    """Check three deformed-ladder identities away from the truncation edge.

    power:      A^dag^m = [f(n)]!/[f(n-m)]! a^dag^m
    shift:      a^dag^m f(n) = f(n-m) a^dag^m
    commutator: [A, A^dag^m] = g(n, m) A^dag^(m-1)

    The top m+1 rows are excluded.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if N < m + 2:
        raise ValueError("N must be >= m + 2")
    L = ladder_matrices(f, N)
    mp = np.linalg.matrix_power
    rows = N - m
    idx = np.arange(N + 1)

    Adm = mp(L.Ad, m)
    adm = mp(L.ad, m)
    logfac = np.zeros(N + 1)
    fv = _f_values(f, np.arange(1, N + 1))
    with np.errstate(divide="ignore"):
        logfac[1:] = np.cumsum(np.log(fv))
    ratio = np.zeros(N + 1)
    ok = idx >= m
    ratio[ok] = np.exp(logfac[idx[ok]] - logfac[idx[ok] - m])
    power = _rel(Adm, np.diag(ratio) @ adm, rows)

    fdiag = np.diag(_f_values(f, idx))
    fshift = np.diag(_f_values(f, idx - m))
    shift = _rel(adm @ fdiag, fshift @ adm, rows)

    gdiag = np.zeros(N + 1)
    okg = idx >= m - 1
    gdiag[okg] = g_commutator(idx[okg], f, m)
    comm = L.A @ Adm - Adm @ L.A
    commutator = _rel(comm, np.diag(gdiag) @ mp(L.Ad, m - 1), rows)
    return AlgebraResiduals(power, shift, commutator)


def verify_eigenrelation(state: FockVector, spec: StateSpec) -> float:
    """|| f_d(n) a psi - alpha psi || on levels 0..N-1."""
    N = state.N
    psi = state.coefficients
    m = -spec.order if spec.negative else spec.order
    fd = np.diag(f_d(np.arange(N + 1), spec.f, m))
    resid = fd @ annihilation(N) @ psi - spec.alpha * psi
    return float(np.linalg.norm(resid[:N]))
