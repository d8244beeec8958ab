"""Conditional generation of DPANCSs with an intensity-dependent m-photon coupling.

The field starts in a nonlinear coherent state with the atom excited and
evolves under H = g (sigma_+ A^m + A^dag^m sigma_-), A = a f(n). Each
excitation manifold {|e, n>, |g, n+m>} is invariant, with coupling

    lambda_n = <n+m| A^dag^m |n> = prod_{j=1..m} f(n+j) sqrt(n+j),

so the propagator is a 2x2 rotation by eta*lambda_n per manifold. Detecting
the atom in |g> leaves the field proportional to sum_n c_n sin(eta lambda_n) |n+m>,
which approaches A^dag^m |alpha, f> as eta -> 0.
"""
from __future__ import annotations

import csv
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoClickError, TruncationWarning
from .nonlinearity import NonlinearityFn
from .states import FockVector, StateSpec, build_state, choose_truncation

LEAK_THRESHOLD = 1e-12
NO_CLICK = 1e-30
GENERATION_HEADER = ["eta", "fidelity", "success_prob"]


@dataclass(frozen=True)
class AtomFieldState:
    """Field amplitudes conditioned on the atom being excited / in the ground state."""

    excited: np.ndarray
    ground: np.ndarray

    def __post_init__(self):
        e = np.array(self.excited, dtype=complex)
        g = np.array(self.ground, dtype=complex)
        if e.shape != g.shape or e.ndim != 1:
            raise ValueError("excited and ground branches need equal 1-d shapes")
        e.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "excited", e)
        object.__setattr__(self, "ground", g)

    @classmethod
    def excited_atom(cls, field: FockVector):
        """|field> (x) |e>."""
        c = field.coefficients
        return cls(c, np.zeros_like(c))

    @property
    def N(self) -> int:
        return len(self.excited) - 1

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.excited, self.excited).real + np.vdot(self.ground, self.ground).real)


@dataclass(frozen=True)
class InteractionSpec:
    m: int
    f: NonlinearityFn
    eta: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("m must be an integer >= 1")
        if not (np.isfinite(self.eta) and self.eta >= 0):
            raise ValueError("eta must be finite and >= 0")


def couplings(f: NonlinearityFn, m: int, n) -> np.ndarray:
    """lambda_n = prod_{j=1..m} f(n+j) sqrt(n+j)."""
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for j in range(1, m + 1):
        out = out * np.sqrt((n + j) * f.f2(n + j))
    return out


def evolve(initial: AtomFieldState, spec: InteractionSpec) -> AtomFieldState:
    """Exact evolution on the truncated space, one 2x2 rotation per manifold.

    Excited levels n > N - m have no partner inside the truncation and are
    left unchanged; a TruncationWarning is issued if the top m+2 levels of
    either branch carry more than 1e-12 of the weight.
    """
    N, m = initial.N, spec.m
    top = max(N - m - 1, 0)
    leak = float(np.sum(np.abs(initial.excited[top:]) ** 2) + np.sum(np.abs(initial.ground[top:]) ** 2))
    if leak > LEAK_THRESHOLD:
        warnings.warn(f"weight {leak:.3g} in the top {m + 2} levels; increase N", TruncationWarning,
                      stacklevel=2)
    e = initial.excited.copy()
    g = initial.ground.copy()
    if N < m:
        return AtomFieldState(e, g)
    n = np.arange(N - m + 1)
    theta = spec.eta * couplings(spec.f, m, n)
    c, s = np.cos(theta), np.sin(theta)
    e_old, g_old = e[n].copy(), g[n + m].copy()
    e[n] = c * e_old - 1j * s * g_old
    g[n + m] = -1j * s * e_old + c * g_old
    return AtomFieldState(e, g)


def postselect_ground(state: AtomFieldState) -> tuple[FockVector, float]:
    """Normalized field after detecting the atom in |g>, and the detection probability."""
    p = float(np.vdot(state.ground, state.ground).real)
    if p < NO_CLICK:
        raise NoClickError(f"ground-state detection probability {p:.3g} is numerically zero")
    return FockVector(state.ground / np.sqrt(p)), p


@dataclass(frozen=True)
class GenerationPoint:
    eta: float
    fidelity: float
    infidelity: float
    success_prob: float


@dataclass(frozen=True)
class GenerationReport:
    points: tuple[GenerationPoint, ...]
    infidelity_order: float | None
    success_order: float | None
    N: int


def fitted_order(h, err) -> float:
    """Least-squares slope of log err against log h."""
    h, err = np.asarray(h, dtype=float), np.asarray(err, dtype=float)
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def generation_experiment(alpha, f: NonlinearityFn, m: int, etas, N: int | None = None,
                          tol: float = 1e-24) -> GenerationReport:
    """Fidelity of the post-selected field with the normalized DPANCS |alpha, f, m>.

    ``etas`` must be strictly descending; eta = 0 gives no click and raises
    NoClickError. The infidelity is evaluated as ||psi - <phi|psi> phi||^2
    to avoid cancellation in 1 - F.
    """
    etas = [float(v) for v in etas]
    if not etas or any(v < 0 for v in etas) or any(a <= b for a, b in zip(etas, etas[1:])):
        raise ValueError("eta list must be non-negative and strictly descending")
    if N is None:
        N = choose_truncation(StateSpec(alpha, m, f), tol) + m + 2
    field = build_state(StateSpec(alpha, 0, f), N=N)
    target = build_state(StateSpec(alpha, m, f), N=N).coefficients
    start = AtomFieldState.excited_atom(field)
    points = []
    for eta in etas:
        psi, p = postselect_ground(evolve(start, InteractionSpec(m, f, eta)))
        psi = psi.coefficients
        overlap = np.vdot(target, psi)
        resid = psi - overlap * target
        infid = float(np.vdot(resid, resid).real)
        points.append(GenerationPoint(eta, float(abs(overlap) ** 2), infid, p))
    if len(points) >= 2:
        hs = [pt.eta for pt in points]
        order = fitted_order(hs, [pt.infidelity for pt in points])
        p_order = fitted_order(hs, [pt.success_prob for pt in points])
    else:
        order = p_order = None
    return GenerationReport(tuple(points), order, p_order, N)


def first_order_field(field: FockVector, f: NonlinearityFn, m: int, eta: float) -> np.ndarray:
    """Ground-branch amplitudes to first order in eta: -i eta A^dag^m |field>."""
    c = field.coefficients
    N = field.N
    out = np.zeros(N + 1, dtype=complex)
    n = np.arange(N - m + 1)
    out[n + m] = -1j * eta * couplings(f, m, n) * c[n]
    return out


def write_generation_csv(report: GenerationReport, stream=None):
    stream = sys.stdout if stream is None else stream
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(GENERATION_HEADER)
    for pt in report.points:
        w.writerow([f"{pt.eta:.17g}", f"{pt.fidelity:.17g}", f"{pt.success_prob:.17g}"])
