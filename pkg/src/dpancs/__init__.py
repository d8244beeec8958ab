"""Deformed photon-added nonlinear coherent states: states, statistics, weights, generation."""
from .errors import (
    ContourError, ConvergenceError, DivergenceError, DPANCSError, FiniteDomainError,
    NoClickError, NoClosedFormError, NonlinearityError, QuadratureError, TruncationWarning,
)
from .generation import (
    AtomFieldState, InteractionSpec, evolve, generation_experiment, postselect_ground,
)
from .meijer import ContourConfig, MeijerGSpec, meijer_g
from .nonclassicality import CriteriaReport, MomentSet, criteria, moments_oracle, moments_series, sweep
from .nonlinearity import DeformedFactorial, Kind, NonlinearityFn, deformed_factorial
from .operators import verify_algebra, verify_eigenrelation
from .states import (
    Family, FockVector, StateSpec, build_state, choose_truncation, normalization_closed_form,
    normalization_series,
)
from .weights import (
    MomentTarget, carleman_diagnostic, moment_check, positivity_scan, weight_full,
    weight_klauder, weight_negative_m, weight_tilde,
)

__version__ = "0.1.0"
