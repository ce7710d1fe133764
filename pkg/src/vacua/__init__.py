"""Vacuum selection for driven quantum oscillators."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    ParameterError,
    ReferenceDegenerateError,
    RegimeError,
    SingularityError,
    VacuaError,
    WindowError,
)
from .mode import (
    ModeBasis,
    ModeEquation,
    ModeState,
    ModeTrajectory,
    SqueezeParams,
    adiabatic_initial,
    apply_bogolubov,
    integrate_mode,
    mode_basis,
    vacuum_candidate_initial,
)
from .profiles import FrequencyProfile, ScaleFactor, eval_profile, eval_scale_factor
from .search import (
    CandidateWindow,
    Classification,
    OptimizerSettings,
    SearchSpec,
    TailSchedule,
    classify_vacuum,
    functional_ratio,
    functional_window,
    minimize_functional,
    oscillation_metric,
)
from .sigma import SigmaState, integrate_sigma
