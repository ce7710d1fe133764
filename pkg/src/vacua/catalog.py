"""Named built-in systems with their default parameters and working spans."""
from __future__ import annotations

from .errors import ConfigError
from .profiles import FrequencyProfile, ScaleFactor

# name -> (factory, default parameters, working span, natural centre region)
PROFILES = {
    "tanh1": (FrequencyProfile.tanh1, {"k": 1.0, "H": 1.0}, (-10.0, 10.0), (0.0, 0.0)),
    "tanh2": (FrequencyProfile.tanh2, {"k": 1.0, "H": 1.0}, (-10.0, 10.0), (0.0, 0.0)),
    "sqrt_linear": (FrequencyProfile.sqrt_linear, {"k": 1.0, "H": 0.1}, (0.0, 50.0), (0.0, 0.0)),
    "inverse_linear": (FrequencyProfile.inverse_linear, {"k": 1.0, "H": 0.1}, (0.0, 500.0), (0.0, 0.0)),
    "lorentzian": (FrequencyProfile.lorentzian, {"k": 1.0, "H": 1.0}, (-5.0, 5.0), (0.0, 0.0)),
    "constant": (FrequencyProfile.constant, {"k": 1.0}, (0.0, 20.0), (0.0, 0.0)),
}

SCALE_FACTORS = {
    "step_ramp36": (lambda **_: ScaleFactor.step_ramp36(), {}, (-40.0, 20.0), (-20.0, 0.0)),
    "sinh_gamma": (lambda gamma=1.0 / 50.0, **_: ScaleFactor.sinh_gamma(gamma), {"gamma": 1.0 / 50.0},
                   (20.0, 400.0), (0.0, 0.0)),
}

# windows used for the three-range searches on the step-ramp scale factor
STEP_RAMP_WINDOWS = ((-40.0, -30.0, "in"), (-18.0, -3.0, "central"), (5.0, 20.0, "out"))
SINH_WINDOW = (20.0, 80.0, "out")


def make_profile(name, **params) -> FrequencyProfile:
    try:
        factory, defaults, _, _ = PROFILES[name]
    except KeyError:
        raise ConfigError(f"unknown profile {name!r}; choose from {', '.join(PROFILES)}") from None
    kw = {**defaults, **{k: v for k, v in params.items() if k in defaults and v is not None}}
    return factory(**kw)


def make_scale_factor(name, **params) -> ScaleFactor:
    try:
        factory, defaults, _, _ = SCALE_FACTORS[name]
    except KeyError:
        raise ConfigError(f"unknown scale factor {name!r}; choose from {', '.join(SCALE_FACTORS)}") from None
    kw = {**defaults, **{k: v for k, v in params.items() if k in defaults and v is not None}}
    return factory(**kw)


def working_span(name):
    table = PROFILES if name in PROFILES else SCALE_FACTORS
    if name not in table:
        raise ConfigError(f"unknown system {name!r}")
    return table[name][2]


def infer_side(name, window):
    """``out`` past the centre region, ``in`` before it, else ``central``."""
    table = PROFILES if name in PROFILES else SCALE_FACTORS
    lo, hi = table[name][3] if name in table else (0.0, 0.0)
    t1, t2 = window
    if t1 >= hi:
        return "out"
    if t2 <= lo:
        return "in"
    return "central"
