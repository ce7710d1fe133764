"""Vacuum selection by minimising the squared derivative of sigma.

Two functionals are provided.  The window form integrates ``sigma'^2`` over a
finite interval; the ratio form divides the tail integral by the same
integral for a reference squeezed state and extrapolates in the upper limit.
Minimisation uses Nelder-Mead with deterministic restarts, and every
objective evaluation is linear algebra on a precomputed fundamental basis.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import (
    ConvergenceError,
    ParameterError,
    ReferenceDegenerateError,
    WindowError,
)
from .mode import (
    DEFAULT_TOL,
    ModeBasis,
    ModeEquation,
    ModeState,
    SqueezeParams,
    adiabatic_initial,
    mode_basis,
    vacuum_candidate_initial,
)
from .profiles import FrequencyProfile
from .sigma import theta_from_sigma

THETA_VAC = 1e-2
MIN_WINDOW_SAMPLES = 32
MIN_METRIC_SAMPLES = 64
REFERENCE_FLOOR = 1e-14
TIE_TOL = 1e-10
FUNCTIONALS = ("slope", "detrended")
PROBE_R = (0.25, 0.5, 1.0)
PROBE_DELTA = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)


class Parametrization(str, Enum):
    SQUEEZE = "SqueezeRDelta"
    THETA = "ThetaInit"
    SIGMA = "SigmaInit"
    FERMION = "FermionInit"


class Classification(str, Enum):
    OUT = "OutVacuum"
    IN = "InVacuum"
    APPROXIMATE = "ApproximateVacuum"
    NONE = "NoVacuum"


# --------------------------------------------------------------------------
# functionals


def _window_slice(t, window):
    t = np.asarray(t, dtype=float)
    if window is None:
        return np.ones(t.shape, dtype=bool)
    a, b = map(float, window)
    if not b > a:
        raise WindowError(f"window [{a}, {b}] is empty")
    tiny = 1e-12 * max(1.0, abs(t[0]), abs(t[-1]))
    if a < t[0] - tiny or b > t[-1] + tiny:
        raise WindowError(f"window [{a}, {b}] outside trajectory span [{t[0]}, {t[-1]}]")
    return (t >= a - tiny) & (t <= b + tiny)


def functional_window(dsigma, t, window=None) -> float:
    """Integral of ``dsigma**2`` over ``window`` (Simpson on the sample grid)."""
    dsigma = np.asarray(dsigma, dtype=float)
    t = np.asarray(t, dtype=float)
    sel = _window_slice(t, window)
    if sel.sum() < MIN_WINDOW_SAMPLES:
        raise WindowError(f"need at least {MIN_WINDOW_SAMPLES} samples in the window, got {int(sel.sum())}")
    return float(simpson(dsigma[sel] ** 2, x=t[sel]))


def functional_detrended(dsigma, t, window=None) -> float:
    """Integral of ``(dsigma - <dsigma>)**2``: the slope functional with the
    window-mean of sigma' removed, so a linearly drifting sigma costs nothing.
    """
    dsigma = np.asarray(dsigma, dtype=float)
    t = np.asarray(t, dtype=float)
    sel = _window_slice(t, window)
    if sel.sum() < MIN_WINDOW_SAMPLES:
        raise WindowError(f"need at least {MIN_WINDOW_SAMPLES} samples in the window, got {int(sel.sum())}")
    ts, ds = t[sel], dsigma[sel]
    mean = simpson(ds, x=ts) / (ts[-1] - ts[0])
    return float(simpson((ds - mean) ** 2, x=ts))


def tail_grid(t0, T_list, per_segment=1024):
    """Grid on [t0, T_list[-1]] that contains every T in ``T_list`` exactly."""
    T_list = _check_T_list(t0, T_list)
    knots = [float(t0), *T_list]
    parts = [np.linspace(knots[i], knots[i + 1], per_segment + 1)[:-1] for i in range(len(knots) - 1)]
    return np.concatenate(parts + [np.array([knots[-1]])])


def _check_T_list(t0, T_list):
    T_list = [float(T) for T in T_list]
    if not T_list:
        raise ParameterError("T_list is empty")
    if T_list[0] <= t0 or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ParameterError(f"T_list must be strictly increasing and above t0={t0}: {T_list}")
    return T_list


def tail_integrals(dsigma, t, t0, T_list):
    """Integrals of ``dsigma**2`` from t0 to each T (T must be grid points)."""
    t = np.asarray(t, dtype=float)
    d2 = np.asarray(dsigma, dtype=float) ** 2
    i0 = int(np.argmin(np.abs(t - t0)))
    out = []
    for T in T_list:
        i1 = int(np.argmin(np.abs(t - T)))
        if i1 - i0 + 1 < MIN_WINDOW_SAMPLES:
            raise WindowError(f"too few samples between {t0} and {T}")
        out.append(float(simpson(d2[i0 : i1 + 1], x=t[i0 : i1 + 1])))
    return np.array(out)


def extrapolate_ratio(ratios) -> float:
    """T -> infinity estimate: mean of the last two ratios.

    Numerator and denominator grow linearly in T with bounded oscillatory
    remainders, so the ratio converges like 1/T; averaging the two longest
    windows damps the leading oscillation.
    """
    ratios = np.asarray(ratios, dtype=float)
    return float(ratios[-1]) if ratios.size < 2 else float(0.5 * (ratios[-1] + ratios[-2]))


def squeezed_dsigma(u0, du0, omega2, friction, sp: SqueezeParams):
    """sigma' of ``cosh r u0 + sinh r e^{i delta} u0*`` on the samples of u0."""
    c = math.cosh(sp.r)
    s = math.sinh(sp.r) * complex(math.cos(sp.delta), math.sin(sp.delta))
    u = c * u0 + s * np.conj(u0)
    du = c * du0 + s * np.conj(du0)
    sig = (du * np.conj(u)).real
    return np.abs(du) ** 2 - friction * sig - (omega2 * np.abs(u) ** 2).real


class RatioFunctional:
    """Tail ratio of ``sigma'^2`` integrals against a fixed reference squeeze.

    ``base`` is the mode (on the tail grid) that the squeeze acts on.  The
    reference run is computed once, so evaluating at the reference
    parameters reproduces the denominator exactly and returns 1.
    """

    def __init__(self, t, u0, du0, omega2, friction, reference: SqueezeParams, t0, T_list):
        self.t = np.asarray(t, dtype=float)
        self.u0, self.du0 = np.asarray(u0), np.asarray(du0)
        self.omega2 = np.asarray(omega2)
        self.friction = np.asarray(friction, dtype=float)
        self.reference = reference
        self.t0 = float(t0)
        self.T_list = _check_T_list(t0, T_list)
        self.ref_dsigma = self.dsigma(reference)
        self.ref_integrals = tail_integrals(self.ref_dsigma, self.t, self.t0, self.T_list)
        if np.min(self.ref_integrals) < REFERENCE_FLOOR:
            raise ReferenceDegenerateError(
                f"reference integral {np.min(self.ref_integrals):.3e} below {REFERENCE_FLOOR}"
            )

    def dsigma(self, sp: SqueezeParams):
        return squeezed_dsigma(self.u0, self.du0, self.omega2, self.friction, sp)

    def ratios(self, sp: SqueezeParams):
        if sp == self.reference:
            num = self.ref_integrals
        else:
            num = tail_integrals(self.dsigma(sp), self.t, self.t0, self.T_list)
        return num / self.ref_integrals

    def __call__(self, sp: SqueezeParams) -> float:
        return extrapolate_ratio(self.ratios(sp))


@dataclass(frozen=True)
class TailSchedule:
    t0: float
    T_list: tuple

    def __post_init__(self):
        object.__setattr__(self, "T_list", tuple(_check_T_list(self.t0, self.T_list)))

    @classmethod
    def periods(cls, t0, omega_inf, n_periods=20, factors=(1, 2, 4)):
        """Schedule with T1 equal to ``n_periods`` periods of ``omega_inf``."""
        T1 = n_periods * 2.0 * math.pi / omega_inf
        return cls(float(t0), tuple(t0 + f * T1 for f in factors))


def _as_equation(system):
    if isinstance(system, FrequencyProfile):
        return ModeEquation.from_profile(system)
    if isinstance(system, ModeEquation):
        return system
    raise ParameterError(f"cannot search on {type(system).__name__}")


def _base_mode(system, anchor, base):
    if base is not None:
        return base
    if isinstance(system, FrequencyProfile):
        return adiabatic_initial(system, anchor)
    raise ParameterError("a base mode must be supplied for a bare mode equation")


def functional_ratio(
    profile,
    params: SqueezeParams,
    reference: SqueezeParams = SqueezeParams(math.log(2.0), 0.0),
    t0: float = 0.0,
    T_list=None,
    base: ModeState | None = None,
    tol: float = DEFAULT_TOL,
    per_segment: int = 1024,
) -> float:
    """Extrapolated tail ratio for squeeze ``params`` against ``reference``.

    The squeeze acts on ``base`` (default: the adiabatic mode seeded at the
    end of the tail, i.e. the out-vacuum of an asymptotically static
    profile).
    """
    if T_list is None:
        T_list = _default_tail(profile, t0).T_list
    rf = build_ratio_functional(profile, reference, t0, T_list, base=base, tol=tol, per_segment=per_segment)
    return rf(params)


def _default_tail(profile, t0):
    w_inf = float(profile(t0 + 1e3)) if isinstance(profile, FrequencyProfile) else 1.0
    return TailSchedule.periods(t0, w_inf)


def build_ratio_functional(system, reference, t0, T_list, base=None, tol=DEFAULT_TOL, per_segment=1024):
    eq = _as_equation(system)
    grid = tail_grid(t0, T_list, per_segment)
    anchor = float(grid[-1])
    b = _base_mode(system, anchor, base)
    basis = mode_basis(eq, b.t, grid, tol=tol)
    u0 = b.u * basis.f + b.du * basis.g
    du0 = b.u * basis.df + b.du * basis.dg
    return RatioFunctional(grid, u0, du0, basis.omega2, basis.friction, reference, t0, T_list)


# --------------------------------------------------------------------------
# oscillation metric


@dataclass(frozen=True)
class OscillationMetric:
    metric: float
    sign_changes: int

    def passes(self, threshold=THETA_VAC) -> bool:
        return self.metric < threshold


def sign_changes(x, eps=0.0) -> int:
    """Number of strict sign changes, ignoring samples with ``|x| <= eps``."""
    x = np.asarray(x, dtype=float)
    s = np.sign(x[np.abs(x) > eps])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def oscillation_metric(sigma, t, window=None, dsigma=None, scale=1.0, degree=1) -> OscillationMetric:
    """Detrended-RMS measure of how much sigma oscillates on ``window``.

    A polynomial trend of ``degree`` (linear by default) is removed; the RMS
    of what remains is divided by the RMS of the trend, floored at
    ``scale/4``.  ``scale`` is the Wronskian normalisation X, so the floor is
    half the minimal uncertainty and the metric of a nearly static sigma is
    not inflated by a vanishing trend.  When X varies in time, pass it as an
    array: sigma is then divided by X sample by sample and the floor becomes
    1/4, which for constant X gives the same number.  The second value
    counts interior strict sign changes of sigma' (of (sigma/X)' for an
    array scale), ignoring slopes at the rounding level of sigma.
    """
    t = np.asarray(t, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    sel = _window_slice(t, window)
    n = int(sel.sum())
    if n < MIN_METRIC_SAMPLES:
        raise WindowError(f"need at least {MIN_METRIC_SAMPLES} samples for the metric, got {n}")
    ts, ss = t[sel], sigma[sel]
    floor = 0.25 * abs(scale) if np.ndim(scale) == 0 else 0.25
    ds = None if dsigma is None else np.asarray(dsigma, dtype=float)[sel]
    if np.ndim(scale) > 0:
        xs = np.asarray(scale, dtype=float)[sel]
        if ds is not None:
            ds = (ds - ss * np.gradient(xs, ts) / xs) / xs
        ss = ss / xs
    x = (ts - ts.mean()) / max(np.ptp(ts), 1e-300)
    coef = np.polynomial.polynomial.polyfit(x, ss, degree)
    trend = np.polynomial.polynomial.polyval(x, coef)
    resid = ss - trend
    den = max(float(np.sqrt(np.mean(trend**2))), floor)
    metric = float(np.sqrt(np.mean(resid**2)) / den) if den > 0 else 0.0
    if ds is None:
        ds = np.gradient(ss, ts)
    # slopes below rounding of sigma over the window are not sign changes
    eps = 1e-9 * (float(np.max(np.abs(ss))) + floor) / max(float(np.ptp(ts)), 1e-300)
    return OscillationMetric(metric, sign_changes(ds[1:-1], eps))


# --------------------------------------------------------------------------
# parametrisations


@dataclass
class _Family:
    """Map from internal optimiser coordinates to initial data at ``t0``."""

    kind: Parametrization
    t0: float
    center: np.ndarray
    step: np.ndarray
    bounds: list
    to_state: object
    to_params: object
    periodic: tuple = ()


def squeeze_family(base: ModeState) -> _Family:
    def state(x):
        r = abs(x[0])
        d = float(x[1]) % (2 * math.pi)
        c = math.cosh(r)
        s = math.sinh(r) * complex(math.cos(d), math.sin(d))
        return ModeState(base.t, c * base.u + s * np.conj(base.u), c * base.du + s * np.conj(base.du))

    def params(x):
        return {"r": abs(float(x[0])), "delta": float(x[1]) % (2 * math.pi)}

    return _Family(Parametrization.SQUEEZE, base.t, np.array([0.5, 0.0]), np.array([0.25, 1.0]),
                   [(-5.0, 5.0), (None, None)], state, params, periodic=(1,))


def theta_family(t0, X0, omega) -> _Family:
    """Real ``u(t0) = theta``, ``u'(t0) = theta' - i X0 / (2 theta)``.

    Internal coordinates are ``ln(theta/theta_a)`` and
    ``theta'/(theta_a omega)`` with the adiabatic ``theta_a``.
    """
    th_a = math.sqrt(X0 / (2.0 * omega))
    sc = th_a * omega

    def split(x):
        return th_a * math.exp(float(x[0])), sc * float(x[1])

    def state(x):
        th, thd = split(x)
        return vacuum_candidate_initial(th, thd, X0, t0)

    def params(x):
        th, thd = split(x)
        return {"theta0": th, "theta_dot0": thd}

    bounds = [(math.log(1e-3 / th_a), math.log(1e3 / th_a)), (-10.0 / sc, 10.0 / sc)]
    return _Family(Parametrization.THETA, t0, np.zeros(2), np.array([0.3, 0.3]), bounds, state, params)


def sigma_family(t0, X0, omega2, friction=0.0) -> _Family:
    """Initial data from ``(sigma(t0), sigma'(t0))`` scaled by X0."""
    omega = math.sqrt(omega2)

    def split(x):
        return X0 * float(x[0]), X0 * omega * float(x[1])

    def state(x):
        th, thd = theta_from_sigma(*split(x), omega2, X0, friction)
        return vacuum_candidate_initial(th, thd, X0, t0)

    def params(x):
        s, ds = split(x)
        th, thd = theta_from_sigma(s, ds, omega2, X0, friction)
        return {"sigma0": s, "dsigma0": ds, "theta0": th, "theta_dot0": thd}

    return _Family(Parametrization.SIGMA, t0, np.zeros(2), np.array([0.1, 0.1]),
                   [(-50.0, 50.0), (-50.0, 50.0)], state, params)


def fermion_family(t0, k, M) -> _Family:
    """Real ``chi(t0) = c`` with the normalisation solved for Im chi'(t0).

    With angles (A, B): ``k c = cos A``, ``Re chi' = sin A sin B`` and
    ``M c - Im chi' = sin A cos B``, which satisfies the normalisation
    identically.
    """
    if not k > 0:
        raise ParameterError("fermion search needs k > 0")
    Om = math.hypot(k, M)
    A0 = math.acos(math.sqrt((Om - M) / (2.0 * Om)))
    eps = 1e-3

    def split(x):
        A, B = float(x[0]), float(x[1])
        c = math.cos(A) / k
        return c, math.sin(A) * math.sin(B), M * c - math.sin(A) * math.cos(B)

    def state(x):
        c, b, y = split(x)
        return ModeState(t0, complex(c, 0.0), complex(b, y))

    def params(x):
        c, b, y = split(x)
        return {"chi0": c, "re_dchi0": b, "im_dchi0": y}

    return _Family(Parametrization.FERMION, t0, np.array([A0, 0.0]), np.array([0.1, 0.2]),
                   [(eps, 0.5 * math.pi - eps), (None, None)], state, params, periodic=(1,))


# --------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class OptimizerSettings:
    simplex_scale: float = 1.0
    xatol: float = 1e-9
    fatol: float = 1e-15
    restarts: int = 8
    max_evals: int = 4000
    spread: float = 1.0

    def __post_init__(self):
        if self.restarts < 1:
            raise ParameterError("restarts must be >= 1")
        if not self.simplex_scale > 0 or not self.max_evals > 0:
            raise ParameterError("simplex_scale and max_evals must be positive")


@dataclass(frozen=True)
class SearchSpec:
    """What to minimise and how.

    Exactly one of ``window`` (windowed functional) or ``tail`` (ratio
    functional) is set.  ``anchor`` is where initial data live; it defaults
    to the window start, or the end of the tail for the ratio form.
    """

    parametrization: Parametrization = Parametrization.THETA
    window: tuple | None = None
    tail: TailSchedule | None = None
    reference: SqueezeParams = SqueezeParams(math.log(2.0), 0.0)
    optimizer: OptimizerSettings = OptimizerSettings()
    n_samples: int = 2001
    tol: float = DEFAULT_TOL
    anchor: float | None = None
    functional: str = "slope"

    def __post_init__(self):
        object.__setattr__(self, "parametrization", Parametrization(self.parametrization))
        if self.functional not in FUNCTIONALS:
            raise ParameterError(f"functional must be one of {FUNCTIONALS}, not {self.functional!r}")
        if self.functional != "slope" and self.tail is not None:
            raise ParameterError("the ratio functional only supports the slope form")
        if (self.window is None) == (self.tail is None):
            raise ParameterError("set exactly one of window or tail")
        if self.window is not None:
            a, b = map(float, self.window)
            if not b > a:
                raise ParameterError(f"window needs t2 > t1, got [{a}, {b}]")
            object.__setattr__(self, "window", (a, b))
        if self.n_samples < MIN_METRIC_SAMPLES:
            raise ParameterError(f"n_samples must be >= {MIN_METRIC_SAMPLES}")

    def to_dict(self):
        return {
            "parametrization": self.parametrization.value,
            "window": None if self.window is None else list(self.window),
            "tail": None if self.tail is None else {"t0": self.tail.t0, "T_list": list(self.tail.T_list)},
            "reference": {"r": self.reference.r, "delta": self.reference.delta},
            "optimizer": vars(self.optimizer).copy(),
            "n_samples": self.n_samples,
            "tol": self.tol,
            "anchor": self.anchor,
            "functional": self.functional,
        }


@dataclass
class SearchResult:
    params: dict
    Z_min: float
    metric: float
    sign_changes: int
    classification: Classification
    n_evals: int
    converged: bool
    initial: ModeState
    x: np.ndarray
    restarts: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "params": dict(self.params),
            "Z_min": self.Z_min,
            "metric": self.metric,
            "sign_changes": self.sign_changes,
            "classification": self.classification.value,
            "n_evals": self.n_evals,
            "converged": self.converged,
            "initial": {
                "t": self.initial.t,
                "u": [self.initial.u.real, self.initial.u.imag],
                "du": [self.initial.du.real, self.initial.du.imag],
            },
        }


def _threads():
    try:
        return max(1, int(os.environ.get("VACUA_THREADS", "1")))
    except ValueError:
        return 1


def _seeds(family: _Family, n, spread):
    pts = [family.center.copy()]
    if n > 1:
        h = qmc.Halton(d=family.center.size, scramble=False).random(n)[1:]
        for p in h:
            pts.append(family.center + spread * family.step * 4.0 * (p - 0.5))
    out = []
    for p in pts:
        q = p.copy()
        for i, (lo, hi) in enumerate(family.bounds):
            if lo is not None:
                q[i] = min(max(q[i], lo), hi)
        out.append(q)
    return out


def _simplex(x0, family: _Family, scale):
    pts = [x0]
    for i in range(x0.size):
        p = x0.copy()
        h = scale * family.step[i]
        lo, hi = family.bounds[i]
        if hi is not None and p[i] + h > hi:
            h = -h
        p[i] += h
        pts.append(p)
    return np.array(pts)


def _run_nm(obj, x0, family, opt):
    bounds = None
    if any(lo is not None for lo, _ in family.bounds):
        bounds = [(-np.inf if lo is None else lo, np.inf if hi is None else hi) for lo, hi in family.bounds]
    return minimize(
        obj,
        x0,
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "xatol": opt.xatol,
            "fatol": opt.fatol,
            "maxfev": opt.max_evals,
            "initial_simplex": _simplex(x0, family, opt.simplex_scale),
        },
    )


def _canonical(family, x):
    x = np.array(x, dtype=float)
    for i in family.periodic:
        x[i] = x[i] % (2 * math.pi)
    return x


def _pick(family, runs):
    best = None
    for res in runs:
        if best is None:
            best = res
            continue
        if res.fun < best.fun - TIE_TOL:
            best = res
        elif abs(res.fun - best.fun) <= TIE_TOL:
            if np.linalg.norm(_canonical(family, res.x)) < np.linalg.norm(_canonical(family, best.x)):
                best = res
    return best


def _optimise(obj, family, opt):
    seeds = _seeds(family, opt.restarts, opt.spread)
    n = _threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            runs = list(ex.map(lambda x0: _run_nm(obj, x0, family, opt), seeds))
    else:
        runs = [_run_nm(obj, x0, family, opt) for x0 in seeds]
    return runs


@dataclass
class SearchProblem:
    """A prepared minimisation: basis, family and objective."""

    spec: SearchSpec
    family: _Family
    basis: ModeBasis
    objective: object
    window: tuple
    scale: np.ndarray


def _scale_at(eq, t0):
    return 1.0 if eq.scale is None else float(eq.scale(t0))


def prepare_search(spec: SearchSpec, system, base: ModeState | None = None, k=None, M=None) -> SearchProblem:
    """Build the basis and objective for ``spec`` on ``system``.

    ``system`` is a FrequencyProfile or ModeEquation.  ``base`` seeds the
    squeeze family; ``k`` and ``M`` (mass at the anchor) are needed for the
    fermion family.
    """
    eq = _as_equation(system)
    pz = spec.parametrization
    if spec.window is not None:
        grid = np.linspace(spec.window[0], spec.window[1], spec.n_samples)
        anchor = spec.window[0] if spec.anchor is None else float(spec.anchor)
        window = spec.window
    else:
        grid = tail_grid(spec.tail.t0, spec.tail.T_list, max(64, spec.n_samples // len(spec.tail.T_list)))
        anchor = float(grid[-1]) if spec.anchor is None else float(spec.anchor)
        window = (spec.tail.t0, spec.tail.T_list[-1])
    basis = mode_basis(eq, anchor, grid, tol=spec.tol)
    X0 = _scale_at(eq, anchor)
    w2 = complex(np.asarray(eq.omega2(anchor)))
    p0 = 0.0 if eq.friction is None else float(eq.friction(anchor))

    if pz is Parametrization.SQUEEZE:
        family = squeeze_family(_base_mode(system, anchor, base))
    elif pz is Parametrization.THETA:
        family = theta_family(anchor, X0, _positive_omega(w2, p0))
    elif pz is Parametrization.SIGMA:
        family = sigma_family(anchor, X0, _positive_omega(w2, p0) ** 2, p0)
    else:
        if k is None or M is None:
            raise ParameterError("fermion search needs k and M at the anchor")
        family = fermion_family(anchor, float(k), float(M))

    if spec.tail is not None:
        ref_state = family.to_state(_ref_x(family, spec.reference))
        ref_ds = basis.sigma_pair(ref_state.u, ref_state.du)[1]
        ref_int = tail_integrals(ref_ds, grid, spec.tail.t0, spec.tail.T_list)
        if np.min(ref_int) < REFERENCE_FLOOR:
            raise ReferenceDegenerateError(f"reference integral {np.min(ref_int):.3e} below {REFERENCE_FLOOR}")

        def objective(x):
            s = family.to_state(x)
            ds = basis.sigma_pair(s.u, s.du)[1]
            return extrapolate_ratio(tail_integrals(ds, grid, spec.tail.t0, spec.tail.T_list) / ref_int)
    elif spec.functional == "detrended":

        def objective(x):
            s = family.to_state(x)
            ds = basis.sigma_pair(s.u, s.du)[1]
            mean = simpson(ds, x=grid) / (grid[-1] - grid[0])
            return float(simpson((ds - mean) ** 2, x=grid))
    else:

        def objective(x):
            s = family.to_state(x)
            ds = basis.sigma_pair(s.u, s.du)[1]
            return float(simpson(ds**2, x=grid))

    x_scale = X0 * basis.x_ratio
    if eq.scale is None:
        x_scale = float(X0)
    return SearchProblem(spec, family, basis, objective, window, x_scale)


def _positive_omega(w2, friction):
    """Frequency scale for seeding: sqrt of the friction-free effective w^2."""
    q = w2.real - 0.25 * friction**2
    return math.sqrt(q) if q > 0 else math.sqrt(max(abs(w2.real), 1e-12))


def _ref_x(family, ref: SqueezeParams):
    if family.kind is not Parametrization.SQUEEZE:
        raise ParameterError("the ratio functional needs the SqueezeRDelta parametrisation")
    return np.array([ref.r, ref.delta])


def minimize_functional(spec: SearchSpec, system, base: ModeState | None = None, k=None, M=None,
                        problem: SearchProblem | None = None) -> SearchResult:
    """Minimise the functional described by ``spec`` over initial data.

    Deterministic: restart seeds come from an unscrambled Halton sequence
    around the family's natural seed and results are assembled in seed
    order.  Raises ConvergenceError if no restart converges.
    """
    start = time.perf_counter()
    pb = problem if problem is not None else prepare_search(spec, system, base=base, k=k, M=M)
    runs = _optimise(pb.objective, pb.family, spec.optimizer)
    best = _pick(pb.family, runs)
    n_evals = int(sum(r.nfev for r in runs))
    converged = any(r.success for r in runs)
    x = _canonical(pb.family, best.x)
    init = pb.family.to_state(x)
    traj = pb.basis.trajectory(init)
    om = oscillation_metric(traj.sigma, traj.t, pb.window, dsigma=traj.dsigma, scale=pb.scale)
    cls = Classification.NONE
    if om.passes():
        cls = Classification.APPROXIMATE
    result = SearchResult(
        params=pb.family.to_params(x),
        Z_min=max(float(best.fun), 0.0),
        metric=om.metric,
        sign_changes=om.sign_changes,
        classification=cls,
        n_evals=n_evals,
        converged=converged,
        initial=init,
        x=x,
        restarts=[{"Z": float(r.fun), "nfev": int(r.nfev), "success": bool(r.success)} for r in runs],
        wall_time=time.perf_counter() - start,
    )
    if not converged:
        raise ConvergenceError("no restart converged", best=result)
    return result


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class CandidateWindow:
    t1: float
    t2: float
    side: str = "central"

    def __post_init__(self):
        if self.side not in ("in", "out", "central"):
            raise ParameterError(f"side must be in, out or central, not {self.side!r}")
        if not self.t2 > self.t1:
            raise ParameterError("window needs t2 > t1")


@dataclass
class WindowReport:
    window: CandidateWindow
    result: SearchResult
    classification: Classification
    diagnostic: str
    probe_metrics: list
    cross_metrics: dict


@dataclass
class VacuumReport:
    windows: list
    global_vacuum: bool
    global_span: tuple

    def classifications(self):
        return [w.classification for w in self.windows]


def _probe_metrics(basis: ModeBasis, init: ModeState, window, scale):
    """Oscillation metrics of Bogolubov transforms of ``init``."""
    out = []
    for r in PROBE_R:
        for d in PROBE_DELTA:
            c = math.cosh(r)
            s = math.sinh(r) * complex(math.cos(d), math.sin(d))
            u0 = c * init.u + s * np.conj(init.u)
            du0 = c * init.du + s * np.conj(init.du)
            sig, ds = basis.sigma_pair(u0, du0)
            out.append(oscillation_metric(sig, basis.t, window, dsigma=ds, scale=scale))
    return out


def classify_vacuum(system, windows, parametrization=Parametrization.THETA, optimizer=OptimizerSettings(),
                    n_samples=2001, tol=DEFAULT_TOL, global_span=None, k=None, mass=None,
                    threshold=THETA_VAC, functional="slope") -> VacuumReport:
    """Minimise on each candidate window and label what was found.

    Per window: if every probe state (Bogolubov transforms of the optimum)
    is itself non-oscillating, meaning its metric is below ``threshold`` or
    its sigma' changes sign less than twice (no full cycle), the landscape is
    flat and the window has no vacuum (classical regime).  Otherwise a non-oscillating optimum is an
    in- or out-vacuum on windows marked ``in``/``out`` and an approximate
    vacuum on ``central`` ones.  Each optimum is also continued over
    ``global_span``; a vacuum whose sigma is monotone there is global.
    ``mass(t)`` gives M at the anchor for fermion searches.
    """
    eq = _as_equation(system)
    windows = [w if isinstance(w, CandidateWindow) else CandidateWindow(*w) for w in windows]
    if global_span is None:
        global_span = (min(w.t1 for w in windows), max(w.t2 for w in windows))
    g_grid = np.linspace(global_span[0], global_span[1], max(n_samples, 4001))
    reports = []
    global_vac = False
    for w in windows:
        spec = SearchSpec(parametrization, window=(w.t1, w.t2), optimizer=optimizer, n_samples=n_samples, tol=tol,
                          functional=functional)
        M = None if mass is None else float(mass(w.t1))
        pb = prepare_search(spec, system, k=k, M=M)
        res = minimize_functional(spec, system, problem=pb)
        probes = _probe_metrics(pb.basis, res.initial, pb.window, pb.scale)
        if not any(p.metric >= threshold and p.sign_changes >= 2 for p in probes):
            cls, diag = Classification.NONE, "flat_landscape"
        elif res.metric >= threshold:
            cls, diag = Classification.NONE, "optimum_oscillates"
        else:
            cls = {"in": Classification.IN, "out": Classification.OUT}.get(w.side, Classification.APPROXIMATE)
            diag = "vacuum"
        res.classification = cls
        gb = mode_basis(eq, w.t1, g_grid, tol=tol)
        gt = gb.trajectory(res.initial)
        g_scale = pb.scale if eq.scale is None else _scale_at(eq, w.t1) * gb.x_ratio
        cross = {}
        for j, v in enumerate(windows):
            cross[j] = oscillation_metric(gt.sigma, gt.t, (v.t1, v.t2), dsigma=gt.dsigma, scale=g_scale).metric
        if cls is not Classification.NONE:
            ds = gt.dsigma if eq.scale is None else np.gradient(gt.sigma / g_scale, gt.t)
            if sign_changes(ds, eps=1e-6 * np.max(np.abs(ds))) == 0:
                global_vac = True
        reports.append(WindowReport(w, res, cls, diag, probes, cross))
    return VacuumReport(reports, global_vac, tuple(global_span))
