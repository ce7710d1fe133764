"""Complex mode functions of a driven oscillator.

The general equation handled here is

    u'' + p(t) u' + w2(t) u = 0,

with ``w2`` real (bosons) or complex (fermions) and an optional friction
``p``.  Without friction the Wronskian ``W = u du* - u* du`` is conserved;
with friction ``p = -d/dt ln X`` it scales as ``X(t)``.  Vacuum-normalised
solutions have ``W = i X``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError, ParameterError
from .profiles import FrequencyProfile, eval_profile

DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES = 2000
DEFAULT_METHOD = "DOP853"


@dataclass(frozen=True)
class ModeEquation:
    """Coefficients of ``u'' + friction(t) u' + omega2(t) u = 0``.

    ``scale`` is the Wronskian normalisation X(t) up to a constant factor;
    ``None`` means X is constant (no friction).
    """

    omega2: Callable
    friction: Callable | None = None
    scale: Callable | None = None
    domain: tuple[float, float] = (-math.inf, math.inf)
    name: str = "custom"

    @classmethod
    def from_profile(cls, profile: FrequencyProfile) -> "ModeEquation":
        return cls(omega2=profile.omega2, domain=profile.domain, name=profile.kind)

    def coefficients(self, t):
        w2 = self.omega2(t)
        p = 0.0 if self.friction is None else self.friction(t)
        return p, w2

    def check_span(self, t_a, t_b):
        lo, hi = self.domain
        if not (lo < t_a and t_b < hi):
            bad = t_a if not lo < t_a else t_b
            raise DomainError(f"span [{t_a}, {t_b}] leaves domain ({lo}, {hi}) of {self.name}", t=bad)


@dataclass(frozen=True)
class ModeState:
    t: float
    u: complex
    du: complex

    @property
    def wronskian(self) -> complex:
        return self.u * np.conj(self.du) - np.conj(self.u) * self.du


@dataclass(frozen=True)
class SqueezeParams:
    r: float = 0.0
    delta: float = 0.0


@dataclass
class ModeTrajectory:
    """Samples of a mode solution together with the equation's coefficients.

    ``x_scale`` holds the expected Im W at every sample, so the Wronskian
    defect is ``|W - i x_scale|``.
    """

    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    omega2: np.ndarray
    friction: np.ndarray
    x_scale: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def state(self, i) -> ModeState:
        return ModeState(float(self.t[i]), complex(self.u[i]), complex(self.du[i]))

    @property
    def sigma(self):
        return (self.du * np.conj(self.u)).real

    @property
    def dsigma(self):
        # d/dt Re(du u*) = |du|^2 + Re(u'' u*) with u'' = -p du - w2 u
        return np.abs(self.du) ** 2 - self.friction * self.sigma - (self.omega2 * np.abs(self.u) ** 2).real

    @property
    def wronskian(self):
        return self.u * np.conj(self.du) - np.conj(self.u) * self.du

    @property
    def wronskian_defect(self):
        return np.abs(self.wronskian - 1j * self.x_scale)

    @property
    def relative_wronskian_defect(self):
        return self.wronskian_defect / np.abs(self.x_scale)

    @property
    def uncertainty_residual(self):
        """|u|^2 |du|^2 - sigma^2 - X^2/4, zero for normalised states."""
        return (np.abs(self.u) ** 2 * np.abs(self.du) ** 2 - self.sigma**2) - self.x_scale**2 / 4.0

    def columns(self):
        return {
            "t": self.t,
            "re_u": self.u.real,
            "im_u": self.u.imag,
            "re_du": self.du.real,
            "im_du": self.du.imag,
            "sigma": self.sigma,
            "dsigma": self.dsigma,
            "wronskian_defect": self.wronskian_defect,
        }


# --------------------------------------------------------------------------
# initial data


def vacuum_candidate_initial(theta0: float, theta_dot0: float, X0: float = 1.0, t: float = 0.0) -> ModeState:
    """Mode data ``u = theta0``, ``du = theta_dot0 - i X0/(2 theta0)``.

    The phase of u is fixed to zero at ``t``; the imaginary part of ``du``
    follows from the Wronskian condition ``W = i X0``.
    """
    if not theta0 > 0:
        raise ParameterError(f"theta0 must be positive, got {theta0}")
    if not X0 > 0:
        raise ParameterError(f"X0 must be positive, got {X0}")
    return ModeState(float(t), complex(theta0), complex(theta_dot0, -X0 / (2.0 * theta0)))


def adiabatic_initial(profile: FrequencyProfile, t_anchor: float, order: int = 1, phase: str = "plane") -> ModeState:
    """Adiabatic vacuum data at ``t_anchor``.

    order 0: ``u = 1/sqrt(2w)``, ``du = -i w u``; order 1 adds the
    ``-w'/(2w) u`` term of the first WKB correction.  ``phase="plane"``
    multiplies by ``exp(-i w t_anchor)`` so that, for a profile tending to a
    constant, the result matches the plane wave ``exp(-i w t)/sqrt(2w)``.
    """
    w, wd, _ = eval_profile(profile, t_anchor)
    if phase == "plane":
        ph = np.exp(-1j * w * t_anchor)
    elif phase == "zero":
        ph = 1.0
    else:
        raise ParameterError(f"unknown phase convention {phase!r}")
    u = ph / math.sqrt(2.0 * w)
    du = -1j * w * u
    if order >= 1:
        du = du - wd / (2.0 * w) * u
    return ModeState(float(t_anchor), complex(u), complex(du))


# --------------------------------------------------------------------------
# integration


def _rhs(eq: ModeEquation, ncols: int):
    def f(t, y):
        p, w2 = eq.coefficients(t)
        y = y.reshape(4, ncols)
        u = y[0] + 1j * y[1]
        du = y[2] + 1j * y[3]
        dd = -p * du - w2 * u
        return np.concatenate([du.real, du.imag, dd.real, dd.imag])

    return f


def _solve(eq, t_start, y0, t_stop, t_eval, rtol, atol, method, ncols):
    if t_start == t_stop:
        return np.asarray(y0, dtype=float).reshape(-1, 1) * np.ones((1, len(t_eval)))
    sol = solve_ivp(
        _rhs(eq, ncols),
        (t_start, t_stop),
        y0,
        method=method,
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if sol.status != 0:
        where = float(sol.t[-1]) if len(sol.t) else t_start
        raise IntegrationError(f"{eq.name}: integration failed near t={where}: {sol.message}", t=where)
    return sol.y


def _integrate_columns(eq, t0, u0, du0, grid, tol, atol, method):
    """Integrate ``len(u0)`` independent solutions from t0 onto ``grid``."""
    grid = np.asarray(grid, dtype=float)
    u0 = np.atleast_1d(np.asarray(u0, dtype=complex))
    du0 = np.atleast_1d(np.asarray(du0, dtype=complex))
    ncols = u0.size
    y0 = np.concatenate([u0.real, u0.imag, du0.real, du0.imag])
    out = np.empty((4 * ncols, grid.size))
    back = grid < t0
    fwd = ~back
    if np.any(back):
        tb = grid[back][::-1]
        out[:, back] = _solve(eq, t0, y0, tb[-1], tb, tol, atol, method, ncols)[:, ::-1]
    if np.any(fwd):
        tf = grid[fwd]
        out[:, fwd] = _solve(eq, t0, y0, tf[-1], tf, tol, atol, method, ncols)
    out = out.reshape(4, ncols, grid.size)
    return out[0] + 1j * out[1], out[2] + 1j * out[3]


def _coefficient_arrays(eq, grid):
    w2 = np.asarray(eq.omega2(grid))
    w2 = np.broadcast_to(w2, grid.shape).copy()
    p = np.zeros_like(grid) if eq.friction is None else np.broadcast_to(eq.friction(grid), grid.shape).copy()
    return w2, p


def _x_ratio(eq, t0, grid):
    if eq.scale is None:
        return np.ones_like(grid)
    return np.asarray(eq.scale(grid), dtype=float) / float(eq.scale(t0))


def uniform_grid(t_a: float, t_b: float, n: int = DEFAULT_SAMPLES) -> np.ndarray:
    if not t_b > t_a:
        raise ParameterError(f"empty span [{t_a}, {t_b}]")
    return np.linspace(t_a, t_b, n)


def integrate_mode(
    eq: ModeEquation | FrequencyProfile,
    init: ModeState,
    span: tuple[float, float],
    tol: float = DEFAULT_TOL,
    n_samples: int = DEFAULT_SAMPLES,
    method: str = DEFAULT_METHOD,
    atol: float | None = None,
    grid=None,
) -> ModeTrajectory:
    """Integrate one mode solution over ``span`` and sample it uniformly.

    ``init.t`` may lie anywhere in the span; the solver runs backward and
    forward from it.  ``atol`` defaults to ``tol/100`` times the size of the
    initial data, which keeps the Wronskian accurate for small-amplitude
    modes.
    """
    if isinstance(eq, FrequencyProfile):
        eq = ModeEquation.from_profile(eq)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    t_a, t_b = map(float, span)
    if not t_a <= init.t <= t_b:
        raise ParameterError(f"initial time {init.t} outside span [{t_a}, {t_b}]")
    eq.check_span(t_a, t_b)
    grid = uniform_grid(t_a, t_b, n_samples) if grid is None else np.asarray(grid, dtype=float)
    if atol is None:
        atol = 1e-2 * tol * max(abs(init.u), abs(init.du))
    u, du = _integrate_columns(eq, init.t, init.u, init.du, grid, tol, atol, method)
    w2, p = _coefficient_arrays(eq, grid)
    x0 = float(np.imag(init.wronskian))
    return ModeTrajectory(
        grid,
        u[0],
        du[0],
        w2,
        p,
        x0 * _x_ratio(eq, init.t, grid),
        meta={"equation": eq.name, "tol": tol, "method": method, "t_init": init.t},
    )


@dataclass
class ModeBasis:
    """Fundamental solutions on a fixed grid.

    ``f`` starts as (u, du) = (1, 0) at ``t0`` and ``g`` as (0, 1); any
    solution is ``u0 f + du0 g`` by linearity, so a minimiser can evaluate
    arbitrary initial data without re-integrating.
    """

    t0: float
    t: np.ndarray
    f: np.ndarray
    df: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    omega2: np.ndarray
    friction: np.ndarray
    x_ratio: np.ndarray
    name: str = ""

    def trajectory(self, init: ModeState) -> ModeTrajectory:
        if init.t != self.t0:
            raise ParameterError(f"basis anchored at {self.t0}, initial data at {init.t}")
        u = init.u * self.f + init.du * self.g
        du = init.u * self.df + init.du * self.dg
        x0 = float(np.imag(init.wronskian))
        return ModeTrajectory(self.t, u, du, self.omega2, self.friction, x0 * self.x_ratio,
                              meta={"equation": self.name, "t_init": self.t0, "basis": True})

    def sigma_pair(self, u0: complex, du0: complex):
        """(sigma, dsigma) on the grid for initial data (u0, du0) at t0."""
        u = u0 * self.f + du0 * self.g
        du = u0 * self.df + du0 * self.dg
        s = (du * np.conj(u)).real
        ds = np.abs(du) ** 2 - self.friction * s - (self.omega2 * np.abs(u) ** 2).real
        return s, ds


def mode_basis(
    eq: ModeEquation | FrequencyProfile,
    t0: float,
    grid,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
    atol: float | None = None,
) -> ModeBasis:
    if isinstance(eq, FrequencyProfile):
        eq = ModeEquation.from_profile(eq)
    grid = np.asarray(grid, dtype=float)
    eq.check_span(min(grid[0], t0), max(grid[-1], t0))
    if atol is None:
        atol = 1e-2 * tol
    u, du = _integrate_columns(eq, t0, [1.0, 0.0], [0.0, 1.0], grid, tol, atol, method)
    w2, p = _coefficient_arrays(eq, grid)
    return ModeBasis(float(t0), grid, u[0], du[0], u[1], du[1], w2, p, _x_ratio(eq, t0, grid), eq.name)


# --------------------------------------------------------------------------
# observables


def apply_bogolubov(traj: ModeTrajectory, sp: SqueezeParams) -> ModeTrajectory:
    """``u -> cosh r u + sinh r e^{i delta} u*`` (same for du).

    The Wronskian is multiplied by cosh^2 r - sinh^2 r = 1.
    """
    c = math.cosh(sp.r)
    s = math.sinh(sp.r) * complex(math.cos(sp.delta), math.sin(sp.delta))
    u = c * traj.u + s * np.conj(traj.u)
    du = c * traj.du + s * np.conj(traj.du)
    meta = dict(traj.meta, squeeze=(sp.r, sp.delta))
    return ModeTrajectory(traj.t, u, du, traj.omega2, traj.friction, traj.x_scale, meta)


def sigma_of_mode(s: ModeState, omega: float):
    """``sigma = Re(du u*)`` and its time derivative ``|du|^2 - w^2 |u|^2``.

    The kinetic-minus-potential energy difference is half the derivative.
    """
    sigma = (s.du * np.conj(s.u)).real
    dsigma = abs(s.du) ** 2 - omega * omega * abs(s.u) ** 2
    return float(sigma), float(dsigma)


def energy_difference(s: ModeState, omega: float) -> float:
    """Mean of p^2/2 - w^2 x^2/2 in the state defined by ``s``."""
    return 0.5 * sigma_of_mode(s, omega)[1]


def wronskian_defect(s: ModeState, X: float = 1.0) -> float:
    if not X > 0:
        raise ParameterError("X must be positive")
    return float(abs(s.wronskian - 1j * X))


def bogolubov_overlap(a: ModeState, b: ModeState) -> float:
    """|beta| such that b = alpha a + beta a* (unit-Wronskian states)."""
    return float(abs(a.u * b.du - a.du * b.u))
