"""Cosmological mode oscillators with a prescribed scale factor.

Two systems are covered: the scalar field in conformal time,
``u'' + (k^2 + m^2 a^2 +- a''/a) u = 0``, and the metric potential of a
scalar-field dominated universe in cosmic time,

    u'' - u' d/dt ln X + (k^2/a^2 + 2 a''/a - 2 a'^2/a^2 - (a'/a) d/dt ln Y) u = 0,

with ``X = a'^2/a^3 - a''/a^2`` and ``Y = a'^2/a^2 - a''/a``.  Its Wronskian
is ``i X(t)``.  The field perturbation follows as
``U = (u' + (a'/a) u) / (3 phi_dot)`` with ``phi_dot = sqrt(Y/3)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError, SingularityError
from .mode import (
    DEFAULT_METHOD,
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    ModeEquation,
    ModeState,
    ModeTrajectory,
    integrate_mode,
    uniform_grid,
)
from .profiles import FrequencyProfile, ScaleFactor

DEGENERATE_REL = 1e-12


@dataclass(frozen=True)
class Background:
    t: np.ndarray
    a: np.ndarray
    da: np.ndarray
    d2a: np.ndarray
    d3a: np.ndarray
    X: np.ndarray
    dX: np.ndarray
    Y: np.ndarray
    dY: np.ndarray
    phi_dot: np.ndarray
    degenerate: bool


def _xy(a, da, d2a, d3a):
    X = da * da / a**3 - d2a / a**2
    dX = 4.0 * da * d2a / a**3 - 3.0 * da**3 / a**4 - d3a / a**2
    Y = da * da / (a * a) - d2a / a
    dY = 3.0 * da * d2a / (a * a) - 2.0 * da**3 / a**3 - d3a / a
    return X, dX, Y, dY


def background_quantities(sf: ScaleFactor, t) -> Background:
    """X, Y, their derivatives and the background field velocity at ``t``.

    Raises RegimeError where ``Y < 0`` (phi_dot would be imaginary).
    ``degenerate`` is set when X vanishes to rounding, as for a pure
    exponential.
    """
    t = np.asarray(t, dtype=float)
    a, da, d2a, d3a, _ = sf.derivs(t)
    X, dX, Y, dY = _xy(a, da, d2a, d3a)
    Ysc = np.abs(da * da / (a * a)) + np.abs(d2a / a)
    if np.any(Y < -DEGENERATE_REL * Ysc):
        bad = float(np.atleast_1d(t)[np.argmax(np.atleast_1d(Y < 0))])
        raise RegimeError(f"a'^2/a^2 - a''/a < 0 at t={bad}: no real background field velocity")
    Y = np.where(Y < 0, 0.0, Y)
    Xsc = np.abs(da * da / a**3) + np.abs(d2a / a**2)
    degenerate = bool(np.any(np.abs(X) <= DEGENERATE_REL * Xsc))
    return Background(t, a, da, d2a, d3a, X, dX, Y, dY, np.sqrt(Y / 3.0), degenerate)


def phi_equation(sf: ScaleFactor, k) -> ModeEquation:
    """Metric-potential mode equation as a friction oscillator with scale X."""
    k = float(k)

    def coeffs(t):
        a, da, d2a, d3a, _ = sf.derivs(t)
        X, dX, Y, dY = _xy(a, da, d2a, d3a)
        q = k * k / (a * a) + 2.0 * d2a / a - 2.0 * da * da / (a * a) - (da / a) * dY / Y
        return q, -dX / X, X

    return ModeEquation(
        omega2=lambda t: coeffs(t)[0],
        friction=lambda t: coeffs(t)[1],
        scale=lambda t: coeffs(t)[2],
        domain=sf.domain,
        name=f"phi[{sf.kind}]",
    )


def _check_x(sf, grid):
    bg = background_quantities(sf, grid)
    if bg.degenerate or np.any(bg.X <= 0):
        i = int(np.argmax(bg.X <= DEGENERATE_REL * np.max(np.abs(bg.X))))
        raise SingularityError(f"X(t) vanishes near t={grid[i]}: the Wronskian normalisation degenerates", t=float(grid[i]))
    return bg


def integrate_phi_mode(
    sf: ScaleFactor,
    k,
    init: ModeState,
    span,
    tol: float = DEFAULT_TOL,
    n_samples: int = DEFAULT_SAMPLES,
    method: str = DEFAULT_METHOD,
    grid=None,
) -> ModeTrajectory:
    """Integrate the metric-potential mode; Wronskian tracks ``W(t0) X(t)/X(t0)``.

    The mode amplitude falls like sqrt(X), so the absolute tolerance is set
    from the smallest X on the span rather than from the initial data.
    """
    t_a, t_b = map(float, span)
    grid = uniform_grid(t_a, t_b, n_samples) if grid is None else np.asarray(grid, dtype=float)
    bg = _check_x(sf, np.union1d(grid, [init.t]))
    eq = phi_equation(sf, k)
    amp = max(abs(init.u), abs(init.du))
    shrink = math.sqrt(float(np.min(bg.X)) / float(background_quantities(sf, init.t).X))
    return integrate_mode(eq, init, (t_a, t_b), tol=tol, method=method, grid=grid,
                          atol=1e-2 * tol * amp * min(1.0, shrink))


def phi_vacuum_seed(sf: ScaleFactor, k, t0) -> ModeState:
    """Adiabatic-like seed ``u = theta``, ``u' = -i X/(2 theta)``."""
    eq = phi_equation(sf, k)
    q = float(eq.omega2(t0))
    p = float(eq.friction(t0))
    w = math.sqrt(max(q - 0.25 * p * p, abs(q), 1e-300))
    X0 = float(eq.scale(t0))
    th = math.sqrt(X0 / (2.0 * w))
    return ModeState(float(t0), complex(th, 0.0), complex(0.0, -X0 / (2.0 * th)))


@dataclass
class ThetaTrajectory:
    t: np.ndarray
    U: np.ndarray
    dU: np.ndarray

    @property
    def sigma(self):
        return (self.dU * np.conj(self.U)).real


def theta_mode_from_phi(traj: ModeTrajectory, sf: ScaleFactor, k) -> ThetaTrajectory:
    """Field-perturbation mode ``U = (u' + (a'/a) u)/(3 phi_dot)`` and its derivative.

    ``u''`` is eliminated with the mode equation, so dU is exact on the
    samples rather than a finite difference.
    """
    bg = background_quantities(sf, traj.t)
    if np.any(bg.phi_dot <= 0):
        i = int(np.argmax(bg.phi_dot <= 0))
        raise SingularityError(f"phi_dot vanishes at t={traj.t[i]}", t=float(traj.t[i]))
    eq = phi_equation(sf, k)
    H = bg.da / bg.a
    dH = bg.d2a / bg.a - H * H
    u, du = traj.u, traj.du
    d2u = -eq.friction(traj.t) * du - eq.omega2(traj.t) * u
    c = 1.0 / (3.0 * bg.phi_dot)
    U = c * (du + H * u)
    dc_over_c = -0.5 * bg.dY / bg.Y
    dU = c * (d2u + H * du + dH * u) + dc_over_c * U
    return ThetaTrajectory(traj.t, U, dU)


def cosmo_columns(traj: ModeTrajectory, theta: ThetaTrajectory):
    return {
        "t": traj.t,
        "re_u": traj.u.real,
        "im_u": traj.u.imag,
        "re_du": traj.du.real,
        "im_du": traj.du.imag,
        "sigma1": traj.sigma,
        "re_U": theta.U.real,
        "im_U": theta.U.imag,
        "sigma2": theta.sigma,
        "wronskian_over_X": (traj.wronskian / (1j * traj.x_scale)).real,
    }


def scalar_frw_mode(
    sf: ScaleFactor,
    k,
    m,
    init: ModeState,
    span,
    tol: float = DEFAULT_TOL,
    n_samples: int = DEFAULT_SAMPLES,
    method: str = DEFAULT_METHOD,
    sign: str = "plus",
    grid=None,
) -> ModeTrajectory:
    """Scalar-field mode ``u'' + (k^2 + m^2 a^2 +- a''/a) u = 0`` in conformal time."""
    prof = FrequencyProfile.scalar_frw(sf, k, m, sign=sign)
    return integrate_mode(prof, init, span, tol=tol, n_samples=n_samples, method=method, grid=grid)


def check_span_positive_a(sf: ScaleFactor, span, n=2001):
    t = np.linspace(float(span[0]), float(span[1]), n)
    a = sf.derivs(t)[0]
    if np.any(a <= 0):
        raise ParameterError("scale factor must stay positive on the span")
