"""Direct integration of sigma = Re(du u*) through its third-order equation.

sigma''' - sigma'' (w'/w + w''/w') + 4 sigma' w^2 + sigma (8 w w' - 4 w^2 w''/w') = 0

with the integral of motion

(4 sigma w^2 + sigma'') (4 sigma w^3 + sigma'' w - 2 sigma' w') / (w w'^2) - 4 sigma^2 = 1

for unit-Wronskian states.  Both divide by w', so the equation is unusable
where w' vanishes; :func:`integrate_sigma` then falls back to the mode
equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ParameterError, SingularityError
from .mode import (
    DEFAULT_METHOD,
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    integrate_mode,
    uniform_grid,
    vacuum_candidate_initial,
)
from .profiles import FrequencyProfile, eval_profile

PLUS, MINUS = 1, -1


@dataclass(frozen=True)
class SigmaState:
    t: float
    sigma: float
    dsigma: float
    d2sigma: float


def close_sigma_accel(sigma, dsigma, omega, omega_dot, branch: int = MINUS):
    """sigma'' from the integral of motion.

    With A = 4 sigma w^2 + sigma'' the constraint is quadratic in A,
    ``A^2 - 2 (w'/w) sigma' A - (w'/w)^2 w^2 (1 + 4 sigma^2) = 0``, whose roots
    are ``(w'/w) (sigma' +- sqrt(sigma'^2 + w^2 (1 + 4 sigma^2)))``.
    """
    if omega_dot == 0:
        raise SingularityError("omega_dot = 0: sigma'' is not determined by the constraint")
    if branch not in (PLUS, MINUS):
        raise ParameterError("branch must be +1 or -1")
    ratio = omega_dot / omega
    root = math.sqrt(dsigma * dsigma + omega * omega * (1.0 + 4.0 * sigma * sigma))
    A = ratio * (dsigma + branch * root)
    return A - 4.0 * sigma * omega * omega


def vacuum_branch(sigma, dsigma, omega, omega_dot, d2sigma) -> int:
    """Branch of :func:`close_sigma_accel` closest to a known sigma''."""
    plus = close_sigma_accel(sigma, dsigma, omega, omega_dot, PLUS)
    minus = close_sigma_accel(sigma, dsigma, omega, omega_dot, MINUS)
    return PLUS if abs(plus - d2sigma) <= abs(minus - d2sigma) else MINUS


def constraint_value(s: SigmaState, omega, omega_dot, X: float = 1.0):
    """Left-hand side of the integral of motion (equals X^2 on physical states)."""
    if np.any(np.asarray(omega_dot) == 0):
        raise SingularityError("omega_dot = 0 in constraint")
    w, wd = omega, omega_dot
    A = 4.0 * s.sigma * w * w + s.d2sigma
    B = 4.0 * s.sigma * w**3 + s.d2sigma * w - 2.0 * s.dsigma * wd
    return A * B / (w * wd * wd) - 4.0 * s.sigma**2


def constraint_residual(s: SigmaState, omega, omega_dot):
    return constraint_value(s, omega, omega_dot) - 1.0


def sigma_from_theta(theta, theta_dot, omega, phi_dot=None):
    """(sigma, sigma') from the polar data u = theta e^{i phi}.

    ``phi_dot`` defaults to ``-1/(2 theta^2)``, the unit-Wronskian value.
    """
    if not theta > 0:
        raise ParameterError("theta must be positive")
    if phi_dot is None:
        phi_dot = -0.5 / theta**2
    sigma = theta * theta_dot
    dsigma = theta_dot**2 + theta**2 * (phi_dot**2 - omega**2)
    return sigma, dsigma


def theta_from_sigma(sigma, dsigma, omega2, X: float = 1.0, friction: float = 0.0):
    """Invert :func:`sigma_from_theta` for real-phase initial data.

    theta^2 solves ``w2 x^2 + (sigma' + p sigma) x - (sigma^2 + X^2/4) = 0``;
    returns ``(theta, theta_dot)``.
    """
    b = dsigma + friction * sigma
    c = sigma * sigma + X * X / 4.0
    if omega2 == 0:
        if b <= 0:
            raise ParameterError("no positive theta for these sigma data")
        x = c / b
    else:
        disc = b * b + 4.0 * omega2 * c
        if disc < 0:
            raise ParameterError("no real theta for these sigma data")
        # numerically stable positive root
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b if b != 0 else 1.0))
        roots = [r for r in (q / omega2, (-c / q) if q != 0 else math.nan) if r > 0]
        if not roots:
            raise ParameterError("no positive theta for these sigma data")
        x = max(roots)
    theta = math.sqrt(x)
    return theta, sigma / theta


# --------------------------------------------------------------------------


@dataclass
class SigmaTrajectory:
    t: np.ndarray
    sigma: np.ndarray
    dsigma: np.ndarray
    d2sigma: np.ndarray
    constraint: np.ndarray
    source: np.ndarray = field(default=None)  # integration form or "mode" per sample

    @property
    def constraint_residual(self):
        return self.constraint - 1.0

    def columns(self):
        return {
            "t": self.t,
            "sigma": self.sigma,
            "dsigma": self.dsigma,
            "d2sigma": self.d2sigma,
            "constraint_residual": self.constraint_residual,
        }


def _direct_rhs(profile):
    def f(t, y):
        w, wd, wdd = eval_profile(profile, t)
        s, ds, d2s = y
        d3s = d2s * (wd / w + wdd / wd) - 4.0 * ds * w * w - s * (8.0 * w * wd - 4.0 * w * w * wdd / wd)
        return [ds, d2s, d3s]

    return f


def _regular_rhs(profile):
    # state (sigma, sigma', B) with B = (sigma'' + 4 w^2 sigma) / w'
    def f(t, y):
        w, wd, _ = eval_profile(profile, t)
        s, ds, B = y
        return [ds, wd * B - 4.0 * w * w * s, (wd / w) * B - 4.0 * w * s]

    return f


def reduced_accel(sigma, dsigma, omega, branch: int = MINUS):
    """B = (sigma'' + 4 w^2 sigma) / w' on the constraint surface.

    Finite even where w' = 0; ``close_sigma_accel`` equals ``w' B - 4 w^2 sigma``.
    """
    root = math.sqrt(dsigma * dsigma + omega * omega * (1.0 + 4.0 * sigma * sigma))
    return (dsigma + branch * root) / omega


def reduced_constraint(sigma, dsigma, B, omega):
    """Integral of motion in terms of B; identical to the direct form where w' != 0."""
    return B * B - 2.0 * dsigma * B / omega - 4.0 * sigma * sigma


def singular_zones(profile, grid, eps_sing=1e-6):
    """Mask of samples where the sigma equation's w''/w' coefficient blows up.

    A sample is singular when ``w |w'| / |w''| < eps_sing`` (w' small on the
    scale set by w'' and w) or when w' changes sign before the next sample.
    Exponentially decaying w' with w''/w' bounded, as in the tanh tails, is
    not singular.
    """
    w, wd, wdd = eval_profile(profile, np.asarray(grid, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(wd == 0, 0.0, w * np.abs(wd) / np.abs(wdd))
    mask = rho < eps_sing
    flips = np.sign(wd[:-1]) * np.sign(wd[1:]) < 0
    mask[:-1] |= flips
    mask[1:] |= flips
    return mask


def solve_both_ways(rhs, t0, y0, grid, tol, method=DEFAULT_METHOD):
    """Integrate ``y' = rhs(t, y)`` from t0 backward and forward onto ``grid``."""
    y0 = np.asarray(y0, dtype=float)
    out = np.empty((y0.size, grid.size))
    back = grid < t0
    atol = 1e-2 * tol * max(1.0, float(np.max(np.abs(y0))))
    for mask, rev in ((back, True), (~back, False)):
        if not np.any(mask):
            continue
        te = grid[mask][::-1] if rev else grid[mask]
        if te[-1] == t0:
            out[:, mask] = y0[:, None]
            continue
        sol = solve_ivp(rhs, (t0, te[-1]), y0, method=method, t_eval=te, rtol=tol, atol=atol)
        if sol.status != 0:
            raise IntegrationError(f"sigma integration failed: {sol.message}", t=float(sol.t[-1]))
        out[:, mask] = sol.y[:, ::-1] if rev else sol.y
    return out


def integrate_sigma(
    profile: FrequencyProfile,
    init: SigmaState,
    span,
    tol: float = DEFAULT_TOL,
    n_samples: int = DEFAULT_SAMPLES,
    method: str = DEFAULT_METHOD,
    form: str = "regular",
    eps_sing: float = 1e-6,
    fallback: bool = False,
    grid=None,
) -> SigmaTrajectory:
    """Integrate the third-order sigma equation from ``init`` over ``span``.

    ``form="direct"`` integrates (sigma, sigma', sigma'') with the w''/w'
    coefficient as written; it raises :class:`SingularityError` where
    :func:`singular_zones` flags a sample, or, with ``fallback=True``,
    returns sigma extracted from the mode equation instead.

    ``form="regular"`` (default) integrates (sigma, sigma', B) with
    ``sigma'' = w' B - 4 w^2 sigma`` and ``B' = (w'/w) B - 4 w sigma``.  This is
    the same equation multiplied through by w', so it has no singular
    coefficient, and its integral of motion can be evaluated without
    dividing by w'^2.  ``init.d2sigma`` is converted to B, so at w' = 0 the
    state must be built with :func:`reduced_accel`.
    """
    if form not in ("regular", "direct"):
        raise ParameterError(f"unknown sigma form {form!r}")
    t_a, t_b = map(float, span)
    if not t_a <= init.t <= t_b:
        raise ParameterError(f"initial time {init.t} outside span [{t_a}, {t_b}]")
    grid = uniform_grid(t_a, t_b, n_samples) if grid is None else np.asarray(grid, dtype=float)
    w0, wd0, _ = eval_profile(profile, init.t)

    if form == "direct":
        pts = np.union1d(grid, [init.t])
        zones = singular_zones(profile, pts, eps_sing)
        if np.any(zones):
            where = float(pts[zones][0])
            if not fallback:
                raise SingularityError(f"omega_dot vanishes near t={where}; use the mode equation", t=where)
            return _sigma_via_mode(profile, init, grid, tol, method)
        y0 = [init.sigma, init.dsigma, init.d2sigma]
        rhs = _direct_rhs(profile)
    else:
        if wd0 == 0:
            raise SingularityError("omega_dot = 0 at t0: build B with reduced_accel", t=init.t)
        y0 = [init.sigma, init.dsigma, (init.d2sigma + 4.0 * w0 * w0 * init.sigma) / wd0]
        rhs = _regular_rhs(profile)

    out = solve_both_ways(rhs, init.t, y0, grid, tol, method)

    w, wd, _ = eval_profile(profile, grid)
    s, ds = out[0], out[1]
    if form == "direct":
        d2s = out[2]
        con = constraint_value(SigmaState(0.0, s, ds, d2s), w, wd)
    else:
        d2s = wd * out[2] - 4.0 * w * w * s
        con = reduced_constraint(s, ds, out[2], w)
    return SigmaTrajectory(grid, s, ds, d2s, con, np.full(grid.size, form))


def _sigma_via_mode(profile, init, grid, tol, method):
    w0 = eval_profile(profile, init.t)[0]
    theta, theta_dot = theta_from_sigma(init.sigma, init.dsigma, w0 * w0)
    traj = integrate_mode(profile, vacuum_candidate_initial(theta, theta_dot, 1.0, init.t),
                          (grid[0], grid[-1]), tol=tol, method=method, grid=grid)
    return sigma_from_mode_trajectory(profile, traj)


def sigma_from_mode_trajectory(profile, traj) -> SigmaTrajectory:
    """Exact (sigma, sigma', sigma'') from mode samples.

    Uses sigma'' = -4 w^2 sigma - 2 w w' |u|^2, valid for any solution of
    the frictionless mode equation.
    """
    w, wd, _ = eval_profile(profile, traj.t)
    u = traj.u
    s = traj.sigma
    ds = traj.dsigma
    # sigma'' = 2 Re(u'' du*) - 2 w w' |u|^2 - 2 w^2 sigma with u'' = -w^2 u
    B = -2.0 * w * np.abs(u) ** 2
    d2s = wd * B - 4.0 * w * w * s
    con = reduced_constraint(s, ds, B, w)
    return SigmaTrajectory(traj.t, s, ds, d2s, con, np.full(traj.t.size, "mode"))


def initial_sigma_state(profile: FrequencyProfile, t0: float, sigma: float, dsigma: float, branch: int = MINUS) -> SigmaState:
    """SigmaState at t0 with sigma'' closed by the constraint."""
    w, wd, _ = eval_profile(profile, t0)
    return SigmaState(float(t0), float(sigma), float(dsigma), close_sigma_accel(sigma, dsigma, w, wd, branch))


def physical_branch() -> int:
    """Root of the constraint realised by actual mode solutions.

    Any solution of the mode equation has sigma'' = -4 sigma w^2 - 2 w w' |u|^2,
    so A = -2 w w' |u|^2 carries the sign of -w'.  The PLUS root has the sign of
    +w' (its bracket sigma' + sqrt(...) is non-negative), hence MINUS is always
    the physical one and no branch tracking is needed along a trajectory.
    """
    return MINUS
