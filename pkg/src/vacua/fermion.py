"""Fermionic oscillator with complex frequency.

The mode equation in conformal time is

    chi'' + (k^2 + M^2 - i M') chi = 0,    M = m a(tau),

and solutions conserve ``k^2 |chi|^2 + |M chi + i chi'|^2``, normalised to 1.
sigma = Re(chi' chi*) obeys a third-order equation whose coefficients
divide by M'.  Writing ``B = -2 Re(chi* (M chi + i chi'))`` gives the regular
first-order system

    sigma'' = M' B - 4 (k^2 + M^2) sigma,    B' = -4 M sigma,

with integral of motion ``(k^2 + M^2) B^2 - 2 M sigma' B + 4 k^2 sigma^2 + sigma'^2 = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError, SingularityError
from .mode import (
    DEFAULT_METHOD,
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    ModeEquation,
    ModeState,
    _integrate_columns,
    uniform_grid,
)
from .profiles import ScaleFactor
from .sigma import MINUS, PLUS, SigmaTrajectory, solve_both_ways


def mass_terms(sf: ScaleFactor, m, tau):
    """(M, M', M'') with M = m a(tau)."""
    a, da, d2a = sf.derivs(tau)[:3]
    return m * a, m * da, m * d2a


def fermion_equation(sf: ScaleFactor, m, k) -> ModeEquation:
    m, k = float(m), float(k)

    def omega2(tau):
        M, dM, _ = mass_terms(sf, m, tau)
        return k * k + M * M - 1j * dM

    return ModeEquation(omega2=omega2, domain=sf.domain, name=f"fermion[{sf.kind}]")


@dataclass(frozen=True)
class FermionModeState:
    tau: float
    chi: complex
    dchi: complex
    M: float = 0.0


def normalization(chi, dchi, M, k):
    """``k^2 |chi|^2 + |M chi + i chi'|^2``; equals 1 for vacuum-normalised modes."""
    return k * k * np.abs(chi) ** 2 + np.abs(M * chi + 1j * dchi) ** 2


def fermion_sigma(s: FermionModeState):
    return float((s.dchi * np.conj(s.chi)).real)


def adiabatic_fermion_initial(sf: ScaleFactor, m, k, tau) -> FermionModeState:
    """Positive-frequency seed: chi = c real, Re chi' = 0, normalisation exact."""
    M = float(mass_terms(sf, m, tau)[0])
    Om = math.hypot(k, M)
    c = 1.0 / math.sqrt(2.0 * Om * (Om + M))
    y = M * c - math.sqrt(max(1.0 - (k * c) ** 2, 0.0))
    return FermionModeState(float(tau), complex(c, 0.0), complex(0.0, y), M)


def fermion_initial(chi0, re_dchi0, M, k, tau=0.0, branch: int = MINUS) -> FermionModeState:
    """Real ``chi(tau) = chi0`` with Im chi' fixed by the normalisation.

    ``branch=MINUS`` gives ``M chi0 - Im chi' > 0`` (positive frequency).
    """
    rad = 1.0 - (k * chi0) ** 2 - re_dchi0**2
    if rad < 0:
        raise ParameterError(f"no normalised state with chi0={chi0}, Re chi'={re_dchi0}")
    y = M * chi0 + branch * math.sqrt(rad)
    return FermionModeState(float(tau), complex(chi0, 0.0), complex(re_dchi0, y), float(M))


@dataclass
class FermionTrajectory:
    tau: np.ndarray
    chi: np.ndarray
    dchi: np.ndarray
    M: np.ndarray
    dM: np.ndarray
    k: float
    meta: dict = field(default_factory=dict)

    @property
    def sigma(self):
        return (self.dchi * np.conj(self.chi)).real

    @property
    def dsigma(self):
        return np.abs(self.dchi) ** 2 - (self.k**2 + self.M**2) * np.abs(self.chi) ** 2

    @property
    def B(self):
        return -2.0 * (np.conj(self.chi) * (self.M * self.chi + 1j * self.dchi)).real

    @property
    def d2sigma(self):
        return self.dM * self.B - 4.0 * (self.k**2 + self.M**2) * self.sigma

    @property
    def normalization(self):
        return normalization(self.chi, self.dchi, self.M, self.k)

    @property
    def normalization_residual(self):
        return self.normalization - 1.0

    def columns(self):
        return {
            "tau": self.tau,
            "re_chi": self.chi.real,
            "im_chi": self.chi.imag,
            "re_dchi": self.dchi.real,
            "im_dchi": self.dchi.imag,
            "sigma": self.sigma,
            "dsigma": self.dsigma,
            "normalization_residual": self.normalization_residual,
        }


def integrate_fermion_mode(
    sf: ScaleFactor,
    m,
    k,
    init: FermionModeState,
    span,
    tol: float = DEFAULT_TOL,
    n_samples: int = DEFAULT_SAMPLES,
    method: str = DEFAULT_METHOD,
    grid=None,
) -> FermionTrajectory:
    eq = fermion_equation(sf, m, k)
    t_a, t_b = map(float, span)
    if not t_a <= init.tau <= t_b:
        raise ParameterError(f"initial time {init.tau} outside span [{t_a}, {t_b}]")
    eq.check_span(t_a, t_b)
    grid = uniform_grid(t_a, t_b, n_samples) if grid is None else np.asarray(grid, dtype=float)
    atol = 1e-2 * tol * max(abs(init.chi), abs(init.dchi))
    chi, dchi = _integrate_columns(eq, init.tau, init.chi, init.dchi, grid, tol, atol, method)
    M, dM, _ = mass_terms(sf, float(m), grid)
    return FermionTrajectory(grid, chi[0], dchi[0], np.asarray(M, float), np.asarray(dM, float), float(k),
                             meta={"tol": tol, "method": method, "tau_init": init.tau})


# --------------------------------------------------------------------------
# sigma dynamics


@dataclass(frozen=True)
class FermionSigmaState:
    tau: float
    sigma: float
    dsigma: float
    d2sigma: float
    B: float | None = None


def _omega2(k, M):
    return k * k + M * M


def reduced_fermion_B(sigma, dsigma, M, k, branch: int = MINUS):
    """Root B of ``(k^2+M^2) B^2 - 2 M sigma' B + 4 k^2 sigma^2 + sigma'^2 - 1 = 0``.

    MINUS is the root realised by positive-frequency modes.
    """
    if branch not in (PLUS, MINUS):
        raise ParameterError("branch must be +1 or -1")
    W = _omega2(k, M)
    disc = (M * dsigma) ** 2 - W * (4.0 * k * k * sigma * sigma + dsigma * dsigma - 1.0)
    if disc < 0:
        raise ParameterError("(sigma, sigma') violate the normalisation bound; no real sigma''")
    return (M * dsigma + branch * math.sqrt(disc)) / W


def close_fermion_sigma_accel(sigma, dsigma, M, dM, k, branch: int = MINUS):
    """sigma'' from the fermionic constraint, quadratic in A = 4 sigma (k^2+M^2) + sigma''."""
    if dM == 0:
        raise SingularityError("M' = 0: sigma'' is not determined by the constraint")
    A = dM * reduced_fermion_B(sigma, dsigma, M, k, branch)
    return A - 4.0 * sigma * _omega2(k, M)


def fermion_constraint_value(sigma, dsigma, d2sigma, M, dM, k):
    """Left-hand side of the fermionic constraint in its direct (third-order) form."""
    W = _omega2(k, M)
    A = 4.0 * sigma * W + d2sigma
    return W * A * A / (dM * dM) - 2.0 * (M / dM) * dsigma * A + 4.0 * k * k * sigma * sigma + dsigma * dsigma


def reduced_fermion_constraint(sigma, dsigma, B, M, k):
    return _omega2(k, M) * B * B - 2.0 * M * dsigma * B + 4.0 * k * k * sigma * sigma + dsigma * dsigma


def initial_fermion_sigma_state(sf, m, k, tau, sigma, dsigma, branch: int = MINUS) -> FermionSigmaState:
    M, dM, _ = mass_terms(sf, m, tau)
    B = reduced_fermion_B(sigma, dsigma, M, k, branch)
    return FermionSigmaState(float(tau), float(sigma), float(dsigma), dM * B - 4.0 * sigma * _omega2(k, M), B)


def fermion_singular_zones(sf, m, grid, eps_sing=1e-6):
    """Samples where M' is tiny relative to its scale or changes sign next door."""
    M, dM, d2M = mass_terms(sf, m, grid)
    dM = np.asarray(dM, dtype=float)
    scale = np.maximum(np.abs(np.asarray(d2M, dtype=float)), np.abs(np.asarray(M, dtype=float)) * 1e-12)
    flag = np.abs(dM) < eps_sing * np.maximum(scale, 1e-300)
    flip = np.sign(dM[1:]) != np.sign(dM[:-1])
    flag[1:] |= flip
    flag[:-1] |= flip
    return flag


def integrate_fermion_sigma(
    sf: ScaleFactor,
    m,
    k,
    init: FermionSigmaState,
    span,
    tol: float = DEFAULT_TOL,
    n_samples: int = DEFAULT_SAMPLES,
    method: str = DEFAULT_METHOD,
    form: str = "regular",
    eps_sing: float = 1e-6,
    grid=None,
) -> SigmaTrajectory:
    """Integrate fermionic sigma from ``init`` over ``span``.

    ``form="regular"`` (default) integrates (sigma, sigma', B) and passes
    through zeros of a'.  ``form="direct"`` integrates the third-order
    equation with its M''/M' coefficient and raises SingularityError when
    the span meets a zero of M'.
    """
    if form not in ("regular", "direct"):
        raise ParameterError(f"unknown sigma form {form!r}")
    m, k = float(m), float(k)
    t_a, t_b = map(float, span)
    if not t_a <= init.tau <= t_b:
        raise ParameterError(f"initial time {init.tau} outside span [{t_a}, {t_b}]")
    lo, hi = sf.domain
    if not (lo < t_a and t_b < hi):
        raise DomainError(f"span [{t_a}, {t_b}] leaves the scale-factor domain", t=t_a)
    grid = uniform_grid(t_a, t_b, n_samples) if grid is None else np.asarray(grid, dtype=float)
    M0, dM0, _ = mass_terms(sf, m, init.tau)

    if form == "direct":
        pts = np.union1d(grid, [init.tau])
        zones = fermion_singular_zones(sf, m, pts, eps_sing)
        if np.any(zones):
            where = float(pts[zones][0])
            raise SingularityError(f"M' vanishes near tau={where}; use the mode equation", t=where)

        def rhs(t, y):
            M, dM, d2M = mass_terms(sf, m, t)
            W = _omega2(k, M)
            s, ds, d2s = y
            d3 = d2s * d2M / dM - 4.0 * W * ds - (12.0 * M * dM - 4.0 * W * d2M / dM) * s
            return [ds, d2s, d3]

        y0 = [init.sigma, init.dsigma, init.d2sigma]
    else:
        if init.B is not None:
            B0 = init.B
        elif dM0 == 0:
            raise SingularityError("M' = 0 at the initial time: supply B", t=init.tau)
        else:
            B0 = (init.d2sigma + 4.0 * _omega2(k, M0) * init.sigma) / dM0

        def rhs(t, y):
            M, dM, _ = mass_terms(sf, m, t)
            s, ds, B = y
            return [ds, dM * B - 4.0 * _omega2(k, M) * s, -4.0 * M * s]

        y0 = [init.sigma, init.dsigma, B0]

    out = solve_both_ways(rhs, init.tau, y0, grid, tol, method)
    M, dM, _ = mass_terms(sf, m, grid)
    s, ds = out[0], out[1]
    if form == "direct":
        d2s = out[2]
        con = fermion_constraint_value(s, ds, d2s, M, dM, k)
    else:
        d2s = dM * out[2] - 4.0 * _omega2(k, M) * s
        con = reduced_fermion_constraint(s, ds, out[2], M, k)
    return SigmaTrajectory(grid, s, ds, d2s, con, np.full(grid.size, form))


def fermion_sigma_from_mode(traj: FermionTrajectory) -> SigmaTrajectory:
    con = reduced_fermion_constraint(traj.sigma, traj.dsigma, traj.B, traj.M, traj.k)
    return SigmaTrajectory(traj.tau, traj.sigma, traj.dsigma, traj.d2sigma, con, np.full(traj.tau.size, "mode"))


def fermion_mode_state(traj: FermionTrajectory, i) -> FermionModeState:
    return FermionModeState(float(traj.tau[i]), complex(traj.chi[i]), complex(traj.dchi[i]), float(traj.M[i]))


def as_mode_state(s: FermionModeState) -> ModeState:
    return ModeState(s.tau, s.chi, s.dchi)
