"""Config-driven runs shared by the command line and the sweep driver."""
from __future__ import annotations

import numpy as np

from . import catalog
from .config import RunConfig
from .errors import ConfigError
from .cosmo import cosmo_columns, integrate_phi_mode, phi_equation, phi_vacuum_seed, theta_mode_from_phi
from .fermion import FermionTrajectory, adiabatic_fermion_initial, fermion_equation, integrate_fermion_mode, mass_terms
from .mode import (
    ModeState,
    SqueezeParams,
    adiabatic_initial,
    apply_bogolubov,
    integrate_mode,
    mode_basis,
    vacuum_candidate_initial,
)
from .profiles import FrequencyProfile
from .search import (
    CandidateWindow,
    Classification,
    OptimizerSettings,
    SearchSpec,
    TailSchedule,
    classify_vacuum,
    minimize_functional,
)


def boson_profile(cfg: RunConfig) -> FrequencyProfile:
    if cfg.system == "boson":
        return cfg.make_profile()
    return FrequencyProfile.scalar_frw(cfg.make_scale_factor(), cfg.k, cfg.m, sign=cfg.frw_sign)


def _squeeze(traj, cfg):
    if cfg.r == 0:
        return traj
    return apply_bogolubov(traj, SqueezeParams(cfg.r, cfg.delta))


def run_solve(cfg: RunConfig):
    """Integrate one trajectory; returns (columns, summary)."""
    span = (cfg.t0, cfg.t1)
    if cfg.system in ("boson", "scalar_frw"):
        prof = boson_profile(cfg)
        if cfg.theta0 is not None:
            t_in = cfg.t0 if cfg.anchor is None else cfg.anchor
            init = vacuum_candidate_initial(cfg.theta0, cfg.theta_dot0 or 0.0, 1.0, t_in)
        else:
            init = adiabatic_initial(prof, cfg.t1 if cfg.anchor is None else cfg.anchor)
        traj = _squeeze(integrate_mode(prof, init, span, tol=cfg.tol, n_samples=cfg.n_samples, method=cfg.method), cfg)
        summary = {
            "max_wronskian_defect": float(np.max(traj.wronskian_defect)),
            "max_uncertainty_residual": float(np.max(np.abs(traj.uncertainty_residual))),
        }
        return traj.columns(), summary
    if cfg.system == "fermion":
        sf = cfg.make_scale_factor()
        init = adiabatic_fermion_initial(sf, cfg.m, cfg.k, cfg.t1 if cfg.anchor is None else cfg.anchor)
        traj = integrate_fermion_mode(sf, cfg.m, cfg.k, init, span, tol=cfg.tol, n_samples=cfg.n_samples,
                                      method=cfg.method)
        return traj.columns(), {"max_normalization_residual": float(np.max(np.abs(traj.normalization_residual)))}
    sf = cfg.make_scale_factor()
    t_in = cfg.t0 if cfg.anchor is None else cfg.anchor
    if cfg.theta0 is not None:
        X0 = float(phi_equation(sf, cfg.k).scale(t_in))
        init = vacuum_candidate_initial(cfg.theta0, cfg.theta_dot0 or 0.0, X0, t_in)
    else:
        init = phi_vacuum_seed(sf, cfg.k, t_in)
    traj = _squeeze(integrate_phi_mode(sf, cfg.k, init, span, tol=cfg.tol, n_samples=cfg.n_samples,
                                       method=cfg.method), cfg)
    th = theta_mode_from_phi(traj, sf, cfg.k)
    return cosmo_columns(traj, th), {"max_relative_wronskian_defect": float(np.max(traj.relative_wronskian_defect))}


def _system(cfg):
    if cfg.system == "fermion":
        return fermion_equation(cfg.make_scale_factor(), cfg.m, cfg.k)
    if cfg.system == "constrained_phi":
        return phi_equation(cfg.make_scale_factor(), cfg.k)
    return boson_profile(cfg)


def _optimizer(cfg):
    return OptimizerSettings(restarts=cfg.restarts, max_evals=cfg.max_evals)


def _window_columns(cfg, system, init: ModeState, window):
    grid = np.linspace(window[0], window[1], cfg.n_samples)
    basis = mode_basis(system, init.t, grid, tol=cfg.tol, method=cfg.method)
    traj = basis.trajectory(init)
    if cfg.system == "fermion":
        sf = cfg.make_scale_factor()
        M, dM, _ = mass_terms(sf, cfg.m, grid)
        return FermionTrajectory(grid, traj.u, traj.du, np.asarray(M), np.asarray(dM), cfg.k).columns()
    if cfg.system == "constrained_phi":
        return cosmo_columns(traj, theta_mode_from_phi(traj, cfg.make_scale_factor(), cfg.k))
    return traj.columns()


def run_vacuum(cfg: RunConfig):
    """Minimise on the configured window (or tail); returns (columns, results)."""
    system = _system(cfg)
    space = cfg.search_space()
    if cfg.tail is not None:
        spec = SearchSpec(space, tail=TailSchedule(cfg.tail[0], tuple(cfg.tail[1:])), optimizer=_optimizer(cfg),
                          n_samples=cfg.n_samples, tol=cfg.tol, anchor=cfg.anchor)
        res = minimize_functional(spec, system)
        res.classification = Classification.OUT if res.metric < 1e-2 else Classification.NONE
        cols = _window_columns(cfg, system, res.initial, (spec.tail.t0, spec.tail.T_list[-1]))
        return cols, {"spec": spec.to_dict(), "result": res.to_dict(), "diagnostic": "tail"}
    if cfg.window is None:
        raise ConfigError("vacuum runs need a window or a tail")
    side = cfg.side or catalog.infer_side(cfg.system_name, cfg.window)
    mass = None
    if cfg.system == "fermion":
        sf = cfg.make_scale_factor()
        mass = lambda tau: float(mass_terms(sf, cfg.m, tau)[0])  # noqa: E731
    rep = classify_vacuum(system, [CandidateWindow(cfg.window[0], cfg.window[1], side)], parametrization=space,
                          optimizer=_optimizer(cfg), n_samples=cfg.n_samples, tol=cfg.tol, k=cfg.k, mass=mass,
                          functional=cfg.functional)
    w = rep.windows[0]
    cols = _window_columns(cfg, system, w.result.initial, cfg.window)
    results = {
        "side": side,
        "result": w.result.to_dict(),
        "diagnostic": w.diagnostic,
        "probe_metrics": [p.metric for p in w.probe_metrics],
        "functional": cfg.functional,
        "space": space,
    }
    return cols, results


def run_task(cfg: RunConfig, task: str):
    return run_solve(cfg) if task == "solve" else run_vacuum(cfg)

