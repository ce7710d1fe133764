"""Invariant checks over the built-in systems."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import catalog
from .cosmo import integrate_phi_mode, phi_vacuum_seed
from .fermion import adiabatic_fermion_initial, integrate_fermion_mode
from .mode import adiabatic_initial, integrate_mode
from .sigma import initial_sigma_state, integrate_sigma


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(self.value < self.limit)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<42s} {self.value:.3e} < {self.limit:.0e}"


def invariant_checks(tol: float = 1e-10) -> list[Check]:
    out = []
    for name in ("tanh1", "tanh2", "sqrt_linear", "inverse_linear", "lorentzian"):
        prof = catalog.make_profile(name)
        a, b = catalog.working_span(name)
        tr = integrate_mode(prof, adiabatic_initial(prof, b), (a, b), tol=tol)
        out.append(Check(f"wronskian {name}", float(np.max(tr.wronskian_defect)), 1e-8))
        out.append(Check(f"uncertainty {name}", float(np.max(np.abs(tr.uncertainty_residual))), 1e-9))

    prof = catalog.make_profile("tanh1")
    tr = integrate_mode(prof, adiabatic_initial(prof, 10.0), (-5.0, 10.0), tol=1e-12)
    st = integrate_sigma(prof, initial_sigma_state(prof, -5.0, tr.sigma[0], tr.dsigma[0]), (-5.0, 10.0), tol=tol)
    out.append(Check("sigma path vs mode path tanh1", float(np.max(np.abs(st.sigma - tr.sigma))), 1e-6))
    out.append(Check("sigma constraint drift tanh1", float(np.ptp(st.constraint_residual)), 1e-8))

    sf = catalog.make_scale_factor("step_ramp36")
    ft = integrate_fermion_mode(sf, 1 / 16, 1.0, adiabatic_fermion_initial(sf, 1 / 16, 1.0, -40.0), (-40.0, 20.0), tol=tol)
    out.append(Check("fermion normalisation step_ramp36", float(np.max(np.abs(ft.normalization_residual))), 1e-8))

    sg = catalog.make_scale_factor("sinh_gamma")
    pt = integrate_phi_mode(sg, 1.0, phi_vacuum_seed(sg, 1.0, 20.0), (20.0, 400.0), tol=tol)
    out.append(Check("phi wronskian / X sinh_gamma", float(np.max(pt.relative_wronskian_defect)), 1e-8))
    return out
