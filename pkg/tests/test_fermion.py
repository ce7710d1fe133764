import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vacua import ParameterError, ScaleFactor, SingularityError
from vacua.fermion import (
    FermionModeState,
    FermionSigmaState,
    adiabatic_fermion_initial,
    close_fermion_sigma_accel,
    fermion_constraint_value,
    fermion_initial,
    fermion_sigma,
    fermion_sigma_from_mode,
    fermion_singular_zones,
    initial_fermion_sigma_state,
    integrate_fermion_mode,
    integrate_fermion_sigma,
    mass_terms,
    normalization,
    reduced_fermion_B,
)
from vacua.sigma import PLUS

SF = ScaleFactor.step_ramp36()
M_FERMION = 1.0 / 16.0
K = 1.0


@pytest.fixture(scope="module")
def full_run():
    init = adiabatic_fermion_initial(SF, M_FERMION, K, -40.0)
    return integrate_fermion_mode(SF, M_FERMION, K, init, (-40.0, 20.0))


def test_massless_mode_has_zero_sigma():
    chi0 = 1.0 / (math.sqrt(2.0) * K)
    init = FermionModeState(0.0, complex(chi0), -1j * K * chi0)
    tr = integrate_fermion_mode(SF, 0.0, K, init, (-10.0, 10.0))
    assert normalization(init.chi, init.dchi, 0.0, K) == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(tr.sigma)) < 1e-10
    assert np.max(np.abs(tr.normalization_residual)) < 1e-8
    assert np.max(np.abs(tr.chi - np.exp(-1j * K * tr.tau) * chi0)) < 1e-8


def test_normalization_conserved(full_run):
    assert np.max(np.abs(full_run.normalization_residual)) < 1e-8


@given(tau=st.floats(-40.0, 20.0))
def test_adiabatic_seed(tau):
    s = adiabatic_fermion_initial(SF, M_FERMION, K, tau)
    M = float(mass_terms(SF, M_FERMION, tau)[0])
    assert normalization(s.chi, s.dchi, M, K) == pytest.approx(1.0, abs=1e-13)
    assert fermion_sigma(s) == pytest.approx(0.0, abs=1e-15)
    # positive frequency: on the minus root with B = -1/Omega
    assert reduced_fermion_B(0.0, 0.0, M, K) == pytest.approx(-1.0 / math.hypot(K, M), rel=1e-14)


def test_sigma_of_real_data():
    assert fermion_sigma(FermionModeState(0.0, 0.3 + 0j, 0.7 + 0j)) == pytest.approx(0.21)


def test_fermion_initial_rejects_unnormalisable_data():
    with pytest.raises(ParameterError):
        fermion_initial(2.0, 0.0, 0.1, K)
    s = fermion_initial(0.3, 0.2, 0.1, K)
    assert normalization(s.chi, s.dchi, 0.1, K) == pytest.approx(1.0, abs=1e-14)


def test_closure_at_rest():
    M, dM = 0.4, 0.3
    Om = math.hypot(K, M)
    assert close_fermion_sigma_accel(0.0, 0.0, M, dM, K) == pytest.approx(-dM / Om, rel=1e-14)
    assert close_fermion_sigma_accel(0.0, 0.0, M, dM, K, PLUS) == pytest.approx(dM / Om, rel=1e-14)
    with pytest.raises(SingularityError):
        close_fermion_sigma_accel(0.0, 0.0, M, 0.0, K)


@given(
    sigma=st.floats(-0.3, 0.3), dsigma=st.floats(-0.5, 0.5), M=st.floats(0.0, 2.0),
    dM=st.floats(0.05, 2.0), sign=st.sampled_from([1.0, -1.0]),
)
def test_closure_root_property(sigma, dsigma, M, dM, sign):
    try:
        d2 = close_fermion_sigma_accel(sigma, dsigma, M, sign * dM, K)
    except ParameterError:
        return  # outside the normalisation bound
    val = fermion_constraint_value(sigma, dsigma, d2, M, sign * dM, K)
    assert val == pytest.approx(1.0, abs=1e-12 * (1 + (K * K + M * M) / dM**2))


def test_closure_matches_mode_path(full_run):
    i = int(np.argmin(np.abs(full_run.tau + 30.0)))
    tau = float(full_run.tau[i])
    st_ = initial_fermion_sigma_state(SF, M_FERMION, K, tau, full_run.sigma[i], full_run.dsigma[i])
    fd = np.gradient(full_run.dsigma, full_run.tau, edge_order=2)[i]
    assert st_.d2sigma == pytest.approx(full_run.d2sigma[i], abs=1e-10)
    assert st_.d2sigma == pytest.approx(fd, abs=1e-6)
    assert st_.B == pytest.approx(full_run.B[i], abs=1e-9)


def test_mode_path_constraint(full_run):
    res = fermion_sigma_from_mode(full_run).constraint_residual
    assert np.max(np.abs(res)) < 1e-8


@pytest.mark.parametrize("span,form", [((-15.0, -5.0), "regular"), ((-40.0, -20.0), "direct"), ((-40.0, 20.0), "regular")])
def test_sigma_path_matches_mode_path(span, form):
    tm = integrate_fermion_mode(SF, M_FERMION, K, adiabatic_fermion_initial(SF, M_FERMION, K, span[0]), span)
    init = initial_fermion_sigma_state(SF, M_FERMION, K, span[0], tm.sigma[0], tm.dsigma[0])
    sp = integrate_fermion_sigma(SF, M_FERMION, K, init, span, form=form)
    assert np.max(np.abs(sp.sigma - tm.sigma)) < 1e-6


def test_direct_form_stops_at_turning_point():
    # a'(tau) changes sign near tau = -14 and tau = -1
    zones = fermion_singular_zones(SF, M_FERMION, np.linspace(-40.0, 20.0, 6001))
    assert zones.any() and not zones[:2000].any()
    init = FermionSigmaState(-15.0, 0.0, 0.0, close_fermion_sigma_accel(0.0, 0.0, *mass_terms(SF, M_FERMION, -15.0)[:2], K))
    with pytest.raises(SingularityError):
        integrate_fermion_sigma(SF, M_FERMION, K, init, (-15.0, -5.0), form="direct")


def test_small_mass_sigma_stays_small():
    m = 1e-6
    init = adiabatic_fermion_initial(SF, m, K, -10.0)
    tr = integrate_fermion_mode(SF, m, K, init, (-10.0, 10.0))
    assert np.max(np.abs(tr.sigma)) < 1e-5


def test_columns(full_run):
    cols = full_run.columns()
    assert list(cols) == ["tau", "re_chi", "im_chi", "re_dchi", "im_dchi", "sigma", "dsigma", "normalization_residual"]
