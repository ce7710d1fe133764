import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from vacua import (
    FrequencyProfile,
    ModeState,
    ParameterError,
    SingularityError,
    SqueezeParams,
    adiabatic_initial,
    apply_bogolubov,
    integrate_mode,
    vacuum_candidate_initial,
)
from vacua.mode import sigma_of_mode
from vacua.oracles import exact_mode, sigma_exact_lorentzian
from vacua.profiles import eval_profile
from vacua.search import oscillation_metric, sign_changes
from vacua.sigma import (
    MINUS,
    PLUS,
    SigmaState,
    close_sigma_accel,
    constraint_residual,
    constraint_value,
    initial_sigma_state,
    integrate_sigma,
    reduced_accel,
    sigma_from_mode_trajectory,
    sigma_from_theta,
    singular_zones,
    theta_from_sigma,
    vacuum_branch,
)


def test_closure_hand_example():
    assert close_sigma_accel(0.0, 0.0, 1.0, 0.5, MINUS) == pytest.approx(-0.5)
    assert close_sigma_accel(0.0, 0.0, 1.0, 0.5, PLUS) == pytest.approx(0.5)


@given(
    sigma=st.floats(-3.0, 3.0),
    dsigma=st.floats(-3.0, 3.0),
    w=st.floats(0.1, 5.0),
    wd=st.floats(-3.0, 3.0).filter(lambda x: abs(x) > 1e-2),
    branch=st.sampled_from([PLUS, MINUS]),
)
def test_closure_root_property(sigma, dsigma, w, wd, branch):
    d2 = close_sigma_accel(sigma, dsigma, w, wd, branch)
    res = constraint_residual(SigmaState(0.0, sigma, dsigma, d2), w, wd)
    scale = 1.0 + (dsigma**2 + w * w * (1 + 4 * sigma**2)) / w**2
    assert abs(res) < 1e-12 * scale


def test_zero_state_residual():
    assert constraint_residual(SigmaState(0.0, 0.0, 0.0, 0.0), 1.0, 1.0) == -1.0


def test_closure_singular_at_zero_omega_dot():
    with pytest.raises(SingularityError):
        close_sigma_accel(0.1, 0.0, 1.0, 0.0)
    with pytest.raises(SingularityError):
        constraint_value(SigmaState(0.0, 0.0, 0.0, 0.0), 1.0, 0.0)


def test_closure_matches_mode_path_at_origin(tanh1_vacuum, tanh1):
    tr = tanh1_vacuum
    i = int(np.argmin(np.abs(tr.t)))
    w, wd, _ = eval_profile(tanh1, 0.0)
    d2 = close_sigma_accel(tr.sigma[i], tr.dsigma[i], w, wd)
    fd = np.gradient(tr.dsigma, tr.t, edge_order=2)[i]
    assert d2 == pytest.approx(fd, abs=1e-4 * abs(fd) + 1e-6)
    exact = sigma_from_mode_trajectory(tanh1, tr).d2sigma[i]
    assert d2 == pytest.approx(exact, abs=1e-6)
    assert vacuum_branch(tr.sigma[i], tr.dsigma[i], w, wd, exact) == MINUS


def test_sigma_from_theta_examples():
    w = 1.7
    assert sigma_from_theta(1 / math.sqrt(2 * w), 0.0, w, phi_dot=-w) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert sigma_from_theta(1.0, 0.0, 1.0) == pytest.approx((0.0, -0.75))


@given(theta=st.floats(0.05, 10.0), theta_dot=st.floats(-5.0, 5.0), w=st.floats(0.1, 5.0))
def test_sigma_from_theta_agrees_with_mode(theta, theta_dot, w):
    a = sigma_from_theta(theta, theta_dot, w)
    b = sigma_of_mode(vacuum_candidate_initial(theta, theta_dot, 1.0), w)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@given(theta=st.floats(0.1, 5.0), theta_dot=st.floats(-3.0, 3.0), w=st.floats(0.2, 3.0))
def test_theta_sigma_round_trip(theta, theta_dot, w):
    s, ds = sigma_from_theta(theta, theta_dot, w)
    th, thd = theta_from_sigma(s, ds, w * w)
    assert th == pytest.approx(theta, rel=1e-8)
    assert thd == pytest.approx(theta_dot, rel=1e-8, abs=1e-8)


def test_theta_from_sigma_rejects_impossible_data():
    with pytest.raises(ParameterError):
        theta_from_sigma(0.0, -1.0, 0.0)


def test_sigma_path_matches_mode_path(tanh1):
    tr = integrate_mode(tanh1, adiabatic_initial(tanh1, 10.0), (-5.0, 10.0), tol=1e-12)
    init = initial_sigma_state(tanh1, -5.0, tr.sigma[0], tr.dsigma[0])
    reg = integrate_sigma(tanh1, init, (-5.0, 10.0))
    assert np.max(np.abs(reg.sigma - tr.sigma)) < 1e-6
    assert np.ptp(reg.constraint_residual) < 1e-8
    # the direct form divides by omega'^2, which decays like e^{-2t}; only sigma is compared
    direct = integrate_sigma(tanh1, init, (-5.0, 10.0), form="direct")
    assert np.max(np.abs(direct.sigma - tr.sigma)) < 1e-6


def test_violated_constraint_is_conserved(tanh1):
    tr = integrate_mode(tanh1, adiabatic_initial(tanh1, 10.0), (-5.0, 10.0))
    good = initial_sigma_state(tanh1, -5.0, tr.sigma[0], tr.dsigma[0])
    bad = SigmaState(-5.0, good.sigma, good.dsigma, 1.1 * good.d2sigma)
    st_ = integrate_sigma(tanh1, bad, (-5.0, 10.0))
    res0 = st_.constraint_residual[0]
    assert abs(res0) > 1e-2
    assert np.max(np.abs(st_.constraint_residual - res0)) < 1e-8 * max(1.0, abs(res0))


@given(r=st.floats(0.0, 1.0), delta=st.floats(0.0, 6.28))
def test_mode_extracted_states_satisfy_constraint(tanh1_vacuum, tanh1, r, delta):
    tr = apply_bogolubov(tanh1_vacuum, SqueezeParams(r, delta))
    res = sigma_from_mode_trajectory(tanh1, tr).constraint_residual
    assert np.max(np.abs(res)) < 1e-8 * math.cosh(2 * r) ** 2


def test_sqrt_linear_vacuum_sigma_path_is_monotone():
    p = FrequencyProfile.sqrt_linear(1.0, 0.1)
    tr = integrate_mode(p, adiabatic_initial(p, 50.0), (5.0, 50.0))
    st_ = integrate_sigma(p, initial_sigma_state(p, 5.0, tr.sigma[0], tr.dsigma[0]), (5.0, 50.0))
    assert np.max(np.abs(st_.sigma)) < 0.1
    assert oscillation_metric(st_.sigma, st_.t).metric < 1e-2


def test_regular_form_crosses_turning_point():
    # Lorentzian omega' vanishes at t = 0
    k = H = 1.0
    p = FrequencyProfile.lorentzian(k, H)
    u0, du0 = exact_mode("LorentzianExact", {"k": k, "H": H}, -5.0)
    tr = integrate_mode(p, ModeState(-5.0, complex(u0), complex(du0)), (-5.0, 5.0))
    init = initial_sigma_state(p, -5.0, tr.sigma[0], tr.dsigma[0])
    st_ = integrate_sigma(p, init, (-5.0, 5.0))
    assert np.max(np.abs(st_.sigma - sigma_exact_lorentzian(SqueezeParams(), k, H, st_.t))) < 1e-6
    with pytest.raises(SingularityError):
        integrate_sigma(p, init, (-5.0, 5.0), form="direct")
    via_mode = integrate_sigma(p, init, (-5.0, 5.0), form="direct", fallback=True)
    assert np.max(np.abs(via_mode.sigma - st_.sigma)) < 1e-6


def test_regular_form_needs_nonzero_omega_dot_at_start():
    p = FrequencyProfile.lorentzian()
    with pytest.raises(SingularityError):
        integrate_sigma(p, SigmaState(0.0, 0.0, 0.0, 0.0), (0.0, 1.0))
    assert reduced_accel(0.0, 0.0, 1.0) == pytest.approx(-1.0)


def test_singular_zones():
    p = FrequencyProfile.lorentzian()
    mask = singular_zones(p, np.linspace(-1.0, 1.0, 101))
    assert mask[50] and not mask[0] and not mask[-1]
    assert not np.any(singular_zones(FrequencyProfile.tanh1(), np.linspace(-10, 15, 251)))


@given(t0=st.floats(-4.0, 4.0))
def test_physical_branch_is_always_minus(tanh1, t0):
    assume(abs(t0) > 1e-3)
    tr = integrate_mode(tanh1, vacuum_candidate_initial(0.9, 0.3, 1.0, t0), (-5.0, 5.0), n_samples=200)
    sm = sigma_from_mode_trajectory(tanh1, tr)
    w, wd, _ = eval_profile(tanh1, tr.t)
    minus = np.array([close_sigma_accel(a, b, c, d) for a, b, c, d in zip(sm.sigma, sm.dsigma, w, wd)])
    assert np.max(np.abs(minus - sm.d2sigma)) < 1e-8


def test_sign_change_helper():
    assert sign_changes(np.array([1.0, -1.0, 1.0])) == 2
    assert sign_changes(np.array([1.0, 1e-20, 1.0]), eps=1e-12) == 0
