import math

import numpy as np
import pytest

from vacua import (
    FrequencyProfile,
    ModeState,
    RegimeError,
    ScaleFactor,
    SearchSpec,
    SingularityError,
    adiabatic_initial,
    integrate_mode,
    minimize_functional,
    oscillation_metric,
    vacuum_candidate_initial,
)
from vacua.cosmo import (
    background_quantities,
    cosmo_columns,
    integrate_phi_mode,
    phi_equation,
    phi_vacuum_seed,
    scalar_frw_mode,
    theta_mode_from_phi,
)
from vacua.mode import ModeTrajectory
from vacua.search import prepare_search

GAMMA = 1.0 / 50.0
SINH = ScaleFactor.sinh_gamma(GAMMA)


def _exp_factor(g):
    def d(t):
        e = np.exp(g * t)
        return e, g * e, g * g * e, g**3 * e, g**4 * e

    return ScaleFactor.custom(d, name="exp")


def test_background_at_unit_scale_factor():
    bg = background_quantities(SINH, 50.0 * math.asinh(1.0))
    assert bg.X == pytest.approx(GAMMA**2, rel=1e-12)
    assert bg.phi_dot == pytest.approx(GAMMA / math.sqrt(3.0), rel=1e-12)
    assert not bg.degenerate


def test_background_closed_forms():
    t = np.linspace(20, 400, 50)
    bg = background_quantities(SINH, t)
    s = np.sinh(GAMMA * t)
    # X is a difference of two terms of size cosh^2/sinh^3, so cancellation costs digits late on
    np.testing.assert_allclose(bg.X, GAMMA**2 / s**3, rtol=1e-8)
    np.testing.assert_allclose(bg.Y, GAMMA**2 / s**2, rtol=1e-8)
    c = np.cosh(GAMMA * t)
    np.testing.assert_allclose(bg.dX, -3.0 * GAMMA**3 * c / s**4, rtol=1e-8)
    np.testing.assert_allclose(bg.dY, -2.0 * GAMMA**3 * c / s**3, rtol=1e-8)


def test_exponential_scale_factor_is_degenerate():
    sf = _exp_factor(0.1)
    bg = background_quantities(sf, np.linspace(0, 5, 11))
    assert bg.degenerate
    np.testing.assert_allclose(bg.X, 0.0, atol=1e-15)
    with pytest.raises(SingularityError):
        integrate_phi_mode(sf, 1.0, vacuum_candidate_initial(1.0, 0.0, 1.0, 0.0), (0.0, 5.0))


def test_negative_y_is_a_regime_error():
    def d(t):
        c, s = np.cosh(t), np.sinh(t)
        return c, s, c, s, c

    with pytest.raises(RegimeError):
        background_quantities(ScaleFactor.custom(d), 1.0)


def test_candidate_initial_matches_x():
    X0 = float(phi_equation(SINH, 1.0).scale(20.0))
    s = vacuum_candidate_initial(0.7, 0.01, X0, 20.0)
    assert s.wronskian == pytest.approx(1j * X0, rel=1e-14)


@pytest.fixture(scope="module")
def phi_run():
    return integrate_phi_mode(SINH, 1.0, phi_vacuum_seed(SINH, 1.0, 20.0), (20.0, 400.0))


def test_friction_wronskian(phi_run):
    ratio = (phi_run.wronskian / (1j * phi_run.x_scale)).real
    assert np.max(np.abs(ratio - 1.0)) < 1e-8
    assert np.max(phi_run.relative_wronskian_defect) < 1e-8


def test_zero_mode_gives_zero_field():
    t = np.linspace(20, 30, 100)
    z = np.zeros(t.size, dtype=complex)
    eq = phi_equation(SINH, 1.0)
    traj = ModeTrajectory(t, z, z, eq.omega2(t), eq.friction(t), eq.scale(t))
    th = theta_mode_from_phi(traj, SINH, 1.0)
    assert np.all(th.U == 0) and np.all(th.dU == 0)


def test_field_derivative_matches_finite_difference():
    run = integrate_phi_mode(SINH, 1.0, phi_vacuum_seed(SINH, 1.0, 20.0), (20.0, 30.0), n_samples=20001)
    th = theta_mode_from_phi(run, SINH, 1.0)
    fd = np.gradient(th.U, th.t, edge_order=2)
    err = np.abs(fd - th.dU)[2:-2] / np.max(np.abs(th.dU))
    assert np.max(err) < 1e-6


def test_cosmo_columns(phi_run):
    cols = cosmo_columns(phi_run, theta_mode_from_phi(phi_run, SINH, 1.0))
    assert list(cols) == ["t", "re_u", "im_u", "re_du", "im_du", "sigma1", "re_U", "im_U", "sigma2", "wronskian_over_X"]
    np.testing.assert_allclose(cols["wronskian_over_X"], 1.0, atol=1e-8)


def _field_wronskian(th):
    return (th.U * np.conj(th.dU) - np.conj(th.U) * th.dU).imag


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_field_gauge_inherits_vacuum(k):
    spec = SearchSpec("ThetaInit", window=(20.0, 80.0))
    eq = phi_equation(SINH, k)
    pb = prepare_search(spec, eq)
    res = minimize_functional(spec, eq, problem=pb)
    traj = pb.basis.trajectory(res.initial)
    th = theta_mode_from_phi(traj, SINH, k)
    m1 = oscillation_metric(traj.sigma, traj.t, scale=traj.x_scale)
    m2 = oscillation_metric(th.sigma, th.t, scale=_field_wronskian(th))
    assert m1.passes()
    assert m2.passes()


def test_flat_space_frw_reduces_to_constant_frequency():
    flat = ScaleFactor.custom(lambda t: (1.0 + 0 * t, 0 * t, 0 * t, 0 * t, 0 * t), name="flat")
    prof = FrequencyProfile.scalar_frw(flat, 1.3, 0.0)
    init = adiabatic_initial(prof, 0.0)
    tr = scalar_frw_mode(flat, 1.3, 0.0, init, (0.0, 20.0))
    assert np.max(np.abs(tr.sigma)) < 1e-9
    ref = integrate_mode(FrequencyProfile.constant(1.3), ModeState(0.0, init.u, init.du), (0.0, 20.0))
    assert np.max(np.abs(tr.u - ref.u)) < 1e-12


@pytest.mark.parametrize("sign", ["plus", "minus"])
def test_frw_wronskian(sign):
    sf = ScaleFactor.step_ramp36()
    prof = FrequencyProfile.scalar_frw(sf, 1.0, 1.0 / 16.0, sign=sign)
    init = vacuum_candidate_initial(1.0 / math.sqrt(2.0), 0.0, 1.0, -40.0)
    tr = scalar_frw_mode(sf, 1.0, 1.0 / 16.0, init, (-40.0, 20.0), sign=sign)
    assert np.max(tr.wronskian_defect) < 1e-8
    assert prof.omega2(0.0) != FrequencyProfile.scalar_frw(sf, 1.0, 1.0 / 16.0,
                                                          sign="minus" if sign == "plus" else "plus").omega2(0.0)
