import math

import numpy as np
import pytest

from logdisp.scaling_ode import (
    integrate_graded,
    s_of_t,
    solve_tau,
    solve_tau0,
    t_of_s,
    tau_asymptotic,
    tau_check_closed_form,
    tau_in_s_check,
)


def test_graded_rk4_on_linear_ode():
    ts, ys = integrate_graded(lambda t, y: [-y[0]], [1.0], 5.0, 1e-3)
    assert ts[0] == 0.0 and ts[-1] == pytest.approx(5.0)
    assert np.max(np.abs(ys[:, 0] - np.exp(-ts))) < 1e-10


def test_initial_conditions_and_first_integral():
    traj = solve_tau(0.7, 50.0)
    assert traj.tau[0] == 1.0 and traj.taudot[0] == 0.0
    assert np.max(np.abs(traj.first_integral())) < 1e-10
    assert np.all(np.diff(traj.tau) > 0)


def test_long_horizon_is_cheap_and_accurate():
    traj = solve_tau(1.0, 1e6)
    assert np.max(np.abs(traj.first_integral())) < 1e-8
    tau, taudot = float(traj.tau_at(1e6)), float(traj.taudot_at(1e6))
    assert taudot**2 == pytest.approx(4.0 * math.log(tau), rel=1e-10)
    # the leading-order form is approached only logarithmically
    dev = [abs(float(traj.tau_at(t)) / tau_asymptotic(1.0, t)[0] - 1) for t in (1e2, 1e4, 1e6)]
    assert max(dev) < 0.05 and dev[2] < dev[1]


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("s", [0.0, 0.3, 0.6])
def test_closed_form_in_s(lam, s):
    traj = solve_tau(lam, 200.0)
    lo, hi = s_of_t(traj, float(traj.t[1])), s_of_t(traj, traj.t_max)
    s = min(max(s, lo + 1e-6), hi)
    assert tau_in_s_check(traj, s) < 1e-8
    t = t_of_s(traj, s)
    assert s_of_t(traj, t) == pytest.approx(s, abs=1e-12)


def test_closed_form_values():
    tau, taudot = tau_check_closed_form(1.0, 0.0)
    assert tau == pytest.approx(math.exp(0.25)) and taudot == 1.0


def test_general_trajectory_energy():
    traj = solve_tau0(1.0, 2.0, 0.5, 20.0)
    assert traj.drive == 4.0
    assert np.max(np.abs(traj.first_integral())) < 1e-10
    with pytest.raises(ValueError):
        tau_in_s_check(traj, 0.1)


def test_range_checks():
    traj = solve_tau(1.0, 5.0)
    with pytest.raises(ValueError):
        traj.tau_at(6.0)
    with pytest.raises(ValueError):
        traj.tau_at(-0.1)
    with pytest.raises(ValueError):
        s_of_t(traj, 0.0)
    with pytest.raises(ValueError):
        tau_asymptotic(1.0, 2.0)
    with pytest.raises(ValueError):
        solve_tau(-1.0, 5.0)
