"""The dispersion ODE tau'' = 2 lam / tau and the s <-> t change of time.

All trajectories are integrated by classical RK4 in the graded variable
theta = ln(1 + t) with a uniform theta-step, so the physical step is
``dt * (1 + t)``: exactly ``dt`` near the origin and proportionally larger
on long horizons where the solution is slowly varying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from ._validation import check_positive

FIRST_INTEGRAL_TOL = 1e-8


class RefinementError(RuntimeError):
    """Raised when an a posteriori exactness certificate fails."""


def integrate_graded(
    rhs: Callable[[float, Sequence[float]], Sequence[float]],
    y0: Sequence[float],
    t_max: float,
    dt: float,
    t0: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 on dY/dtheta = (1 + t) rhs(t, Y), t = e^theta - 1, from t0 to t_max.

    Returns sample times (n,) and states (n, len(y0)). The theta-step is
    adjusted so that t_max is hit exactly. Complex states are allowed.
    """
    t_max = check_positive(t_max, "T_max")
    dt = check_positive(dt, "dt")
    if not 0.0 <= t0 < t_max:
        raise ValueError("need 0 <= t0 < T_max")
    if dt > t_max - t0 and t0 == 0.0:
        raise ValueError("dt must not exceed T_max")
    theta0 = math.log1p(t0)
    span = math.log1p(t_max) - theta0
    n_steps = max(1, math.ceil(span / dt - 1e-12))
    dth = span / n_steps
    m = len(y0)
    dtype = complex if any(isinstance(v, complex) for v in y0) else float
    ts = np.empty(n_steps + 1)
    ys = np.empty((n_steps + 1, m), dtype=dtype)
    y = [dtype(v) for v in y0]
    ts[0] = t0
    ys[0] = y

    def g(theta: float, state: list[float]) -> list[float]:
        t = math.expm1(theta)
        f = rhs(t, state)
        scale = t + 1.0
        return [scale * fi for fi in f]

    for i in range(n_steps):
        th = theta0 + i * dth
        k1 = g(th, y)
        k2 = g(th + 0.5 * dth, [a + 0.5 * dth * b for a, b in zip(y, k1)])
        k3 = g(th + 0.5 * dth, [a + 0.5 * dth * b for a, b in zip(y, k2)])
        k4 = g(th + dth, [a + dth * b for a, b in zip(y, k3)])
        y = [a + dth / 6.0 * (b + 2.0 * c + 2.0 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]
        ts[i + 1] = math.expm1(theta0 + (i + 1) * dth)
        ys[i + 1] = y
    ts[-1] = t_max
    return ts, ys


@dataclass(frozen=True, eq=False)
class TauTrajectory:
    """Dense RK4 solution of tau'' = drive / tau, tau(0) = 1, tau'(0) = omega0.

    ``drive`` is 2 lam sigma0; for the universal trajectory sigma0 = 1.
    ``inv_sq`` holds the running integral of 1 / tau^2, used by the
    rescaled solver.
    """

    lam: float
    sigma0: float
    omega0: float
    t: np.ndarray
    tau: np.ndarray
    taudot: np.ndarray
    inv_sq: np.ndarray

    def __post_init__(self) -> None:
        for name in ("t", "tau", "taudot", "inv_sq"):
            getattr(self, name).flags.writeable = False
        object.__setattr__(self, "_tau_spline", CubicHermiteSpline(self.t, self.tau, self.taudot))
        accel = self.drive / self.tau
        object.__setattr__(self, "_taudot_spline", CubicHermiteSpline(self.t, self.taudot, accel))
        object.__setattr__(self, "_inv_sq_spline", CubicHermiteSpline(self.t, self.inv_sq, self.tau**-2))

    @property
    def drive(self) -> float:
        return 2.0 * self.lam * self.sigma0

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def _check_range(self, t) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > self.t_max * (1 + 1e-14)):
            raise ValueError(f"time outside trajectory range [0, {self.t_max}]")
        return arr

    def tau_at(self, t):
        return self._tau_spline(self._check_range(t))

    def taudot_at(self, t):
        return self._taudot_spline(self._check_range(t))

    def inv_sq_integral(self, t0, t1):
        """Integral of 1 / tau^2 over [t0, t1]."""
        return self._inv_sq_spline(self._check_range(t1)) - self._inv_sq_spline(self._check_range(t0))

    def first_integral(self) -> np.ndarray:
        """Residual taudot^2/2 - omega0^2/2 - drive ln tau at every sample."""
        return 0.5 * self.taudot**2 - 0.5 * self.omega0**2 - self.drive * np.log(self.tau)


def _solve(lam: float, sigma0: float, omega0: float, t_max: float, dt: float) -> TauTrajectory:
    lam = check_positive(lam, "lambda")
    sigma0 = check_positive(sigma0, "sigma0")
    drive = 2.0 * lam * sigma0

    def rhs(t: float, y: Sequence[float]) -> list[float]:
        tau, v, _ = y
        return [v, drive / tau, 1.0 / (tau * tau)]

    ts, ys = integrate_graded(rhs, (1.0, float(omega0), 0.0), t_max, dt)
    traj = TauTrajectory(lam, sigma0, float(omega0), ts, ys[:, 0].copy(), ys[:, 1].copy(), ys[:, 2].copy())
    drift = float(np.max(np.abs(traj.first_integral())))
    if not np.all(np.isfinite(ys)) or drift > FIRST_INTEGRAL_TOL:
        raise RefinementError(f"first-integral drift {drift:.3e} exceeds {FIRST_INTEGRAL_TOL}; reduce dt")
    return traj


def solve_tau(lam: float, t_max: float, dt: float = 1e-3) -> TauTrajectory:
    """Universal dispersion tau'' = 2 lam / tau, tau(0) = 1, tau'(0) = 0."""
    return _solve(lam, 1.0, 0.0, t_max, dt)


def solve_tau0(lam: float, sigma0: float, omega0: float, t_max: float, dt: float = 1e-3) -> TauTrajectory:
    """tau0'' = 2 lam sigma0 / tau0, tau0(0) = 1, tau0'(0) = omega0."""
    return _solve(lam, sigma0, omega0, t_max, dt)


def tau_asymptotic(lam: float, t: float) -> tuple[float, float]:
    """Leading-order large-time behaviour (2 t sqrt(lam ln t), 2 sqrt(lam ln t))."""
    lam = check_positive(lam, "lambda")
    if not t > math.e:
        raise ValueError("asymptotic form requires t > e")
    root = math.sqrt(lam * math.log(t))
    return 2.0 * t * root, 2.0 * root


def s_of_t(traj: TauTrajectory, t: float) -> float:
    """s = ln(taudot(t)) / 2."""
    if not t > 0.0:
        raise ValueError("s(t) diverges at t = 0")
    return 0.5 * math.log(float(traj.taudot_at(t)))


def t_of_s(traj: TauTrajectory, s: float) -> float:
    """Inverse of :func:`s_of_t` on the attained range (queries start at t = t[1])."""
    t_lo, t_hi = float(traj.t[1]), traj.t_max
    s_lo, s_hi = s_of_t(traj, t_lo), s_of_t(traj, t_hi)
    if not s_lo <= s <= s_hi:
        raise ValueError(f"s = {s} outside attained range [{s_lo}, {s_hi}]")
    return brentq(lambda t: s_of_t(traj, t) - s, t_lo, t_hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def tau_check_closed_form(lam: float, s: float) -> tuple[float, float]:
    """(tau, taudot) written in the s variable: (exp(e^{4s} / (4 lam)), e^{2s})."""
    return math.exp(math.exp(4.0 * s) / (4.0 * lam)), math.exp(2.0 * s)


def tau_in_s_check(traj: TauTrajectory, s: float) -> float:
    """Relative deviation of tau(t(s)) from its closed form in s."""
    if traj.sigma0 != 1.0 or traj.omega0 != 0.0:
        raise ValueError("closed form holds for the universal trajectory only")
    ref, _ = tau_check_closed_form(traj.lam, s)
    return abs(float(traj.tau_at(t_of_s(traj, s))) - ref) / ref
