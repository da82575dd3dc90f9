"""Semiclassical logarithmic Schroedinger equation.

    i eps d_t u + (eps^2 / 2) u_xx = lam u ln|u|^2

Strang splitting with an exact kinetic flow (Fourier multiplier) and an
exact nonlinear flow (pointwise phase rotation). The same splitting is
provided for the rescaled unknown v, whose equation is

    i eps d_t v + eps^2 / (2 tau^2) v_yy = lam v ln(|v|^2 / gamma^2).

Gaussian data stay Gaussian: :class:`GaussianAnsatz` integrates the exact
reduction u = exp(a x^2 + b x + c) with complex a, b, c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from ._validation import check_on_grid, check_positive
from .grid import (
    MIN_MASS,
    SQRT_PI,
    Density,
    Grid1D,
    entropy_integrand,
    interpolate,
    quadrature,
    spectral_derivative,
)
from .scaling_ode import TauTrajectory, integrate_graded

DEFAULT_VACUUM_FLOOR = 1e-30
GAMMA_NORM = SQRT_PI**0.5  # ||gamma||_{L^2} = pi^{1/4}


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex wavefunction on a periodic grid at time ``t``."""

    grid: Grid1D
    eps: float
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        check_positive(self.eps, "eps")
        arr = np.array(check_on_grid(self.u, self.grid, "u"), dtype=complex)
        arr.flags.writeable = False
        object.__setattr__(self, "u", arr)
        if self.mass_sq < MIN_MASS:
            raise ValueError("wavefunction has (numerically) zero mass")

    @property
    def mass_sq(self) -> float:
        return float(self.grid.spacing * np.sum(np.abs(self.u) ** 2))

    @property
    def mass(self) -> float:
        """L^2 norm ||u||."""
        return math.sqrt(self.mass_sq)

    def density(self) -> Density:
        return Density(self.grid, np.abs(self.u) ** 2)

    def with_values(self, u: np.ndarray, t: float) -> "WaveField":
        return WaveField(self.grid, self.eps, u, t)


@dataclass(frozen=True)
class EnergyReport:
    """Conserved quantities and, for rescaled states, the modified energies.

    ``mass`` is the L^2 norm. ``entropy`` is the integral of |u|^2 ln|u|^2,
    so ``energy = kinetic + lam * entropy``. Modified fields are NaN for
    lab-frame reports.
    """

    mass: float
    momentum: float
    energy: float
    kinetic: float
    entropy: float
    mod_energy: float = math.nan
    mod_kinetic: float = math.nan
    mod_entropy: float = math.nan
    mod_plus: float = math.nan
    mod_minus: float = math.nan
    tilde_energy: float = math.nan


def wkb_gaussian(
    grid: Grid1D,
    eps: float,
    rho_star: float = 1.0,
    sigma0: float = 1.0,
    omega0: float = 0.0,
    p0: float = 0.0,
) -> WaveField:
    """sqrt(rho*) exp(-sigma0 x^2 / 2) exp(i (omega0 x^2 / 2 + p0 x) / eps)."""
    check_positive(rho_star, "rho_star")
    check_positive(sigma0, "sigma0")
    x = grid.x
    u = math.sqrt(rho_star) * np.exp(-0.5 * sigma0 * x**2 + 1j * (0.5 * omega0 * x**2 + p0 * x) / eps)
    return WaveField(grid, eps, u, 0.0)


def _log_floor(rho: np.ndarray, vacuum_floor: float) -> np.ndarray:
    return np.log(np.maximum(rho, vacuum_floor * rho.max()))


def strang_step(
    state: WaveField, lam: float, dt: float, vacuum_floor: float = DEFAULT_VACUUM_FLOOR
) -> WaveField:
    """One Strang step: half kinetic, full nonlinear, half kinetic."""
    check_positive(dt, "dt")
    u = _strang_lab(state.u, state.grid.k, state.eps, lam, dt, vacuum_floor, 1)
    if not np.all(np.isfinite(u)):
        raise FloatingPointError("non-finite state after Strang step")
    return state.with_values(u, state.t + dt)


def _strang_lab(u, k, eps, lam, dt, vacuum_floor, n_steps):
    half = np.exp(-0.25j * eps * k**2 * dt)
    rot = lam * dt / eps
    u = np.array(u, dtype=complex)
    for _ in range(n_steps):
        u = np.fft.ifft(half * np.fft.fft(u))
        u *= np.exp(-1j * rot * _log_floor(np.abs(u) ** 2, vacuum_floor))
        u = np.fft.ifft(half * np.fft.fft(u))
    return u


def evolve(
    state: WaveField,
    lam: float,
    dt: float,
    n_steps: int,
    *,
    record_every: int | None = None,
    vacuum_floor: float = DEFAULT_VACUUM_FLOOR,
) -> list[WaveField]:
    """Advance ``n_steps`` Strang steps; returns the recorded states (initial included)."""
    check_positive(lam, "lambda")
    check_positive(dt, "dt")
    every = n_steps if record_every is None else int(record_every)
    if every <= 0:
        raise ValueError("record_every must be positive")
    out = [state]
    u, done = state.u, 0
    while done < n_steps:
        m = min(every, n_steps - done)
        u = _strang_lab(u, state.grid.k, state.eps, lam, dt, vacuum_floor, m)
        done += m
        if not np.all(np.isfinite(u)):
            raise FloatingPointError("non-finite state during evolution")
        out.append(state.with_values(u, state.t + done * dt))
    return out


def strang_step_rescaled(
    state: WaveField,
    traj: TauTrajectory,
    lam: float,
    dt: float,
    vacuum_floor: float = DEFAULT_VACUUM_FLOOR,
) -> WaveField:
    """Strang step for the rescaled unknown v (grid variable is y)."""
    return evolve_rescaled(state, traj, lam, dt, 1, vacuum_floor=vacuum_floor)[-1]


def evolve_rescaled(
    state: WaveField,
    traj: TauTrajectory,
    lam: float,
    dt: float,
    n_steps: int,
    *,
    record_every: int | None = None,
    vacuum_floor: float = DEFAULT_VACUUM_FLOOR,
) -> list[WaveField]:
    """Strang splitting of the v-equation with the exact time-dependent kinetic flow.

    The kinetic half step multiplies by exp(-i eps k^2 / 2 * int 1/tau^2).
    """
    check_positive(lam, "lambda")
    check_positive(dt, "dt")
    if state.t + n_steps * dt > traj.t_max * (1 + 1e-12):
        raise ValueError("trajectory horizon shorter than the requested run")
    every = n_steps if record_every is None else int(record_every)
    eps, k2 = state.eps, state.grid.k**2
    y2 = state.grid.x**2
    rot = lam * dt / eps
    out = [state]
    v = np.array(state.u)
    nodes = np.minimum(state.t + 0.5 * dt * np.arange(2 * n_steps + 1), traj.t_max)
    weights = np.diff(traj.inv_sq_integral(np.zeros_like(nodes), nodes))
    for i in range(1, n_steps + 1):
        w1, w2 = weights[2 * i - 2], weights[2 * i - 1]
        v = np.fft.ifft(np.exp(-0.5j * eps * k2 * w1) * np.fft.fft(v))
        v *= np.exp(-1j * rot * (_log_floor(np.abs(v) ** 2, vacuum_floor) + y2))
        v = np.fft.ifft(np.exp(-0.5j * eps * k2 * w2) * np.fft.fft(v))
        t = state.t + i * dt
        if i % every == 0 or i == n_steps:
            if not np.all(np.isfinite(v)):
                raise FloatingPointError("non-finite state during evolution")
            out.append(state.with_values(v, t))
    return out


def conserved_quantities(
    state: WaveField, lam: float, vacuum_floor: float = DEFAULT_VACUUM_FLOOR
) -> EnergyReport:
    """Mass, momentum eps Im int conj(u) u_x, and energy."""
    g, u, eps = state.grid, state.u, state.eps
    rho = np.abs(u) ** 2
    if rho.max() < MIN_MASS:
        raise ValueError("degenerate mass")
    du = spectral_derivative(u, g, 1)
    grad_sq = float(quadrature(np.abs(du) ** 2, g))
    momentum = float(eps * quadrature(np.conj(u) * du, g).imag)
    entropy = float(quadrature(entropy_integrand(rho, vacuum_floor * rho.max()), g))
    kinetic = 0.5 * eps**2 * grad_sq
    return EnergyReport(state.mass, momentum, kinetic + lam * entropy, kinetic, entropy)


def modified_energy_report(
    v_state: WaveField,
    traj: TauTrajectory,
    lam: float,
    vacuum_floor: float = DEFAULT_VACUUM_FLOOR,
) -> EnergyReport:
    """Energy functionals of the rescaled unknown v at time ``v_state.t``.

    The lab-frame fields are those of v itself (kinetic uses eps^2/2).
    """
    g, v, eps = v_state.grid, v_state.u, v_state.eps
    base = conserved_quantities(v_state, lam, vacuum_floor)
    tau = float(traj.tau_at(v_state.t))
    rho = np.abs(v) ** 2
    y2 = g.x**2
    floor = vacuum_floor * rho.max()
    grad_sq = float(quadrature(np.abs(spectral_derivative(v, g, 1)) ** 2, g))
    rho_log_rho = entropy_integrand(rho, floor)
    e_kin = eps**2 / (2.0 * tau**2) * grad_sq
    e_ent = float(quadrature(rho_log_rho + y2 * rho, g))
    above = rho > 1.0
    second = float(quadrature(y2 * rho, g))
    plus = e_kin + lam * float(quadrature(np.where(above, rho_log_rho, 0.0), g)) + lam * second
    minus = -lam * float(quadrature(np.where(above, 0.0, rho_log_rho), g))
    tilde = second + float(quadrature(np.abs(rho_log_rho), g)) + 2.0 * e_kin
    return replace(
        base,
        mod_energy=e_kin + lam * e_ent,
        mod_kinetic=e_kin,
        mod_entropy=e_ent,
        mod_plus=plus,
        mod_minus=minus,
        tilde_energy=tilde,
    )


def lab_quantities_from_v(
    v_state: WaveField,
    traj: TauTrajectory,
    lam: float,
    u_in_mass: float,
    vacuum_floor: float = DEFAULT_VACUUM_FLOOR,
) -> EnergyReport:
    """Mass, momentum and energy of u, evaluated exactly from its rescaled image v.

    With u(x) = c tau^{-1/2} v(x / tau) exp(i taudot x^2 / (2 eps tau)) and
    c = ||u_in|| / ||gamma||, substitution x = tau y gives closed expressions
    in terms of integrals of v.
    """
    g, v, eps = v_state.grid, v_state.u, v_state.eps
    tau = float(traj.tau_at(v_state.t))
    taudot = float(traj.taudot_at(v_state.t))
    c2 = (check_positive(u_in_mass, "u_in_mass") / GAMMA_NORM) ** 2
    y = g.x
    rho = np.abs(v) ** 2
    dv = spectral_derivative(v, g, 1)
    cross = float(quadrature(y * np.imag(np.conj(v) * dv), g))
    grad_v = float(quadrature(np.abs(dv) ** 2, g))
    second = float(quadrature(y**2 * rho, g))
    mass_v = float(quadrature(rho, g))
    grad_u = c2 * (grad_v / tau**2 + (taudot / eps) ** 2 * second + 2.0 * taudot / (eps * tau) * cross)
    ent_v = float(quadrature(entropy_integrand(rho, vacuum_floor * rho.max()), g))
    entropy = c2 * (ent_v + math.log(c2 / tau) * mass_v)
    flux = float(quadrature(np.imag(np.conj(v) * dv), g))
    momentum = c2 * (eps * flux / tau + taudot * float(quadrature(y * rho, g)))
    kinetic = 0.5 * eps**2 * grad_u
    return EnergyReport(math.sqrt(c2 * mass_v), momentum, kinetic + lam * entropy, kinetic, entropy)


def rescale_to_v(state: WaveField, traj: TauTrajectory, *, u_in_mass: float | None = None) -> WaveField:
    """v(t, y) = tau^{1/2} (||gamma|| / ||u_in||) u(t, tau y) exp(-i taudot tau y^2 / (2 eps)).

    The result lives on the same grid (read as the y variable). ``u_in_mass``
    defaults to ||u(t)||, which equals ||u_in|| by mass conservation.
    """
    g, eps = state.grid, state.eps
    tau = float(traj.tau_at(state.t))
    taudot = float(traj.taudot_at(state.t))
    norm_in = state.mass if u_in_mass is None else check_positive(u_in_mass, "u_in_mass")
    y = g.x
    inside = np.abs(tau * y) < g.half_width
    vals = np.zeros(g.n_points, dtype=complex)
    vals[inside] = interpolate(state.u, g, tau * y[inside])
    v = math.sqrt(tau) * (GAMMA_NORM / norm_in) * vals * np.exp(-0.5j * taudot * tau * y**2 / eps)
    lost = abs(quadrature(np.abs(v) ** 2, g) - SQRT_PI * (state.mass / norm_in) ** 2) / SQRT_PI
    if lost > 1e-8:
        raise ValueError(f"dilation moves {lost:.2e} of the mass outside the grid; enlarge L")
    return WaveField(g, eps, v, state.t)


# --------------------------------------------------------------------------
# Gaussian reduction


@dataclass(frozen=True)
class GaussianProfile:
    """u(x) = exp(a x^2 + b x + c) with Re a < 0; all integrals in closed form."""

    a: complex
    b: complex
    c: complex

    def __post_init__(self) -> None:
        if not self.a.real < 0.0:
            raise ValueError("profile is not square integrable (Re a >= 0)")

    def values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(self.a * x**2 + self.b * x + self.c)

    @property
    def _A(self) -> float:
        return -2.0 * self.a.real

    @property
    def mean(self) -> float:
        return self.b.real / self._A

    @property
    def variance(self) -> float:
        return 1.0 / (2.0 * self._A)

    @property
    def mass_sq(self) -> float:
        A, B, C = self._A, 2.0 * self.b.real, 2.0 * self.c.real
        return math.sqrt(math.pi / A) * math.exp(C + B * B / (4.0 * A))

    def grad_sq(self) -> float:
        """||u'||^2."""
        shift = 2.0 * self.a * self.mean + self.b
        return self.mass_sq * (4.0 * abs(self.a) ** 2 * self.variance + abs(shift) ** 2)

    def momentum(self, eps: float) -> float:
        """eps Im int conj(u) u'."""
        return eps * self.mass_sq * (2.0 * self.a * self.mean + self.b).imag

    def entropy(self) -> float:
        """int |u|^2 ln |u|^2."""
        A, B, C = self._A, 2.0 * self.b.real, 2.0 * self.c.real
        return self.mass_sq * (C + B * B / (4.0 * A) - 0.5)

    def first_moment(self) -> float:
        return self.mass_sq * self.mean

    def second_moment(self) -> float:
        return self.mass_sq * (self.variance + self.mean**2)


def _ansatz_rhs(eps: float, lam: float):
    def rhs(t: float, y: Sequence[complex]) -> list[complex]:
        a, b, c = y
        da = -1j * (2.0 * lam * a.real - 2.0 * eps**2 * a * a) / eps
        db = -1j * (2.0 * lam * b.real - 2.0 * eps**2 * a * b) / eps
        dc = -1j * (2.0 * lam * c.real - 0.5 * eps**2 * (b * b + 2.0 * a)) / eps
        return [da, db, dc]

    return rhs


@dataclass(frozen=True)
class GaussianAnsatz:
    """Exact Gaussian solutions of the log-NLS for WKB data.

    Plugging u = exp(a x^2 + b x + c) into the equation and matching powers
    of x gives the closed system

        i eps a' = 2 lam Re a - 2 eps^2 a^2
        i eps b' = 2 lam Re b - 2 eps^2 a b
        i eps c' = 2 lam Re c - (eps^2 / 2)(b^2 + 2 a)

    integrated by RK4. In the usual real parametrisation
    alpha = -Re a, beta = eps Im a, etc.
    """

    eps: float
    lam: float
    rho_star: float = 1.0
    sigma0: float = 1.0
    omega0: float = 0.0
    p0: float = 0.0
    dt: float = 2.5e-4

    def __post_init__(self) -> None:
        for name in ("eps", "lam", "rho_star", "sigma0", "dt"):
            check_positive(getattr(self, name), name)

    def initial(self) -> GaussianProfile:
        return GaussianProfile(
            complex(-0.5 * self.sigma0, 0.5 * self.omega0 / self.eps),
            complex(0.0, self.p0 / self.eps),
            complex(0.5 * math.log(self.rho_star), 0.0),
        )

    def profiles(self, times: Iterable[float]) -> list[GaussianProfile]:
        """Profiles at increasing ``times`` from one RK4 pass hitting each time exactly."""
        times = [float(t) for t in times]
        if any(t1 < t0 for t0, t1 in zip(times, times[1:])) or (times and times[0] < 0):
            raise ValueError("times must be nonnegative and nondecreasing")
        rhs = _ansatz_rhs(self.eps, self.lam)
        p0 = self.initial()
        y, t_cur, out = [p0.a, p0.b, p0.c], 0.0, []
        for t in times:
            if t > t_cur:
                _, ys = integrate_graded(rhs, y, t, self.dt, t0=t_cur)
                y, t_cur = list(ys[-1]), t
            if not all(np.isfinite(v) for v in y) or not y[0].real < 0:
                raise FloatingPointError("ansatz ODE blew up")
            out.append(GaussianProfile(*y))
        return out

    def profile(self, t: float) -> GaussianProfile:
        return self.profiles([t])[0]

    def wavefield(self, grid: Grid1D, t: float) -> WaveField:
        return WaveField(grid, self.eps, self.profile(t).values(grid.x), t)

    @property
    def initial_mass_sq(self) -> float:
        return self.rho_star * math.sqrt(math.pi / self.sigma0)

    def rescaled_profile(self, prof: GaussianProfile, tau: float, taudot: float) -> GaussianProfile:
        """Closed-form image of a profile under the u -> v rescaling."""
        a = prof.a * tau**2 - 0.5j * taudot * tau / self.eps
        c = prof.c + 0.5 * math.log(tau) + math.log(GAMMA_NORM) - 0.5 * math.log(self.initial_mass_sq)
        return GaussianProfile(a, prof.b * tau, c)


def gaussian_ansatz_oracle(
    rho_star: float,
    sigma0: float,
    omega0: float,
    p0: float,
    eps: float,
    lam: float,
    t: float,
    grid: Grid1D,
    dt: float = 2.5e-4,
) -> WaveField:
    """Exact Gaussian solution at time t sampled on ``grid``."""
    return GaussianAnsatz(eps, lam, rho_star, sigma0, omega0, p0, dt).wavefield(grid, t)


# --------------------------------------------------------------------------
# diagnostics on traces


@dataclass(frozen=True)
class MomentDiagnostics:
    times: np.ndarray
    i2_tilde: np.ndarray
    second_differences: np.ndarray
    scale: float
    predicted_slope: float
    predicted_intercept: float
    second_moment_deviation: np.ndarray
    envelope: np.ndarray
    fitted_constant: float

    @property
    def max_relative_second_difference(self) -> float:
        return float(np.max(np.abs(self.second_differences))) / self.scale


def moment_identities(
    v_trace: Sequence[tuple[float, Density]],
    traj: TauTrajectory,
    eps: float,
    u_in: WaveField,
) -> MomentDiagnostics:
    """tau(t) * int y |v|^2 is affine in t; the second moment approaches that of gamma^2."""
    if len(v_trace) < 3:
        raise ValueError("need at least three trace entries")
    times = np.array([t for t, _ in v_trace], dtype=float)
    steps = np.diff(times)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
        raise ValueError("trace times must be equispaced and increasing")
    tau = traj.tau_at(times)
    taudot = traj.taudot_at(times)
    i2t = tau * np.array([d.m1 for _, d in v_trace])
    second = np.array([d.m2 for _, d in v_trace])
    second_diff = i2t[2:] - 2.0 * i2t[1:-1] + i2t[:-2]
    g = u_in.grid
    mass_in = u_in.mass_sq
    i10 = eps * float(quadrature(np.conj(u_in.u) * spectral_derivative(u_in.u, g, 1), g).imag)
    i20 = float(quadrature(g.x * np.abs(u_in.u) ** 2, g))
    deviation = np.abs(second - 0.5 * SQRT_PI)
    positive = taudot > 0
    env = np.full_like(times, np.inf)
    env[positive] = (taudot[positive] + 1.0) / taudot[positive] ** 2
    fitted = float(np.max(deviation[positive] / env[positive])) if positive.any() else math.nan
    scale = float(np.max(np.abs(i2t)))
    return MomentDiagnostics(
        times,
        i2t,
        second_diff,
        scale if scale > 0 else 1.0,
        i10 * SQRT_PI / mass_in,
        i20 * SQRT_PI / mass_in,
        deviation,
        env,
        fitted,
    )


@dataclass(frozen=True)
class SobolevReport:
    times: np.ndarray
    grad_energy: np.ndarray
    comparator: np.ndarray
    ratio: np.ndarray

    @property
    def drifts_toward_one(self) -> bool:
        dist = np.abs(self.ratio - 1.0)
        return bool(dist[-1] < dist[0])


def sobolev_growth(
    u_trace: Sequence[tuple[float, float]] | Sequence[WaveField],
    eps: float,
    lam: float,
    u_in_mass_sq: float,
    traj: TauTrajectory,
) -> SobolevReport:
    """eps^2 ||u_x||^2 against 2 lam ||u_in||^2 ln tau(t) (dimension one).

    ``u_trace`` holds either wavefields or (t, ||u_x||^2) pairs.
    """
    check_positive(lam, "lambda")
    pairs = []
    for item in u_trace:
        if isinstance(item, WaveField):
            du = spectral_derivative(item.u, item.grid, 1)
            pairs.append((item.t, float(quadrature(np.abs(du) ** 2, item.grid))))
        else:
            pairs.append((float(item[0]), float(item[1])))
    times = np.array([p[0] for p in pairs])
    if len(times) < 2 or times.min() <= 0 or times.max() / times.min() < 10.0 * (1 - 1e-12):
        raise ValueError("trace must span at least one decade in t")
    grad = eps**2 * np.array([p[1] for p in pairs])
    comp = 2.0 * lam * u_in_mass_sq * np.log(traj.tau_at(times))
    return SobolevReport(times, grad, comp, grad / comp)
