"""Explicit solutions of the kinetic isothermal Euler system in one dimension.

    f_t + xi f_x - lam (ln rho)_x f_xi = 0,    rho = int f dxi.

Gaussian-Gaussian family:

    f = (pi c1 c2)^{-1} exp(-(x - b1)^2 / c1^2 - (xi - b2)^2 / c2^2),
    c1'' = 2 lam / c1 + C^2 / c1^3,  c2 = C / c1,  C = c1(0) c2(0),
    b1 = B1 t + B0,  b2 = (c1' / c1)(x - b1) + B1.

c2(0) = 0 gives the monokinetic family, handled as an isothermal Euler pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ._validation import check_positive
from .grid import SQRT_PI, Density, Grid1D, gaussian_sq, quadrature
from .metrics import csiszar_kullback_gap
from .scaling_ode import FIRST_INTEGRAL_TOL, RefinementError, TauTrajectory, integrate_graded, solve_tau0

ORDER_RANGE = (3.5, 4.5)


@dataclass(frozen=True)
class GaussianGaussianParams:
    lam: float
    c10: float = 1.0
    c20: float = 1.0
    c11: float = 0.0
    B0: float = 0.0
    B1: float = 0.0

    def __post_init__(self) -> None:
        check_positive(self.lam, "lambda")
        check_positive(self.c10, "c1(0)")
        check_positive(self.c20, "c2(0)", strict=False)
        for name in ("c11", "B0", "B1"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def c_tilde(self) -> float:
        return self.c10 * self.c20

    @property
    def monokinetic(self) -> bool:
        return self.c20 == 0.0

    def c1_floor(self) -> float:
        """Lower bound min(c1(0), sqrt(C / sqrt(2 lam))) for c1 along the flow."""
        return min(self.c10, math.sqrt(self.c_tilde / math.sqrt(2.0 * self.lam)))


@dataclass(frozen=True, eq=False)
class KieTrajectory:
    params: GaussianGaussianParams
    t: np.ndarray
    c1: np.ndarray
    c1dot: np.ndarray

    def __post_init__(self) -> None:
        for name in ("t", "c1", "c1dot"):
            getattr(self, name).flags.writeable = False
        object.__setattr__(self, "_c1", CubicHermiteSpline(self.t, self.c1, self.c1dot))
        object.__setattr__(self, "_c1dot", CubicHermiteSpline(self.t, self.c1dot, self.accel(self.c1)))

    def accel(self, c1):
        p = self.params
        return 2.0 * p.lam / c1 + p.c_tilde**2 / c1**3

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def _range(self, t):
        arr = np.asarray(t, dtype=float)
        # with c1'(0) = 0 the flow is time-reversible: c1 is even in t
        lo = -self.t_max if self.params.c11 == 0.0 else 0.0
        if np.any(arr < lo) or np.any(arr > self.t_max * (1 + 1e-14)):
            raise ValueError(f"time outside [{lo}, {self.t_max}]")
        return arr

    def c1_at(self, t):
        return self._c1(np.abs(self._range(t)))

    def c1dot_at(self, t):
        arr = self._range(t)
        return np.sign(arr + 0.0) * self._c1dot(np.abs(arr)) if np.any(arr < 0) else self._c1dot(arr)

    def c2_at(self, t):
        return self.params.c_tilde / self.c1_at(t)

    def b1_at(self, t):
        return self.params.B1 * np.asarray(t, dtype=float) + self.params.B0

    def b2_at(self, t, x):
        return self.c1dot_at(t) / self.c1_at(t) * (np.asarray(x) - self.b1_at(t)) + self.params.B1

    def first_integral(self) -> np.ndarray:
        """c1'^2/2 - 2 lam ln c1 + C^2/(2 c1^2), minus its initial value."""
        p = self.params
        val = 0.5 * self.c1dot**2 - 2.0 * p.lam * np.log(self.c1) + p.c_tilde**2 / (2.0 * self.c1**2)
        return val - val[0]

    def product_defect(self) -> float:
        """max |c1 c2 - C| / C over the samples (c2 evaluated as C / c1)."""
        C = self.params.c_tilde
        if C == 0.0:
            return 0.0
        return float(np.max(np.abs(self.c1 * (C / self.c1) - C)) / C)


def solve_c1(params: GaussianGaussianParams, t_max: float, dt: float = 1e-3) -> KieTrajectory:
    """RK4 (graded steps) for c1'' = 2 lam / c1 + C^2 / c1^3."""
    lam, C2 = params.lam, params.c_tilde**2

    def rhs(t, y):
        c, v = y
        return [v, 2.0 * lam / c + C2 / (c * c * c)]

    ts, ys = integrate_graded(rhs, (params.c10, params.c11), t_max, dt)
    traj = KieTrajectory(params, ts, ys[:, 0].copy(), ys[:, 1].copy())
    drift = float(np.max(np.abs(traj.first_integral())))
    if not np.all(np.isfinite(ys)) or drift > FIRST_INTEGRAL_TOL:
        raise RefinementError(f"first-integral drift {drift:.3e} exceeds {FIRST_INTEGRAL_TOL}")
    return traj


def solve_c2(params: GaussianGaussianParams, t_max: float, dt: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Independent integration of c2'' = 2 c2'^2 / c2 - 2 lam c2^3 / C^2 - c2^5 / C^2."""
    C = params.c_tilde
    if C == 0.0:
        raise ValueError("c2 is identically zero for monokinetic data")
    lam, C2 = params.lam, C * C

    def rhs(t, y):
        c, v = y
        return [v, 2.0 * v * v / c - 2.0 * lam * c**3 / C2 - c**5 / C2]

    c21 = -C * params.c11 / params.c10**2
    ts, ys = integrate_graded(rhs, (params.c20, c21), t_max, dt)
    return ts, ys[:, 0]


def _require_kinetic(traj: KieTrajectory) -> None:
    if traj.params.monokinetic:
        raise ValueError("monokinetic parameters (c2 = 0) have no phase-space density; use monokinetic_family")


def gg_eval(traj: KieTrajectory, t, x, xi) -> np.ndarray:
    """f(t, x, xi), broadcasting over the arguments."""
    _require_kinetic(traj)
    c1, c2 = traj.c1_at(t), traj.c2_at(t)
    b1, b2 = traj.b1_at(t), traj.b2_at(t, x)
    x, xi = np.asarray(x, dtype=float), np.asarray(xi, dtype=float)
    return np.exp(-((x - b1) ** 2) / c1**2 - (xi - b2) ** 2 / c2**2) / (np.pi * c1 * c2)


def gg_density(traj: KieTrajectory, t, x) -> np.ndarray:
    """x-marginal (sqrt(pi) c1)^{-1} exp(-(x - b1)^2 / c1^2)."""
    c1 = traj.c1_at(t)
    return np.exp(-((np.asarray(x) - traj.b1_at(t)) ** 2) / c1**2) / (SQRT_PI * c1)


def log_density_gradient(traj: KieTrajectory, t, x) -> np.ndarray:
    """(ln rho)_x = -2 (x - b1) / c1^2, exact."""
    return -2.0 * (np.asarray(x) - traj.b1_at(t)) / traj.c1_at(t) ** 2


def _stencil_step(traj: KieTrajectory, t: float) -> float:
    return float(min(traj.c1_at(t), traj.c2_at(t))) / 64.0


def vlasov_residual(traj: KieTrajectory, t: float, x, xi, step: float | None = None) -> float:
    """max |f_t + xi f_x - lam (ln rho)_x f_xi| on the (x, xi) lattice, centred differences."""
    _require_kinetic(traj)
    h = _stencil_step(traj, t) if step is None else float(step)
    lo = -traj.t_max if traj.params.c11 == 0.0 else 0.0
    if not 0.0 < h or t - h < lo or t + h > traj.t_max:
        raise ValueError("time stencil leaves the trajectory range")
    X, XI = np.meshgrid(np.asarray(x, dtype=float), np.asarray(xi, dtype=float), indexing="ij")
    ft = (gg_eval(traj, t + h, X, XI) - gg_eval(traj, t - h, X, XI)) / (2 * h)
    fx = (gg_eval(traj, t, X + h, XI) - gg_eval(traj, t, X - h, XI)) / (2 * h)
    fxi = (gg_eval(traj, t, X, XI + h) - gg_eval(traj, t, X, XI - h)) / (2 * h)
    res = ft + XI * fx - traj.params.lam * log_density_gradient(traj, t, X) * fxi
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class RefinementStudy:
    steps: tuple[float, ...]
    residuals: tuple[float, ...]

    @property
    def ratios(self) -> tuple[float, ...]:
        r = self.residuals
        return tuple(r[i] / r[i + 1] for i in range(len(r) - 1))

    @property
    def second_order(self) -> bool:
        lo, hi = ORDER_RANGE
        return all(lo <= q <= hi for q in self.ratios)


def vlasov_refinement(traj: KieTrajectory, t: float, x, xi, levels: int = 3) -> RefinementStudy:
    h0 = _stencil_step(traj, t)
    steps = tuple(h0 / 2**i for i in range(levels))
    study = RefinementStudy(steps, tuple(vlasov_residual(traj, t, x, xi, h) for h in steps))
    if not study.second_order:
        raise RefinementError(f"Vlasov residual not second order: ratios {study.ratios}")
    return study


def tensor_vlasov_residual(a: KieTrajectory, b: KieTrajectory, t: float, axis, step: float) -> float:
    """2D residual of f_a(x1, xi1) f_b(x2, xi2) on the 4D lattice axis^4."""
    if a.params.lam != b.params.lam:
        raise ValueError("factors must share lambda")
    _require_kinetic(a)
    _require_kinetic(b)
    X1, X2, P1, P2 = np.meshgrid(axis, axis, axis, axis, indexing="ij")
    h = step

    def f(tt, x1, x2, p1, p2):
        return gg_eval(a, tt, x1, p1) * gg_eval(b, tt, x2, p2)

    ft = (f(t + h, X1, X2, P1, P2) - f(t - h, X1, X2, P1, P2)) / (2 * h)
    fx1 = (f(t, X1 + h, X2, P1, P2) - f(t, X1 - h, X2, P1, P2)) / (2 * h)
    fx2 = (f(t, X1, X2 + h, P1, P2) - f(t, X1, X2 - h, P1, P2)) / (2 * h)
    fp1 = (f(t, X1, X2, P1 + h, P2) - f(t, X1, X2, P1 - h, P2)) / (2 * h)
    fp2 = (f(t, X1, X2, P1, P2 + h) - f(t, X1, X2, P1, P2 - h)) / (2 * h)
    lam = a.params.lam
    res = (
        ft
        + P1 * fx1
        + P2 * fx2
        - lam * (log_density_gradient(a, t, X1) * fp1 + log_density_gradient(b, t, X2) * fp2)
    )
    return float(np.max(np.abs(res)))


# Conservation laws ------------------------------------------------------------


@dataclass(frozen=True)
class KieMoments:
    """Closed-form Gaussian moments at one time."""

    t: float
    mass: float
    x2: float  # int x^2 f
    x_xi: float  # int x xi f
    xi2: float  # int xi^2 f
    entropy: float  # int rho ln rho

    def energy(self, lam: float) -> float:
        return 0.5 * self.xi2 + lam * self.entropy


def kie_moments(traj: KieTrajectory, t: float) -> KieMoments:
    p = traj.params
    c1, c1d = float(traj.c1_at(t)), float(traj.c1dot_at(t))
    c2 = p.c_tilde / c1
    b1 = float(traj.b1_at(t))
    return KieMoments(
        float(t),
        1.0,
        b1 * b1 + 0.5 * c1 * c1,
        0.5 * c1 * c1d + b1 * p.B1,
        0.5 * c1d * c1d + p.B1**2 + 0.5 * c2 * c2,
        -math.log(SQRT_PI * c1) - 0.5,
    )


def kie_quadrature_moments(traj: KieTrajectory, t: float, n: int = 256, width: float = 10.0) -> KieMoments:
    """Same moments by tensor quadrature of gg_eval (independent check).

    The xi-lattice follows the local mean: xi = b2(x) + c2 eta, so a narrow
    velocity profile stays resolved at late times.
    """
    _require_kinetic(traj)
    c1, c2 = float(traj.c1_at(t)), float(traj.c2_at(t))
    b1 = float(traj.b1_at(t))
    x = b1 + np.linspace(-width, width, n, endpoint=False) * c1
    eta = np.linspace(-width, width, n, endpoint=False)
    hx, heta = x[1] - x[0], (eta[1] - eta[0]) * c2
    X = x[:, None]
    XI = traj.b2_at(t, X) + c2 * eta[None, :]
    F = gg_eval(traj, t, X, XI)
    rho = heta * F.sum(axis=1)
    w = hx * heta
    ent = hx * float(np.sum(np.where(rho > 0, rho * np.log(np.where(rho > 0, rho, 1.0)), 0.0)))
    return KieMoments(
        float(t), w * F.sum(), w * np.sum(X**2 * F), w * np.sum(X * XI * F), w * np.sum(XI**2 * F), ent
    )


@dataclass(frozen=True)
class ConservationReport:
    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    quadrature_energy: np.ndarray
    x2_residual: float  # d/dt int x^2 f - 2 int x xi f
    x_xi_residual: float  # d/dt int x xi f - int xi^2 f - lam

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])) / max(abs(self.energy[0]), 1.0))

    @property
    def quadrature_gap(self) -> float:
        return float(np.max(np.abs(self.energy - self.quadrature_energy)))


def kie_conservation_report(traj: KieTrajectory, times: Sequence[float], fd_step: float = 1e-3) -> ConservationReport:
    _require_kinetic(traj)
    lam = traj.params.lam
    times = np.asarray(times, dtype=float)
    mom = [kie_moments(traj, t) for t in times]
    quad = [kie_quadrature_moments(traj, t) for t in times]
    r1 = r2 = 0.0
    h = fd_step
    for t in times:
        if t - h < 0 or t + h > traj.t_max:
            continue
        lo, mid, hi = kie_moments(traj, t - h), kie_moments(traj, t), kie_moments(traj, t + h)
        scale = 1.0 + abs(mid.x_xi) + abs(mid.xi2)
        r1 = max(r1, abs((hi.x2 - lo.x2) / (2 * h) - 2.0 * mid.x_xi) / scale)
        r2 = max(r2, abs((hi.x_xi - lo.x_xi) / (2 * h) - mid.xi2 - lam) / scale)
    return ConservationReport(
        times,
        np.array([m.mass for m in quad]),
        np.array([m.energy(lam) for m in mom]),
        np.array([m.energy(lam) for m in quad]),
        r1,
        r2,
    )


# Large-time rescaled profile --------------------------------------------------


@dataclass(frozen=True)
class RescaledGap:
    t: float
    l1_gap: float
    envelope: float
    relative_entropy: float  # int gamma^2 ln(gamma^2 / rho~) (reverse direction), closed form
    entropy_bound: float  # 2 pi [ (tau/c1)^2 / 2 - 1/2 + ln(c1/tau) + b1^2/c1^2 ]
    entropy_bound_flipped_sign: float  # same with + (1 - (tau/c1)^2) / 2
    density: Density


def gg_rescaled_profile(traj: KieTrajectory, tau: TauTrajectory, t: float, grid: Grid1D) -> RescaledGap:
    """rho~(t, y) = sqrt(pi) tau rho(t, tau y), normalised like gamma^2, and its L^1 gap.

    ``entropy_bound`` is the Csiszar-Kullback route 2 ||gamma^2||_1 int gamma^2 ln(gamma^2 / rho~)
    in closed form, an upper bound for the squared gap.
    """
    if t < 2.0:
        raise ValueError("rescaled profile requires t >= 2")
    tt = float(tau.tau_at(t))
    c1 = float(traj.c1_at(t))
    b1 = float(traj.b1_at(t))
    y = grid.x
    rho = SQRT_PI * tt * gg_density(traj, t, tt * y)
    l1 = float(quadrature(np.abs(rho - gaussian_sq(y)), grid))
    r2 = (tt / c1) ** 2
    rel = SQRT_PI * (0.5 * r2 - 0.5 + math.log(c1 / tt) + (b1 / c1) ** 2)
    llt = math.log(math.log(t)) / math.log(t)
    return RescaledGap(
        float(t),
        l1,
        math.sqrt(llt) if llt > 0 else float("nan"),
        rel,
        2.0 * SQRT_PI * rel,
        2.0 * math.pi * (0.5 * (1.0 - r2) + math.log(c1 / tt) + (b1 / c1) ** 2),
        Density(grid, rho),
    )


def rescaled_csiszar_kullback(gap: RescaledGap):
    """Numerical Csiszar-Kullback pair for the rescaled profile (relative entropy of rho~ w.r.t. gamma^2)."""
    return csiszar_kullback_gap(gap.density)


# Monokinetic family -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MonokineticFamily:
    """rho = rho* / tau0 exp(-sigma0 (x - p0 t)^2 / tau0^2), v = (tau0'/tau0)(x - p0 t) + p0."""

    lam: float
    rho_star: float
    sigma0: float
    omega0: float
    p0: float
    tau0: TauTrajectory

    def rho(self, t, x):
        tt = self.tau0.tau_at(t)
        return self.rho_star / tt * np.exp(-self.sigma0 * (np.asarray(x) - self.p0 * t) ** 2 / tt**2)

    def velocity(self, t, x):
        return self.tau0.taudot_at(t) / self.tau0.tau_at(t) * (np.asarray(x) - self.p0 * t) + self.p0

    @property
    def mass(self) -> float:
        return self.rho_star * math.sqrt(math.pi / self.sigma0)

    def euler_residual(self, t: float, x, h: float) -> tuple[float, float]:
        """Centred-difference residuals of rho_t + (rho v)_x and (rho v)_t + (rho v^2)_x + lam rho_x."""
        x = np.asarray(x, dtype=float)
        r, v = self.rho, self.velocity
        cont = (r(t + h, x) - r(t - h, x)) / (2 * h) + (
            r(t, x + h) * v(t, x + h) - r(t, x - h) * v(t, x - h)
        ) / (2 * h)
        mom = (
            (r(t + h, x) * v(t + h, x) - r(t - h, x) * v(t - h, x)) / (2 * h)
            + (r(t, x + h) * v(t, x + h) ** 2 - r(t, x - h) * v(t, x - h) ** 2) / (2 * h)
            + self.lam * (r(t, x + h) - r(t, x - h)) / (2 * h)
        )
        return float(np.max(np.abs(cont))), float(np.max(np.abs(mom)))


def monokinetic_family(
    lam: float, rho_star: float, sigma0: float, omega0: float, p0: float, t_max: float, dt: float = 1e-3
) -> MonokineticFamily:
    check_positive(rho_star, "rho*")
    check_positive(sigma0, "sigma0")
    return MonokineticFamily(lam, rho_star, sigma0, omega0, p0, solve_tau0(lam, sigma0, omega0, t_max, dt))


def monokinetic_refinement(fam: MonokineticFamily, t: float, x, h0: float = 0.05, levels: int = 3) -> RefinementStudy:
    """Order study of the continuity and momentum residuals (their max is tracked)."""
    steps = tuple(h0 / 2**i for i in range(levels))
    study = RefinementStudy(steps, tuple(max(fam.euler_residual(t, x, h)) for h in steps))
    if not study.second_order:
        raise RefinementError(f"isothermal Euler residual not second order: ratios {study.ratios}")
    return study
