"""Fast invariant suite behind ``logdisp self-test``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fokker_planck as fp
from . import kie
from .grid import SQRT_PI, Density, Grid1D, gaussian_density, gaussian_sq, primitive, quadrature, spectral_derivative
from .lognls import (
    DEFAULT_VACUUM_FLOOR,
    GaussianAnsatz,
    conserved_quantities,
    evolve,
    evolve_rescaled,
    modified_energy_report,
    rescale_to_v,
    wkb_gaussian,
)
from .metrics import csiszar_kullback_gap, neg_sobolev_w11, wasserstein_1d
from .scaling_ode import solve_tau, tau_in_s_check
from .wigner import husimi_moments, husimi_transform, wigner_transform


@dataclass(frozen=True)
class Outcome:
    name: str
    passed: bool
    detail: str
    seconds: float


def _check(value: float, limit: float) -> tuple[bool, str]:
    return bool(value <= limit), f"{value:.3e} (limit {limit:.0e})"


def _grid_checks(_floor):
    g = Grid1D(16, 512)
    x = g.x
    yield "grid: quadrature of gamma^2", _check(abs(quadrature(gaussian_sq(x), g) - SQRT_PI), 1e-12)
    d2 = spectral_derivative(gaussian_sq(x), g, 2)
    yield "grid: spectral second derivative", _check(float(np.max(np.abs(d2 - (4 * x**2 - 2) * gaussian_sq(x)))), 1e-10)
    prim = primitive(-2 * x * gaussian_sq(x), g)
    yield "grid: spectral primitive", _check(float(np.max(np.abs(prim - gaussian_sq(x)))), 1e-12)


def _ode_checks(_floor):
    traj = solve_tau(1.0, 100.0)
    yield "scaling_ode: first integral", _check(float(np.max(np.abs(traj.first_integral()))), 1e-8)
    yield "scaling_ode: closed form in s", _check(tau_in_s_check(traj, 0.5), 1e-8)


def _lognls_checks(floor):
    g = Grid1D(16, 512)
    eps, lam = 0.5, 1.0
    u0 = wkb_gaussian(g, eps, 1.0, 1.0, 0.0, 0.5)
    model = GaussianAnsatz(eps, lam, 1.0, 1.0, 0.0, 0.5)
    prof = model.profile(1.0)
    run = evolve(u0, lam, 1e-3, 1000, vacuum_floor=floor)
    q0 = conserved_quantities(run[0], lam, floor)
    q1 = conserved_quantities(run[-1], lam, floor)
    yield "lognls: mass conservation", _check(abs(q1.mass - q0.mass) / q0.mass, 1e-11)
    yield "lognls: entropy matches closed form", _check(abs(q1.entropy - prof.entropy()), 1e-6)
    yield "lognls: energy conservation", _check(abs(q1.energy - q0.energy), 1e-5)
    err = float(np.sqrt(quadrature(np.abs(run[-1].u - prof.values(g.x)) ** 2, g)))
    yield "lognls: agreement with Gaussian solution", _check(err, 1e-5)
    traj = solve_tau(lam, 2.0)
    v = evolve_rescaled(rescale_to_v(u0, traj), traj, lam, 1e-3, 2000, vacuum_floor=floor)[-1]
    rep = modified_energy_report(v, traj, lam, floor)
    ok = max(1.0, lam) * rep.tilde_energy >= rep.mod_plus + rep.mod_minus
    rho = Density(g, np.abs(v.u) ** 2)
    ck = csiszar_kullback_gap(rho)
    yield "lognls: modified energy ordering", (bool(ok and ck.holds), f"E~={rep.tilde_energy:.4g}, E+={rep.mod_plus:.4g}, E-={rep.mod_minus:.4g}")


def _wigner_checks(_floor):
    g = Grid1D(16, 512)
    state = GaussianAnsatz(0.5, 1.0, 1.0, 1.0, 0.0, 0.5).wavefield(g, 0.5)
    WH = husimi_transform(wigner_transform(state))
    worst = max(c.discrepancy for c in husimi_moments(WH, state).values())
    yield "wigner: Husimi moment identities", _check(worst, 1e-6)
    neg = float(max(0.0, -WH.values.min()) / WH.values.max())
    yield "wigner: Husimi nonnegativity", _check(neg, 1e-12)


def _fp_checks(_floor):
    g = Grid1D(16, 512)
    x = g.x
    dev = max(fp.fp_kernel_matrix(t, g).check() for t in (0.05, 0.5, 5.0))
    yield "fokker_planck: column stochasticity", _check(dev, 1e-10)
    f0 = gaussian_density(g, 1.0, 0.3).values * (1 + 0.5 * np.sin(2 * x))
    out = fp.fp_apply(0.4, f0, g)
    yield "fokker_planck: positivity", _check(float(max(0.0, -out.min())), 1e-14)
    semi = np.max(np.abs(fp.fp_apply(0.3, fp.fp_apply(0.2, f0, g), g) - fp.fp_apply(0.5, f0, g)))
    yield "fokker_planck: semigroup property", _check(float(semi), 1e-8)
    yield "fokker_planck: stationarity", _check(float(np.max(np.abs(fp.fp_apply(1.0, gaussian_sq(x), g) - gaussian_sq(x)))), 1e-10)
    worst = 0.0
    for n in (1, 2):
        lhs = fp.fp_apply(0.3, spectral_derivative(f0, g, n), g)
        rhs = math.exp(-2 * n * 0.3) * spectral_derivative(fp.fp_apply(0.3, f0, g), g, n)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    yield "fokker_planck: derivative commutation", _check(worst, 1e-8)


def _metric_checks(_floor):
    g = Grid1D(16, 512)
    rng = np.random.default_rng(7)
    dens = [gaussian_density(g, m, v) for m, v in zip(rng.uniform(-2, 2, 8), rng.uniform(0.3, 2, 8))]
    means = rng.uniform(-2, 2, 4)
    kr = mono = sym = tri = 0.0
    for i in range(len(dens)):
        for j in range(len(dens)):
            a, b = dens[i], dens[j]
            w1 = wasserstein_1d(1, a, b)
            if i < len(means) and j < len(means):
                # equal variances: W1 is the mean shift
                pa, pb = gaussian_density(g, means[i], 0.7), gaussian_density(g, means[j], 0.7)
                prim = neg_sobolev_w11(pa.values / pa.mass - pb.values / pb.mass, g)
                kr = max(kr, abs(prim - abs(means[i] - means[j])))
            sym = max(sym, abs(w1 - wasserstein_1d(1, b, a)))
            if i != j:
                mono = max(mono, w1 - wasserstein_1d(2, a, b))
            c = dens[(i + j) % len(dens)]
            tri = max(tri, w1 - wasserstein_1d(1, a, c) - wasserstein_1d(1, c, b))
    yield "metrics: Kantorovich-Rubinstein identity", _check(kr, 1e-10)
    yield "metrics: symmetry", _check(sym, 1e-12)
    yield "metrics: triangle inequality", _check(max(tri, 0.0), 1e-12)
    yield "metrics: W1 <= W2", _check(max(mono, 0.0), 1e-9)


def _kie_checks(_floor):
    params = kie.GaussianGaussianParams(1.0, 1.0, 1.0, 0.3, 0.2, 0.5)
    traj = kie.solve_c1(params, 12.0)
    yield "kie: first integral of the width ODE", _check(float(np.max(np.abs(traj.first_integral()))), 1e-8)
    xs = np.linspace(-4, 4, 33)
    try:
        study = kie.vlasov_refinement(traj, 1.0, xs * float(traj.c1_at(1.0)) + float(traj.b1_at(1.0)), xs)
        yield "kie: Vlasov residual second order", (True, " ".join(f"{q:.3f}" for q in study.ratios))
    except kie.RefinementError as exc:
        yield "kie: Vlasov residual second order", (False, str(exc))
    other = kie.solve_c1(kie.GaussianGaussianParams(1.0, 1.5, 0.7, -0.2, 0.0, 0.1), 3.0)
    ax = np.linspace(-2, 2, 9)
    r = [kie.tensor_vlasov_residual(traj, other, 1.0, ax, h) for h in (0.02, 0.01, 0.005)]
    ratios = (r[0] / r[1], r[1] / r[2])
    yield "kie: tensor-product closure", (all(3.5 <= q <= 4.5 for q in ratios), " ".join(f"{q:.3f}" for q in ratios))
    cons = kie.kie_conservation_report(traj, np.linspace(0, 10, 11))
    yield "kie: energy conservation", _check(cons.energy_drift, 1e-7)


GROUPS: list[Callable] = [_grid_checks, _ode_checks, _lognls_checks, _wigner_checks, _fp_checks, _metric_checks, _kie_checks]


def run_self_test(vacuum_floor: float = DEFAULT_VACUUM_FLOOR, extra: list[Callable] | None = None) -> list[Outcome]:
    outcomes = []
    for group in GROUPS + list(extra or []):
        start = time.perf_counter()
        try:
            for name, (passed, detail) in group(vacuum_floor):
                outcomes.append(Outcome(name, passed, detail, time.perf_counter() - start))
                start = time.perf_counter()
        except Exception as exc:  # a crashing group is a failure with its diagnostic
            outcomes.append(Outcome(f"{group.__name__.strip('_')}: crashed", False, f"{type(exc).__name__}: {exc}", 0.0))
    return outcomes
