"""Configurable experiments driven by the command line.

Each scenario declares a typed key schema, runs its independent cells in a
work pool, sorts the results by cell key, and returns a table plus a
pass/fail verdict.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import fokker_planck as fp
from . import kie
from .grid import SQRT_PI, Density, Grid1D, gaussian_sq
from .lognls import GaussianAnsatz, evolve, evolve_rescaled, rescale_to_v, wkb_gaussian
from .metrics import wasserstein_1d
from .scaling_ode import solve_tau, solve_tau0
from .svg import Series, line_plot
from .wigner import gaussian_test_family, husimi_moments, husimi_transform, monokinetic_gap, wigner_transform


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


def _floats(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from exc
    if not vals:
        raise ConfigError("empty list")
    return vals


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


PARSERS: dict[str, Callable[[str], Any]] = {
    "float": float,
    "int": int,
    "floats": _floats,
    "ints": _ints,
}


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]]
    passed: bool
    checks: list[tuple[str, bool, str]]
    plot: str | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    schema: dict[str, tuple[str, str]]  # key -> (type, default)
    run: Callable[[dict[str, Any], int], Table] = field(compare=False)

    def parse(self, section) -> dict[str, Any]:
        keys = set(section.keys()) if section is not None else set()
        unknown = keys - set(self.schema)
        if unknown:
            raise ConfigError(f"[{self.name}] unknown keys: {', '.join(sorted(unknown))}")
        out = {}
        for key, (kind, default) in self.schema.items():
            raw = section.get(key, default) if section is not None else default
            try:
                out[key] = PARSERS[kind](raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"[{self.name}] {key}: {exc}") from exc
        return out


def _pool_map(fn, cells: list, workers: int) -> list:
    """Evaluate fn on every cell; results come back sorted by the cell key."""
    if workers <= 1 or len(cells) <= 1:
        results = [fn(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, cells))
    return [r for _, r in sorted(zip(cells, results), key=lambda p: p[0])]


# convergence_rate ---------------------------------------------------------------


def _convergence_rate(p: dict, workers: int) -> Table:
    grid = Grid1D(p["half_width"], p["n_points"])
    eps, lam = p["eps"], p["lam"]
    marks = sorted(p["times"])
    traj = solve_tau(lam, marks[-1])
    v = rescale_to_v(wkb_gaussian(grid, eps), traj)
    eq = Density(grid, gaussian_sq(grid.x) / SQRT_PI)
    rows = []
    for m in marks:
        dt = p["dt_early"] if m <= p["switch_time"] else p["dt_late"]
        n = max(0, round((m - v.t) / dt))
        if n:
            v = evolve_rescaled(v, traj, lam, dt, n)[-1]
        w1 = wasserstein_1d(1, Density(grid, np.abs(v.u) ** 2 / SQRT_PI), eq)
        env = 1.0 / math.sqrt(math.log(m))
        rows.append([m, w1, env, w1 / env])
    ratio = np.array([r[3] for r in rows])
    late = ratio[np.array(marks) >= p["switch_time"]]
    bounded = bool(np.all(np.isfinite(ratio)) and ratio.max() <= p["ratio_bound"])
    monotone = bool(np.all(np.diff(late) <= 1e-12 * late[:-1]))
    plot = line_plot(
        [Series("W1", marks, [r[1] for r in rows]), Series("1/sqrt(ln t)", marks, [r[2] for r in rows])],
        title="W1 to the Gaussian profile",
        xlabel="t",
        ylabel="distance",
        logx=True,
        logy=True,
    )
    checks = [("ratio bounded", bounded, f"max {ratio.max():.4g}"), ("ratio non-increasing late", monotone, "")]
    return Table(["t", "W1", "envelope", "ratio"], rows, bounded and monotone, checks, plot)


# semiclassical_sweep --------------------------------------------------------------


def _semiclassical_cell(cell):
    eps, (L, N, lam, t, dt, rho_star, sigma0, omega0, p0) = cell
    grid = Grid1D(L, N)
    u = evolve(wkb_gaussian(grid, eps, rho_star, sigma0, omega0, p0), lam, dt, round(t / dt))[-1]
    tau0 = solve_tau0(lam, sigma0, omega0, t)
    tt, td = float(tau0.tau_at(t)), float(tau0.taudot_at(t))
    x = grid.x
    rho = Density(grid, rho_star / tt * np.exp(-sigma0 * (x - p0 * t) ** 2 / tt**2))
    vel = td / tt * (x - p0 * t) + p0
    return monokinetic_gap(wigner_transform(u), rho, vel, gaussian_test_family())


def _semiclassical_sweep(p: dict, workers: int) -> Table:
    shared = (p["half_width"], p["n_points"], p["lam"], p["t"], p["dt"], p["rho_star"], p["sigma0"], p["omega0"], p["p0"])
    eps_list = sorted(p["eps"], reverse=True)
    cells = [(e, shared) for e in eps_list]
    gaps = dict(zip(sorted(eps_list), _pool_map(_semiclassical_cell, cells, workers)))
    rows = []
    prev = None
    for e in eps_list:
        order = math.log(prev[1] / gaps[e]) / math.log(prev[0] / e) if prev else math.nan
        rows.append([e, gaps[e], order])
        prev = (e, gaps[e])
    g = np.array([r[1] for r in rows])
    orders = np.array([r[2] for r in rows[1:]])
    decreasing = bool(np.all(np.diff(g) < 0))
    order_ok = bool(orders.size == 0 or orders.min() >= p["min_order"])
    plot = line_plot(
        [Series("monokinetic gap", eps_list, list(g))], title="Semiclassical gap", xlabel="eps", ylabel="gap",
        logx=True, logy=True,
    )
    checks = [("gap strictly decreasing", decreasing, ""), ("empirical order", order_ok, f"min {np.nanmin(orders) if orders.size else math.nan:.3g}")]
    return Table(["eps", "gap", "order"], rows, decreasing and order_ok, checks, plot)


# sobolev_growth ------------------------------------------------------------------


def _sobolev_growth(p: dict, workers: int) -> Table:
    times = sorted(p["times"])
    model = GaussianAnsatz(p["eps"], p["lam"], p["rho_star"], p["sigma0"], p["omega0"], p["p0"], dt=p["dt"])
    traj = solve_tau(p["lam"], times[-1])
    mass = model.initial_mass_sq
    rows = []
    for t, prof in zip(times, model.profiles(times)):
        grad = p["eps"] ** 2 * prof.grad_sq()
        comp = 2.0 * p["lam"] * mass * math.log(float(traj.tau_at(t)))
        rows.append([t, grad, comp, grad / comp])
    ratio = np.array([r[3] for r in rows])
    lo, hi = p["ratio_low"], p["ratio_high"]
    in_band = bool(lo <= ratio[-1] <= hi)
    trend = bool(abs(ratio[-1] - 1) < abs(ratio[0] - 1))
    plot = line_plot([Series("ratio", times, list(ratio))], title="Sobolev growth ratio", xlabel="t", ylabel="ratio", logx=True)
    checks = [("final ratio in band", in_band, f"{ratio[-1]:.4g}"), ("trend toward one", trend, "")]
    return Table(["t", "eps2_grad_sq", "comparator", "ratio"], rows, in_band and trend, checks, plot)


# fp_decay -------------------------------------------------------------------------


def _fp_cell(cell):
    n, (L, N, sep, times) = cell
    grid = Grid1D(L, N)
    x = grid.x
    src = gaussian_sq(x - sep) - gaussian_sq(x + sep)
    cert = fp.fp_decay_certificate(lambda u: src, n, times, grid)
    return [
        [r.n, r.t, r.norm_neg_n, r.bound_neg_n, r.norm_neg_n1, r.bound_neg_n1, r.bound_neg_n1_sup, r.bound_neg_n1_half_constant, float(r.passed)]
        for r in cert.rows
    ]


def _fp_decay(p: dict, workers: int) -> Table:
    shared = (p["half_width"], p["n_points"], p["separation"], tuple(sorted(p["times"])))
    blocks = _pool_map(_fp_cell, [(n, shared) for n in sorted(p["orders"])], workers)
    rows = [r for block in blocks for r in block]
    passed = all(r[-1] == 1.0 for r in rows)
    series = []
    for n in sorted(set(int(r[0]) for r in rows)):
        sel = [r for r in rows if int(r[0]) == n]
        series.append(Series(f"n={n} lhs/bound", [r[1] for r in sel], [r[2] / r[3] for r in sel]))
    plot = line_plot(series, title="Source decay: norm / bound", xlabel="t", ylabel="ratio")
    cols = ["n", "t", "norm_neg_n", "bound_neg_n", "norm_neg_n1", "bound_neg_n1", "bound_neg_n1_sup", "bound_neg_n1_half_constant", "passed"]
    return Table(cols, rows, passed, [("all certificate rows pass", passed, "")], plot)


# kie_gaussian ---------------------------------------------------------------------


def _kie_gaussian(p: dict, workers: int) -> Table:
    params = kie.GaussianGaussianParams(p["lam"], p["c10"], p["c20"], p["c11"], p["B0"], p["B1"])
    times = sorted(p["times"])
    traj = kie.solve_c1(params, times[-1])
    tau = solve_tau(p["lam"], times[-1])
    grid = Grid1D(p["half_width"], p["n_points"])
    rows = []
    for t in times:
        g = kie.gg_rescaled_profile(traj, tau, t, grid)
        rows.append([t, float(traj.c1_at(t)), float(traj.c2_at(t)), g.l1_gap, g.envelope, g.l1_gap / g.envelope, g.entropy_bound])
    gaps = np.array([r[3] for r in rows])
    fitted = float(max(r[5] for r in rows))
    decreasing = bool(np.all(np.diff(gaps) < 0))
    ck = all(r[3] ** 2 <= r[6] for r in rows)
    cons = kie.kie_conservation_report(traj, np.linspace(0.0, min(10.0, times[-1]), 11))
    energy_ok = cons.energy_drift <= 1e-7
    xs = np.linspace(-4, 4, 33)
    study = kie.vlasov_refinement(traj, 1.0, xs * float(traj.c1_at(1.0)) + float(traj.b1_at(1.0)), xs)
    plot = line_plot(
        [Series("L1 gap", times, list(gaps)), Series(f"{fitted:.3g} sqrt(lnln t/ln t)", times, [fitted * r[4] for r in rows])],
        title="Rescaled KIE profile", xlabel="t", ylabel="L1 gap", logx=True, logy=True,
    )
    checks = [
        ("gap decreasing", decreasing, ""),
        ("Csiszar-Kullback route", ck, ""),
        ("energy drift", energy_ok, f"{cons.energy_drift:.2e}"),
        ("Vlasov residual second order", study.second_order, " ".join(f"{q:.3f}" for q in study.ratios)),
        ("fitted envelope constant", True, f"{fitted:.4g}"),
    ]
    return Table(["t", "c1", "c2", "l1_gap", "envelope", "ratio", "entropy_bound"], rows, decreasing and ck and energy_ok and study.second_order, checks, plot)


# wigner_moments -------------------------------------------------------------------


def _wigner_moments(p: dict, workers: int) -> Table:
    grid = Grid1D(p["half_width"], p["n_points"])
    model = GaussianAnsatz(p["eps"], p["lam"], p["rho_star"], p["sigma0"], p["omega0"], p["p0"])
    rows, names = [], []
    for t in sorted(p["times"]):
        state = model.wavefield(grid, t) if t > 0 else wkb_gaussian(grid, p["eps"], p["rho_star"], p["sigma0"], p["omega0"], p["p0"])
        WH = husimi_transform(wigner_transform(state))
        for name, chk in sorted(husimi_moments(WH, state).items()):
            names.append(name)
            rows.append([t, len(names) - 1, chk.lhs, chk.rhs, chk.discrepancy])
    worst = max(r[4] for r in rows)
    passed = worst <= p["tolerance"]
    labels = sorted(set(names))
    times = sorted(p["times"])
    series = [
        Series(name, times, [max(r[4] for r, nm in zip(rows, names) if nm == name and r[0] == t) for t in times])
        for name in labels
    ]
    plot = line_plot(series, title="Husimi moment discrepancies", xlabel="t", ylabel="relative error", logy=True)
    checks = [("max discrepancy", passed, f"{worst:.2e}; identities: {', '.join(labels)}")]
    return Table(["t", "identity_index", "lhs", "rhs", "discrepancy"], rows, passed, checks, plot)


_GRID = {"half_width": ("float", "16"), "n_points": ("int", "512")}
_GAUSS = {"rho_star": ("float", "1"), "sigma0": ("float", "1"), "omega0": ("float", "0"), "p0": ("float", "0")}

SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario(
            "convergence_rate",
            "W1 of the rescaled density to the Gaussian against 1/sqrt(ln t)",
            {**_GRID, "eps": ("float", "0.5"), "lam": ("float", "1"), "times": ("floats", "2 5 10 20 50 100"),
             "dt_early": ("float", "1e-3"), "dt_late": ("float", "5e-3"), "switch_time": ("float", "10"),
             "ratio_bound": ("float", "1")},
            _convergence_rate,
        ),
        Scenario(
            "semiclassical_sweep",
            "Wigner gap to the monokinetic limit across eps",
            {"half_width": ("float", "32"), "n_points": ("int", "2048"), "eps": ("floats", "1 0.5 0.25 0.125"),
             "lam": ("float", "1"), "t": ("float", "1"), "dt": ("float", "1e-3"), "min_order": ("float", "0.9"),
             **{**_GAUSS, "p0": ("float", "0.5")}},
            _semiclassical_sweep,
        ),
        Scenario(
            "sobolev_growth",
            "eps^2 ||u_x||^2 against 2 lam ||u_in||^2 ln tau(t) on the Gaussian oracle",
            {"eps": ("float", "0.5"), "lam": ("float", "1"), "times": ("floats", "10 20 30 40 50"), "dt": ("float", "1e-3"),
             "ratio_low": ("float", "0.7"), "ratio_high": ("float", "1.3"), **_GAUSS},
            _sobolev_growth,
        ),
        Scenario(
            "fp_decay",
            "Fokker-Planck source-term decay certificates",
            {**_GRID, "orders": ("ints", "1 2"), "times": ("floats", "0.5 1 2"), "separation": ("float", "0.5")},
            _fp_decay,
        ),
        Scenario(
            "kie_gaussian",
            "Gaussian-Gaussian KIE solution: rescaled profile and residual checks",
            {"half_width": ("float", "16"), "n_points": ("int", "1024"), "lam": ("float", "1"), "c10": ("float", "1"),
             "c20": ("float", "1"), "c11": ("float", "0"), "B0": ("float", "0"), "B1": ("float", "0"),
             "times": ("floats", "10 100 1000 10000")},
            _kie_gaussian,
        ),
        Scenario(
            "wigner_moments",
            "Husimi phase-space moments against closed forms",
            {"half_width": ("float", "32"), "n_points": ("int", "2048"), "eps": ("float", "0.5"), "lam": ("float", "1"),
             "times": ("floats", "0 0.5 1"),
             "tolerance": ("float", "1e-6"), **{**_GAUSS, "p0": ("float", "0.5")}},
            _wigner_moments,
        ),
    )
}
