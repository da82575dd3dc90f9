"""Estimator-style wrappers around the functional core.

Transform-shaped maps (Wigner, Husimi, Fokker-Planck semigroup, rescaling)
follow fit/transform; evolution models follow fit/predict, where ``fit``
takes the initial data and ``predict`` returns states at requested times.
Hyper-parameters are constructor arguments only, so ``get_params`` and
``set_params`` behave as usual.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import fokker_planck as fp
from . import kie
from .grid import Density, Grid1D
from .lognls import DEFAULT_VACUUM_FLOOR, GaussianAnsatz, WaveField, evolve, evolve_rescaled, rescale_to_v
from .scaling_ode import solve_tau
from .wigner import PhaseSpaceField, husimi_transform, wigner_transform


def _as_list(X):
    return list(X) if isinstance(X, (list, tuple)) else [X]


def _unwrap(items, single):
    return items[0] if single else items


def _check_steps(times: Sequence[float], t0: float, dt: float) -> list[int]:
    steps = []
    for t in times:
        n = (t - t0) / dt
        if n < -1e-9 or abs(n - round(n)) > 1e-6:
            raise ValueError(f"time {t} is not reachable from {t0} in steps of {dt}")
        steps.append(int(round(n)))
    if any(b < a for a, b in zip(steps, steps[1:])):
        raise ValueError("times must be non-decreasing")
    return steps


class WignerTransformer(TransformerMixin, BaseEstimator):
    """WaveField -> Wigner field on the eps-scaled phase-space lattice."""

    def __init__(self, n_shifts: int | None = None, shift_half_range: float | None = None, check: bool = True):
        self.n_shifts = n_shifts
        self.shift_half_range = shift_half_range
        self.check = check

    def fit(self, X=None, y=None):
        self.fitted_ = True
        return self

    def transform(self, X):
        single = isinstance(X, WaveField)
        out = [
            wigner_transform(s, self.n_shifts, self.shift_half_range, check=self.check) for s in _as_list(X)
        ]
        return _unwrap(out, single)


class HusimiTransformer(WignerTransformer):
    """WaveField (or Wigner field) -> Husimi field."""

    def transform(self, X):
        single = isinstance(X, (WaveField, PhaseSpaceField))
        out = []
        for item in _as_list(X):
            W = item if isinstance(item, PhaseSpaceField) else super().transform(item)
            out.append(husimi_transform(W))
        return _unwrap(out, single)


class FokkerPlanckSemigroup(TransformerMixin, BaseEstimator):
    """f0 -> e^{tL} f0. ``fit`` records the grid of the data."""

    def __init__(self, t: float = 1.0, method: str = "auto"):
        self.t = t
        self.method = method

    def fit(self, X, y=None, grid: Grid1D | None = None):
        if isinstance(X, Density):
            grid = X.grid
        if grid is None:
            raise ValueError("a grid is required for raw values")
        self.grid_ = grid
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        values = X.values if isinstance(X, Density) else X
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 1:
            return fp.fp_apply(self.t, arr, self.grid_, self.method)
        return np.stack([fp.fp_apply(self.t, row, self.grid_, self.method) for row in arr])


class RescalingTransformer(TransformerMixin, BaseEstimator):
    """u(t) -> v(t) in the dispersive frame. ``fit`` takes the initial wavefield."""

    def __init__(self, lam: float = 1.0, t_max: float = 10.0, dt: float = 1e-3):
        self.lam = lam
        self.t_max = t_max
        self.dt = dt

    def fit(self, X: WaveField, y=None):
        self.trajectory_ = solve_tau(self.lam, self.t_max, self.dt)
        self.u_in_mass_ = X.mass
        return self

    def transform(self, X):
        check_is_fitted(self, "trajectory_")
        single = isinstance(X, WaveField)
        out = [rescale_to_v(s, self.trajectory_, u_in_mass=self.u_in_mass_) for s in _as_list(X)]
        return _unwrap(out, single)


class LogNLSSolver(BaseEstimator):
    """Strang-split solver; ``frame`` is "lab" (u) or "rescaled" (v)."""

    def __init__(
        self,
        lam: float = 1.0,
        dt: float = 1e-3,
        frame: str = "lab",
        t_max: float = 10.0,
        vacuum_floor: float = DEFAULT_VACUUM_FLOOR,
    ):
        self.lam = lam
        self.dt = dt
        self.frame = frame
        self.t_max = t_max
        self.vacuum_floor = vacuum_floor

    def fit(self, X: WaveField, y=None):
        if self.frame not in ("lab", "rescaled"):
            raise ValueError(f"unknown frame {self.frame!r}")
        self.initial_ = X
        if self.frame == "rescaled":
            self.trajectory_ = solve_tau(self.lam, self.t_max)
            self.start_ = rescale_to_v(X, self.trajectory_)
        else:
            self.start_ = X
        return self

    def predict(self, times: Sequence[float]) -> list[WaveField]:
        check_is_fitted(self, "start_")
        steps = _check_steps(times, self.start_.t, self.dt)
        out, state, done = [], self.start_, 0
        for n in steps:
            if n > done:
                if self.frame == "lab":
                    state = evolve(state, self.lam, self.dt, n - done, vacuum_floor=self.vacuum_floor)[-1]
                else:
                    state = evolve_rescaled(
                        state, self.trajectory_, self.lam, self.dt, n - done, vacuum_floor=self.vacuum_floor
                    )[-1]
                done = n
            out.append(state)
        return out


class GaussianAnsatzSolver(BaseEstimator):
    """Exact Gaussian solutions; ``fit`` takes the grid used for sampling."""

    def __init__(
        self,
        eps: float = 0.5,
        lam: float = 1.0,
        rho_star: float = 1.0,
        sigma0: float = 1.0,
        omega0: float = 0.0,
        p0: float = 0.0,
        dt: float = 2.5e-4,
    ):
        self.eps = eps
        self.lam = lam
        self.rho_star = rho_star
        self.sigma0 = sigma0
        self.omega0 = omega0
        self.p0 = p0
        self.dt = dt

    def fit(self, X: Grid1D, y=None):
        self.grid_ = X
        self.model_ = GaussianAnsatz(self.eps, self.lam, self.rho_star, self.sigma0, self.omega0, self.p0, self.dt)
        return self

    def predict(self, times: Sequence[float]) -> list[WaveField]:
        check_is_fitted(self, "model_")
        x = self.grid_.x
        return [
            WaveField(self.grid_, self.eps, prof.values(x), float(t))
            for t, prof in zip(times, self.model_.profiles(times))
        ]


class KIESolver(BaseEstimator):
    """Gaussian-Gaussian solution of the kinetic isothermal Euler system."""

    def __init__(
        self,
        lam: float = 1.0,
        c10: float = 1.0,
        c20: float = 1.0,
        c11: float = 0.0,
        B0: float = 0.0,
        B1: float = 0.0,
        t_max: float = 10.0,
        dt: float = 1e-3,
    ):
        self.lam = lam
        self.c10 = c10
        self.c20 = c20
        self.c11 = c11
        self.B0 = B0
        self.B1 = B1
        self.t_max = t_max
        self.dt = dt

    def fit(self, X=None, y=None):
        params = kie.GaussianGaussianParams(self.lam, self.c10, self.c20, self.c11, self.B0, self.B1)
        self.trajectory_ = kie.solve_c1(params, self.t_max, self.dt)
        return self

    def predict(self, times: Sequence[float], x=None, xi=None):
        """(c1, c2, b1) per time, or f on the (x, xi) lattice when both are given."""
        check_is_fitted(self, "trajectory_")
        tr = self.trajectory_
        t = np.asarray(times, dtype=float)
        if x is None or xi is None:
            return np.column_stack([tr.c1_at(t), tr.c2_at(t), tr.b1_at(t)])
        X, XI = np.meshgrid(np.asarray(x, dtype=float), np.asarray(xi, dtype=float), indexing="ij")
        return np.stack([kie.gg_eval(tr, float(s), X, XI) for s in t])
