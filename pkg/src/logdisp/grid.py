"""Uniform periodic grids, spectral calculus and reference Gaussian profiles."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import check_finite, check_on_grid, check_positive, check_power_of_two

SQRT_PI = float(np.sqrt(np.pi))
MIN_MASS = 1e-12


@dataclass(frozen=True)
class Grid1D:
    """Periodic grid x_j = -L + j h on [-L, L) with h = 2L/N."""

    half_width: float
    n_points: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "half_width", check_positive(self.half_width, "L"))
        object.__setattr__(self, "n_points", check_power_of_two(self.n_points, "N"))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_width + self.spacing * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)
        k.flags.writeable = False
        return k


def make_grid(L: float, N: int) -> Grid1D:
    return Grid1D(L, N)


def quadrature(values, grid: Grid1D) -> float | complex:
    """Periodic trapezoid rule h * sum(values)."""
    arr = check_on_grid(values, grid)
    return grid.spacing * arr.sum()


def spectral_derivative(values, grid: Grid1D, order: int = 1) -> np.ndarray:
    """Derivative of the trigonometric interpolant.

    Real input gives real output. For odd orders the Nyquist mode is dropped,
    which keeps the operator real and skew.
    """
    arr = check_on_grid(values, grid)
    if order < 0:
        raise ValueError("order must be >= 0")
    if order == 0:
        return arr.copy()
    mult = (1j * grid.k) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[grid.n_points // 2] = 0.0
    out = np.fft.ifft(mult * np.fft.fft(arr))
    return out.real if np.isrealobj(arr) else out


def primitive(values, grid: Grid1D) -> np.ndarray:
    """F(x_j) = integral of the trigonometric interpolant from -L to x_j.

    The mean mode integrates to a linear ramp, the rest spectrally.
    """
    arr = check_on_grid(values, grid)
    hat = np.fft.fft(arr)
    mean = hat[0] / grid.n_points
    k = grid.k
    safe = np.where(k == 0.0, 1.0, k)
    ihat = np.where(k == 0.0, 0.0, hat / (1j * safe))
    ihat[grid.n_points // 2] = 0.0
    periodic = np.fft.ifft(ihat)
    periodic = periodic - periodic[0]
    out = mean * (grid.x + grid.half_width) + periodic
    return out.real if np.isrealobj(arr) else out


def interpolate(values, grid: Grid1D, points, *, outside: float = 0.0) -> np.ndarray:
    """Evaluate the trigonometric interpolant at arbitrary points.

    Points outside [-L, L) receive ``outside`` instead of a periodic image.
    Cost is O(N * len(points)), evaluated in blocks.
    """
    arr = check_on_grid(values, grid)
    pts = np.asarray(points, dtype=float)
    flat = pts.ravel()
    n = grid.n_points
    hat = np.fft.fft(arr) / n
    k = grid.k.copy()
    # split the Nyquist mode symmetrically so real data interpolates to real values
    hat = np.concatenate([hat, hat[n // 2 : n // 2 + 1]])
    k = np.concatenate([k, [-k[n // 2]]])
    hat[n // 2] *= 0.5
    hat[-1] *= 0.5
    out = np.empty(flat.shape, dtype=complex)
    block = max(1, 2**22 // (n + 1))
    for start in range(0, flat.size, block):
        seg = flat[start : start + block] + grid.half_width
        out[start : start + block] = np.exp(1j * np.outer(seg, k)) @ hat
    mask = (flat < -grid.half_width) | (flat >= grid.half_width)
    out[mask] = outside
    out = out.reshape(pts.shape)
    return out.real if np.isrealobj(arr) else out


def gaussian(x) -> np.ndarray:
    """gamma(x) = exp(-x^2 / 2)."""
    return np.exp(-0.5 * np.asarray(x, dtype=float) ** 2)


def gaussian_sq(x) -> np.ndarray:
    """gamma(x)^2 = exp(-x^2); its integral is sqrt(pi)."""
    return np.exp(-np.asarray(x, dtype=float) ** 2)


def entropy_integrand(rho: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """rho ln rho with the limit value 0 below ``floor`` (and at 0)."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    mask = rho > max(floor, 0.0)
    out[mask] = rho[mask] * np.log(rho[mask])
    return out


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative function on a grid with cached quadratures."""

    grid: Grid1D
    values: np.ndarray
    mass: float = field(init=False)
    m1: float = field(init=False)
    m2: float = field(init=False)
    entropy: float = field(init=False)

    def __post_init__(self) -> None:
        vals = np.array(check_on_grid(self.values, self.grid, complex_ok=False), dtype=float)
        if vals.min() < 0.0:
            raise ValueError("density values must be nonnegative")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        h, x = self.grid.spacing, self.grid.x
        object.__setattr__(self, "mass", float(h * vals.sum()))
        object.__setattr__(self, "m1", float(h * (x * vals).sum()))
        object.__setattr__(self, "m2", float(h * (x * x * vals).sum()))
        object.__setattr__(self, "entropy", float(h * entropy_integrand(vals).sum()))

    def require_mass(self) -> float:
        if self.mass < MIN_MASS:
            raise ValueError(f"degenerate density: mass {self.mass:.3e} < {MIN_MASS}")
        return self.mass

    @property
    def mean(self) -> float:
        return self.m1 / self.require_mass()

    @property
    def variance(self) -> float:
        m = self.mean
        return self.m2 / self.mass - m * m

    def normalized(self) -> "Density":
        return Density(self.grid, self.values / self.require_mass())


def gaussian_density(grid: Grid1D, mean: float = 0.0, var: float = 0.5) -> Density:
    """Normal density N(mean, var) sampled on the grid."""
    var = check_positive(var, "var")
    check_finite(mean, "mean")
    vals = np.exp(-((grid.x - mean) ** 2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
    return Density(grid, vals)
