"""Discrete Wigner and Husimi transforms.

For each x the transform is a DFT in z of

    C(x, z) = f(x + eps z / 2) conj(f(x - eps z / 2)).

The half-shifts s = eps z / 2 run over a symmetric lattice of M points in
[-S, S) (default S = L / 2, M = N) and are applied as spectral phase
shifts, so s need not be a multiple of h. The conjugate lattice has
spacing dxi = pi eps / (2 S) and half-width pi eps M / (4 S). Scaling the
z-lattice with eps keeps the autocorrelation resolved for every eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._validation import check_power_of_two
from .grid import Density, Grid1D, interpolate, quadrature, spectral_derivative
from .lognls import WaveField

ALIAS_TOL = 1e-8

TestFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    """Real function on the (x, xi) tensor lattice; ``values[i, m]`` sits at (x_i, xi_m)."""

    grid: Grid1D
    xi: np.ndarray
    values: np.ndarray
    eps: float
    flavor: str
    shift_half_range: float

    def __post_init__(self) -> None:
        if self.flavor not in ("wigner", "husimi"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.values.shape != (self.grid.n_points, self.xi.size):
            raise ValueError("values do not match the lattice")

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @property
    def z(self) -> np.ndarray:
        m = self.xi.size
        return (np.arange(m) - m // 2) * (4.0 * self.shift_half_range / (self.eps * m))

    def xi_marginal(self, weight=None) -> np.ndarray:
        """int W(x, xi) w(xi) dxi for every x."""
        w = 1.0 if weight is None else weight(self.xi)
        return self.dxi * (self.values * w).sum(axis=1)

    def integrate(self, phi: TestFunction | None = None) -> float:
        """Phase-space quadrature of W * phi."""
        h = self.grid.spacing
        if phi is None:
            return float(h * self.dxi * self.values.sum())
        X, XI = np.meshgrid(self.grid.x, self.xi, indexing="ij")
        return float(h * self.dxi * np.sum(self.values * phi(X, XI)))


def _autocorrelation(state: WaveField, n_shifts: int, half_range: float) -> np.ndarray:
    g = state.grid
    hs = 2.0 * half_range / n_shifts
    s = (np.arange(n_shifts) - n_shifts // 2) * hs
    k = g.k.copy()
    k[g.n_points // 2] = 0.0
    fhat = np.fft.fft(state.u)
    fhat[g.n_points // 2] = 0.0
    phase = np.exp(1j * np.outer(s, k))
    plus = np.fft.ifft(phase * fhat, axis=1)
    minus = np.fft.ifft(np.conj(phase) * fhat, axis=1)
    corr = plus * np.conj(minus)
    corr[0] = corr[0].real  # the unpaired edge of the lattice is its own mirror image
    return corr  # shape (M, N): shift index first


def _z_to_xi(corr: np.ndarray, hz: float) -> np.ndarray:
    spectrum = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(corr, axes=0), axis=0), axes=0)
    return hz / (2.0 * np.pi) * spectrum


def wigner_transform(
    state: WaveField,
    n_shifts: int | None = None,
    shift_half_range: float | None = None,
    *,
    check: bool = True,
) -> PhaseSpaceField:
    """Wigner transform W(x, xi) = (2 pi)^-1 int exp(-i xi z) C(x, z) dz."""
    g, eps = state.grid, state.eps
    m = check_power_of_two(n_shifts if n_shifts is not None else g.n_points, "n_shifts")
    half = 0.5 * g.half_width if shift_half_range is None else float(shift_half_range)
    if not 0.0 < half <= g.half_width:
        raise ValueError("shift_half_range must lie in (0, L]")
    corr = _autocorrelation(state, m, half)
    if check:
        peak = np.abs(corr).max()
        edge = max(np.abs(corr[0]).max(), np.abs(corr[1]).max(), np.abs(corr[-1]).max())
        if edge > ALIAS_TOL * peak:
            raise ValueError(
                f"autocorrelation not decayed at |s| = {half:.3g} (edge/peak = {edge / peak:.2e}); "
                "increase shift_half_range or L"
            )
    hz = 4.0 * half / (eps * m)
    spectrum = _z_to_xi(corr, hz).T
    scale = np.abs(spectrum).max()
    if np.abs(spectrum.imag).max() > 1e-10 * scale:
        raise ArithmeticError("Wigner transform has a non-negligible imaginary part")
    xi = (np.arange(m) - m // 2) * (2.0 * np.pi / (m * hz))
    W = np.ascontiguousarray(spectrum.real)
    if check:
        edge = max(np.abs(W[:, 0]).max(), np.abs(W[:, -1]).max())
        if edge > ALIAS_TOL * np.abs(W).max():
            raise ValueError(
                f"Wigner transform not decayed at |xi| = {abs(xi[0]):.3g}; increase n_shifts"
            )
    return PhaseSpaceField(g, xi, W, eps, "wigner", half)


def husimi_transform(W: PhaseSpaceField) -> PhaseSpaceField:
    """Separable convolution with gamma_eps in x and in xi, done spectrally.

    gamma_eps(x) = (pi eps)^{-1/2} exp(-x^2 / eps) has Fourier multiplier
    exp(-eps k^2 / 4); the xi-convolution multiplies the z-side by
    exp(-eps z^2 / 4).
    """
    if W.flavor != "wigner":
        raise ValueError("husimi_transform expects a Wigner field")
    eps, m = W.eps, W.xi.size
    hz = float(W.z[1] - W.z[0])
    # back to the z-side (shift index first)
    corr = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(W.values.T, axes=0), axis=0), axes=0) * (2.0 * np.pi / hz)
    corr *= np.exp(-0.25 * eps * W.z**2)[:, None]
    corr = np.fft.ifft(np.fft.fft(corr, axis=1) * np.exp(-0.25 * eps * W.grid.k**2)[None, :], axis=1)
    spectrum = _z_to_xi(corr, hz).T
    return PhaseSpaceField(W.grid, W.xi, np.ascontiguousarray(spectrum.real), eps, "husimi", W.shift_half_range)


def gaussian_smooth(values: np.ndarray, grid: Grid1D, eps: float, order: int = 0) -> np.ndarray:
    """values * d^order gamma_eps by spectral multiplication (periodic)."""
    mult = np.exp(-0.25 * eps * grid.k**2) * (1j * grid.k) ** order
    out = np.fft.ifft(np.fft.fft(values) * mult)
    return out.real if np.isrealobj(values) else out


@dataclass(frozen=True)
class MomentCheck:
    name: str
    lhs: float
    rhs: float
    discrepancy: float


def husimi_moments(WH: PhaseSpaceField, state: WaveField) -> dict[str, MomentCheck]:
    """Phase-space moments of the Husimi field against their closed forms in f.

    Pointwise identities report max_x |lhs - rhs| / max_x |rhs| (lhs/rhs
    fields hold the sup norms); integrated ones report relative error
    with respect to the natural scale of the identity.
    """
    if WH.flavor != "husimi":
        raise ValueError("husimi_moments expects a Husimi field")
    g, f, eps = state.grid, state.u, state.eps
    rho = np.abs(f) ** 2
    df = spectral_derivative(f, g, 1)
    flux = eps * np.imag(df * np.conj(f))
    mass = float(quadrature(rho, g))
    grad_sq = float(quadrature(np.abs(df) ** 2, g))
    x = g.x
    h, dxi = g.spacing, WH.dxi
    X, XI = np.meshgrid(x, WH.xi, indexing="ij")
    out: dict[str, MomentCheck] = {}

    smooth_rho = gaussian_smooth(rho, g, eps)

    def pointwise(name: str, lhs: np.ndarray, rhs: np.ndarray) -> None:
        # identities whose right side vanishes (real f) are measured on the density scale
        scale = max(np.abs(rhs).max(), eps * np.abs(smooth_rho).max())
        out[name] = MomentCheck(name, float(np.abs(lhs).max()), float(scale), float(np.abs(lhs - rhs).max() / scale))

    def integrated(name: str, lhs: float, rhs: float, scale: float) -> None:
        out[name] = MomentCheck(name, lhs, rhs, abs(lhs - rhs) / scale)

    pointwise("xi_marginal", WH.xi_marginal(), smooth_rho)
    pointwise(
        "xi_second_pointwise",
        WH.xi_marginal(lambda s: s**2),
        eps**2 * gaussian_smooth(np.abs(df) ** 2, g, eps)
        - 0.25 * eps**2 * gaussian_smooth(rho, g, eps, order=2)
        + 0.5 * eps * smooth_rho,
    )
    pointwise("xi_first_pointwise", WH.xi_marginal(lambda s: s), gaussian_smooth(flux, g, eps))
    second_rhs = eps**2 * grad_sq + 0.5 * eps * mass
    integrated("mass", WH.integrate(), mass, mass)
    integrated("xi_second", float(h * dxi * np.sum(XI**2 * WH.values)), second_rhs, second_rhs)
    first_rhs = float(quadrature(flux, g))
    integrated("xi_first", float(h * dxi * np.sum(XI * WH.values)), first_rhs, math.sqrt(mass * second_rhs))
    x2_rhs = float(quadrature(x**2 * rho, g)) + 0.5 * eps * mass
    integrated("x_second", float(h * dxi * np.sum(X**2 * WH.values)), x2_rhs, x2_rhs)
    return out


def wigner_at(state: WaveField, x: float, xi, n_z: int = 4096) -> np.ndarray:
    """Direct quadrature of the defining integral at one x and several xi."""
    g, eps = state.grid, state.eps
    zmax = 2.0 * g.half_width / eps
    z = np.linspace(-zmax, zmax, n_z, endpoint=False)
    fp = interpolate(state.u, g, x + 0.5 * eps * z)
    fm = interpolate(state.u, g, x - 0.5 * eps * z)
    corr = fp * np.conj(fm)
    dz = z[1] - z[0]
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return (dz / (2.0 * np.pi) * (np.exp(-1j * np.outer(xi, z)) @ corr)).real


def gaussian_test_family(
    width_x: float = 2.0, width_xi: float = 2.0, centers: Sequence[tuple[float, float]] = ((0.0, 0.0), (0.5, 0.5))
) -> list[TestFunction]:
    """Gaussian windows times low-degree monomials in (x, xi)."""
    family: list[TestFunction] = []
    for cx, cxi in centers:
        for px, pxi in ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1)):

            def phi(X, XI, cx=cx, cxi=cxi, px=px, pxi=pxi):
                win = np.exp(-0.5 * ((X - cx) / width_x) ** 2 - 0.5 * ((XI - cxi) / width_xi) ** 2)
                return win * (X - cx) ** px * (XI - cxi) ** pxi

            family.append(phi)
    return family


def monokinetic_gap(
    W: PhaseSpaceField,
    rho: Density,
    velocity: np.ndarray,
    test_functions: Sequence[TestFunction],
) -> float:
    """max over phi of |int int W phi - int rho(x) phi(x, v(x)) dx|."""
    if len(test_functions) == 0:
        raise ValueError("empty test family")
    if rho.grid != W.grid:
        raise ValueError("density and phase-space field live on different grids")
    x = W.grid.x
    v = np.asarray(velocity, dtype=float)
    gaps = [abs(W.integrate(phi) - float(quadrature(rho.values * phi(x, v), rho.grid))) for phi in test_functions]
    return max(gaps)
