"""Small input-validation helpers shared by the numerical modules."""

from __future__ import annotations

import numbers

import numpy as np


def check_positive(value: float, name: str, *, strict: bool = True) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_finite(values, name: str = "values", *, complex_ok: bool = True) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object:
        raise TypeError(f"{name} must be numeric")
    if np.iscomplexobj(arr) and not complex_ok:
        raise TypeError(f"{name} must be real-valued")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_on_grid(values, grid, name: str = "values", *, complex_ok: bool = True) -> np.ndarray:
    arr = check_finite(values, name, complex_ok=complex_ok)
    if arr.shape != (grid.n_points,):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({grid.n_points},)")
    return arr


def check_power_of_two(n: int, name: str, minimum: int = 8) -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < minimum or n & (n - 1):
        raise ValueError(f"{name} must be a power of two >= {minimum}, got {n}")
    return n


def check_same_grid(a, b) -> None:
    if a != b:
        raise ValueError("operands live on different grids")
