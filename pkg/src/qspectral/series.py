"""Core series utilities: validation, ranks, quantiles, check loss, Fourier grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FourierGrid",
    "validate_series",
    "validate_tau",
    "normalized_ranks",
    "empirical_quantile",
    "check_loss",
    "fourier_frequencies",
    "nearest_fourier",
    "nearest_fourier_index",
]

# Guard against representation error in n*tau when tau is a decimal literal
# (e.g. 0.07 * 100 = 7.000000000000001 must still count as 7).
_CEIL_EPS = 1e-9


def validate_series(values, min_length: int = 1) -> np.ndarray:
    """Coerce to a 1-D float64 array of finite values, or raise ValueError."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"series needs at least {min_length} observations, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains NaN or infinite values")
    return arr


def validate_tau(tau: float) -> float:
    tau = float(tau)
    if not (0.0 < tau < 1.0) or not math.isfinite(tau):
        raise ValueError(f"quantile level must lie strictly inside (0, 1), got {tau}")
    return tau


def normalized_ranks(values) -> np.ndarray:
    """Map a series to its normalized ranks R_t / n in (0, 1].

    Ties are broken by original position (stable order), so the result is
    always a permutation of {1/n, 2/n, ..., 1} and is exactly invariant
    under strictly increasing transforms of tie-free data.
    """
    arr = validate_series(values, min_length=1)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=float)
    ranks[order] = np.arange(1, arr.size + 1, dtype=float)
    return ranks / arr.size


def empirical_quantile(values, tau: float) -> float:
    """Left-continuous empirical quantile: smallest t with F_n(t) >= tau.

    Always returns an element of the input, namely the ceil(n*tau)-th
    order statistic.
    """
    arr = validate_series(values, min_length=1)
    tau = validate_tau(tau)
    j = int(math.ceil(arr.size * tau - _CEIL_EPS))
    j = min(max(j, 1), arr.size)
    return float(np.partition(arr, j - 1)[j - 1])


def check_loss(x, tau: float):
    """Asymmetric absolute loss x * (tau - 1{x <= 0}).

    Nonnegative, zero only at x = 0, and equal to |x|/2 at tau = 1/2.
    Accepts scalars or arrays.
    """
    tau = validate_tau(tau)
    x = np.asarray(x, dtype=float)
    out = x * (tau - (x <= 0.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FourierGrid:
    """Positive Fourier frequencies 2*pi*j/n for j = 1..floor(n/2)."""

    n: int
    frequencies: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.frequencies.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.frequencies.size + 1)


def fourier_frequencies(n: int) -> FourierGrid:
    """Fourier grid of a length-n series; all frequencies lie in (0, pi]."""
    n = int(n)
    if n < 2:
        raise ValueError(f"need n >= 2 for a nonempty Fourier grid, got {n}")
    j = np.arange(1, n // 2 + 1, dtype=float)
    return FourierGrid(n=n, frequencies=2.0 * np.pi * j / n)


def nearest_fourier_index(omega: float, n: int) -> int:
    """Index j of the grid frequency closest to omega; exact ties round up."""
    omega = float(omega)
    if not (0.0 < omega <= np.pi + 1e-12):
        raise ValueError(f"frequency must lie in (0, pi], got {omega}")
    half = int(n) // 2
    if half < 1:
        raise ValueError(f"need n >= 2 for a nonempty Fourier grid, got {n}")
    # floor(x + 1/2) rounds halves toward the larger frequency
    j = int(math.floor(omega * n / (2.0 * np.pi) + 0.5))
    return min(max(j, 1), half)


def nearest_fourier(omega: float, n: int) -> float:
    """Grid frequency closest to omega (ties resolved to the larger one)."""
    j = nearest_fourier_index(omega, n)
    return 2.0 * np.pi * j / int(n)
