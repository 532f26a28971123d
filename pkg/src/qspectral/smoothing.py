"""Daniell-kernel smoothing of periodogram tables.

Weights come from convolving discrete uniform kernels, one per span m with
2m+1 equal entries.  The convolution is carried out in exact integer
arithmetic and divided out at the end, so W(k) == W(-k) holds bitwise and
the unit sum is exact to rounding.

Smoothing averages the table across neighbouring Fourier frequencies:

    smoothed(omega_j) = sum_{|k| <= N} W(k) * L(omega_{j+k}).

Out-of-range indices are resolved by the frequency symmetry of the kernel,
L(omega_{-j}) = conj(L(omega_j)), together with 2*pi periodicity.  The one
index those rules cannot reach is omega = 0, which the grid excludes; there
the real part of the first grid value stands in.  All three rules map
diagonal values to real nonnegative diagonal values, so smoothed tables
inherit the Hermitian pair symmetry and diagonal nonnegativity of their
input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .periodogram import KernelValue, PeriodogramTable
from .series import nearest_fourier_index

__all__ = [
    "WeightSequence",
    "SmoothedTable",
    "daniell_weights",
    "smooth_table",
    "smooth_at",
]


@dataclass(frozen=True)
class WeightSequence:
    """Symmetric positive weights W(k), |k| <= half_width, summing to one."""

    half_width: int
    weights: np.ndarray  # length 2*half_width + 1; W(k) at index k + half_width

    def __post_init__(self):
        self.weights.setflags(write=False)

    def weight(self, k: int) -> float:
        if abs(k) > self.half_width:
            return 0.0
        return float(self.weights[k + self.half_width])

    @property
    def sum_squares(self) -> float:
        """Sum of squared weights, the variance proxy of the smoother."""
        return float(np.sum(self.weights * self.weights))


@dataclass(frozen=True)
class SmoothedTable(PeriodogramTable):
    """A periodogram table averaged over frequencies; keeps its weights."""

    weights: WeightSequence = None


def daniell_weights(spans) -> WeightSequence:
    """Convolution of uniform kernels with half-widths ``spans``."""
    spans = list(spans)
    if not spans:
        raise ValueError("spans must be a non-empty list of positive integers")
    numer = np.array([1], dtype=object)
    denom = 1
    for m in spans:
        if int(m) != m or m < 1:
            raise ValueError(f"spans must be positive integers, got {m!r}")
        m = int(m)
        numer = np.convolve(numer, np.ones(2 * m + 1, dtype=object))
        denom *= 2 * m + 1
    weights = np.array([v / denom for v in numer], dtype=float)
    return WeightSequence(half_width=(weights.size - 1) // 2, weights=weights)


def _extension(m: np.ndarray, n: int, J: int):
    """Source column, conjugation sign, and zero-substitute mask for
    extended frequency indices ``m`` (any integers)."""
    r = m % n
    zero = r == 0
    flip = r > J
    src = np.where(zero, 1, np.where(flip, n - r, r)) - 1
    sign = np.where(flip, -1.0, 1.0)
    return src, sign, zero


def smooth_table(table: PeriodogramTable, weights: WeightSequence) -> SmoothedTable:
    """Weighted average of the table over neighbouring grid frequencies."""
    J = len(table.grid)
    n = table.grid.n
    N = weights.half_width
    if N >= J:
        raise ValueError(
            f"window half-width {N} needs at least {N + 1} grid frequencies, "
            f"got {J}"
        )
    out_re = np.zeros_like(table.re)
    out_im = np.zeros_like(table.im)
    j_base = np.arange(1, J + 1)
    # fixed ascending-k order keeps the reduction deterministic
    for k in range(-N, N + 1):
        w = weights.weights[k + N]
        src, sign, zero = _extension(j_base + k, n, J)
        re_k = table.re[:, src]
        im_k = table.im[:, src] * sign
        im_k[:, zero] = 0.0
        out_re += w * re_k
        out_im += w * im_k
    return SmoothedTable(
        taus=table.taus,
        grid=table.grid,
        mode=table.mode,
        re=out_re,
        im=out_im,
        weights=weights,
    )


def smooth_at(table: SmoothedTable, omega: float):
    """Smoothed values at the grid frequency nearest to omega in (0, pi).

    Returns a dict mapping each stored (tau1, tau2) pair to a KernelValue.
    """
    omega = float(omega)
    if not (0.0 < omega < np.pi):
        raise ValueError(f"evaluation frequency must lie in (0, pi), got {omega}")
    n = table.grid.n
    j = nearest_fourier_index(omega, n)
    w = 2.0 * np.pi * j / n
    return {
        (t1, t2): table.value(t1, t2, w) for (t1, t2) in table.pairs()
    }
