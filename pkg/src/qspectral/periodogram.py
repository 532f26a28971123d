"""Quantile-regression and indicator periodogram kernels on the Fourier grid.

The central object is the complex kernel

    L(tau1, tau2, omega) = (n/4) * conj(beta(tau1)) * beta(tau2),

where beta(tau) = b1 + i*b2 collects the harmonic coefficients of the
check-loss fit at level tau, i.e.

    re = (n/4) * (b11*b21 + b12*b22),   im = (n/4) * (b11*b22 - b12*b21).

Modes select the series fed to the regression: ``raw`` uses the data as is,
``known-margin`` expects values already in [0, 1] (a known marginal applied
beforehand), ``rank`` replaces the series by normalized ranks first.  Two
non-regression estimators share the table format: ``clipped`` forms the
cross-periodogram (1/n) * conj(d(tau1, omega)) * d(tau2, omega) of the
indicator processes tau - 1{y_t <= q_tau} at empirical quantiles, and
``ordinary`` is the classical periodogram |sum y_t e^{i t omega}|^2 / n,
stored with a zero imaginary part.

Tables hold one row per quantile pair with tau1 <= tau2; the opposite order
is served as the complex conjugate.  Every mode computes per-(tau, omega)
ingredients exactly once and combines them pairwise, and each fit is
independent of the rest of the batch, so a table entry is bit-identical to
the same quantity recomputed alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import batch_harmonic_fits
from .series import (
    FourierGrid,
    empirical_quantile,
    fourier_frequencies,
    normalized_ranks,
    validate_series,
    validate_tau,
)

__all__ = [
    "MODES",
    "KernelValue",
    "PeriodogramTable",
    "periodogram_kernel",
    "clipped_periodogram",
    "ordinary_periodogram",
    "periodogram_table",
]

MODES = ("raw", "known-margin", "rank", "clipped", "ordinary")
_REGRESSION_MODES = ("raw", "known-margin", "rank")
_GRID_SNAP = 1e-9


@dataclass(frozen=True)
class KernelValue:
    """One complex periodogram value."""

    re: float
    im: float

    @property
    def as_complex(self) -> complex:
        return complex(self.re, self.im)


def _validate_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    return mode


def _prepare_series(y: np.ndarray, mode: str) -> np.ndarray:
    if mode == "rank":
        return normalized_ranks(y)
    if mode == "known-margin":
        if y.min() < 0.0 or y.max() > 1.0:
            raise ValueError(
                "known-margin mode expects values in [0, 1]; "
                f"got range [{y.min():g}, {y.max():g}]"
            )
    return y


def _grid_index(omega: float, n: int) -> int:
    """Index j with omega == 2*pi*j/n, or raise if omega is off the grid."""
    omega = float(omega)
    j = int(round(omega * n / (2.0 * np.pi)))
    if j < 1 or j > n // 2 or abs(omega - 2.0 * np.pi * j / n) > _GRID_SNAP:
        raise ValueError(
            f"omega={omega!r} is not a Fourier frequency of a length-{n} series"
        )
    return j


def _canonical_pairs(T: int):
    """Index pairs (i, k), i <= k, in lexicographic order."""
    idx1, idx2 = np.triu_indices(T)
    return idx1, idx2


def _combine_coefficients(b1, b2, quarter_n, idx1, idx2):
    """Pairwise Hermitian form of harmonic coefficients.

    ``b1``/``b2`` have one row per quantile level; rows ``idx1`` play tau1
    and rows ``idx2`` tau2.  On the diagonal the imaginary part cancels
    exactly, not just to rounding.
    """
    re = quarter_n * (b1[idx1] * b1[idx2] + b2[idx1] * b2[idx2])
    im = quarter_n * (b1[idx1] * b2[idx2] - b2[idx1] * b1[idx2])
    return re, im


def _clipped_transforms(y: np.ndarray, taus) -> np.ndarray:
    """Row per tau: FFT of the indicator process tau - 1{y <= q_tau}."""
    psi = np.empty((len(taus), y.size))
    for i, tau in enumerate(taus):
        psi[i] = tau - (y <= empirical_quantile(y, tau))
    return np.fft.fft(psi, axis=1)


def _combine_transforms(F, n, idx1, idx2, jsel):
    vals = F[idx1][:, jsel] * np.conj(F[idx2][:, jsel]) / n
    re = np.ascontiguousarray(vals.real)
    im = np.ascontiguousarray(vals.imag)
    # z * conj(z) is a modulus square; force the exact zero that FMA
    # contraction in the complex product can miss
    im[idx1 == idx2] = 0.0
    return re, im


@dataclass(frozen=True)
class PeriodogramTable:
    """Complex kernel values over quantile pairs and the Fourier grid.

    Storage covers pairs with tau1 <= tau2; ``value`` and ``pair_values``
    reconstruct the opposite order by conjugation.
    """

    taus: tuple
    grid: FourierGrid
    mode: str
    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        self.re.setflags(write=False)
        self.im.setflags(write=False)

    @property
    def n(self) -> int:
        return self.grid.n

    def pairs(self):
        """Canonical (tau1, tau2) pairs in storage order."""
        idx1, idx2 = _canonical_pairs(len(self.taus))
        return [(self.taus[i], self.taus[k]) for i, k in zip(idx1, idx2)]

    def _level(self, tau: float) -> int:
        tau = float(tau)
        try:
            return self.taus.index(tau)
        except ValueError:
            raise KeyError(f"tau={tau!r} is not a level of this table") from None

    def _slot(self, tau1: float, tau2: float):
        i, k = self._level(tau1), self._level(tau2)
        flip = i > k
        if flip:
            i, k = k, i
        T = len(self.taus)
        # row-major upper-triangle offset
        slot = i * T - i * (i - 1) // 2 + (k - i)
        return slot, flip

    def pair_values(self, tau1: float, tau2: float) -> np.ndarray:
        """Complex values over the whole grid for one ordered pair."""
        slot, flip = self._slot(tau1, tau2)
        vals = self.re[slot] + 1j * self.im[slot]
        return np.conj(vals) if flip else vals

    def value(self, tau1: float, tau2: float, omega: float) -> KernelValue:
        slot, flip = self._slot(tau1, tau2)
        j = _grid_index(omega, self.grid.n)
        re = float(self.re[slot, j - 1])
        im = float(self.im[slot, j - 1])
        return KernelValue(re=re, im=-im if flip else im)


def _validate_taus(taus) -> tuple:
    taus = [validate_tau(t) for t in taus]
    if not taus:
        raise ValueError("need at least one quantile level")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("quantile levels must be sorted and distinct")
    return tuple(taus)


def periodogram_table(s, taus, mode: str = "rank") -> PeriodogramTable:
    """Kernel values for all pairs from ``taus`` at every grid frequency."""
    mode = _validate_mode(mode)
    y = validate_series(s, min_length=4)
    taus = _validate_taus(taus)
    n = y.size
    grid = fourier_frequencies(n)
    freqs = grid.frequencies
    J = freqs.size
    T = len(taus)
    idx1, idx2 = _canonical_pairs(T)

    if mode == "ordinary":
        F = np.fft.fft(y)
        vals = (F[1 : J + 1].real ** 2 + F[1 : J + 1].imag ** 2) / n
        re = np.broadcast_to(vals, (idx1.size, J)).copy()
        im = np.zeros((idx1.size, J))
        return PeriodogramTable(taus=taus, grid=grid, mode=mode, re=re, im=im)

    if mode == "clipped":
        F = _clipped_transforms(y, taus)
        re, im = _combine_transforms(F, n, idx1, idx2, np.arange(1, J + 1))
        return PeriodogramTable(taus=taus, grid=grid, mode=mode, re=re, im=im)

    z = _prepare_series(y, mode)
    # one regression per (tau, omega), tau-major ordering
    row_taus = np.repeat(taus, J)
    row_omegas = np.tile(freqs, T)
    fits = batch_harmonic_fits(z, row_taus, row_omegas)
    b1 = fits.b1.reshape(T, J)
    b2 = fits.b2.reshape(T, J)
    re, im = _combine_coefficients(b1, b2, n / 4.0, idx1, idx2)
    return PeriodogramTable(taus=taus, grid=grid, mode=mode, re=re, im=im)


def periodogram_kernel(s, mode: str, tau1: float, tau2: float,
                       omega: float) -> KernelValue:
    """One kernel value at (tau1, tau2, omega); omega must lie on the grid.

    ``clipped`` and ``ordinary`` delegate to their dedicated estimators;
    ``ordinary`` ignores the quantile levels.
    """
    mode = _validate_mode(mode)
    y = validate_series(s, min_length=4)
    if mode == "ordinary":
        return KernelValue(re=ordinary_periodogram(y, omega), im=0.0)
    if mode == "clipped":
        return clipped_periodogram(y, tau1, tau2, omega)

    tau1 = validate_tau(tau1)
    tau2 = validate_tau(tau2)
    n = y.size
    j = _grid_index(omega, n)
    w = 2.0 * np.pi * j / n
    z = _prepare_series(y, mode)
    if tau1 == tau2:
        fits = batch_harmonic_fits(z, tau1, [w])
        b1 = fits.b1[[0, 0]]
        b2 = fits.b2[[0, 0]]
    else:
        fits = batch_harmonic_fits(z, [tau1, tau2], [w, w])
        b1, b2 = fits.b1, fits.b2
    re, im = _combine_coefficients(
        b1, b2, n / 4.0, np.array([0]), np.array([1])
    )
    return KernelValue(re=float(re[0]), im=float(im[0]))


def clipped_periodogram(s, tau1: float, tau2: float, omega: float) -> KernelValue:
    """Indicator cross-periodogram at empirical quantiles."""
    y = validate_series(s, min_length=2)
    tau1 = validate_tau(tau1)
    tau2 = validate_tau(tau2)
    j = _grid_index(omega, y.size)
    if tau1 == tau2:
        F = _clipped_transforms(y, (tau1,))
        idx1, idx2 = np.array([0]), np.array([0])
    else:
        F = _clipped_transforms(y, (tau1, tau2))
        idx1, idx2 = np.array([0]), np.array([1])
    re, im = _combine_transforms(F, y.size, idx1, idx2, np.array([j]))
    return KernelValue(re=float(re[0, 0]), im=float(im[0, 0]))


def ordinary_periodogram(s, omega: float) -> float:
    """Classical periodogram |sum_t y_t e^{i t omega}|^2 / n on the grid."""
    y = validate_series(s, min_length=2)
    j = _grid_index(omega, y.size)
    F = np.fft.fft(y)
    return float((F[j].real ** 2 + F[j].imag ** 2) / y.size)
