"""Weighted-L1 harmonic regression via a primal-dual interior-point method.

Fitting minimizes the asymmetric absolute ("check") loss

    sum_t check_loss(y_t - x_t' beta, tau)

over the coefficients of a small dense design.  The equivalent linear
program is attacked in its bounded dual form

    max  y'a    s.t.  X'a = (1 - tau) * X'1,    0 <= a <= 1,

with a Mehrotra predictor-corrector iteration; the multipliers of the
equality constraints are exactly the regression coefficients.  After the
interior iteration converges, a crossover step replaces the iterate by the
best exactly-interpolating vertex built from the observations with the
smallest residuals.  The crossover restores the classical property that at
least p residuals vanish at an optimum and makes fits location/scale
equivariant down to rounding error.

The numeric core lives in ``_kernels`` (compiled per-problem loops).  Each
problem is solved independently, so a fit never depends on what else is in
the batch: a single fit is bit-identical to the same row inside a larger
sweep.  Designs here never exceed three columns (intercept, cosine, sine);
general quantile regression is out of scope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .series import validate_series, validate_tau

__all__ = [
    "QuantileFit",
    "HarmonicQuantileFit",
    "HarmonicFitBatch",
    "ConvergenceError",
    "DegenerateDesignError",
    "quantile_fit",
    "harmonic_design",
    "harmonic_quantile_fit",
    "batch_harmonic_fits",
    "harmonic_ols_fit",
    "knight_gap",
]

GAP_TOL = _kernels.GAP_TOL          # relative duality-gap stopping rule
FEAS_TOL = _kernels.FEAS_TOL        # relative tolerance on the dual equality
ZERO_RESIDUAL_REL = _kernels.ZERO_RESIDUAL_REL
CERT_SLACK_PER_OBS = 1e-6           # subgradient certificate slack per observation
MAX_ITER = 200
_PI_SNAP = _kernels.PI_SNAP         # |omega - pi| below this uses the reduced design
_POLISH_POOL = 3                    # candidate pool size is p plus this many


class DegenerateDesignError(ValueError):
    """Design matrix is (numerically) rank deficient."""


class ConvergenceError(RuntimeError):
    """Iteration cap hit before reaching tolerance; carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class QuantileFit:
    """Check-loss fit for an explicit (at most three-column) design."""

    coef: np.ndarray
    objective: float
    zero_residual_count: int
    subgradient_gap: float
    iterations: int


@dataclass(frozen=True)
class HarmonicQuantileFit:
    """Check-loss fit of y_t on (1, cos(omega t), sin(omega t))."""

    a: float
    b: tuple
    objective: float
    zero_residual_count: int
    subgradient_gap: float


@dataclass(frozen=True)
class HarmonicFitBatch:
    """Vectorized harmonic fits, one row per (series row, frequency)."""

    omegas: np.ndarray
    a: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    objective: np.ndarray
    zero_residual_count: np.ndarray
    subgradient_gap: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    def single(self, i: int = 0) -> HarmonicQuantileFit:
        return HarmonicQuantileFit(
            a=float(self.a[i]),
            b=(float(self.b1[i]), float(self.b2[i])),
            objective=float(self.objective[i]),
            zero_residual_count=int(self.zero_residual_count[i]),
            subgradient_gap=float(self.subgradient_gap[i]),
        )


@lru_cache(maxsize=None)
def _subsets(k: int, p: int) -> np.ndarray:
    """All p-subsets of range(k) in lexicographic order, as an array."""
    arr = np.array(list(itertools.combinations(range(k), p)), dtype=np.int64)
    arr = arr.reshape(-1, p)
    arr.setflags(write=False)
    return arr


def _subset_pair(n: int):
    s3 = _subsets(min(n, 3 + _POLISH_POOL), 3)
    s2 = _subsets(min(n, 2 + _POLISH_POOL), 2)
    return s3, s2


def _raise_degenerate(status: np.ndarray) -> None:
    bad = np.flatnonzero(status != _kernels.STATUS_OK)
    if bad.size:
        raise DegenerateDesignError(
            f"design matrix is rank deficient for batch rows {bad[:5].tolist()}"
        )


def quantile_fit(X, y, tau: float, max_iter: int = MAX_ITER) -> QuantileFit:
    """Minimize the check loss of y - X beta over beta.

    Supports up to three columns, which covers the harmonic design and its
    location-only reduction.
    """
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"design must be 2-D, got shape {X.shape}")
    p = X.shape[1]
    if not 1 <= p <= 3:
        raise ValueError(f"design must have 1 to 3 columns, got {p}")
    y = validate_series(y, min_length=p)
    if X.shape[0] != y.size:
        raise ValueError("design and response lengths differ")
    tau = validate_tau(tau)

    beta, obj, zc, gap, iters, conv, status = _kernels.fit_design(
        X, y, tau, int(max_iter), _subsets(min(y.size, p + _POLISH_POOL), p)
    )
    _raise_degenerate(np.array([status]))
    fit = QuantileFit(
        coef=beta.copy(),
        objective=float(obj),
        zero_residual_count=int(zc),
        subgradient_gap=float(gap),
        iterations=int(iters),
    )
    if not conv:
        raise ConvergenceError(
            f"no convergence within {max_iter} iterations", best=fit
        )
    return fit


def harmonic_design(n: int, omega: float) -> np.ndarray:
    """Design (1, cos(omega t), sin(omega t)), t = 1..n; at omega = pi the
    sine column is identically zero and is dropped."""
    n = int(n)
    omega = float(omega)
    if not (0.0 < omega <= np.pi + _PI_SNAP):
        raise ValueError(f"frequency must lie in (0, pi], got {omega}")
    t = np.arange(1, n + 1, dtype=float)
    if abs(omega - np.pi) <= _PI_SNAP:
        return np.column_stack([np.ones(n), np.cos(np.pi * t)])
    return np.column_stack([np.ones(n), np.cos(omega * t), np.sin(omega * t)])


def batch_harmonic_fits(ys, tau, omegas, max_iter: int = MAX_ITER) -> HarmonicFitBatch:
    """Harmonic quantile fits over many (series, tau, frequency) rows.

    ``ys`` is a single series (shape (n,)) shared by all rows, or a stack of
    series (shape (F, n)) paired elementwise with ``omegas`` (which may then
    be a scalar).  ``tau`` is a scalar applied to every row or a vector with
    one level per row.  Frequencies equal to pi are fitted with the reduced
    two-parameter design and reported with b2 = 0.
    """
    ys = np.ascontiguousarray(ys, dtype=float)
    single_series = ys.ndim == 1
    if single_series:
        validate_series(ys, min_length=4)
        n = ys.size
    else:
        if ys.ndim != 2:
            raise ValueError(f"series stack must be 1-D or 2-D, got {ys.shape}")
        n = ys.shape[1]
        if n < 4:
            raise ValueError(f"series needs at least 4 observations, got {n}")
        if not np.all(np.isfinite(ys)):
            raise ValueError("series contains NaN or infinite values")

    omegas = np.atleast_1d(np.ascontiguousarray(omegas, dtype=float))
    F = omegas.size if single_series else ys.shape[0]
    if omegas.size == 1:
        omegas = np.full(F, omegas[0])
    if omegas.size != F:
        raise ValueError("frequency count does not match series count")
    if np.any(omegas <= 0.0) or np.any(omegas > np.pi + _PI_SNAP):
        raise ValueError("frequencies must lie in (0, pi]")

    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if taus.size == 1:
        taus = np.full(F, validate_tau(taus[0]))
    elif taus.size == F:
        taus = np.array([validate_tau(t) for t in taus])
    else:
        raise ValueError("tau count does not match row count")

    s3, s2 = _subset_pair(n)
    if single_series:
        out = _kernels.fit_grid(ys, taus, omegas, int(max_iter), s3, s2)
    else:
        out = _kernels.fit_rows(ys, taus, omegas, int(max_iter), s3, s2)
    beta, objective, zero_count, gap, iterations, converged, status = out
    _raise_degenerate(status)

    return HarmonicFitBatch(
        omegas=omegas,
        a=beta[:, 0].copy(),
        b1=beta[:, 1].copy(),
        b2=beta[:, 2].copy(),
        objective=objective,
        zero_residual_count=zero_count,
        subgradient_gap=gap,
        iterations=iterations,
        converged=converged,
    )


def harmonic_quantile_fit(y, tau: float, omega: float,
                          max_iter: int = MAX_ITER) -> HarmonicQuantileFit:
    """Fit y_t on (1, cos(omega t), sin(omega t)) under the check loss."""
    batch = batch_harmonic_fits(y, tau, [float(omega)], max_iter=max_iter)
    fit = batch.single(0)
    if not batch.converged[0]:
        raise ConvergenceError(
            f"no convergence within {max_iter} iterations at omega={omega}", best=fit
        )
    return fit


def harmonic_ols_fit(y, omega: float):
    """Least-squares counterpart of harmonic_quantile_fit.

    Solved through the normal equations; at interior Fourier frequencies of
    a length-n series this reduces to a = mean(y), b = (2/n) * (sum y cos,
    sum y sin).
    """
    y = validate_series(y, min_length=4)
    X = harmonic_design(y.size, omega)
    p = X.shape[1]
    gram = X.T @ X
    det = np.linalg.det(gram)
    scale = (np.trace(gram) / p) ** p
    if abs(det) <= 1e-12 * max(scale, 1e-300):
        raise DegenerateDesignError("harmonic design is rank deficient")
    beta = np.linalg.solve(gram, X.T @ y)
    if beta.size == 2:
        return float(beta[0]), (float(beta[1]), 0.0)
    return float(beta[0]), (float(beta[1]), float(beta[2]))


def knight_gap(u: float, v: float, tau: float) -> float:
    """Deviation from the check-loss difference identity

        check_loss(u - v, tau) - check_loss(u, tau)
            = -v * (tau - 1{u <= 0}) + integral_0^v (1{u <= s} - 1{u <= 0}) ds,

    with the integral in closed form.  Identically zero up to rounding.
    """
    u = float(u)
    v = float(v)
    tau = validate_tau(tau)
    lhs = (u - v) * (tau - ((u - v) <= 0.0)) - u * (tau - (u <= 0.0))
    integral = max(0.0, v - u) if u > 0.0 else max(0.0, u - v)
    rhs = -v * (tau - (u <= 0.0)) + integral
    return lhs - rhs
