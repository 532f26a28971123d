"""Estimator-style wrappers around the table pipeline.

These follow the scikit-learn conventions (constructor holds parameters,
``fit`` learns from data, ``get_params``/``set_params``/``clone`` work) so
the pipeline can sit next to other estimators in model-selection code.
They add no functionality over ``periodogram_table`` and ``smooth_table``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .periodogram import MODES, PeriodogramTable, periodogram_table
from .series import validate_series
from .smoothing import daniell_weights, smooth_table

__all__ = ["QuantilePeriodogram", "DaniellSmoother"]

_DEFAULT_TAUS = (0.05, 0.25, 0.5, 0.75, 0.95)


def _as_series(X) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    return validate_series(arr)


def _check_fitted(obj, attr: str) -> None:
    if not hasattr(obj, attr):
        raise NotFittedError(
            f"{type(obj).__name__} is not fitted yet; call fit() first"
        )


class QuantilePeriodogram(BaseEstimator):
    """Periodogram kernel table over a quantile grid.

    Parameters
    ----------
    taus : sequence of floats in (0, 1)
        Quantile grid; the table holds every ordered pair.
    mode : one of ``MODES``
        Estimator variant; "rank" applies the rank transform first, making
        the result invariant to monotone changes of the marginal.

    ``fit(X)`` computes the table for the series ``X`` (1-d, or a single
    column) and stores it as ``table_``.  ``transform(X)`` returns the
    complex kernel matrix, one row per quantile pair, one column per
    positive Fourier frequency.
    """

    def __init__(self, taus=_DEFAULT_TAUS, mode: str = "rank"):
        self.taus = taus
        self.mode = mode

    def fit(self, X, y=None):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        s = _as_series(X)
        self.table_ = periodogram_table(s, self.taus, mode=self.mode)
        self.n_samples_ = len(s)
        self.frequencies_ = np.asarray(self.table_.grid.frequencies)
        return self

    def transform(self, X) -> np.ndarray:
        _check_fitted(self, "table_")
        tab = periodogram_table(_as_series(X), self.taus, mode=self.mode)
        return tab.re + 1j * tab.im

    def fit_transform(self, X, y=None) -> np.ndarray:
        self.fit(X)
        return self.table_.re + 1j * self.table_.im

    def pairs(self):
        _check_fitted(self, "table_")
        return self.table_.pairs()


class DaniellSmoother(TransformerMixin, BaseEstimator):
    """Repeated Daniell smoothing of a periodogram table.

    ``transform(X)`` takes a ``PeriodogramTable`` and returns the smoothed
    table; the weight sequence is built once in ``fit`` from ``spans``.
    """

    def __init__(self, spans=(10, 4)):
        self.spans = spans

    def fit(self, X=None, y=None):
        self.weights_ = daniell_weights(self.spans)
        return self

    def transform(self, X):
        _check_fitted(self, "weights_")
        if not isinstance(X, PeriodogramTable):
            raise TypeError(
                f"expected a PeriodogramTable, got {type(X).__name__}"
            )
        return smooth_table(X, self.weights_)
