"""Ground-truth quantile cross-covariances and spectral density kernels.

For a stationary series with marginal CDF F and U_t = F(Y_t), the lag-k
cross-covariance at levels (tau1, tau2) is

    gamma_k(tau1, tau2) = Cov(1{U_t <= tau1}, 1{U_{t-k} <= tau2}),

and its Fourier transform over lags (truncated at lag cap K here) is the
spectral density kernel

    f(tau1, tau2, omega) = (1/2pi) * sum_{|k| <= K} gamma_k e^{-ik omega}.

Two sources produce the cross-covariances: an exact route for Gaussian
AR(1), where gamma_k = Phi2(q1, q2; theta^|k|) - tau1*tau2 through the
bivariate normal CDF, and a Monte-Carlo route that computes empirical
indicator covariances from one long simulated path (with batch-means
standard errors).  Negative lags are filled from the stationarity identity
gamma_{-k}(tau1, tau2) = gamma_k(tau2, tau1).

The scaled kernel divides by the marginal densities at the two quantiles;
closed forms cover the Gaussian and Cauchy AR(1) marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import cauchy, norm

from .series import empirical_quantile, validate_tau
from .simulate import Ar1Spec, simulate_ar1

__all__ = [
    "MODELS",
    "CopulaCrossCovTable",
    "SpectralTruth",
    "bvn_orthant",
    "bvn_cdf",
    "copula_crosscov",
    "copula_crosscov_table",
    "copula_sdk",
    "copula_sdk_grid",
    "marginal_density_at_quantile",
    "scaled_sdk",
    "spectral_truth",
]

MODELS = ("gaussian-ar1", "cauchy-ar1")
_SOURCES = ("gaussian-ar1-exact", "monte-carlo")
DEFAULT_LAG_CAP = 50
_MC_BLOCKS = 50


def bvn_orthant(rho: float) -> float:
    """P(Z1 <= 0, Z2 <= 0) for standard bivariate normals, correlation rho."""
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    return 0.25 + math.asin(rho) / (2.0 * math.pi)


def _bvn_integrand(theta: float, h: float, k: float) -> float:
    c = math.cos(theta)
    return math.exp(-(h * h + k * k - 2.0 * h * k * math.sin(theta)) / (2.0 * c * c))


def bvn_cdf(h: float, k: float, rho: float) -> float:
    """P(Z1 <= h, Z2 <= k) via the one-dimensional arcsine-form quadrature

        Phi(h)Phi(k) + (1/2pi) * int_0^{asin rho} exp(-(h^2 + k^2
            - 2hk sin t) / (2 cos^2 t)) dt.

    Perfectly correlated cases use their analytic limits.
    """
    h = float(h)
    k = float(k)
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if rho == 1.0:
        return float(norm.cdf(min(h, k)))
    if rho == -1.0:
        return float(max(0.0, norm.cdf(h) + norm.cdf(k) - 1.0))
    base = float(norm.cdf(h) * norm.cdf(k))
    if rho == 0.0:
        return base
    integral, _ = quad(
        _bvn_integrand, 0.0, math.asin(rho), args=(h, k),
        epsabs=1e-14, epsrel=1e-12, limit=200,
    )
    return base + integral / (2.0 * math.pi)


def _gaussian_ar1_crosscov(theta: float, k: int, tau1: float, tau2: float) -> float:
    rho = float(theta) ** abs(int(k))
    q1 = float(norm.ppf(tau1))
    q2 = float(norm.ppf(tau2))
    return bvn_cdf(q1, q2, rho) - tau1 * tau2


def _validate_theta(theta: float) -> float:
    theta = float(theta)
    if not abs(theta) < 1.0:
        raise ValueError(f"need |theta| < 1, got {theta}")
    return theta


@dataclass(frozen=True)
class CopulaCrossCovTable:
    """gamma_k(tau1, tau2) for |k| <= K; ``se`` is None for exact sources."""

    taus: tuple
    lag_cap: int
    gamma: np.ndarray          # shape (2K+1, T, T); lag k at index k + K
    se: np.ndarray | None
    source: str

    def __post_init__(self):
        self.gamma.setflags(write=False)
        if self.se is not None:
            self.se.setflags(write=False)

    def _index(self, k: int, tau1: float, tau2: float):
        if abs(k) > self.lag_cap:
            raise KeyError(f"lag {k} exceeds the table cap {self.lag_cap}")
        try:
            i = self.taus.index(float(tau1))
            j = self.taus.index(float(tau2))
        except ValueError:
            raise KeyError(f"({tau1}, {tau2}) not in table levels {self.taus}") from None
        return k + self.lag_cap, i, j

    def value(self, k: int, tau1: float, tau2: float) -> float:
        a, i, j = self._index(k, tau1, tau2)
        return float(self.gamma[a, i, j])

    def se_value(self, k: int, tau1: float, tau2: float) -> float:
        if self.se is None:
            return 0.0
        a, i, j = self._index(k, tau1, tau2)
        return float(self.se[a, i, j])


def _mc_indicator_table(y: np.ndarray, taus, lag_cap: int):
    """Empirical indicator cross-covariances and batch-means errors."""
    L = y.size
    if L < 10 * lag_cap:
        raise ValueError(
            f"Monte-Carlo path of length {L} is too short for lag {lag_cap}; "
            f"need at least {10 * lag_cap}"
        )
    T = len(taus)
    qs = np.array([empirical_quantile(y, t) for t in taus])
    ind = (y[None, :] <= qs[:, None]).astype(float)
    gamma = np.empty((2 * lag_cap + 1, T, T))
    se = np.empty_like(gamma)
    for k in range(lag_cap + 1):
        a = ind[:, k:]          # rows: tau1 indicator at time t
        b = ind[:, : L - k]     # rows: tau2 indicator at time t - k
        m = a.shape[1]
        cov = (a @ b.T) / m - np.outer(a.mean(axis=1), b.mean(axis=1))
        # batch means over contiguous blocks
        nb = _MC_BLOCKS
        cut = (m // nb) * nb
        ab = a[:, :cut].reshape(T, nb, -1)
        bb = b[:, :cut].reshape(T, nb, -1)
        blk = np.einsum("inm,jnm->nij", ab, bb) / ab.shape[2] - np.einsum(
            "in,jn->nij", ab.mean(axis=2), bb.mean(axis=2)
        )
        sek = blk.std(axis=0, ddof=1) / math.sqrt(nb)
        gamma[lag_cap + k] = cov
        se[lag_cap + k] = sek
        if k:
            gamma[lag_cap - k] = cov.T
            se[lag_cap - k] = sek.T
    return gamma, se


def copula_crosscov_table(taus, lag_cap: int = DEFAULT_LAG_CAP, *,
                          source: str, params: dict) -> CopulaCrossCovTable:
    """Cross-covariances for all pairs from ``taus`` and lags |k| <= lag_cap.

    ``source`` is ``gaussian-ar1-exact`` (params: theta) or ``monte-carlo``
    (params: either a precomputed ``series``, or ``simulate``/``length``/
    ``seed`` where ``simulate(length, seed)`` yields the path).
    """
    if source not in _SOURCES:
        raise ValueError(f"unknown source {source!r}; choose from {_SOURCES}")
    taus = tuple(validate_tau(t) for t in taus)
    lag_cap = int(lag_cap)
    if lag_cap < 0:
        raise ValueError(f"lag cap must be non-negative, got {lag_cap}")
    T = len(taus)

    if source == "gaussian-ar1-exact":
        theta = _validate_theta(params["theta"])
        qs = norm.ppf(taus)
        gamma = np.empty((2 * lag_cap + 1, T, T))
        for k in range(lag_cap + 1):
            rho = theta ** k
            for i in range(T):
                for j in range(i, T):
                    v = bvn_cdf(qs[i], qs[j], rho) - taus[i] * taus[j]
                    gamma[lag_cap + k, i, j] = v
                    gamma[lag_cap + k, j, i] = v
            if k:
                gamma[lag_cap - k] = gamma[lag_cap + k].T
        return CopulaCrossCovTable(
            taus=taus, lag_cap=lag_cap, gamma=gamma, se=None, source=source
        )

    if "series" in params:
        y = np.asarray(params["series"], dtype=float)
    else:
        y = np.asarray(params["simulate"](params["length"], params["seed"]), dtype=float)
    gamma, se = _mc_indicator_table(y, taus, lag_cap)
    return CopulaCrossCovTable(
        taus=taus, lag_cap=lag_cap, gamma=gamma, se=se, source=source
    )


def copula_crosscov(source: str, params: dict, k: int, tau1: float,
                    tau2: float) -> float:
    """One cross-covariance value; see copula_crosscov_table for sources."""
    tau1 = validate_tau(tau1)
    tau2 = validate_tau(tau2)
    if source == "gaussian-ar1-exact":
        theta = _validate_theta(params["theta"])
        return _gaussian_ar1_crosscov(theta, k, tau1, tau2)
    taus = (tau1,) if tau1 == tau2 else tuple(sorted((tau1, tau2)))
    table = copula_crosscov_table(taus, abs(int(k)), source=source, params=params)
    return table.value(int(k), tau1, tau2)


def copula_sdk(table: CopulaCrossCovTable, omega: float) -> np.ndarray:
    """Truncated spectral kernel (1/2pi) sum_k gamma_k e^{-ik omega}.

    Returns a complex (T, T) array over the table's quantile levels.
    """
    return copula_sdk_grid(table, [float(omega)])[0]


def copula_sdk_grid(table: CopulaCrossCovTable, omegas) -> np.ndarray:
    """Spectral kernels at many frequencies; shape (len(omegas), T, T)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    K = table.lag_cap
    gamma = table.gamma
    # pair lags +-k before summing: a lag-symmetric table (any reversible
    # model) then contributes an exact zero to every imaginary part instead
    # of a rounding residue
    gsum = gamma[K + 1:] + gamma[K - 1::-1]
    gdif = gamma[K + 1:] - gamma[K - 1::-1]
    arg = np.outer(omegas, np.arange(1, K + 1))
    re = gamma[K] + np.einsum("wk,kij->wij", np.cos(arg), gsum)
    im = -np.einsum("wk,kij->wij", np.sin(arg), gdif)
    return (re + 1j * im) / (2.0 * np.pi)


def marginal_density_at_quantile(model: str, theta: float, tau: float) -> float:
    """Stationary marginal density evaluated at its own tau-quantile."""
    theta = _validate_theta(theta)
    tau = validate_tau(tau)
    if model == "gaussian-ar1":
        sd = 1.0 / math.sqrt(1.0 - theta * theta)
        return float(norm.pdf(norm.ppf(tau, scale=sd), scale=sd))
    if model == "cauchy-ar1":
        # sum of AR(1) weights of a Cauchy: scale sum_j |theta|^j
        c = 1.0 / (1.0 - abs(theta))
        return float(cauchy.pdf(cauchy.ppf(tau, scale=c), scale=c))
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


def scaled_sdk(value: complex, f1: float, f2: float) -> complex:
    """Divide an unscaled kernel value by the two marginal densities."""
    if not (f1 > 0.0 and f2 > 0.0):
        raise ValueError(f"marginal densities must be positive, got {f1}, {f2}")
    return value / (f1 * f2)


@dataclass(frozen=True)
class SpectralTruth:
    """Truth kernel values over quantile pairs and arbitrary frequencies.

    Canonical storage mirrors PeriodogramTable: rows are pairs with
    tau1 <= tau2, opposite order served by conjugation.
    """

    taus: tuple
    omegas: np.ndarray
    mode: str                  # unscaled or scaled
    re: np.ndarray             # (P, len(omegas))
    im: np.ndarray

    def __post_init__(self):
        self.omegas.setflags(write=False)
        self.re.setflags(write=False)
        self.im.setflags(write=False)

    def pairs(self):
        T = len(self.taus)
        idx1, idx2 = np.triu_indices(T)
        return [(self.taus[i], self.taus[k]) for i, k in zip(idx1, idx2)]

    def _slot(self, tau1: float, tau2: float):
        try:
            i = self.taus.index(float(tau1))
            k = self.taus.index(float(tau2))
        except ValueError:
            raise KeyError(f"({tau1}, {tau2}) not in truth levels {self.taus}") from None
        flip = i > k
        if flip:
            i, k = k, i
        T = len(self.taus)
        return i * T - i * (i - 1) // 2 + (k - i), flip

    def pair_values(self, tau1: float, tau2: float) -> np.ndarray:
        slot, flip = self._slot(tau1, tau2)
        vals = self.re[slot] + 1j * self.im[slot]
        return np.conj(vals) if flip else vals

    def value(self, tau1: float, tau2: float, omega: float) -> complex:
        slot, flip = self._slot(tau1, tau2)
        hits = np.flatnonzero(np.abs(self.omegas - float(omega)) <= 1e-12)
        if hits.size == 0:
            raise KeyError(f"omega={omega!r} not tabulated")
        v = complex(self.re[slot, hits[0]], self.im[slot, hits[0]])
        return v.conjugate() if flip else v


def spectral_truth(model: str, taus, omegas, *, theta: float = 0.0,
                   scaled: bool = False, lag_cap: int = DEFAULT_LAG_CAP,
                   mc_length: int = 1_000_000, seed: int = 0,
                   table: CopulaCrossCovTable | None = None) -> SpectralTruth:
    """Truth table for a simulation design at the requested frequencies.

    ``gaussian-ar1`` uses the exact bivariate-normal route; ``cauchy-ar1``
    falls back to Monte Carlo (pass ``table`` to reuse a precomputed
    cross-covariance table).  ``iid-uniform``, ``iid-gaussian`` and
    ``iid-cauchy`` have the flat kernel (min(tau1,tau2) - tau1 tau2)/2pi.
    """
    taus = tuple(validate_tau(t) for t in taus)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float)).copy()
    T = len(taus)
    idx1, idx2 = np.triu_indices(T)

    iid = model.startswith("iid-")
    if iid:
        t1 = np.asarray(taus)[idx1]
        t2 = np.asarray(taus)[idx2]
        flat = (np.minimum(t1, t2) - t1 * t2) / (2.0 * np.pi)
        re = np.repeat(flat[:, None], omegas.size, axis=1)
        im = np.zeros_like(re)
    else:
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}")
        if table is None:
            if model == "gaussian-ar1":
                table = copula_crosscov_table(
                    taus, lag_cap, source="gaussian-ar1-exact",
                    params={"theta": theta},
                )
            else:
                sim = lambda length, s: simulate_ar1(
                    Ar1Spec(theta=theta, innovation="cauchy-t1", seed=s), length
                )
                table = copula_crosscov_table(
                    taus, lag_cap, source="monte-carlo",
                    params={"simulate": sim, "length": int(mc_length), "seed": int(seed)},
                )
        vals = copula_sdk_grid(table, omegas)       # (W, T, T)
        re = vals.real[:, idx1, idx2].T.copy()
        im = vals.imag[:, idx1, idx2].T.copy()

    mode = "scaled" if scaled else "unscaled"
    if scaled:
        dens = _marginal_densities(model, theta, taus)
        denom = (dens[idx1] * dens[idx2])[:, None]
        re = re / denom
        im = im / denom
    return SpectralTruth(taus=taus, omegas=omegas, mode=mode, re=re, im=im)


def _marginal_densities(model: str, theta: float, taus) -> np.ndarray:
    if model == "iid-uniform":
        return np.ones(len(taus))
    if model == "iid-gaussian":
        return np.asarray([float(norm.pdf(norm.ppf(t))) for t in taus])
    if model == "iid-cauchy":
        return np.asarray([float(cauchy.pdf(cauchy.ppf(t))) for t in taus])
    base = {"gaussian-ar1": "gaussian-ar1", "cauchy-ar1": "cauchy-ar1"}[model]
    return np.asarray(
        [marginal_density_at_quantile(base, theta, t) for t in taus]
    )
