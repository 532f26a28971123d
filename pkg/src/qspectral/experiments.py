"""Replication studies: RMSE tables, unbiasedness checks, estimator
equivalence curves, and time-reversibility diagnostics.

Every study follows the same scheme: replication r simulates its series
from an independent stream keyed by (master seed, r), computes a
periodogram table (smoothed where the study calls for it), and reduces it
to a small per-replication statistic.  Statistics are aggregated in
replication order with numpy's pairwise summation, so reports are
bit-identical across reruns and across worker counts.  Reports are plain
dicts ready for JSON: config, config hash, seed, package versions, and a
list of result rows; wall-clock time lives under "meta" and is the one
field excluded from the reproducibility guarantee.

Replications can run in a process pool; the worker count comes from the
``workers`` argument, else the QS_THREADS environment variable, else one
worker per CPU (capped at 8).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import __version__
from .periodogram import periodogram_kernel, periodogram_table
from .series import fourier_frequencies, nearest_fourier_index, normalized_ranks
from .simulate import Ar1Spec, ar1_path, iid_path, replication_stream, simulate_ar1
from .smoothing import daniell_weights, smooth_table
from .truth import copula_crosscov_table, spectral_truth

__all__ = [
    "STUDY_MODELS",
    "ExperimentConfig",
    "RmseReport",
    "rmse_study",
    "unbiasedness_study",
    "equivalence_study",
    "reversibility_study",
    "write_report",
]

STUDY_MODELS = (
    "gaussian-ar1",
    "cauchy-ar1",
    "iid-uniform",
    "iid-gaussian",
    "iid-cauchy",
)

_GRID = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class ExperimentConfig:
    """One study's model, sizes, smoothing choices, and seeding."""

    model: str = "gaussian-ar1"
    theta: float = -0.3
    n: tuple = (500,)
    replications: int = 200
    taus: tuple = _GRID
    spans: object = (10, 4)     # flat tuple, or mapping n -> spans
    mode: str = "rank"
    master_seed: int = 20240917
    lag_cap: int = 50
    mc_length: int = 1_000_000
    burn_in: int = 500
    workers: int | None = None
    out: str | None = None

    def __post_init__(self):
        if self.model not in STUDY_MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {STUDY_MODELS}")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        taus = tuple(float(t) for t in self.taus)
        if any(not 0.0 < t < 1.0 for t in taus):
            raise ValueError("quantile grid must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("quantile grid must be sorted and distinct")
        if any(int(v) < 4 for v in self.n):
            raise ValueError("series lengths must be at least 4")

    def spans_for(self, n: int):
        if isinstance(self.spans, dict):
            try:
                return tuple(self.spans[n])
            except KeyError:
                raise KeyError(f"no smoothing spans configured for n={n}") from None
        return tuple(self.spans)

    def config_dict(self) -> dict:
        """JSON-ready configuration; excludes execution-only fields."""
        spans = self.spans
        if isinstance(spans, dict):
            spans = {str(k): list(v) for k, v in sorted(spans.items())}
        else:
            spans = list(spans)
        return {
            "model": self.model,
            "theta": self.theta,
            "n": [int(v) for v in self.n],
            "replications": int(self.replications),
            "taus": list(self.taus),
            "spans": spans,
            "mode": self.mode,
            "master_seed": int(self.master_seed),
            "lag_cap": int(self.lag_cap),
            "mc_length": int(self.mc_length),
            "burn_in": int(self.burn_in),
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.config_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class RmseReport:
    """Root integrated MSE per quantile pair, with reproducibility metadata."""

    report: dict = field(repr=False)

    @property
    def rows(self):
        return self.report["rows"]

    @property
    def config_hash(self) -> str:
        return self.report["config_hash"]

    @property
    def runtime_seconds(self) -> float:
        return self.report["meta"]["runtime_seconds"]

    def rmse(self, n: int, tau1: float, tau2: float) -> float:
        for row in self.rows:
            if row["n"] == n and row["tau1"] == tau1 and row["tau2"] == tau2:
                return row["rmse"]
        raise KeyError(f"no row for n={n}, pair=({tau1}, {tau2})")


def _worker_count(cfg: ExperimentConfig) -> int:
    if cfg.workers is not None:
        return max(1, int(cfg.workers))
    env = os.environ.get("QS_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def _map_replications(fn, R: int, workers: int) -> list:
    """fn(rep) for rep = 0..R-1, results in replication order."""
    if workers <= 1 or R == 1:
        return [fn(rep) for rep in range(R)]
    chunk = max(1, R // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(R), chunksize=chunk))


def _simulate(cfg: ExperimentConfig, n: int, rep: int) -> np.ndarray:
    rng = replication_stream(cfg.master_seed, rep)
    if cfg.model.startswith("iid-"):
        dist = cfg.model.removeprefix("iid-")
        if dist == "cauchy":
            dist = "cauchy-t1"
        return iid_path(rng, dist, n)
    innovation = "gaussian" if cfg.model == "gaussian-ar1" else "cauchy-t1"
    return ar1_path(rng, cfg.theta, innovation, n, cfg.burn_in)


def _truth_grid(cfg: ExperimentConfig, n: int, crosscov=None) -> np.ndarray:
    """2*pi * truth kernel over canonical pairs and grid frequencies."""
    freqs = fourier_frequencies(n).frequencies
    truth = spectral_truth(
        cfg.model, cfg.taus, freqs,
        theta=cfg.theta, scaled=(cfg.mode == "raw"), lag_cap=cfg.lag_cap,
        mc_length=cfg.mc_length, seed=cfg.master_seed, table=crosscov,
    )
    return 2.0 * np.pi * (truth.re + 1j * truth.im)


def _mc_crosscov(cfg: ExperimentConfig):
    """Shared Monte-Carlo cross-covariance table for models without an
    exact truth; None when the exact route applies."""
    if cfg.model != "cauchy-ar1":
        return None
    sim = partial(_mc_path, cfg.theta)
    return copula_crosscov_table(
        cfg.taus, cfg.lag_cap, source="monte-carlo",
        params={"simulate": sim, "length": cfg.mc_length, "seed": cfg.master_seed},
    )


def _mc_path(theta: float, length: int, seed: int) -> np.ndarray:
    return simulate_ar1(Ar1Spec(theta=theta, innovation="cauchy-t1", seed=seed), length)


def _versions() -> dict:
    import numpy
    import scipy

    return {"qspectral": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__}


def _report(cfg: ExperimentConfig, rows: list, started: float) -> dict:
    return {
        "config": cfg.config_dict(),
        "config_hash": cfg.config_hash(),
        "seed": int(cfg.master_seed),
        "versions": _versions(),
        "rows": rows,
        "meta": {"runtime_seconds": time.perf_counter() - started},
    }


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pair_list(taus):
    idx1, idx2 = np.triu_indices(len(taus))
    return [(taus[i], taus[j]) for i, j in zip(idx1, idx2)]


def _smoothed_estimate(cfg: ExperimentConfig, n: int, rep: int) -> np.ndarray:
    y = _simulate(cfg, n, rep)
    tab = periodogram_table(y, cfg.taus, mode=cfg.mode)
    sm = smooth_table(tab, daniell_weights(cfg.spans_for(n)))
    return sm.re + 1j * sm.im


def rmse_study(cfg: ExperimentConfig, estimate_fn=None) -> RmseReport:
    """Root integrated MSE of the smoothed table against 2*pi*truth.

    Per pair: sqrt(mean over replications of mean over grid frequencies of
    |estimate - truth|^2), with the complex modulus pooling real and
    imaginary error; the real-part-only variant is reported alongside.
    ``estimate_fn(y, cfg, n, truth)`` overrides the estimation pipeline
    (diagnostics and tests); it forces serial execution.
    """
    started = time.perf_counter()
    workers = _worker_count(cfg) if estimate_fn is None else 1
    crosscov = _mc_crosscov(cfg)
    pairs = _pair_list(cfg.taus)
    rows = []
    for n in cfg.n:
        n = int(n)
        truth = _truth_grid(cfg, n, crosscov)
        if estimate_fn is None:
            fn = partial(_smoothed_estimate, cfg, n)
        else:
            fn = lambda rep: estimate_fn(_simulate(cfg, n, rep), cfg, n, truth)
        estimates = _map_replications(fn, cfg.replications, workers)
        sq = np.stack([np.mean(np.abs(est - truth) ** 2, axis=1) for est in estimates])
        sq_re = np.stack(
            [np.mean((est.real - truth.real) ** 2, axis=1) for est in estimates]
        )
        rmse = np.sqrt(sq.mean(axis=0))
        rmse_re = np.sqrt(sq_re.mean(axis=0))
        for p, (t1, t2) in enumerate(pairs):
            rows.append(
                {
                    "n": n,
                    "tau1": t1,
                    "tau2": t2,
                    "rmse": float(rmse[p]),
                    "rmse_real_part": float(rmse_re[p]),
                }
            )
    return RmseReport(report=_report(cfg, rows, started))


def _raw_value(cfg: ExperimentConfig, n: int, j: int, rep: int) -> np.ndarray:
    # single-frequency fits; the full table would cost a factor n/2 more
    y = _simulate(cfg, n, rep)
    w = 2.0 * np.pi * j / n
    vals = [
        periodogram_kernel(y, cfg.mode, t1, t2, w).as_complex
        for t1, t2 in _pair_list(cfg.taus)
    ]
    return np.asarray(vals)


def unbiasedness_study(cfg: ExperimentConfig, omega: float = np.pi / 2) -> dict:
    """Replication mean of the unsmoothed table at one frequency.

    The frequency snaps to the nearest grid point of each n.  Rows carry
    the mean, its standard error, and the 2*pi*truth target per pair.
    """
    started = time.perf_counter()
    workers = _worker_count(cfg)
    crosscov = _mc_crosscov(cfg)
    pairs = _pair_list(cfg.taus)
    R = cfg.replications
    rows = []
    for n in cfg.n:
        n = int(n)
        j = nearest_fourier_index(omega, n)
        w = 2.0 * np.pi * j / n
        truth = _truth_grid(cfg, n, crosscov)[:, j - 1]
        vals = np.stack(_map_replications(partial(_raw_value, cfg, n, j), R, workers))
        mean = vals.mean(axis=0)
        if R > 1:
            se_re = vals.real.std(axis=0, ddof=1) / np.sqrt(R)
            se_im = vals.imag.std(axis=0, ddof=1) / np.sqrt(R)
        else:
            se_re = np.zeros(len(pairs))
            se_im = np.zeros(len(pairs))
        for p, (t1, t2) in enumerate(pairs):
            rows.append(
                {
                    "n": n,
                    "tau1": t1,
                    "tau2": t2,
                    "omega": float(w),
                    "mean_re": float(mean[p].real),
                    "mean_im": float(mean[p].imag),
                    "se_re": float(se_re[p]),
                    "se_im": float(se_im[p]),
                    "truth_re": float(truth[p].real),
                    "truth_im": float(truth[p].imag),
                }
            )
    return _report(cfg, rows, started)


def _equivalence_gap(cfg: ExperimentConfig, n: int, rep: int) -> np.ndarray:
    y = _simulate(cfg, n, rep)
    rank_tab = periodogram_table(y, cfg.taus, mode="rank")
    clip_tab = periodogram_table(normalized_ranks(y), cfg.taus, mode="clipped")
    diff_re = rank_tab.re - clip_tab.re
    diff_im = rank_tab.im - clip_tab.im
    return np.hypot(diff_re, diff_im)


def equivalence_study(cfg: ExperimentConfig) -> dict:
    """Size of the gap between the regression and clipped rank estimators.

    Per (n, pair): quartiles of |rank-mode value - clipped value on
    normalized ranks| pooled over grid frequencies and replications.
    """
    started = time.perf_counter()
    workers = _worker_count(cfg)
    pairs = _pair_list(cfg.taus)
    rows = []
    for n in cfg.n:
        n = int(n)
        gaps = np.stack(
            _map_replications(partial(_equivalence_gap, cfg, n), cfg.replications, workers)
        )  # (R, P, J)
        pooled = gaps.transpose(1, 0, 2).reshape(len(pairs), -1)
        q25, med, q75 = np.quantile(pooled, [0.25, 0.5, 0.75], axis=1)
        for p, (t1, t2) in enumerate(pairs):
            rows.append(
                {
                    "n": n,
                    "tau1": t1,
                    "tau2": t2,
                    "q25": float(q25[p]),
                    "median": float(med[p]),
                    "q75": float(q75[p]),
                }
            )
    return _report(cfg, rows, started)


def _im_re_mad(cfg: ExperimentConfig, n: int, truth: np.ndarray, off: np.ndarray,
               rep: int) -> np.ndarray:
    est = _smoothed_estimate(cfg, n, rep)
    return np.array(
        [
            np.abs(est.imag[off]).mean(),
            np.abs(est.real[off]).mean(),
            np.abs(est - truth).mean(),
        ]
    )


def reversibility_study(cfg: ExperimentConfig) -> dict:
    """Imaginary-to-real magnitude ratio of the smoothed table.

    Per n: mean |Im| over off-diagonal pairs and grid frequencies divided
    by mean |Re| over the same entries, plus the mean absolute deviation of
    the full table from 2*pi*truth and the largest |Im| of the truth
    itself (zero for time-reversible models).
    """
    started = time.perf_counter()
    workers = _worker_count(cfg)
    crosscov = _mc_crosscov(cfg)
    taus = cfg.taus
    idx1, idx2 = np.triu_indices(len(taus))
    off = np.flatnonzero(idx1 != idx2)
    rows = []
    for n in cfg.n:
        n = int(n)
        truth = _truth_grid(cfg, n, crosscov)
        stats = np.stack(
            _map_replications(
                partial(_im_re_mad, cfg, n, truth, off), cfg.replications, workers
            )
        )
        mean_im, mean_re, mad = stats.mean(axis=0)
        rows.append(
            {
                "n": n,
                "im_re_ratio": float(mean_im / mean_re),
                "mad_truth": float(mad),
                "truth_im_max": float(np.abs(truth.imag).max()),
            }
        )
    return _report(cfg, rows, started)
