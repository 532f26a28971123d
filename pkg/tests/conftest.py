"""Shared fixtures for the test suite.

The session-scoped studies here are the expensive inputs to the acceptance
tests; each is computed once and shared by every criterion that reads it.
The recorded acceptance lines are printed as a summary block at the end of
the run, one PASS/FAIL line per criterion.
"""

import pytest

from qspectral.experiments import (
    ExperimentConfig,
    _worker_count,
    equivalence_study,
    reversibility_study,
    rmse_study,
    unbiasedness_study,
)

MASTER_SEED = 20240917

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_record():
    """Collect one (criterion, passed, detail) line per acceptance test."""

    def record(criterion: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append((criterion, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed, detail in _ACCEPTANCE_LINES:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}: {detail}")


def _table_study(model: str):
    cfg = ExperimentConfig(
        model=model,
        theta=-0.3,
        n=(100, 500),
        replications=200,
        spans={100: (2, 1), 500: (10, 4)},
        master_seed=MASTER_SEED,
    )
    return rmse_study(cfg), _worker_count(cfg)


@pytest.fixture(scope="session")
def gaussian_table_study():
    """RMSE study, Gaussian AR(1), n in {100, 500}, 200 replications."""
    return _table_study("gaussian-ar1")


@pytest.fixture(scope="session")
def cauchy_table_study():
    """RMSE study, Cauchy AR(1), n in {100, 500}, 200 replications."""
    return _table_study("cauchy-ar1")


def _mean_study(model: str) -> dict:
    cfg = ExperimentConfig(
        model=model,
        theta=-0.3,
        n=(500,),
        replications=500,
        master_seed=MASTER_SEED,
    )
    return unbiasedness_study(cfg)


@pytest.fixture(scope="session")
def uniform_mean_study():
    """Replication mean of the raw rank table, i.i.d. uniform, R = 500."""
    return _mean_study("iid-uniform")


@pytest.fixture(scope="session")
def gaussian_mean_study():
    """Replication mean of the raw rank table, Gaussian AR(1), R = 500."""
    return _mean_study("gaussian-ar1")


@pytest.fixture(scope="session")
def equivalence_report():
    """Rank-vs-clipped gap quartiles, i.i.d. uniform, n up to 2048."""
    cfg = ExperimentConfig(
        model="iid-uniform",
        n=(128, 512, 2048),
        replications=20,
        master_seed=MASTER_SEED,
    )
    return equivalence_study(cfg)


@pytest.fixture(scope="session")
def reversibility_report():
    """Smoothed-table imaginary-part ratio, Gaussian AR(1), n = 2000."""
    cfg = ExperimentConfig(
        model="gaussian-ar1",
        theta=-0.3,
        n=(2000,),
        replications=50,
        spans=(40, 16),
        master_seed=MASTER_SEED,
    )
    return reversibility_study(cfg)
