import numpy as np
import pytest
from scipy import stats

from qspectral.simulate import Ar1Spec, simulate_ar1, simulate_iid
from qspectral.truth import (
    CopulaCrossCovTable,
    bvn_cdf,
    bvn_orthant,
    copula_crosscov,
    copula_crosscov_table,
    copula_sdk,
    copula_sdk_grid,
    marginal_density_at_quantile,
    scaled_sdk,
    spectral_truth,
)

TAUS = (0.05, 0.25, 0.5, 0.75, 0.95)


@pytest.fixture(scope="module")
def exact_table():
    return copula_crosscov_table(TAUS, lag_cap=30, source="gaussian-ar1-exact",
                                 params={"theta": -0.3})


@pytest.fixture(scope="module")
def mc_table():
    sim = lambda length, seed: simulate_ar1(
        Ar1Spec(theta=-0.3, innovation="gaussian", seed=seed), length)
    return copula_crosscov_table(
        (0.25, 0.5), lag_cap=8, source="monte-carlo",
        params={"simulate": sim, "length": 200_000, "seed": 31})


class TestBvn:
    def test_orthant_closed_form_values(self):
        assert bvn_orthant(0.0) == pytest.approx(0.25, abs=1e-15)
        assert bvn_orthant(1.0) == pytest.approx(0.5, abs=1e-15)
        assert bvn_orthant(-1.0) == pytest.approx(0.0, abs=1e-15)
        assert bvn_orthant(-0.3) == pytest.approx(0.20150665798966086, abs=1e-12)

    def test_cdf_matches_orthant_at_origin(self):
        for rho in np.linspace(-0.99, 0.99, 21):
            assert abs(bvn_cdf(0.0, 0.0, float(rho)) - bvn_orthant(float(rho))) <= 1e-10

    def test_cdf_against_scipy_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(40):
            h, k = rng.uniform(-3, 3, 2)
            rho = float(rng.uniform(-0.98, 0.98))
            ref = stats.multivariate_normal(
                mean=[0.0, 0.0], cov=[[1.0, rho], [rho, 1.0]]).cdf([h, k])
            assert abs(bvn_cdf(float(h), float(k), rho) - ref) <= 5e-11

    def test_degenerate_correlations(self):
        assert bvn_cdf(0.5, 1.5, 1.0) == pytest.approx(stats.norm.cdf(0.5), abs=1e-14)
        assert bvn_cdf(0.5, -0.2, -1.0) == pytest.approx(
            max(stats.norm.cdf(0.5) + stats.norm.cdf(-0.2) - 1, 0.0), abs=1e-14)

    def test_independence_factorizes(self):
        assert bvn_cdf(0.3, -0.7, 0.0) == pytest.approx(
            stats.norm.cdf(0.3) * stats.norm.cdf(-0.7), abs=1e-14)

    def test_rho_out_of_range(self):
        with pytest.raises(ValueError):
            bvn_cdf(0.0, 0.0, 1.5)


class TestExactCrossCov:
    def test_arcsine_value_at_lag_one(self, exact_table):
        # Cov(1{U_t<=.5}, 1{U_{t-1}<=.5}) for AR(1) theta=-0.3 equals the
        # orthant probability at rho=theta minus 1/4
        got = exact_table.value(1, 0.5, 0.5)
        assert got == pytest.approx(-0.04849334201033913, abs=1e-10)

    def test_lag_zero_diagonal_is_bernoulli_variance(self, exact_table):
        for tau in TAUS:
            assert exact_table.value(0, tau, tau) == pytest.approx(
                tau * (1 - tau), abs=1e-12)

    def test_lag_zero_off_diagonal(self, exact_table):
        assert exact_table.value(0, 0.25, 0.75) == pytest.approx(
            0.25 - 0.25 * 0.75, abs=1e-12)

    def test_lag_symmetry(self, exact_table):
        for k in (1, 3, 7):
            for t1 in (0.25, 0.5):
                for t2 in (0.5, 0.95):
                    assert exact_table.value(-k, t1, t2) == exact_table.value(k, t2, t1)

    def test_frechet_bounds(self, exact_table):
        # covariance of Bernoulli indicators: the comonotone upper bound is
        # min(t1,t2) - t1 t2, the countermonotone lower bound
        # max(t1+t2-1, 0) - t1 t2; the lower one is NOT the negated upper
        # (see (0.05, 0.95), where the kernel reaches -0.0046)
        K = exact_table.lag_cap
        for k in range(-K, K + 1):
            for t1 in TAUS:
                for t2 in TAUS:
                    g = exact_table.value(k, t1, t2)
                    assert g <= min(t1, t2) - t1 * t2 + 1e-9
                    assert g >= max(t1 + t2 - 1, 0.0) - t1 * t2 - 1e-9

    def test_decay_with_lag(self, exact_table):
        assert abs(exact_table.value(20, 0.5, 0.5)) < 1e-9

    def test_single_value_helper(self, exact_table):
        got = copula_crosscov("gaussian-ar1-exact", {"theta": -0.3}, 1, 0.5, 0.5)
        assert got == exact_table.value(1, 0.5, 0.5)


class TestMonteCarloCrossCov:
    def test_matches_exact_within_errors(self, mc_table, exact_table):
        for k in (0, 1, 2):
            for t1 in (0.25, 0.5):
                for t2 in (0.25, 0.5):
                    got = mc_table.value(k, t1, t2)
                    se = mc_table.se_value(k, t1, t2)
                    ref = exact_table.value(k, t1, t2)
                    assert abs(got - ref) <= 4 * se + 1e-4

    def test_se_present_and_positive(self, mc_table, exact_table):
        assert exact_table.se is None
        assert mc_table.se_value(1, 0.25, 0.5) > 0.0

    def test_lag_symmetry_exact_by_construction(self, mc_table):
        for k in (1, 4):
            assert mc_table.value(-k, 0.25, 0.5) == mc_table.value(k, 0.5, 0.25)

    def test_frechet_bounds_with_sampling_tolerance(self, mc_table):
        # the population bounds can be exceeded by sampling noise and by
        # the ceil-based empirical quantile, so the tolerance is statistical
        L = 200_000
        for k in range(-8, 9):
            for t1 in (0.25, 0.5):
                for t2 in (0.25, 0.5):
                    tol = 5 * mc_table.se_value(k, t1, t2) + 2 / L
                    g = mc_table.value(k, t1, t2)
                    assert g <= min(t1, t2) - t1 * t2 + tol
                    assert g >= max(t1 + t2 - 1, 0.0) - t1 * t2 - tol

    def test_short_path_rejected(self):
        with pytest.raises(ValueError):
            copula_crosscov_table((0.5,), lag_cap=50, source="monte-carlo",
                                  params={"series": np.zeros(100)})


class TestSpectralDensityKernel:
    def test_iid_flat_value(self):
        gamma = np.zeros((1, 1, 1))
        gamma[0, 0, 0] = 0.25
        tab = CopulaCrossCovTable(taus=(0.5,), lag_cap=0, gamma=gamma,
                                  se=None, source="gaussian-ar1-exact")
        v = copula_sdk(tab, 1.0)[0, 0]
        assert v == pytest.approx(0.25 / (2 * np.pi), abs=1e-15)

    def test_gaussian_ar1_at_zero_frequency(self, exact_table):
        v = copula_sdk(exact_table, 0.0)[2, 2]
        assert v.imag == pytest.approx(0.0, abs=1e-15)
        assert v.real == pytest.approx(0.027866, abs=2e-5)

    def test_grid_matches_pointwise(self, exact_table):
        omegas = np.array([0.3, 1.0, 2.5])
        grid = copula_sdk_grid(exact_table, omegas)
        for i, w in enumerate(omegas):
            assert np.allclose(grid[i], copula_sdk(exact_table, float(w)), atol=1e-14)

    def test_hermitian_in_pair_swap(self, exact_table):
        S = copula_sdk(exact_table, 1.3)
        assert np.allclose(S, np.conj(S.T), atol=1e-16)

    def test_reversible_model_real(self, exact_table):
        for w in (0.5, 1.5, 3.0):
            S = copula_sdk(exact_table, w)
            assert np.abs(S.imag).max() <= 1e-15

    def test_diagonal_nonnegative_at_all_frequencies(self, exact_table):
        # absolute summability with geometric decay: truncation at K=30
        # cannot push the diagonal below -1e-8
        for w in np.linspace(0.0, np.pi, 40):
            S = copula_sdk(exact_table, float(w))
            assert np.diag(S).real.min() >= -1e-8


class TestMarginals:
    def test_gaussian_ar1_median_density(self):
        # phi(0) * sqrt(1 - 0.09), stationary sd (1 - theta^2)^(-1/2)
        assert marginal_density_at_quantile("gaussian-ar1", -0.3, 0.5) == pytest.approx(
            stats.norm.pdf(0.0) * np.sqrt(0.91), abs=1e-14)
        assert marginal_density_at_quantile("gaussian-ar1", -0.3, 0.5) == pytest.approx(
            0.380567, abs=1e-6)

    def test_cauchy_ar1_median_density(self):
        assert marginal_density_at_quantile("cauchy-ar1", 0.3, 0.5) == pytest.approx(
            0.7 / np.pi, abs=1e-12)

    def test_white_noise_via_zero_theta(self):
        assert marginal_density_at_quantile("gaussian-ar1", 0.0, 0.5) == pytest.approx(
            stats.norm.pdf(0.0), abs=1e-14)

    def test_scaled_white_noise_diagonal_is_quarter(self):
        f = 0.25 / (2 * np.pi)
        d = stats.norm.pdf(0.0)
        assert scaled_sdk(f, d, d) == pytest.approx(0.25, abs=1e-14)

    def test_scaled_requires_positive_densities(self):
        with pytest.raises(ValueError):
            scaled_sdk(0.1, 0.0, 0.5)


class TestSpectralTruth:
    def test_iid_models_flat_and_equal(self):
        omegas = np.linspace(0.1, 3.0, 7)
        tables = [spectral_truth(m, (0.25, 0.5), omegas)
                  for m in ("iid-uniform", "iid-gaussian", "iid-cauchy")]
        for tab in tables:
            v = tab.pair_values(0.25, 0.25)
            assert np.allclose(v.real, (0.25 - 0.0625) / (2 * np.pi), atol=1e-15)
            assert np.all(v.imag == 0.0)
            # copulas coincide across marginals
            assert np.array_equal(tab.re, tables[0].re)

    def test_gaussian_ar1_uses_exact_oracle(self, exact_table):
        omegas = np.array([0.7, 2.0])
        tab = spectral_truth("gaussian-ar1", TAUS, omegas, theta=-0.3, lag_cap=30)
        ref = copula_sdk_grid(exact_table, omegas)
        got = tab.pair_values(0.5, 0.75)
        assert np.allclose(got, ref[:, 2, 3], atol=1e-14)

    def test_scaled_mode_divides_marginals(self):
        omegas = np.array([1.0])
        un = spectral_truth("gaussian-ar1", (0.5, 0.75), omegas, theta=-0.3, lag_cap=30)
        sc = spectral_truth("gaussian-ar1", (0.5, 0.75), omegas, theta=-0.3,
                            lag_cap=30, scaled=True)
        f1 = marginal_density_at_quantile("gaussian-ar1", -0.3, 0.5)
        f2 = marginal_density_at_quantile("gaussian-ar1", -0.3, 0.75)
        assert sc.value(0.5, 0.75, 1.0) == pytest.approx(
            un.value(0.5, 0.75, 1.0) / (f1 * f2), abs=1e-14)

    def test_scaled_gaussian_zero_frequency_example(self):
        tab = spectral_truth("gaussian-ar1", (0.5,), np.array([1e-9]),
                             theta=-0.3, lag_cap=40, scaled=True)
        d = marginal_density_at_quantile("gaussian-ar1", -0.3, 0.5)
        assert tab.value(0.5, 0.5, 1e-9).real == pytest.approx(
            0.027866 / d ** 2, abs=2e-4)

    def test_precomputed_table_passthrough(self, exact_table):
        omegas = np.array([0.5])
        a = spectral_truth("gaussian-ar1", TAUS, omegas, theta=-0.3, table=exact_table)
        b = spectral_truth("gaussian-ar1", TAUS, omegas, theta=-0.3, lag_cap=30)
        assert np.array_equal(a.re, b.re)

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            spectral_truth("arma", (0.5,), np.array([1.0]))

    def test_hermitian_retrieval(self):
        omegas = np.array([0.9])
        tab = spectral_truth("gaussian-ar1", (0.25, 0.75), omegas, theta=-0.3,
                             lag_cap=30)
        v = tab.value(0.25, 0.75, 0.9)
        vs = tab.value(0.75, 0.25, 0.9)
        assert vs == np.conj(v)
