import numpy as np
import pytest

from qspectral.periodogram import (
    MODES,
    clipped_periodogram,
    ordinary_periodogram,
    periodogram_kernel,
    periodogram_table,
)
from qspectral.regression import harmonic_ols_fit, harmonic_quantile_fit
from qspectral.series import fourier_frequencies, normalized_ranks
from qspectral.simulate import apply_monotone, replication_stream, simulate_iid


def _complex(table):
    return table.re + 1j * table.im


class TestKernelAlgebra:
    def test_diagonal_is_squared_norm(self):
        y = simulate_iid("gaussian", 32, 10)
        w = np.pi / 4
        v = periodogram_kernel(y, "rank", 0.5, 0.5, w)
        fit = harmonic_quantile_fit(normalized_ranks(y), 0.5, w)
        b1, b2 = fit.b
        assert v.im == 0.0
        assert v.re == pytest.approx(32 / 4 * (b1 ** 2 + b2 ** 2), rel=1e-12)

    def test_off_diagonal_bilinear_form(self):
        y = simulate_iid("gaussian", 24, 11)
        w = 2 * np.pi * 3 / 24
        v = periodogram_kernel(y, "raw", 0.25, 0.75, w)
        f1 = harmonic_quantile_fit(y, 0.25, w)
        f2 = harmonic_quantile_fit(y, 0.75, w)
        (a1, b1), (a2, b2) = f1.b, f2.b
        assert v.re == pytest.approx(24 / 4 * (a1 * a2 + b1 * b2), rel=1e-10, abs=1e-12)
        assert v.im == pytest.approx(24 / 4 * (a1 * b2 - b1 * a2), rel=1e-10, abs=1e-12)

    def test_rank_mode_monotone_invariance_bitwise(self):
        y = simulate_iid("gaussian", 40, 12)
        w = 2 * np.pi * 7 / 40
        base = periodogram_kernel(y, "rank", 0.25, 0.7, w)
        for transform in ("cube", "exp"):
            other = periodogram_kernel(apply_monotone(y, transform), "rank", 0.25, 0.7, w)
            assert other.re == base.re and other.im == base.im

    def test_hermitian_swap(self):
        y = simulate_iid("cauchy-t1", 36, 13)
        w = 2 * np.pi * 5 / 36
        v = periodogram_kernel(y, "rank", 0.3, 0.8, w)
        vs = periodogram_kernel(y, "rank", 0.8, 0.3, w)
        assert vs.re == pytest.approx(v.re, rel=1e-12, abs=1e-15)
        assert vs.im == pytest.approx(-v.im, rel=1e-12, abs=1e-15)

    def test_known_margin_requires_unit_interval(self):
        u = simulate_iid("uniform", 16, 3)
        periodogram_kernel(u, "known-margin", 0.5, 0.5, np.pi / 4)
        with pytest.raises(ValueError):
            periodogram_kernel(u + 2.0, "known-margin", 0.5, 0.5, np.pi / 4)

    def test_off_grid_frequency_rejected(self):
        y = simulate_iid("gaussian", 16, 4)
        with pytest.raises(ValueError):
            periodogram_kernel(y, "rank", 0.5, 0.5, 0.7)

    def test_white_noise_imaginary_mean_vanishes(self):
        # time-reversibility of iid data: Im averages to 0 within 3 SE
        w = np.pi / 2
        vals = []
        for rep in range(500):
            u = iid = simulate_iid("uniform", 64, 50_000 + rep)
            vals.append(periodogram_kernel(u, "rank", 0.25, 0.75, w).im)
        vals = np.asarray(vals)
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(vals.mean()) <= 3 * se


class TestClipped:
    def test_hand_summed_example(self):
        v = clipped_periodogram(np.array([1.0, 2.0, 3.0, 4.0]), 0.5, 0.5, np.pi / 2)
        assert v.re == pytest.approx(0.5, abs=1e-12)
        assert v.im == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_modulus_square(self):
        y = simulate_iid("gaussian", 30, 9)
        n = 30
        for w in np.asarray(fourier_frequencies(n).frequencies)[[0, 7, 14]]:
            v = clipped_periodogram(y, 0.3, 0.3, float(w))
            assert v.im == 0.0
            assert v.re >= 0.0
            t = np.arange(1, n + 1)
            q = np.quantile(y, 0.3, method="inverted_cdf")
            psi = 0.3 - (y <= q)
            d = np.sum(np.exp(1j * w * t) * psi)
            assert v.re == pytest.approx(abs(d) ** 2 / n, rel=1e-10)

    def test_iid_grid_average_near_flat_spectrum(self):
        y = simulate_iid("uniform", 4096, 77)
        tab = periodogram_table(y, (0.5,), mode="clipped")
        vals = tab.re[0]
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - 0.25) <= 3 * se


class TestOrdinary:
    def test_example_sine(self):
        assert ordinary_periodogram(np.array([1.0, 0.0, -1.0, 0.0]),
                                    np.pi / 2) == pytest.approx(1.0, abs=1e-12)

    def test_constant_vanishes_interior(self):
        y = np.full(12, 4.2)
        for w in np.asarray(fourier_frequencies(12).frequencies):
            assert ordinary_periodogram(y, float(w)) == pytest.approx(0.0, abs=1e-18)

    def test_matches_ols_identity_interior(self):
        y = simulate_iid("gaussian", 20, 15)
        for w in np.asarray(fourier_frequencies(20).frequencies):
            if w >= np.pi - 1e-12:
                continue
            a, b = harmonic_ols_fit(y, float(w))
            I = ordinary_periodogram(y, float(w))
            assert abs(I - 20 / 4 * (b[0] ** 2 + b[1] ** 2)) <= 1e-8


class TestTable:
    def test_shape_single_tau(self):
        tab = periodogram_table(np.arange(1.0, 9.0), (0.5,), mode="rank")
        assert tab.re.shape == (1, 4)
        assert len(tab.pairs()) == 1

    def test_hermitian_pair_symmetry(self):
        y = simulate_iid("gaussian", 32, 17)
        tab = periodogram_table(y, (0.25, 0.75), mode="rank")
        v = tab.pair_values(0.25, 0.75)
        vs = tab.pair_values(0.75, 0.25)
        assert np.array_equal(vs, np.conj(v))

    def test_diagonal_reality_and_nonnegativity(self):
        y = simulate_iid("cauchy-t1", 48, 18)
        for mode in ("raw", "rank", "clipped"):
            tab = periodogram_table(y, (0.1, 0.5, 0.9), mode=mode)
            for tau in (0.1, 0.5, 0.9):
                v = tab.pair_values(tau, tau)
                assert np.all(v.imag == 0.0)
                assert np.all(v.real >= 0.0)

    def test_rank_table_matches_kernel_recomputation_bitwise(self):
        y = simulate_iid("gaussian", 20, 19)
        taus = (0.25, 0.5, 0.9)
        tab = periodogram_table(y, taus, mode="rank")
        freqs = np.asarray(tab.grid.frequencies)
        for t1 in taus:
            for t2 in taus:
                vals = tab.pair_values(t1, t2)
                for j, w in enumerate(freqs):
                    k = periodogram_kernel(y, "rank", t1, t2, float(w))
                    assert k.re == vals[j].real
                    assert k.im == vals[j].imag

    def test_table_invariance_under_monotone_maps(self):
        y = simulate_iid("gaussian", 36, 20)
        base = periodogram_table(y, (0.25, 0.5), mode="rank")
        for transform, kw in (("cube", {}), ("exp", {}),
                              ("affine", {"shift": -2.0, "scale": 0.5})):
            other = periodogram_table(apply_monotone(y, transform, **kw),
                                      (0.25, 0.5), mode="rank")
            assert np.array_equal(other.re, base.re)
            assert np.array_equal(other.im, base.im)

    def test_pi_frequency_included_for_even_n(self):
        y = simulate_iid("gaussian", 16, 21)
        tab = periodogram_table(y, (0.5,), mode="rank")
        assert np.asarray(tab.grid.frequencies)[-1] == pytest.approx(np.pi)
        # value at pi is real on the diagonal like everywhere else
        assert tab.im[0, -1] == 0.0

    def test_unsorted_taus_rejected(self):
        y = simulate_iid("gaussian", 16, 22)
        with pytest.raises(ValueError):
            periodogram_table(y, (0.75, 0.25), mode="rank")
        with pytest.raises(ValueError):
            periodogram_table(y, (0.5, 0.5), mode="rank")

    def test_modes_enumerated(self):
        assert set(MODES) == {"raw", "known-margin", "rank", "clipped", "ordinary"}
        y = simulate_iid("gaussian", 16, 23)
        with pytest.raises(ValueError):
            periodogram_table(y, (0.5,), mode="laplace")

    def test_ordinary_mode_table(self):
        y = simulate_iid("gaussian", 16, 24)
        tab = periodogram_table(y, (0.25, 0.75), mode="ordinary")
        freqs = np.asarray(tab.grid.frequencies)
        for p, _ in enumerate(tab.pairs()):
            for j, w in enumerate(freqs):
                assert tab.re[p, j] == pytest.approx(
                    ordinary_periodogram(y, float(w)), rel=1e-12)
        assert np.all(tab.im == 0.0)
