from __future__ import annotations

from math import factorial

import numpy as np
import pytest

from sawlab.acoustic import ResonatorParams
from sawlab.core import Trace
from sawlab.qd import (
    EmitterState,
    FilterSpec,
    ModulationDrive,
    Plateau,
    bessel_j,
    bessel_jn_all,
    charge_state,
    emission_frequency,
    filtered_comb,
    filtered_spectrum,
    lorentzian_unit_area,
    modulation_index,
    pl_bias_map,
    sideband_spectrum,
    sideband_weights,
)


def bessel_series(n: int, x: float) -> float:
    """Independent oracle: power series sum_k (-1)^k (x/2)^(n+2k) / (k! (n+k)!),
    summed until terms fall below 1e-20 of the accumulated value."""
    half = x / 2.0
    term = half**n / factorial(n)
    total = term
    k = 0
    while True:
        k += 1
        term *= -(half * half) / (k * (n + k))
        total += term
        if abs(term) < 1e-20 * max(abs(total), 1e-30) or k > 200:
            return total


EMITTER = EmitterState(
    base_frequency=0.0,
    linewidth_fwhm=643.6e6,
    stark_slope=1.3e11,
    plateaus=(
        Plateau(-0.25, -0.08, -25e9),
        Plateau(-0.05, 0.06, 0.0),
        Plateau(0.09, 0.18, 30e9),
    ),
    brightness=1000.0,
)
MODE = ResonatorParams(f0=3.53388e9, kappa_int=232e3, kappa_ext=0.0)


class TestBessel:
    def test_j0_at_zero(self) -> None:
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(5, 0.0) == 0.0

    def test_series_oracle_values(self) -> None:
        # frozen from the power-series oracle
        assert bessel_series(0, 1.0) == pytest.approx(0.7651976866, abs=1e-10)
        assert bessel_series(1, 1.0) == pytest.approx(0.4400505857, abs=1e-10)
        assert bessel_j(0, 1.0) == pytest.approx(0.7651976866, abs=1e-10)
        assert bessel_j(1, 1.0) == pytest.approx(0.4400505857, abs=1e-10)

    def test_against_series_oracle_on_random_points(self) -> None:
        rng = np.random.default_rng(11)
        for _ in range(400):
            n = int(rng.integers(0, 21))
            x = float(rng.uniform(-10.0, 10.0))
            assert bessel_j(n, x) == pytest.approx(bessel_series(n, abs(x)) *
                                                   (1.0 if x >= 0 or n % 2 == 0 else -1.0),
                                                   abs=1e-10)

    def test_negative_order_parity(self) -> None:
        for n in (1, 2, 3, 7):
            for x in (0.5, 2.0, 9.0):
                assert bessel_j(-n, x) == pytest.approx(((-1.0) ** n) * bessel_j(n, x),
                                                        rel=1e-12)

    def test_validity_range_enforced(self) -> None:
        with pytest.raises(ValueError):
            bessel_j(0, 31.0)
        with pytest.raises(ValueError):
            bessel_j(61, 1.0)
        with pytest.raises(ValueError):
            bessel_jn_all(-1, 1.0)

    def test_array_variant_matches_scalar(self) -> None:
        arr = bessel_jn_all(10, 3.7)
        for n in range(11):
            assert arr[n] == pytest.approx(bessel_j(n, 3.7), rel=0, abs=1e-14)


class TestSidebandWeights:
    def test_sum_is_unity_for_random_delta(self) -> None:
        rng = np.random.default_rng(23)
        for delta in rng.uniform(0.0, 5.0, 100):
            w, _ = sideband_weights(float(delta), 40)
            assert w[0] + 2.0 * w[1:].sum() == pytest.approx(1.0, abs=1e-9)

    def test_zero_delta_single_line(self) -> None:
        w, _ = sideband_weights(0.0, 4)
        assert w[0] == 1.0
        assert np.all(w[1:] == 0.0)

    def test_carrier_equals_first_sideband_at_crossing(self) -> None:
        # root of J0(x) = J1(x) located by bisection with the series oracle
        lo, hi = 1.0, 2.0
        for _ in range(80):
            mid = (lo + hi) / 2.0
            if bessel_series(0, mid) - bessel_series(1, mid) > 0:
                lo = mid
            else:
                hi = mid
        root = (lo + hi) / 2.0
        assert root == pytest.approx(1.4347, abs=1e-4)
        w, _ = sideband_weights(root, 8)
        assert w[0] == pytest.approx(w[1], rel=1e-9)

    def test_auto_widening_records_enough_orders(self) -> None:
        w, n_used = sideband_weights(5.0, 1)
        assert n_used > 5
        assert 1.0 - (w[0] + 2.0 * w[1:].sum()) <= 1e-6


class TestChargeState:
    def test_interval_membership(self) -> None:
        assert charge_state(-0.1, EMITTER) == 0
        assert charge_state(0.0, EMITTER) == 1
        assert charge_state(0.12, EMITTER) == 2

    def test_half_open_boundaries(self) -> None:
        assert charge_state(-0.08, EMITTER) is None  # v_max of 0, inside the gap
        assert charge_state(-0.05, EMITTER) == 1     # v_min belongs to the plateau
        adjacent = EmitterState(0.0, 1e9, 0.0,
                                (Plateau(0.0, 1.0, 0.0), Plateau(1.0, 2.0, 5e9)))
        assert charge_state(1.0, adjacent) == 1      # shared boundary goes to the upper

    def test_outside_all_plateaus_dark(self) -> None:
        assert charge_state(0.5, EMITTER) is None
        assert emission_frequency(0.5, EMITTER) is None


class TestEmissionFrequency:
    def test_stark_shift_per_millivolt(self) -> None:
        f1 = emission_frequency(0.0, EMITTER)
        f2 = emission_frequency(0.001, EMITTER)
        assert f2 - f1 == pytest.approx(0.13e9, rel=1e-9)

    def test_plateau_origin(self) -> None:
        assert emission_frequency(-0.05, EMITTER) == pytest.approx(0.0, abs=1e-3)
        assert emission_frequency(0.09, EMITTER) == pytest.approx(30e9, rel=1e-12)

    def test_boundary_jump_is_offset_difference(self) -> None:
        adjacent = EmitterState(0.0, 1e9, 1.3e11,
                                (Plateau(0.0, 1.0, 0.0), Plateau(1.0, 2.0, 5e9)))
        below = emission_frequency(1.0 - 1e-12, adjacent)
        above = emission_frequency(1.0, adjacent)
        # jump = offset difference minus the accumulated Stark ramp of plateau 0
        assert above - below == pytest.approx(5e9 - 1.3e11, rel=1e-6)


class TestModulationIndex:
    def test_on_resonance_peak(self) -> None:
        d = ModulationDrive(MODE.f0, MODE, delta_max=1.3)
        assert modulation_index(d) == pytest.approx(1.3, rel=1e-12)

    def test_half_width_point(self) -> None:
        d = ModulationDrive(MODE.f0 + MODE.kappa_tot / 2.0, MODE, delta_max=1.3)
        assert modulation_index(d) == pytest.approx(1.3 / np.sqrt(2.0), rel=1e-12)

    def test_delta_squared_traces_lorentzian_of_kappa_tot(self) -> None:
        f = np.linspace(MODE.f0 - 5 * MODE.kappa_tot, MODE.f0 + 5 * MODE.kappa_tot, 101)
        d2 = np.array([modulation_index(ModulationDrive(float(v), MODE, 1.0)) ** 2
                       for v in f])
        expected = 1.0 / (1.0 + (2.0 * (f - MODE.f0) / MODE.kappa_tot) ** 2)
        assert np.allclose(d2, expected, rtol=1e-12)


class TestSidebandSpectrum:
    def test_zero_delta_single_line(self) -> None:
        t = sideband_spectrum(0.0, 1e9, 0.0, 3.5e9, 4)
        assert t.meta.extra["weight_sum"] == pytest.approx(1.0, abs=1e-12)
        lines = [(p, w) for p, w in t.meta.extra["lines"] if w > 0]
        assert lines == [(0.0, 1.0)]

    def test_weight_bookkeeping_parseval(self) -> None:
        rng = np.random.default_rng(5)
        for delta in rng.uniform(0.0, 4.0, 20):
            t = sideband_spectrum(0.0, 1e9, float(delta), 3.5e9, 4, brightness=7.0)
            assert t.meta.extra["weight_sum"] == pytest.approx(1.0, abs=1e-6)
            # grid integral approaches brightness * weight_sum for wide grids
            integral = np.trapezoid(t.y, t.x)
            assert integral == pytest.approx(7.0, rel=0.05)

    def test_sideband_symmetry(self) -> None:
        t = sideband_spectrum(0.0, 1e9, 1.7, 3.5e9, 4)
        lines = dict(t.meta.extra["lines"])
        for pos, w in lines.items():
            assert lines[-pos] == pytest.approx(w, rel=0, abs=0)

    def test_spectrum_symmetric_about_center(self) -> None:
        t = sideband_spectrum(0.0, 1e9, 1.0, 3.5e9, 4)
        assert np.allclose(t.y, t.y[::-1], rtol=1e-10)


class TestFilteredSpectrum:
    def test_lorentzian_width_addition(self) -> None:
        # analytic: 643.6 MHz line through a 600 MHz filter -> 1243.6 MHz,
        # measured here by half-maximum crossings
        ideal = sideband_spectrum(0.0, 643.6e6, 0.0, 1e9, 1)
        filt = FilterSpec(fwhm=600e6, scan_range=(-30e9, 30e9), n_points=6001)
        obs = filtered_spectrum(ideal, filt)
        x, y = obs.x, obs.y
        i = int(np.argmax(y))
        half = y[i] / 2.0
        left = np.interp(half, y[: i], x[: i])
        right = np.interp(half, y[i:][::-1], x[i:][::-1])
        assert right - left == pytest.approx(1243.6e6, rel=1e-2)

    def test_narrow_line_reproduces_filter_shape(self) -> None:
        ideal = sideband_spectrum(0.0, 1e4, 0.0, 1e9, 1)  # delta-like line
        filt = FilterSpec(fwhm=500e6, scan_range=(-10e9, 10e9), n_points=2001)
        obs = filtered_spectrum(ideal, filt)
        expected = lorentzian_unit_area(obs.x, 0.0, 500e6)
        sel = np.abs(obs.x) < 3e9
        assert np.allclose(obs.y[sel], expected[sel], rtol=2e-2)

    def test_vanishing_filter_width_is_identity(self) -> None:
        ideal = sideband_spectrum(0.0, 643.6e6, 0.0, 1e9, 1)
        filt = FilterSpec(fwhm=1e3, scan_range=(float(ideal.x[0]), float(ideal.x[-1])),
                          n_points=len(ideal))
        obs = filtered_spectrum(ideal, filt)
        ref = np.interp(obs.x, ideal.x, ideal.y)
        assert np.max(np.abs(obs.y - ref)) / ideal.y.max() < 1e-3

    def test_counts_conserved_in_identity_limit(self) -> None:
        ideal = sideband_spectrum(0.0, 643.6e6, 0.8, 3.5e9, 4)
        filt = FilterSpec(fwhm=1e3, scan_range=(float(ideal.x[0]), float(ideal.x[-1])),
                          n_points=len(ideal))
        obs = filtered_spectrum(ideal, filt)
        assert np.trapezoid(obs.y, obs.x) == pytest.approx(
            np.trapezoid(ideal.y, ideal.x), rel=1e-6)

    def test_window_capture_matches_analytic_tails(self) -> None:
        # independent oracle: the filtered line is a Lorentzian of the summed
        # width, so the mass inside +/-W is (2/pi) atan(2W / fwhm_total); the
        # window is wide enough that input-truncation artifacts are ~1e-4
        line_fwhm, filter_fwhm, w = 1e9, 600e6, 500e9
        grid = np.linspace(-w, w, 20001)
        ideal = sideband_spectrum(0.0, line_fwhm, 0.0, 2e9, 1, grid=grid)
        filt = FilterSpec(fwhm=filter_fwhm, scan_range=(-w, w), n_points=20001)
        obs = filtered_spectrum(ideal, filt)
        total = line_fwhm + filter_fwhm
        expected = (2.0 / np.pi) * np.arctan(2.0 * w / total)
        assert np.trapezoid(obs.y, obs.x) == pytest.approx(expected, rel=1e-3)

    def test_linearity(self) -> None:
        grid = np.linspace(-20e9, 20e9, 4001)
        s1 = sideband_spectrum(0.0, 1e9, 0.0, 3.5e9, 1, grid=grid)
        s2 = sideband_spectrum(2e9, 2e9, 0.0, 3.5e9, 1, grid=grid)
        combo = Trace(grid, 2.0 * s1.y + 3.0 * s2.y)
        filt = FilterSpec(fwhm=600e6, scan_range=(-18e9, 18e9), n_points=1001)
        out_combo = filtered_spectrum(combo, filt)
        out_1 = filtered_spectrum(s1, filt)
        out_2 = filtered_spectrum(s2, filt)
        assert np.allclose(out_combo.y, 2.0 * out_1.y + 3.0 * out_2.y,
                           rtol=1e-10, atol=1e-10 * out_combo.y.max())

    def test_insufficient_padding_flagged(self) -> None:
        ideal = sideband_spectrum(9.5e9, 643.6e6, 0.0, 1e9, 1)
        filt = FilterSpec(fwhm=600e6, scan_range=(-10e9, 10e9), n_points=801)
        obs = filtered_spectrum(ideal, filt)
        assert "insufficient_padding" in obs.meta.warnings

    def test_filtered_comb_matches_numerical_route(self) -> None:
        # two independent paths: analytic width addition vs grid convolution
        filt = FilterSpec(fwhm=600e6, scan_range=(-25e9, 25e9), n_points=2001)
        ideal = sideband_spectrum(1e9, 643.6e6, 1.0, 3.53388e9, 4)
        numeric = filtered_spectrum(ideal, filt)
        analytic = filtered_comb(numeric.x, 1e9, 643.6e6, 1.0, 3.53388e9, 600e6)
        assert np.allclose(numeric.y, analytic, rtol=0, atol=3e-3 * analytic.max())


class TestPlBiasMap:
    FILT = FilterSpec(fwhm=600e6, scan_range=(-26e9, 26e9), n_points=1001)

    def test_dark_rows_are_zero(self) -> None:
        m = pl_bias_map(np.array([-0.07, 0.0, 0.07]), EMITTER, None, self.FILT)
        assert m.plateau_index.tolist() == [-1, 1, -1]
        assert np.all(m.counts[0] == 0.0)
        assert np.all(m.counts[2] == 0.0)
        assert m.counts[1].max() > 0.0

    def test_adjacent_rows_shift_rigidly(self) -> None:
        # lag of the max cross-correlation equals the Stark step; the grid
        # spacing is chosen so the expected shift is an integer lag
        filt = FilterSpec(fwhm=600e6, scan_range=(-26e9, 26e9), n_points=2001)
        dx = (filt.scan_range[1] - filt.scan_range[0]) / (filt.n_points - 1)
        dbias = 5 * dx / EMITTER.stark_slope
        m = pl_bias_map(np.array([0.0, dbias]), EMITTER, None, filt)
        a, b = m.counts[0], m.counts[1]
        lags = np.arange(-20, 21)
        scores = [np.dot(a, np.roll(b, -lag)) for lag in lags]
        assert lags[int(np.argmax(scores))] == 5

    def test_drive_adds_sidebands(self) -> None:
        drive = ModulationDrive(MODE.f0, MODE, delta_max=1.0)
        m_on = pl_bias_map(np.array([0.0]), EMITTER, drive, self.FILT)
        m_off = pl_bias_map(np.array([0.0]), EMITTER, None, self.FILT)
        # with drive on, weight moves from the carrier into sidebands
        j = int(np.argmax(m_off.counts[0]))
        assert m_on.counts[0][j] < m_off.counts[0][j]
        k = int(np.argmin(np.abs(m_on.frequency - (6.5e9 + MODE.f0))))
        assert m_on.counts[0][k] > m_off.counts[0][k]
