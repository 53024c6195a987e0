"""MFDFA tests: windowed detrending, scaling estimates, scale-loss rules."""

import math

import numpy as np
import pytest

from pleaders import (
    DegenerateDataError,
    InvalidParameterError,
    ScaleTooSmallError,
    dfa_exponent,
    dyadic_scales,
    fine_scales_lost,
    fluctuations,
    mfdfa_analyze,
    profile,
)
from pleaders.formalism import DEFAULT_Q_GRID
from pleaders.mfdfa import FluctuationTable, min_scale


class TestProfile:
    def test_constant_signal_gives_zero_profile(self):
        assert np.abs(profile(np.full(128, 4.2))).max() < 1e-12

    def test_alternating_signal_bounded_by_one(self):
        x = np.tile([1.0, -1.0], 64)
        assert np.abs(profile(x)).max() <= 1.0 + 1e-12

    def test_white_noise_dfa2_slope(self, rng):
        # classical DFA self-check: white noise has exponent 1/2.  Scales
        # start at the j1 = 4 analysis default: windows barely larger than
        # the fit order carry the well-known small-window distortion.
        slopes = []
        for _ in range(8):
            x = rng.standard_normal(2 ** 14)
            table = fluctuations(x, dyadic_scales(x.size, 2, j1=4), degree=2,
                                 integrate=True)
            slopes.append(dfa_exponent(table))
        assert abs(np.mean(slopes) - 0.5) < 0.05


class TestFluctuations:
    def test_exact_polynomial_gives_zero_residuals(self):
        t = np.linspace(0, 1, 2 ** 12)
        x = 3.0 - 2.0 * t + 0.7 * t ** 2
        table = fluctuations(x, [8, 16, 64], degree=2, integrate=False)
        for vals in table.values:
            assert vals.max() < 1e-9

    def test_degree_zero_fit_is_window_std(self, rng):
        # a degree-0 fit subtracts the window mean, so T is the population
        # standard deviation of each window
        x = rng.standard_normal(256)
        a = 64  # largest admissible scale (n/4)
        table = fluctuations(x, [a], degree=0, integrate=False)
        for k, got in enumerate(table.values[0]):
            assert got == pytest.approx(x[k * a:(k + 1) * a].std(), abs=1e-12)

    def test_sine_curvature_residual(self):
        # far below the period a linear fit leaves the Taylor curvature
        # term: T scales like a**2 with the local |f''|/2 prefactor
        n = 2 ** 13
        t = np.arange(n, dtype=float)
        omega = 2 * math.pi / n
        x = np.sin(omega * t)
        table = fluctuations(x, [16, 32], degree=1, integrate=False)
        t16, t32 = table.values[0], table.values[1]
        # quadratic scaling in a; the residual tracks |f''|, so skip windows
        # where sin (and with it the curvature) changes sign
        ratio = t32 / t16[::2]
        mid = np.abs(np.sin(omega * (32.0 * np.arange(t32.size) + 16.0)))
        keep = mid > 0.5
        assert np.allclose(ratio[keep], 4.0, rtol=0.08)
        # Taylor-residual oracle on a handful of windows: the RMS residual
        # of the best linear fit of (1/2) f'' (t - t0)**2 over the window
        a = 16
        u = (np.arange(a) - (a - 1) / 2.0) / a
        design = np.vander(u, 2, increasing=True)
        for k in (10, 100, 200):
            tm = (k + 0.5) * a
            curv = -(omega ** 2) * math.sin(omega * tm)
            quad = 0.5 * curv * (a * u) ** 2
            coef, *_ = np.linalg.lstsq(design, quad, rcond=None)
            oracle = math.sqrt(((quad - design @ coef) ** 2).mean())
            assert table.values[0][k] == pytest.approx(oracle, rel=0.15)

    def test_scale_below_minimum_rejected(self):
        x = np.random.default_rng(0).standard_normal(512)
        with pytest.raises(ScaleTooSmallError):
            fluctuations(x, [5], degree=4, integrate=False)
        fluctuations(x, [6], degree=4, integrate=False)  # N_P + 2 is fine

    def test_scale_above_quarter_length_rejected(self):
        x = np.random.default_rng(0).standard_normal(512)
        with pytest.raises(InvalidParameterError):
            fluctuations(x, [256], degree=1, integrate=False)

    def test_polynomial_trend_absorbed_exactly(self, rng):
        # adding a degree <= N_P trend leaves every T unchanged
        x = rng.standard_normal(2 ** 12)
        t = np.linspace(0, 1, x.size)
        trend = 5.0 - 8.0 * t + 3.0 * t ** 2 - 1.5 * t ** 3
        scales = dyadic_scales(x.size, 3)
        t0 = fluctuations(x, scales, degree=3, integrate=False)
        t1 = fluctuations(x + trend, scales, degree=3, integrate=False)
        for v0, v1 in zip(t0.values, t1.values):
            assert np.abs(v0 - v1).max() < 1e-9


class TestScaleLoss:
    @pytest.mark.parametrize("degree,lost", [(0, 0), (1, 1), (2, 1), (3, 2),
                                             (4, 2)])
    def test_fine_scales_lost_formula(self, degree, lost):
        assert fine_scales_lost(degree) == lost
        # the formula agrees with the admissibility predicate: the smallest
        # admissible dyadic scale is 2**(lost + 1)
        a_min_dyadic = 2 ** (lost + 1)
        assert a_min_dyadic >= min_scale(degree)
        assert a_min_dyadic // 2 < min_scale(degree)

    def test_dyadic_scale_list(self):
        scales = dyadic_scales(2 ** 12, degree=4)
        assert scales[0] == 8 and scales[-1] == 2 ** 10


def monofractal_table(hurst, n=2 ** 12):
    scales = 2 ** np.arange(2, 9)
    values = [np.full(n // a, float(a) ** hurst) for a in scales]
    return FluctuationTable(scales=scales, values=values, degree=1,
                            integrated=False, n=n)


class TestMfdfaAnalyze:
    def test_monofractal_exact(self):
        h = 0.62
        est, spec = mfdfa_analyze(monofractal_table(h), DEFAULT_Q_GRID)
        assert np.abs(est.zeta - DEFAULT_Q_GRID * h).max() < 1e-10
        assert np.abs(spec.h - h).max() < 1e-10
        assert np.abs(spec.L - 1.0).max() < 1e-10

    def test_zeta_zero_is_exactly_zero(self, rng):
        x = rng.standard_normal(2 ** 12)
        table = fluctuations(x, dyadic_scales(x.size, 1), degree=1)
        est, _ = mfdfa_analyze(table, DEFAULT_Q_GRID)
        iq = int(np.flatnonzero(DEFAULT_Q_GRID == 0.0)[0])
        assert est.zeta[iq] == 0.0

    def test_dfa_consistency_identity(self, rng):
        x = rng.standard_normal(2 ** 12)
        table = fluctuations(x, dyadic_scales(x.size, 1), degree=1)
        est, _ = mfdfa_analyze(table, np.array([2.0]))
        assert abs(dfa_exponent(table) - est.zeta[0] / 2.0) < 1e-12

    def test_zero_fluctuation_with_negative_q_rejected(self):
        table = monofractal_table(0.5)
        table.values[2][4] = 0.0
        with pytest.raises(DegenerateDataError):
            mfdfa_analyze(table, np.array([-2.0]))

    def test_h_at_q_zero_is_geometric_mean_slope(self, rng):
        # the q = 0 spectrum point carries the geometric-mean exponent
        x = rng.standard_normal(2 ** 12)
        table = fluctuations(x, dyadic_scales(x.size, 1), degree=1)
        est, spec = mfdfa_analyze(table, DEFAULT_Q_GRID)
        js = np.log2(table.scales.astype(float))
        from pleaders import regression_weights
        w = regression_weights(int(js[0]), int(js[-1]), table.n_windows(),
                               js=js)
        geo = np.array([np.log2(v).mean() for v in table.values])
        iq = int(np.flatnonzero(DEFAULT_Q_GRID == 0.0)[0])
        assert spec.h[iq] == pytest.approx(float(w.w @ geo), abs=1e-12)
