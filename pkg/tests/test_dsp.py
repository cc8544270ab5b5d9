"""Filtering, resampling, windowing, QRS detection and periodogram checks."""

import numpy as np
import pytest

from arousalkit import dsp
from arousalkit.errors import DataError
from arousalkit.synth import synth_ecg


def _sine(freq, duration_s=20.0, rate=256.0, amplitude=1.0, phase=0.0):
    t = np.arange(int(duration_s * rate)) / rate
    return dsp.TimeSeries(amplitude * np.sin(2 * np.pi * freq * t + phase), rate)


def _steady(ts, margin_s=2.0):
    lo = int(margin_s * ts.sampling_rate)
    return ts.values[lo:-lo]


def test_bandpass_passes_in_band_sinusoid():
    x = _sine(10.0)
    y = dsp.butterworth_bandpass_zero_phase(x, 5.0, 15.0)
    xin, yout = _steady(x), _steady(y)
    atten = np.sqrt(np.mean(yout ** 2)) / np.sqrt(np.mean(xin ** 2))
    assert atten > 0.95
    # zero-phase: peak positions coincide
    lag = np.argmax(np.correlate(yout, xin, "full")) - (len(xin) - 1)
    assert abs(lag) <= 1


def test_bandpass_rejects_baseline_wander():
    x = _sine(0.2, duration_s=60.0)
    y = dsp.butterworth_bandpass_zero_phase(x, 5.0, 15.0)
    ratio = np.sqrt(np.mean(_steady(y, 5.0) ** 2)) / np.sqrt(
        np.mean(_steady(x, 5.0) ** 2))
    assert ratio < 0.1


def test_lowpass_rejects_fast_component():
    x = _sine(10.0)
    y = dsp.lowpass(x, 1.0)
    ratio = np.sqrt(np.mean(_steady(y) ** 2)) / np.sqrt(np.mean(_steady(x) ** 2))
    assert ratio < 0.05


def test_lowpass_preserves_slow_component():
    rate = 128.0
    t = np.arange(int(60.0 * rate)) / rate
    slow = np.sin(2 * np.pi * 0.05 * t)
    x = dsp.TimeSeries(slow + np.sin(2 * np.pi * 10.0 * t), rate)
    y = dsp.lowpass(x, 1.0)
    lo = int(5.0 * rate)
    resid = y.values[lo:-lo] - slow[lo:-lo]
    assert np.sqrt(np.mean(resid ** 2)) < 0.05 * np.sqrt(np.mean(slow ** 2))


def test_moving_average_hand_case():
    x = dsp.TimeSeries(np.array([0.0, 0.0, 3.0, 0.0, 0.0]), 1.0)
    y = dsp.moving_average(x, 3)
    np.testing.assert_allclose(y.values, [0.0, 1.0, 1.0, 1.0, 0.0])


def test_moving_average_preserves_length_and_rate():
    x = dsp.TimeSeries(np.arange(100, dtype=float), 50.0)
    y = dsp.moving_average(x, 7)
    assert len(y) == 100 and y.sampling_rate == 50.0


def test_minmax_normalize_range():
    x = dsp.TimeSeries(np.array([-3.0, 1.0, 5.0]), 1.0)
    y = dsp.minmax_normalize(x)
    np.testing.assert_allclose(y.values, [0.0, 0.5, 1.0])


def test_minmax_normalize_constant_signal():
    y = dsp.minmax_normalize(dsp.TimeSeries(np.full(10, 2.0), 1.0))
    assert np.all(np.isfinite(y.values))


def test_resample_preserves_frequency():
    x = _sine(2.0, duration_s=10.0, rate=500.0)
    y = dsp.resample(x, 256.0)
    assert y.sampling_rate == 256.0
    # fit amplitude at 2 Hz on the resampled interior
    t = np.arange(len(y)) / y.sampling_rate
    lo, hi = int(256), len(y) - int(256)
    basis = np.column_stack([np.sin(2 * np.pi * 2.0 * t[lo:hi]),
                             np.cos(2 * np.pi * 2.0 * t[lo:hi])])
    coef, *_ = np.linalg.lstsq(basis, y.values[lo:hi], rcond=None)
    assert abs(np.hypot(*coef) - 1.0) < 0.01


def test_window_counts():
    x = dsp.TimeSeries(np.zeros(int(25.0 * 256.0)), 256.0)
    wins = dsp.window(x, 10.0)
    assert len(wins) == 2
    assert all(len(w) == 2560 for w in wins)


def test_window_too_short_returns_empty():
    x = dsp.TimeSeries(np.zeros(100), 256.0)
    assert dsp.window(x, 10.0) == []


def test_pan_tompkins_clean_60bpm():
    rng = np.random.default_rng(0)
    samples, truth = synth_ecg(10.0, 256.0, 60.0, rng, noise_sd=0.0,
                               wander_amp=0.0, rr_jitter=0.0)
    filt = dsp.butterworth_bandpass_zero_phase(
        dsp.TimeSeries(samples, 256.0), 5.0, 15.0)
    peaks = dsp.pan_tompkins_rpeaks(filt)
    assert abs(len(peaks) - len(truth)) <= 1
    for t in peaks.times:
        assert np.min(np.abs(truth - t)) < 0.020


def test_pan_tompkins_search_back_recovers_small_beat():
    rng = np.random.default_rng(1)
    samples, truth = synth_ecg(10.0, 256.0, 60.0, rng, noise_sd=0.0,
                               wander_amp=0.0, rr_jitter=0.0)
    # halve the amplitude of one interior beat
    v = samples.copy()
    beat = truth[len(truth) // 2]
    lo = int((beat - 0.15) * 256.0)
    hi = int((beat + 0.15) * 256.0)
    v[lo:hi] *= 0.5
    filt = dsp.butterworth_bandpass_zero_phase(
        dsp.TimeSeries(v, 256.0), 5.0, 15.0)
    peaks = dsp.pan_tompkins_rpeaks(filt)
    assert np.min(np.abs(peaks.times - beat)) < 0.050


def test_pan_tompkins_refractory_no_double_detection():
    rng = np.random.default_rng(2)
    samples, _ = synth_ecg(10.0, 256.0, 90.0, rng, noise_sd=0.0,
                           wander_amp=0.0, rr_jitter=0.0)
    filt = dsp.butterworth_bandpass_zero_phase(
        dsp.TimeSeries(samples, 256.0), 5.0, 15.0)
    peaks = dsp.pan_tompkins_rpeaks(filt)
    assert np.all(np.diff(peaks.times) > dsp.REFRACTORY_S)


def test_lomb_recovers_sinusoid_frequency():
    rng = np.random.default_rng(3)
    times = np.sort(rng.uniform(0.0, 120.0, 200))
    values = np.sin(2 * np.pi * 0.1 * times)
    freqs = np.linspace(0.01, 0.5, 400)
    spec = dsp.lomb_periodogram(times, values, freqs)
    peak = freqs[np.argmax(spec.power)]
    nearest = freqs[np.argmin(np.abs(freqs - 0.1))]
    assert peak == pytest.approx(nearest)


def test_lomb_white_noise_has_no_dominant_line():
    freqs = np.linspace(0.01, 0.5, 100)
    fractions = []
    for seed in range(50):
        rng = np.random.default_rng(seed)
        times = np.sort(rng.uniform(0.0, 60.0, 150))
        values = rng.standard_normal(150)
        spec = dsp.lomb_periodogram(times, values, freqs)
        fractions.append(spec.power.max() / spec.power.sum())
    assert np.mean(fractions) < 0.2


def test_lomb_even_sampling_matches_periodogram_peak():
    # uniformly sampled case: should agree with an FFT periodogram argmax
    rate = 4.0
    t = np.arange(0, 64.0, 1 / rate)
    v = np.sin(2 * np.pi * 0.25 * t) + 0.3 * np.sin(2 * np.pi * 0.8 * t)
    freqs = np.linspace(0.05, 1.5, 300)
    spec = dsp.lomb_periodogram(t, v, freqs)
    assert abs(freqs[np.argmax(spec.power)] - 0.25) < 0.02


def test_band_power_sub_band_bounded_by_total():
    rng = np.random.default_rng(4)
    times = np.sort(rng.uniform(0.0, 100.0, 150))
    values = rng.standard_normal(150)
    freqs = np.linspace(0.01, 0.4, 200)
    spec = dsp.lomb_periodogram(times, values, freqs)
    total = spec.band_power(0.01, 0.4)
    low = spec.band_power(0.01, 0.15)
    high = spec.band_power(0.15, 0.4)
    assert 0.0 < low < total and 0.0 < high < total
    # the two halves together account for nearly all the total (the only
    # shortfall is the trapezoid segment straddling the 0.15 Hz boundary)
    assert (low + high) / total > 0.95


def test_hrv_frequency_grid_resolution():
    grid = dsp.hrv_frequency_grid(120.0)
    assert grid[0] > 0.0
    assert grid[-1] <= 0.5 + 1e-12
    assert np.all(np.diff(grid) > 0)


def test_timeseries_validation():
    with pytest.raises(DataError):
        dsp.TimeSeries(np.array([1.0, np.nan]), 10.0)
    with pytest.raises(DataError):
        dsp.TimeSeries(np.array([1.0, 2.0]), 0.0)
