"""Hand-crafted feature extraction checks with independent oracles."""

import numpy as np
import pytest

from arousalkit import dsp, features
from arousalkit.errors import DataError
from arousalkit.synth import synth_eda


def _rr(intervals, start=0.0):
    intervals = np.asarray(intervals, dtype=float)
    onsets = start + np.concatenate([[0.0], np.cumsum(intervals[:-1])])
    return features.RrSeries(intervals=intervals, onset_times=onsets)


def test_rr_from_peaks_hand_case():
    peaks = dsp.PeakList(indices=np.array([0, 200, 456]), sampling_rate=256.0)
    rr = features.rr_from_peaks(peaks)
    np.testing.assert_allclose(rr.intervals, [0.78125, 1.0])


def test_rr_from_peaks_requires_two_peaks():
    peaks = dsp.PeakList(indices=np.array([5]), sampling_rate=256.0)
    with pytest.raises(DataError):
        features.rr_from_peaks(peaks)


def test_time_features_hand_arithmetic():
    vec = features.ecg_time_features(_rr([0.8, 0.86, 0.8]))
    diffs = [0.06, -0.06]
    assert vec.RMSSD == pytest.approx(np.sqrt(np.mean(np.square(diffs))))
    assert vec.NN50 == 2
    assert vec.PNN50 == pytest.approx(1.0)
    assert vec.RRmin == pytest.approx(0.8)
    assert vec.RRmax == pytest.approx(0.86)
    assert vec.RRdiff == pytest.approx(0.06)


def test_heart_rate_from_beat_count():
    # 12 beats in a 10-second window -> 72 bpm
    vec = features.ecg_time_features(_rr([0.8] * 11), window_seconds=10.0)
    assert vec.HR == pytest.approx(72.0)


def test_time_features_population_sd():
    iv = np.array([0.7, 0.8, 0.9, 1.0])
    vec = features.ecg_time_features(_rr(iv))
    assert vec.RRsd == pytest.approx(iv.std())  # population, not sample
    assert vec.RRcv == pytest.approx(iv.std() / iv.mean())


def _modulated_rr(mod_freq, n=240, base=0.8, depth=0.05, seed=0):
    rng = np.random.default_rng(seed)
    onsets = [0.0]
    intervals = []
    for _ in range(n):
        iv = base + depth * np.sin(2 * np.pi * mod_freq * onsets[-1])
        iv += 0.001 * rng.standard_normal()
        intervals.append(iv)
        onsets.append(onsets[-1] + iv)
    return features.RrSeries(intervals=np.array(intervals),
                             onset_times=np.array(onsets[:-1]))


def test_freq_features_respiratory_modulation_hf_dominant():
    vec = features.ecg_freq_features(_modulated_rr(0.25))
    assert vec.HF > vec.LF
    assert vec.HFnorm > 0.5


def test_freq_features_low_frequency_modulation_lf_dominant():
    vec = features.ecg_freq_features(_modulated_rr(0.1))
    assert vec.LF > vec.HF
    assert vec.LFnorm > 0.5


def test_freq_norms_sum_to_one():
    vec = features.ecg_freq_features(_modulated_rr(0.1, seed=3))
    assert vec.LFnorm + vec.HFnorm == pytest.approx(1.0, abs=1e-12)


def test_ecg_features_combines_domains():
    vec = features.ecg_features(_modulated_rr(0.25, seed=4))
    assert vec.HR > 0 and vec.TP > 0
    assert len(vec.as_array()) == 20


def test_scr_ideal_event_half_recovery():
    # instant rise at t=2 s to 1.0, exponential decay tau=2 s
    rate = 128.0
    t = np.arange(int(20.0 * rate)) / rate
    v = np.where(t >= 2.0, np.exp(-(t - 2.0) / 2.0), 0.0)
    events = features.eda_scr_events(dsp.TimeSeries(v, rate))
    assert len(events) == 1
    expected = 2.0 * np.log(2.0)
    assert events[0].half_recovery_time == pytest.approx(expected, rel=0.10)
    assert events[0].amplitude == pytest.approx(1.0, rel=0.05)


def test_scr_counts_well_separated_events():
    rate = 128.0
    t = np.arange(int(60.0 * rate)) / rate
    v = np.zeros_like(t)
    onsets = [5.0, 20.0, 35.0, 50.0]
    for t0 in onsets:
        dt = t - t0
        v += np.where(dt >= 0,
                      (1 - np.exp(-np.maximum(dt, 0) / 0.75))
                      * np.exp(-np.maximum(dt, 0) / 3.0), 0.0)
    ts = dsp.TimeSeries(v / v.max(), rate)
    vec = features.eda_features(ts)
    assert vec.num_scr == len(onsets)


def _synthetic_eda_features(scr_rate, seed):
    samples, onsets = synth_eda(60.0, 128.0, scr_rate,
                                np.random.default_rng(seed))
    ts = dsp.minmax_normalize(dsp.moving_average(
        dsp.lowpass(dsp.TimeSeries(samples, 128.0), 1.0), 100))
    return features.eda_features(ts), onsets


def test_eda_features_on_synthetic_trace():
    vec, onsets = _synthetic_eda_features(6.0, seed=5)
    # overlapping responses can merge, so detection may undercount but
    # should stay in the right ballpark and never overcount
    assert 0 < vec.num_scr <= len(onsets)
    assert vec.num_scr >= len(onsets) - 3
    assert len(vec.as_array()) == 32


def test_eda_scr_count_separates_event_rates():
    sparse, _ = _synthetic_eda_features(1.5, seed=6)
    dense, _ = _synthetic_eda_features(10.0, seed=6)
    assert dense.num_scr > sparse.num_scr


def test_eda_features_flat_signal():
    vec = features.eda_features(dsp.TimeSeries(np.full(1280, 0.5), 128.0))
    assert vec.num_scr == 0
    assert vec.amplitude_mean == 0.0


def test_feature_matrix_and_csv(tmp_path):
    vecs = [features.ecg_time_features(_rr([0.8, 0.9, 0.85])),
            features.ecg_time_features(_rr([0.7, 0.75, 0.8]))]
    mat = features.feature_matrix(vecs)
    assert mat.shape == (2, 20)
    path = tmp_path / "f.csv"
    features.write_feature_csv(path, vecs[0].names(), mat)
    lines = path.read_text().strip().splitlines()
    assert lines[0].split(",")[0] == "HR"
    assert len(lines) == 3


def test_feature_vector_dict_roundtrip():
    vec = features.ecg_time_features(_rr([0.8, 0.9, 0.85]))
    back = features.EcgFeatureVector.from_dict(vec.to_dict())
    np.testing.assert_array_equal(back.as_array(), vec.as_array())
