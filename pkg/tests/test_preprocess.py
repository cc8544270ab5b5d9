"""Signal conditioning and windowing pipeline checks."""

import numpy as np
import pytest

from arousalkit.corpus import Modality, SignalRecord
from arousalkit.errors import DataError
from arousalkit.preprocess import (
    PreprocessConfig, pair_matrices, preprocess_corpus, preprocess_ecg,
    preprocess_eda, windows_for_trial,
)
from arousalkit.synth import synth_corpus


def _corpus(n_subjects=2, trials=2, duration=25.0, seed=0):
    corpus, _ = synth_corpus(n_subjects, trials, duration, seed=seed)
    return corpus


def _records(corpus):
    key = corpus.trial_keys()[0]
    return (corpus.record(*key, Modality.ECG), corpus.record(*key, Modality.EDA))


def test_preprocess_ecg_output_contract():
    ecg_rec, _ = _records(_corpus())
    windows = preprocess_ecg(ecg_rec)
    assert len(windows) == 2
    for w in windows:
        assert len(w) == 2560  # 10 s at 256 Hz
        assert w.min() >= 0.0 and w.max() <= 1.0


def test_preprocess_eda_output_contract():
    _, eda_rec = _records(_corpus())
    windows = preprocess_eda(eda_rec)
    assert len(windows) == 2
    for w in windows:
        assert len(w) == 1280  # 10 s at 128 Hz
        assert w.min() >= 0.0 and w.max() <= 1.0


def test_preprocess_resamples_foreign_rates():
    rng = np.random.default_rng(1)
    rec = SignalRecord(
        dataset_id="D", subject_id="s", trial_id="t", modality=Modality.ECG,
        sampling_rate=500.0, samples=tuple(rng.standard_normal(5000)),
        arousal_raw=5.0, scale_min=1.0, scale_max=9.0)
    windows = preprocess_ecg(rec)
    assert len(windows[0]) == 2560  # resampled to 256 Hz before windowing


def test_windows_for_trial_counts():
    corpus = _corpus(duration=25.0)
    ecg_rec, eda_rec = _records(corpus)
    pairs = windows_for_trial(ecg_rec, eda_rec)
    assert len(pairs) == 2  # floor(25 / 10)
    for i, pair in enumerate(pairs):
        assert pair.ecg.shape == (2560,)
        assert pair.eda.shape == (1280,)
        assert pair.key[3] == i


def test_window_pair_label_follows_rating():
    from arousalkit.corpus import ArousalLevel

    corpus = _corpus()
    pairs = preprocess_corpus(corpus)
    for pair in pairs:
        expected = (ArousalLevel.HIGH if pair.arousal_norm >= 5.0
                    else ArousalLevel.LOW)
        assert pair.label == expected


def test_preprocess_corpus_counts():
    corpus = _corpus(n_subjects=3, trials=2, duration=25.0)
    pairs = preprocess_corpus(corpus)
    assert len(pairs) == 3 * 2 * 2


def test_pair_matrices_shapes_and_dtype():
    pairs = preprocess_corpus(_corpus())
    ecg, eda, y, keys = pair_matrices(pairs)
    assert ecg.shape == (len(pairs), 2560, 1)
    assert eda.shape == (len(pairs), 1280, 1)
    assert ecg.dtype == np.float32 and eda.dtype == np.float32
    assert y.shape == (len(pairs),)
    assert keys == [p.key for p in pairs]


def test_window_length_pinned_by_architecture():
    # window sizes are pinned to the network input lengths (2560/1280);
    # a config producing different window sizes is rejected
    cfg = PreprocessConfig(window_seconds=5.0)
    corpus = _corpus(duration=25.0)
    ecg_rec, eda_rec = _records(corpus)
    with pytest.raises(DataError):
        windows_for_trial(ecg_rec, eda_rec, cfg)


def test_config_validation():
    with pytest.raises(DataError):
        PreprocessConfig(ecg_band=(15.0, 5.0))
    with pytest.raises(DataError):
        PreprocessConfig(window_seconds=0.0)


def test_preprocess_deterministic():
    corpus = _corpus(seed=5)
    p1 = preprocess_corpus(corpus)
    p2 = preprocess_corpus(corpus)
    for a, b in zip(p1, p2):
        np.testing.assert_array_equal(a.ecg, b.ecg)
        np.testing.assert_array_equal(a.eda, b.eda)
