"""Synthetic corpus generator checks against its own ground truth."""

import numpy as np

from arousalkit.corpus import ArousalLevel, Modality
from arousalkit.synth import (
    HIGH_HR_BPM, LOW_HR_BPM, REALISTIC, synth_corpus, synth_ecg, synth_eda,
)


def test_synth_ecg_peak_count_tracks_heart_rate():
    counts, expected = [], []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        hr = float(rng.uniform(*LOW_HR_BPM))
        _, beats = synth_ecg(20.0, 256.0, hr, rng)
        counts.append(len(beats))
        expected.append(20.0 * hr / 60.0)
    assert abs(np.mean(counts) / np.mean(expected) - 1.0) < 0.05


def test_synth_ecg_deterministic_per_rng_state():
    x1, b1 = synth_ecg(5.0, 256.0, 70.0, np.random.default_rng(3))
    x2, b2 = synth_ecg(5.0, 256.0, 70.0, np.random.default_rng(3))
    np.testing.assert_array_equal(x1, x2)
    np.testing.assert_array_equal(b1, b2)


def test_synth_eda_events_inside_duration():
    _, onsets = synth_eda(30.0, 128.0, 8.0, np.random.default_rng(4))
    assert np.all(onsets >= 0) and np.all(onsets < 30.0)


def test_synth_corpus_structure():
    corpus, gt = synth_corpus(3, 4, 10.0, seed=5, dataset_id="DS")
    assert len(corpus) == 3 * 4 * 2  # two modalities per trial
    assert corpus.provenance == ("DS",)
    assert len(gt) == 12
    for key in gt:
        assert corpus.record(*key, Modality.ECG) is not None
        assert corpus.record(*key, Modality.EDA) is not None


def test_synth_corpus_labels_match_generator_params():
    corpus, gt = synth_corpus(4, 5, 10.0, seed=6)
    for key, truth in gt.items():
        rec = corpus.record(*key, Modality.ECG)
        if truth.true_arousal_level == ArousalLevel.HIGH:
            assert HIGH_HR_BPM[0] <= truth.hr_bpm <= HIGH_HR_BPM[1]
            assert rec.arousal_raw >= 5.0
        else:
            assert LOW_HR_BPM[0] <= truth.hr_bpm <= LOW_HR_BPM[1]
            assert rec.arousal_raw < 5.0


def test_realistic_profile_ranges_and_modulation():
    corpus, gt = synth_corpus(4, 6, 10.0, seed=9, **REALISTIC)
    for key, truth in gt.items():
        if truth.true_arousal_level == ArousalLevel.HIGH:
            lo, hi = REALISTIC["hr_high"]
            rate_lo, rate_hi = REALISTIC["scr_high"]
        else:
            lo, hi = REALISTIC["hr_low"]
            rate_lo, rate_hi = REALISTIC["scr_low"]
        assert lo <= truth.hr_bpm <= hi
        assert rate_lo <= truth.scr_rate_per_min <= rate_hi


def test_synth_ecg_width_and_t_wave_scales():
    rng = np.random.default_rng(0)
    wide, beats = synth_ecg(10.0, 256.0, 70.0, rng, noise_sd=0.0,
                            wander_amp=0.0, rr_jitter=0.0, qrs_width_scale=1.5)
    rng = np.random.default_rng(0)
    narrow, _ = synth_ecg(10.0, 256.0, 70.0, rng, noise_sd=0.0,
                          wander_amp=0.0, rr_jitter=0.0, qrs_width_scale=0.5)
    # wider bumps spend more samples above half the R amplitude
    assert np.sum(wide > 0.5) > np.sum(narrow > 0.5)
    rng = np.random.default_rng(0)
    flat_t, _ = synth_ecg(10.0, 256.0, 70.0, rng, noise_sd=0.0,
                          wander_amp=0.0, rr_jitter=0.0, t_wave_scale=0.1)
    rng = np.random.default_rng(0)
    tall_t, _ = synth_ecg(10.0, 256.0, 70.0, rng, noise_sd=0.0,
                          wander_amp=0.0, rr_jitter=0.0, t_wave_scale=1.5)
    assert tall_t.sum() > flat_t.sum()


def test_synth_corpus_has_both_classes():
    _, gt = synth_corpus(6, 6, 10.0, seed=7)
    levels = {t.true_arousal_level for t in gt.values()}
    assert levels == {ArousalLevel.LOW, ArousalLevel.HIGH}


def test_synth_corpus_seed_reproducibility():
    c1, g1 = synth_corpus(2, 2, 10.0, seed=8)
    c2, g2 = synth_corpus(2, 2, 10.0, seed=8)
    for key in g1:
        r1 = c1.record(*key, Modality.ECG)
        r2 = c2.record(*key, Modality.ECG)
        np.testing.assert_array_equal(r1.samples, r2.samples)
        np.testing.assert_array_equal(g1[key].r_peak_times,
                                      g2[key].r_peak_times)
