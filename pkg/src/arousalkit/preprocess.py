"""Record-to-window preprocessing chains for ECG and EDA.

ECG: Butterworth bandpass 5-15 Hz (zero phase) at the native rate, resample
to 256 Hz, min-max normalize, segment into 10-s windows of 2560 samples.

EDA: Butterworth low-pass 1 Hz, 100-sample centered moving average at the
native rate, resample to 128 Hz, min-max normalize, segment into 10-s
windows of 1280 samples.

Aligned ECG/EDA windows from the same trial are paired by window index;
each pair carries the trial's binarized arousal label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dsp
from .corpus import (
    ArousalLevel,
    Corpus,
    Modality,
    SignalRecord,
    WindowPair,
    binarize_arousal,
    rescale_arousal,
)
from .errors import DataError

ECG_BAND_HZ = (5.0, 15.0)
EDA_CUTOFF_HZ = 1.0
EDA_SMOOTH_SAMPLES = 100
ECG_TARGET_RATE = 256.0
EDA_TARGET_RATE = 128.0
WINDOW_SECONDS = 10.0


@dataclass(frozen=True)
class PreprocessConfig:
    ecg_band: tuple = ECG_BAND_HZ
    eda_cutoff: float = EDA_CUTOFF_HZ
    eda_smooth: int = EDA_SMOOTH_SAMPLES
    ecg_rate: float = ECG_TARGET_RATE
    eda_rate: float = EDA_TARGET_RATE
    window_seconds: float = WINDOW_SECONDS

    def __post_init__(self):
        low, high = self.ecg_band
        if not 0 < low < high:
            raise DataError(f"invalid ECG band {self.ecg_band}")
        if self.eda_cutoff <= 0 or self.window_seconds <= 0:
            raise DataError("cutoff and window length must be positive")


def preprocess_ecg(record: SignalRecord, cfg: PreprocessConfig = None):
    """Windows of conditioned ECG, each of length window_seconds * ecg_rate."""
    cfg = cfg or PreprocessConfig()
    if record.modality != Modality.ECG:
        raise DataError(f"expected ECG record, got {record.modality}")
    ts = dsp.TimeSeries(np.asarray(record.samples, dtype=float), record.sampling_rate)
    ts = dsp.butterworth_bandpass_zero_phase(ts, *cfg.ecg_band)
    ts = dsp.resample(ts, cfg.ecg_rate)
    ts = dsp.minmax_normalize(ts)
    return dsp.window(ts, cfg.window_seconds)


def preprocess_eda(record: SignalRecord, cfg: PreprocessConfig = None):
    """Windows of conditioned EDA, each of length window_seconds * eda_rate."""
    cfg = cfg or PreprocessConfig()
    if record.modality != Modality.EDA:
        raise DataError(f"expected EDA record, got {record.modality}")
    ts = dsp.TimeSeries(np.asarray(record.samples, dtype=float), record.sampling_rate)
    ts = dsp.lowpass(ts, cfg.eda_cutoff)
    ts = dsp.moving_average(ts, cfg.eda_smooth)
    ts = dsp.resample(ts, cfg.eda_rate)
    ts = dsp.minmax_normalize(ts)
    return dsp.window(ts, cfg.window_seconds)


def windows_for_trial(ecg_rec: SignalRecord, eda_rec: SignalRecord,
                      cfg: PreprocessConfig = None):
    """Aligned WindowPairs for one trial; the shorter modality truncates."""
    cfg = cfg or PreprocessConfig()
    if ecg_rec.trial_key != eda_rec.trial_key:
        raise DataError(
            f"modality records from different trials: "
            f"{ecg_rec.trial_key} vs {eda_rec.trial_key}"
        )
    if (ecg_rec.arousal_raw, ecg_rec.scale_min, ecg_rec.scale_max) != (
            eda_rec.arousal_raw, eda_rec.scale_min, eda_rec.scale_max):
        raise DataError(f"inconsistent arousal rating for trial {ecg_rec.trial_key}")
    norm = rescale_arousal(ecg_rec.arousal_raw, ecg_rec.scale_min, ecg_rec.scale_max)
    label = binarize_arousal(norm)
    ecg_windows = preprocess_ecg(ecg_rec, cfg)
    eda_windows = preprocess_eda(eda_rec, cfg)
    pairs = []
    for i in range(min(len(ecg_windows), len(eda_windows))):
        pairs.append(WindowPair(
            key=ecg_rec.trial_key + (i,),
            ecg=np.asarray(ecg_windows[i]),
            eda=np.asarray(eda_windows[i]),
            label=label,
            arousal_norm=norm,
        ))
    return pairs


def preprocess_corpus(corpus: Corpus, cfg: PreprocessConfig = None):
    """All WindowPairs of a corpus, in trial order.

    Trials missing either modality are skipped.
    """
    cfg = cfg or PreprocessConfig()
    by_key = {rec.key: rec for rec in corpus.records}
    pairs = []
    for trial in corpus.trial_keys():
        ecg_rec = by_key.get(trial + (Modality.ECG,))
        eda_rec = by_key.get(trial + (Modality.EDA,))
        if ecg_rec is None or eda_rec is None:
            continue
        pairs.extend(windows_for_trial(ecg_rec, eda_rec, cfg))
    return pairs


def pair_matrices(pairs):
    """Stack pairs into (ecg (n,2560,1), eda (n,1280,1), labels (n,), keys)."""
    if not pairs:
        raise DataError("no window pairs to stack")
    ecg = np.stack([p.ecg for p in pairs])[:, :, None].astype(np.float32)
    eda = np.stack([p.eda for p in pairs])[:, :, None].astype(np.float32)
    y = np.array([1 if p.label == ArousalLevel.HIGH else 0 for p in pairs],
                 dtype=np.int64)
    keys = [p.key for p in pairs]
    return ecg, eda, y, keys
