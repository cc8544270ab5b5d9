"""Hand-crafted ECG and EDA feature extraction.

The ECG arm derives 12 time-domain and 8 frequency-domain descriptors from
RR intervals; the EDA arm derives 30 time-domain descriptors from detected
SCR events plus tonic-level statistics, and 2 frequency-domain descriptors
from the periodogram.  These vectors serve as the comparison arm against the
learned latent representations.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, asdict

import numpy as np
from scipy import signal as sps

from .dsp import PeakList, Spectrum, TimeSeries, hrv_frequency_grid, lomb_periodogram
from .errors import DataError

# SCR detection constants (normalized units)
SCR_MIN_PROMINENCE = 0.01
SCR_MIN_SEPARATION_S = 0.5

NN50_THRESHOLD_S = 0.050

# HRV band edges in Hz
ULF_BAND = (0.0, 0.003)
VLF_BAND = (0.003, 0.04)
LF_BAND = (0.04, 0.15)
HF_BAND = (0.15, 0.4)
TP_BAND = (0.0, 0.4)
LMHF_BAND = (0.08, 0.15)


@dataclass(frozen=True)
class RrSeries:
    """RR intervals in seconds with the onset time of each interval."""

    intervals: np.ndarray
    onset_times: np.ndarray

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=float)
        ot = np.asarray(self.onset_times, dtype=float)
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "onset_times", ot)
        if len(iv) != len(ot):
            raise DataError("intervals and onset_times differ in length")
        if np.any(iv <= 0):
            raise DataError("RR intervals must be positive")

    def __len__(self):
        return len(self.intervals)

    @property
    def span_s(self) -> float:
        """Total time covered from the first peak to the last."""
        return float(self.onset_times[-1] + self.intervals[-1] - self.onset_times[0])


@dataclass
class EcgFeatureVector:
    """20 named HRV descriptors (12 time domain, 8 frequency domain)."""

    HR: float = 0.0
    RRmin: float = 0.0
    RRmax: float = 0.0
    RRdiff: float = 0.0
    RRmean: float = 0.0
    RRsd: float = 0.0
    RRcv: float = 0.0
    RMSSD: float = 0.0
    SDSD: float = 0.0
    NN50: float = 0.0
    PNN50: float = 0.0
    ULF: float = 0.0
    VLF: float = 0.0
    LF: float = 0.0
    HF: float = 0.0
    TP: float = 0.0
    LFnorm: float = 0.0
    HFnorm: float = 0.0
    LF_HF: float = 0.0
    LMHF: float = 0.0

    @classmethod
    def names(cls):
        return [f.name for f in fields(cls)]

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.names()], dtype=float)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


_EDA_COMPONENTS = ("rise_time", "half_recovery_time", "amplitude", "area", "prominence")
_EDA_STATS = ("mean", "sd", "min", "max", "sum")


def _eda_field_names():
    names = [f"{c}_{s}" for c in _EDA_COMPONENTS for s in _EDA_STATS]
    names += ["num_scr", "scl_mean", "scl_sd", "mav1diff_scl", "mav2diff_scl",
              "tp", "psd_mean"]
    return names


@dataclass
class EdaFeatureVector:
    """32 named EDA descriptors: 5 stats x 5 SCR components, tonic-level
    statistics, and two periodogram summaries."""

    rise_time_mean: float = 0.0
    rise_time_sd: float = 0.0
    rise_time_min: float = 0.0
    rise_time_max: float = 0.0
    rise_time_sum: float = 0.0
    half_recovery_time_mean: float = 0.0
    half_recovery_time_sd: float = 0.0
    half_recovery_time_min: float = 0.0
    half_recovery_time_max: float = 0.0
    half_recovery_time_sum: float = 0.0
    amplitude_mean: float = 0.0
    amplitude_sd: float = 0.0
    amplitude_min: float = 0.0
    amplitude_max: float = 0.0
    amplitude_sum: float = 0.0
    area_mean: float = 0.0
    area_sd: float = 0.0
    area_min: float = 0.0
    area_max: float = 0.0
    area_sum: float = 0.0
    prominence_mean: float = 0.0
    prominence_sd: float = 0.0
    prominence_min: float = 0.0
    prominence_max: float = 0.0
    prominence_sum: float = 0.0
    num_scr: float = 0.0
    scl_mean: float = 0.0
    scl_sd: float = 0.0
    mav1diff_scl: float = 0.0
    mav2diff_scl: float = 0.0
    tp: float = 0.0
    psd_mean: float = 0.0

    @classmethod
    def names(cls):
        return [f.name for f in fields(cls)]

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.names()], dtype=float)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


assert EdaFeatureVector.names() == _eda_field_names()


@dataclass(frozen=True)
class ScrEvent:
    onset_t: float
    peak_t: float
    amplitude: float
    rise_time: float
    half_recovery_time: float | None
    area: float
    prominence: float


def rr_from_peaks(peaks: PeakList) -> RrSeries:
    """RR intervals between consecutive detected R peaks."""
    if len(peaks) < 2:
        raise DataError("insufficient beats: need at least 2 R peaks")
    times = peaks.times
    return RrSeries(intervals=np.diff(times), onset_times=times[:-1])


def ecg_time_features(rr: RrSeries, window_seconds: float = None) -> EcgFeatureVector:
    """12 time-domain HRV descriptors.

    HR uses the beat count over the window length; SD statistics are
    population SDs; NN50 counts successive differences above 50 ms.
    """
    if len(rr) == 0:
        raise DataError("empty RR series")
    if window_seconds is None:
        window_seconds = rr.span_s
    iv = rr.intervals
    beats = len(iv) + 1
    out = EcgFeatureVector()
    out.HR = 60.0 * beats / window_seconds
    out.RRmin = float(iv.min())
    out.RRmax = float(iv.max())
    out.RRdiff = out.RRmax - out.RRmin
    out.RRmean = float(iv.mean())
    out.RRsd = float(iv.std())
    out.RRcv = out.RRsd / out.RRmean if out.RRmean > 0 else 0.0
    if len(iv) >= 2:
        d = np.diff(iv)
        out.RMSSD = float(np.sqrt(np.mean(d ** 2)))
        out.SDSD = float(d.std())
        out.NN50 = float(np.sum(np.abs(d) > NN50_THRESHOLD_S))
        out.PNN50 = out.NN50 / len(d)
    return out


def ecg_freq_features(rr: RrSeries, out: EcgFeatureVector = None) -> EcgFeatureVector:
    """8 frequency-domain HRV descriptors from the Lomb periodogram of the
    RR series.  LF/HF ratios degenerate to 0 when HF power is zero."""
    if len(rr) < 4:
        raise DataError("need at least 4 RR intervals for spectral features")
    if out is None:
        out = EcgFeatureVector()
    grid = hrv_frequency_grid(rr.span_s, f_max=TP_BAND[1])
    spec = lomb_periodogram(rr.onset_times, rr.intervals, grid)
    out.ULF = spec.band_power(*ULF_BAND)
    out.VLF = spec.band_power(*VLF_BAND)
    out.LF = spec.band_power(*LF_BAND)
    out.HF = spec.band_power(*HF_BAND)
    out.TP = spec.band_power(*TP_BAND)
    lf, hf = out.LF, out.HF
    if lf + hf > 0:
        out.LFnorm = lf / (lf + hf)
        out.HFnorm = hf / (lf + hf)
    if hf > 0:
        out.LF_HF = lf / hf
        out.LMHF = spec.band_power(*LMHF_BAND) / hf
    return out


def ecg_features(rr: RrSeries, window_seconds: float = None) -> EcgFeatureVector:
    """Full 20-descriptor ECG feature vector."""
    out = ecg_time_features(rr, window_seconds)
    if len(rr) >= 4:
        ecg_freq_features(rr, out)
    return out


def eda_scr_events(eda: TimeSeries) -> list:
    """Detect SCR events on a preprocessed (low-pass, smoothed, normalized)
    EDA trace.

    Peaks are local maxima with prominence >= 0.01 normalized units and at
    least 0.5 s separation; the onset is the nearest preceding local
    minimum.  Half-recovery time is absent when the signal does not fall to
    half amplitude before the next onset or the window end.
    """
    v = eda.values
    rate = eda.sampling_rate
    distance = max(1, int(round(SCR_MIN_SEPARATION_S * rate)))
    peaks, props = sps.find_peaks(v, prominence=SCR_MIN_PROMINENCE, distance=distance)
    events = []
    for i, p in enumerate(peaks):
        # walk downhill to the nearest preceding local minimum
        onset = p
        while onset > 0 and v[onset - 1] < v[onset]:
            onset -= 1
        onset_val = v[onset]
        amplitude = v[p] - onset_val
        seg_end = peaks[i + 1] if i + 1 < len(peaks) else len(v)
        if i + 1 < len(peaks):
            nxt = peaks[i + 1]
            while nxt > p and v[nxt - 1] < v[nxt]:
                nxt -= 1
            seg_end = max(nxt, p + 1)
        half_level = onset_val + amplitude / 2.0
        half_rec = None
        rec_idx = seg_end
        below = np.nonzero(v[p:seg_end] <= half_level)[0]
        if len(below):
            rec_idx = p + below[0]
            half_rec = (rec_idx - p) / rate
        area = float(np.trapezoid(v[onset:rec_idx + 1] - onset_val)) / rate
        events.append(
            ScrEvent(
                onset_t=onset / rate,
                peak_t=p / rate,
                amplitude=float(amplitude),
                rise_time=(p - onset) / rate,
                half_recovery_time=half_rec,
                area=area,
                prominence=float(props["prominences"][i]),
            )
        )
    return events


def _component_stats(values):
    values = [x for x in values if x is not None]
    if not values:
        return dict(mean=0.0, sd=0.0, min=0.0, max=0.0, sum=0.0)
    arr = np.asarray(values, dtype=float)
    return dict(
        mean=float(arr.mean()),
        sd=float(arr.std()),
        min=float(arr.min()),
        max=float(arr.max()),
        sum=float(arr.sum()),
    )


def eda_features(eda: TimeSeries) -> EdaFeatureVector:
    """Full 32-descriptor EDA feature vector.

    Component statistics are zero-filled when no SCR event is detected;
    half-recovery statistics skip events whose recovery point is absent.
    """
    events = eda_scr_events(eda)
    out = EdaFeatureVector()
    for comp in _EDA_COMPONENTS:
        stats = _component_stats([getattr(ev, comp) for ev in events])
        for stat, val in stats.items():
            setattr(out, f"{comp}_{stat}", val)
    v = eda.values
    out.num_scr = float(len(events))
    out.scl_mean = float(v.mean())
    out.scl_sd = float(v.std())
    if len(v) >= 2:
        out.mav1diff_scl = float(np.mean(np.abs(np.diff(v))))
    if len(v) >= 3:
        out.mav2diff_scl = float(np.mean(np.abs(np.diff(v, n=2))))
    # periodogram power over (0, 1 Hz]
    duration = eda.duration_s
    if len(v) >= 4 and duration > 0:
        grid = hrv_frequency_grid(duration, f_max=1.0)
        t = np.arange(len(v)) / eda.sampling_rate
        spec = lomb_periodogram(t, v, grid)
        out.tp = spec.band_power(grid[0], 1.0 + 1e-12)
        out.psd_mean = float(spec.power.mean())
    return out


def feature_matrix(vectors) -> np.ndarray:
    """Stack feature vectors into an (n_samples, n_features) matrix."""
    return np.stack([vec.as_array() for vec in vectors])


def write_feature_csv(path, names, matrix):
    """Export a feature matrix with its canonical header."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in np.asarray(matrix):
            writer.writerow([repr(float(x)) for x in row])
