"""Deterministic signal conditioning and event detection.

Zero-phase Butterworth filtering, resampling, min-max normalization,
windowing, QRS R-peak detection (derivative / squaring / integration with
adaptive dual thresholds and search-back), and the classic normalized Lomb
periodogram for unevenly sampled series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import DataError, NumericError

# Pan-Tompkins constants
INTEGRATION_WINDOW_S = 0.150
REFRACTORY_S = 0.200
SEARCHBACK_S = 2.0
REFINE_RADIUS_S = 0.050


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    sampling_rate: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.sampling_rate <= 0:
            raise DataError(f"sampling_rate must be positive, got {self.sampling_rate}")
        if not np.all(np.isfinite(values)):
            raise DataError("time series contains non-finite values")

    def __len__(self):
        return len(self.values)

    @property
    def duration_s(self) -> float:
        return len(self.values) / self.sampling_rate


@dataclass(frozen=True)
class PeakList:
    indices: np.ndarray
    sampling_rate: float

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        object.__setattr__(self, "indices", idx)
        if len(idx) > 1 and np.any(np.diff(idx) <= 0):
            raise DataError("peak indices must be strictly increasing")

    def __len__(self):
        return len(self.indices)

    @property
    def times(self) -> np.ndarray:
        return self.indices / self.sampling_rate


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        p = np.asarray(self.power, dtype=float)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "power", p)
        if len(f) != len(p):
            raise DataError("frequency and power arrays differ in length")

    def band_power(self, low: float, high: float) -> float:
        """Trapezoidal band power over grid points with low <= f < high."""
        mask = (self.frequencies >= low) & (self.frequencies < high)
        if mask.sum() < 2:
            return 0.0
        return float(np.trapezoid(self.power[mask], self.frequencies[mask]))


def _zero_phase(b, a, x: TimeSeries) -> TimeSeries:
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
        raise NumericError("unstable filter coefficients for requested band")
    padlen = min(3 * max(len(a), len(b)), len(x.values) - 1)
    y = sps.filtfilt(b, a, x.values, padlen=padlen)
    if not np.all(np.isfinite(y)):
        raise NumericError("filter produced non-finite output")
    return TimeSeries(values=y, sampling_rate=x.sampling_rate)


def butterworth_bandpass_zero_phase(x: TimeSeries, low: float, high: float,
                                    order: int = 2) -> TimeSeries:
    """Butterworth bandpass applied forward and backward (zero phase)."""
    nyq = x.sampling_rate / 2.0
    if not (0 < low < high < nyq):
        raise DataError(f"band ({low}, {high}) invalid for Nyquist {nyq}")
    b, a = sps.butter(order, [low / nyq, high / nyq], btype="band")
    return _zero_phase(b, a, x)


def lowpass(x: TimeSeries, cutoff: float, order: int = 2) -> TimeSeries:
    """Zero-phase Butterworth low-pass."""
    nyq = x.sampling_rate / 2.0
    if not (0 < cutoff < nyq):
        raise DataError(f"cutoff {cutoff} invalid for Nyquist {nyq}")
    b, a = sps.butter(order, cutoff / nyq, btype="low")
    return _zero_phase(b, a, x)


def moving_average(x: TimeSeries, n: int) -> TimeSeries:
    """Centered moving mean; edge windows are truncated to available samples."""
    if n < 1:
        raise DataError(f"window must be >= 1 sample, got {n}")
    if n > len(x.values):
        raise DataError(f"window {n} longer than signal ({len(x.values)})")
    v = x.values
    left = (n - 1) // 2
    right = n // 2
    csum = np.concatenate([[0.0], np.cumsum(v)])
    idx = np.arange(len(v))
    lo = np.clip(idx - left, 0, len(v))
    hi = np.clip(idx + right + 1, 0, len(v))
    out = (csum[hi] - csum[lo]) / (hi - lo)
    return TimeSeries(values=out, sampling_rate=x.sampling_rate)


def minmax_normalize(x: TimeSeries) -> TimeSeries:
    """Scale onto [0, 1]; constant signals map to all 0.5."""
    v = x.values
    lo, hi = v.min(), v.max()
    if hi == lo:
        out = np.full_like(v, 0.5)
    else:
        out = (v - lo) / (hi - lo)
    return TimeSeries(values=out, sampling_rate=x.sampling_rate)


def resample(x: TimeSeries, target: float) -> TimeSeries:
    """Resample onto a uniform grid at the target rate over the same duration.

    Downsampling applies an anti-alias low-pass at 0.45 * target first; the
    interpolation itself is linear.
    """
    if target <= 0:
        raise DataError(f"target rate must be positive, got {target}")
    if target == x.sampling_rate:
        return TimeSeries(values=x.values.copy(), sampling_rate=target)
    src = x
    if target < x.sampling_rate:
        src = lowpass(x, 0.45 * target, order=2)
    duration = len(x.values) / x.sampling_rate
    n_out = int(round(duration * target))
    t_in = np.arange(len(src.values)) / src.sampling_rate
    t_out = np.arange(n_out) / target
    out = np.interp(t_out, t_in, src.values)
    return TimeSeries(values=out, sampling_rate=target)


def window(x: TimeSeries, seconds: float):
    """Consecutive non-overlapping segments; trailing partial segment dropped."""
    if seconds <= 0:
        raise DataError(f"window length must be positive, got {seconds}")
    n = int(round(seconds * x.sampling_rate))
    count = len(x.values) // n
    return [x.values[i * n:(i + 1) * n].copy() for i in range(count)]


def _five_point_derivative(v: np.ndarray) -> np.ndarray:
    """Centered 5-point derivative emphasizing QRS slope."""
    d = np.zeros_like(v)
    d[2:-2] = (-v[:-4] - 2 * v[1:-3] + 2 * v[3:-1] + v[4:]) / 8.0
    return d


def pan_tompkins_rpeaks(ecg: TimeSeries, square: bool = True) -> PeakList:
    """Detect R peaks in an already-bandpassed (5-15 Hz) ECG.

    Derivative -> squaring (or absolute value with square=False) -> moving
    window integration -> adaptive dual thresholds with search-back after 2 s
    without an accepted peak.  Accepted integrator peaks are refined to the
    local maximum of the bandpassed signal within +/-50 ms, and a 200 ms
    refractory period is enforced.
    """
    rate = ecg.sampling_rate
    if ecg.duration_s < 2.0:
        raise DataError("Pan-Tompkins needs at least 2 s of signal")
    v = ecg.values
    deriv = _five_point_derivative(v)
    feat = deriv ** 2 if square else np.abs(deriv)
    n_int = max(1, int(round(INTEGRATION_WINDOW_S * rate)))
    integ = moving_average(TimeSeries(values=feat, sampling_rate=rate), n_int).values

    refractory = int(round(REFRACTORY_S * rate))
    # candidate peaks of the integrated signal
    cand, _ = sps.find_peaks(integ, distance=refractory)
    if len(cand) == 0 or integ.max() <= 0:
        return PeakList(indices=np.array([], dtype=int), sampling_rate=rate)

    init = integ[: int(2 * rate)]
    spk = 0.25 * init.max()
    npk = 0.5 * init.mean()
    thr1 = npk + 0.25 * (spk - npk)

    accepted = []

    def search_back(upto_idx, thr1):
        """Recover the strongest skipped candidate above the lower threshold."""
        nonlocal spk
        last_t = accepted[-1] if accepted else 0
        thr2 = 0.5 * thr1
        gap = [j for j in cand
               if last_t + refractory < j < upto_idx - refractory
               and integ[j] > thr2 and j not in accepted]
        if gap:
            best = max(gap, key=lambda j: integ[j])
            accepted.append(best)
            accepted.sort()
            spk = 0.25 * integ[best] + 0.75 * spk
        return npk + 0.25 * (spk - npk)

    for idx in cand:
        # search-back fires when no peak was accepted in the trailing 2 s
        last_t = accepted[-1] if accepted else 0
        if idx - last_t >= SEARCHBACK_S * rate:
            thr1 = search_back(idx, thr1)
        peak = integ[idx]
        if peak > thr1:
            accepted.append(idx)
            spk = 0.125 * peak + 0.875 * spk
        else:
            npk = 0.125 * peak + 0.875 * npk
        thr1 = npk + 0.25 * (spk - npk)
    # trailing gap at the end of the record
    if accepted and len(v) - accepted[-1] >= SEARCHBACK_S * rate:
        search_back(len(v), thr1)

    # refine to the local maximum of the bandpassed signal
    radius = int(round(REFINE_RADIUS_S * rate))
    refined = []
    for idx in accepted:
        lo = max(0, idx - radius)
        hi = min(len(v), idx + radius + 1)
        refined.append(lo + int(np.argmax(v[lo:hi])))
    refined = sorted(set(refined))
    # enforce refractory on the refined positions, keeping the larger peak
    final = []
    for idx in refined:
        if final and idx - final[-1] < refractory:
            if v[idx] > v[final[-1]]:
                final[-1] = idx
        else:
            final.append(idx)
    return PeakList(indices=np.array(final, dtype=int), sampling_rate=rate)


def lomb_periodogram(times, values, freqs) -> Spectrum:
    """Classic normalized Lomb periodogram at the given frequency grid.

    Values are mean-centered and the standard time offset tau is applied per
    frequency; power is normalized by twice the sample variance.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    f = np.asarray(freqs, dtype=float)
    if len(t) < 4:
        raise DataError("Lomb periodogram needs at least 4 samples")
    if np.any(np.diff(t) <= 0):
        raise DataError("times must be strictly increasing")
    yc = y - y.mean()
    var = yc.var()
    if var == 0:
        return Spectrum(frequencies=f, power=np.zeros_like(f))
    power = np.zeros_like(f)
    nonzero = f > 0
    omega = 2 * np.pi * f[nonzero]
    wt = omega[:, None] * t[None, :]
    tau = np.arctan2(np.sin(2 * wt).sum(axis=1), np.cos(2 * wt).sum(axis=1)) / (
        2 * omega
    )
    arg = wt - omega[:, None] * tau[:, None]
    c = np.cos(arg)
    s = np.sin(arg)
    cy = (yc[None, :] * c).sum(axis=1)
    sy = (yc[None, :] * s).sum(axis=1)
    cc = (c * c).sum(axis=1)
    ss = (s * s).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 0.5 / var * (np.where(cc > 0, cy ** 2 / cc, 0.0)
                         + np.where(ss > 0, sy ** 2 / ss, 0.0))
    power[nonzero] = np.maximum(p, 0.0)
    return Spectrum(frequencies=f, power=power)


def hrv_frequency_grid(duration_s: float, f_max: float = 0.5,
                       oversample: int = 4) -> np.ndarray:
    """Frequency grid from 1/T to f_max in steps of 1/(oversample*T)."""
    if duration_s <= 0:
        raise DataError("duration must be positive")
    step = 1.0 / (oversample * duration_s)
    start = 1.0 / duration_s
    return np.arange(start, f_max + step / 2, step)
