"""Synthetic ECG/EDA corpus generator with ground-truthed events.

Stands in for the license-gated affect datasets.  ECG is a periodic train of
Gaussian-shaped P/QRS/T bumps at a per-trial heart rate plus baseline wander
and white noise; EDA is a slow tonic drift plus exponential-decay SCR events
at a per-trial rate plus noise.  HIGH-arousal trials draw faster heart rates
and denser SCR events than LOW trials, giving a learnable, physiologically
plausible signal for end-to-end tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ArousalLevel, Corpus, Modality, SignalRecord
from .errors import DataError

# Default arousal-to-physiology mapping: cleanly separated heart-rate and
# SCR-rate ranges per arousal level.
HIGH_HR_BPM = (90.0, 120.0)
LOW_HR_BPM = (55.0, 75.0)
HIGH_SCR_PER_MIN = (6.0, 12.0)
LOW_SCR_PER_MIN = (1.0, 3.0)

# The REALISTIC profile makes the corpus harder and richer, the way
# ambulatory recordings are:
#  - heart-rate ranges overlap between classes, as they do across real
#    subjects, so no single interval statistic separates the classes;
#  - muscle tension raises broadband EMG contamination of the ECG electrode
#    at high arousal, thickening the in-band signal floor;
#  - sympathetic activation narrows QRS complexes, flattens T waves and
#    speeds up SCR rise;
#  - high-arousal SCRs are dense enough to merge into compound responses,
#    which event detectors systematically undercount while the overall
#    waveform shape remains distinctive.
REALISTIC = dict(
    hr_low=(55.0, 100.0),
    hr_high=(65.0, 110.0),
    scr_low=(0.5, 2.5),
    scr_high=(18.0, 30.0),
    qrs_width_low=(1.05, 1.25),
    qrs_width_high=(0.70, 0.85),
    t_wave_low=(1.1, 1.4),
    t_wave_high=(0.5, 0.8),
    scr_rise_low=(0.90, 1.20),
    scr_rise_high=(0.40, 0.60),
    ecg_noise_low=(0.0, 0.015),
    ecg_noise_high=(0.08, 0.14),
)

# QRS-like template: (amplitude, offset from R in s, width in s) per bump.
_ECG_BUMPS = (
    (0.12, -0.20, 0.035),  # P
    (-0.15, -0.035, 0.010),  # Q
    (1.00, 0.0, 0.012),  # R
    (-0.20, 0.035, 0.012),  # S
    (0.30, 0.28, 0.070),  # T
)

_SCR_RISE_TAU = 0.75
_SCR_DECAY_TAU = 3.0
_SCR_MIN_GAP_S = 1.5


@dataclass(frozen=True)
class SynthGroundTruth:
    """Generator-side truth for one trial."""

    r_peak_times: tuple
    scr_event_times: tuple
    true_arousal_level: ArousalLevel
    hr_bpm: float
    scr_rate_per_min: float


def synth_ecg(duration_s, rate, hr_bpm, rng, noise_sd=0.02, wander_amp=0.1,
              rr_jitter=0.02, qrs_width_scale=1.0, t_wave_scale=1.0):
    """One synthetic ECG trace; returns (samples, r_peak_times).

    qrs_width_scale multiplies every bump width; t_wave_scale multiplies the
    T-wave amplitude."""
    t = np.arange(int(round(duration_s * rate))) / rate
    rr = 60.0 / hr_bpm
    beats = []
    tb = float(rng.uniform(0.1, 0.1 + rr))
    while tb < duration_s - 0.05:
        beats.append(tb)
        tb += rr * (1.0 + rr_jitter * rng.standard_normal())
    beats = np.asarray(beats)
    x = np.zeros_like(t)
    for i, (amp, off, width) in enumerate(_ECG_BUMPS):
        if i == len(_ECG_BUMPS) - 1:  # T wave
            amp *= t_wave_scale
        width *= qrs_width_scale
        centers = beats + off
        x += amp * np.exp(-0.5 * ((t[None, :] - centers[:, None]) / width) ** 2).sum(axis=0)
    x += wander_amp * np.sin(2 * np.pi * 0.3 * t + rng.uniform(0, 2 * np.pi))
    x += noise_sd * rng.standard_normal(len(t))
    return x, beats


def synth_eda(duration_s, rate, scr_rate_per_min, rng, noise_sd=0.01,
              tonic_level=2.0, rise_tau=_SCR_RISE_TAU):
    """One synthetic EDA trace; returns (samples, scr_onset_times)."""
    t = np.arange(int(round(duration_s * rate))) / rate
    x = (
        tonic_level
        + 0.3 * np.sin(2 * np.pi * 0.01 * t + rng.uniform(0, 2 * np.pi))
        + 0.05 * t / max(duration_s, 1.0) * rng.standard_normal()
    )
    onsets = []
    mean_gap = 60.0 / scr_rate_per_min
    tev = float(rng.exponential(mean_gap))
    while tev < duration_s - 2.0:
        onsets.append(tev)
        tev += max(_SCR_MIN_GAP_S, float(rng.exponential(mean_gap)))
    for t0 in onsets:
        amp = rng.uniform(0.3, 0.8)
        dt = t[t >= t0] - t0
        resp = amp * (1.0 - np.exp(-dt / rise_tau)) * np.exp(-dt / _SCR_DECAY_TAU)
        x[len(t) - len(dt):] += resp
    x += noise_sd * rng.standard_normal(len(t))
    return x, np.asarray(onsets)


def synth_corpus(
    n_subjects: int,
    trials_per_subject: int,
    duration_s: float,
    seed: int,
    dataset_id: str = "SYNTH",
    ecg_rate: float = 256.0,
    eda_rate: float = 128.0,
    ecg_noise_sd: float = 0.02,
    eda_noise_sd: float = 0.01,
    hr_low=LOW_HR_BPM,
    hr_high=HIGH_HR_BPM,
    scr_low=LOW_SCR_PER_MIN,
    scr_high=HIGH_SCR_PER_MIN,
    qrs_width_low=(1.0, 1.0),
    qrs_width_high=(1.0, 1.0),
    t_wave_low=(1.0, 1.0),
    t_wave_high=(1.0, 1.0),
    scr_rise_low=(_SCR_RISE_TAU, _SCR_RISE_TAU),
    scr_rise_high=(_SCR_RISE_TAU, _SCR_RISE_TAU),
    ecg_noise_low=(0.0, 0.0),
    ecg_noise_high=(0.0, 0.0),
):
    """Generate a corpus of paired ECG/EDA records with ground truth.

    Trials alternate LOW/HIGH arousal so every subject contributes both
    classes.  Defaults keep the class-conditional ranges cleanly separated;
    pass **REALISTIC for overlapping ranges plus morphology and noise
    modulation.  Returns (Corpus, {trial_key: SynthGroundTruth}).
    """
    if n_subjects < 1 or trials_per_subject < 1 or duration_s <= 0:
        raise DataError("synth_corpus requires positive counts and duration")
    rng = np.random.default_rng(seed)
    records = []
    ground_truth = {}
    for si in range(n_subjects):
        subject_id = f"s{si:03d}"
        for ti in range(trials_per_subject):
            trial_id = f"t{ti:03d}"
            level = ArousalLevel.HIGH if ti % 2 == 1 else ArousalLevel.LOW
            if level is ArousalLevel.HIGH:
                hr = float(rng.uniform(*hr_high))
                scr_rate = float(rng.uniform(*scr_high))
                qrs_width = float(rng.uniform(*qrs_width_high))
                t_wave = float(rng.uniform(*t_wave_high))
                scr_rise = float(rng.uniform(*scr_rise_high))
                trial_ecg_noise = float(rng.uniform(*ecg_noise_high))
                arousal = float(rng.uniform(6.0, 9.0))
            else:
                hr = float(rng.uniform(*hr_low))
                scr_rate = float(rng.uniform(*scr_low))
                qrs_width = float(rng.uniform(*qrs_width_low))
                t_wave = float(rng.uniform(*t_wave_low))
                scr_rise = float(rng.uniform(*scr_rise_low))
                trial_ecg_noise = float(rng.uniform(*ecg_noise_low))
                arousal = float(rng.uniform(1.0, 4.0))
            ecg, r_times = synth_ecg(duration_s, ecg_rate, hr, rng,
                                     noise_sd=ecg_noise_sd + trial_ecg_noise,
                                     qrs_width_scale=qrs_width,
                                     t_wave_scale=t_wave)
            eda, scr_times = synth_eda(duration_s, eda_rate, scr_rate, rng,
                                       noise_sd=eda_noise_sd,
                                       rise_tau=scr_rise)
            common = dict(
                dataset_id=dataset_id,
                subject_id=subject_id,
                trial_id=trial_id,
                arousal_raw=arousal,
                scale_min=1.0,
                scale_max=9.0,
            )
            records.append(
                SignalRecord(modality=Modality.ECG, sampling_rate=ecg_rate,
                             samples=tuple(ecg), **common)
            )
            records.append(
                SignalRecord(modality=Modality.EDA, sampling_rate=eda_rate,
                             samples=tuple(eda), **common)
            )
            ground_truth[(dataset_id, subject_id, trial_id)] = SynthGroundTruth(
                r_peak_times=tuple(r_times),
                scr_event_times=tuple(scr_times),
                true_arousal_level=level,
                hr_bpm=hr,
                scr_rate_per_min=scr_rate,
            )
    return Corpus(records=tuple(records)), ground_truth
