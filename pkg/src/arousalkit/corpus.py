"""Corpus handling: record ingestion, arousal label normalization, dataset
aggregation and stratified fold assignment.

Recordings from heterogeneous datasets (different sampling rates and rating
scales) are carried in a single generic record format.  Raw arousal ratings
are mapped onto the common 9-point scale and binarized into LOW/HIGH.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError

# Binarization threshold on the normalized 1..9 scale.  Ratings in [5, 6)
# are not assigned by the labelling convention we follow; we resolve the gap
# by treating >= 5 as HIGH so that no sample is left unlabelled.
HIGH_AROUSAL_THRESHOLD = 5.0


class Modality(str, Enum):
    ECG = "ECG"
    EDA = "EDA"


class ArousalLevel(str, Enum):
    LOW = "LOW"
    HIGH = "HIGH"


@dataclass(frozen=True)
class SignalRecord:
    """One subject/trial/modality recording with its raw arousal rating."""

    dataset_id: str
    subject_id: str
    trial_id: str
    modality: Modality
    sampling_rate: float
    samples: tuple
    arousal_raw: float
    scale_min: float
    scale_max: float

    def __post_init__(self):
        if len(self.samples) == 0:
            raise DataError("record has no samples")
        if self.sampling_rate <= 0:
            raise DataError(f"sampling_rate must be positive, got {self.sampling_rate}")
        if self.scale_min >= self.scale_max:
            raise DataError(
                f"degenerate rating scale [{self.scale_min}, {self.scale_max}]"
            )
        if not (self.scale_min <= self.arousal_raw <= self.scale_max):
            raise DataError(
                f"arousal {self.arousal_raw} outside scale bounds "
                f"[{self.scale_min}, {self.scale_max}]"
            )

    @property
    def key(self):
        return (self.dataset_id, self.subject_id, self.trial_id, self.modality)

    @property
    def trial_key(self):
        return (self.dataset_id, self.subject_id, self.trial_id)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sampling_rate


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of records; at most one record per (trial, modality)."""

    records: tuple
    provenance: tuple = field(default=())

    def __post_init__(self):
        seen = {}
        for rec in self.records:
            if rec.key in seen:
                raise DataError(f"duplicate record for key {rec.key}")
            seen[rec.key] = rec
        datasets = []
        for rec in self.records:
            if rec.dataset_id not in datasets:
                datasets.append(rec.dataset_id)
        object.__setattr__(self, "provenance", tuple(datasets))

    def __len__(self):
        return len(self.records)

    def record(self, dataset_id, subject_id, trial_id, modality):
        for rec in self.records:
            if rec.key == (dataset_id, subject_id, trial_id, Modality(modality)):
                return rec
        raise KeyError((dataset_id, subject_id, trial_id, modality))

    def trial_keys(self):
        """Distinct (dataset, subject, trial) keys in record order."""
        keys = []
        for rec in self.records:
            if rec.trial_key not in keys:
                keys.append(rec.trial_key)
        return keys


@dataclass(frozen=True)
class WindowPair:
    """Aligned 10-s ECG (2560) + EDA (1280) segments with a binary label."""

    key: tuple  # (dataset_id, subject_id, trial_id, window_index)
    ecg: np.ndarray
    eda: np.ndarray
    label: ArousalLevel
    arousal_norm: float

    def __post_init__(self):
        if len(self.ecg) != 2560:
            raise DataError(f"ECG window must have 2560 samples, got {len(self.ecg)}")
        if len(self.eda) != 1280:
            raise DataError(f"EDA window must have 1280 samples, got {len(self.eda)}")

    @property
    def dataset_id(self):
        return self.key[0]


@dataclass(frozen=True)
class FoldAssignment:
    """Map from window key to fold index in [0, k)."""

    k: int
    assignment: dict

    def fold_keys(self, fold: int):
        return [key for key, f in self.assignment.items() if f == fold]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset_id", "subject_id", "trial_id", "window_index", "fold"])
            for key, f in self.assignment.items():
                writer.writerow([*key, f])


def rescale_arousal(value: float, scale_min: float, scale_max: float) -> float:
    """Affinely map a rating on [scale_min, scale_max] onto [1, 9]."""
    if scale_min >= scale_max:
        raise DataError(f"degenerate rating scale [{scale_min}, {scale_max}]")
    if not (scale_min <= value <= scale_max):
        raise DataError(f"arousal {value} outside scale bounds [{scale_min}, {scale_max}]")
    return 1.0 + 8.0 * (value - scale_min) / (scale_max - scale_min)


def binarize_arousal(norm: float) -> ArousalLevel:
    """LOW below the threshold, HIGH at or above it (normalized 1..9 scale)."""
    if not (1.0 <= norm <= 9.0):
        raise DataError(f"normalized arousal {norm} outside [1, 9]")
    return ArousalLevel.HIGH if norm >= HIGH_AROUSAL_THRESHOLD else ArousalLevel.LOW


def aggregate(corpora) -> Corpus:
    """Union of record sets; raises on (dataset, subject, trial, modality) collisions."""
    records = []
    sources = {}
    for i, corpus in enumerate(corpora):
        for rec in corpus.records:
            if rec.key in sources:
                raise DataError(
                    f"key collision for {rec.key}: corpus #{sources[rec.key]} "
                    f"and corpus #{i}"
                )
            sources[rec.key] = i
            records.append(rec)
    return Corpus(records=tuple(records))


def stratified_folds(pairs, k: int, seed: int) -> FoldAssignment:
    """Assign window pairs to k folds, stratified by dataset.

    Within each dataset stratum the pairs are shuffled with the given seed
    and dealt cyclically from a random starting fold, so per-dataset fold
    counts differ by at most one.
    """
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if k > len(pairs):
        raise DataError(f"k={k} exceeds number of pairs ({len(pairs)})")
    rng = np.random.default_rng(seed)
    strata = {}
    for pair in pairs:
        strata.setdefault(pair.dataset_id, []).append(pair.key)
    assignment = {}
    for dataset_id in sorted(strata):
        keys = strata[dataset_id]
        order = rng.permutation(len(keys))
        offset = int(rng.integers(k))
        for i, idx in enumerate(order):
            assignment[keys[idx]] = (i + offset) % k
    # preserve pair order in the exported assignment
    return FoldAssignment(k=k, assignment={p.key: assignment[p.key] for p in pairs})


# ---------------------------------------------------------------------------
# Ingestion

_CSV_COLUMNS = [
    "dataset_id",
    "subject_id",
    "trial_id",
    "modality",
    "sampling_rate",
    "scale_min",
    "scale_max",
    "arousal_raw",
    "samples",
]


def _record_from_row(row: dict, row_number: int) -> SignalRecord:
    missing = [c for c in _CSV_COLUMNS if c not in row or row[c] is None]
    if missing:
        raise DataError(f"missing field(s) {missing}, row {row_number}")
    try:
        modality = Modality(row["modality"])
    except ValueError:
        raise DataError(f"unknown modality {row['modality']!r}, row {row_number}")
    samples = row["samples"]
    if isinstance(samples, str):
        parts = [p for p in samples.split(";") if p != ""]
        try:
            samples = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"non-numeric sample value, row {row_number}")
    try:
        samples = tuple(float(s) for s in samples)
    except (TypeError, ValueError):
        raise DataError(f"non-numeric sample value, row {row_number}")
    try:
        rate = float(row["sampling_rate"])
        smin = float(row["scale_min"])
        smax = float(row["scale_max"])
        arousal = float(row["arousal_raw"])
    except ValueError:
        raise DataError(f"non-numeric metadata value, row {row_number}")
    try:
        return SignalRecord(
            dataset_id=str(row["dataset_id"]),
            subject_id=str(row["subject_id"]),
            trial_id=str(row["trial_id"]),
            modality=modality,
            sampling_rate=rate,
            samples=samples,
            arousal_raw=arousal,
            scale_min=smin,
            scale_max=smax,
        )
    except DataError as exc:
        raise DataError(f"{exc}, row {row_number}")


def ingest(path, fmt: str = None) -> Corpus:
    """Read a corpus from a CSV or JSONL file.

    CSV rows carry samples as a semicolon-joined decimal list; JSONL rows
    carry them as a JSON array.  Row order is preserved.  The format is
    inferred from the file suffix when not given.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    if fmt is None:
        fmt = "JSONL" if path.suffix.lower() in (".jsonl", ".json") else "CSV"
    fmt = fmt.upper()
    records = []
    if fmt == "CSV":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for i, row in enumerate(reader, start=2):  # header is row 1
                records.append(_record_from_row(row, i))
    elif fmt == "JSONL":
        with open(path) as fh:
            for i, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError:
                    raise DataError(f"invalid JSON, row {i}")
                records.append(_record_from_row(row, i))
    else:
        raise DataError(f"unknown ingest format {fmt!r}")
    return Corpus(records=tuple(records))


def write_corpus(corpus: Corpus, path, fmt: str = "JSONL"):
    """Write a corpus in the interchange format understood by ingest()."""
    path = Path(path)
    fmt = fmt.upper()
    if fmt == "CSV":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_COLUMNS)
            for rec in corpus.records:
                writer.writerow(
                    [
                        rec.dataset_id,
                        rec.subject_id,
                        rec.trial_id,
                        rec.modality.value,
                        rec.sampling_rate,
                        rec.scale_min,
                        rec.scale_max,
                        rec.arousal_raw,
                        ";".join(repr(float(s)) for s in rec.samples),
                    ]
                )
    elif fmt == "JSONL":
        with open(path, "w") as fh:
            for rec in corpus.records:
                fh.write(
                    json.dumps(
                        {
                            "dataset_id": rec.dataset_id,
                            "subject_id": rec.subject_id,
                            "trial_id": rec.trial_id,
                            "modality": rec.modality.value,
                            "sampling_rate": rec.sampling_rate,
                            "scale_min": rec.scale_min,
                            "scale_max": rec.scale_max,
                            "arousal_raw": rec.arousal_raw,
                            "samples": [float(s) for s in rec.samples],
                        }
                    )
                    + "\n"
                )
    else:
        raise DataError(f"unknown corpus format {fmt!r}")
