"""Corpus model, arousal scaling, ingestion and fold assignment checks."""

import numpy as np
import pytest

from arousalkit.corpus import (
    ArousalLevel, Corpus, FoldAssignment, Modality, SignalRecord, WindowPair,
    aggregate, binarize_arousal, ingest, rescale_arousal, stratified_folds,
    write_corpus,
)
from arousalkit.errors import DataError


def _record(dataset="D1", subject="s1", trial="t1", modality=Modality.ECG,
            arousal=7.0, scale=(1.0, 9.0), n=256, rate=256.0):
    return SignalRecord(
        dataset_id=dataset, subject_id=subject, trial_id=trial,
        modality=modality, samples=tuple(np.zeros(n)), sampling_rate=rate,
        arousal_raw=arousal, scale_min=scale[0], scale_max=scale[1],
    )


def test_rescale_arousal_hand_case():
    # 1 + 8 * (3 - 0) / (6 - 0) = 5.0
    assert rescale_arousal(3.0, 0.0, 6.0) == pytest.approx(5.0)


def test_rescale_arousal_endpoints():
    assert rescale_arousal(1.0, 1.0, 9.0) == pytest.approx(1.0)
    assert rescale_arousal(9.0, 1.0, 9.0) == pytest.approx(9.0)


def test_rescale_arousal_degenerate_scale():
    with pytest.raises(DataError):
        rescale_arousal(3.0, 5.0, 5.0)


def test_binarize_threshold():
    assert binarize_arousal(5.0) == ArousalLevel.HIGH
    assert binarize_arousal(5.1) == ArousalLevel.HIGH
    assert binarize_arousal(4.9) == ArousalLevel.LOW


def test_corpus_provenance_counts_distinct_datasets():
    records = []
    for ds in ("A", "B", "C"):
        records.append(_record(dataset=ds, modality=Modality.ECG))
        records.append(_record(dataset=ds, modality=Modality.EDA))
    corpus = Corpus(records=tuple(records))
    assert len(corpus.provenance) == 3


def test_corpus_rejects_duplicate_trial_modality():
    with pytest.raises(DataError):
        Corpus(records=(_record(), _record()))


def test_corpus_record_lookup():
    corpus = Corpus(records=(_record(), _record(modality=Modality.EDA)))
    rec = corpus.record("D1", "s1", "t1", Modality.EDA)
    assert rec.modality == Modality.EDA
    with pytest.raises(KeyError):
        corpus.record("D1", "s1", "t9", Modality.ECG)


def test_aggregate_merges_provenance():
    a = Corpus(records=(_record(dataset="A"),))
    b = Corpus(records=(_record(dataset="B"),))
    merged = aggregate([a, b])
    assert len(merged) == 2
    assert set(merged.provenance) == {"A", "B"}


def _pairs(dataset, n, label_cycle=(0, 1)):
    pairs = []
    for i in range(n):
        pairs.append(WindowPair(
            key=(dataset, f"s{i}", "t0", 0),
            ecg=np.zeros(2560, dtype=np.float32),
            eda=np.zeros(1280, dtype=np.float32),
            label=label_cycle[i % len(label_cycle)],
            arousal_norm=5.0,
        ))
    return pairs


def test_stratified_folds_dataset_proportions():
    pairs = _pairs("A", 40) + _pairs("B", 60)
    folds = stratified_folds(pairs, k=10, seed=0)
    for f in range(10):
        keys = folds.fold_keys(f)
        a = sum(1 for k in keys if k[0] == "A")
        b = sum(1 for k in keys if k[0] == "B")
        assert (a, b) == (4, 6)


def test_stratified_folds_equal_sizes():
    pairs = _pairs("A", 100)
    folds = stratified_folds(pairs, k=10, seed=1)
    sizes = [len(folds.fold_keys(f)) for f in range(10)]
    assert sizes == [10] * 10


def test_stratified_folds_partition_is_exact():
    pairs = _pairs("A", 37) + _pairs("B", 23)
    folds = stratified_folds(pairs, k=5, seed=2)
    seen = []
    for f in range(5):
        seen.extend(folds.fold_keys(f))
    assert sorted(seen) == sorted(p.key for p in pairs)


def test_stratified_folds_deterministic():
    pairs = _pairs("A", 30)
    f1 = stratified_folds(pairs, k=3, seed=7)
    f2 = stratified_folds(pairs, k=3, seed=7)
    for f in range(3):
        assert list(f1.fold_keys(f)) == list(f2.fold_keys(f))


def test_fold_assignment_csv(tmp_path):
    pairs = _pairs("A", 10)
    folds = stratified_folds(pairs, k=2, seed=0)
    path = tmp_path / "folds.csv"
    folds.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 11  # header + one row per pair


def test_corpus_roundtrip_jsonl(tmp_path):
    records = (_record(), _record(modality=Modality.EDA),
               _record(subject="s2", arousal=2.0))
    corpus = Corpus(records=records)
    path = tmp_path / "corpus.jsonl"
    write_corpus(corpus, path, fmt="JSONL")
    loaded = ingest(path)
    assert len(loaded) == 3
    orig = corpus.record("D1", "s2", "t1", Modality.ECG)
    back = loaded.record("D1", "s2", "t1", Modality.ECG)
    np.testing.assert_allclose(back.samples, orig.samples)
    assert back.arousal_raw == orig.arousal_raw
    assert back.sampling_rate == orig.sampling_rate


def test_ingest_missing_file():
    with pytest.raises(DataError):
        ingest("/nonexistent/corpus.jsonl")
