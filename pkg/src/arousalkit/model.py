"""Fusion strategies, classification protocol and evaluation metrics.

The protocol trains representation models (autoencoder latents, supervised
CNN latents, or hand-crafted features) on the training folds only, extracts
representations for both partitions, fits a random forest on the training
representations and evaluates on the held-out fold.  High arousal is the
positive class throughout.

Representation families:
  latent       80-d sparse-autoencoder encodings per modality
  handcrafted  HRV / SCR feature vectors, standardized and LASSO-selected
  cnn          80-d conv-stack encodings of a supervised CNN

Arms: ecg, eda, featfusion (concatenated representations), decfusion
(per-modality forest probabilities fused by a least-squares linear unit).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import dsp, features, lasso
from .corpus import ArousalLevel, Corpus, stratified_folds
from .errors import DataError
from .forest import Forest, ForestConfig, predict_forest, train_random_forest
from .nn import (
    TrainConfig,
    build_ae_ecg,
    build_ae_eda,
    build_cnn,
    encode,
    train,
)
from .preprocess import PreprocessConfig, preprocess_corpus

FAMILIES = ("latent", "handcrafted", "cnn")
ARMS = ("ecg", "eda", "featfusion", "decfusion")
MODES = tuple(f"{fam}_{arm}" for fam in FAMILIES for arm in ARMS)

# minimum R peaks for an ECG window to yield valid interval statistics
MIN_PEAKS_FOR_FEATURES = 3


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    f1: float
    per_dataset: dict = field(default_factory=dict)

    @classmethod
    def from_counts(cls, tp, tn, fp, fn, per_dataset=None):
        total = tp + tn + fp + fn
        if total == 0:
            raise DataError("empty evaluation")
        acc = (tp + tn) / total
        denom = 2 * tp + fp + fn
        f1 = (2 * tp / denom) if denom > 0 else 0.0
        return cls(tp=tp, tn=tn, fp=fp, fn=fn, accuracy=acc, f1=f1,
                   per_dataset=per_dataset or {})

    def to_dict(self):
        return {
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
            "accuracy": self.accuracy, "f1": self.f1,
            "per_dataset": {k: list(v) for k, v in self.per_dataset.items()},
        }


def _confusion(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    return tp, tn, fp, fn


def evaluate(y_true, y_pred, dataset_ids=None) -> MetricsReport:
    """Accuracy and F1 with HIGH (=1) as the positive class; optional
    per-dataset breakdown when dataset_ids is given."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise DataError("prediction/label length mismatch")
    per_dataset = {}
    if dataset_ids is not None:
        ids = list(dataset_ids)
        if len(ids) != len(y_true):
            raise DataError("dataset_ids length mismatch")
        for ds in dict.fromkeys(ids):
            m = np.array([d == ds for d in ids])
            sub = MetricsReport.from_counts(*_confusion(y_true[m], y_pred[m]))
            per_dataset[ds] = (sub.accuracy, sub.f1)
    return MetricsReport.from_counts(*_confusion(y_true, y_pred),
                                     per_dataset=per_dataset)


def feature_fusion(ecg_latent, eda_latent) -> np.ndarray:
    """Concatenate representations, ECG block first."""
    a = np.atleast_2d(np.asarray(ecg_latent, dtype=np.float64))
    b = np.atleast_2d(np.asarray(eda_latent, dtype=np.float64))
    if len(a) != len(b):
        raise DataError("modality representation counts differ")
    return np.concatenate([a, b], axis=1)


@dataclass(frozen=True)
class DecisionFusionModel:
    weights: tuple  # (w_ecg, w_eda)
    bias: float

    def score(self, p_ecg, p_eda):
        return (self.weights[0] * np.asarray(p_ecg, dtype=np.float64)
                + self.weights[1] * np.asarray(p_eda, dtype=np.float64)
                + self.bias)

    def predict(self, p_ecg, p_eda):
        return (self.score(p_ecg, p_eda) >= 0.5).astype(np.int64)


def decision_fusion_train(p_ecg, p_eda, y) -> DecisionFusionModel:
    """Least-squares fit of y on two probability streams plus a bias.

    Equivalent to training the 2-input linear unit to convergence.  Constant
    inputs collapse to a bias-only model (with a warning).
    """
    p_ecg = np.asarray(p_ecg, dtype=np.float64)
    p_eda = np.asarray(p_eda, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (len(p_ecg) == len(p_eda) == len(y)):
        raise DataError("probability/label length mismatch")
    if np.ptp(p_ecg) == 0 and np.ptp(p_eda) == 0:
        warnings.warn("constant fusion inputs; falling back to bias-only model")
        return DecisionFusionModel(weights=(0.0, 0.0), bias=float(y.mean()))
    A = np.column_stack([p_ecg, p_eda, np.ones(len(y))])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return DecisionFusionModel(weights=(float(coef[0]), float(coef[1])),
                               bias=float(coef[2]))


# ---------------------------------------------------------------------------
# representation models


@dataclass(frozen=True)
class ProtocolConfig:
    """Training hyperparameters; defaults follow the documented settings.

    Epoch counts are meant to be scaled down for desk-scale runs.
    """

    ae_epochs: int = 8
    ae_batch: int = 8
    ae_patience: int = 4
    ae_learning_rate: float = 1e-3
    cnn_epochs: int = 1500
    cnn_batch: int = 64
    cnn_patience: int = 50
    cnn_learning_rate: float = 1e-4
    val_fraction: float = 0.1
    forest: ForestConfig = field(default_factory=ForestConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)


def _fold_seed(seed: int, fold: int) -> int:
    return (seed + 1) * 100003 + fold


def _val_split(n: int, fraction: float, seed: int):
    """Deterministic train/validation index split (validation >= 1 row)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_val = max(1, int(round(fraction * n)))
    if n_val >= n:
        n_val = max(1, n - 1) if n > 1 else 0
    return order[n_val:], order[:n_val]


def _stack_windows(pairs, modality):
    arr = np.stack([getattr(p, modality) for p in pairs])[:, :, None]
    return arr.astype(np.float32)


def _labels(pairs):
    return np.array([1 if p.label == ArousalLevel.HIGH else 0 for p in pairs],
                    dtype=np.int64)


def _fit_autoencoder(windows, modality, seed, cfg: ProtocolConfig):
    spec = build_ae_ecg() if modality == "ecg" else build_ae_eda()
    tc = TrainConfig(optimizer="RMSProp", learning_rate=cfg.ae_learning_rate,
                     batch_size=cfg.ae_batch, max_epochs=cfg.ae_epochs,
                     patience=cfg.ae_patience, loss="MSE", seed=seed)
    tr_idx, va_idx = _val_split(len(windows), cfg.val_fraction, seed)
    Xt, Xv = windows[tr_idx], windows[va_idx]
    return train(spec, (Xt, Xt), (Xv, Xv), tc)


def _fit_supervised_cnn(windows, labels, modality, seed, cfg: ProtocolConfig):
    spec = build_cnn(modality.upper())
    tc = TrainConfig(optimizer="Adam", learning_rate=cfg.cnn_learning_rate,
                     batch_size=cfg.cnn_batch, max_epochs=cfg.cnn_epochs,
                     patience=cfg.cnn_patience, loss="BinaryCrossEntropy",
                     seed=seed)
    y = labels.astype(np.float32)[:, None]
    tr_idx, va_idx = _val_split(len(windows), cfg.val_fraction, seed)
    return train(spec, (windows[tr_idx], y[tr_idx]),
                 (windows[va_idx], y[va_idx]), tc)


def _ecg_feature_row(window, rate):
    ts = dsp.TimeSeries(np.asarray(window, dtype=float), rate)
    peaks = dsp.pan_tompkins_rpeaks(ts)
    if len(peaks) < MIN_PEAKS_FOR_FEATURES:
        return None
    rr = features.rr_from_peaks(peaks)
    vec = features.ecg_features(rr, window_seconds=ts.duration_s)
    return vec.as_array()

def _eda_feature_row(window, rate):
    ts = dsp.TimeSeries(np.asarray(window, dtype=float), rate)
    return features.eda_features(ts).as_array()


@dataclass
class HandcraftedModel:
    """Train-fold statistics and LASSO support for one modality."""

    modality: str
    mean: np.ndarray
    sd: np.ndarray
    mask: np.ndarray

    def transform(self, raw):
        Xs, _, _ = lasso.standardize(np.asarray(raw, dtype=np.float64),
                                     self.mean, self.sd)
        return Xs[:, self.mask]


def _fit_handcrafted(raw, labels, modality, seed) -> HandcraftedModel:
    X = np.asarray(raw, dtype=np.float64)
    Xs, mean, sd = lasso.standardize(X)
    sel = lasso.lasso_select(Xs, labels.astype(np.float64))
    mask = sel.selected_mask
    if not mask.any():
        mask = np.ones(X.shape[1], dtype=bool)
    return HandcraftedModel(modality=modality, mean=mean, sd=sd, mask=mask)


def _needed_modalities(arm):
    if arm == "ecg":
        return ("ecg",)
    if arm == "eda":
        return ("eda",)
    return ("ecg", "eda")


def fit_representation_models(train_pairs, mode: str, seed: int,
                              cfg: ProtocolConfig = None) -> dict:
    """Train the representation models for one fold from training pairs only.

    Returns {modality: model}; the caller extracts representations with
    apply_representation.  Pairs are sorted by key internally so the result
    depends only on the training-set contents and the seed.
    """
    cfg = cfg or ProtocolConfig()
    family, arm = parse_mode(mode)
    pairs = sorted(train_pairs, key=lambda p: p.key)
    return _fit_models(pairs, family, _needed_modalities(arm), seed, cfg)


def _fit_models(pairs, family, modalities, seed, cfg: ProtocolConfig) -> dict:
    """Fit one representation model per requested modality (pairs pre-sorted)."""
    labels = _labels(pairs)
    models = {}
    for modality in modalities:
        if family == "latent":
            windows = _stack_windows(pairs, modality)
            models[modality] = _fit_autoencoder(windows, modality, seed, cfg)
        elif family == "cnn":
            windows = _stack_windows(pairs, modality)
            models[modality] = _fit_supervised_cnn(windows, labels, modality,
                                                   seed, cfg)
        else:
            rate = (cfg.preprocess.ecg_rate if modality == "ecg"
                    else cfg.preprocess.eda_rate)
            rows = [_ecg_feature_row(getattr(p, modality), rate)
                    if modality == "ecg"
                    else _eda_feature_row(getattr(p, modality), rate)
                    for p in pairs]
            valid = [i for i, r in enumerate(rows) if r is not None]
            if len(valid) < 2:
                raise DataError("too few windows with valid features")
            raw = np.stack([rows[i] for i in valid])
            models[modality] = _fit_handcrafted(raw, labels[valid], modality,
                                                seed)
    return models


def apply_representation(models: dict, pairs, mode: str,
                         cfg: ProtocolConfig = None):
    """Per-modality representations for a list of pairs.

    Returns ({modality: matrix}, keep_index) where keep_index lists the pair
    indices retained (hand-crafted ECG features drop windows with too few
    detected beats).
    """
    cfg = cfg or ProtocolConfig()
    family, arm = parse_mode(mode)
    keep = list(range(len(pairs)))
    reps = {}
    for modality in _needed_modalities(arm):
        if family in ("latent", "cnn"):
            windows = _stack_windows(pairs, modality)
            reps[modality] = encode(models[modality], windows).astype(np.float64)
        else:
            rate = (cfg.preprocess.ecg_rate if modality == "ecg"
                    else cfg.preprocess.eda_rate)
            rows = [_ecg_feature_row(getattr(p, modality), rate)
                    if modality == "ecg"
                    else _eda_feature_row(getattr(p, modality), rate)
                    for p in pairs]
            valid = [i for i, r in enumerate(rows) if r is not None]
            keep = [i for i in keep if i in set(valid)]
            reps[modality] = rows  # raw rows; filtered and transformed below
    if family == "handcrafted":
        for modality in reps:
            raw = np.stack([reps[modality][i] for i in keep])
            reps[modality] = models[modality].transform(raw)
    return reps, keep


def parse_mode(mode: str):
    if mode not in MODES:
        raise DataError(f"unknown mode {mode!r}; expected one of {MODES}")
    return tuple(mode.split("_", 1))


# ---------------------------------------------------------------------------
# protocol


@dataclass
class ProtocolResult:
    mode: str
    k: int
    seed: int
    report: MetricsReport
    fold_reports: list
    predictions: list  # (key, y_true, y_pred, probability)
    histories: list = field(default_factory=list)


def write_predictions_csv(path, predictions):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset_id", "subject_id", "trial_id",
                         "window_index", "y_true", "y_pred", "probability"])
        for key, yt, yp, prob in predictions:
            writer.writerow([*key, yt, yp, f"{prob:.6f}"])


def _classify_fold(models, train_pairs, test_pairs, mode, fold_seed, cfg):
    """Fit the fold classifier and predict the held-out pairs.

    Returns (test_keep_idx, y_pred, prob).
    """
    family, arm = parse_mode(mode)
    train_reps, train_keep = apply_representation(models, train_pairs, mode, cfg)
    test_reps, test_keep = apply_representation(models, test_pairs, mode, cfg)
    y_train = _labels(train_pairs)
    if family == "handcrafted":
        y_train = y_train[train_keep]
    fc = ForestConfig(n_trees=cfg.forest.n_trees, bootstrap=cfg.forest.bootstrap,
                      max_features=cfg.forest.max_features,
                      criterion=cfg.forest.criterion, seed=fold_seed)
    if arm in ("ecg", "eda"):
        forest = train_random_forest(train_reps[arm], y_train, fc)
        y_pred, prob = predict_forest(forest, test_reps[arm])
    elif arm == "featfusion":
        Xtr = feature_fusion(train_reps["ecg"], train_reps["eda"])
        Xte = feature_fusion(test_reps["ecg"], test_reps["eda"])
        forest = train_random_forest(Xtr, y_train, fc)
        y_pred, prob = predict_forest(forest, Xte)
    else:  # decfusion
        fe = train_random_forest(train_reps["ecg"], y_train, fc)
        fd = train_random_forest(train_reps["eda"], y_train,
                                 ForestConfig(n_trees=fc.n_trees,
                                              bootstrap=fc.bootstrap,
                                              max_features=fc.max_features,
                                              criterion=fc.criterion,
                                              seed=fold_seed + 50021))
        fusion = decision_fusion_train(predict_forest(fe, train_reps["ecg"])[1],
                                       predict_forest(fd, train_reps["eda"])[1],
                                       y_train)
        pe = predict_forest(fe, test_reps["ecg"])[1]
        pd = predict_forest(fd, test_reps["eda"])[1]
        y_pred = fusion.predict(pe, pd)
        prob = np.clip(fusion.score(pe, pd), 0.0, 1.0)
    return test_keep, y_pred, prob


def run_protocol_arms(corpus: Corpus, family: str, arms=ARMS, k: int = 10,
                      seed: int = 0, cfg: ProtocolConfig = None,
                      label_shuffle_seed: int = None) -> dict:
    """Leakage-free k-fold evaluation of several arms of one family.

    The per-fold representation models (the expensive part) are fit once and
    shared across arms, so e.g. latent ecg/eda/featfusion cost one autoencoder
    training per modality per fold.  Returns {arm: ProtocolResult}; each arm's
    result is identical to a standalone run_protocol call for that mode.
    label_shuffle_seed permutes window labels after preprocessing (a
    permutation-null diagnostic).
    """
    cfg = cfg or ProtocolConfig()
    if family not in FAMILIES:
        raise DataError(f"unknown family {family!r}")
    arms = tuple(arms)
    for arm in arms:
        if arm not in ARMS:
            raise DataError(f"unknown arm {arm!r}")
    pairs = preprocess_corpus(corpus, cfg.preprocess)
    if len(pairs) < k:
        raise DataError(f"only {len(pairs)} windows for k={k} folds")
    if label_shuffle_seed is not None:
        rng = np.random.default_rng(label_shuffle_seed)
        labels = _labels(pairs)[rng.permutation(len(pairs))]
        pairs = [type(p)(key=p.key, ecg=p.ecg, eda=p.eda,
                         label=ArousalLevel.HIGH if l else ArousalLevel.LOW,
                         arousal_norm=p.arousal_norm)
                 for p, l in zip(pairs, labels)]
    folds = stratified_folds(pairs, k, seed)
    modalities = sorted({m for arm in arms for m in _needed_modalities(arm)})
    state = {arm: {"counts": np.zeros(4, dtype=np.int64), "fold_reports": [],
                   "predictions": []} for arm in arms}
    histories = []
    for fold in range(k):
        test_keys = set(folds.fold_keys(fold))
        train_pairs = sorted((p for p in pairs if p.key not in test_keys),
                             key=lambda p: p.key)
        test_pairs = sorted((p for p in pairs if p.key in test_keys),
                            key=lambda p: p.key)
        fs = _fold_seed(seed, fold)
        models = _fit_models(train_pairs, family, modalities, fs, cfg)
        for m in models.values():
            if hasattr(m, "history"):
                histories.append({"fold": fold, **m.history})
        for arm in arms:
            st = state[arm]
            keep, y_pred, prob = _classify_fold(models, train_pairs, test_pairs,
                                                f"{family}_{arm}", fs, cfg)
            y_true = _labels(test_pairs)[keep]
            tp, tn, fp, fn = _confusion(y_true, y_pred)
            st["counts"] += (tp, tn, fp, fn)
            st["fold_reports"].append(MetricsReport.from_counts(tp, tn, fp, fn))
            for j, idx in enumerate(keep):
                st["predictions"].append((test_pairs[idx].key, int(y_true[j]),
                                          int(y_pred[j]), float(prob[j])))
    results = {}
    for arm in arms:
        st = state[arm]
        all_true = [p[1] for p in st["predictions"]]
        all_pred = [p[2] for p in st["predictions"]]
        all_ds = [p[0][0] for p in st["predictions"]]
        report = evaluate(all_true, all_pred, all_ds)
        assert (report.tp, report.tn, report.fp, report.fn) == tuple(st["counts"])
        results[arm] = ProtocolResult(mode=f"{family}_{arm}", k=k, seed=seed,
                                      report=report,
                                      fold_reports=st["fold_reports"],
                                      predictions=st["predictions"],
                                      histories=histories)
    return results


def run_protocol(corpus: Corpus, mode: str, k: int = 10, seed: int = 0,
                 cfg: ProtocolConfig = None,
                 label_shuffle_seed: int = None) -> ProtocolResult:
    """Leakage-free k-fold evaluation of one representation/fusion mode.

    Representation models see training-fold windows only; the held-out fold
    is encoded with the trained models and scored by the fold classifier.
    """
    family, arm = parse_mode(mode)
    results = run_protocol_arms(corpus, family, (arm,), k=k, seed=seed,
                                cfg=cfg, label_shuffle_seed=label_shuffle_seed)
    result = results[arm]
    return ProtocolResult(mode=mode, k=k, seed=seed, report=result.report,
                          fold_reports=result.fold_reports,
                          predictions=result.predictions,
                          histories=result.histories)
