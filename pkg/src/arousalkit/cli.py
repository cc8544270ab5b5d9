"""Command-line orchestration of the full pipeline.

Configuration is flat INI-style key/value text with sections; every key has
a default matching the documented processing constants, so an empty config
runs the reference settings at synthetic desk scale.  Unknown sections or
keys are rejected.  Flags override config keys via repeated
``--set section.key=value``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dsp, features
from .corpus import Corpus, Modality, ingest, write_corpus
from .errors import ArousalKitError, ConfigError, DataError, NumericError
from .forest import ForestConfig, forest_from_dict, forest_to_dict, \
    predict_forest, train_random_forest
from .model import MODES, ProtocolConfig, parse_mode, run_protocol_arms
from .nn import TrainConfig, build_ae_ecg, build_ae_eda, encode as nn_encode, \
    load_network, save_network, train as nn_train
from .nn.training import TrainedNetwork
from .preprocess import PreprocessConfig, pair_matrices, preprocess_corpus
from .synth import REALISTIC, synth_corpus

# every configurable key with its default; value types drive parsing
DEFAULTS = {
    "corpus": {
        "source": "synth",       # "synth" or "file"
        "path": "",              # corpus file for source=file
        "dataset_id": "SYNTH",
        "subjects": 20,
        "trials": 10,
        "duration_s": 10.0,
        "seed": 11,
        "profile": "realistic",  # "realistic" or "plain"
        "ecg_noise_sd": 0.02,
        "eda_noise_sd": 0.01,
    },
    "preprocess": {
        "ecg_band_low": 5.0,
        "ecg_band_high": 15.0,
        "eda_cutoff": 1.0,
        "eda_smooth": 100,
        "ecg_rate": 256.0,
        "eda_rate": 128.0,
        "window_seconds": 10.0,
    },
    "model": {
        "mode": "latent_featfusion",
        "k": 10,
        "seed": 0,
        "n_trees": 100,
        "max_features": "sqrt",
        "criterion": "gini",
    },
    "train": {
        "ae_epochs": 20,
        "ae_batch": 32,
        "ae_patience": 4,
        "ae_learning_rate": 1e-3,
        "cnn_epochs": 40,
        "cnn_batch": 32,
        "cnn_patience": 10,
        "cnn_learning_rate": 1e-4,
        "val_fraction": 0.1,
    },
    "output": {
        "dir": "runs",
    },
}


def _parse_value(section, key, raw):
    default = DEFAULTS[section][key]
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(
            f"invalid value for {section}.{key}: {raw!r}") from exc


def load_config(path=None, overrides=()):
    """Effective configuration as {section: {key: typed value}}.

    Starts from DEFAULTS, applies the INI file at `path` (if given), then
    `overrides` entries of the form "section.key=value".  Unknown sections
    or keys raise ConfigError.
    """
    cfg = {s: dict(kv) for s, kv in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        for section in parser.sections():
            if section not in cfg:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in cfg[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                cfg[section][key] = _parse_value(section, key, raw)
    for entry in overrides:
        if "=" not in entry or "." not in entry.split("=", 1)[0]:
            raise ConfigError(f"override must be section.key=value: {entry!r}")
        dotted, raw = entry.split("=", 1)
        section, key = dotted.split(".", 1)
        if section not in cfg or key not in cfg[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        cfg[section][key] = _parse_value(section, key, raw)
    return cfg


def render_config(cfg) -> str:
    """Canonical INI text; parsing it back yields an identical config."""
    out = io.StringIO()
    for section in DEFAULTS:
        out.write(f"[{section}]\n")
        for key in DEFAULTS[section]:
            value = cfg[section][key]
            if isinstance(value, float):
                text = repr(value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            else:
                text = str(value)
            out.write(f"{key} = {text}\n")
        out.write("\n")
    return out.getvalue()


def preprocess_config(cfg) -> PreprocessConfig:
    p = cfg["preprocess"]
    return PreprocessConfig(
        ecg_band=(p["ecg_band_low"], p["ecg_band_high"]),
        eda_cutoff=p["eda_cutoff"],
        eda_smooth=p["eda_smooth"],
        ecg_rate=p["ecg_rate"],
        eda_rate=p["eda_rate"],
        window_seconds=p["window_seconds"],
    )


def protocol_config(cfg) -> ProtocolConfig:
    t = cfg["train"]
    m = cfg["model"]
    max_features = m["max_features"]
    if max_features not in ("sqrt",):
        try:
            max_features = float(max_features)
        except ValueError as exc:
            raise ConfigError(
                f"invalid model.max_features {max_features!r}") from exc
    return ProtocolConfig(
        ae_epochs=t["ae_epochs"], ae_batch=t["ae_batch"],
        ae_patience=t["ae_patience"], ae_learning_rate=t["ae_learning_rate"],
        cnn_epochs=t["cnn_epochs"], cnn_batch=t["cnn_batch"],
        cnn_patience=t["cnn_patience"], cnn_learning_rate=t["cnn_learning_rate"],
        val_fraction=t["val_fraction"],
        forest=ForestConfig(n_trees=m["n_trees"], max_features=max_features,
                            criterion=m["criterion"], seed=m["seed"]),
        preprocess=preprocess_config(cfg),
    )


def load_corpus(cfg):
    """(Corpus, ground_truth or None) from the [corpus] section."""
    c = cfg["corpus"]
    if c["source"] == "file":
        if not c["path"]:
            raise ConfigError("corpus.source=file requires corpus.path")
        return ingest(c["path"]), None
    if c["source"] != "synth":
        raise ConfigError(f"unknown corpus.source {c['source']!r}")
    if c["profile"] == "realistic":
        extra = dict(REALISTIC)
    elif c["profile"] == "plain":
        extra = {}
    else:
        raise ConfigError(f"unknown corpus.profile {c['profile']!r}")
    corpus, gt = synth_corpus(
        c["subjects"], c["trials"], c["duration_s"], seed=c["seed"],
        dataset_id=c["dataset_id"], ecg_noise_sd=c["ecg_noise_sd"],
        eda_noise_sd=c["eda_noise_sd"], **extra,
    )
    return corpus, gt


@dataclass
class RunReport:
    """Artifact summary of one protocol run."""

    config_echo: str
    mode: str
    k: int
    seed: int
    aggregate: dict
    fold_metrics: list
    histories: list
    timings: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "config_echo": self.config_echo,
            "mode": self.mode,
            "k": self.k,
            "seed": self.seed,
            "aggregate": self.aggregate,
            "fold_metrics": self.fold_metrics,
            "histories": self.histories,
            "timings": self.timings,
            "artifacts": self.artifacts,
        }


def _out_dir(cfg, args, default_name) -> Path:
    name = args.name or default_name
    out = Path(cfg["output"]["dir"]) / name
    if out.exists() and not args.force:
        raise ConfigError(f"output directory {out} exists (use --force)")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_config_echo(cfg, out: Path):
    (out / "config.ini").write_text(render_config(cfg))


def _ground_truth_to_dict(gt):
    return {
        "|".join(key): {
            "r_peak_times": list(v.r_peak_times),
            "scr_event_times": list(v.scr_event_times),
            "true_arousal_level": v.true_arousal_level.value,
            "hr_bpm": v.hr_bpm,
            "scr_rate_per_min": v.scr_rate_per_min,
        }
        for key, v in gt.items()
    }


def cmd_synth(cfg, args) -> int:
    out = _out_dir(cfg, args, "synth")
    corpus, gt = load_corpus(cfg)
    write_corpus(corpus, out / "corpus.jsonl", fmt="JSONL")
    if gt is not None:
        (out / "ground_truth.json").write_text(
            json.dumps(_ground_truth_to_dict(gt), indent=1))
    _write_config_echo(cfg, out)
    print(f"wrote {len(corpus)} records to {out / 'corpus.jsonl'}")
    return 0


def _save_windows(path, pairs):
    ecg, eda, y, keys = pair_matrices(pairs)
    np.savez(
        path, ecg=ecg, eda=eda, y=y,
        key_dataset=np.array([k[0] for k in keys]),
        key_subject=np.array([k[1] for k in keys]),
        key_trial=np.array([k[2] for k in keys]),
        key_window=np.array([k[3] for k in keys], dtype=np.int64),
    )


def _load_windows(path):
    try:
        data = np.load(path)
    except OSError as exc:
        raise DataError(f"cannot read window file {path}: {exc}") from exc
    keys = list(zip(data["key_dataset"].tolist(), data["key_subject"].tolist(),
                    data["key_trial"].tolist(), data["key_window"].tolist()))
    return data["ecg"], data["eda"], data["y"], keys


def cmd_preprocess(cfg, args) -> int:
    out = _out_dir(cfg, args, "preprocess")
    corpus, _ = load_corpus(cfg)
    pairs = preprocess_corpus(corpus, preprocess_config(cfg))
    if not pairs:
        raise DataError("preprocessing produced no windows")
    _save_windows(out / "windows.npz", pairs)
    _write_config_echo(cfg, out)
    print(f"wrote {len(pairs)} window pairs to {out / 'windows.npz'}")
    return 0


def cmd_features(cfg, args) -> int:
    out = _out_dir(cfg, args, "features")
    corpus, _ = load_corpus(cfg)
    pcfg = preprocess_config(cfg)
    pairs = preprocess_corpus(corpus, pcfg)
    ecg_rows, eda_rows, used, skipped = [], [], [], []
    for pair in pairs:
        ecg_ts = dsp.TimeSeries(np.asarray(pair.ecg, dtype=float),
                                pcfg.ecg_rate)
        peaks = dsp.pan_tompkins_rpeaks(ecg_ts)
        if len(peaks.times) < 3:
            skipped.append(pair.key)
            continue
        rr = features.rr_from_peaks(peaks)
        vec = features.ecg_features(rr, window_seconds=pcfg.window_seconds)
        eda_ts = dsp.TimeSeries(np.asarray(pair.eda, dtype=float),
                                pcfg.eda_rate)
        evec = features.eda_features(eda_ts)
        ecg_rows.append(vec)
        eda_rows.append(evec)
        used.append(pair.key)
    if not used:
        raise DataError("no windows produced valid features")
    features.write_feature_csv(out / "ecg_features.csv",
                               ecg_rows[0].names(),
                               features.feature_matrix(ecg_rows))
    features.write_feature_csv(out / "eda_features.csv",
                               eda_rows[0].names(),
                               features.feature_matrix(eda_rows))
    with open(out / "feature_keys.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset_id", "subject_id", "trial_id",
                         "window_index"])
        writer.writerows(used)
    _write_config_echo(cfg, out)
    print(f"wrote features for {len(used)} windows "
          f"({len(skipped)} skipped) to {out}")
    return 0


def _ae_train_config(cfg, seed) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(optimizer="RMSProp", learning_rate=t["ae_learning_rate"],
                       batch_size=t["ae_batch"], max_epochs=t["ae_epochs"],
                       patience=t["ae_patience"], loss="MSE", seed=seed)


def cmd_train_ae(cfg, args) -> int:
    out = _out_dir(cfg, args, f"train-ae-{args.modality}")
    ecg, eda, _, _ = _load_windows(args.windows)
    windows = ecg if args.modality == "ecg" else eda
    spec = build_ae_ecg() if args.modality == "ecg" else build_ae_eda()
    seed = cfg["model"]["seed"]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(windows))
    n_val = max(1, int(round(cfg["train"]["val_fraction"] * len(windows))))
    if n_val >= len(windows):
        raise DataError("too few windows to split off a validation set")
    va, tr = order[:n_val], order[n_val:]
    trained = nn_train(spec, (windows[tr], windows[tr]),
                       (windows[va], windows[va]),
                       _ae_train_config(cfg, seed))
    save_network(trained.network, out / f"ae_{args.modality}.npz",
                 history=trained.history)
    _write_config_echo(cfg, out)
    best = min(trained.history["val_loss"])
    print(f"trained ae_{args.modality} (best val MSE {best:.6f}) -> {out}")
    return 0


def cmd_encode(cfg, args) -> int:
    out = _out_dir(cfg, args, f"encode-{args.modality}")
    ecg, eda, y, keys = _load_windows(args.windows)
    windows = ecg if args.modality == "ecg" else eda
    net, history = load_network(args.model)
    latents = nn_encode(TrainedNetwork(network=net, history=history), windows)
    np.savez(out / "latents.npz", latents=latents, y=y,
             key_dataset=np.array([k[0] for k in keys]),
             key_subject=np.array([k[1] for k in keys]),
             key_trial=np.array([k[2] for k in keys]),
             key_window=np.array([k[3] for k in keys], dtype=np.int64))
    _write_config_echo(cfg, out)
    print(f"encoded {len(latents)} windows -> {out / 'latents.npz'}")
    return 0


def cmd_train_clf(cfg, args) -> int:
    out = _out_dir(cfg, args, "train-clf")
    try:
        data = np.load(args.latents)
    except OSError as exc:
        raise DataError(f"cannot read latents {args.latents}: {exc}") from exc
    X, y = data["latents"], data["y"]
    m = cfg["model"]
    max_features = m["max_features"]
    if max_features != "sqrt":
        max_features = float(max_features)
    forest = train_random_forest(X, y, ForestConfig(
        n_trees=m["n_trees"], max_features=max_features,
        criterion=m["criterion"], seed=m["seed"]))
    (out / "forest.json").write_text(json.dumps(forest_to_dict(forest)))
    labels, prob = predict_forest(forest, X)
    with open(out / "train_predictions.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y_true", "y_pred", "probability"])
        for yt, yp, pr in zip(y.tolist(), labels.tolist(), prob.tolist()):
            writer.writerow([yt, yp, f"{pr:.6f}"])
    _write_config_echo(cfg, out)
    acc = float(np.mean(labels == y))
    print(f"trained forest (training accuracy {acc:.3f}) -> {out}")
    return 0


def _write_fold_csv(path, fold_reports):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "tp", "tn", "fp", "fn", "accuracy", "f1"])
        for i, r in enumerate(fold_reports):
            writer.writerow([i, r.tp, r.tn, r.fp, r.fn,
                             f"{r.accuracy:.6f}", f"{r.f1:.6f}"])


def _write_predictions_csv(path, predictions):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset_id", "subject_id", "trial_id",
                         "window_index", "y_true", "y_pred", "probability"])
        for key, yt, yp, prob in predictions:
            writer.writerow([*key, yt, yp, f"{prob:.6f}"])


def run_report(cfg, result, timings, artifacts) -> RunReport:
    return RunReport(
        config_echo=render_config(cfg),
        mode=result.mode,
        k=result.k,
        seed=result.seed,
        aggregate=result.report.to_dict(),
        fold_metrics=[r.to_dict() for r in result.fold_reports],
        histories=result.histories,
        timings=timings,
        artifacts=artifacts,
    )


def cmd_run(cfg, args) -> int:
    mode = cfg["model"]["mode"]
    if mode not in MODES:
        raise ConfigError(f"unknown model.mode {mode!r}")
    family, arm = parse_mode(mode)
    out = _out_dir(cfg, args, f"run-{mode}-k{cfg['model']['k']}"
                              f"-seed{cfg['model']['seed']}")
    t0 = time.perf_counter()
    corpus, _ = load_corpus(cfg)
    t_corpus = time.perf_counter()
    results = run_protocol_arms(corpus, family, (arm,), k=cfg["model"]["k"],
                                seed=cfg["model"]["seed"],
                                cfg=protocol_config(cfg))
    result = results[arm]
    t_run = time.perf_counter()
    artifacts = {
        "config": str(out / "config.ini"),
        "report": str(out / "report.json"),
        "folds": str(out / "folds.csv"),
        "predictions": str(out / "predictions.csv"),
    }
    timings = {"corpus_s": t_corpus - t0, "protocol_s": t_run - t_corpus}
    report = run_report(cfg, result, timings, artifacts)
    _write_config_echo(cfg, out)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1))
    _write_fold_csv(out / "folds.csv", result.fold_reports)
    _write_predictions_csv(out / "predictions.csv", result.predictions)
    print(f"{mode}: accuracy {result.report.accuracy:.3f} "
          f"f1 {result.report.f1:.3f} -> {out}")
    return 0


def cmd_compare(cfg, args) -> int:
    modes = args.modes or ["handcrafted_ecg", "handcrafted_eda",
                           "handcrafted_featfusion", "latent_ecg",
                           "latent_eda", "latent_featfusion"]
    for mode in modes:
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r}")
    out = _out_dir(cfg, args, "compare")
    corpus, _ = load_corpus(cfg)
    by_family = {}
    for mode in modes:
        family, arm = parse_mode(mode)
        by_family.setdefault(family, []).append(arm)
    rows = {}
    pcfg = protocol_config(cfg)
    for family, arms in by_family.items():
        results = run_protocol_arms(corpus, family, tuple(arms),
                                    k=cfg["model"]["k"],
                                    seed=cfg["model"]["seed"], cfg=pcfg)
        for arm, result in results.items():
            rows[f"{family}_{arm}"] = result
    datasets = sorted({ds for r in rows.values()
                       for ds in r.report.per_dataset})
    with open(out / "comparison.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["mode", "accuracy", "f1"]
        for ds in datasets:
            header += [f"accuracy_{ds}", f"f1_{ds}"]
        writer.writerow(header)
        for mode in modes:
            r = rows[mode].report
            row = [mode, f"{r.accuracy:.6f}", f"{r.f1:.6f}"]
            for ds in datasets:
                acc, f1 = r.per_dataset.get(ds, (float("nan"), float("nan")))
                row += [f"{acc:.6f}", f"{f1:.6f}"]
            writer.writerow(row)
    _write_config_echo(cfg, out)
    for mode in modes:
        r = rows[mode].report
        print(f"{mode}: accuracy {r.accuracy:.3f} f1 {r.f1:.3f}")
    print(f"comparison table -> {out / 'comparison.csv'}")
    return 0


def cmd_inspect(cfg, args) -> int:
    out = _out_dir(cfg, args, f"inspect-{args.subject}-{args.trial}")
    corpus, _ = load_corpus(cfg)
    pcfg = preprocess_config(cfg)
    dataset = args.dataset or corpus.provenance[0]
    try:
        ecg_rec = corpus.record(dataset, args.subject, args.trial,
                                Modality.ECG)
        eda_rec = corpus.record(dataset, args.subject, args.trial,
                                Modality.EDA)
    except KeyError as exc:
        raise DataError(f"trial not found: {exc}") from exc
    raw_ecg = dsp.TimeSeries(np.asarray(ecg_rec.samples, dtype=float),
                             ecg_rec.sampling_rate)
    filt = dsp.minmax_normalize(dsp.resample(
        dsp.butterworth_bandpass_zero_phase(raw_ecg, *pcfg.ecg_band),
        pcfg.ecg_rate))
    peaks = dsp.pan_tompkins_rpeaks(filt)
    raw_eda = dsp.TimeSeries(np.asarray(eda_rec.samples, dtype=float),
                             eda_rec.sampling_rate)
    eda_filt = dsp.minmax_normalize(dsp.resample(
        dsp.moving_average(dsp.lowpass(raw_eda, pcfg.eda_cutoff),
                           pcfg.eda_smooth), pcfg.eda_rate))
    ecg_times = np.arange(len(filt.values)) / filt.sampling_rate
    with open(out / "filtered_ecg.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "value"])
        for t, v in zip(ecg_times, filt.values):
            writer.writerow([f"{t:.6f}", f"{v:.8f}"])
    with open(out / "r_peaks.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s"])
        for t in peaks.times:
            writer.writerow([f"{t:.6f}"])
    eda_times = np.arange(len(eda_filt.values)) / eda_filt.sampling_rate
    with open(out / "filtered_eda.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "value"])
        for t, v in zip(eda_times, eda_filt.values):
            writer.writerow([f"{t:.6f}", f"{v:.8f}"])
    _write_config_echo(cfg, out)
    print(f"wrote filtered signals and {len(peaks.times)} R peaks to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arousalkit",
        description="ECG/EDA representation learning and arousal "
                    "classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override a config key")
        p.add_argument("--name", help="output directory name under output.dir")
        p.add_argument("--force", action="store_true",
                       help="allow writing into an existing output directory")

    common(sub.add_parser("synth", help="generate a synthetic corpus"))
    common(sub.add_parser("preprocess", help="condition and window a corpus"))
    common(sub.add_parser("features", help="hand-crafted feature CSVs"))

    p = sub.add_parser("train-ae", help="train one autoencoder on windows")
    common(p)
    p.add_argument("--windows", required=True, help="windows.npz path")
    p.add_argument("--modality", choices=("ecg", "eda"), required=True)

    p = sub.add_parser("encode", help="latent representations from a model")
    common(p)
    p.add_argument("--windows", required=True, help="windows.npz path")
    p.add_argument("--model", required=True, help="trained network .npz")
    p.add_argument("--modality", choices=("ecg", "eda"), required=True)

    p = sub.add_parser("train-clf", help="train a random forest on latents")
    common(p)
    p.add_argument("--latents", required=True, help="latents.npz path")

    common(sub.add_parser("run", help="full k-fold protocol for one mode"))

    p = sub.add_parser("compare", help="run several modes, emit a table")
    common(p)
    p.add_argument("--modes", nargs="*", help="modes to compare")

    p = sub.add_parser("inspect", help="dump filtered signals and peaks")
    common(p)
    p.add_argument("--dataset", help="dataset id (default: first in corpus)")
    p.add_argument("--subject", required=True)
    p.add_argument("--trial", required=True)
    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "features": cmd_features,
    "train-ae": cmd_train_ae,
    "encode": cmd_encode,
    "train-clf": cmd_train_clf,
    "run": cmd_run,
    "compare": cmd_compare,
    "inspect": cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ArousalKitError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
