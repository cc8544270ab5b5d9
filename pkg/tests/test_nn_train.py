"""Training-loop behavior: optimization, early stopping, sparsity, encoding."""

import numpy as np
import pytest

from arousalkit.errors import DataError, NumericError
from arousalkit.nn import (
    LayerSpec, NetworkSpec, TrainConfig, build_mlp, build_network, encode,
    load_network, predict, save_network, train,
)


def _dense_ae_spec(n_in=20, latent=4, l1=0.0):
    layers = (
        LayerSpec("Dense", {"units": latent, "l1_activity": l1,
                            "activation_hint": "linear"}),
        LayerSpec("Dense", {"units": n_in, "activation_hint": "linear"}),
    )
    return NetworkSpec(layers=layers, input_shape=(n_in,), latent_tap=0)


def _lowrank_data(n=120, n_in=20, rank=3, seed=0):
    rng = np.random.default_rng(seed)
    basis = rng.standard_normal((rank, n_in))
    codes = rng.standard_normal((n, rank))
    return (codes @ basis / np.sqrt(rank)).astype(np.float32)


def test_autoencoder_beats_constant_predictor():
    X = _lowrank_data()
    tr, va = X[:100], X[100:]
    cfg = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=40,
                      patience=8, seed=0)
    trained = train(_dense_ae_spec(), (tr, tr), (va, va), cfg)
    const_mse = float(np.mean((va - tr.mean(axis=0)) ** 2))
    assert min(trained.history["val_loss"]) < 0.5 * const_mse


def test_early_stopping_restores_best_epoch():
    X = _lowrank_data(seed=1)
    tr, va = X[:100], X[100:]
    cfg = TrainConfig(learning_rate=5e-2, batch_size=8, max_epochs=60,
                      patience=3, seed=1)
    trained = train(_dense_ae_spec(), (tr, tr), (va, va), cfg)
    hist = trained.history
    best = hist["best_epoch"]
    assert hist["val_loss"][best] == min(hist["val_loss"])
    # training stopped no later than patience epochs past the best one
    assert len(hist["val_loss"]) <= best + cfg.patience + 1
    # restored parameters reproduce the best validation loss
    rec = predict(trained, va)
    mse = float(np.mean((rec - va) ** 2))
    assert mse == pytest.approx(hist["val_loss"][best], rel=1e-5)


def test_l1_activity_shrinks_latents():
    X = _lowrank_data(seed=2)
    tr, va = X[:100], X[100:]
    cfg = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=30,
                      patience=30, seed=3)
    small = train(_dense_ae_spec(l1=1e-9), (tr, tr), (va, va), cfg)
    large = train(_dense_ae_spec(l1=1e-2), (tr, tr), (va, va), cfg)
    mean_abs_small = float(np.mean(np.abs(encode(small, va))))
    mean_abs_large = float(np.mean(np.abs(encode(large, va))))
    assert mean_abs_large < mean_abs_small


def test_classifier_fits_separable_data():
    rng = np.random.default_rng(4)
    X = np.vstack([rng.standard_normal((30, 8)) - 2,
                   rng.standard_normal((30, 8)) + 2]).astype(np.float32)
    y = np.array([0.0] * 30 + [1.0] * 30, dtype=np.float32)[:, None]
    order = rng.permutation(60)
    X, y = X[order], y[order]
    spec = build_mlp(dims=(8, 8, 1), dropout=0.0)
    cfg = TrainConfig(learning_rate=1e-2, batch_size=10, max_epochs=50,
                      patience=50, loss="BinaryCrossEntropy", seed=5)
    trained = train(spec, (X[:50], y[:50]), (X[50:], y[50:]), cfg)
    pred = (predict(trained, X) >= 0.5).astype(float)
    assert np.mean(pred == y) >= 0.9


def test_adam_optimizer_also_converges():
    X = _lowrank_data(seed=6)
    cfg = TrainConfig(optimizer="Adam", learning_rate=1e-2, batch_size=16,
                      max_epochs=30, patience=30, seed=6)
    trained = train(_dense_ae_spec(), (X[:100], X[:100]),
                    (X[100:], X[100:]), cfg)
    assert trained.history["train_loss"][-1] < trained.history["train_loss"][0]


def test_train_rejects_shape_mismatch():
    X = np.zeros((10, 7), dtype=np.float32)
    with pytest.raises(DataError):
        train(_dense_ae_spec(n_in=20), (X, X), (X, X), TrainConfig())


def test_train_rejects_empty_set():
    X = np.zeros((0, 20), dtype=np.float32)
    with pytest.raises(DataError):
        train(_dense_ae_spec(), (X, X), (X, X), TrainConfig())


def test_non_finite_loss_raises():
    X = _lowrank_data(seed=7)
    cfg = TrainConfig(learning_rate=1e12, batch_size=16, max_epochs=10,
                      patience=10, seed=7)
    with pytest.raises(NumericError):
        train(_dense_ae_spec(), (X[:100], X[:100]), (X[100:], X[100:]), cfg)


def test_training_deterministic_for_seed():
    X = _lowrank_data(seed=8)
    cfg = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=5,
                      patience=5, seed=9)
    t1 = train(_dense_ae_spec(), (X[:100], X[:100]), (X[100:], X[100:]), cfg)
    t2 = train(_dense_ae_spec(), (X[:100], X[:100]), (X[100:], X[100:]), cfg)
    assert t1.history["val_loss"] == t2.history["val_loss"]
    np.testing.assert_array_equal(encode(t1, X), encode(t2, X))


def test_encode_requires_latent_tap():
    spec = NetworkSpec(layers=(LayerSpec("Dense", {"units": 3}),),
                       input_shape=(5,))
    net = build_network(spec)
    trained_like = type("T", (), {"spec": spec, "network": net})()
    with pytest.raises(DataError):
        encode(trained_like, np.zeros((2, 5), dtype=np.float32))


def test_save_load_roundtrip(tmp_path):
    X = _lowrank_data(seed=10)
    cfg = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=3,
                      patience=3, seed=11)
    trained = train(_dense_ae_spec(), (X[:100], X[:100]),
                    (X[100:], X[100:]), cfg)
    path = tmp_path / "net.npz"
    save_network(trained.network, path, history=trained.history)
    net, history = load_network(path)
    assert history["best_epoch"] == trained.history["best_epoch"]
    np.testing.assert_allclose(net.forward(X, training=False),
                               trained.network.forward(X, training=False),
                               atol=1e-6)
