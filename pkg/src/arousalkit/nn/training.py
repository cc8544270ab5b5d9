"""Mini-batch training with RMSProp/Adam, early stopping and best-epoch restore."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, NumericError
from . import layers as L
from .network import Network, NetworkSpec, build_network

BCE_CLIP = 1e-7


@dataclass
class TrainConfig:
    optimizer: str = "RMSProp"  # or "Adam"
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 20
    patience: int = 4
    loss: str = "MSE"  # or "BinaryCrossEntropy"
    seed: int = 0
    clip_norm: float = 0.0  # global gradient-norm clip; None/0 disables

    def __post_init__(self):
        if self.learning_rate < 0:
            raise DataError("learning_rate must be >= 0")
        if self.patience < 0:
            raise DataError("patience must be >= 0")
        if self.optimizer not in ("RMSProp", "Adam"):
            raise DataError(f"unknown optimizer {self.optimizer!r}")
        if self.loss not in ("MSE", "BinaryCrossEntropy"):
            raise DataError(f"unknown loss {self.loss!r}")


@dataclass
class TrainedNetwork:
    network: Network
    history: dict = field(default_factory=dict)

    @property
    def spec(self) -> NetworkSpec:
        return self.network.spec


def mse_loss(pred, target):
    diff = pred - target
    loss = float(np.mean(diff.astype(np.float64) ** 2))
    grad = (2.0 / diff.size) * diff
    return loss, grad


def bce_loss(pred, target):
    p = np.clip(pred, BCE_CLIP, 1.0 - BCE_CLIP)
    t = target
    loss = float(-np.mean(t * np.log(p.astype(np.float64))
                          + (1 - t) * np.log1p(-p.astype(np.float64))))
    grad = ((p - t) / (p * (1.0 - p))) / p.size
    return loss, grad.astype(pred.dtype)


_LOSSES = {"MSE": mse_loss, "BinaryCrossEntropy": bce_loss}


# weight tensors with fan-in above this get a proportionally smaller step:
# RMSProp moves every coordinate at ~lr regardless of gradient size, so a
# coherent step across a wide fan-in shifts pre-activations by O(lr * fan_in)
# and can push ReLU layers into the dead all-negative regime within a few
# batches.  Scaling the rate by min(1, ref / fan_in) bounds that shift.
FANIN_LR_REF = 512.0


class RMSProp:
    def __init__(self, lr, rho=0.9, eps=1e-7, fanin_ref=FANIN_LR_REF):
        self.lr, self.rho, self.eps = lr, rho, eps
        self.fanin_ref = fanin_ref
        self.state = {}

    def step(self, key, param, grad):
        acc = self.state.setdefault(key, np.zeros_like(param))
        acc *= self.rho
        acc += (1 - self.rho) * grad * grad
        lr = self.lr
        if self.fanin_ref and param.ndim >= 2:
            fan_in = int(np.prod(param.shape[:-1]))
            lr *= min(1.0, self.fanin_ref / fan_in)
        param -= lr * grad / (np.sqrt(acc) + self.eps)


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.state = {}
        self.t = 0

    def begin_step(self):
        self.t += 1

    def step(self, key, param, grad):
        m, v = self.state.setdefault(
            key, (np.zeros_like(param), np.zeros_like(param)))
        m *= self.b1
        m += (1 - self.b1) * grad
        v *= self.b2
        v += (1 - self.b2) * grad * grad
        mhat = m / (1 - self.b1 ** self.t)
        vhat = v / (1 - self.b2 ** self.t)
        param -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def _make_optimizer(cfg: TrainConfig):
    if cfg.optimizer == "Adam":
        return Adam(cfg.learning_rate)
    return RMSProp(cfg.learning_rate)


def _activity_penalty(net: Network) -> float:
    total = 0.0
    for layer in net.layers:
        if isinstance(layer, L.Dense) and layer.l1_activity > 0:
            out = layer._cache[3]
            if out is not None:
                total += layer.activity_penalty(out)
    return total


def evaluate_loss(net: Network, X, y, cfg: TrainConfig, batch_size=256) -> float:
    """Inference-mode mean loss over a dataset."""
    loss_fn = _LOSSES[cfg.loss]
    total, count = 0.0, 0
    for lo in range(0, len(X), batch_size):
        xb = X[lo:lo + batch_size]
        yb = y[lo:lo + batch_size]
        pred = net.forward(xb, training=False)
        loss, _ = loss_fn(pred, np.asarray(yb, dtype=pred.dtype))
        total += loss * len(xb)
        count += len(xb)
    return total / max(count, 1)


def train(spec: NetworkSpec, train_data, val_data, cfg: TrainConfig,
          init_seed: int = None) -> TrainedNetwork:
    """Train a network and return the best-validation-epoch parameters.

    train_data / val_data are (X, y) pairs; for autoencoders y is X.  Stops
    early when validation loss fails to improve for `patience` epochs.
    """
    X, y = train_data
    Xv, yv = val_data
    X = np.asarray(X)
    y = np.asarray(y)
    if len(X) == 0:
        raise DataError("empty training set")
    if tuple(X.shape[1:]) != spec.input_shape:
        raise DataError(
            f"data shape {X.shape[1:]} does not match spec input {spec.input_shape}"
        )
    net = build_network(spec, seed=cfg.seed if init_seed is None else init_seed)
    rng = np.random.default_rng(cfg.seed)
    opt = _make_optimizer(cfg)
    loss_fn = _LOSSES[cfg.loss]

    history = {"train_loss": [], "val_loss": []}
    best_val = np.inf
    best_state = net.get_state()
    best_epoch = -1
    stall = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(X))
        epoch_loss, seen = 0.0, 0
        for bi, lo in enumerate(range(0, len(X), cfg.batch_size)):
            idx = order[lo:lo + cfg.batch_size]
            xb = X[idx]
            yb = np.asarray(y[idx], dtype=net.dtype)
            pred = net.forward(xb, training=True, rng=rng)
            loss, grad = loss_fn(pred, yb)
            loss += _activity_penalty(net)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at epoch {epoch}, batch {bi}"
                )
            net.backward(grad.astype(net.dtype))
            if cfg.clip_norm:
                gnorm = np.sqrt(sum(float((g ** 2).sum())
                                    for _, _, g in net.gradients()))
                if gnorm > cfg.clip_norm:
                    scale = cfg.clip_norm / gnorm
                    for _, _, g in net.gradients():
                        g *= scale
            if isinstance(opt, Adam):
                opt.begin_step()
            for i, name, garr in net.gradients():
                opt.step((i, name), net.layers[i].params[name], garr)
            epoch_loss += loss * len(idx)
            seen += len(idx)
        history["train_loss"].append(epoch_loss / seen)
        val_loss = evaluate_loss(net, Xv, yv, cfg)
        history["val_loss"].append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_state = net.get_state()
            best_epoch = epoch
            stall = 0
        else:
            stall += 1
            if stall >= max(cfg.patience, 1):
                break
    net.set_state(best_state)
    history["best_epoch"] = best_epoch
    return TrainedNetwork(network=net, history=history)


def encode(trained: TrainedNetwork, batch) -> np.ndarray:
    """Latent representations from the encoder tap, inference mode."""
    tap = trained.spec.latent_tap
    if tap is None:
        raise DataError("network spec has no latent tap")
    return trained.network.forward(np.asarray(batch), training=False, upto=tap)


def predict(trained: TrainedNetwork, batch) -> np.ndarray:
    """Full forward pass in inference mode."""
    return trained.network.forward(np.asarray(batch), training=False)
