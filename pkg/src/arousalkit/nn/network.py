"""Network assembly from layer specifications, plus model persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from . import layers as L

FORMAT_VERSION = 1

_LAYER_CLASSES = {
    "Conv1D": L.Conv1D,
    "MaxPool1D": L.MaxPool1D,
    "Upsample1D": L.Upsample1D,
    "Dense": L.Dense,
    "BatchNorm1D": L.BatchNorm1D,
    "Dropout": L.Dropout,
    "Activation": L.Activation,
    "Flatten": L.Flatten,
    "Reshape": L.Reshape,
}

# kinds that count toward the architecture's stated hidden-layer totals
_STRUCTURAL_KINDS = {"Conv1D", "MaxPool1D", "Upsample1D", "Dense", "BatchNorm1D"}


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _LAYER_CLASSES:
            raise DataError(f"unknown layer kind {self.kind!r}")

    def build(self):
        return _LAYER_CLASSES[self.kind](**self.params)


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple
    input_shape: tuple
    latent_tap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "input_shape", tuple(int(s) for s in self.input_shape))
        if self.latent_tap is not None and not (
            0 <= self.latent_tap < len(self.layers)
        ):
            raise DataError(f"latent_tap {self.latent_tap} out of range")

    def shape_chain(self):
        """Per-layer output shapes; raises if shapes do not chain."""
        shapes = [self.input_shape]
        for spec in self.layers:
            shapes.append(tuple(spec.build().output_shape(shapes[-1])))
        return shapes

    def structural_layer_count(self) -> int:
        return sum(1 for s in self.layers if s.kind in _STRUCTURAL_KINDS)

    def to_dict(self):
        return {
            "input_shape": list(self.input_shape),
            "latent_tap": self.latent_tap,
            "layers": [{"kind": s.kind, "params": s.params} for s in self.layers],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            layers=tuple(LayerSpec(s["kind"], s["params"]) for s in d["layers"]),
            input_shape=tuple(d["input_shape"]),
            latent_tap=d["latent_tap"],
        )


class Network:
    """Concrete network: built layers with initialized parameters."""

    def __init__(self, spec: NetworkSpec, layers_built, dtype):
        self.spec = spec
        self.layers = layers_built
        self.dtype = dtype

    def forward(self, x, training=False, rng=None, upto=None):
        out = np.asarray(x, dtype=self.dtype)
        stop = len(self.layers) if upto is None else upto + 1
        for layer in self.layers[:stop]:
            out = layer.forward(out, training=training, rng=rng)
        return out

    def backward(self, gout):
        g = gout
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            if i == 0 and isinstance(layer, L.Conv1D):
                # gradient w.r.t. the network input is never consumed
                return layer.backward(g, need_input_grad=False)
            g = layer.backward(g)
        return g

    def parameters(self):
        """Yield (layer_index, name, array) for every parameter."""
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params.items():
                yield i, name, arr

    def gradients(self):
        for i, layer in enumerate(self.layers):
            for name in layer.params:
                yield i, name, layer.grads[name]

    def activity_penalty_of(self, outputs_by_layer):
        total = 0.0
        for i, layer in enumerate(self.layers):
            if isinstance(layer, L.Dense) and layer.l1_activity > 0:
                total += layer.activity_penalty(outputs_by_layer[i])
        return total

    def get_state(self):
        """Deep copy of all parameters and batchnorm running stats."""
        state = {}
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params.items():
                state[f"{i}/{name}"] = arr.copy()
            if isinstance(layer, L.BatchNorm1D):
                state[f"{i}/running_mean"] = layer.running_mean.copy()
                state[f"{i}/running_var"] = layer.running_var.copy()
        return state

    def set_state(self, state):
        for i, layer in enumerate(self.layers):
            for name in layer.params:
                layer.params[name] = state[f"{i}/{name}"].copy()
            if isinstance(layer, L.BatchNorm1D):
                layer.running_mean = state[f"{i}/running_mean"].copy()
                layer.running_var = state[f"{i}/running_var"].copy()
                layer._stats_seen = True


def build_network(spec: NetworkSpec, seed: int = 0, dtype=np.float32) -> Network:
    """Instantiate a spec with seeded weight initialization."""
    rng = np.random.default_rng(seed)
    built = []
    shape = spec.input_shape
    for layer_spec in spec.layers:
        layer = layer_spec.build()
        layer.init_params(shape, rng, dtype)
        shape = tuple(layer.output_shape(shape))
        built.append(layer)
    return Network(spec, built, dtype)


def save_network(net: Network, path, history=None):
    """Persist spec, parameters, running stats and training history."""
    header = {
        "version": FORMAT_VERSION,
        "dtype": np.dtype(net.dtype).name,
        "spec": net.spec.to_dict(),
        "history": history or {},
    }
    arrays = {k.replace("/", "__"): v.astype(np.float64)
              for k, v in net.get_state().items()}
    np.savez(path, __header__=np.frombuffer(
        json.dumps(header).encode(), dtype=np.uint8), **arrays)


def load_network(path):
    """Load a persisted network; returns (Network, history)."""
    data = np.load(path)
    header = json.loads(bytes(data["__header__"]).decode())
    if header["version"] != FORMAT_VERSION:
        raise DataError(f"unsupported model format version {header['version']}")
    spec = NetworkSpec.from_dict(header["spec"])
    dtype = np.dtype(header["dtype"])
    net = build_network(spec, seed=0, dtype=dtype)
    state = {k.replace("__", "/"): data[k].astype(dtype)
             for k in data.files if k != "__header__"}
    net.set_state(state)
    return net, header["history"]
