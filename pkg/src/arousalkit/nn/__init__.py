"""Minimal reverse-mode neural-network engine for 1D signal models."""

from .network import LayerSpec, NetworkSpec, Network, build_network, save_network, load_network
from .training import TrainConfig, TrainedNetwork, train, encode, predict
from .architectures import (
    build_ae_ecg,
    build_ae_eda,
    build_cnn,
    build_mlp,
    build_fusion_head,
)

__all__ = [
    "LayerSpec",
    "NetworkSpec",
    "Network",
    "build_network",
    "save_network",
    "load_network",
    "TrainConfig",
    "TrainedNetwork",
    "train",
    "encode",
    "predict",
    "build_ae_ecg",
    "build_ae_eda",
    "build_cnn",
    "build_mlp",
    "build_fusion_head",
]
