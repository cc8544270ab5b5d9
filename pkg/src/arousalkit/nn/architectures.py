"""Stacked convolutional autoencoder, CNN and MLP architecture builders.

Both autoencoders bottleneck to an 80-unit dense latent layer carrying an L1
activity penalty of 1e-9.  The ECG network maps 2560-sample windows through
pooled lengths 2560 -> 1280 -> 640 -> 320 -> 160 -> 80; the EDA network maps
1280-sample windows through 1280 -> 640 -> 320 -> 160 -> 80.  Decoders mirror
their encoders with upsampling in place of pooling and no batch
normalization.

Conv-block internals (filter counts and kernel sizes) are halving schedules
chosen to fit the documented length chains at a modest CPU budget; they are
exposed here as module constants.
"""

from __future__ import annotations

from .network import LayerSpec, NetworkSpec

LATENT_SIZE = 80
LATENT_L1 = 1e-9

ECG_INPUT = (2560, 1)
EDA_INPUT = (1280, 1)
ECG_FIRST_CONV = (128, 200)  # filters, kernel
EDA_FIRST_CONV = (32, 100)
FINAL_CONV_KERNEL = 10

# (filters, kernel_a, kernel_b) per convolutional block
ECG_BLOCKS = ((32, 10, 5), (16, 10, 5), (8, 10, 5))
EDA_BLOCKS = ((16, 10, 5), (8, 10, 5))


def _conv(filters, kernel):
    return LayerSpec("Conv1D", {"filters": filters, "kernel": kernel})


def _relu():
    return LayerSpec("Activation", {"name": "relu"})


def _encoder_conv_stack(first_conv, blocks):
    """Convolution/pooling stack reducing the input length to 80."""
    filters, kernel = first_conv
    layers = [
        _conv(filters, kernel),
        _relu(),
        LayerSpec("MaxPool1D", {"size": 2}),
    ]
    for f, ka, kb in blocks:
        layers += [
            _conv(f, ka),
            _relu(),
            _conv(f, kb),
            _relu(),
            LayerSpec("BatchNorm1D"),
            LayerSpec("MaxPool1D", {"size": 2}),
        ]
    layers += [
        _conv(1, FINAL_CONV_KERNEL),
        _relu(),
        LayerSpec("MaxPool1D", {"size": 2}),
    ]
    return layers


def _decoder_stack(first_conv, blocks):
    """Mirror of the encoder stack: upsampling and convolutions in reverse
    order, ReLU output convolution, no batch normalization."""
    first_filters, first_kernel = first_conv
    layers = [
        LayerSpec("Reshape", {"target_shape": (LATENT_SIZE, 1)}),
        LayerSpec("Upsample1D", {"factor": 2}),
        _conv(blocks[-1][0], FINAL_CONV_KERNEL),
        _relu(),
    ]
    for i in range(len(blocks) - 1, -1, -1):
        f, ka, kb = blocks[i]
        f_out = blocks[i - 1][0] if i > 0 else first_filters
        layers += [
            LayerSpec("Upsample1D", {"factor": 2}),
            _conv(f, kb),
            _relu(),
            _conv(f_out, ka),
            _relu(),
        ]
    layers += [
        LayerSpec("Upsample1D", {"factor": 2}),
        # positive bias start keeps the ReLU output layer out of the dead
        # regime for targets in [0, 1]
        LayerSpec("Conv1D", {"filters": 1, "kernel": first_kernel,
                             "bias_init": 0.5}),
        _relu(),
    ]
    return layers


def _build_autoencoder(input_shape, first_conv, blocks):
    encoder = _encoder_conv_stack(first_conv, blocks)
    encoder.append(LayerSpec("Flatten"))
    encoder.append(
        LayerSpec("Dense", {"units": LATENT_SIZE, "l1_activity": LATENT_L1,
                            "activation_hint": "linear"})
    )
    latent_tap = len(encoder) - 1
    layers = encoder + _decoder_stack(first_conv, blocks)
    return NetworkSpec(layers=tuple(layers), input_shape=input_shape,
                       latent_tap=latent_tap)


def build_ae_ecg() -> NetworkSpec:
    """Stacked sparse convolutional autoencoder for 2560-sample ECG windows."""
    return _build_autoencoder(ECG_INPUT, ECG_FIRST_CONV, ECG_BLOCKS)


def build_ae_eda() -> NetworkSpec:
    """Stacked sparse convolutional autoencoder for 1280-sample EDA windows."""
    return _build_autoencoder(EDA_INPUT, EDA_FIRST_CONV, EDA_BLOCKS)


def build_cnn(modality: str) -> NetworkSpec:
    """Supervised CNN baseline: the matching encoder conv stack followed by
    dense layers of 80, 40, 20 and 1 units with dropout 0.5 in between,
    sigmoid output, and an L1 activity penalty on the first dense layer.

    The latent tap sits after the conv stack (80 units), where fusion taps
    the learned representation.
    """
    modality = modality.upper()
    if modality == "ECG":
        input_shape, first_conv, blocks = ECG_INPUT, ECG_FIRST_CONV, ECG_BLOCKS
    elif modality == "EDA":
        input_shape, first_conv, blocks = EDA_INPUT, EDA_FIRST_CONV, EDA_BLOCKS
    else:
        raise ValueError(f"unknown modality {modality!r}")
    layers = _encoder_conv_stack(first_conv, blocks)
    layers.append(LayerSpec("Flatten"))
    latent_tap = len(layers) - 1
    layers += [
        LayerSpec("Dense", {"units": 80, "l1_activity": LATENT_L1}),
        _relu(),
        LayerSpec("Dropout", {"rate": 0.5}),
        LayerSpec("Dense", {"units": 40}),
        _relu(),
        LayerSpec("Dropout", {"rate": 0.5}),
        LayerSpec("Dense", {"units": 20}),
        _relu(),
        LayerSpec("Dropout", {"rate": 0.5}),
        LayerSpec("Dense", {"units": 1, "activation_hint": "sigmoid"}),
        LayerSpec("Activation", {"name": "sigmoid"}),
    ]
    return NetworkSpec(layers=tuple(layers), input_shape=input_shape,
                       latent_tap=latent_tap)


def build_mlp(dims=(160, 80, 40, 40, 1), dropout: float = 0.5) -> NetworkSpec:
    """Dense classifier: ReLU hidden layers with dropout, sigmoid output.

    dims[0] is the width of the input dense layer (its input dimension is
    inferred from the data shape at build time via input_shape)."""
    layers = []
    for width in dims[:-1]:
        layers += [
            LayerSpec("Dense", {"units": width}),
            _relu(),
        ]
        if dropout > 0:
            layers.append(LayerSpec("Dropout", {"rate": dropout}))
    layers += [
        LayerSpec("Dense", {"units": dims[-1], "activation_hint": "sigmoid"}),
        LayerSpec("Activation", {"name": "sigmoid"}),
    ]
    return NetworkSpec(layers=tuple(layers), input_shape=(dims[0],))


def build_fusion_head(n_inputs: int = 160) -> NetworkSpec:
    """Head used for CNN feature-level fusion: dense 40 + dropout + sigmoid."""
    layers = (
        LayerSpec("Dense", {"units": 40}),
        _relu(),
        LayerSpec("Dropout", {"rate": 0.5}),
        LayerSpec("Dense", {"units": 1, "activation_hint": "sigmoid"}),
        LayerSpec("Activation", {"name": "sigmoid"}),
    )
    return NetworkSpec(layers=layers, input_shape=(n_inputs,))
