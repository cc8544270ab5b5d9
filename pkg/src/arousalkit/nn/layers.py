"""Differentiable layers over numpy arrays.

Signal tensors are (batch, length, channels); dense activations are
(batch, units).  Every layer caches what its backward pass needs during
forward; backward consumes the upstream gradient and accumulates parameter
gradients in `grads`.
"""

from __future__ import annotations

import numpy as np
import scipy.fft
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DataError

BATCHNORM_EPS = 1e-3
BATCHNORM_MOMENTUM = 0.99

# kernels at least this wide run through the FFT path instead of shifted matmuls
FFT_KERNEL_MIN = 64
# per-tap shifted matmuls stay efficient while the contraction dim is wide
KLOOP_MIN_INNER = 64
# bytes of patch matrix the im2col path may materialize
IM2COL_MEM_LIMIT = 300_000_000


class Layer:
    """Base layer: no parameters, identity shape."""

    def __init__(self):
        self.params = {}
        self.grads = {}

    def output_shape(self, input_shape):
        return input_shape

    def init_params(self, input_shape, rng, dtype):
        pass

    def forward(self, x, training=False, rng=None):
        raise NotImplementedError

    def backward(self, gout):
        raise NotImplementedError


def _init_weight(shape, fan_in, fan_out, activation, rng, dtype):
    """Fan-in-scaled Gaussian for ReLU paths, symmetric-uniform fan-average
    otherwise; biases are zeroed by the callers."""
    if activation == "relu":
        w = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
    else:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=shape)
    return w.astype(dtype)


class Conv1D(Layer):
    """Same-padded 1D cross-correlation: out[t, f] = sum_{k,c} x[t+k-K//2, c] w[k,c,f] + b[f]."""

    def __init__(self, filters, kernel, bias_init=0.0):
        super().__init__()
        if kernel < 1:
            raise DataError(f"kernel must be >= 1, got {kernel}")
        self.filters = int(filters)
        self.kernel = int(kernel)
        self.bias_init = float(bias_init)

    def output_shape(self, input_shape):
        if len(input_shape) != 2:
            raise DataError(f"Conv1D expects (length, channels), got {input_shape}")
        return (input_shape[0], self.filters)

    def init_params(self, input_shape, rng, dtype):
        _, c_in = input_shape
        k = self.kernel
        self.params = {
            "W": _init_weight((k, c_in, self.filters), k * c_in, k * self.filters,
                              "relu", rng, dtype),
            "b": np.full(self.filters, self.bias_init, dtype=dtype),
        }
        self._pad_left = k // 2
        self._pad_right = k - 1 - self._pad_left

    def _fft_len(self, L):
        return scipy.fft.next_fast_len(L + self.kernel - 1)

    @staticmethod
    def _corr_path(B, L, C, K):
        """Cheapest route for a same-padded correlation with a (K, C, *) kernel.

        The per-tap matmul loop keeps full BLAS efficiency only while the
        contraction dimension C is wide; the im2col matmul is fastest
        otherwise but materializes a (B*L, C*K) patch matrix; the FFT path
        covers wide kernels whose patch matrix would not fit."""
        if C >= KLOOP_MIN_INNER and K < FFT_KERNEL_MIN:
            return "kloop"
        if 4 * B * L * C * K <= IM2COL_MEM_LIMIT:
            return "im2col"
        return "fft" if K >= FFT_KERNEL_MIN else "kloop"

    def _correlate(self, x, W, pad_left, pad_right):
        """Same-padded correlation out[t, f] = sum_{k, c} x[t+k-pl, c] W[k, c, f]."""
        B, L, C = x.shape
        K, _, F = W.shape
        path = self._corr_path(B, L, C, K)
        if path == "fft":
            # correlation as convolution with the reversed kernel; slicing at
            # pad_right picks the same-padded alignment
            n = self._fft_len(L)
            xf = scipy.fft.rfft(x, n=n, axis=1)
            wf = scipy.fft.rfft(W[::-1], n=n, axis=0)
            yf = np.einsum("bnc,ncf->bnf", xf, wf)
            y = scipy.fft.irfft(yf, n=n, axis=1)
            return y[:, pad_right:pad_right + L, :].astype(x.dtype)
        xp = np.pad(x, ((0, 0), (pad_left, pad_right), (0, 0)))
        if path == "im2col":
            cols = sliding_window_view(xp, K, axis=1).reshape(B * L, C * K)
            # contiguity matters: a strided weight view knocks matmul off BLAS
            Wm = np.ascontiguousarray(W.transpose(1, 0, 2)).reshape(C * K, F)
            return (cols @ Wm).reshape(B, L, F)
        out = np.zeros((B, L, F), dtype=x.dtype)
        for k in range(K):
            out += xp[:, k:k + L, :] @ W[k]
        return out

    def forward(self, x, training=False, rng=None):
        B, L, C = x.shape
        K, C_w, F = self.params["W"].shape
        if C != C_w:
            raise DataError(f"Conv1D channel mismatch: input {C}, weights {C_w}")
        self._cache = (x, (B, L, C))
        out = self._correlate(x, self.params["W"], self._pad_left, self._pad_right)
        out += self.params["b"]
        return out

    def backward(self, gout, need_input_grad=True):
        x, (B, L, C) = self._cache
        K, _, F = self.params["W"].shape
        W = self.params["W"]
        self.grads["b"] = gout.sum(axis=(0, 1))
        # weight gradient: cross-correlation of the padded input with gout.
        # Its contraction runs over batch*length; per-tap matmuls already
        # have a good BLAS shape when C is wide and avoid the big patch
        # matrix, which is otherwise worth materializing when it fits.
        if C >= KLOOP_MIN_INNER and K < FFT_KERNEL_MIN:
            path = "kloop"
        elif 4 * B * L * C * K <= IM2COL_MEM_LIMIT:
            path = "im2col"
        elif K >= FFT_KERNEL_MIN:
            path = "fft"
        else:
            path = "kloop"
        if path == "fft":
            n = self._fft_len(L)
            xp = np.pad(x, ((0, 0), (self._pad_left, self._pad_right), (0, 0)))
            xpf = scipy.fft.rfft(xp, n=n, axis=1)
            gf = scipy.fft.rfft(gout, n=n, axis=1)
            sf = np.einsum("bnc,bnf->ncf", xpf, gf.conj())
            gw_full = scipy.fft.irfft(sf, n=n, axis=0)
            self.grads["W"] = gw_full[:K].astype(W.dtype)
        else:
            xp = np.pad(x, ((0, 0), (self._pad_left, self._pad_right), (0, 0)))
            if path == "im2col":
                cols = sliding_window_view(xp, K, axis=1).reshape(B * L, C * K)
                gWm = cols.T @ gout.reshape(B * L, F)
                self.grads["W"] = (
                    gWm.reshape(C, K, F).transpose(1, 0, 2).astype(W.dtype, copy=True)
                )
            else:
                go2 = gout.reshape(B * L, F)
                gW = np.empty((K, C, F), dtype=W.dtype)
                for k in range(K):
                    xs = np.ascontiguousarray(xp[:, k:k + L, :]).reshape(-1, C)
                    gW[k] = xs.T @ go2
                self.grads["W"] = gW
        if not need_input_grad:
            return None
        # input gradient is itself a same-padded correlation of gout with the
        # kernel reversed along taps and transposed in its channel axes
        return self._correlate(gout, W[::-1].transpose(0, 2, 1),
                               self._pad_right, self._pad_left)


class MaxPool1D(Layer):
    """Blockwise per-channel max; gradient routed to the first argmax."""

    def __init__(self, size=2):
        super().__init__()
        if size < 2:
            raise DataError(f"pool size must be >= 2, got {size}")
        self.size = int(size)

    def output_shape(self, input_shape):
        L, C = input_shape
        if L % self.size != 0:
            raise DataError(f"length {L} not divisible by pool size {self.size}")
        return (L // self.size, C)

    def forward(self, x, training=False, rng=None):
        B, L, C = x.shape
        if L % self.size != 0:
            raise DataError(f"length {L} not divisible by pool size {self.size}")
        self._in_shape = x.shape
        if self.size == 2:
            # strided halves avoid the generic argmax/gather machinery; ties
            # route to the first element, matching argmax
            a, b = x[:, 0::2, :], x[:, 1::2, :]
            self._first_wins = a >= b
            return np.maximum(a, b)
        blocks = x.reshape(B, L // self.size, self.size, C)
        self._argmax = blocks.argmax(axis=2)
        return np.take_along_axis(blocks, self._argmax[:, :, None, :], axis=2)[:, :, 0, :]

    def backward(self, gout):
        B, L, C = self._in_shape
        if self.size == 2:
            gx = np.empty((B, L, C), dtype=gout.dtype)
            np.multiply(gout, self._first_wins, out=gx[:, 0::2, :])
            np.subtract(gout, gx[:, 0::2, :], out=gx[:, 1::2, :])
            return gx
        gblocks = np.zeros((B, L // self.size, self.size, C), dtype=gout.dtype)
        np.put_along_axis(gblocks, self._argmax[:, :, None, :], gout[:, :, None, :], axis=2)
        return gblocks.reshape(B, L, C)


class Upsample1D(Layer):
    """Nearest-neighbour repetition along the length axis."""

    def __init__(self, factor=2):
        super().__init__()
        self.factor = int(factor)

    def output_shape(self, input_shape):
        L, C = input_shape
        return (L * self.factor, C)

    def forward(self, x, training=False, rng=None):
        self._in_shape = x.shape
        return np.repeat(x, self.factor, axis=1)

    def backward(self, gout):
        B, L, C = self._in_shape
        return gout.reshape(B, L, self.factor, C).sum(axis=2)


class Dense(Layer):
    """Affine map on flattened input, optional L1 activity penalty."""

    def __init__(self, units, l1_activity=0.0, activation_hint="relu"):
        super().__init__()
        self.units = int(units)
        self.l1_activity = float(l1_activity)
        self.activation_hint = activation_hint  # init scheme only

    def output_shape(self, input_shape):
        return (self.units,)

    def init_params(self, input_shape, rng, dtype):
        n_in = int(np.prod(input_shape))
        self.params = {
            "W": _init_weight((n_in, self.units), n_in, self.units,
                              self.activation_hint, rng, dtype),
            "b": np.zeros(self.units, dtype=dtype),
        }

    def forward(self, x, training=False, rng=None):
        B = x.shape[0]
        flat = x.reshape(B, -1)
        out = flat @ self.params["W"] + self.params["b"]
        self._cache = (flat, x.shape, training, out if self.l1_activity > 0 else None)
        return out

    def backward(self, gout):
        flat, in_shape, training, out = self._cache
        if self.l1_activity > 0 and training:
            # subgradient of the activity penalty (mean over the batch)
            gout = gout + (self.l1_activity / flat.shape[0]) * np.sign(out)
        self.grads["W"] = flat.T @ gout
        self.grads["b"] = gout.sum(axis=0)
        return (gout @ self.params["W"].T).reshape(in_shape)

    def activity_penalty(self, out):
        """L1 penalty value for a forward output (mean over batch)."""
        if self.l1_activity == 0:
            return 0.0
        return self.l1_activity * float(np.abs(out).sum()) / out.shape[0]


class BatchNorm1D(Layer):
    """Per-channel batch normalization with running inference statistics."""

    def __init__(self):
        super().__init__()
        self.eps = BATCHNORM_EPS
        self.momentum = BATCHNORM_MOMENTUM

    def init_params(self, input_shape, rng, dtype):
        c = input_shape[-1]
        self.params = {
            "gamma": np.ones(c, dtype=dtype),
            "beta": np.zeros(c, dtype=dtype),
        }
        self.running_mean = np.zeros(c, dtype=dtype)
        self.running_var = np.ones(c, dtype=dtype)
        self._stats_seen = False

    def _axes(self, x):
        return tuple(range(x.ndim - 1))

    def forward(self, x, training=False, rng=None):
        axes = self._axes(x)
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            if not self._stats_seen:
                # seed the running statistics from the first batch so short
                # trainings still get meaningful inference normalization
                self.running_mean = mean.astype(x.dtype)
                self.running_var = var.astype(x.dtype)
                self._stats_seen = True
            else:
                self.running_mean = (self.momentum * self.running_mean
                                     + (1 - self.momentum) * mean).astype(x.dtype)
                self.running_var = (self.momentum * self.running_var
                                    + (1 - self.momentum) * var).astype(x.dtype)
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std, training, x.shape)
        return xhat * self.params["gamma"] + self.params["beta"]

    def backward(self, gout):
        xhat, inv_std, training, shape = self._cache
        axes = self._axes(gout)
        self.grads["gamma"] = (gout * xhat).sum(axis=axes)
        self.grads["beta"] = gout.sum(axis=axes)
        g = gout * self.params["gamma"]
        if not training:
            return g * inv_std
        # python float keeps the division from promoting float32 gradients
        n = float(np.prod([shape[a] for a in axes]))
        return inv_std / n * (
            n * g - g.sum(axis=axes) - xhat * (g * xhat).sum(axis=axes)
        )


class Dropout(Layer):
    """Inverted dropout, active only in training."""

    def __init__(self, rate):
        super().__init__()
        if not 0 <= rate < 1:
            raise DataError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = float(rate)

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep).astype(x.dtype) / keep
        return x * self._mask

    def backward(self, gout):
        if self._mask is None:
            return gout
        return gout * self._mask


class Activation(Layer):
    def __init__(self, name):
        super().__init__()
        if name not in ("relu", "sigmoid", "linear"):
            raise DataError(f"unknown activation {name!r}")
        self.name = name

    def forward(self, x, training=False, rng=None):
        if self.name == "relu":
            out = np.maximum(x, 0)
        elif self.name == "sigmoid":
            out = 1.0 / (1.0 + np.exp(-x))
        else:
            out = x
        self._cache = out
        return out

    def backward(self, gout):
        out = self._cache
        if self.name == "relu":
            return gout * (out > 0)
        if self.name == "sigmoid":
            return gout * out * (1.0 - out)
        return gout


class Flatten(Layer):
    def output_shape(self, input_shape):
        return (int(np.prod(input_shape)),)

    def forward(self, x, training=False, rng=None):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, gout):
        return gout.reshape(self._in_shape)


class Reshape(Layer):
    def __init__(self, target_shape):
        super().__init__()
        self.target_shape = tuple(int(s) for s in target_shape)

    def output_shape(self, input_shape):
        if int(np.prod(input_shape)) != int(np.prod(self.target_shape)):
            raise DataError(
                f"cannot reshape {input_shape} into {self.target_shape}"
            )
        return self.target_shape

    def forward(self, x, training=False, rng=None):
        self._in_shape = x.shape
        return x.reshape((x.shape[0],) + self.target_shape)

    def backward(self, gout):
        return gout.reshape(self._in_shape)
