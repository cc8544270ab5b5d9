"""Finite-difference gradient checking shared by the layer test suites.

All checks run in double precision.  The scalar loss is sum(out * R) for a
fixed random projection R, whose analytic input gradient is simply R pushed
back through the layer.
"""

import numpy as np

from arousalkit.nn.network import LayerSpec

FD_EPS = 1e-5


def _loss(layer, x, R, training, rng_seed):
    out = layer.forward(x, training=training,
                        rng=np.random.default_rng(rng_seed))
    return float(np.sum(out * R))


def _rel_err(numeric, analytic):
    num = np.asarray(numeric, dtype=float).ravel()
    ana = np.asarray(analytic, dtype=float).ravel()
    denom = np.linalg.norm(num) + np.linalg.norm(ana)
    if denom == 0.0:
        return 0.0
    return np.linalg.norm(num - ana) / denom


def gradcheck_layer(kind, params, input_shape, seed=0, batch=2,
                    training=True):
    """Max relative error between analytic and central-difference gradients
    for one layer (over its input and every parameter tensor)."""
    rng = np.random.default_rng(seed)
    layer = LayerSpec(kind, params).build()
    layer.init_params(input_shape, rng, np.float64)
    out_shape = tuple(layer.output_shape(input_shape))
    x = rng.standard_normal((batch,) + tuple(input_shape))
    R = rng.standard_normal((batch,) + out_shape)

    layer.forward(x, training=training, rng=np.random.default_rng(seed))
    if kind == "Conv1D":
        gx = layer.backward(R, need_input_grad=True)
    else:
        gx = layer.backward(R)

    errors = []
    # input gradient
    gnum = np.zeros_like(x)
    flat = x.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + FD_EPS
        up = _loss(layer, x, R, training, seed)
        flat[i] = orig - FD_EPS
        dn = _loss(layer, x, R, training, seed)
        flat[i] = orig
        gnum.ravel()[i] = (up - dn) / (2 * FD_EPS)
    errors.append(_rel_err(gnum, gx))

    # parameter gradients
    for name, arr in layer.params.items():
        gana = layer.grads[name]
        gnum = np.zeros_like(arr)
        flat = arr.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + FD_EPS
            up = _loss(layer, x, R, training, seed)
            flat[i] = orig - FD_EPS
            dn = _loss(layer, x, R, training, seed)
            flat[i] = orig
            gnum.ravel()[i] = (up - dn) / (2 * FD_EPS)
        errors.append(_rel_err(gnum, gana))
    return max(errors)
