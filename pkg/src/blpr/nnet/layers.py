"""Layer kinds with explicit forward and reverse-mode passes.

Activations are float64 arrays with a leading batch axis: ``(N, C, H, W)``
for feature maps and ``(N, F)`` after flattening. Every layer exposes

* ``out_shape(in_shape)``       per-sample shape bookkeeping
* ``init(rng, in_shape)``       parameter dict (possibly empty)
* ``forward(params, x)``        returns ``(y, cache)``
* ``backward(params, cache, dy)`` returns ``(dx, grads)``
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError


def he_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    kind = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind}

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def init(self, rng, in_shape) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.to_dict().items() if k != "kind")
        return f"{self.kind}({args})"


# ---------------------------------------------------------------------------
# conv helpers shared by Conv2D and ResidualBlock


def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    """(N, C, H, W) -> (N, C*k*k, H*W) patches of the zero-padded input."""
    n, c, h, w = x.shape
    p = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    cols = np.empty((n, c, k, k, h, w))
    for i in range(k):
        for j in range(k):
            cols[:, :, i, j] = xp[:, :, i : i + h, j : j + w]
    return cols.reshape(n, c * k * k, h * w)


def _conv_forward(x, weight, bias):
    n, c, h, w = x.shape
    o = weight.shape[0]
    cols = _im2col(x, weight.shape[2])
    y = weight.reshape(o, -1) @ cols + bias[:, None]
    return y.reshape(n, o, h, w), cols


def _conv_backward(x_shape, cols, weight, dy):
    n, c, h, w = x_shape
    o, _, k, _ = weight.shape
    p = k // 2
    dyr = dy.reshape(n, o, h * w)
    if n == 1:
        dw = dyr[0] @ cols[0].T
    else:
        dw = (dyr @ cols.transpose(0, 2, 1)).sum(axis=0)
    db = dyr.sum(axis=(0, 2))
    dcols = (weight.reshape(o, -1).T @ dyr).reshape(n, c, k, k, h, w)
    dxp = np.zeros((n, c, h + 2 * p, w + 2 * p))
    for i in range(k):
        for j in range(k):
            dxp[:, :, i : i + h, j : j + w] += dcols[:, :, i, j]
    return dxp[:, :, p : p + h, p : p + w], dw.reshape(weight.shape), db


# ---------------------------------------------------------------------------


class Conv2D(Layer):
    """Same-padded, stride-1 cross-correlation."""

    kind = "conv2d"

    def __init__(self, out_channels: int, kernel: int = 3):
        if kernel % 2 == 0:
            raise ValueError("conv kernel must be odd")
        self.out_channels = out_channels
        self.kernel = kernel

    def to_dict(self):
        return {"kind": self.kind, "out_channels": self.out_channels, "kernel": self.kernel}

    def out_shape(self, in_shape):
        _, h, w = in_shape
        return (self.out_channels, h, w)

    def init(self, rng, in_shape):
        c = in_shape[0]
        k = self.kernel
        return {
            "W": he_uniform(rng, (self.out_channels, c, k, k), c * k * k),
            "b": np.zeros(self.out_channels),
        }

    def forward(self, params, x):
        if x.ndim != 4 or x.shape[1] != params["W"].shape[1]:
            raise ShapeMismatchError(f"conv2d expects (N, {params['W'].shape[1]}, H, W), got {x.shape}")
        y, cols = _conv_forward(x, params["W"], params["b"])
        return y, (x.shape, cols)

    def backward(self, params, cache, dy):
        x_shape, cols = cache
        dx, dw, db = _conv_backward(x_shape, cols, params["W"], dy)
        return dx, {"W": dw, "b": db}


class ReLU(Layer):
    kind = "relu"

    def forward(self, params, x):
        return np.maximum(x, 0.0), x > 0

    def backward(self, params, cache, dy):
        return dy * cache, {}


class MaxPool2(Layer):
    """2x2 max pooling, stride 2. Gradient goes to the first maximum of each window."""

    kind = "maxpool2"

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if h % 2 or w % 2:
            raise ShapeMismatchError(f"maxpool2 needs even spatial dims, got {h}x{w}")
        return (c, h // 2, w // 2)

    def forward(self, params, x):
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ShapeMismatchError(f"maxpool2 needs even spatial dims, got {h}x{w}")
        win = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h // 2, w // 2, 4)
        idx = win.argmax(axis=-1)
        y = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
        return y, (x.shape, idx)

    def backward(self, params, cache, dy):
        (n, c, h, w), idx = cache
        dwin = np.zeros((n, c, h // 2, w // 2, 4))
        np.put_along_axis(dwin, idx[..., None], dy[..., None], axis=-1)
        dx = dwin.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
        return dx, {}


class Flatten(Layer):
    kind = "flatten"

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, params, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, params, cache, dy):
        return dy.reshape(cache), {}


class Dense(Layer):
    kind = "dense"

    def __init__(self, out_features: int):
        self.out_features = out_features

    def to_dict(self):
        return {"kind": self.kind, "out_features": self.out_features}

    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ShapeMismatchError(f"dense needs a flat input, got {in_shape}")
        return (self.out_features,)

    def init(self, rng, in_shape):
        fan_in = in_shape[0]
        return {
            "W": he_uniform(rng, (self.out_features, fan_in), fan_in),
            "b": np.zeros(self.out_features),
        }

    def forward(self, params, x):
        if x.ndim != 2 or x.shape[1] != params["W"].shape[1]:
            raise ShapeMismatchError(f"dense expects (N, {params['W'].shape[1]}), got {x.shape}")
        return x @ params["W"].T + params["b"], x

    def backward(self, params, cache, dy):
        x = cache
        return dy @ params["W"], {"W": dy.T @ x, "b": dy.sum(axis=0)}


class ResidualBlock(Layer):
    """relu(x + conv(relu(conv(x))))."""

    kind = "residual_block"

    def __init__(self, channels: int, kernel: int = 3):
        self.channels = channels
        self.kernel = kernel

    def to_dict(self):
        return {"kind": self.kind, "channels": self.channels, "kernel": self.kernel}

    def out_shape(self, in_shape):
        if in_shape[0] != self.channels:
            raise ShapeMismatchError(
                f"residual_block({self.channels}) cannot take {in_shape[0]} input channels"
            )
        return tuple(in_shape)

    def init(self, rng, in_shape):
        c, k = self.channels, self.kernel
        fan = c * k * k
        return {
            "W1": he_uniform(rng, (c, c, k, k), fan),
            "b1": np.zeros(c),
            "W2": he_uniform(rng, (c, c, k, k), fan),
            "b2": np.zeros(c),
        }

    def forward(self, params, x):
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ShapeMismatchError(f"residual_block expects {self.channels} channels, got {x.shape}")
        z1, cols1 = _conv_forward(x, params["W1"], params["b1"])
        a1 = np.maximum(z1, 0.0)
        z2, cols2 = _conv_forward(a1, params["W2"], params["b2"])
        s = z2 + x
        return np.maximum(s, 0.0), (x.shape, cols1, z1 > 0, cols2, s > 0)

    def backward(self, params, cache, dy):
        x_shape, cols1, a1_mask, cols2, s_mask = cache
        ds = dy * s_mask
        da1, dw2, db2 = _conv_backward(x_shape, cols2, params["W2"], ds)
        dz1 = da1 * a1_mask
        dx_branch, dw1, db1 = _conv_backward(x_shape, cols1, params["W1"], dz1)
        # skip path and conv branch both feed x
        return ds + dx_branch, {"W1": dw1, "b1": db1, "W2": dw2, "b2": db2}


class Softmax(Layer):
    kind = "softmax"

    def forward(self, params, x):
        z = x - x.max(axis=-1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=-1, keepdims=True)
        return y, y

    def backward(self, params, cache, dy):
        y = cache
        return y * (dy - (dy * y).sum(axis=-1, keepdims=True)), {}


LAYER_KINDS = {
    cls.kind: cls for cls in (Conv2D, ReLU, MaxPool2, Flatten, Dense, ResidualBlock, Softmax)
}


def layer_from_dict(d: dict) -> Layer:
    d = dict(d)
    kind = d.pop("kind")
    try:
        cls = LAYER_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown layer kind {kind!r}") from None
    return cls(**d)
