"""Network container, registered architectures, loss and inference."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from ..errors import LabelOutOfRangeError, ShapeMismatchError
from ..vocab import NUM_CLASSES, VOCAB
from .layers import (
    Conv2D,
    Dense,
    Flatten,
    Layer,
    MaxPool2,
    ReLU,
    ResidualBlock,
)

INPUT_SHAPE = (3, 32, 32)


def _blpr_cnn(n_classes):
    return [
        Conv2D(16), ReLU(), MaxPool2(),
        Conv2D(32), ReLU(), MaxPool2(),
        Flatten(), Dense(128), ReLU(), Dense(n_classes),
    ]


def _blpr_resnet(n_classes):
    return [
        Conv2D(16), ResidualBlock(16), MaxPool2(),
        ResidualBlock(16), MaxPool2(),
        Flatten(), Dense(n_classes),
    ]


ARCHITECTURES = {"blpr-cnn": _blpr_cnn, "blpr-resnet": _blpr_resnet}


@dataclass
class Network:
    layers: list[Layer]
    params: list[dict]
    arch: str = "custom"
    input_shape: tuple = INPUT_SHAPE
    vocab: tuple = VOCAB

    @property
    def class_count(self) -> int:
        return len(self.vocab)

    def copy(self) -> "Network":
        return Network(
            copy.deepcopy(self.layers),
            [{k: v.copy() for k, v in p.items()} for p in self.params],
            self.arch,
            tuple(self.input_shape),
            tuple(self.vocab),
        )

    def named_parameters(self):
        for i, p in enumerate(self.params):
            for name in sorted(p):
                yield i, name, p[name]

    def parameter_count(self) -> int:
        return sum(a.size for _, _, a in self.named_parameters())


def check_shapes(layers, input_shape, class_count: int):
    shape = tuple(input_shape)
    shapes = [shape]
    for layer in layers:
        shape = layer.out_shape(shape)
        shapes.append(shape)
    if shape != (class_count,):
        raise ShapeMismatchError(f"network output shape {shape} != ({class_count},)")
    return shapes


def build_network(layers_or_arch, seed: int = 0, input_shape=INPUT_SHAPE,
                  vocab=VOCAB) -> Network:
    """He-uniform initialized network; ``layers_or_arch`` is a registered name or a layer list."""
    if isinstance(layers_or_arch, str):
        try:
            layers = ARCHITECTURES[layers_or_arch](len(vocab))
        except KeyError:
            raise ValueError(
                f"unknown architecture {layers_or_arch!r}; choose from {sorted(ARCHITECTURES)}"
            ) from None
        arch = layers_or_arch
    else:
        layers, arch = list(layers_or_arch), "custom"
    shapes = check_shapes(layers, input_shape, len(vocab))
    rng = np.random.default_rng(seed)
    params = [layer.init(rng, shp) for layer, shp in zip(layers, shapes)]
    return Network(layers, params, arch, tuple(input_shape), tuple(vocab))


def _batch(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape == tuple(net.input_shape):
        x = x[None]
    if x.ndim != len(net.input_shape) + 1 or x.shape[1:] != tuple(net.input_shape):
        raise ShapeMismatchError(f"expected input {net.input_shape}, got {x.shape}")
    return x


def forward_cached(net: Network, x):
    caches = []
    for layer, p in zip(net.layers, net.params):
        x, cache = layer.forward(p, x)
        caches.append(cache)
    return x, caches


def forward(net: Network, x) -> np.ndarray:
    """Logits for one ``(3, 32, 32)`` input or a batch ``(N, 3, 32, 32)``."""
    single = np.ndim(x) == len(net.input_shape)
    out, _ = forward_cached(net, _batch(net, x))
    return out[0] if single else out


def backward_cached(net: Network, caches, dlogits) -> list[dict]:
    grads = [None] * len(net.layers)
    d = dlogits
    for i in range(len(net.layers) - 1, -1, -1):
        d, grads[i] = net.layers[i].backward(net.params[i], caches[i], d)
    return grads


def backward(net: Network, x, dlogits) -> list[dict]:
    """Parameter gradients of ``sum(dlogits * forward(net, x))``."""
    single = np.ndim(x) == len(net.input_shape)
    xb = _batch(net, x)
    logits, caches = forward_cached(net, xb)
    d = np.asarray(dlogits, dtype=np.float64)
    if single:
        d = d[None]
    if d.shape != logits.shape:
        raise ShapeMismatchError(f"dlogits shape {d.shape} != logits shape {logits.shape}")
    return backward_cached(net, caches, d)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(logits: np.ndarray, label: int):
    """Softmax cross-entropy of a single logit vector and its gradient."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < logits.shape[-1]:
        raise LabelOutOfRangeError(f"label {label} outside [0, {logits.shape[-1]})")
    z = logits - logits.max()
    log_norm = np.log(np.exp(z).sum())
    loss = float(log_norm - z[label])
    d = np.exp(z - log_norm)
    d[label] -= 1.0
    return loss, d


def batch_loss_and_grad(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over a batch; gradient already divided by N."""
    labels = np.asarray(labels)
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= logits.shape[1]:
        raise LabelOutOfRangeError(f"labels outside [0, {logits.shape[1]})")
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    losses = log_norm - z[np.arange(n), labels]
    d = np.exp(z - log_norm[:, None])
    d[np.arange(n), labels] -= 1.0
    return losses, d / n


def images_to_input(images) -> np.ndarray:
    """uint8 ``(H, W, 3)`` image(s) -> float ``(.., 3, H, W)`` scaled to [0, 1]."""
    arr = np.asarray(images)
    if arr.ndim == 3:
        return arr.transpose(2, 0, 1).astype(np.float64) / 255.0
    return arr.transpose(0, 3, 1, 2).astype(np.float64) / 255.0


def predict_proba(net: Network, images, chunk: int = 256) -> np.ndarray:
    """Class probabilities for a stack of uint8 RGB images ``(N, 32, 32, 3)``."""
    images = np.asarray(images)
    out = [
        softmax(forward(net, images_to_input(images[i : i + chunk])))
        for i in range(0, len(images), chunk)
    ]
    return np.concatenate(out) if out else np.zeros((0, net.class_count))


def predict(net: Network, glyph):
    """(class index, probabilities) for a Glyph or a 32x32 RGB image."""
    image = getattr(glyph, "image", glyph)
    probs = softmax(forward(net, images_to_input(image)))
    return int(np.argmax(probs)), probs
