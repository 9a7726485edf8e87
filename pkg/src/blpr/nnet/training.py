"""Seeded mini-batch training with Adam or plain SGD."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyDatasetError, LabelOutOfRangeError
from .network import (
    Network,
    backward_cached,
    batch_loss_and_grad,
    forward,
    forward_cached,
    images_to_input,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 1
    epochs: int = 40
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    valid_loss: list[float] = field(default_factory=list)
    valid_acc: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.train_loss)

    def rows(self):
        for i in range(len(self)):
            yield i + 1, self.train_loss[i], self.train_acc[i], self.valid_loss[i], self.valid_acc[i]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_loss", "train_acc", "valid_loss", "valid_acc"])
            for row in self.rows():
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def bind_flat(net: Network) -> np.ndarray:
    """Move every parameter into one contiguous buffer; params become views of it."""
    entries = list(net.named_parameters())
    flat = np.concatenate([a.ravel() for _, _, a in entries]) if entries else np.zeros(0)
    off = 0
    for i, name, arr in entries:
        net.params[i][name] = flat[off : off + arr.size].reshape(arr.shape)
        off += arr.size
    return flat


def flat_grads(net: Network, grads, out: np.ndarray) -> np.ndarray:
    off = 0
    for i, name, arr in net.named_parameters():
        out[off : off + arr.size] = grads[i][name].ravel()
        off += arr.size
    return out


class Adam:
    def __init__(self, net: Network, cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.flat = bind_flat(net)
        self.g = np.zeros_like(self.flat)
        self.m = np.zeros_like(self.flat)
        self.v = np.zeros_like(self.flat)
        self.tmp = np.empty_like(self.flat)

    def step(self, net: Network, grads):
        c = self.cfg
        g, m, v, tmp = flat_grads(net, grads, self.g), self.m, self.v, self.tmp
        self.t += 1
        corr1 = 1.0 - c.beta1 ** self.t
        corr2 = 1.0 - c.beta2 ** self.t
        m *= c.beta1
        np.multiply(g, 1.0 - c.beta1, out=tmp)
        m += tmp
        v *= c.beta2
        np.multiply(g, g, out=tmp)
        tmp *= 1.0 - c.beta2
        v += tmp
        # p -= lr * (m / corr1) / (sqrt(v / corr2) + eps)
        np.divide(v, corr2, out=tmp)
        np.sqrt(tmp, out=tmp)
        tmp += c.eps
        np.divide(m, tmp, out=tmp)
        tmp *= c.learning_rate / corr1
        self.flat -= tmp


class SGD:
    def __init__(self, net: Network, cfg: TrainConfig):
        self.lr = cfg.learning_rate
        self.flat = bind_flat(net)
        self.g = np.zeros_like(self.flat)

    def step(self, net: Network, grads):
        self.flat -= self.lr * flat_grads(net, grads, self.g)


def as_arrays(samples):
    """Accept ``(images, labels)`` arrays or a sequence of labeled glyphs / pairs."""
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray):
        images, labels = samples
    else:
        samples = list(samples)
        if not samples:
            return np.zeros((0, 32, 32, 3), np.uint8), np.zeros(0, np.int64)
        if hasattr(samples[0], "label"):
            images = np.stack([s.image for s in samples])
            labels = np.array([s.label for s in samples])
        else:
            images = np.stack([s[0] for s in samples])
            labels = np.array([s[1] for s in samples])
    return np.asarray(images), np.asarray(labels, dtype=np.int64)


def evaluate(net: Network, images, labels, chunk: int = 256):
    """(mean loss, accuracy) over a labeled set; NaN for an empty set."""
    if len(labels) == 0:
        return float("nan"), float("nan")
    total_loss, correct = 0.0, 0
    for i in range(0, len(labels), chunk):
        logits = forward(net, images_to_input(images[i : i + chunk]))
        y = labels[i : i + chunk]
        losses, _ = batch_loss_and_grad(logits, y)
        total_loss += float(losses.sum())
        correct += int((logits.argmax(axis=1) == y).sum())
    return total_loss / len(labels), correct / len(labels)


def train(net: Network, train_set, valid_set=(), cfg: TrainConfig | None = None, progress=None):
    """Train a copy of ``net``; returns ``(trained_net, history)``.

    One optimizer step per batch over a seeded shuffle each epoch.
    ``progress``, if given, is called with ``(epoch, history, net)`` after every epoch.
    """
    cfg = cfg or TrainConfig()
    images, labels = as_arrays(train_set)
    v_images, v_labels = as_arrays(valid_set)
    if len(labels) == 0:
        raise EmptyDatasetError("training set is empty")
    if labels.min() < 0 or labels.max() >= net.class_count:
        raise LabelOutOfRangeError(f"training labels must lie in [0, {net.class_count})")
    net = net.copy()
    history = TrainHistory()
    opt = Adam(net, cfg) if cfg.optimizer == "adam" else SGD(net, cfg)
    rng = np.random.default_rng(cfg.seed)
    inputs = images_to_input(images)
    n = len(labels)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        loss_sum, correct = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            logits, caches = forward_cached(net, inputs[idx])
            losses, dlogits = batch_loss_and_grad(logits, labels[idx])
            loss_sum += float(losses.sum())
            correct += int((logits.argmax(axis=1) == labels[idx]).sum())
            opt.step(net, backward_cached(net, caches, dlogits))
        history.train_loss.append(loss_sum / n)
        history.train_acc.append(correct / n)
        vl, va = evaluate(net, v_images, v_labels)
        history.valid_loss.append(vl)
        history.valid_acc.append(va)
        log.info(
            "epoch %d/%d loss %.4f acc %.4f val_loss %.4f val_acc %.4f",
            epoch + 1, cfg.epochs, history.train_loss[-1], history.train_acc[-1], vl, va,
        )
        if progress is not None:
            progress(epoch + 1, history, net)
    return net, history
