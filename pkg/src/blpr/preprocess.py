"""Binarization and morphology on gray/binary rasters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConstantImageError,
    DimensionMismatchError,
    InvalidPercentilesError,
)
from .imgcore import to_uint8


@dataclass(frozen=True)
class StructuringElement:
    """Odd-sized boolean neighborhood anchored at its center cell."""

    mask: np.ndarray = field(default_factory=lambda: np.ones((3, 3), dtype=bool))

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2 or m.shape[0] % 2 == 0 or m.shape[1] % 2 == 0:
            raise ValueError(f"structuring element must have odd dimensions, got {m.shape}")
        if not m.any():
            raise ValueError("structuring element needs at least one true cell")
        object.__setattr__(self, "mask", m)

    @classmethod
    def rect(cls, width: int = 3, height: int = 3) -> "StructuringElement":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def anchor(self) -> tuple[int, int]:
        return (self.width - 1) // 2, (self.height - 1) // 2

    def offsets(self):
        """(dx, dy) of every true cell relative to the anchor."""
        ax, ay = self.anchor
        ys, xs = np.nonzero(self.mask)
        return [(int(x) - ax, int(y) - ay) for y, x in zip(ys, xs)]


def histogram(img: np.ndarray) -> np.ndarray:
    return np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)


def otsu_threshold(img: np.ndarray) -> int:
    """Threshold t in [0, 254] maximizing between-class variance.

    Class 0 is ``pixel <= t``. Scores are compared exactly in integer
    arithmetic, using ``w0*w1*(mu0-mu1)**2 == (s0*n1 - s1*n0)**2 / (n0*n1*N**2)``,
    so ties resolve to the smallest t without floating-point noise.
    """
    hist = histogram(img)
    if np.count_nonzero(hist) < 2:
        raise ConstantImageError("Otsu threshold needs at least two distinct intensities")
    counts = [int(c) for c in hist]
    total_n = sum(counts)
    total_s = sum(i * c for i, c in enumerate(counts))
    best_t, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for t in range(255):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (s0 * n1 - (total_s - s0) * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize(img: np.ndarray, t: int) -> np.ndarray:
    return np.asarray(img) > t


def nearest_rank_percentile(img: np.ndarray, pct: float) -> int:
    values = np.sort(np.asarray(img).ravel())
    rank = max(1, math.ceil(pct / 100.0 * values.size))
    return int(values[rank - 1])


def stretch_contrast(img: np.ndarray, low_pct: float = 2.0, high_pct: float = 98.0) -> np.ndarray:
    """Linearly map the [low_pct, high_pct] percentile band onto [0, 255]."""
    if not 0 <= low_pct < high_pct <= 100:
        raise InvalidPercentilesError(
            f"need 0 <= low < high <= 100, got low={low_pct}, high={high_pct}"
        )
    lo = nearest_rank_percentile(img, low_pct)
    hi = nearest_rank_percentile(img, high_pct)
    if hi == lo:
        return np.array(img, dtype=np.uint8, copy=True)
    return to_uint8(255.0 * (img.astype(np.float64) - lo) / (hi - lo))


def dilate(img: np.ndarray, se: StructuringElement | None = None, iterations: int = 1) -> np.ndarray:
    """Binary dilation; pixels outside the image count as background."""
    se = se or StructuringElement()
    out = np.asarray(img, dtype=bool)
    h, w = out.shape
    for _ in range(iterations):
        src, out = out, np.zeros((h, w), dtype=bool)
        for dx, dy in se.offsets():
            if abs(dx) >= w or abs(dy) >= h:
                continue
            # out(x, y) |= src(x - dx, y - dy)
            ys, yd = (slice(0, h - dy), slice(dy, h)) if dy >= 0 else (slice(-dy, h), slice(0, h + dy))
            xs, xd = (slice(0, w - dx), slice(dx, w)) if dx >= 0 else (slice(-dx, w), slice(0, w + dx))
            out[yd, xd] |= src[ys, xs]
    return out


def mask_multiply(mask: np.ndarray, img: np.ndarray) -> np.ndarray:
    if mask.shape != img.shape:
        raise DimensionMismatchError(f"mask {mask.shape} vs image {img.shape}")
    return np.where(mask, img, 0).astype(np.uint8)
