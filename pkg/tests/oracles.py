"""Slow, independently written reference implementations used by the tests.

None of these import the code under test; each one re-derives its answer
from the definition with plain loops.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import numpy as np


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def bilinear_pixel(img, out_w, out_h, x, y):
    """Value at target pixel (x, y) in exact rationals: pixel-center mapping, clamped source coords."""
    h, w = img.shape[:2]
    half = Fraction(1, 2)
    sx = min(max((x + half) * Fraction(w, out_w) - half, Fraction(0)), Fraction(w - 1))
    sy = min(max((y + half) * Fraction(h, out_h) - half, Fraction(0)), Fraction(h - 1))
    x0, y0 = math.floor(sx), math.floor(sy)
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    ax, ay = sx - x0, sy - y0
    v = (
        (1 - ax) * (1 - ay) * int(img[y0, x0])
        + ax * (1 - ay) * int(img[y0, x1])
        + (1 - ax) * ay * int(img[y1, x0])
        + ax * ay * int(img[y1, x1])
    )
    return min(max(math.floor(v + half), 0), 255)


def luma(r, g, b) -> int:
    return min(max(round_half_away(0.299 * r + 0.587 * g + 0.114 * b), 0), 255)


def otsu_brute(img) -> int:
    """Exhaustive argmax of w0*w1*(mu0-mu1)^2 in exact rationals, smallest t on ties."""
    pixels = [int(v) for v in np.asarray(img).ravel()]
    n = len(pixels)
    best_t, best = None, None
    for t in range(255):
        c0 = [p for p in pixels if p <= t]
        c1 = [p for p in pixels if p > t]
        if not c0 or not c1:
            score = Fraction(0)
        else:
            w0, w1 = Fraction(len(c0), n), Fraction(len(c1), n)
            mu0, mu1 = Fraction(sum(c0), len(c0)), Fraction(sum(c1), len(c1))
            score = w0 * w1 * (mu0 - mu1) ** 2
        if best is None or score > best:
            best_t, best = t, score
    return best_t


def otsu_brute_hist(img) -> int:
    """Same definition as otsu_brute, driven by a histogram so it scales to 1000 images."""
    hist = Counter(int(v) for v in np.asarray(img).ravel())
    n = sum(hist.values())
    best_t, best = None, None
    for t in range(255):
        n0 = sum(c for v, c in hist.items() if v <= t)
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            score = Fraction(0)
        else:
            s0 = sum(v * c for v, c in hist.items() if v <= t)
            s1 = sum(v * c for v, c in hist.items() if v > t)
            mu0, mu1 = Fraction(s0, n0), Fraction(s1, n1)
            score = Fraction(n0, n) * Fraction(n1, n) * (mu0 - mu1) ** 2
        if best is None or score > best:
            best_t, best = t, score
    return best_t


def flood_fill_labels(mask, connectivity: int) -> np.ndarray:
    """Stack-based flood fill; labels in raster order of each component's first pixel."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    if connectivity == 4:
        nbrs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    else:
        nbrs = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    labels = np.zeros((h, w), dtype=np.int64)
    nxt = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and labels[y, x] == 0:
                nxt += 1
                labels[y, x] = nxt
                stack = [(y, x)]
                while stack:
                    cy, cx = stack.pop()
                    for dy, dx in nbrs:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and labels[ny, nx] == 0:
                            labels[ny, nx] = nxt
                            stack.append((ny, nx))
    return labels


def canonical_partition(labels) -> np.ndarray:
    """Relabel so label ids follow first appearance in raster order."""
    labels = np.asarray(labels)
    mapping = {0: 0}
    out = np.zeros_like(labels)
    for idx, v in enumerate(labels.ravel()):
        v = int(v)
        if v not in mapping:
            mapping[v] = len(mapping)
        out.flat[idx] = mapping[v]
    return out


def boxes_from_partition(labels):
    """(x, y, w, h) per label from per-label min/max coordinates."""
    out = []
    for lab in range(1, int(labels.max(initial=0)) + 1):
        ys, xs = np.nonzero(labels == lab)
        out.append((int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1)))
    return out


def dilate_naive(mask, se_mask) -> np.ndarray:
    """out(y, x) = OR over SE cells b of src((y, x) - b), b measured from the center cell."""
    mask = np.asarray(mask, dtype=bool)
    se_mask = np.asarray(se_mask, dtype=bool)
    h, w = mask.shape
    sh, sw = se_mask.shape
    ay, ax = (sh - 1) // 2, (sw - 1) // 2
    out = np.zeros_like(mask)
    for y in range(h):
        for x in range(w):
            hit = False
            for i in range(sh):
                for j in range(sw):
                    if not se_mask[i, j]:
                        continue
                    sy, sx = y - (i - ay), x - (j - ax)
                    if 0 <= sy < h and 0 <= sx < w and mask[sy, sx]:
                        hit = True
            out[y, x] = hit
    return out


def gestalt_matches_brute(a: str, b: str) -> int:
    """Total matched characters of Ratcliff-Obershelp matching.

    The longest block is found by trying every (i, j) start and extending,
    scanning i then j ascending and keeping only strictly longer blocks.
    """
    if not a or not b:
        return 0
    best = (0, 0, 0)
    for i in range(len(a)):
        for j in range(len(b)):
            k = 0
            while i + k < len(a) and j + k < len(b) and a[i + k] == b[j + k]:
                k += 1
            if k > best[2]:
                best = (i, j, k)
    i, j, k = best
    if k == 0:
        return 0
    return k + gestalt_matches_brute(a[:i], b[:j]) + gestalt_matches_brute(a[i + k :], b[j + k :])


def gestalt_ratio_brute(a: str, b: str) -> float:
    total = len(a) + len(b)
    return 1.0 if total == 0 else 2.0 * gestalt_matches_brute(a, b) / total


def metrics_oracle(cm):
    """Accuracy and macro P/R/F1 from plain nested loops over a list-of-lists matrix."""
    n = len(cm)
    total = sum(sum(row) for row in cm)
    trace = sum(cm[i][i] for i in range(n))
    ps, rs, fs = [], [], []
    for c in range(n):
        tp = cm[c][c]
        fp = sum(cm[r][c] for r in range(n)) - tp
        fn = sum(cm[c][k] for k in range(n)) - tp
        if tp + fp + fn == 0:
            continue  # class never seen as truth nor prediction
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        ps.append(p)
        rs.append(r)
        fs.append(f)
    return trace / total, sum(ps) / len(ps), sum(rs) / len(rs), sum(fs) / len(fs)


def central_difference(f, x: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """Numerical gradient of scalar f at x; x is perturbed in place and restored."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + eps
        fp = f()
        x[idx] = old - eps
        fm = f()
        x[idx] = old
        g[idx] = (fp - fm) / (2 * eps)
    return g


def max_rel_error(analytic, numeric, floor: float = 1e-8) -> float:
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))
