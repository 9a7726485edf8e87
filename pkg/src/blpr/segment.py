"""Connected-component labeling, line splitting and glyph cropping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoxOutOfBoundsError, EmptyInputError
from .imgcore import check_rgb, resize

GLYPH_SIZE = 32


@dataclass(frozen=True)
class Box2D:
    x: int
    y: int
    w: int
    h: int

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def center_y(self) -> float:
        return self.y + self.h / 2.0

    @property
    def area(self) -> int:
        return self.w * self.h

    def inside(self, width: int, height: int) -> bool:
        return self.w >= 1 and self.h >= 1 and self.x >= 0 and self.y >= 0 and self.x2 <= width and self.y2 <= height

    def union(self, other: "Box2D") -> "Box2D":
        x, y = min(self.x, other.x), min(self.y, other.y)
        return Box2D(x, y, max(self.x2, other.x2) - x, max(self.y2, other.y2) - y)

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]


@dataclass
class LabelMap:
    labels: np.ndarray  # (H, W) int32, 0 = background
    count: int

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass
class Glyph:
    image: np.ndarray  # (32, 32, 3) uint8
    source_box: Box2D
    line_index: int
    position_in_line: int


# ---------------------------------------------------------------------------
# Labeling


def _row_runs(row: np.ndarray):
    padded = np.concatenate(([False], row, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return edges[0::2], edges[1::2]  # [start, end)


def label_components(img: np.ndarray, connectivity: int = 8) -> LabelMap:
    """Label foreground components.

    Works on horizontal runs: runs on adjacent rows that touch are merged
    with union-find, then labels are renumbered in raster order of each
    component's first pixel.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    mask = np.asarray(img, dtype=bool)
    h, w = mask.shape
    reach = 1 if connectivity == 8 else 0

    parent: list[int] = []

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    runs = []  # (row, start, end, run id)
    prev: list[tuple[int, int, int]] = []
    for y in range(h):
        starts, ends = _row_runs(mask[y])
        cur = []
        j = 0
        for s, e in zip(starts.tolist(), ends.tolist()):
            rid = len(parent)
            parent.append(rid)
            # advance past previous-row runs that end too far left
            while j < len(prev) and prev[j][1] + reach <= s:
                j += 1
            k = j
            while k < len(prev) and prev[k][0] < e + reach:
                a, b = find(prev[k][2]), find(rid)
                if a != b:
                    parent[max(a, b)] = min(a, b)
                k += 1
            cur.append((s, e, rid))
            runs.append((y, s, e, rid))
        prev = cur

    labels = np.zeros((h, w), dtype=np.int32)
    final: dict[int, int] = {}
    for y, s, e, rid in runs:
        root = find(rid)
        lab = final.get(root)
        if lab is None:
            lab = final[root] = len(final) + 1
        labels[y, s:e] = lab
    return LabelMap(labels, len(final))


def boxes_from_labels(lm: LabelMap) -> list[Box2D]:
    """Tight bounding box of each label, indexed by label - 1."""
    if lm.count == 0:
        return []
    ys, xs = np.nonzero(lm.labels)
    lab = lm.labels[ys, xs] - 1
    big = np.iinfo(np.int64).max
    x0 = np.full(lm.count, big)
    y0 = np.full(lm.count, big)
    x1 = np.full(lm.count, -1)
    y1 = np.full(lm.count, -1)
    np.minimum.at(x0, lab, xs)
    np.minimum.at(y0, lab, ys)
    np.maximum.at(x1, lab, xs)
    np.maximum.at(y1, lab, ys)
    return [
        Box2D(int(x0[i]), int(y0[i]), int(x1[i] - x0[i] + 1), int(y1[i] - y0[i] + 1))
        for i in range(lm.count)
    ]


# ---------------------------------------------------------------------------
# Line structure


def split_lines(boxes: list[Box2D], plate_h: int, collapse_frac: float = 0.15):
    """Split boxes into an upper and a lower text line.

    1-D 2-means on box center heights, seeded at a quarter and three
    quarters of the plate height. If every center lies within
    ``collapse_frac * plate_h`` of the others, all boxes form line 1.
    """
    if not boxes:
        raise EmptyInputError("split_lines needs at least one box")
    centers = np.array([b.center_y for b in boxes])
    if centers.max() - centers.min() <= collapse_frac * plate_h:
        return list(boxes), []
    m1, m2 = 0.25 * plate_h, 0.75 * plate_h
    assign = None
    for _ in range(100):
        new = np.abs(centers - m1) > np.abs(centers - m2)  # True -> lower cluster
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        if (~assign).any():
            m1 = centers[~assign].mean()
        if assign.any():
            m2 = centers[assign].mean()
    if m1 > m2:
        assign = ~assign
    line1 = [b for b, a in zip(boxes, assign) if not a]
    line2 = [b for b, a in zip(boxes, assign) if a]
    return line1, line2


def merge_matra(line: list[Box2D], median_width: float, gap_frac: float = 0.25,
                overlap_frac: float = 0.5) -> list[Box2D]:
    """Merge horizontally adjacent boxes that belong to one word.

    Two boxes merge when the horizontal gap is below ``gap_frac *
    median_width`` and their vertical overlap exceeds ``overlap_frac`` of
    the shorter box. Repeats until stable; result is sorted by x.
    """
    out = sorted(line, key=lambda b: (b.x, b.y))
    merged = True
    while merged and len(out) > 1:
        merged = False
        for i in range(len(out) - 1):
            a, b = out[i], out[i + 1]
            gap = b.x - a.x2
            overlap = min(a.y2, b.y2) - max(a.y, b.y)
            if gap < gap_frac * median_width and overlap > overlap_frac * min(a.h, b.h):
                out[i : i + 2] = [a.union(b)]
                out.sort(key=lambda bx: (bx.x, bx.y))
                merged = True
                break
    return out


# ---------------------------------------------------------------------------
# Cropping


def border_color(plate: np.ndarray) -> np.ndarray:
    """Per-channel median of the 1-px border ring."""
    h, w = plate.shape[:2]
    ring = np.concatenate(
        [plate[0, :], plate[h - 1, :], plate[1 : h - 1, 0], plate[1 : h - 1, w - 1]]
    )
    # lower median keeps the value an actual pixel value
    ring = np.sort(ring, axis=0)
    return ring[(len(ring) - 1) // 2].astype(np.uint8)


def crop_square(plate: np.ndarray, box: Box2D, fill: np.ndarray, size: int = GLYPH_SIZE) -> np.ndarray:
    crop = plate[box.y : box.y2, box.x : box.x2]
    side = max(box.w, box.h)
    canvas = np.empty((side, side, 3), dtype=np.uint8)
    canvas[:] = fill
    oy, ox = (side - box.h) // 2, (side - box.w) // 2
    canvas[oy : oy + box.h, ox : ox + box.w] = crop
    return resize(canvas, size, size)


def order_and_crop(plate: np.ndarray, line1: list[Box2D], line2: list[Box2D]) -> list[Glyph]:
    """Crop glyphs in reading order: line 1 left to right, then line 2."""
    check_rgb(plate)
    h, w = plate.shape[:2]
    for b in list(line1) + list(line2):
        if not b.inside(w, h):
            raise BoxOutOfBoundsError(f"{b} outside {w}x{h} plate")
    fill = border_color(plate)
    glyphs = []
    for li, line in enumerate((line1, line2)):
        for pos, b in enumerate(sorted(line, key=lambda bx: (bx.x, bx.y))):
            glyphs.append(Glyph(crop_square(plate, b, fill), b, li, pos))
    return glyphs
