"""Candidate character regions: component boxes and size filtering."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .segment import Box2D, boxes_from_labels, label_components


@dataclass(frozen=True)
class BoxFilterConfig:
    min_h_frac: float = 0.15
    max_h_frac: float = 0.90
    min_w_frac: float = 0.01
    max_w_frac: float = 0.95
    min_area_px: int = 10

    def __post_init__(self):
        for lo, hi in ((self.min_h_frac, self.max_h_frac), (self.min_w_frac, self.max_w_frac)):
            if not 0 <= lo < hi <= 1:
                raise ValueError(f"box filter fractions must satisfy 0 <= min < max <= 1, got {lo}, {hi}")
        if self.min_area_px < 0:
            raise ValueError("min_area_px must be >= 0")

    @classmethod
    def parse(cls, text: str, base: "BoxFilterConfig | None" = None) -> "BoxFilterConfig":
        """Parse ``min_h_frac=0.2,max_w_frac=0.9``-style overrides on top of ``base``."""
        kwargs = {}
        for item in filter(None, (p.strip() for p in text.split(","))):
            key, _, value = item.partition("=")
            key = key.strip()
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"unknown box filter key {key!r}")
            kwargs[key] = int(value) if key == "min_area_px" else float(value)
        return replace(base, **kwargs) if base is not None else cls(**kwargs)


def component_boxes(img: np.ndarray, connectivity: int = 8) -> list[Box2D]:
    """Bounding box of every connected component, ordered by (y, x)."""
    boxes = boxes_from_labels(label_components(img, connectivity))
    return sorted(boxes, key=lambda b: (b.y, b.x))


def filter_character_boxes(boxes: list[Box2D], plate_w: int, plate_h: int,
                           cfg: BoxFilterConfig | None = None) -> list[Box2D]:
    cfg = cfg or BoxFilterConfig()
    return [
        b
        for b in boxes
        if cfg.min_h_frac * plate_h <= b.h <= cfg.max_h_frac * plate_h
        and cfg.min_w_frac * plate_w <= b.w <= cfg.max_w_frac * plate_w
        and b.area >= cfg.min_area_px
    ]
