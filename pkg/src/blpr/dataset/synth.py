"""Synthetic glyphs and plates drawn from stroke prototypes.

Each class has an abstract stroke shape (not real Bengali typography) drawn
as thick anti-aliased polylines. Letter and city-word prototypes hang from a
top bar, so every prototype is one connected component, the way a headline
stroke joins the letters of a word.

Prototype coordinates live in a box ``[0, aspect] x [0, 1]`` with y pointing
down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..enhance import gaussian_blur
from ..imgcore import to_uint8
from ..vocab import TOKEN_INDEX, VOCAB, transliterate

STROKE = 0.13  # stroke width as a fraction of glyph height
GLYPH_FILL = 0.88  # long side of a sample glyph relative to the 32 px frame


def _arc(cx, cy, rx, ry, a0, a1, n=24):
    t = np.radians(np.linspace(a0, a1, n))
    return np.stack([cx + rx * np.cos(t), cy + ry * np.sin(t)], axis=1)


def _line(*pts):
    return np.array(pts, dtype=np.float64)


@dataclass(frozen=True)
class Prototype:
    aspect: float
    strokes: tuple  # tuple of (K, 2) polylines


def _digit_strokes():
    a = 0.7
    return {
        "0": [_arc(0.35, 0.5, 0.3, 0.42, 0, 360, 40)],
        "1": [np.vstack([_arc(0.3, 0.25, 0.2, 0.17, 180, 420), _line((0.5, 0.28), (0.5, 0.95))])],
        "2": [_line((0.08, 0.08), (0.62, 0.08), (0.08, 0.92), (0.62, 0.92))],
        "3": [np.vstack([_arc(0.3, 0.28, 0.27, 0.22, 200, 450), _arc(0.3, 0.72, 0.3, 0.23, 270, 520)])],
        "4": [_arc(0.35, 0.27, 0.24, 0.21, 90, 450, 32), _arc(0.35, 0.71, 0.3, 0.23, -90, 270, 32)],
        "5": [_line((0.35, 0.05), (0.65, 0.92), (0.05, 0.92), (0.35, 0.05))],
        "6": [np.vstack([_line((0.62, 0.05), (0.12, 0.62)), _arc(0.36, 0.68, 0.26, 0.26, 180, 540, 32)])],
        "7": [_line((0.05, 0.08), (0.65, 0.08), (0.25, 0.95))],
        "8": [_line((0.05, 0.08), (0.65, 0.08)), _line((0.05, 0.08), (0.35, 0.95), (0.65, 0.08))],
        "9": [np.vstack([_arc(0.34, 0.32, 0.26, 0.26, 0, 360, 32), _line((0.6, 0.32), (0.6, 0.95))])],
    }, a


def _bar(width):
    return _line((0.0, 0.07), (width, 0.07))


def _letter_strokes():
    a = 1.0
    return {
        "ka": [_bar(a), _line((0.5, 0.07), (0.5, 0.95)),
               _arc(0.68, 0.55, 0.2, 0.2, -90, 200, 24)],
        "ga": [_bar(a), _line((0.2, 0.07), (0.2, 0.7), (0.45, 0.95)), _line((0.8, 0.07), (0.8, 0.95))],
        "jha": [_bar(a), _line((0.1, 0.07), (0.28, 0.93), (0.5, 0.4), (0.72, 0.93), (0.9, 0.07))],
        "la": [_bar(a), _arc(0.33, 0.5, 0.22, 0.38, -90, 270, 32), _line((0.82, 0.07), (0.82, 0.95))],
    }, a


def _word_strokes():
    return {
        "dhaka": (2.0, [
            _bar(2.0),
            _line((0.2, 0.07), (0.2, 0.9)), _arc(0.45, 0.6, 0.25, 0.3, 180, 360 + 90, 28),
            _line((1.0, 0.07), (1.0, 0.93)), _line((1.0, 0.5), (1.35, 0.93)),
            _arc(1.65, 0.5, 0.2, 0.4, -90, 180, 24),
        ]),
        "narayanganj": (3.2, [
            _bar(3.2),
            _line((0.15, 0.07), (0.15, 0.93)), _line((0.15, 0.5), (0.45, 0.93)),
            _arc(0.85, 0.5, 0.22, 0.4, -90, 270, 28),
            _line((1.35, 0.07), (1.35, 0.93)),
            _line((1.75, 0.07), (1.95, 0.93), (2.15, 0.07)),
            _line((2.55, 0.07), (2.55, 0.6), (2.75, 0.93)),
            _arc(2.98, 0.45, 0.14, 0.3, -90, 90, 16),
        ]),
        "metro": (2.2, [
            _bar(2.2),
            _arc(0.25, 0.45, 0.2, 0.32, 270, 540, 24),
            _line((0.25, 0.77), (0.6, 0.93)),
            _line((0.85, 0.07), (0.85, 0.93), (1.3, 0.93)),
            _line((1.55, 0.07), (1.75, 0.93)), _line((1.95, 0.07), (1.75, 0.93)),
            _line((2.1, 0.07), (2.1, 0.6)),
        ]),
    }


def _build_prototypes() -> dict[str, Prototype]:
    protos = {}
    digits, da = _digit_strokes()
    for tok, strokes in digits.items():
        protos[tok] = Prototype(da, tuple(strokes))
    letters, la = _letter_strokes()
    for tok, strokes in letters.items():
        protos[tok] = Prototype(la, tuple(strokes))
    for tok, (asp, strokes) in _word_strokes().items():
        protos[tok] = Prototype(asp, tuple(strokes))
    assert set(protos) == set(VOCAB)
    return protos


PROTOTYPES = _build_prototypes()


# ---------------------------------------------------------------------------
# Rasterization


def _segments(polylines):
    segs = [np.concatenate([p[:-1], p[1:]], axis=1) for p in polylines if len(p) > 1]
    return np.concatenate(segs) if segs else np.zeros((0, 4))


def stroke_coverage(polylines, width: int, height: int, thickness: float, origin=(0, 0)) -> np.ndarray:
    """Anti-aliased ink coverage in [0, 1] of thick polylines on a ``height x width`` grid.

    ``polylines`` are in pixel coordinates; ``origin`` offsets the grid.
    """
    segs = _segments(polylines)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    px = (xs + origin[0] + 0.5).ravel()[:, None]
    py = (ys + origin[1] + 0.5).ravel()[:, None]
    x0, y0, x1, y1 = (segs[:, i][None, :] for i in range(4))
    dx, dy = x1 - x0, y1 - y0
    len2 = np.maximum(dx * dx + dy * dy, 1e-12)
    t = np.clip(((px - x0) * dx + (py - y0) * dy) / len2, 0.0, 1.0)
    dist = np.hypot(px - (x0 + t * dx), py - (y0 + t * dy)).min(axis=1)
    return np.clip(thickness / 2 + 0.5 - dist, 0.0, 1.0).reshape(height, width)


def place(proto: Prototype, cx: float, cy: float, glyph_h: float, angle_deg: float = 0.0):
    """Prototype polylines scaled to ``glyph_h`` pixels, rotated and centered at (cx, cy)."""
    th = math.radians(angle_deg)
    c, s = math.cos(th), math.sin(th)
    out = []
    for p in proto.strokes:
        q = (p - [proto.aspect / 2, 0.5]) * glyph_h
        rot = np.stack([c * q[:, 0] - s * q[:, 1], s * q[:, 0] + c * q[:, 1]], axis=1)
        out.append(rot + [cx, cy])
    return out


def glyph_height_for_frame(proto: Prototype, long_side: float) -> float:
    """Height that makes the prototype's longer side equal ``long_side``."""
    return long_side / proto.aspect if proto.aspect >= 1 else long_side


def render_glyph(token: str, rng: np.random.Generator, size: int = 32) -> np.ndarray:
    """One jittered 32x32 RGB sample of ``token``."""
    proto = PROTOTYPES[token]
    scale = rng.uniform(0.9, 1.1)
    gh = glyph_height_for_frame(proto, GLYPH_FILL * size * scale)
    cx = size / 2 + rng.uniform(-2, 2)
    cy = size / 2 + rng.uniform(-2, 2)
    angle = rng.uniform(-5, 5)
    cov = stroke_coverage(place(proto, cx, cy, gh, angle), size, size, max(STROKE * gh, 1.0))
    bg = rng.uniform(170, 245)
    fg = rng.uniform(15, 95)
    gray = bg + (fg - bg) * cov + rng.normal(0.0, 8.0, cov.shape)
    return np.repeat(to_uint8(gray)[:, :, None], 3, axis=2)


# ---------------------------------------------------------------------------
# Plates


@dataclass
class SyntheticPlate:
    image: np.ndarray
    line1: list[str]
    line2: str
    boxes: list[tuple[float, float, float, float]]  # ideal glyph boxes, reading order

    @property
    def tokens(self) -> list[str]:
        return list(self.line1) + list(self.line2)

    @property
    def text(self) -> str:
        return "".join(transliterate(TOKEN_INDEX[t]) for t in self.tokens)


def random_plate_tokens(rng: np.random.Generator):
    city = ["dhaka", "narayanganj"][rng.integers(2)]
    line1 = [city]
    if rng.random() < 0.5:
        line1.append("metro")
    line1.append(["ka", "ga", "jha", "la"][rng.integers(4)])
    digits = "".join(str(d) for d in rng.integers(0, 10, 6))
    return line1, digits


def render_plate(line1, line2: str, rng: np.random.Generator | None = None,
                 height: int = 80, noise: float = 6.0, blur: bool = True,
                 hyphen: bool = True, specks: int = 4) -> SyntheticPlate:
    """Render a two-line plate: word line on top, digit line below.

    ``rng`` drives glyph jitter, colors, noise and specks; ``None`` renders a
    clean, jitter-free plate.
    """
    jitter = rng is not None
    rng = rng if rng is not None else np.random.default_rng(0)
    h1, h2 = 0.28 * height, 0.30 * height
    gap1, gap2 = 0.8 * h1, 0.22 * h2
    protos1 = [PROTOTYPES[t] for t in line1]
    protos2 = [PROTOTYPES[d] for d in line2]
    w1 = sum(p.aspect * h1 for p in protos1) + gap1 * max(len(protos1) - 1, 0)
    hy_w = 0.3 * h2
    w2 = sum(p.aspect * h2 for p in protos2) + gap2 * max(len(protos2) - 1, 0)
    if hyphen and len(line2) > 2:
        w2 += hy_w + gap2
    margin = 0.16 * height
    width = int(math.ceil(max(w1, w2) + 2 * margin))

    placed, boxes = [], []

    def lay(protos, line_w, gh, cy, gap, hyphen_after=None):
        x = (width - line_w) / 2
        for i, p in enumerate(protos):
            s = rng.uniform(0.95, 1.05) if jitter else 1.0
            ang = rng.uniform(-3, 3) if jitter else 0.0
            dx, dy = (rng.uniform(-1, 1), rng.uniform(-1, 1)) if jitter else (0.0, 0.0)
            gw = p.aspect * gh
            cx = x + gw / 2 + dx
            placed.append((place(p, cx, cy + dy, gh * s, ang), STROKE * gh * s))
            boxes.append((cx - gw * s / 2, cy + dy - gh * s / 2, gw * s, gh * s))
            x += gw + gap
            if hyphen_after is not None and i == hyphen_after:
                placed.append(([_line((x, cy), (x + hy_w, cy))], 0.1 * gh))
                x += hy_w + gap

    lay(protos1, w1, h1, 0.29 * height, gap1)
    lay(protos2, w2, h2, 0.70 * height, gap2, hyphen_after=1 if hyphen and len(line2) > 2 else None)

    ink = np.zeros((height, width))
    for polys, thick in placed:
        pts = np.concatenate(polys)
        pad = thick + 2
        x0 = max(int(pts[:, 0].min() - pad), 0)
        y0 = max(int(pts[:, 1].min() - pad), 0)
        x1 = min(int(pts[:, 0].max() + pad) + 1, width)
        y1 = min(int(pts[:, 1].max() + pad) + 1, height)
        cov = stroke_coverage(polys, x1 - x0, y1 - y0, max(thick, 1.0), origin=(x0, y0))
        ink[y0:y1, x0:x1] = np.maximum(ink[y0:y1, x0:x1], cov)

    # plate frame, kept clear of the text
    f = 3
    frame = np.zeros_like(ink)
    frame[f : f + 2, f : width - f] = 1
    frame[height - f - 2 : height - f, f : width - f] = 1
    frame[f : height - f, f : f + 2] = 1
    frame[f : height - f, width - f - 2 : width - f] = 1
    ink = np.maximum(ink, frame)

    if jitter:
        for _ in range(specks):
            sy, sx = rng.integers(f + 3, height - f - 3), rng.integers(f + 3, width - f - 3)
            ink[sy, sx] = max(ink[sy, sx], 0.8)

    if jitter:
        bg = rng.uniform(195, 245, size=3)
        fg = rng.uniform(10, 70, size=3)
    else:
        bg, fg = np.full(3, 230.0), np.full(3, 30.0)
    rgb = bg + (fg - bg) * ink[:, :, None]
    if blur:
        rgb = np.stack([gaussian_blur(rgb[:, :, c], 1) for c in range(3)], axis=2)
    if jitter and noise > 0:
        rgb = rgb + rng.normal(0.0, noise, rgb.shape)
    return SyntheticPlate(to_uint8(rgb), list(line1), line2, boxes)
