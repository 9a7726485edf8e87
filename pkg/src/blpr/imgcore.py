"""Raster types, codecs, bilinear resizing and color conversion.

Images are plain numpy arrays, row-major:

* RGB image:    ``(height, width, 3)`` uint8
* gray image:   ``(height, width)`` uint8
* binary image: ``(height, width)`` bool, True = foreground

PNG goes through Pillow. Binary PPM (P6) and PGM (P5) are encoded and
decoded here so the byte layout follows Netpbm exactly.
"""

from __future__ import annotations

import io
import os
import re
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptDataError,
    ImageIOError,
    UnsupportedFormatError,
    ZeroDimensionError,
)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
LUMA_WEIGHTS = (0.299, 0.587, 0.114)
IMAGE_SUFFIXES = (".png", ".ppm", ".pgm")


def round_half_away(x):
    """Round to nearest integer, halves away from zero (unlike np.round)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def to_uint8(x) -> np.ndarray:
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


def check_rgb(img: np.ndarray) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got {getattr(img, 'shape', type(img))}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ZeroDimensionError("image must be at least 1x1")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 RGB data, got {img.dtype}")
    return img


def gray_to_rgb(gray: np.ndarray) -> np.ndarray:
    """Expand a gray or binary image to RGB by channel replication."""
    if gray.dtype == bool:
        gray = binary_to_gray(gray)
    return np.repeat(gray[:, :, None], 3, axis=2)


def binary_to_gray(mask: np.ndarray) -> np.ndarray:
    return np.where(mask, 255, 0).astype(np.uint8)


# ---------------------------------------------------------------------------
# Netpbm

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _parse_netpbm(raw: bytes) -> np.ndarray:
    magic = raw[:2]
    channels = 3 if magic == b"P6" else 1
    pos = 2
    fields = []
    for _ in range(3):
        m = _TOKEN.match(raw, pos)
        if m is None:
            raise CorruptDataError("truncated Netpbm header")
        try:
            fields.append(int(m.group(1)))
        except ValueError:
            raise CorruptDataError(f"bad Netpbm header field {m.group(1)!r}") from None
        pos = m.end()
    width, height, maxval = fields
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise CorruptDataError(f"bad Netpbm header: {width}x{height} maxval {maxval}")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(raw) or raw[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r", b"\v", b"\f"):
        raise CorruptDataError("missing whitespace after Netpbm header")
    pos += 1
    sample_bytes = 1 if maxval < 256 else 2
    n = width * height * channels
    body = raw[pos : pos + n * sample_bytes]
    if len(body) < n * sample_bytes:
        raise CorruptDataError(f"Netpbm raster truncated: {len(body)} of {n * sample_bytes} bytes")
    samples = np.frombuffer(body, dtype=np.uint8 if sample_bytes == 1 else ">u2").astype(np.int64)
    if samples.max(initial=0) > maxval:
        raise CorruptDataError("Netpbm sample exceeds maxval")
    if maxval != 255:
        samples = np.floor(samples * 255 / maxval + 0.5)
    data = samples.astype(np.uint8).reshape(height, width, channels)
    return data if channels == 3 else gray_to_rgb(data[:, :, 0])


def _encode_netpbm(arr: np.ndarray) -> bytes:
    h, w = arr.shape[:2]
    magic = b"P6" if arr.ndim == 3 else b"P5"
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(arr).tobytes()


# ---------------------------------------------------------------------------
# Public codec API


def load_image(path) -> np.ndarray:
    """Decode a PNG, PPM (P6) or PGM (P5) file into an RGB array.

    Gray sources are expanded to three identical channels.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    raw = path.read_bytes()
    if raw[:2] in (b"P5", b"P6"):
        return _parse_netpbm(raw)
    if raw[:8] == PNG_SIGNATURE:
        try:
            with Image.open(io.BytesIO(raw)) as im:
                im.load()
                if im.mode == "L":
                    return gray_to_rgb(np.asarray(im, dtype=np.uint8))
                if im.mode in ("I;16", "I;16B", "I"):
                    arr = np.asarray(im, dtype=np.float64)
                    return gray_to_rgb(to_uint8(arr * 255 / 65535))
                return np.array(im.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
            raise CorruptDataError(f"cannot decode PNG {path}: {exc}") from exc
    raise UnsupportedFormatError(f"{path}: not a PNG, PPM (P6) or PGM (P5) file")


def save_image(img: np.ndarray, path) -> None:
    """Write an RGB, gray or binary array. Format follows the suffix.

    Binary images are stored as 0/255 gray. ``.ppm`` always writes P6,
    ``.pgm`` writes P5 and rejects RGB input.
    """
    path = Path(path)
    arr = np.asarray(img)
    if arr.dtype == bool:
        arr = binary_to_gray(arr)
    if arr.dtype != np.uint8 or arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise ValueError(f"cannot save array of shape {arr.shape} and dtype {arr.dtype}")
    suffix = path.suffix.lower()
    if suffix == ".pgm" and arr.ndim == 3:
        raise UnsupportedFormatError("PGM cannot hold an RGB image; use .ppm or .png")
    if suffix == ".ppm" and arr.ndim == 2:
        arr = gray_to_rgb(arr)
    if suffix in (".ppm", ".pgm"):
        payload = _encode_netpbm(arr)
    elif suffix == ".png":
        buf = io.BytesIO()
        Image.fromarray(arr, mode="RGB" if arr.ndim == 3 else "L").save(buf, format="PNG")
        payload = buf.getvalue()
    else:
        raise UnsupportedFormatError(f"unsupported output suffix {suffix!r}")
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def is_image_file(name: str | os.PathLike) -> bool:
    return Path(name).suffix.lower() in IMAGE_SUFFIXES


# ---------------------------------------------------------------------------
# Geometry and color


def _bilinear_axis(n_in: int, n_out: int):
    """Source taps and integer weights for pixel-center aligned sampling.

    Source coordinate of target i is ((2i + 1) * n_in - n_out) / (2 * n_out),
    clamped to [0, n_in - 1]; weights are numerators over ``2 * n_out``.
    """
    den = 2 * n_out
    num = (2 * np.arange(n_out, dtype=np.int64) + 1) * n_in - n_out
    num = np.clip(num, 0, (n_in - 1) * den)
    i0 = num // den
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, num - i0 * den, den


def resize(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize of an RGB or gray uint8 image to exactly ``out_w`` x ``out_h``.

    Interpolation runs in exact integer arithmetic, so halves round away
    from zero without floating-point drift.
    """
    if out_w < 1 or out_h < 1:
        raise ZeroDimensionError(f"target size must be >= 1x1, got {out_w}x{out_h}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ZeroDimensionError("source image is empty")
    h, w = img.shape[:2]
    if (w, h) == (out_w, out_h):
        return img.copy()
    src = img.astype(np.int64)
    y0, y1, fy, dy = _bilinear_axis(h, out_h)
    x0, x1, fx, dx = _bilinear_axis(w, out_w)
    if img.ndim == 3:
        fx = fx[None, :, None]
        fy = fy[:, None, None]
    else:
        fx = fx[None, :]
        fy = fy[:, None]
    top = src[y0][:, x0] * (dx - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (dx - fx) + src[y1][:, x1] * fx
    total = top * (dy - fy) + bot * fy
    scale = dx * dy
    # all terms are non-negative, so floor((2v + s) / 2s) rounds halves up
    return ((2 * total + scale) // (2 * scale)).astype(np.uint8)


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half away from zero."""
    check_rgb(img)
    rgb = img.astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    return to_uint8(wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2])
