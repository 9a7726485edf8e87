"""Image restoration stage: a classical built-in enhancer and an external hook.

The built-in path upscales bilinearly and then applies an unsharp mask::

    out = clamp(in + amount * (in - blur(in)))

``blur`` is a separable binomial kernel of half-width ``radius`` (rows of
Pascal's triangle, the discrete Gaussian), applied with edge replication.

The external path runs any command line containing ``{in}`` and ``{out}``
placeholders. The tool reads a PNG at ``{in}``, writes a PNG at ``{out}``
and exits 0, which is enough to slot in a real restoration network.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from .errors import EnhanceTimeoutError, OutputMissingError, ProcessFailedError
from .imgcore import check_rgb, load_image, resize, save_image, to_uint8

MODES = ("builtin", "external", "none")


@dataclass(frozen=True)
class EnhanceConfig:
    mode: str = "builtin"
    scale: int = 4
    sharpen_amount: float = 1.0
    sharpen_radius: int = 2
    external_command: str | None = None
    timeout: float = 120.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"enhance mode must be one of {MODES}, got {self.mode!r}")
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if self.sharpen_amount < 0:
            raise ValueError("sharpen_amount must be >= 0")
        if self.sharpen_radius < 1:
            raise ValueError("sharpen_radius must be >= 1")
        if self.mode == "external" and not self.external_command:
            raise ValueError("external mode needs external_command")


def binomial_kernel(radius: int) -> np.ndarray:
    """1-D normalized binomial weights of length ``2 * radius + 1``."""
    n = 2 * radius
    k = np.array([comb(n, i) for i in range(n + 1)], dtype=np.float64)
    return k / k.sum()


def gaussian_blur(channel: np.ndarray, radius: int) -> np.ndarray:
    """Separable binomial blur of a 2-D float array, borders replicated."""
    k = binomial_kernel(radius)
    padded = np.pad(channel, radius, mode="edge")
    h, w = channel.shape
    rows = np.zeros((h + 2 * radius, w))
    for i, wt in enumerate(k):
        rows += wt * padded[:, i : i + w]
    out = np.zeros((h, w))
    for i, wt in enumerate(k):
        out += wt * rows[i : i + h, :]
    return out


def unsharp_mask(img: np.ndarray, amount: float, radius: int) -> np.ndarray:
    src = img.astype(np.float64)
    blurred = np.stack([gaussian_blur(src[:, :, c], radius) for c in range(3)], axis=2)
    return to_uint8(src + amount * (src - blurred))


def enhance_builtin(img: np.ndarray, cfg: EnhanceConfig) -> np.ndarray:
    check_rgb(img)
    h, w = img.shape[:2]
    up = resize(img, w * cfg.scale, h * cfg.scale) if cfg.scale != 1 else img.copy()
    if cfg.sharpen_amount == 0:
        return up
    return unsharp_mask(up, cfg.sharpen_amount, cfg.sharpen_radius)


def enhance_external(img: np.ndarray, cfg: EnhanceConfig, workdir) -> np.ndarray:
    """Round-trip ``img`` through the configured external command.

    Callers must not share ``workdir`` between concurrent calls.
    """
    check_rgb(img)
    if not cfg.external_command:
        raise ValueError("no external_command configured")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    in_path, out_path = workdir / "in.png", workdir / "out.png"
    if out_path.exists():
        out_path.unlink()
    save_image(img, in_path)
    argv = [
        tok.replace("{in}", str(in_path)).replace("{out}", str(out_path))
        for tok in shlex.split(cfg.external_command)
    ]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=cfg.timeout)
    except subprocess.TimeoutExpired as exc:
        raise EnhanceTimeoutError(f"external enhancer exceeded {cfg.timeout} s") from exc
    except FileNotFoundError as exc:
        raise ProcessFailedError(127, str(exc)) from exc
    if proc.returncode != 0:
        raise ProcessFailedError(proc.returncode, proc.stderr)
    if not out_path.is_file():
        raise OutputMissingError(f"external enhancer wrote nothing at {out_path}")
    return load_image(out_path)


def enhance(img: np.ndarray, cfg: EnhanceConfig, workdir=None) -> np.ndarray:
    if cfg.mode == "none":
        return img.copy()
    if cfg.mode == "builtin":
        return enhance_builtin(img, cfg)
    if workdir is None:
        with tempfile.TemporaryDirectory(prefix="blpr-enhance-") as tmp:
            return enhance_external(img, cfg, tmp)
    return enhance_external(img, cfg, workdir)
