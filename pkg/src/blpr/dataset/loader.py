"""Labeled glyph datasets on disk and their synthetic stand-in.

Layout::

    <root>/{train,valid,test}/<class_token>/*.png|*.ppm|*.pgm
    <root>/labels.map        optional, one ``dirname=class_token`` per line
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    CorruptDataError,
    LabelOutOfRangeError,
    MissingSplitError,
    UnknownClassDirError,
    UnreadableImageError,
    UnsupportedFormatError,
)
from ..imgcore import is_image_file, load_image, resize, save_image
from ..vocab import NUM_CLASSES, TOKEN_INDEX, VOCAB
from .synth import render_glyph

SPLITS = ("train", "valid", "test")


@dataclass
class LabeledGlyph:
    image: np.ndarray  # (32, 32, 3) uint8
    label: int
    source: str = ""

    def __post_init__(self):
        if not 0 <= self.label < NUM_CLASSES:
            raise LabelOutOfRangeError(f"label {self.label} outside [0, {NUM_CLASSES})")


@dataclass
class SplitCounts:
    train: int = 0
    valid: int = 0
    test: int = 0


@dataclass
class Dataset:
    train: list[LabeledGlyph] = field(default_factory=list)
    valid: list[LabeledGlyph] = field(default_factory=list)
    test: list[LabeledGlyph] = field(default_factory=list)
    counts: dict[str, SplitCounts] = field(default_factory=dict)

    def split(self, name: str) -> list[LabeledGlyph]:
        return getattr(self, name)

    def arrays(self, name: str):
        samples = self.split(name)
        if not samples:
            return np.zeros((0, 32, 32, 3), np.uint8), np.zeros(0, np.int64)
        return np.stack([s.image for s in samples]), np.array([s.label for s in samples])

    def counts_table(self) -> str:
        lines = [f"{'class':<12} {'train':>6} {'valid':>6} {'test':>6}"]
        for tok in VOCAB:
            c = self.counts.get(tok, SplitCounts())
            lines.append(f"{tok:<12} {c.train:>6} {c.valid:>6} {c.test:>6}")
        return "\n".join(lines)


def _count_table(ds: Dataset):
    ds.counts = {tok: SplitCounts() for tok in VOCAB}
    for split in SPLITS:
        for s in ds.split(split):
            c = ds.counts[VOCAB[s.label]]
            setattr(c, split, getattr(c, split) + 1)


def read_label_map(root: Path) -> dict[str, str]:
    path = root / "labels.map"
    if not path.is_file():
        return {}
    mapping = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, token = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected dirname=class_token")
        token = token.strip()
        if token not in TOKEN_INDEX:
            raise UnknownClassDirError(f"{path}:{lineno}: unknown class token {token!r}")
        mapping[name.strip()] = token
    return mapping


def _load_glyph(path: Path) -> np.ndarray:
    try:
        img = load_image(path)
    except (CorruptDataError, UnsupportedFormatError) as exc:
        raise UnreadableImageError(f"{path}: {exc}") from exc
    if img.shape[:2] != (32, 32):
        img = resize(img, 32, 32)
    return img


def load_dataset(root, workers: int = 4) -> Dataset:
    """Read all three splits. Result order is class index, then filename."""
    root = Path(root)
    mapping = read_label_map(root)
    jobs = {split: [] for split in SPLITS}
    for split in SPLITS:
        sdir = root / split
        if not sdir.is_dir():
            raise MissingSplitError(f"missing split directory {sdir}")
        for cdir in sorted(p for p in sdir.iterdir() if p.is_dir()):
            token = mapping.get(cdir.name, cdir.name)
            if token not in TOKEN_INDEX:
                raise UnknownClassDirError(f"{cdir}: not a class token (add it to labels.map?)")
            label = TOKEN_INDEX[token]
            for f in sorted(cdir.iterdir()):
                if f.is_file() and is_image_file(f):
                    jobs[split].append((label, f))
    ds = Dataset()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for split in SPLITS:
            items = sorted(jobs[split], key=lambda j: (j[0], j[1].name))
            images = pool.map(_load_glyph, [f for _, f in items])
            setattr(ds, split, [LabeledGlyph(img, lab, str(f)) for img, (lab, f) in zip(images, items)])
    _count_table(ds)
    return ds


def synth_glyphs(seed: int = 42, per_class_train: int = 100, per_class_valid: int = 35,
                 per_class_test: int = 22) -> Dataset:
    """Deterministic synthetic dataset with the same structure as ``load_dataset``."""
    rng = np.random.default_rng(seed)
    ds = Dataset()
    for split, n in zip(SPLITS, (per_class_train, per_class_valid, per_class_test)):
        if n < 0:
            raise ValueError("per-class counts must be >= 0")
        samples = [
            LabeledGlyph(render_glyph(tok, rng), label)
            for label, tok in enumerate(VOCAB)
            for _ in range(n)
        ]
        setattr(ds, split, samples)
    _count_table(ds)
    return ds


def write_dataset(ds: Dataset, root) -> None:
    """Write ``ds`` in the on-disk layout ``load_dataset`` reads."""
    root = Path(root)
    for split in SPLITS:
        seen: dict[int, int] = {}
        for s in ds.split(split):
            cdir = root / split / VOCAB[s.label]
            cdir.mkdir(parents=True, exist_ok=True)
            i = seen.get(s.label, 0)
            seen[s.label] = i + 1
            save_image(s.image, cdir / f"{i:05d}.png")
        for tok in VOCAB:
            (root / split / tok).mkdir(parents=True, exist_ok=True)
