"""End-to-end plate reading and the train/evaluate experiment harness.

Stage order for one plate::

    enhance -> working-size resize -> grayscale -> contrast stretch
    -> Otsu binarize (+ polarity flip) -> dilate -> mask multiply
    -> component boxes -> size filter -> line split (+ word merge)
    -> crop 32x32 glyphs -> classify -> assemble string
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from statistics import median

import numpy as np

from .dataset import Dataset, load_dataset, synth_glyphs
from .enhance import EnhanceConfig, enhance
from .errors import (
    BlprError,
    ConstantImageError,
    ModelVocabMismatchError,
    NoGlyphsFoundError,
    PipelineError,
)
from .evalkit import confusion_csv, confusion_matrix, metrics
from .imgcore import load_image, resize, save_image, to_grayscale
from .nnet import (
    Network,
    TrainConfig,
    build_network,
    predict_proba,
    save_model,
    train,
)
from .platefind import BoxFilterConfig, component_boxes, filter_character_boxes
from .preprocess import (
    StructuringElement,
    binarize,
    dilate,
    mask_multiply,
    otsu_threshold,
    stretch_contrast,
)
from .segment import Box2D, Glyph, merge_matra, order_and_crop, split_lines
from .vocab import VOCAB, transliterate

log = logging.getLogger(__name__)

# reference rows printed next to experiment results:
# (architecture, accuracy %, precision, recall, F1) on the original test split
REFERENCE_RESULTS = {
    "blpr-cnn": ("CNN", 92.38, 0.9667, 0.9162, 0.9476),
    "blpr-resnet": ("ResNet50", 87.50, 0.9343, 0.8827, 0.8984),
}

STAGE_NAMES = ("input", "enhanced", "working", "gray", "stretched", "binary", "dilated", "masked")


@dataclass(frozen=True)
class PipelineConfig:
    enhance: EnhanceConfig = field(default_factory=EnhanceConfig)
    enhance_first: bool = True
    working_height: int = 128
    stretch_low: float = 2.0
    stretch_high: float = 98.0
    stretch_before_otsu: bool = True
    auto_invert: bool = True
    se_width: int = 3
    se_height: int = 3
    dilate_iterations: int = 1
    connectivity: int = 8
    box_filter: BoxFilterConfig = field(default_factory=BoxFilterConfig)
    matra_merge: bool = True
    model_path: str | None = None
    normalize: str = "casefold"

    def __post_init__(self):
        if self.working_height < 1:
            raise ValueError("working_height must be >= 1")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        if self.dilate_iterations < 0:
            raise ValueError("dilate_iterations must be >= 0")
        if not 0 <= self.stretch_low < self.stretch_high <= 100:
            raise ValueError("stretch percentiles need 0 <= low < high <= 100")
        if self.normalize not in ("casefold", "none"):
            raise ValueError("normalize must be 'casefold' or 'none'")
        StructuringElement.rect(self.se_width, self.se_height)

    @property
    def structuring_element(self) -> StructuringElement:
        return StructuringElement.rect(self.se_width, self.se_height)

    # flat key=value config files ------------------------------------------

    _ENHANCE_KEYS = {
        "enhance_mode": "mode",
        "enhance_scale": "scale",
        "sharpen_amount": "sharpen_amount",
        "sharpen_radius": "sharpen_radius",
        "external_command": "external_command",
        "enhance_timeout": "timeout",
    }

    def with_overrides(self, values: dict[str, str]) -> "PipelineConfig":
        """Apply string overrides keyed by flat config names."""
        top, enh, box = {}, {}, {}
        top_types = {f.name: f.type for f in fields(self)}
        for key, raw in values.items():
            if key in self._ENHANCE_KEYS:
                name = self._ENHANCE_KEYS[key]
                enh[name] = _coerce(raw, type(getattr(EnhanceConfig(), name)) if name != "external_command" else str)
            elif key in BoxFilterConfig.__dataclass_fields__:
                box[key] = int(raw) if key == "min_area_px" else float(raw)
            elif key == "model":
                top["model_path"] = raw
            elif key in top_types and key not in ("enhance", "box_filter"):
                default = getattr(self, key)
                top[key] = raw if default is None else _coerce(raw, type(default))
            else:
                raise ValueError(f"unknown pipeline config key {key!r}")
        cfg = replace(self, **top)
        if enh:
            cfg = replace(cfg, enhance=replace(cfg.enhance, **enh))
        if box:
            cfg = replace(cfg, box_filter=replace(cfg.box_filter, **box))
        return cfg

    @classmethod
    def from_file(cls, path, base: "PipelineConfig | None" = None) -> "PipelineConfig":
        values = {}
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            values[key.strip()] = value.strip()
        return (base or cls()).with_overrides(values)

    def to_lines(self) -> str:
        e, b = self.enhance, self.box_filter
        items = [
            ("enhance_mode", e.mode), ("enhance_scale", e.scale),
            ("sharpen_amount", e.sharpen_amount), ("sharpen_radius", e.sharpen_radius),
            ("enhance_timeout", e.timeout),
        ]
        if e.external_command:
            items.append(("external_command", e.external_command))
        for f in fields(self):
            if f.name in ("enhance", "box_filter", "model_path"):
                continue
            items.append((f.name, getattr(self, f.name)))
        items += list(asdict(b).items())
        if self.model_path:
            items.append(("model", self.model_path))
        return "\n".join(f"{k}={str(v).lower() if isinstance(v, bool) else v}" for k, v in items) + "\n"


def _coerce(raw: str, typ):
    if typ is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if typ is int:
        return int(raw)
    if typ is float:
        return float(raw)
    return raw


# ---------------------------------------------------------------------------
# Plate reading


@dataclass
class GlyphReading:
    box: Box2D
    line_index: int
    position_in_line: int
    class_index: int
    prob: float

    @property
    def token(self) -> str:
        return VOCAB[self.class_index]


@dataclass
class PlateReading:
    glyphs: list[GlyphReading]
    lines: list[list[int]]

    @property
    def text(self) -> str:
        return "".join(transliterate(g.class_index) for g in self.glyphs)

    def as_dict(self) -> dict:
        return {
            "reading": self.text,
            "glyphs": [
                {"box": g.box.as_list(), "class_token": g.token, "prob": g.prob}
                for g in self.glyphs
            ],
            "lines": self.lines,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


@dataclass
class PlateStages:
    images: dict[str, np.ndarray]
    threshold: int | None = None
    inverted: bool = False
    boxes: list[Box2D] = field(default_factory=list)
    char_boxes: list[Box2D] = field(default_factory=list)
    line1: list[Box2D] = field(default_factory=list)
    line2: list[Box2D] = field(default_factory=list)
    glyphs: list[Glyph] = field(default_factory=list)

    def dump(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for i, name in enumerate(STAGE_NAMES):
            if name in self.images:
                path = out_dir / f"{i:02d}_{name}.png"
                save_image(self.images[name], path)
                written.append(path)
        return written


def working_size(img: np.ndarray, working_height: int) -> np.ndarray:
    h, w = img.shape[:2]
    new_w = max(1, int(round(w * working_height / h)))
    return resize(img, new_w, working_height)


def _stage(name):
    """Decorate a step so domain errors surface as PipelineError(name)."""

    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except PipelineError:
                raise
            except BlprError as exc:
                raise PipelineError(name, exc) from exc

        return inner

    return wrap


def prepare_plate(img: np.ndarray, cfg: PipelineConfig, workdir=None) -> dict[str, np.ndarray]:
    """Enhancement and working-size resize; returns the 'input', 'enhanced' and 'working' images."""
    run_enhance = _stage("enhance")(enhance)
    if cfg.enhance_first:
        enhanced = run_enhance(img, cfg.enhance, workdir)
        working = working_size(enhanced, cfg.working_height)
    else:
        enhanced = run_enhance(working_size(img, cfg.working_height), cfg.enhance, workdir)
        working = enhanced
    return {"input": img, "enhanced": enhanced, "working": working}


def segment_plate(working: np.ndarray, cfg: PipelineConfig, images=None) -> PlateStages:
    """Everything from grayscale conversion to 32x32 glyph crops."""
    images = dict(images or {"working": working})
    images["working"] = working
    st = PlateStages(images)
    gray = to_grayscale(working)
    stretched = _stage("stretch")(stretch_contrast)(gray, cfg.stretch_low, cfg.stretch_high)
    images["gray"], images["stretched"] = gray, stretched
    source = stretched if cfg.stretch_before_otsu else gray
    try:
        st.threshold = otsu_threshold(source)
    except ConstantImageError as exc:
        raise NoGlyphsFoundError(f"plate image has a single intensity ({exc})", stage="binarize") from exc
    binary = binarize(source, st.threshold)
    # characters are the minority class; flip dark-on-light plates
    if cfg.auto_invert and binary.mean() > 0.5:
        binary = ~binary
        st.inverted = True
    images["binary"] = binary
    dilated = dilate(binary, cfg.structuring_element, cfg.dilate_iterations)
    images["dilated"] = dilated
    images["masked"] = mask_multiply(dilated, gray)
    h, w = dilated.shape
    st.boxes = component_boxes(dilated, cfg.connectivity)
    st.char_boxes = filter_character_boxes(st.boxes, w, h, cfg.box_filter)
    if not st.char_boxes:
        raise NoGlyphsFoundError(
            f"none of {len(st.boxes)} components passed the size filter", stage="filter"
        )
    st.line1, st.line2 = split_lines(st.char_boxes, h)
    if cfg.matra_merge:
        st.line1 = merge_matra(st.line1, median(b.w for b in st.char_boxes))
    st.glyphs = _stage("crop")(order_and_crop)(working, st.line1, st.line2)
    return st


def run_stages(img: np.ndarray, cfg: PipelineConfig, start: str = "input", workdir=None) -> PlateStages:
    if start == "input":
        images = prepare_plate(img, cfg, workdir)
        return segment_plate(images["working"], cfg, images)
    if start == "working":
        return segment_plate(img, cfg)
    raise ValueError(f"start stage must be 'input' or 'working', got {start!r}")


def classify_glyphs(net: Network, glyphs: list[Glyph]) -> list[GlyphReading]:
    if not glyphs:
        return []
    probs = predict_proba(net, np.stack([g.image for g in glyphs]))
    out = []
    for g, p in zip(glyphs, probs):
        k = int(np.argmax(p))
        out.append(GlyphReading(g.source_box, g.line_index, g.position_in_line, k, float(p[k])))
    return out


def recognize_plate(img: np.ndarray, net: Network, cfg: PipelineConfig | None = None,
                    start: str = "input", workdir=None) -> PlateReading:
    """Read one plate image. ``start='working'`` skips enhancement and resizing."""
    cfg = cfg or PipelineConfig()
    if tuple(net.vocab) != VOCAB:
        raise ModelVocabMismatchError(f"model vocabulary {net.vocab} differs from {VOCAB}")
    st = run_stages(img, cfg, start, workdir)
    readings = classify_glyphs(net, st.glyphs)
    lines = [
        [i for i, g in enumerate(readings) if g.line_index == li] for li in (0, 1)
    ]
    return PlateReading(readings, lines)


def recognize_files(paths, net: Network, cfg: PipelineConfig | None = None,
                    workers: int = 1, start: str = "input"):
    """Yield (path, PlateReading or exception) in sorted path order."""
    paths = sorted(Path(p) for p in paths)

    def one(path):
        try:
            return recognize_plate(load_image(path), net, cfg, start)
        except BlprError as exc:
            return exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, paths))
    else:
        results = [one(p) for p in paths]
    return list(zip(paths, results))


# ---------------------------------------------------------------------------
# Experiments


@dataclass
class ExperimentReport:
    arch: str
    train_config: TrainConfig
    metrics: dict
    confusion: np.ndarray
    history: object
    reference: tuple | None
    n_test: int
    net: Network | None = None

    def as_dict(self) -> dict:
        ref = None
        if self.reference:
            name, acc, p, r, f1 = self.reference
            ref = {"architecture": name, "accuracy": acc / 100.0, "precision": p, "recall": r, "f1": f1}
        return {
            "arch": self.arch,
            "train_config": asdict(self.train_config),
            "n_test": self.n_test,
            "metrics": self.metrics,
            "reference": ref,
            "history": {
                "train_loss": self.history.train_loss,
                "train_acc": self.history.train_acc,
                "valid_loss": self.history.valid_loss,
                "valid_acc": self.history.valid_acc,
            },
        }

    def summary(self) -> str:
        m = self.metrics
        lines = [
            f"{'architecture':<14} {'accuracy':>9} {'precision':>9} {'recall':>9} {'F1':>9}",
            f"{self.arch:<14} {100 * m['accuracy']:>9.2f} {m['precision']:>9.4f} "
            f"{m['recall']:>9.4f} {m['f1']:>9.4f}   (macro, {self.n_test} test glyphs)",
            f"{'':<14} {'':>9} {m['micro_precision']:>9.4f} {m['micro_recall']:>9.4f} "
            f"{m['micro_f1']:>9.4f}   (micro)",
        ]
        if self.reference:
            name, acc, p, r, f1 = self.reference
            lines.append(f"{'ref ' + name:<14} {acc:>9.2f} {p:>9.4f} {r:>9.4f} {f1:>9.4f}   (published)")
        return "\n".join(lines)

    def write(self, out_dir) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "confusion.csv").write_text(confusion_csv(self.confusion), encoding="utf-8")
        self.history.write_csv(out_dir / "history.csv")
        (out_dir / "report.json").write_text(
            json.dumps(self.as_dict(), sort_keys=True, indent=2), encoding="utf-8"
        )
        if self.net is not None:
            save_model(self.net, out_dir / "model.bin")


def run_experiment(data: Dataset | str | Path | None, arch: str = "blpr-cnn",
                   cfg: TrainConfig | None = None, init_seed: int | None = None,
                   progress=None) -> ExperimentReport:
    """Train ``arch`` on ``data`` and score it on the test split.

    ``data`` is a loaded Dataset, a dataset root directory, or None for the
    default synthetic set seeded with ``cfg.seed``.
    """
    cfg = cfg or TrainConfig()
    if data is None:
        data = synth_glyphs(cfg.seed)
    elif not isinstance(data, Dataset):
        data = load_dataset(data)
    net = build_network(arch, seed=cfg.seed if init_seed is None else init_seed)
    net, history = train(net, data.arrays("train"), data.arrays("valid"), cfg, progress=progress)
    images, labels = data.arrays("test")
    if len(labels):
        pred = predict_proba(net, images).argmax(axis=1)
        cm = confusion_matrix(zip(labels.tolist(), pred.tolist()))
        m = metrics(cm).as_dict()
    else:
        cm = np.zeros((len(VOCAB), len(VOCAB)), dtype=np.int64)
        m = {k: float("nan") for k in ("accuracy", "precision", "recall", "f1",
                                        "micro_precision", "micro_recall", "micro_f1")}
    return ExperimentReport(arch, cfg, m, cm, history, REFERENCE_RESULTS.get(arch), len(labels), net)
