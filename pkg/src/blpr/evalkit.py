"""Classification metrics, gestalt sequence similarity and plate-level scoring."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassOutOfRangeError, EmptyInputError, EmptyMatrixError
from .vocab import NUM_CLASSES, VOCAB

THRESHOLDS = (0.95, 0.90)


# ---------------------------------------------------------------------------
# Confusion matrix and per-class metrics


def confusion_matrix(pairs, n_classes: int = NUM_CLASSES) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in pairs:
        if not (0 <= t < n_classes and 0 <= p < n_classes):
            raise ClassOutOfRangeError(f"pair ({t}, {p}) outside [0, {n_classes})")
        cm[t, p] += 1
    return cm


@dataclass
class ClassMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    per_class_precision: list[float] = field(default_factory=list)
    per_class_recall: list[float] = field(default_factory=list)
    per_class_f1: list[float] = field(default_factory=list)
    included: list[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
        }


def _safe_div(a, b):
    return np.divide(a, b, out=np.zeros_like(a, dtype=np.float64), where=b != 0)


def metrics(cm: np.ndarray) -> ClassMetrics:
    """Accuracy plus macro- and micro-averaged precision, recall and F1.

    Macro averages run over classes that appear at least once as a true or
    a predicted label. Undefined ratios count as 0.
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total == 0:
        raise EmptyMatrixError("confusion matrix has no samples")
    tp = np.diag(cm).astype(np.float64)
    pred = cm.sum(axis=0).astype(np.float64)
    true = cm.sum(axis=1).astype(np.float64)
    precision = _safe_div(tp, pred)
    recall = _safe_div(tp, true)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    used = np.flatnonzero((pred + true) > 0)
    # single-label multiclass: micro precision == micro recall == accuracy
    acc = float(tp.sum() / total)
    return ClassMetrics(
        accuracy=acc,
        precision=float(precision[used].mean()),
        recall=float(recall[used].mean()),
        f1=float(f1[used].mean()),
        micro_precision=acc,
        micro_recall=acc,
        micro_f1=acc,
        per_class_precision=precision.tolist(),
        per_class_recall=recall.tolist(),
        per_class_f1=f1.tolist(),
        included=used.tolist(),
    )


def confusion_csv(cm: np.ndarray, labels=VOCAB) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["true\\pred"] + list(labels))
    for tok, row in zip(labels, cm):
        w.writerow([tok] + [int(v) for v in row])
    return buf.getvalue()


def confusion_text(cm: np.ndarray, labels=VOCAB) -> str:
    short = [t[:5] for t in labels]
    width = max(5, len(str(int(cm.max(initial=0)))))
    head = " " * 6 + " ".join(f"{s:>{width}}" for s in short)
    rows = [f"{s:<5} " + " ".join(f"{int(v):>{width}}" for v in r) for s, r in zip(short, cm)]
    return "\n".join([head] + rows)


# ---------------------------------------------------------------------------
# Gestalt (Ratcliff-Obershelp) matching


def longest_match(a, b, alo: int, ahi: int, blo: int, bhi: int):
    """Longest common block of a[alo:ahi] and b[blo:bhi] as (i, j, size).

    Ties go to the smallest i, then the smallest j. Size 0 returns (alo, blo, 0).
    """
    best_i, best_j, best = alo, blo, 0
    prev = [0] * (bhi - blo + 1)
    for i in range(alo, ahi):
        cur = [0] * (bhi - blo + 1)
        ai = a[i]
        for j in range(blo, bhi):
            if ai == b[j]:
                k = prev[j - blo] + 1
                cur[j - blo + 1] = k
                start_i, start_j = i - k + 1, j - k + 1
                if k > best or (k == best and (start_i, start_j) < (best_i, best_j)):
                    best_i, best_j, best = start_i, start_j, k
        prev = cur
    return best_i, best_j, best


def matching_blocks(a, b) -> list[tuple[int, int, int]]:
    """Non-overlapping matched blocks found by recursive longest-match splitting."""
    blocks = []
    stack = [(0, len(a), 0, len(b))]
    while stack:
        alo, ahi, blo, bhi = stack.pop()
        i, j, k = longest_match(a, b, alo, ahi, blo, bhi)
        if k:
            blocks.append((i, j, k))
            if alo < i and blo < j:
                stack.append((alo, i, blo, j))
            if i + k < ahi and j + k < bhi:
                stack.append((i + k, ahi, j + k, bhi))
    return sorted(blocks)


def sequence_ratio(a, b) -> float:
    """2*M / (len(a) + len(b)); two empty sequences score 1.0."""
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    matched = sum(k for _, _, k in matching_blocks(a, b))
    return 2.0 * matched / total


# ---------------------------------------------------------------------------
# Plate-level evaluation


def normalize_text(s: str, mode: str = "casefold") -> str:
    if mode == "casefold":
        return s.casefold()
    if mode == "none":
        return s
    raise ValueError(f"normalization must be 'casefold' or 'none', got {mode!r}")


@dataclass
class EvalReport:
    pairs: list[dict]
    mean: float
    ge_095: int
    ge_090: int

    @property
    def ratios(self) -> list[float]:
        return [p["ratio"] for p in self.pairs]

    def as_dict(self) -> dict:
        return {"pairs": self.pairs, "mean": self.mean, "ge_095": self.ge_095, "ge_090": self.ge_090}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    def table(self) -> str:
        gw = max([9] + [len(p["gen"]) for p in self.pairs])
        dw = max([7] + [len(p["des"]) for p in self.pairs])
        lines = [f"{'generated':<{gw}}  {'desired':<{dw}}  ratio"]
        for p in self.pairs:
            lines.append(f"{p['gen']:<{gw}}  {p['des']:<{dw}}  {p['ratio']:.4f}")
        n = len(self.pairs)
        lines.append(f"mean ratio {self.mean:.4f} over {n} plates")
        lines.append(f">= 0.95: {self.ge_095}/{n}   >= 0.90: {self.ge_090}/{n}")
        return "\n".join(lines)


def evaluate_plates(readings, normalize: str = "casefold") -> EvalReport:
    """Score (generated, desired) string pairs with the gestalt ratio."""
    readings = list(readings)
    if not readings:
        raise EmptyInputError("no plate readings to evaluate")
    pairs = []
    for gen, des in readings:
        r = sequence_ratio(normalize_text(gen, normalize), normalize_text(des, normalize))
        pairs.append({"gen": gen, "des": des, "ratio": r})
    ratios = [p["ratio"] for p in pairs]
    return EvalReport(
        pairs=pairs,
        mean=float(sum(ratios) / len(ratios)),
        ge_095=sum(r >= 0.95 for r in ratios),
        ge_090=sum(r >= 0.90 for r in ratios),
    )


def threshold_sweep(ratios, thresholds=(0.80, 0.85, 0.90, 0.95, 1.0)) -> list[tuple[float, int, float]]:
    """(threshold, count at or above it, fraction) for each threshold."""
    ratios = list(ratios)
    n = len(ratios)
    out = []
    for t in thresholds:
        c = sum(r >= t for r in ratios)
        out.append((t, c, c / n if n else 0.0))
    return out


def read_pairs_tsv(path) -> list[tuple[str, str]]:
    """Two-column UTF-8 TSV: generated TAB desired. Blank and '#' lines are skipped."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 tab-separated columns, got {len(cols)}")
            pairs.append((cols[0], cols[1]))
    return pairs
