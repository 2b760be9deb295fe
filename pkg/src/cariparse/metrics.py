"""Per-class IoU / mIoU over the nine facial-component classes.

Scores are dataset-level: one confusion matrix is accumulated over all
images and IoU is computed from its pixel unions, not averaged per image.
Class 0 is background and never enters the mean.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

CLASS_NAMES = (
    "facial skin",
    "eye-l",
    "eye-r",
    "brow-l",
    "brow-r",
    "nose",
    "in mouth",
    "upper lip",
    "lower lip",
)
NUM_CLASSES = len(CLASS_NAMES) + 1  # + background

# horizontal flip exchanges these class-id pairs (eye-l/eye-r, brow-l/brow-r)
LEFT_RIGHT_SWAPS = ((2, 3), (4, 5))


def new_confusion(num_classes: int = NUM_CLASSES) -> np.ndarray:
    return np.zeros((num_classes, num_classes), dtype=np.int64)


def accumulate(cm: np.ndarray, pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Add per-pixel (gt, pred) joint counts of one image into cm."""
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"pred {pred.shape} and gt {gt.shape} shapes differ")
    c = cm.shape[0]
    if pred.min() < 0 or gt.min() < 0 or pred.max() >= c or gt.max() >= c:
        raise ValueError(f"label values outside [0, {c})")
    joint = np.bincount(
        (gt.astype(np.int64) * c + pred.astype(np.int64)).ravel(), minlength=c * c
    )
    cm += joint.reshape(c, c)
    return cm


@dataclass
class IoUReport:
    per_class: np.ndarray  # 9 values, NaN where a class has zero union
    present: np.ndarray  # bool mask over the 9 classes
    miou: float
    support: np.ndarray = field(default=None)  # gt pixels per class

    @classmethod
    def from_per_class(cls, values) -> "IoUReport":
        v = np.asarray(values, dtype=np.float64)
        if v.shape != (len(CLASS_NAMES),):
            raise ValueError(f"expected {len(CLASS_NAMES)} per-class values")
        present = np.isfinite(v)
        return cls(
            per_class=v,
            present=present,
            miou=float(np.mean(v[present])),
            support=np.zeros(len(CLASS_NAMES), dtype=np.int64),
        )


def iou_report(cm: np.ndarray) -> IoUReport:
    """Per-class IoU over classes 1..9 plus their mean.

    Classes whose union is empty (never in gt nor predictions) are flagged
    absent and excluded from the mean instead of counting as 0 or 1.
    """
    if cm.sum() == 0:
        raise ValueError("empty evaluation: confusion matrix has no pixels")
    n = len(CLASS_NAMES)
    per_class = np.full(n, np.nan)
    present = np.zeros(n, dtype=bool)
    support = np.zeros(n, dtype=np.int64)
    for i in range(n):
        c = i + 1
        inter = cm[c, c]
        union = cm[c, :].sum() + cm[:, c].sum() - inter
        support[i] = cm[c, :].sum()
        if union > 0:
            per_class[i] = inter / union
            present[i] = True
    if not present.any():
        raise ValueError("empty evaluation: no foreground class has any pixels")
    miou = float(np.mean(per_class[present]))
    return IoUReport(per_class=per_class, present=present, miou=miou, support=support)


def _cell(v: float) -> str:
    return f"{v * 100:.2f}"


def _avg_cell(miou: float) -> str:
    # The average column truncates (the mean of already-rounded class cells
    # may round above the published average); epsilon absorbs float dust.
    return f"{math.floor(miou * 10000 + 1e-6) / 100:.2f}"


def render_table(rows: list[tuple[str, IoUReport]]) -> tuple[str, str]:
    """Render named reports as (markdown, csv), one row per report.

    Columns are the nine class names followed by "avg"; values are
    percentages with two decimals, "-" for absent classes.
    """
    header = ["method", *CLASS_NAMES, "avg"]
    body = []
    for name, rep in rows:
        cells = [
            _cell(v) if ok else "-" for v, ok in zip(rep.per_class, rep.present)
        ]
        body.append([name, *cells, _avg_cell(rep.miou)])

    md = io.StringIO()
    md.write("| " + " | ".join(header) + " |\n")
    md.write("|" + "|".join(["---"] * len(header)) + "|\n")
    for row in body:
        md.write("| " + " | ".join(row) + " |\n")

    csv_text = ",".join(header) + "\n"
    for row in body:
        csv_text += ",".join(row) + "\n"
    return md.getvalue(), csv_text
