"""Dataset root ingestion and the on-disk file formats.

A root holds ``images/<name>.png`` (RGB), ``labels/<name>.png`` (single
8-bit channel of class indices, photo-style roots only) and
``landmarks/<name>.txt`` (17 lines of "x y" floats in [0, 1]). Items are
paired by basename.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .landmarks import NUM_LANDMARKS


@dataclass
class PhotoSample:
    name: str
    image: np.ndarray  # (H, W, 3) float32 in [0, 1]
    labels: np.ndarray  # (H, W) int64 class indices
    landmarks: np.ndarray  # (17, 2) float64 in [0, 1]


@dataclass
class CariSample:
    name: str
    image: np.ndarray
    landmarks: np.ndarray


def read_image_png(path) -> np.ndarray:
    arr = np.asarray(PILImage.open(path).convert("RGB"), dtype=np.float32)
    return arr / 255.0


def write_image_png(img: np.ndarray, path) -> None:
    arr = np.clip(np.asarray(img), 0.0, 1.0)
    PILImage.fromarray((arr * 255.0).round().astype(np.uint8)).save(path)


def read_label_png(path) -> np.ndarray:
    img = PILImage.open(path)
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img, dtype=np.int64)


def write_label_png(labels: np.ndarray, path) -> None:
    arr = np.asarray(labels)
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError("label indices must fit an 8-bit channel")
    PILImage.fromarray(arr.astype(np.uint8), mode="L").save(path)


def read_landmarks_txt(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            x, y = line.split()
            rows.append((float(x), float(y)))
    return np.asarray(rows, dtype=np.float64)


def write_landmarks_txt(lms: np.ndarray, path) -> None:
    lines = [f"{x:.6f} {y:.6f}" for x, y in np.asarray(lms)]
    Path(path).write_text("\n".join(lines) + "\n")


def _basenames(d: Path, suffix: str) -> dict[str, Path]:
    if not d.is_dir():
        raise FileNotFoundError(f"missing dataset directory: {d}")
    return {p.stem: p for p in sorted(d.glob(f"*{suffix}"))}


def _check_landmarks(name: str, lms: np.ndarray, converter) -> np.ndarray:
    if converter is not None:
        lms = np.asarray(converter(lms), dtype=np.float64)
    if lms.shape != (NUM_LANDMARKS, 2):
        raise ValueError(
            f"{name}: expected {NUM_LANDMARKS} landmarks, got {lms.shape[0]}"
            + ("" if converter else " (pass a converter for other schemes)")
        )
    if lms.min() < 0 or lms.max() > 1:
        raise ValueError(f"{name}: landmark coordinates outside [0, 1]")
    return lms


def load_photo_dataset(
    root, num_classes: int = 10, landmark_converter=None
) -> list[PhotoSample]:
    """Load an annotated photo-style root as basename-aligned samples."""
    root = Path(root)
    images = _basenames(root / "images", ".png")
    labels = _basenames(root / "labels", ".png")
    lms = _basenames(root / "landmarks", ".txt")
    for name in images:
        if name not in labels:
            raise FileNotFoundError(f"{name}: image has no label file")
        if name not in lms:
            raise FileNotFoundError(f"{name}: image has no landmark file")
    for name in set(labels) | set(lms):
        if name not in images:
            raise FileNotFoundError(f"{name}: annotation without an image")
    samples = []
    for name in sorted(images):
        img = read_image_png(images[name])
        lbl = read_label_png(labels[name])
        if lbl.shape != img.shape[:2]:
            raise ValueError(f"{name}: label size {lbl.shape} != image size {img.shape[:2]}")
        if lbl.max() >= num_classes:
            raise ValueError(f"{name}: label value {lbl.max()} >= {num_classes} classes")
        pts = _check_landmarks(name, read_landmarks_txt(lms[name]), landmark_converter)
        samples.append(PhotoSample(name, img, lbl, pts))
    return samples


def load_caricature_dataset(root, landmark_converter=None) -> list[CariSample]:
    """Load a caricature root (images + landmarks, labels not required)."""
    root = Path(root)
    images = _basenames(root / "images", ".png")
    lms = _basenames(root / "landmarks", ".txt")
    for name in images:
        if name not in lms:
            raise FileNotFoundError(f"{name}: image has no landmark file")
    for name in lms:
        if name not in images:
            raise FileNotFoundError(f"{name}: landmark file without an image")
    samples = []
    for name in sorted(images):
        img = read_image_png(images[name])
        pts = _check_landmarks(name, read_landmarks_txt(lms[name]), landmark_converter)
        samples.append(CariSample(name, img, pts))
    return samples
