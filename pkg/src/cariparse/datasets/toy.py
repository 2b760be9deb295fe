"""Procedural toy faces with exact labels and landmarks.

Each face is a stack of geometric primitives (skin ellipse, two eyes with
pupils, two brows, a nose wedge, a three-band mouth) rendered at any size.
Labels come straight from the primitive masks, landmarks from primitive
keypoints, so annotations are exact by construction.

The caricature domain re-renders the same base geometry after a randomized
smooth exaggeration (one of four modes on top of a shared widening) and a
texture perturbation: a palette shift drawn from three color modes plus a
dark outline along component boundaries. Photo and caricature generation
share the per-(seed, index) base-geometry stream, so the caricature's
landmark displacement against its photo twin is exactly the exaggeration.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .io import write_image_png, write_label_png, write_landmarks_txt

# class ids: 0 bg, 1 skin, 2 eye-l, 3 eye-r, 4 brow-l, 5 brow-r,
#            6 nose, 7 in-mouth, 8 upper lip, 9 lower lip

PHOTO_PALETTE = {
    "bg": (0.93, 0.94, 0.96),
    "skin": (0.87, 0.68, 0.53),
    "sclera": (0.80, 0.89, 0.99),
    "pupil": (0.13, 0.16, 0.22),
    "brow": (0.32, 0.20, 0.11),
    "nose": (0.74, 0.52, 0.38),
    "in_mouth": (0.42, 0.10, 0.12),
    "upper_lip": (0.83, 0.32, 0.34),
    "lower_lip": (0.94, 0.52, 0.54),
}

# caricature palette modes: per-channel scale and bias on the rendered image
STYLE_MODES = (
    ((0.62, 0.98, 1.08), (0.02, 0.05, 0.10)),
    ((1.08, 0.62, 0.95), (0.08, 0.02, 0.09)),
    ((0.95, 1.05, 0.55), (0.03, 0.08, 0.00)),
)

EDGE_DARKEN = 0.45


def _base_geometry(rng: np.random.Generator) -> dict:
    cx = 0.5 + rng.uniform(-0.015, 0.015)
    cy = 0.52 + rng.uniform(-0.015, 0.015)
    return {
        "cx": cx,
        "cy": cy,
        "rx": 0.26 * rng.uniform(0.93, 1.07),
        "ry": 0.33 * rng.uniform(0.93, 1.07),
        "eye_dx": 0.105 * rng.uniform(0.92, 1.08),
        "eye_y": cy - 0.095,
        "eye_rx": 0.055 * rng.uniform(0.92, 1.08),
        "eye_ry": 0.034 * rng.uniform(0.92, 1.08),
        "brow_dy": 0.075,
        "brow_hw": 0.060 * rng.uniform(0.9, 1.1),
        "brow_th": 0.028,
        "brow_tilt": rng.uniform(-0.15, 0.15),
        "nose_top_dy": 0.02,
        "nose_tip_dy": 0.085,
        "nose_hw": 0.032,
        "mouth_dy": 0.175,
        "mouth_rx": 0.095 * rng.uniform(0.92, 1.08),
        "mouth_ry": 0.052 * rng.uniform(0.92, 1.08),
    }


def _exaggerate(geom: dict, rng: np.random.Generator) -> dict:
    """Smooth geometry exaggeration: shared widening plus one of 4 modes."""
    g = dict(geom)

    def amp(factor: float, strength: float) -> float:
        return 1.0 + (factor - 1.0) * strength

    s = rng.uniform(0.8, 1.2)
    g["rx"] *= amp(1.20, s)
    g["mouth_rx"] *= amp(1.30, s)
    g["mouth_ry"] *= amp(1.30, s)

    mode = int(rng.integers(0, 4))
    if mode == 0:  # wider, squatter face
        g["rx"] *= amp(1.15, s)
        g["ry"] *= amp(0.92, s)
        g["eye_dx"] *= amp(1.15, s)
    elif mode == 1:  # elongated face
        g["ry"] *= amp(1.22, s)
        g["rx"] *= amp(0.95, s)
        g["mouth_dy"] += 0.020 * s
    elif mode == 2:  # enlarged, dropped mouth
        g["mouth_rx"] *= amp(1.25, s)
        g["mouth_ry"] *= amp(1.35, s)
        g["mouth_dy"] += 0.025 * s
        g["nose_tip_dy"] += 0.010 * s
    else:  # spread, raised eyes; longer nose
        g["eye_dx"] *= amp(1.28, s)
        g["eye_y"] -= 0.025 * s
        g["eye_rx"] *= amp(1.15, s)
        g["eye_ry"] *= amp(1.20, s)
        g["nose_tip_dy"] += 0.020 * s
    return g


def landmarks_from_geometry(geom: dict) -> np.ndarray:
    cx, cy = geom["cx"], geom["cy"]
    rx, ry = geom["rx"], geom["ry"]
    ex, ey = geom["eye_dx"], geom["eye_y"]
    brow_y = ey - geom["brow_dy"]
    hw = geom["brow_hw"]
    tilt = geom["brow_tilt"] * hw
    mouth_y = cy + geom["mouth_dy"]
    pts = np.array(
        [
            (cx - 0.766 * rx, cy + 0.643 * ry),  # 0 jaw-l
            (cx, cy + ry),  # 1 chin
            (cx + 0.766 * rx, cy + 0.643 * ry),  # 2 jaw-r
            (cx - ex - hw, brow_y + tilt),  # 3 brow-l outer
            (cx - ex + hw, brow_y - tilt),  # 4 brow-l inner
            (cx + ex - hw, brow_y - tilt),  # 5 brow-r inner
            (cx + ex + hw, brow_y + tilt),  # 6 brow-r outer
            (cx - ex - geom["eye_rx"], ey),  # 7 eye-l outer
            (cx - ex, ey - geom["eye_ry"]),  # 8 eye-l top
            (cx - ex + geom["eye_rx"], ey),  # 9 eye-l inner
            (cx + ex - geom["eye_rx"], ey),  # 10 eye-r inner
            (cx + ex, ey - geom["eye_ry"]),  # 11 eye-r top
            (cx + ex + geom["eye_rx"], ey),  # 12 eye-r outer
            (cx, cy + geom["nose_tip_dy"]),  # 13 nose tip
            (cx - geom["mouth_rx"], mouth_y),  # 14 mouth-l
            (cx + geom["mouth_rx"], mouth_y),  # 15 mouth-r
            (cx, mouth_y + geom["mouth_ry"]),  # 16 mouth bottom
        ],
        dtype=np.float64,
    )
    if pts.min() < 0.005 or pts.max() > 0.995:
        raise ValueError("toy geometry escaped the unit square")
    return np.clip(pts, 0.0, 1.0)


def _ellipse(xx, yy, cx, cy, rx, ry):
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def render_face(geom: dict, size: int) -> tuple[np.ndarray, np.ndarray, dict]:
    """Render geometry to (image, labels, per-class colors) at size x size."""
    coords = (np.arange(size) + 0.5) / size
    xx, yy = np.meshgrid(coords, coords)
    cx, cy = geom["cx"], geom["cy"]

    labels = np.zeros((size, size), dtype=np.int64)
    labels[_ellipse(xx, yy, cx, cy, geom["rx"], geom["ry"])] = 1

    nose_top = cy - geom["nose_top_dy"]
    nose_tip = cy + geom["nose_tip_dy"]
    t = (yy - nose_top) / (nose_tip - nose_top)
    nose = (t >= 0) & (t <= 1) & (np.abs(xx - cx) <= geom["nose_hw"] * t)
    labels[nose] = 6

    mouth_y = cy + geom["mouth_dy"]
    mouth = _ellipse(xx, yy, cx, mouth_y, geom["mouth_rx"], geom["mouth_ry"])
    band = (yy - mouth_y) / geom["mouth_ry"]
    labels[mouth & (band <= -0.25)] = 8
    labels[mouth & (band > -0.25) & (band <= 0.25)] = 7
    labels[mouth & (band > 0.25)] = 9

    ey = geom["eye_y"]
    pupils = []
    for side, cls in ((-1, 2), (1, 3)):
        ex = cx + side * geom["eye_dx"]
        labels[_ellipse(xx, yy, ex, ey, geom["eye_rx"], geom["eye_ry"])] = cls
        pupils.append(_ellipse(xx, yy, ex, ey, geom["eye_rx"] * 0.45, geom["eye_ry"] * 0.55))

    brow_y = ey - geom["brow_dy"]
    for side, cls in ((-1, 4), (1, 5)):
        bx = cx + side * geom["eye_dx"]
        line = brow_y + side * geom["brow_tilt"] * (xx - bx)
        brow = (np.abs(yy - line) <= geom["brow_th"] / 2) & (np.abs(xx - bx) <= geom["brow_hw"])
        labels[brow] = cls

    class_colors = {
        0: PHOTO_PALETTE["bg"],
        1: PHOTO_PALETTE["skin"],
        2: PHOTO_PALETTE["sclera"],
        3: PHOTO_PALETTE["sclera"],
        4: PHOTO_PALETTE["brow"],
        5: PHOTO_PALETTE["brow"],
        6: PHOTO_PALETTE["nose"],
        7: PHOTO_PALETTE["in_mouth"],
        8: PHOTO_PALETTE["upper_lip"],
        9: PHOTO_PALETTE["lower_lip"],
    }
    img = np.zeros((size, size, 3), dtype=np.float64)
    for cls, color in class_colors.items():
        img[labels == cls] = color
    for pupil in pupils:
        img[pupil] = PHOTO_PALETTE["pupil"]
    return img, labels, class_colors


def _boundary_mask(labels: np.ndarray) -> np.ndarray:
    edge = np.zeros_like(labels, dtype=bool)
    edge[:, 1:] |= labels[:, 1:] != labels[:, :-1]
    edge[1:, :] |= labels[1:, :] != labels[:-1, :]
    return edge


def toy_face_sample(
    seed: int, index: int, domain: str, size: int = 64
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One deterministic toy face: (image, labels, landmarks)."""
    if domain not in ("photo", "caricature"):
        raise ValueError(f"unknown domain {domain!r}")
    if size < 32:
        raise ValueError("toy faces need size >= 32")
    base_rng = np.random.default_rng([seed, index, 0])
    geom = _base_geometry(base_rng)
    jitter = base_rng.uniform(-0.03, 0.03, size=(10, 3))

    style_rng = np.random.default_rng([seed, index, 1])
    if domain == "caricature":
        geom = _exaggerate(geom, style_rng)

    img, labels, _ = render_face(geom, size)
    for cls in range(10):
        img[labels == cls] += jitter[cls]

    if domain == "caricature":
        scale, bias = STYLE_MODES[int(style_rng.integers(0, len(STYLE_MODES)))]
        scale = np.asarray(scale) * style_rng.uniform(0.96, 1.04, size=3)
        img = img * scale + np.asarray(bias)
        img[_boundary_mask(labels)] *= EDGE_DARKEN

    noise_rng = np.random.default_rng([seed, index, 2])
    shade = 1.0 - 0.06 * (np.linspace(0, 1, size) - 0.5)
    img *= shade[:, None, None]
    img += noise_rng.normal(0.0, 0.008, size=img.shape)
    img = np.clip(img, 0.0, 1.0).astype(np.float32)
    return img, labels, landmarks_from_geometry(geom)


def generate_toy_face_dataset(
    root,
    n: int,
    domain: str,
    seed: int,
    size: int = 64,
    with_labels: bool | None = None,
) -> Path:
    """Write n toy faces under root in the standard dataset layout.

    Photo roots include label maps; caricature roots ship only images and
    landmarks unless ``with_labels`` forces them (used to build annotated
    caricature evaluation sets).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if with_labels is None:
        with_labels = domain == "photo"
    root = Path(root)
    try:
        (root / "images").mkdir(parents=True, exist_ok=True)
        (root / "landmarks").mkdir(parents=True, exist_ok=True)
        if with_labels:
            (root / "labels").mkdir(parents=True, exist_ok=True)
        for i in range(n):
            img, labels, lms = toy_face_sample(seed, i, domain, size)
            name = f"face_{i:04d}"
            write_image_png(img, root / "images" / f"{name}.png")
            write_landmarks_txt(lms, root / "landmarks" / f"{name}.txt")
            if with_labels:
                write_label_png(labels, root / "labels" / f"{name}.png")
    except OSError as e:
        raise OSError(f"cannot write toy dataset under {root}: {e}") from e
    return root
