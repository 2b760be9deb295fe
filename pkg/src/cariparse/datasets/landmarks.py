"""Landmark groupings and their rasterization into multi-channel maps.

The 17 face landmarks are connected into named polylines and closed regions
by a ``LandmarkGrouping``. Each group rasterizes to one binary channel:
polylines draw Bresenham segments between consecutive points, closed regions
additionally close the polygon and fill its interior. The grouping lives in
a small text config so the connectivity stays auditable and swappable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NUM_LANDMARKS = 17
KIND_POLYLINE = "polyline"
KIND_REGION = "region"


@dataclass(frozen=True)
class LandmarkGroup:
    name: str
    kind: str
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in (KIND_POLYLINE, KIND_REGION):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if not self.indices:
            raise ValueError(f"group {self.name!r} has no landmark indices")
        for i in self.indices:
            if not 0 <= i < NUM_LANDMARKS:
                raise ValueError(f"group {self.name!r}: index {i} outside [0, {NUM_LANDMARKS})")


@dataclass(frozen=True)
class LandmarkGrouping:
    groups: tuple[LandmarkGroup, ...]

    def __post_init__(self):
        if not self.groups:
            raise ValueError("grouping needs at least one group")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names):
            raise ValueError("group names must be unique")

    @property
    def channels(self) -> int:
        return len(self.groups)

    @property
    def channel_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.groups)


def default_grouping() -> LandmarkGrouping:
    """Shipped connectivity for the 17-point scheme.

    Indices: 0-2 jaw contour, 3-4 left brow, 5-6 right brow, 7-9 left eye,
    10-12 right eye, 13 nose tip, 14-16 mouth outline.
    """
    return LandmarkGrouping(
        groups=(
            LandmarkGroup("face_contour", KIND_POLYLINE, (0, 1, 2)),
            LandmarkGroup("brow_l", KIND_POLYLINE, (3, 4)),
            LandmarkGroup("brow_r", KIND_POLYLINE, (5, 6)),
            LandmarkGroup("eye_l", KIND_REGION, (7, 8, 9)),
            LandmarkGroup("eye_r", KIND_REGION, (10, 11, 12)),
            LandmarkGroup("nose", KIND_POLYLINE, (13,)),
            LandmarkGroup("mouth", KIND_REGION, (14, 15, 16)),
        )
    )


def format_grouping(grouping: LandmarkGrouping) -> str:
    lines = ["# name kind landmark-indices"]
    for g in grouping.groups:
        lines.append(f"{g.name} {g.kind} " + " ".join(str(i) for i in g.indices))
    return "\n".join(lines) + "\n"


def parse_grouping(text: str) -> LandmarkGrouping:
    groups = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ValueError(f"grouping line {lineno}: expected 'name kind idx...', got {raw!r}")
        name, kind, *idx = parts
        groups.append(LandmarkGroup(name, kind, tuple(int(i) for i in idx)))
    return LandmarkGrouping(groups=tuple(groups))


def load_grouping(path) -> LandmarkGrouping:
    return parse_grouping(Path(path).read_text())


def save_grouping(grouping: LandmarkGrouping, path) -> None:
    Path(path).write_text(format_grouping(grouping))


def grouping_sha256(grouping: LandmarkGrouping) -> str:
    return hashlib.sha256(format_grouping(grouping).encode()).hexdigest()


def _to_pixel(pt, h: int, w: int) -> tuple[int, int]:
    # pixel-center convention: x in [i/W, (i+1)/W) lands on column i
    x, y = pt
    col = min(int(x * w), w - 1)
    row = min(int(y * h), h - 1)
    return col, row


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Classic integer line rasterization, both endpoints included."""
    points = []
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        points.append((x, y))
        if x == x1 and y == y1:
            return points
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def _fill_polygon(channel: np.ndarray, pts: list[tuple[int, int]]) -> None:
    """Even-odd interior fill of a polygon with integer-pixel vertices."""
    h, w = channel.shape
    xs = np.array([p[0] for p in pts], dtype=np.float64)
    ys = np.array([p[1] for p in pts], dtype=np.float64)
    n = len(pts)
    if n < 3:
        return
    cols = np.arange(w, dtype=np.float64)
    for row in range(int(ys.min()), int(ys.max()) + 1):
        inside = np.zeros(w, dtype=bool)
        y = float(row)
        for i in range(n):
            x0, y0 = xs[i], ys[i]
            x1, y1 = xs[(i + 1) % n], ys[(i + 1) % n]
            if (y0 <= y) != (y1 <= y):
                x_cross = x0 + (y - y0) / (y1 - y0) * (x1 - x0)
                inside ^= cols < x_cross
        channel[row, inside] = 1


def rasterize_landmark_map(
    lms: np.ndarray, grouping: LandmarkGrouping, size: tuple[int, int]
) -> np.ndarray:
    """Rasterize 17 normalized landmarks into a (G, H, W) binary map."""
    lms = np.asarray(lms, dtype=np.float64)
    if lms.shape != (NUM_LANDMARKS, 2):
        raise ValueError(f"expected ({NUM_LANDMARKS}, 2) landmarks, got {lms.shape}")
    if lms.min() < 0 or lms.max() > 1:
        raise ValueError("landmark coordinates must lie in [0, 1]")
    h, w = size
    if h < 2 or w < 2:
        raise ValueError("raster size must be at least 2x2")
    out = np.zeros((grouping.channels, h, w), dtype=np.uint8)
    for gi, group in enumerate(grouping.groups):
        pts = [_to_pixel(lms[i], h, w) for i in group.indices]
        if len(pts) == 1:
            out[gi, pts[0][1], pts[0][0]] = 1
            continue
        segments = list(zip(pts[:-1], pts[1:]))
        if group.kind == KIND_REGION:
            segments.append((pts[-1], pts[0]))
            _fill_polygon(out[gi], pts)
        for (x0, y0), (x1, y1) in segments:
            for x, y in bresenham(x0, y0, x1, y1):
                out[gi, y, x] = 1
    return out
