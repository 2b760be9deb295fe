"""Differentiable backward warping driven by a coarse control grid.

A warp is parameterized as a small lattice of 2-D offsets (``ControlGrid``)
that is bilinearly upsampled to a dense per-pixel backward flow. Sampling
reads ``output(p) = input(p + flow(p))`` with clamp-to-edge borders, so a
zero grid is the exact identity. Everything is linear in the offsets and
differentiable through torch autograd.

Coordinates: pixel ``(row, col)`` maps to normalized ``(x, y) = (col/(W-1),
row/(H-1))``; flow components are ``(dx, dy)`` in the same normalized units,
so ``dx = 1/(W-1)`` is a one-pixel horizontal displacement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

DEFAULT_BOUND = 0.15


@dataclass
class ControlGrid:
    """Gh x Gw x 2 normalized offsets, each component within +-bound."""

    offsets: np.ndarray
    bound: float = DEFAULT_BOUND

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=np.float64)
        if self.offsets.ndim != 3 or self.offsets.shape[2] != 2:
            raise ValueError(f"control grid must be (Gh, Gw, 2), got {self.offsets.shape}")
        if self.offsets.shape[0] < 2 or self.offsets.shape[1] < 2:
            raise ValueError("control grid needs at least 2x2 nodes")
        if self.bound <= 0:
            raise ValueError("bound must be positive")
        if np.abs(self.offsets).max() > self.bound + 1e-12:
            raise ValueError("control grid offsets exceed bound")


def dense_flow_t(offsets: torch.Tensor, size: tuple[int, int]) -> torch.Tensor:
    """Upsample (B, Gh, Gw, 2) offsets to a (B, H, W, 2) flow.

    Corner-anchored bilinear interpolation: grid node (0,0) sits on image
    pixel (0,0) and node (Gh-1, Gw-1) on (H-1, W-1).
    """
    h, w = size
    if h < 2 or w < 2:
        raise ValueError("flow size must be at least 2x2")
    lattice = offsets.permute(0, 3, 1, 2)
    dense = F.interpolate(lattice, size=(h, w), mode="bilinear", align_corners=True)
    return dense.permute(0, 2, 3, 1)


def _sample_positions(flow: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    b, h, w, _ = flow.shape
    cols = torch.arange(w, dtype=flow.dtype, device=flow.device).view(1, 1, w)
    rows = torch.arange(h, dtype=flow.dtype, device=flow.device).view(1, h, 1)
    px = cols + flow[..., 0] * (w - 1)
    py = rows + flow[..., 1] * (h - 1)
    px = px.clamp(0, w - 1)
    py = py.clamp(0, h - 1)
    return px, py


def _gather_pixels(img: torch.Tensor, ix: torch.Tensor, iy: torch.Tensor) -> torch.Tensor:
    b, c, h, w = img.shape
    flat = (iy * w + ix).view(b, 1, h * w).expand(b, c, h * w)
    return img.view(b, c, h * w).gather(2, flat).view(b, c, h, w)


def warp_bilinear_t(img: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
    """Backward-warp (B, C, H, W) by (B, H, W, 2); bilinear, clamp borders."""
    if img.shape[0] != flow.shape[0] or img.shape[2:] != flow.shape[1:3]:
        raise ValueError(f"image {tuple(img.shape)} and flow {tuple(flow.shape)} disagree")
    b, c, h, w = img.shape
    px, py = _sample_positions(flow.to(img.dtype))
    x0 = px.floor()
    y0 = py.floor()
    wx = px - x0
    wy = py - y0
    ix0 = x0.long().clamp(0, w - 1)
    iy0 = y0.long().clamp(0, h - 1)
    ix1 = (ix0 + 1).clamp(max=w - 1)
    iy1 = (iy0 + 1).clamp(max=h - 1)
    v00 = _gather_pixels(img, ix0, iy0)
    v01 = _gather_pixels(img, ix1, iy0)
    v10 = _gather_pixels(img, ix0, iy1)
    v11 = _gather_pixels(img, ix1, iy1)
    wx = wx.unsqueeze(1)
    wy = wy.unsqueeze(1)
    return (
        v00 * (1 - wy) * (1 - wx)
        + v01 * (1 - wy) * wx
        + v10 * wy * (1 - wx)
        + v11 * wy * wx
    )


def warp_nearest_t(lbl: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
    """Backward-warp integer maps (B, H, W) by nearest-pixel reads."""
    if lbl.shape[0] != flow.shape[0] or lbl.shape[1:] != flow.shape[1:3]:
        raise ValueError(f"labels {tuple(lbl.shape)} and flow {tuple(flow.shape)} disagree")
    b, h, w = lbl.shape
    px, py = _sample_positions(flow)
    ix = px.round().long().clamp(0, w - 1)
    iy = py.round().long().clamp(0, h - 1)
    flat = (iy * w + ix).view(b, h * w)
    return lbl.view(b, h * w).gather(1, flat).view(b, h, w)


# numpy single-instance wrappers


def dense_flow_from_control(cg: ControlGrid, size: tuple[int, int]) -> np.ndarray:
    off = torch.from_numpy(np.ascontiguousarray(cg.offsets)).unsqueeze(0)
    return dense_flow_t(off, size)[0].numpy()


def sample_bilinear(img: np.ndarray, flow: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    flow = np.asarray(flow)
    if img.shape[:2] != flow.shape[:2]:
        raise ValueError(f"image {img.shape} and flow {flow.shape} disagree on H x W")
    squeeze = img.ndim == 2
    chw = img[None] if squeeze else np.moveaxis(img, 2, 0)
    t = torch.from_numpy(np.ascontiguousarray(chw)).unsqueeze(0)
    ft = torch.from_numpy(np.ascontiguousarray(flow)).unsqueeze(0)
    out = warp_bilinear_t(t, ft)[0].numpy()
    return out[0] if squeeze else np.moveaxis(out, 0, 2)


def sample_nearest(lbl: np.ndarray, flow: np.ndarray) -> np.ndarray:
    lbl = np.asarray(lbl)
    flow = np.asarray(flow)
    if lbl.shape != flow.shape[:2]:
        raise ValueError(f"labels {lbl.shape} and flow {flow.shape} disagree on H x W")
    t = torch.from_numpy(np.ascontiguousarray(lbl.astype(np.int64))).unsqueeze(0)
    ft = torch.from_numpy(np.ascontiguousarray(flow)).unsqueeze(0)
    return warp_nearest_t(t, ft)[0].numpy().astype(lbl.dtype)


def flow_gradients(
    img: np.ndarray, flow: np.ndarray, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of sum(upstream * sample_bilinear(img, flow)).

    Returns (d/d img, d/d flow). Exposed so the sampler's autograd path can
    be checked against finite differences; flow gradients are undefined on
    the exact pixel lattice.
    """
    img = np.asarray(img, dtype=np.float64)
    flow = np.asarray(flow, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    squeeze = img.ndim == 2
    chw = img[None] if squeeze else np.moveaxis(img, 2, 0)
    up = upstream[None] if squeeze else np.moveaxis(upstream, 2, 0)
    t = torch.from_numpy(np.ascontiguousarray(chw)).unsqueeze(0).requires_grad_(True)
    ft = torch.from_numpy(np.ascontiguousarray(flow)).unsqueeze(0).requires_grad_(True)
    out = warp_bilinear_t(t, ft)
    loss = (out * torch.from_numpy(np.ascontiguousarray(up)).unsqueeze(0)).sum()
    g_img, g_flow = torch.autograd.grad(loss, (t, ft))
    g_img = g_img[0].numpy()
    g_img = g_img[0] if squeeze else np.moveaxis(g_img, 0, 2)
    return g_img, g_flow[0].numpy()
