"""Fixed perceptual feature stacks and channel-statistics style features.

The extractor is pluggable: any stack of named stages works, from the
trivial identity (the raw image as one layer) to an externally supplied
pretrained stack. Tests and the toy pipeline use small frozen random-weight
stacks, so nothing here depends on downloadable weights.

A style feature is, per designated layer, the per-channel activation means
followed by the per-channel population standard deviations, concatenated in
layer order. This replaces Gram matrices as the style statistic.
"""

from __future__ import annotations

import hashlib

import numpy as np
import torch
from torch import nn

from .utils import param_fingerprint


class PerceptualExtractor(nn.Module):
    """Sequential named stages; activations are read per stage.

    ``content_layer`` names the deep stage used for content distances,
    ``style_layers`` the stages whose channel statistics form style
    features. All parameters are frozen.
    """

    def __init__(self, stages, content_layer: str, style_layers, channels: dict):
        super().__init__()
        self.stage_names = tuple(name for name, _ in stages)
        self.stages = nn.ModuleList(module for _, module in stages)
        if content_layer not in self.stage_names:
            raise ValueError(f"content layer {content_layer!r} is not a stage")
        for name in style_layers:
            if name not in self.stage_names:
                raise ValueError(f"style layer {name!r} is not a stage")
        if not style_layers:
            raise ValueError("need at least one style layer")
        self.content_layer = content_layer
        self.style_layers = tuple(style_layers)
        self.channels = dict(channels)
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def forward(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        feats = {}
        for name, module in zip(self.stage_names, self.stages):
            x = module(x)
            feats[name] = x
        return feats

    @property
    def style_dim(self) -> int:
        return 2 * sum(self.channels[n] for n in self.style_layers)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.stage_names, self.content_layer, self.style_layers)).encode())
        h.update(param_fingerprint(self.state_dict()).encode())
        return h.hexdigest()


def identity_extractor(channels: int = 3) -> PerceptualExtractor:
    """The raw image as a single 'input' layer; content and style alike."""
    return PerceptualExtractor(
        stages=[("input", nn.Identity())],
        content_layer="input",
        style_layers=("input",),
        channels={"input": channels},
    )


def random_extractor(seed: int = 0, widths=(8, 16, 24, 32)) -> PerceptualExtractor:
    """Small frozen conv stack with four stages of increasing depth.

    Stage strides follow the usual perceptual-layer depths: full, 1/2, 1/4
    and 1/8 resolution. All four stages serve as style layers; the deepest
    is the content layer.
    """
    torch.manual_seed(seed)
    stages = []
    channels = {}
    in_ch = 3
    for i, w in enumerate(widths):
        name = f"f{i + 1}"
        stride = 1 if i == 0 else 2
        stages.append(
            (name, nn.Sequential(nn.Conv2d(in_ch, w, 3, stride=stride, padding=1), nn.ReLU()))
        )
        channels[name] = w
        in_ch = w
    return PerceptualExtractor(
        stages=stages,
        content_layer=stages[-1][0],
        style_layers=tuple(channels),
        channels=channels,
    )


def channel_stats_t(act: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-channel mean and population std of a (B, C, H, W) activation.

    The variance is clamped at 1e-12 before the square root so dead
    channels cannot produce infinite gradients during training.
    """
    mean = act.mean(dim=(2, 3))
    var = act.var(dim=(2, 3), unbiased=False)
    return mean, var.clamp_min(1e-12).sqrt()


def style_feature_t(x: torch.Tensor, extractor: PerceptualExtractor) -> torch.Tensor:
    """Differentiable (B, D) style features of a (B, C, H, W) batch."""
    feats = extractor(x)
    parts = []
    for name in extractor.style_layers:
        mean, std = channel_stats_t(feats[name])
        parts.append(torch.cat([mean, std], dim=1))
    return torch.cat(parts, dim=1)


def image_to_tensor(img: np.ndarray, dtype=torch.float32) -> torch.Tensor:
    """(H, W, C) or (H, W) numpy image to a (1, C, H, W) tensor."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    chw = np.ascontiguousarray(np.moveaxis(arr, 2, 0))
    return torch.from_numpy(chw).to(dtype).unsqueeze(0)
