"""Texture adaptation: conditional feed-forward stylization.

An encoder-decoder maps a (deformed) photo plus a one-hot style condition
to a caricature-textured image. Training combines a content loss (mean
squared distance of content-layer activations between output and input)
with a style loss (squared Euclidean distance between channel-statistics
style features of output and the condition's reference caricature). Labels
never pass through this stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .datasets.clustering import StyleReferenceSet
from .perceptual import PerceptualExtractor, image_to_tensor, style_feature_t
from .utils import derive_seed


@dataclass
class TextureTrainConfig:
    lr: float = 1e-4
    lambda_style: float = 10.0
    iters: int = 300
    seed: int = 0
    m: int = 3
    batch_size: int = 4
    width: int = 16

    def __post_init__(self):
        for name in ("lr", "lambda_style", "m", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"config field {name} must be positive")
        if self.iters < 0:
            raise ValueError("iters must be >= 0")


def _as_batch(img, dtype=None) -> torch.Tensor:
    if isinstance(img, torch.Tensor):
        t = img
        if t.ndim == 3:
            t = t.unsqueeze(0)
        return t if dtype is None else t.to(dtype)
    return image_to_tensor(np.asarray(img), dtype or torch.float32)


def content_loss(gen, content, extractor: PerceptualExtractor) -> torch.Tensor:
    """Mean squared difference of content-layer activations."""
    a = _as_batch(gen)
    b = _as_batch(content, a.dtype)
    if a.shape != b.shape:
        raise ValueError(f"images disagree: {tuple(a.shape)} vs {tuple(b.shape)}")
    fa = extractor(a)[extractor.content_layer]
    fb = extractor(b)[extractor.content_layer]
    return ((fa - fb) ** 2).mean()


def style_loss(gen, reference, extractor: PerceptualExtractor) -> torch.Tensor:
    """Squared Euclidean distance between style-feature vectors."""
    a = _as_batch(gen)
    b = _as_batch(reference, a.dtype)
    fa = style_feature_t(a, extractor)
    fb = style_feature_t(b, extractor)
    return ((fa - fb) ** 2).sum(dim=1).mean()


class _ResBlock(nn.Module):
    def __init__(self, ch):
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv2d(ch, ch, 3, padding=1),
            nn.ReLU(),
            nn.Conv2d(ch, ch, 3, padding=1),
        )

    def forward(self, x):
        return torch.relu(x + self.body(x))


class TextureNetwork(nn.Module):
    """Encoder-decoder over image + M broadcast condition channels.

    Two stride-2 encoder stages (overall stride 4), two residual blocks and
    a mirrored decoder; a sigmoid keeps outputs in [0, 1].
    """

    stride = 4

    def __init__(self, m: int, width: int = 16):
        super().__init__()
        self.m = m
        w = width
        self.net = nn.Sequential(
            nn.Conv2d(3 + m, w, 3, padding=1),
            nn.ReLU(),
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(2 * w, 2 * w, 3, stride=2, padding=1),
            nn.ReLU(),
            _ResBlock(2 * w),
            _ResBlock(2 * w),
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(2 * w, w, 3, padding=1),
            nn.ReLU(),
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(w, w, 3, padding=1),
            nn.ReLU(),
            nn.Conv2d(w, 3, 1),
        )

    def forward(self, img: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        if cond.shape[1] != self.m:
            raise ValueError(f"condition length {cond.shape[1]} != m={self.m}")
        b, _, h, w = img.shape
        if h % self.stride or w % self.stride:
            raise ValueError(f"input size must be a multiple of {self.stride}")
        planes = cond.view(b, self.m, 1, 1).expand(b, self.m, h, w).to(img.dtype)
        return torch.sigmoid(self.net(torch.cat([img, planes], dim=1)))


def build_texture_network(cfg: TextureTrainConfig) -> TextureNetwork:
    torch.manual_seed(derive_seed(cfg.seed, "texture-net"))
    return TextureNetwork(cfg.m, cfg.width)


def train_texture_network(
    deformed: list,
    refs: StyleReferenceSet,
    extractor: PerceptualExtractor,
    cfg: TextureTrainConfig,
) -> tuple[TextureNetwork, list[dict]]:
    """Adam training against content + lambda_style * style objectives.

    Style conditions are drawn uniformly per sample; each condition's style
    target is the matching reference caricature's feature vector.
    """
    if not deformed:
        raise ValueError("need at least one training image")
    if refs.m != cfg.m:
        raise ValueError(f"reference set has {refs.m} styles but config m={cfg.m}")

    net = build_texture_network(cfg)
    opt = torch.optim.Adam(net.parameters(), lr=cfg.lr)
    rng = np.random.default_rng(derive_seed(cfg.seed, "texture-batches"))

    pool = torch.cat([image_to_tensor(img) for img in deformed])
    with torch.no_grad():
        ref_feats = torch.cat(
            [style_feature_t(image_to_tensor(r), extractor) for r in refs.references]
        )

    log = []
    for it in range(cfg.iters):
        idx = torch.from_numpy(rng.integers(0, pool.shape[0], size=cfg.batch_size))
        cond_idx = rng.integers(0, cfg.m, size=cfg.batch_size)
        cond = torch.zeros(cfg.batch_size, cfg.m)
        cond[torch.arange(cfg.batch_size), torch.from_numpy(cond_idx)] = 1.0

        batch = pool[idx]
        out = net(batch, cond)
        with torch.no_grad():
            target_content = extractor(batch)[extractor.content_layer]
        c_loss = ((extractor(out)[extractor.content_layer] - target_content) ** 2).mean()
        s_feat = style_feature_t(out, extractor)
        s_loss = ((s_feat - ref_feats[torch.from_numpy(cond_idx)]) ** 2).sum(dim=1).mean()
        loss = c_loss + cfg.lambda_style * s_loss
        opt.zero_grad()
        loss.backward()
        opt.step()
        log.append(
            {
                "iteration": it + 1,
                "content_loss": float(c_loss),
                "style_loss": float(s_loss),
                "total_loss": float(loss),
            }
        )
    return net, log


def apply_texture(net: TextureNetwork, img: np.ndarray, cond: np.ndarray) -> np.ndarray:
    """One stylization pass; output matches the input's H x W."""
    cond = np.asarray(cond, dtype=np.float32)
    if cond.shape != (net.m,):
        raise ValueError(f"condition must have length m={net.m}, got {cond.shape}")
    if cond.sum() != 1.0 or ((cond != 0) & (cond != 1)).any():
        raise ValueError("condition must be one-hot")
    with torch.no_grad():
        out = net(image_to_tensor(img), torch.from_numpy(cond).unsqueeze(0))
    return np.moveaxis(out[0].numpy(), 0, 2)
