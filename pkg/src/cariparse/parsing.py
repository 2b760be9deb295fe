"""Face parsing network and trainer.

Residual backbone at output stride 8 (the last two stages trade stride for
dilations 2 and 4), a pyramid pooling head over bins {1, 2, 3, 6}, and a
classifier whose logits are bilinearly upsampled back to input size.
Training is per-pixel cross entropy under the poly learning-rate policy.
The width multiplier scales every stage so a narrow profile can train on a
CPU in minutes while keeping the full-profile topology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .metrics import LEFT_RIGHT_SWAPS
from .utils import derive_seed


@dataclass
class ParseTrainConfig:
    base_lr: float = 1e-3
    power: float = 0.9
    max_iter: int = 500
    batch_size: int = 8
    crop: int = 64
    num_classes: int = 10
    seed: int = 0
    flip_aug: bool = True
    scale_aug: bool = False
    scale_range: tuple[float, float] = (0.75, 1.25)
    width: int = 8
    momentum: float = 0.9
    weight_decay: float = 0.0

    def __post_init__(self):
        if min(self.base_lr, self.power, self.max_iter, self.batch_size, self.crop) <= 0:
            raise ValueError("base_lr, power, max_iter, batch_size, crop must be positive")
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")


def poly_lr(iteration: int, cfg: ParseTrainConfig) -> float:
    """base_lr * (1 - iteration / max_iter) ** power."""
    if iteration < 0 or iteration > cfg.max_iter:
        raise ValueError(f"iteration {iteration} outside [0, {cfg.max_iter}]")
    return cfg.base_lr * (1.0 - iteration / cfg.max_iter) ** cfg.power


class _BasicBlock(nn.Module):
    def __init__(self, in_ch, out_ch, stride=1, dilation=1):
        super().__init__()
        self.conv1 = nn.Conv2d(
            in_ch, out_ch, 3, stride=stride, padding=dilation, dilation=dilation, bias=False
        )
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(
            out_ch, out_ch, 3, padding=dilation, dilation=dilation, bias=False
        )
        self.bn2 = nn.BatchNorm2d(out_ch)
        if stride != 1 or in_ch != out_ch:
            self.skip = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False), nn.BatchNorm2d(out_ch)
            )
        else:
            self.skip = nn.Identity()

    def forward(self, x):
        y = torch.relu(self.bn1(self.conv1(x)))
        y = self.bn2(self.conv2(y))
        return torch.relu(y + self.skip(x))


class ParsingNetwork(nn.Module):
    out_stride = 8
    ppm_bins = (1, 2, 3, 6)

    def __init__(self, num_classes: int, width: int = 8):
        super().__init__()
        self.num_classes = num_classes
        self.width = width
        w = width
        self.stem = nn.Sequential(
            nn.Conv2d(3, w, 3, stride=2, padding=1, bias=False),
            nn.BatchNorm2d(w),
            nn.ReLU(),
        )
        self.stage1 = _BasicBlock(w, 2 * w, stride=2)
        self.stage2 = _BasicBlock(2 * w, 4 * w, stride=2)
        self.stage3 = _BasicBlock(4 * w, 4 * w, dilation=2)
        self.stage4 = _BasicBlock(4 * w, 8 * w, dilation=4)
        feat_ch = 8 * w
        red = 2 * w
        self.ppm = nn.ModuleList(
            nn.Sequential(
                nn.Conv2d(feat_ch, red, 1, bias=False), nn.BatchNorm2d(red), nn.ReLU()
            )
            for _ in self.ppm_bins
        )
        self.fuse = nn.Sequential(
            nn.Conv2d(feat_ch + red * len(self.ppm_bins), 4 * w, 3, padding=1, bias=False),
            nn.BatchNorm2d(4 * w),
            nn.ReLU(),
        )
        self.classifier = nn.Conv2d(4 * w, num_classes, 1)

    def backbone(self, x: torch.Tensor) -> torch.Tensor:
        return self.stage4(self.stage3(self.stage2(self.stage1(self.stem(x)))))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h, w = x.shape[2:]
        feat = self.backbone(x)
        fh, fw = feat.shape[2:]
        pooled = [feat]
        for bins, proj in zip(self.ppm_bins, self.ppm):
            p = proj(F.adaptive_avg_pool2d(feat, bins))
            pooled.append(F.interpolate(p, size=(fh, fw), mode="bilinear", align_corners=False))
        logits = self.classifier(self.fuse(torch.cat(pooled, dim=1)))
        return F.interpolate(logits, size=(h, w), mode="bilinear", align_corners=False)


def build_parsing_network(num_classes: int, width: int = 8, seed: int = 0) -> ParsingNetwork:
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    torch.manual_seed(derive_seed(seed, "parser"))
    return ParsingNetwork(num_classes, width)


def hflip_sample(img: np.ndarray, lbl: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mirror a pair horizontally, exchanging the left/right class ids."""
    img = img[:, ::-1].copy()
    flipped = lbl[:, ::-1].copy()
    out = flipped.copy()
    for a, b in LEFT_RIGHT_SWAPS:
        out[flipped == a] = b
        out[flipped == b] = a
    return img, out


def _rescale(img: np.ndarray, lbl: np.ndarray, factor: float) -> tuple[np.ndarray, np.ndarray]:
    t = torch.from_numpy(np.moveaxis(img, 2, 0)).unsqueeze(0)
    h, w = img.shape[:2]
    nh, nw = max(8, int(round(h * factor))), max(8, int(round(w * factor)))
    img2 = F.interpolate(t, size=(nh, nw), mode="bilinear", align_corners=False)[0]
    lt = torch.from_numpy(lbl.astype(np.float32)).unsqueeze(0).unsqueeze(0)
    lbl2 = F.interpolate(lt, size=(nh, nw), mode="nearest")[0, 0]
    return np.moveaxis(img2.numpy(), 0, 2), lbl2.numpy().astype(np.int64)


def _fit_crop(
    img: np.ndarray, lbl: np.ndarray, crop: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    h, w = lbl.shape
    if h < crop or w < crop:
        ph, pw = max(0, crop - h), max(0, crop - w)
        img = np.pad(img, ((0, ph), (0, pw), (0, 0)), mode="edge")
        lbl = np.pad(lbl, ((0, ph), (0, pw)), mode="edge")
        h, w = lbl.shape
    y = int(rng.integers(0, h - crop + 1))
    x = int(rng.integers(0, w - crop + 1))
    return img[y : y + crop, x : x + crop], lbl[y : y + crop, x : x + crop]


def train_parser(
    pairs: list, cfg: ParseTrainConfig, names: list | None = None
) -> tuple[ParsingNetwork, list[dict]]:
    """Cross-entropy training under the poly schedule.

    The optimizer learning rate at iteration i is poly_lr(i, cfg) exactly,
    and is logged together with the batch loss.
    """
    if not pairs:
        raise ValueError("need at least one training pair")
    for i, (img, lbl) in enumerate(pairs):
        if np.asarray(lbl).max() >= cfg.num_classes:
            tag = names[i] if names else f"sample {i}"
            raise ValueError(f"{tag}: label value >= {cfg.num_classes} classes")

    net = build_parsing_network(cfg.num_classes, cfg.width, cfg.seed)
    opt = torch.optim.SGD(
        net.parameters(), lr=cfg.base_lr, momentum=cfg.momentum, weight_decay=cfg.weight_decay
    )
    rng = np.random.default_rng(derive_seed(cfg.seed, "parser-batches"))

    log = []
    net.train()
    for it in range(cfg.max_iter):
        lr = poly_lr(it, cfg)
        for group in opt.param_groups:
            group["lr"] = lr

        idx = rng.integers(0, len(pairs), size=cfg.batch_size)
        imgs, lbls = [], []
        for j in idx:
            img, lbl = pairs[j]
            img = np.asarray(img, dtype=np.float32)
            lbl = np.asarray(lbl, dtype=np.int64)
            if cfg.scale_aug:
                img, lbl = _rescale(img, lbl, rng.uniform(*cfg.scale_range))
            if cfg.flip_aug and rng.random() < 0.5:
                img, lbl = hflip_sample(img, lbl)
            if lbl.shape != (cfg.crop, cfg.crop):
                img, lbl = _fit_crop(img, lbl, cfg.crop, rng)
            imgs.append(np.moveaxis(img, 2, 0))
            lbls.append(lbl)
        x = torch.from_numpy(np.stack(imgs))
        y = torch.from_numpy(np.stack(lbls))

        logits = net(x)
        loss = F.cross_entropy(logits, y)
        opt.zero_grad()
        loss.backward()
        opt.step()
        log.append({"iteration": it, "lr": lr, "loss": float(loss)})
    net.eval()
    return net, log


def predict(net: ParsingNetwork, img: np.ndarray) -> np.ndarray:
    """Argmax labels for one image; H and W must be divisible by 8."""
    h, w = img.shape[:2]
    if h % net.out_stride or w % net.out_stride:
        raise ValueError(f"input size {h}x{w} not divisible by {net.out_stride}")
    net.eval()
    with torch.no_grad():
        x = torch.from_numpy(np.moveaxis(np.asarray(img, dtype=np.float32), 2, 0)).unsqueeze(0)
        logits = net(x)
    return logits.argmax(dim=1)[0].numpy().astype(np.int64)
