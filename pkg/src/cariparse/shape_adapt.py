"""Shape adaptation: conditional control-grid generators trained cycle-wise.

Two generators (photo->caricature and back) each read a multi-channel
landmark map plus a one-hot shape condition broadcast as constant channels,
and predict a bounded control grid. Training is adversarial in Wasserstein
form with weight-clipped critics scoring landmark maps, plus an L1 cycle
term between a map and its doubly-warped self. Warping a photo and its
label map at apply time uses one shared dense flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .datasets.clustering import ShapeSet
from .datasets.landmarks import LandmarkGrouping, grouping_sha256, rasterize_landmark_map
from .utils import derive_seed
from .warpcore import (
    DEFAULT_BOUND,
    dense_flow_t,
    sample_bilinear,
    sample_nearest,
    warp_bilinear_t,
)


@dataclass
class ShapeTrainConfig:
    lr: float = 1e-4
    k: int = 8
    lambda_cyc: float = 10.0
    clip: float = 0.01
    critic_steps: int = 5
    iters: int = 200
    seed: int = 0
    batch_size: int = 8
    map_channels: int = 7
    grid: tuple[int, int] = (8, 8)
    bound: float = DEFAULT_BOUND
    head_gain: float = 30.0
    map_blur: int = 1
    width: int = 16

    def __post_init__(self):
        for name in ("lr", "k", "lambda_cyc", "clip", "critic_steps", "iters", "batch_size"):
            if getattr(self, name) < 0 or (name not in ("iters",) and getattr(self, name) == 0):
                raise ValueError(f"config field {name} must be positive")


class ShapeGenerator(nn.Module):
    """Landmark map + one-hot condition -> bounded control-grid offsets."""

    def __init__(self, cfg: ShapeTrainConfig):
        super().__init__()
        self.k = cfg.k
        self.map_channels = cfg.map_channels
        self.in_channels = cfg.map_channels + cfg.k
        self.grid = tuple(cfg.grid)
        self.bound = cfg.bound
        self.head_gain = cfg.head_gain
        self.map_blur = cfg.map_blur
        self.grouping_sha = None  # set when trained against a grouping
        w = cfg.width
        self.encoder = nn.Sequential(
            nn.Conv2d(self.in_channels, w, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(2 * w, 2 * w, 3, stride=2, padding=1),
            nn.ReLU(),
        )
        # zero head: a fresh generator is the identity warp
        self.head = nn.Conv2d(2 * w, 2, 1)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, maps: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        """(B, G, H, W) maps + (B, K) condition -> (B, Gh, Gw, 2) offsets."""
        if cond.shape[1] != self.k:
            raise ValueError(f"condition length {cond.shape[1]} != k={self.k}")
        b, _, h, w = maps.shape
        cond_planes = cond.view(b, self.k, 1, 1).expand(b, self.k, h, w)
        z = self.encoder(torch.cat([maps, cond_planes.to(maps.dtype)], dim=1))
        z = F.adaptive_avg_pool2d(z, self.grid)
        raw = self.head(z)
        offsets = self.bound * torch.tanh(self.head_gain * raw)
        return offsets.permute(0, 2, 3, 1)


class ShapeCritic(nn.Module):
    """Scores landmark maps with a single real value (higher = more real)."""

    def __init__(self, cfg: ShapeTrainConfig):
        super().__init__()
        w = cfg.width
        self.features = nn.Sequential(
            nn.Conv2d(cfg.map_channels, w, 3, stride=2, padding=1),
            nn.LeakyReLU(0.2),
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1),
            nn.InstanceNorm2d(2 * w),
            nn.LeakyReLU(0.2),
            nn.Conv2d(2 * w, 2 * w, 3, stride=2, padding=1),
            nn.InstanceNorm2d(2 * w),
            nn.LeakyReLU(0.2),
        )
        self.score = nn.Linear(2 * w, 1)

    def forward(self, maps: torch.Tensor) -> torch.Tensor:
        z = self.features(maps).mean(dim=(2, 3))
        return self.score(z).squeeze(1)


def build_shape_generator(cfg: ShapeTrainConfig, role: str = "generator") -> ShapeGenerator:
    torch.manual_seed(derive_seed(cfg.seed, f"shape-{role}"))
    return ShapeGenerator(cfg)


def build_shape_critic(cfg: ShapeTrainConfig, role: str = "critic") -> ShapeCritic:
    torch.manual_seed(derive_seed(cfg.seed, f"shape-{role}"))
    return ShapeCritic(cfg)


def clip_critic_(critic: ShapeCritic, c: float) -> None:
    with torch.no_grad():
        for p in critic.parameters():
            p.clamp_(-c, c)


def smooth_maps_t(maps: torch.Tensor, passes: int) -> torch.Tensor:
    """Binomial 3x3 blur; softens hard raster edges for critic inputs."""
    if passes <= 0:
        return maps
    g = maps.shape[1]
    k1 = torch.tensor([1.0, 2.0, 1.0], dtype=maps.dtype) / 4.0
    kernel = (k1[:, None] * k1[None, :]).expand(g, 1, 3, 3)
    for _ in range(passes):
        maps = F.conv2d(F.pad(maps, (1, 1, 1, 1), mode="replicate"), kernel, groups=g)
    return maps


def maps_to_tensor(maps: list) -> torch.Tensor:
    return torch.from_numpy(np.stack([np.asarray(m, dtype=np.float32) for m in maps]))


def predict_flow(
    gen: ShapeGenerator, maps: np.ndarray, cond: np.ndarray, size: tuple[int, int]
) -> np.ndarray:
    """Dense (H, W, 2) flow for one landmark map under one condition."""
    t = torch.from_numpy(np.asarray(maps, dtype=np.float32)).unsqueeze(0)
    t = smooth_maps_t(t, gen.map_blur)
    c = torch.from_numpy(np.asarray(cond, dtype=np.float32)).unsqueeze(0)
    with torch.no_grad():
        offsets = gen(t, c)
        flow = dense_flow_t(offsets, size)
    return flow[0].numpy()


def _onehot(indices: np.ndarray, k: int) -> torch.Tensor:
    out = torch.zeros(len(indices), k)
    out[torch.arange(len(indices)), torch.as_tensor(indices, dtype=torch.long)] = 1.0
    return out


@dataclass
class _Batcher:
    data: torch.Tensor
    rng: np.random.Generator
    batch_size: int

    def draw(self) -> torch.Tensor:
        n = self.data.shape[0]
        idx = self.rng.integers(0, n, size=min(self.batch_size, n))
        return self.data[torch.from_numpy(idx)]


def train_shape_adaptation(
    photo_maps: list,
    cari_maps: list,
    shapes: ShapeSet,
    cfg: ShapeTrainConfig,
    on_critic_step=None,
) -> tuple[ShapeGenerator, ShapeGenerator, list[dict]]:
    """Cycle-consistent Wasserstein training of both warp generators.

    Per iteration the two critics take ``cfg.critic_steps`` clipped updates
    on fresh batches, then both generators take one step minimizing
    ``-score(warped) + lambda_cyc * L1(map, warp_back(warp_forward(map)))``
    summed over the two directions. Photo-side conditions are uniform draws
    over the shape set. Returns (photo->cari generator, cari->photo
    generator, per-iteration log).
    """
    if not photo_maps or not cari_maps:
        raise ValueError("both landmark-map datasets must be nonempty")
    if shapes.k != cfg.k:
        raise ValueError(f"shape set has {shapes.k} entries but config k={cfg.k}")

    photos = smooth_maps_t(maps_to_tensor(photo_maps), cfg.map_blur)
    caris = smooth_maps_t(maps_to_tensor(cari_maps), cfg.map_blur)
    if photos.shape[1] != cfg.map_channels or caris.shape[1] != cfg.map_channels:
        raise ValueError("landmark maps do not match config map_channels")
    size = photos.shape[2:]

    g_pc = build_shape_generator(cfg, "gpc")
    g_cp = build_shape_generator(cfg, "gcp")
    d_c = build_shape_critic(cfg, "dc")
    d_p = build_shape_critic(cfg, "dp")

    opt_g = torch.optim.Adam(list(g_pc.parameters()) + list(g_cp.parameters()), lr=cfg.lr)
    opt_d = torch.optim.Adam(list(d_c.parameters()) + list(d_p.parameters()), lr=cfg.lr)

    rng = np.random.default_rng(derive_seed(cfg.seed, "shape-batches"))

    def warp_with(gen, maps, cond):
        offsets = gen(maps, cond)
        flow = dense_flow_t(offsets, size)
        return warp_bilinear_t(maps, flow)

    def draw_conds(n):
        return _onehot(rng.integers(0, cfg.k, size=n), cfg.k)

    photo_batch = _Batcher(photos, rng, cfg.batch_size)
    cari_batch = _Batcher(caris, rng, cfg.batch_size)

    log = []
    for it in range(cfg.iters):
        critic_loss = 0.0
        for step in range(cfg.critic_steps):
            p = photo_batch.draw()
            c = cari_batch.draw()
            with torch.no_grad():
                fake_c = warp_with(g_pc, p, draw_conds(len(p)))
                fake_p = warp_with(g_cp, c, draw_conds(len(c)))
            loss_d = -(d_c(c).mean() - d_c(fake_c).mean())
            loss_d = loss_d - (d_p(p).mean() - d_p(fake_p).mean())
            opt_d.zero_grad()
            loss_d.backward()
            opt_d.step()
            clip_critic_(d_c, cfg.clip)
            clip_critic_(d_p, cfg.clip)
            if on_critic_step is not None:
                on_critic_step(it, step, d_c, d_p)
            critic_loss += float(loss_d)

        p = photo_batch.draw()
        c = cari_batch.draw()
        cond_p = draw_conds(len(p))
        cond_c = draw_conds(len(c))
        warped_c = warp_with(g_pc, p, cond_p)
        back_p = warp_with(g_cp, warped_c, cond_p)
        warped_p = warp_with(g_cp, c, cond_c)
        back_c = warp_with(g_pc, warped_p, cond_c)
        cycle = (back_p - p).abs().mean() + (back_c - c).abs().mean()
        adv = -(d_c(warped_c).mean() + d_p(warped_p).mean())
        loss_g = adv + cfg.lambda_cyc * cycle
        opt_g.zero_grad()
        loss_g.backward()
        opt_g.step()

        log.append(
            {
                "iteration": it + 1,
                "critic_loss": critic_loss / cfg.critic_steps,
                "generator_loss": float(loss_g),
                "cycle_loss": float(cycle) / 2.0,
            }
        )
    return g_pc, g_cp, log


def apply_shape_adaptation(
    g_pc: ShapeGenerator,
    img: np.ndarray,
    lbl: np.ndarray,
    lms: np.ndarray,
    cond: np.ndarray,
    grouping: LandmarkGrouping,
) -> tuple[np.ndarray, np.ndarray]:
    """Warp a photo and its labels with one predicted flow.

    Rasterizes the photo-side landmarks, predicts a control grid for the
    requested condition and backward-warps image (bilinear) and label map
    (nearest) with the identical dense flow. Needs nothing from the
    caricature domain.
    """
    cond = np.asarray(cond, dtype=np.float32)
    if cond.shape != (g_pc.k,):
        raise ValueError(f"condition must have length k={g_pc.k}, got {cond.shape}")
    if cond.sum() != 1.0 or ((cond != 0) & (cond != 1)).any():
        raise ValueError("condition must be one-hot")
    if g_pc.grouping_sha is not None and grouping_sha256(grouping) != g_pc.grouping_sha:
        raise ValueError("generator was trained with a different landmark grouping")
    maps = rasterize_landmark_map(lms, grouping, img.shape[:2]).astype(np.float32)
    flow = predict_flow(g_pc, maps, cond, img.shape[:2])
    return sample_bilinear(img, flow), sample_nearest(lbl, flow)
