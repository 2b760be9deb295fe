"""Shape and style vocabularies via clustering.

Shape sets are k-means centers of flattened caricature landmark
configurations. Style references are dataset members closest to the
centroids of hierarchically clustered style features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from sklearn.cluster import AgglomerativeClustering, KMeans

from ..perceptual import PerceptualExtractor, image_to_tensor
from .landmarks import NUM_LANDMARKS


@dataclass
class ShapeSet:
    """K cluster-center landmark configurations, (K, 17, 2) in [0, 1]."""

    centers: np.ndarray

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=np.float64)
        if self.centers.ndim != 3 or self.centers.shape[1:] != (NUM_LANDMARKS, 2):
            raise ValueError(f"centers must be (K, {NUM_LANDMARKS}, 2), got {self.centers.shape}")
        if self.centers.min() < 0 or self.centers.max() > 1:
            raise ValueError("center coordinates must lie in [0, 1]")

    @property
    def k(self) -> int:
        return self.centers.shape[0]


@dataclass
class StyleReferenceSet:
    """M reference images picked nearest to style-cluster centroids."""

    references: list
    indices: np.ndarray  # positions of the references in the source dataset

    @property
    def m(self) -> int:
        return len(self.references)


def cluster_shapes(sets: list, k: int, seed: int) -> ShapeSet:
    """k-means over 34-dim flattened landmark vectors, k-means++ seeded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(sets) < k:
        raise ValueError(f"need at least k={k} landmark sets, got {len(sets)}")
    x = np.stack([np.asarray(s, dtype=np.float64).reshape(-1) for s in sets])
    km = KMeans(
        n_clusters=k,
        init="k-means++",
        n_init=1,
        max_iter=100,
        tol=1e-6,
        random_state=seed,
        algorithm="lloyd",
    ).fit(x)
    centers = km.cluster_centers_.reshape(k, NUM_LANDMARKS, 2)
    return ShapeSet(centers=np.clip(centers, 0.0, 1.0))


def assign_shape_cluster(shapes: ShapeSet, lms: np.ndarray) -> int:
    """Index of the center nearest to one landmark configuration."""
    flat = np.asarray(lms, dtype=np.float64).reshape(-1)
    d = np.linalg.norm(shapes.centers.reshape(shapes.k, -1) - flat, axis=1)
    return int(np.argmin(d))


def extract_style_feature(img: np.ndarray, extractor: PerceptualExtractor) -> np.ndarray:
    """Concatenated per-channel means then population stds per style layer."""
    with torch.no_grad():
        feats = extractor(image_to_tensor(img))
        parts = []
        for name in extractor.style_layers:
            act = feats[name]
            mean = act.mean(dim=(2, 3))
            std = act.var(dim=(2, 3), unbiased=False).sqrt()
            parts.append(torch.cat([mean, std], dim=1))
        return torch.cat(parts, dim=1)[0].numpy()


def cluster_styles(
    caris: list,
    extractor: PerceptualExtractor,
    m: int,
    linkage: str = "ward",
) -> StyleReferenceSet:
    """Agglomerative clustering of style features into m reference styles.

    Each cluster contributes the member with minimum Euclidean distance to
    the cluster's feature mean.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if len(caris) < m:
        raise ValueError(f"need at least m={m} caricatures, got {len(caris)}")
    feats = np.stack([extract_style_feature(img, extractor) for img in caris])
    if len(caris) == 1:
        labels = np.zeros(1, dtype=int)
    else:
        labels = AgglomerativeClustering(n_clusters=m, linkage=linkage).fit_predict(feats)
    indices = []
    for c in range(m):
        members = np.flatnonzero(labels == c)
        center = feats[members].mean(axis=0)
        nearest = members[np.argmin(np.linalg.norm(feats[members] - center, axis=1))]
        indices.append(int(nearest))
    indices = np.asarray(sorted(indices), dtype=np.int64)
    return StyleReferenceSet(references=[caris[i] for i in indices], indices=indices)
