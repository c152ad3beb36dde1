"""Concatenated appearance descriptors and detection-to-gallery distances.

Each descriptor part (whole-body, head-shoulder) is L2-normalized on its
own before concatenation, so the two cues carry equal a-priori weight and
the magnitude of either feature extractor cannot dominate the cosine. A
missing head-shoulder part becomes an all-zero block of the configured
dimension; cosine against an all-zero vector is defined as similarity 0
(distance 1) so padded blocks never poison wb-only comparisons.
"""

from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from .core import Embedding
from .errors import DimensionMismatch, EmptyGallery, ZeroDescriptorWarning


def l2_normalized(values: np.ndarray) -> np.ndarray:
    """Unit-norm copy; an all-zero vector stays all-zero."""
    values = np.asarray(values, dtype=np.float64)
    norm = math.sqrt(float(values @ values))
    if norm == 0.0:
        return values.copy()
    return values / norm


def cosine_similarity(a: Embedding, b: Embedding) -> float:
    """Cosine of the angle between two embeddings; 0 if either is all-zero."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"embedding dims differ: {a.dim} vs {b.dim}")
    return float(np.dot(l2_normalized(a.values), l2_normalized(b.values)))


def fuse_embedding(
    wb_feat: Embedding,
    hs_feat: Embedding | None = None,
    *,
    hs_dim: int = 0,
    hs_weight: float = 1.0,
) -> Embedding:
    """Concatenate per-part normalized features into one descriptor.

    Args:
        wb_feat: whole-body feature vector.
        hs_feat: head-shoulder feature vector, or None when the detection
            had no paired hs box.
        hs_dim: dimension of the zero block used when hs_feat is None.
            Must match hs_feat.dim when hs_feat is present and hs_dim > 0.
        hs_weight: experimental multiplier applied to the normalized hs
            part; 1.0 reproduces plain concatenation.
    """
    wb_part = l2_normalized(wb_feat.values)
    if hs_feat is not None:
        if hs_dim and hs_feat.dim != hs_dim:
            raise DimensionMismatch(f"hs feature dim {hs_feat.dim} != configured {hs_dim}")
        hs_part = l2_normalized(hs_feat.values) * hs_weight
    else:
        hs_part = np.zeros(hs_dim)
    fused = np.concatenate([wb_part, hs_part]) if hs_part.size else wb_part
    if not fused.any():
        warnings.warn(
            "fused descriptor is all-zero; it will match nothing",
            ZeroDescriptorWarning,
            stacklevel=2,
        )
    return Embedding(fused)


def gallery_distance(obs: Embedding, gallery: Sequence[Embedding], mode: str = "mean") -> float:
    """Cosine distance between an observation and a track's gallery.

    Per gallery entry i the distance is 1 - s_i with s_i the cosine on the
    full concatenated vectors; mean mode averages the distances, min mode
    takes their minimum.
    """
    if mode not in ("mean", "min"):
        raise ValueError(f"mode must be 'mean' or 'min', got {mode!r}")
    if len(gallery) == 0:
        raise EmptyGallery("gallery has no descriptors")
    obs_n = l2_normalized(obs.values)
    sims = np.empty(len(gallery))
    for i, g in enumerate(gallery):
        if g.dim != obs.dim:
            raise DimensionMismatch(f"gallery entry dim {g.dim} != observation dim {obs.dim}")
        sims[i] = np.dot(obs_n, l2_normalized(g.values))
    distances = 1.0 - sims
    return float(distances.mean() if mode == "mean" else distances.min())
