"""Box overlap measures used by detection fusion and by evaluation matching.

Areas are computed continuously; touching edges contribute zero overlap.
"""

from __future__ import annotations

import numpy as np

from .core import BoundingBox


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union; symmetric, 0 when disjoint, 1 when identical."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def containment_iou(wb: BoundingBox, hs: BoundingBox) -> float:
    """Intersection area divided by the hs box area.

    Asymmetric by design: it measures how much of the head-shoulder box
    lies inside the whole-body box, and equals 1 whenever hs is contained
    in wb regardless of their size ratio.
    """
    return intersection_area(wb, hs) / hs.area


def containment_matrix(wb: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """Pairwise containment IoU for (n, 4) wb rows against (m, 4) hs rows."""
    if wb.size == 0 or hs.size == 0:
        return np.zeros((wb.shape[0], hs.shape[0]))
    wx1, wy1 = wb[:, 0:1], wb[:, 1:2]
    wx2, wy2 = wx1 + wb[:, 2:3], wy1 + wb[:, 3:4]
    hx1, hy1 = hs[None, :, 0], hs[None, :, 1]
    hx2, hy2 = hx1 + hs[None, :, 2], hy1 + hs[None, :, 3]
    iw = np.clip(np.minimum(wx2, hx2) - np.maximum(wx1, hx1), 0.0, None)
    ih = np.clip(np.minimum(wy2, hy2) - np.maximum(wy1, hy1), 0.0, None)
    return iw * ih / (hs[:, 2] * hs[:, 3])[None, :]


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU for (n, 4) and (m, 4) arrays of (x, y, w, h) rows."""
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    ax1, ay1 = a[:, 0:1], a[:, 1:2]
    ax2, ay2 = ax1 + a[:, 2:3], ay1 + a[:, 3:4]
    bx1, by1 = b[None, :, 0], b[None, :, 1]
    bx2, by2 = bx1 + b[None, :, 2], by1 + b[None, :, 3]
    iw = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0, None)
    ih = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0, None)
    inter = iw * ih
    area_a = (a[:, 2] * a[:, 3])[:, None]
    area_b = (b[:, 2] * b[:, 3])[None, :]
    union = area_a + area_b - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=inter > 0.0)
    return out
