"""Pair whole-body and head-shoulder detections of one frame.

Pairing maximizes total containment IoU with a Hungarian solve; pairs whose
containment falls below the acceptance threshold are dissolved afterwards.
head-shoulder detections that end up unpaired are discarded: hs-only
evidence cannot seed a track in this pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import solve_min_cost
from .core import Detection, Kind
from .errors import MixedFrames, WrongKind
from .geometry import containment_matrix

DEFAULT_MIN_CONTAINMENT = 0.5


@dataclass
class PairingResult:
    matched: list[tuple[Detection, Detection]]
    unmatched_wb: list[Detection]
    discarded_hs: list[Detection]


def pair_detections(
    wb: list[Detection],
    hs: list[Detection],
    min_containment: float = DEFAULT_MIN_CONTAINMENT,
) -> PairingResult:
    """Match each hs detection to at most one wb detection of the same frame.

    A pair is kept only if containment_iou(wb, hs) >= min_containment;
    dissolved pairs send the wb box to unmatched_wb and the hs box to
    discarded_hs. min_containment = 0 recovers a forced full matching.
    """
    for d in wb:
        if d.kind is not Kind.WB:
            raise WrongKind(f"expected wb detection, got {d.kind.value} (det_id={d.det_id})")
    for d in hs:
        if d.kind is not Kind.HS:
            raise WrongKind(f"expected hs detection, got {d.kind.value} (det_id={d.det_id})")
    frames = {d.frame for d in wb} | {d.frame for d in hs}
    if len(frames) > 1:
        raise MixedFrames(f"detections span frames {sorted(frames)}")

    if not wb:
        return PairingResult([], [], list(hs))
    if not hs:
        return PairingResult([], list(wb), [])

    wb_arr = np.array([[d.box.x, d.box.y, d.box.w, d.box.h] for d in wb])
    hs_arr = np.array([[d.box.x, d.box.y, d.box.w, d.box.h] for d in hs])
    score = containment_matrix(wb_arr, hs_arr)

    matched: list[tuple[Detection, Detection]] = []
    paired_wb: set[int] = set()
    paired_hs: set[int] = set()
    if min_containment > 0.0:
        # Rows and columns with zero overlap everywhere contribute nothing
        # to any matching total and their pairs would dissolve; solving
        # without them is equivalent and much smaller.
        rows_ok = np.flatnonzero(score.max(axis=1) > 0.0)
        cols_ok = np.flatnonzero(score.max(axis=0) > 0.0)
    else:
        rows_ok = np.arange(len(wb))
        cols_ok = np.arange(len(hs))
    if len(rows_ok) and len(cols_ok):
        result = solve_min_cost(-score[np.ix_(rows_ok, cols_ok)])
        for ri, ci in result.pairs:
            i, j = int(rows_ok[ri]), int(cols_ok[ci])
            if score[i, j] < min_containment:
                continue
            matched.append((wb[i], hs[j]))
            paired_wb.add(i)
            paired_hs.add(j)

    unmatched_wb = [d for i, d in enumerate(wb) if i not in paired_wb]
    discarded_hs = [d for j, d in enumerate(hs) if j not in paired_hs]
    return PairingResult(matched, unmatched_wb, discarded_hs)
