"""Domain types shared by all modules, plus structural validation.

All types are immutable values except :class:`Track`, which the tracker
mutates frame by frame. Instances may be moved between threads freely;
nothing here holds shared mutable state.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Iterable

import numpy as np

from .errors import DegenerateBox, DuplicateEntry, NonFiniteValue


class Kind(str, Enum):
    """Detection stream: whole-body or head-shoulder."""

    WB = "wb"
    HS = "hs"


class TrackStatus(str, Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DELETED = "deleted"


class Role(str, Enum):
    GROUND_TRUTH = "ground_truth"
    PREDICTION = "prediction"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, top-left origin, continuous (x, y, w, h)."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for v in (self.x, self.y, self.w, self.h):
            if not math.isfinite(v):
                raise NonFiniteValue(f"box coordinate is not finite: {self!r}")
        if self.w <= 0 or self.h <= 0:
            raise DegenerateBox(f"box has non-positive extent: w={self.w}, h={self.h}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Detection:
    """One detector output box with its stream kind and confidence."""

    frame: int
    kind: Kind
    box: BoundingBox
    confidence: float
    det_id: int

    def __post_init__(self) -> None:
        if self.frame < 1:
            raise ValueError(f"frame index must be >= 1, got {self.frame}")
        if not math.isfinite(self.confidence) or not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


class Embedding:
    """A real-valued appearance vector.

    Values are stored as a read-only float64 array. An all-zero vector is
    legal: it is the placeholder for a missing head-shoulder crop.
    """

    __slots__ = ("values",)

    def __init__(self, values: Iterable[float] | np.ndarray):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"embedding must be a non-empty 1-D vector, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteValue("embedding contains non-finite values")
        arr = arr.copy()
        arr.setflags(write=False)
        self.values = arr

    @property
    def dim(self) -> int:
        return self.values.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"Embedding(dim={self.dim})"


@dataclass(frozen=True)
class FusedObservation:
    """A paired wb(+optional hs) detection with its concatenated descriptor."""

    wb_box: BoundingBox
    hs_box: BoundingBox | None
    descriptor: Embedding
    frame: int


@dataclass
class Track:
    """Tracker-side identity state.

    The gallery keeps the latest descriptors, most recent last; its length
    cap is enforced by the deque maxlen set at construction time. Deleted
    tracks never re-enter matching.
    """

    track_id: int
    gallery: Deque[Embedding]
    frames_since_update: int = 0
    hits: int = 1
    status: TrackStatus = TrackStatus.TENTATIVE

    @classmethod
    def new(cls, track_id: int, descriptor: Embedding, gallery_size: int) -> "Track":
        return cls(track_id=track_id, gallery=deque([descriptor], maxlen=gallery_size))


@dataclass
class TrajectorySet:
    """Ground-truth or predicted trajectories as (frame, id) -> box."""

    role: Role
    entries: dict[tuple[int, int], BoundingBox] = field(default_factory=dict)

    def add(self, frame: int, track_id: int, box: BoundingBox) -> None:
        if frame < 1:
            raise ValueError(f"frame index must be >= 1, got {frame}")
        key = (frame, track_id)
        if key in self.entries:
            raise DuplicateEntry(f"two boxes for frame={frame}, id={track_id}")
        self.entries[key] = box

    def frames(self) -> list[int]:
        return sorted({f for f, _ in self.entries})

    def ids(self) -> list[int]:
        return sorted({i for _, i in self.entries})

    def at_frame(self, frame: int) -> dict[int, BoundingBox]:
        return {i: b for (f, i), b in self.entries.items() if f == frame}

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TPRecord:
    """One true-positive match at a given localization threshold."""

    frame: int
    pr_id: int
    gt_id: int
    loc_score: float


@dataclass
class MetricReport:
    """Per-sequence and aggregate metric values plus the configuration echo.

    ``per_sequence`` maps sequence name -> metric name -> value; the
    aggregate row is stored under :data:`AGGREGATE_KEY`. ``config`` echoes
    whatever settings produced the run (tau, age, gallery size, fusion and
    distance modes, localization grid, ...).
    """

    config: dict[str, object] = field(default_factory=dict)
    per_sequence: dict[str, dict[str, float]] = field(default_factory=dict)
    aggregate: dict[str, float] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)


AGGREGATE_KEY = "ALL"


def validate_trajectory_set(ts: TrajectorySet) -> None:
    """Check every TrajectorySet invariant; raise on the first violation.

    The entries dict cannot hold duplicate keys, so DuplicateEntry surfaces
    through :meth:`TrajectorySet.add` and the parsers; here we re-check the
    per-entry invariants for sets built by hand.
    """
    for (frame, track_id), box in ts.entries.items():
        if not isinstance(frame, int) or frame < 1:
            raise ValueError(f"frame index must be an integer >= 1, got {frame!r}")
        for v in (box.x, box.y, box.w, box.h):
            if not math.isfinite(v):
                raise NonFiniteValue(f"non-finite box at frame={frame}, id={track_id}")
        if box.w <= 0 or box.h <= 0:
            raise DegenerateBox(f"degenerate box at frame={frame}, id={track_id}")
