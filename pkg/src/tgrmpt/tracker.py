"""Frame-by-frame association of fused observations to appearance tracks.

The association cost is purely appearance based: no motion model, no
gating, and by default no matching cascade, so a frame's assignment
depends only on the current galleries and observations. Tracks are kept
alive forever when the age threshold is infinite, which lets an identity
be recovered after arbitrarily long absences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assignment import solve_min_cost
from .core import Detection, Embedding, FusedObservation, Kind, Role, Track, TrackStatus, TrajectorySet
from .descriptor import fuse_embedding, l2_normalized
from .errors import DimensionMismatch, FrameOrderViolation, MissingEmbedding
from .fusion import DEFAULT_MIN_CONTAINMENT, pair_detections

INFINITE = math.inf

FUSION_MODES = ("wb", "hs", "wb+hs")
DISTANCE_MODES = ("mean", "min")


@dataclass
class TrackerConfig:
    """Knobs of the association stage.

    Defaults are the best-performing configuration: tau=0.85, infinite
    age, gallery of 100, mean distance, both cues fused.
    """

    tau: float = 0.85
    age: float = INFINITE
    gallery_size: int = 100
    distance_mode: str = "mean"
    fusion_mode: str = "wb+hs"
    n_init: int = 3
    cascade: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau <= 2.0:
            raise ValueError(f"tau must be in [0, 2], got {self.tau}")
        if self.age != INFINITE and (self.age != int(self.age) or self.age < 1):
            raise ValueError(f"age must be a positive integer or INFINITE, got {self.age}")
        if self.gallery_size < 1:
            raise ValueError(f"gallery_size must be >= 1, got {self.gallery_size}")
        if self.distance_mode not in DISTANCE_MODES:
            raise ValueError(f"distance_mode must be one of {DISTANCE_MODES}, got {self.distance_mode!r}")
        if self.fusion_mode not in FUSION_MODES:
            raise ValueError(f"fusion_mode must be one of {FUSION_MODES}, got {self.fusion_mode!r}")
        if self.n_init < 1:
            raise ValueError(f"n_init must be >= 1, got {self.n_init}")


class _GalleryCache:
    """Normalized gallery matrix kept as a ring buffer.

    Mirrors a track's descriptor deque so distances can be computed with
    matrix products. The running sum of normalized rows makes mean-mode
    distance O(dim) per observation regardless of gallery size; ring order
    is irrelevant because mean and min are order-free.
    """

    __slots__ = ("buf", "count", "pos", "vec_sum")

    def __init__(self, capacity: int, dim: int):
        self.buf = np.zeros((capacity, dim))
        self.count = 0
        self.pos = 0
        self.vec_sum = np.zeros(dim)

    def append(self, values: np.ndarray) -> None:
        row = l2_normalized(values)
        if self.count < self.buf.shape[0]:
            self.buf[self.count] = row
            self.count += 1
        else:
            self.vec_sum -= self.buf[self.pos]
            self.buf[self.pos] = row
            self.pos = (self.pos + 1) % self.buf.shape[0]
        self.vec_sum += row

    def mean_vector(self) -> np.ndarray:
        return self.vec_sum / self.count

    def min_distances(self, obs_rows: np.ndarray) -> np.ndarray:
        return 1.0 - (self.buf[: self.count] @ obs_rows.T).max(axis=0)


@dataclass
class TrackerState:
    """Single-sequence tracker state; strictly frame-sequential."""

    tracks: list[Track] = field(default_factory=list)
    next_id: int = 1
    frame_cursor: int = 0
    _caches: dict[int, _GalleryCache] = field(default_factory=dict, repr=False)

    def active_tracks(self) -> list[Track]:
        return [t for t in self.tracks if t.status is not TrackStatus.DELETED]


def _check_frame(state: TrackerState, obs: list[FusedObservation]) -> int:
    expected = state.frame_cursor + 1
    for o in obs:
        if o.frame != expected:
            raise FrameOrderViolation(
                f"observation from frame {o.frame}, expected {expected}"
            )
    return expected


def _obs_matrix(obs: list[FusedObservation]) -> np.ndarray:
    dim = obs[0].descriptor.dim
    rows = np.empty((len(obs), dim))
    for k, o in enumerate(obs):
        if o.descriptor.dim != dim:
            raise DimensionMismatch(
                f"descriptor dim {o.descriptor.dim} != run-wide dim {dim}"
            )
        rows[k] = l2_normalized(o.descriptor.values)
    return rows


def _cost_matrix(
    state: TrackerState, tracks: list[Track], obs_rows: np.ndarray, mode: str
) -> np.ndarray:
    if mode == "mean":
        means = np.stack([state._caches[t.track_id].mean_vector() for t in tracks])
        return 1.0 - means @ obs_rows.T
    return np.stack(
        [state._caches[t.track_id].min_distances(obs_rows) for t in tracks]
    )


def associate_frame(
    state: TrackerState, obs: list[FusedObservation], cfg: TrackerConfig
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Match observations to non-deleted tracks for the next frame.

    Returns (matches, unmatched_track_ids, unmatched_obs_indices) where
    matches are (track_id, obs index) pairs. Matches with distance
    strictly greater than tau are dissolved into unmatched on both sides.
    """
    _check_frame(state, obs)
    tracks = state.active_tracks()
    if not tracks or not obs:
        return [], [t.track_id for t in tracks], list(range(len(obs)))

    obs_rows = _obs_matrix(obs)

    matches: list[tuple[int, int]] = []
    matched_obs: set[int] = set()
    matched_tracks: set[int] = set()

    if cfg.cascade:
        # DeepSORT-style ablation: younger tracks get first pick.
        levels = sorted({t.frames_since_update for t in tracks})
        buckets = [[t for t in tracks if t.frames_since_update == lvl] for lvl in levels]
    else:
        buckets = [tracks]

    remaining = list(range(len(obs)))
    for bucket in buckets:
        if not remaining:
            break
        cost = _cost_matrix(state, bucket, obs_rows[remaining], cfg.distance_mode)
        result = solve_min_cost(cost)
        for bi, ci in result.pairs:
            if cost[bi, ci] > cfg.tau:
                continue
            matches.append((bucket[bi].track_id, remaining[ci]))
            matched_tracks.add(bucket[bi].track_id)
            matched_obs.add(remaining[ci])
        remaining = [k for k in remaining if k not in matched_obs]

    unmatched_tracks = [t.track_id for t in tracks if t.track_id not in matched_tracks]
    unmatched_obs = [k for k in range(len(obs)) if k not in matched_obs]
    return matches, unmatched_tracks, unmatched_obs


def step(
    state: TrackerState, obs: list[FusedObservation], cfg: TrackerConfig
) -> list[tuple[int, int, FusedObservation]]:
    """Advance the tracker one frame; return (frame, track_id, obs) output rows.

    Rows are emitted for confirmed tracks that received an observation this
    frame (matched, or newborn when n_init allows immediate confirmation).
    """
    frame = _check_frame(state, obs)
    matches, unmatched_tracks, unmatched_obs = associate_frame(state, obs, cfg)

    by_id = {t.track_id: t for t in state.tracks}
    rows: list[tuple[int, int, FusedObservation]] = []

    for track_id, k in matches:
        track = by_id[track_id]
        o = obs[k]
        track.gallery.append(o.descriptor)
        state._caches[track_id].append(o.descriptor.values)
        track.frames_since_update = 0
        track.hits += 1
        if track.status is TrackStatus.TENTATIVE and track.hits >= cfg.n_init:
            track.status = TrackStatus.CONFIRMED
        if track.status is TrackStatus.CONFIRMED:
            rows.append((frame, track_id, o))

    for track_id in unmatched_tracks:
        track = by_id[track_id]
        track.frames_since_update += 1
        if cfg.age != INFINITE and track.frames_since_update > cfg.age:
            track.status = TrackStatus.DELETED
            state._caches.pop(track_id, None)

    for k in unmatched_obs:
        o = obs[k]
        track = Track.new(state.next_id, o.descriptor, cfg.gallery_size)
        if cfg.n_init <= 1:
            track.status = TrackStatus.CONFIRMED
            rows.append((frame, track.track_id, o))
        state.tracks.append(track)
        cache = _GalleryCache(cfg.gallery_size, o.descriptor.dim)
        cache.append(o.descriptor.values)
        state._caches[track.track_id] = cache
        state.next_id += 1

    state.frame_cursor = frame
    return sorted(rows, key=lambda r: r[1])


def build_observations(
    frame: int,
    wb_dets: list[Detection],
    hs_dets: list[Detection],
    wb_embs: dict[int, Embedding],
    hs_embs: dict[int, Embedding],
    cfg: TrackerConfig,
    hs_dim: int,
    min_containment: float = DEFAULT_MIN_CONTAINMENT,
) -> list[FusedObservation]:
    """Fuse one frame's detections into observations per the fusion mode.

    Descriptor layout depends on the mode: wb+hs concatenates [wb | hs]
    with an all-zero hs block for unpaired wb boxes; wb uses the wb part
    alone; hs tracks the hs boxes with the hs part alone (the hs box then
    fills the primary box slot of the observation).
    """

    def emb(store: dict[int, Embedding], det: Detection) -> Embedding:
        try:
            return store[det.det_id]
        except KeyError:
            raise MissingEmbedding(
                f"no {det.kind.value} embedding for det_id={det.det_id} (frame {det.frame})"
            ) from None

    obs: list[FusedObservation] = []
    if cfg.fusion_mode == "wb":
        for d in wb_dets:
            obs.append(FusedObservation(d.box, None, fuse_embedding(emb(wb_embs, d)), frame))
    elif cfg.fusion_mode == "hs":
        for d in hs_dets:
            obs.append(FusedObservation(d.box, None, fuse_embedding(emb(hs_embs, d)), frame))
    else:
        pairing = pair_detections(wb_dets, hs_dets, min_containment)
        for dw, dh in pairing.matched:
            desc = fuse_embedding(emb(wb_embs, dw), emb(hs_embs, dh), hs_dim=hs_dim)
            obs.append(FusedObservation(dw.box, dh.box, desc, frame))
        for dw in pairing.unmatched_wb:
            desc = fuse_embedding(emb(wb_embs, dw), None, hs_dim=hs_dim)
            obs.append(FusedObservation(dw.box, None, desc, frame))
    return obs


def run_sequence(
    wb_detections: list[Detection],
    hs_detections: list[Detection],
    wb_embeddings: dict[int, Embedding],
    hs_embeddings: dict[int, Embedding],
    cfg: TrackerConfig,
    min_containment: float = DEFAULT_MIN_CONTAINMENT,
    min_confidence: float = 0.0,
) -> TrajectorySet:
    """Track a whole sequence; deterministic given inputs and config.

    Detections are grouped by frame and every frame from 1 to the last
    detected one is stepped, so track ages advance through empty frames.
    """
    if min_confidence > 0.0:
        wb_detections = [d for d in wb_detections if d.confidence >= min_confidence]
        hs_detections = [d for d in hs_detections if d.confidence >= min_confidence]

    for d in wb_detections:
        if d.kind is not Kind.WB:
            raise ValueError(f"wb stream carries a {d.kind.value} detection (det_id={d.det_id})")
    for d in hs_detections:
        if d.kind is not Kind.HS:
            raise ValueError(f"hs stream carries a {d.kind.value} detection (det_id={d.det_id})")

    hs_dim = 0
    if cfg.fusion_mode == "wb+hs":
        if hs_embeddings:
            dims = {e.dim for e in hs_embeddings.values()}
            if len(dims) > 1:
                raise DimensionMismatch(f"hs embeddings carry mixed dims {sorted(dims)}")
            hs_dim = dims.pop()
        elif hs_detections:
            raise MissingEmbedding("hs detections present but no hs embeddings given")

    wb_by_frame: dict[int, list[Detection]] = {}
    for d in wb_detections:
        wb_by_frame.setdefault(d.frame, []).append(d)
    hs_by_frame: dict[int, list[Detection]] = {}
    for d in hs_detections:
        hs_by_frame.setdefault(d.frame, []).append(d)

    last_frame = max(
        max(wb_by_frame, default=0),
        max(hs_by_frame, default=0),
    )

    state = TrackerState()
    prediction = TrajectorySet(Role.PREDICTION)
    for frame in range(1, last_frame + 1):
        obs = build_observations(
            frame,
            wb_by_frame.get(frame, []),
            hs_by_frame.get(frame, []),
            wb_embeddings,
            hs_embeddings,
            cfg,
            hs_dim,
            min_containment,
        )
        for f, track_id, o in step(state, obs, cfg):
            prediction.add(f, track_id, o.wb_box)
    return prediction
