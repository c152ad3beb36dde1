"""Deterministic synthetic scenarios: ground truth, noisy detections,
embeddings, and scripted tracker outputs for metric tests.

Generation is a pure function of the spec and its seed; randomness comes
from one NumPy PCG64 generator so outputs are reproducible bit for bit.
Identities walk piecewise-linearly between waypoints; the head-shoulder
ground-truth box is anchored to the top-center of the whole-body box (50%
of its width, 40% of its height) and is therefore always fully contained.
Whole-body appearance vectors are shared within a same-cloth group while
the head-shoulder vector stays unique per identity, which is what makes
the head-shoulder cue discriminative when clothing is not.

Embedding values are quantized to float32 at generation time so the binary
embedding files round-trip exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import BoundingBox, Detection, Embedding, Kind, Role, TrajectorySet
from .errors import InvalidSpec, ScriptOutOfRange

HS_WIDTH_FRACTION = 0.5
HS_HEIGHT_FRACTION = 0.4


@dataclass
class ScenarioSpec:
    """Desk-scale scenario description; see the docs for the file grammar."""

    num_identities: int = 4
    num_frames: int = 200
    arena_w: float = 1920.0
    arena_h: float = 1080.0
    box_w: float = 60.0
    box_h: float = 160.0
    embed_dim_wb: int = 32
    embed_dim_hs: int = 32
    num_waypoints: int = 4
    motion: dict[int, list[tuple[float, float]]] = field(default_factory=dict)
    occlusion_windows: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    exit_windows: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    same_cloth_groups: list[list[int]] = field(default_factory=list)
    cloth_separation: float = 0.3
    jitter_sigma: float = 0.0
    hs_jitter_sigma: float | None = None
    miss_rate: float = 0.0
    hs_miss_rate: float | None = None
    fp_rate: float = 0.0
    embed_noise_sigma: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.num_identities < 1:
            raise InvalidSpec("num_identities must be >= 1")
        if self.num_frames < 1:
            raise InvalidSpec("num_frames must be >= 1")
        if self.arena_w <= 0 or self.arena_h <= 0:
            raise InvalidSpec("arena must have positive extent")
        if self.box_w <= 0 or self.box_h <= 0:
            raise InvalidSpec("box size must be positive")
        if self.embed_dim_wb < 1 or self.embed_dim_hs < 1:
            raise InvalidSpec("embedding dimensions must be >= 1")
        if self.num_waypoints < 1:
            raise InvalidSpec("num_waypoints must be >= 1")
        for rate_name in ("miss_rate", "fp_rate"):
            rate = getattr(self, rate_name)
            if not 0.0 <= rate <= 1.0:
                raise InvalidSpec(f"{rate_name} must be in [0, 1], got {rate}")
        if self.hs_miss_rate is not None and not 0.0 <= self.hs_miss_rate <= 1.0:
            raise InvalidSpec(f"hs_miss_rate must be in [0, 1], got {self.hs_miss_rate}")
        if self.jitter_sigma < 0 or self.embed_noise_sigma < 0:
            raise InvalidSpec("noise sigmas must be non-negative")
        if self.cloth_separation < 0:
            raise InvalidSpec("cloth_separation must be non-negative")
        ids = range(1, self.num_identities + 1)
        for windows in (self.occlusion_windows, self.exit_windows):
            for ident, intervals in windows.items():
                if ident not in ids:
                    raise InvalidSpec(f"window for unknown identity {ident}")
                for start, end in intervals:
                    if not (1 <= start <= end <= self.num_frames):
                        raise InvalidSpec(
                            f"window [{start}, {end}] outside [1, {self.num_frames}]"
                        )
        seen: set[int] = set()
        for group in self.same_cloth_groups:
            for ident in group:
                if ident not in ids:
                    raise InvalidSpec(f"same-cloth group names unknown identity {ident}")
                if ident in seen:
                    raise InvalidSpec(f"identity {ident} appears in two cloth groups")
                seen.add(ident)
        for ident, waypoints in self.motion.items():
            if ident not in ids:
                raise InvalidSpec(f"motion for unknown identity {ident}")
            if len(waypoints) < 1:
                raise InvalidSpec(f"identity {ident} needs at least one waypoint")


@dataclass(frozen=True)
class IdScript:
    """Per-identity mapping of inclusive frame intervals to emitted pr ids."""

    segments: dict[int, list[tuple[int, int, int]]]

    def __post_init__(self) -> None:
        for ident, segs in self.segments.items():
            spans = sorted((s, e) for s, e, _ in segs)
            for (s1, e1), (s2, _) in zip(spans, spans[1:]):
                if s2 <= e1:
                    raise ValueError(f"overlapping intervals for identity {ident}")


@dataclass
class Scenario:
    spec: ScenarioSpec
    gt_wb: TrajectorySet
    gt_hs: TrajectorySet
    wb_detections: list[Detection]
    hs_detections: list[Detection]
    wb_embeddings: dict[int, Embedding]
    hs_embeddings: dict[int, Embedding]


def _quantize(values: np.ndarray) -> np.ndarray:
    return values.astype(np.float32).astype(np.float64)


def _orthonormal_rows(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Base appearance vectors; orthonormal when count <= dim."""
    if count <= dim:
        q, _ = np.linalg.qr(rng.standard_normal((dim, count)))
        return q.T.copy()
    rows = rng.standard_normal((count, dim))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _hidden_frames(spec: ScenarioSpec, ident: int) -> set[int]:
    hidden: set[int] = set()
    for windows in (spec.occlusion_windows, spec.exit_windows):
        for start, end in windows.get(ident, ()):
            hidden.update(range(start, end + 1))
    return hidden


def hs_box_for(wb: BoundingBox) -> BoundingBox:
    """Top-center head-shoulder box derived from a whole-body box."""
    return BoundingBox(
        x=wb.x + wb.w * (1.0 - HS_WIDTH_FRACTION) / 2.0,
        y=wb.y,
        w=wb.w * HS_WIDTH_FRACTION,
        h=wb.h * HS_HEIGHT_FRACTION,
    )


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    """Generate ground truth, jittered detections, and embeddings.

    Detection draws happen in a fixed order (frame, identity, kind), so
    equal specs and seeds give byte-identical outputs.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n_ids = spec.num_identities
    ids = list(range(1, n_ids + 1))

    # Waypoint paths; identities without explicit motion get random ones.
    paths: dict[int, np.ndarray] = {}
    x_span = max(1.0, spec.arena_w - spec.box_w)
    y_span = max(1.0, spec.arena_h - spec.box_h)
    for ident in ids:
        if ident in spec.motion:
            pts = np.asarray(spec.motion[ident], dtype=np.float64).reshape(-1, 2)
        else:
            pts = rng.uniform((0.0, 0.0), (x_span, y_span), size=(spec.num_waypoints, 2))
        if len(pts) == 1:
            pts = np.repeat(pts, 2, axis=0)
        t = np.linspace(1.0, spec.num_frames, len(pts))
        frames = np.arange(1, spec.num_frames + 1, dtype=np.float64)
        paths[ident] = np.stack(
            [np.interp(frames, t, pts[:, 0]), np.interp(frames, t, pts[:, 1])], axis=1
        )

    # Appearance bases: one wb vector per cloth group, one hs vector per identity.
    group_of = {ident: i for i, ident in enumerate(ids)}
    groups = [[ident] for ident in ids]
    if spec.same_cloth_groups:
        grouped = {i for g in spec.same_cloth_groups for i in g}
        groups = [list(g) for g in spec.same_cloth_groups]
        groups += [[i] for i in ids if i not in grouped]
        group_of = {ident: gi for gi, g in enumerate(groups) for ident in g}
    group_bases = _orthonormal_rows(rng, len(groups), spec.embed_dim_wb)
    hs_bases = _orthonormal_rows(rng, n_ids, spec.embed_dim_hs)
    # Same clothes are similar, not identical: members of a group share a
    # base vector plus a small personal offset, so the whole-body cue is
    # degraded but still carries partial identity signal.
    personal = _orthonormal_rows(rng, n_ids, spec.embed_dim_wb)
    wb_bases = np.empty((n_ids, spec.embed_dim_wb))
    for ident in ids:
        vec = group_bases[group_of[ident]]
        if len(groups[group_of[ident]]) > 1:
            vec = vec + spec.cloth_separation * personal[ident - 1]
            vec = vec / np.linalg.norm(vec)
        wb_bases[ident - 1] = vec

    hidden = {ident: _hidden_frames(spec, ident) for ident in ids}

    gt_wb = TrajectorySet(Role.GROUND_TRUTH)
    gt_hs = TrajectorySet(Role.GROUND_TRUTH)
    wb_dets: list[Detection] = []
    hs_dets: list[Detection] = []
    wb_embs: dict[int, Embedding] = {}
    hs_embs: dict[int, Embedding] = {}
    next_det_id = {Kind.WB: 1, Kind.HS: 1}

    def emit(kind: Kind, frame: int, box: BoundingBox, base: np.ndarray, conf: float) -> None:
        det_id = next_det_id[kind]
        next_det_id[kind] = det_id + 1
        det = Detection(frame=frame, kind=kind, box=box, confidence=conf, det_id=det_id)
        dim = spec.embed_dim_wb if kind is Kind.WB else spec.embed_dim_hs
        vec = base + spec.embed_noise_sigma * rng.standard_normal(dim)
        emb = Embedding(_quantize(vec))
        if kind is Kind.WB:
            wb_dets.append(det)
            wb_embs[det_id] = emb
        else:
            hs_dets.append(det)
            hs_embs[det_id] = emb

    hs_miss = spec.miss_rate if spec.hs_miss_rate is None else spec.hs_miss_rate
    hs_jitter = spec.jitter_sigma if spec.hs_jitter_sigma is None else spec.hs_jitter_sigma

    for frame in range(1, spec.num_frames + 1):
        for ident in ids:
            if frame in hidden[ident]:
                continue
            x, y = paths[ident][frame - 1]
            wb = BoundingBox(float(x), float(y), spec.box_w, spec.box_h)
            hs = hs_box_for(wb)
            gt_wb.add(frame, ident, wb)
            gt_hs.add(frame, ident, hs)

            # Box jitter shifts positions only; sizes stay valid.
            if rng.random() >= spec.miss_rate:
                dx, dy = spec.jitter_sigma * rng.standard_normal(2)
                box = BoundingBox(wb.x + dx, wb.y + dy, wb.w, wb.h)
                conf = float(rng.uniform(0.6, 1.0))
                emit(Kind.WB, frame, box, wb_bases[ident - 1], conf)
            if rng.random() >= hs_miss:
                dx, dy = hs_jitter * rng.standard_normal(2)
                box = BoundingBox(hs.x + dx, hs.y + dy, hs.w, hs.h)
                conf = float(rng.uniform(0.6, 1.0))
                emit(Kind.HS, frame, box, hs_bases[ident - 1], conf)

        # Background clutter: fresh random appearance, no identity.
        for kind, dim in ((Kind.WB, spec.embed_dim_wb), (Kind.HS, spec.embed_dim_hs)):
            for _ in range(rng.poisson(spec.fp_rate)):
                scale = rng.uniform(0.5, 1.5)
                w = spec.box_w * scale * (HS_WIDTH_FRACTION if kind is Kind.HS else 1.0)
                h = spec.box_h * scale * (HS_HEIGHT_FRACTION if kind is Kind.HS else 1.0)
                box = BoundingBox(
                    float(rng.uniform(0.0, x_span)), float(rng.uniform(0.0, y_span)), w, h
                )
                base = rng.standard_normal(dim)
                base /= np.linalg.norm(base)
                emit(kind, frame, box, base, float(rng.uniform(0.2, 0.9)))

    return Scenario(
        spec=spec,
        gt_wb=gt_wb,
        gt_hs=gt_hs,
        wb_detections=wb_dets,
        hs_detections=hs_dets,
        wb_embeddings=wb_embs,
        hs_embeddings=hs_embs,
    )


def scripted_tracker_output(gt: TrajectorySet, script: IdScript) -> TrajectorySet:
    """Relabel ground-truth boxes per script; every emitted box is a TP.

    Frames inside an interval where the identity is not visible are simply
    absent from the ground truth and produce no output.
    """
    if not gt.entries:
        raise ScriptOutOfRange("ground truth is empty")
    max_frame = max(f for f, _ in gt.entries)
    gt_ids = {i for _, i in gt.entries}
    pred = TrajectorySet(Role.PREDICTION)
    for ident, segments in script.segments.items():
        if ident not in gt_ids:
            raise ScriptOutOfRange(f"identity {ident} not in ground truth")
        for start, end, pr_id in segments:
            if start < 1 or end > max_frame or start > end:
                raise ScriptOutOfRange(
                    f"interval [{start}, {end}] outside ground truth range [1, {max_frame}]"
                )
            for frame in range(start, end + 1):
                box = gt.entries.get((frame, ident))
                if box is not None:
                    pred.add(frame, pr_id, box)
    return pred


# ---- presets ----------------------------------------------------------------

def preset(name: str) -> ScenarioSpec:
    """Named scenario presets for the trend experiments."""
    if name == "long-occlusion":
        return ScenarioSpec(
            num_identities=6,
            num_frames=1000,
            exit_windows={
                ident: [(150 + 100 * (ident - 1), 269 + 100 * (ident - 1))]
                for ident in range(1, 7)
            },
            jitter_sigma=1.0,
            miss_rate=0.01,
            fp_rate=0.002,
            embed_noise_sigma=0.05,
            seed=101,
        )
    if name == "same-cloth":
        return ScenarioSpec(
            num_identities=6,
            num_frames=800,
            same_cloth_groups=[[1, 2, 3, 4, 5, 6]],
            cloth_separation=0.25,
            jitter_sigma=2.0,
            miss_rate=0.02,
            hs_miss_rate=0.35,
            fp_rate=0.005,
            embed_noise_sigma=0.12,
            seed=202,
        )
    if name == "fig4":
        return ScenarioSpec(
            num_identities=1,
            num_frames=300,
            seed=303,
        )
    raise InvalidSpec(f"unknown preset {name!r}; choose long-occlusion, same-cloth, or fig4")


PRESET_NAMES = ("long-occlusion", "same-cloth", "fig4")


# ---- spec file grammar -------------------------------------------------------
#
# One `key = value` per line; blank lines and lines starting with `#` are
# ignored. Scalar values are plain numbers. Composite values:
#   arena                = W,H
#   same_cloth_groups    = 1,2;3,4        (groups separated by `;`)
#   occlusion.<id>       = s1:e1,s2:e2    (inclusive frame intervals)
#   exit.<id>            = s1:e1,...
#   motion.<id>          = x1:y1,x2:y2,...(waypoints, piecewise-linear)

_SCALAR_FIELDS = {
    "num_identities": int,
    "num_frames": int,
    "box_w": float,
    "box_h": float,
    "embed_dim_wb": int,
    "embed_dim_hs": int,
    "num_waypoints": int,
    "cloth_separation": float,
    "jitter_sigma": float,
    "hs_jitter_sigma": float,
    "miss_rate": float,
    "hs_miss_rate": float,
    "fp_rate": float,
    "embed_noise_sigma": float,
    "seed": int,
}


def parse_spec(text: str) -> ScenarioSpec:
    """Parse the flat key = value scenario grammar."""
    spec = ScenarioSpec()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidSpec(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key in _SCALAR_FIELDS:
                setattr(spec, key, _SCALAR_FIELDS[key](value))
            elif key == "arena":
                w, h = (float(v) for v in value.split(","))
                spec.arena_w, spec.arena_h = w, h
            elif key == "same_cloth_groups":
                spec.same_cloth_groups = [
                    [int(i) for i in group.split(",") if i.strip()]
                    for group in value.split(";")
                    if group.strip()
                ]
            elif key.startswith(("occlusion.", "exit.", "motion.")):
                prefix, _, ident_str = key.partition(".")
                ident = int(ident_str)
                pairs = [
                    tuple(float(x) for x in item.split(":"))
                    for item in value.split(",")
                    if item.strip()
                ]
                if prefix == "motion":
                    spec.motion[ident] = [(a, b) for a, b in pairs]
                else:
                    intervals = [(int(a), int(b)) for a, b in pairs]
                    target = spec.occlusion_windows if prefix == "occlusion" else spec.exit_windows
                    target[ident] = intervals
            else:
                raise InvalidSpec(f"line {lineno}: unknown key {key!r}")
        except (ValueError, TypeError) as exc:
            raise InvalidSpec(f"line {lineno}: cannot parse {key!r}: {exc}") from exc
    spec.validate()
    return spec


def format_spec(spec: ScenarioSpec) -> str:
    """Serialize a spec in the same grammar parse_spec reads."""
    lines = []
    for key in _SCALAR_FIELDS:
        value = getattr(spec, key)
        if value is None:
            continue
        lines.append(f"{key} = {value}")
    lines.append(f"arena = {spec.arena_w},{spec.arena_h}")
    if spec.same_cloth_groups:
        lines.append(
            "same_cloth_groups = "
            + ";".join(",".join(str(i) for i in g) for g in spec.same_cloth_groups)
        )
    for prefix, windows in (("occlusion", spec.occlusion_windows), ("exit", spec.exit_windows)):
        for ident in sorted(windows):
            body = ",".join(f"{s}:{e}" for s, e in windows[ident])
            lines.append(f"{prefix}.{ident} = {body}")
    for ident in sorted(spec.motion):
        body = ",".join(f"{x:g}:{y:g}" for x, y in spec.motion[ident])
        lines.append(f"motion.{ident} = {body}")
    return "\n".join(lines) + "\n"
