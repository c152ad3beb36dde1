"""Bit-exact file formats: ground truth, detections, embeddings, tracker
results, and metric reports.

Text formats are comma-separated without headers (the MOT convention);
whitespace around fields is tolerated on input and never emitted. Floats
are written with 6 decimals, a quantization that is idempotent under
parse-then-write. Embeddings travel in a binary format because text float
round-trips are lossy and the files get large at dataset scale.

Parsers reject malformed input instead of repairing it; every error names
the file and line (or byte offset).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import AGGREGATE_KEY, BoundingBox, Detection, Embedding, Kind, MetricReport, Role, TrajectorySet
from .errors import (
    BadMagic,
    DimMismatch,
    DuplicateDetId,
    DuplicateEntry,
    IoFailure,
    MissingEmbedding,
    ParseError,
    TruncatedRecord,
)

EMBEDDING_MAGIC = b"TGRE"


def _parse_float(token: str, path: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: bad {what} {token!r}") from None


def _parse_int(token: str, path: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: bad {what} {token!r}") from None


def _box(fields: list[str], start: int, path: str, lineno: int) -> BoundingBox:
    x, y, w, h = (
        _parse_float(fields[start + k], path, lineno, name)
        for k, name in enumerate(("x", "y", "w", "h"))
    )
    try:
        return BoundingBox(x, y, w, h)
    except Exception as exc:
        raise type(exc)(f"{path}:{lineno}: {exc}") from None


def load_ground_truth(path: str | Path) -> tuple[TrajectorySet, TrajectorySet]:
    """Parse annotation lines into (wb, hs) trajectory sets.

    Accepts two line shapes:
      frame,id,kind,x,y,w,h                    (kind is wb or hs)
      frame,id,x,y,w,h,conf,class,vis          (MOT ground truth, wb only)
    """
    path = Path(path)
    wb = TrajectorySet(Role.GROUND_TRUTH)
    hs = TrajectorySet(Role.GROUND_TRUTH)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) == 7 and fields[2] in ("wb", "hs"):
                frame = _parse_int(fields[0], str(path), lineno, "frame")
                ident = _parse_int(fields[1], str(path), lineno, "id")
                box = _box(fields, 3, str(path), lineno)
                target = wb if fields[2] == "wb" else hs
            elif len(fields) == 9:
                frame = _parse_int(fields[0], str(path), lineno, "frame")
                ident = _parse_int(fields[1], str(path), lineno, "id")
                box = _box(fields, 2, str(path), lineno)
                target = wb
            else:
                raise ParseError(
                    f"{path}:{lineno}: expected 7 fields with a wb/hs kind or 9 MOT fields, "
                    f"got {len(fields)}"
                )
            if frame < 1:
                raise ParseError(f"{path}:{lineno}: frame index must be >= 1, got {frame}")
            try:
                target.add(frame, ident, box)
            except DuplicateEntry:
                raise DuplicateEntry(
                    f"{path}:{lineno}: duplicate box for frame={frame}, id={ident}"
                ) from None
    return wb, hs


def load_tracker_output(path: str | Path) -> TrajectorySet:
    """Parse result lines `frame,id,x,y,w,h,conf,-1,-1,-1` (extra fields ignored)."""
    path = Path(path)
    pred = TrajectorySet(Role.PREDICTION)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) < 6:
                raise ParseError(f"{path}:{lineno}: expected at least 6 fields, got {len(fields)}")
            frame = _parse_int(fields[0], str(path), lineno, "frame")
            ident = _parse_int(fields[1], str(path), lineno, "id")
            box = _box(fields, 2, str(path), lineno)
            if frame < 1:
                raise ParseError(f"{path}:{lineno}: frame index must be >= 1, got {frame}")
            try:
                pred.add(frame, ident, box)
            except DuplicateEntry:
                raise DuplicateEntry(
                    f"{path}:{lineno}: duplicate box for frame={frame}, id={ident}"
                ) from None
    return pred


def load_detections(path: str | Path) -> list[Detection]:
    """Parse detection lines `frame,kind,x,y,w,h,conf,det_id` in file order."""
    path = Path(path)
    out: list[Detection] = []
    seen: set[int] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 8:
                raise ParseError(f"{path}:{lineno}: expected 8 fields, got {len(fields)}")
            frame = _parse_int(fields[0], str(path), lineno, "frame")
            if fields[1] not in ("wb", "hs"):
                raise ParseError(f"{path}:{lineno}: bad kind {fields[1]!r}")
            box = _box(fields, 2, str(path), lineno)
            conf = _parse_float(fields[6], str(path), lineno, "confidence")
            det_id = _parse_int(fields[7], str(path), lineno, "det_id")
            if det_id in seen:
                raise DuplicateDetId(f"{path}:{lineno}: det_id {det_id} appears twice")
            seen.add(det_id)
            try:
                out.append(
                    Detection(frame=frame, kind=Kind(fields[1]), box=box, confidence=conf, det_id=det_id)
                )
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    return out


def write_detections(detections: list[Detection], path: str | Path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for d in detections:
                fh.write(
                    f"{d.frame},{d.kind.value},{d.box.x:.6f},{d.box.y:.6f},"
                    f"{d.box.w:.6f},{d.box.h:.6f},{d.confidence:.6f},{d.det_id}\n"
                )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_ground_truth(wb: TrajectorySet, hs: TrajectorySet, path: str | Path) -> None:
    """Write annotation lines in the 7-field kind format, frames ascending."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for kind, ts in (("wb", wb), ("hs", hs)):
                for (frame, ident), box in sorted(ts.entries.items()):
                    fh.write(
                        f"{frame},{ident},{kind},{box.x:.6f},{box.y:.6f},"
                        f"{box.w:.6f},{box.h:.6f}\n"
                    )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_embeddings(path: str | Path, expected_dim: int | None = None) -> dict[int, Embedding]:
    """Read the binary embedding container.

    Layout: magic `TGRE`, u32 LE dimension, then records of u64 LE det_id
    followed by dim float32 LE values.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != EMBEDDING_MAGIC:
        raise BadMagic(f"{path}: expected magic {EMBEDDING_MAGIC!r}, got {data[:4]!r}")
    if len(data) < 8:
        raise TruncatedRecord(f"{path}: header cut short at byte {len(data)}")
    (dim,) = struct.unpack_from("<I", data, 4)
    if dim == 0:
        raise DimMismatch(f"{path}: dimension 0 in header")
    if expected_dim is not None and dim != expected_dim:
        raise DimMismatch(f"{path}: dimension {dim} != expected {expected_dim}")
    record = 8 + 4 * dim
    body = data[8:]
    if len(body) % record:
        offset = 8 + len(body) - (len(body) % record)
        raise TruncatedRecord(f"{path}: record cut short at byte {offset}")
    out: dict[int, Embedding] = {}
    for start in range(0, len(body), record):
        (det_id,) = struct.unpack_from("<Q", body, start)
        values = np.frombuffer(body, dtype="<f4", count=dim, offset=start + 8)
        if det_id in out:
            raise DuplicateDetId(f"{path}: det_id {det_id} appears twice")
        out[det_id] = Embedding(values.astype(np.float64))
    return out


def write_embeddings(embeddings: dict[int, Embedding], path: str | Path) -> None:
    dims = {e.dim for e in embeddings.values()}
    if len(dims) > 1:
        raise DimMismatch(f"embeddings carry mixed dims {sorted(dims)}")
    dim = dims.pop() if dims else 1
    try:
        with open(path, "wb") as fh:
            fh.write(EMBEDDING_MAGIC)
            fh.write(struct.pack("<I", dim))
            for det_id in sorted(embeddings):
                fh.write(struct.pack("<Q", det_id))
                fh.write(embeddings[det_id].values.astype("<f4").tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_tracker_output(pred: TrajectorySet, path: str | Path) -> None:
    """Write MOT-style result lines, frames ascending, confidence fixed at 1."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for (frame, ident), box in sorted(pred.entries.items()):
                fh.write(
                    f"{frame},{ident},{box.x:.6f},{box.y:.6f},{box.w:.6f},{box.h:.6f},"
                    f"1,-1,-1,-1\n"
                )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def format_report(report: MetricReport, fmt: str = "text") -> str:
    """Render a report as an aligned table or as machine-readable TSV lines.

    The machine format is one `metric<TAB>sequence<TAB>value` triplet per
    line with 6-decimal values; configuration entries are echoed first as
    `config:<key>` rows against the aggregate sequence label.
    """
    if fmt not in ("text", "tsv"):
        raise ValueError(f"format must be 'text' or 'tsv', got {fmt!r}")
    rows = list(report.per_sequence.items())
    if report.aggregate:
        rows.append((AGGREGATE_KEY, report.aggregate))
    if fmt == "tsv":
        lines = [
            f"config:{key}\t{AGGREGATE_KEY}\t{value}"
            for key, value in report.config.items()
        ]
        for seq, values in rows:
            for metric in sorted(values):
                lines.append(f"{metric}\t{seq}\t{values[metric]:.6f}")
        return "\n".join(lines) + "\n"

    metric_names = sorted({m for _, values in rows for m in values})
    width = max((len(s) for s, _ in rows), default=8)
    width = max(width, len("sequence"))
    header = "sequence".ljust(width) + "".join(f"  {m:>10}" for m in metric_names)
    lines = [f"# {key} = {value}" for key, value in report.config.items()]
    lines.append(header)
    for seq, values in rows:
        cells = "".join(
            f"  {values[m]:>10.6f}" if m in values else f"  {'-':>10}" for m in metric_names
        )
        lines.append(seq.ljust(width) + cells)
    return "\n".join(lines) + "\n"


def write_report(report: MetricReport, path: str | Path, fmt: str = "text") -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(format_report(report, fmt))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def parse_report(path: str | Path) -> dict[str, dict[str, float]]:
    """Read a TSV report back into sequence -> metric -> value (config skipped)."""
    out: dict[str, dict[str, float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields")
            metric, seq, value = parts
            if metric.startswith("config:"):
                continue
            out.setdefault(seq, {})[metric] = _parse_float(value, str(path), lineno, "value")
    return out


@dataclass
class SequenceBundle:
    """Paths and parsed handles for one sequence's input files."""

    wb_detections: list[Detection]
    hs_detections: list[Detection]
    wb_embeddings: dict[int, Embedding]
    hs_embeddings: dict[int, Embedding]

    @classmethod
    def load(
        cls,
        detections_wb: str | Path,
        detections_hs: str | Path | None = None,
        embeddings_wb: str | Path | None = None,
        embeddings_hs: str | Path | None = None,
    ) -> "SequenceBundle":
        wb_dets = load_detections(detections_wb)
        hs_dets = load_detections(detections_hs) if detections_hs else []
        wb_embs = load_embeddings(embeddings_wb) if embeddings_wb else {}
        hs_embs = load_embeddings(embeddings_hs) if embeddings_hs else {}
        bundle = cls(wb_dets, hs_dets, wb_embs, hs_embs)
        bundle.validate()
        return bundle

    def validate(self) -> None:
        """Cross-check the files: embeddings and detections must agree."""
        for kind, dets, embs in (
            ("wb", self.wb_detections, self.wb_embeddings),
            ("hs", self.hs_detections, self.hs_embeddings),
        ):
            det_ids = {d.det_id for d in dets}
            if embs:
                for d in dets:
                    if d.det_id not in embs:
                        raise MissingEmbedding(
                            f"{kind} detection det_id={d.det_id} has no embedding record"
                        )
                orphans = set(embs) - det_ids
                if orphans:
                    raise ParseError(
                        f"{kind} embeddings reference unknown det_ids {sorted(orphans)[:5]}"
                    )
