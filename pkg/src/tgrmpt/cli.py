"""Command-line surface: track, eval, synth, and ablate subcommands.

Every command exits 0 only on full success and removes partial outputs on
failure. Run logs record the resolved configuration so downstream eval
reports can echo the tracker settings. The TGRMPT_THREADS environment
variable caps worker parallelism for sweeps (0 or unset means auto).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io as tio
from . import metrics, synth
from .errors import ToolkitError
from .tracker import DISTANCE_MODES, FUSION_MODES, INFINITE, TrackerConfig, run_sequence


class _UsageError(Exception):
    pass


def _parse_age(text: str) -> float:
    if text.strip().lower() == "inf":
        return INFINITE
    try:
        value = int(text)
    except ValueError:
        raise _UsageError(f"--age must be a positive integer or 'inf', got {text!r}") from None
    if value < 1:
        raise _UsageError(f"--age must be >= 1, got {value}")
    return float(value)


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise _UsageError(f"--loc-grid must be lo:hi:step, got {text!r}") from None
    if not (0.0 < lo <= hi < 1.0) or step <= 0.0:
        raise _UsageError(f"--loc-grid values out of range: {text}")
    grid = np.round(np.arange(lo, hi + step / 2, step), 10)
    if len(grid) == 0:
        raise _UsageError(f"--loc-grid produced no thresholds: {text}")
    return grid


def worker_count() -> int:
    """Parallelism cap from TGRMPT_THREADS; 0 or unset selects auto."""
    raw = os.environ.get("TGRMPT_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise _UsageError(f"TGRMPT_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise _UsageError(f"TGRMPT_THREADS must be >= 0, got {value}")
    return value if value > 0 else (os.cpu_count() or 1)


class _Outputs:
    """Files created by the running command; removed if it fails."""

    def __init__(self) -> None:
        self.paths: list[Path] = []

    def register(self, path: str | Path) -> Path:
        p = Path(path)
        self.paths.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.paths:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass


def _age_text(age: float) -> str:
    return "inf" if age == INFINITE else str(int(age))


def _tracker_config_dict(cfg: TrackerConfig, extra: dict[str, object]) -> dict[str, object]:
    out: dict[str, object] = {
        "tau": cfg.tau,
        "age": _age_text(cfg.age),
        "gallery": cfg.gallery_size,
        "distance": cfg.distance_mode,
        "fusion": cfg.fusion_mode,
        "n_init": cfg.n_init,
        "cascade": cfg.cascade,
    }
    out.update(extra)
    return out


def _add_track_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--detections-wb", required=True, help="wb detection file")
    sub.add_argument("--detections-hs", help="hs detection file")
    sub.add_argument("--embeddings-wb", required=True, help="wb embedding file (TGRE)")
    sub.add_argument("--embeddings-hs", help="hs embedding file (TGRE)")
    sub.add_argument("--fusion", choices=FUSION_MODES, default="wb+hs")
    sub.add_argument("--tau", type=float, default=0.85, help="appearance distance threshold")
    sub.add_argument("--age", default="inf", help="miss count before deletion, or 'inf'")
    sub.add_argument("--gallery", type=int, default=100, help="descriptors kept per track")
    sub.add_argument("--distance", choices=DISTANCE_MODES, default="mean")
    sub.add_argument("--cascade", action="store_true", help="age-bucketed matching (ablation)")
    sub.add_argument("--min-conf", type=float, default=0.0, help="drop detections below this")
    sub.add_argument("--min-containment", type=float, default=0.5, help="wb/hs pairing threshold")
    sub.add_argument("--n-init", type=int, default=3, help="hits before a track is confirmed")
    sub.add_argument("--seed", type=int, default=0, help="reserved; tracking is deterministic")


def _build_tracker_config(args: argparse.Namespace) -> TrackerConfig:
    if args.fusion == "wb+hs" and not (args.detections_hs and args.embeddings_hs):
        raise _UsageError("--fusion wb+hs requires --detections-hs and --embeddings-hs")
    if args.fusion == "hs" and not (args.detections_hs and args.embeddings_hs):
        raise _UsageError("--fusion hs requires --detections-hs and --embeddings-hs")
    try:
        return TrackerConfig(
            tau=args.tau,
            age=_parse_age(args.age),
            gallery_size=args.gallery,
            distance_mode=args.distance,
            fusion_mode=args.fusion,
            n_init=args.n_init,
            cascade=args.cascade,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _run_track(args: argparse.Namespace, outputs: _Outputs) -> None:
    cfg = _build_tracker_config(args)
    bundle = tio.SequenceBundle.load(
        args.detections_wb, args.detections_hs, args.embeddings_wb, args.embeddings_hs
    )
    pred = run_sequence(
        bundle.wb_detections,
        bundle.hs_detections,
        bundle.wb_embeddings,
        bundle.hs_embeddings,
        cfg,
        min_containment=args.min_containment,
        min_confidence=args.min_conf,
    )
    out = outputs.register(args.out)
    tio.write_tracker_output(pred, out)
    log = outputs.register(str(args.out) + ".log")
    config = _tracker_config_dict(
        cfg,
        {
            "min_conf": args.min_conf,
            "min_containment": args.min_containment,
            "seed": args.seed,
            "detections_wb": args.detections_wb,
            "detections_hs": args.detections_hs or "",
            "rows": len(pred),
            "track_ids": len(pred.ids()),
        },
    )
    log.write_text(
        "".join(f"{key} = {value}\n" for key, value in config.items()), encoding="utf-8"
    )
    print(f"wrote {len(pred)} rows for {len(pred.ids())} tracks to {out}")


def _read_run_log(res_path: str) -> dict[str, str]:
    log = Path(str(res_path) + ".log")
    if not log.exists():
        return {}
    out: dict[str, str] = {}
    for line in log.read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _run_eval(args: argparse.Namespace, outputs: _Outputs) -> None:
    families = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    for fam in families:
        if fam not in metrics.METRIC_FAMILIES:
            raise _UsageError(
                f"unknown metric {fam!r}; choose from {','.join(metrics.METRIC_FAMILIES)}"
            )
    if not families:
        raise _UsageError("--metrics selected nothing")
    grid = _parse_grid(args.loc_grid)
    gt_wb, gt_hs = tio.load_ground_truth(args.gt)
    gt = gt_hs if args.gt_kind == "hs" else gt_wb
    pred = tio.load_tracker_output(args.res)
    seq_name = Path(args.res).stem
    config: dict[str, object] = {"loc_grid": args.loc_grid, "gt": args.gt, "res": args.res}
    for key in ("tau", "age", "gallery", "distance", "fusion"):
        value = _read_run_log(args.res).get(key)
        if value is not None:
            config[key] = value
    report = metrics.build_report({seq_name: (gt, pred)}, grid, families, config)
    if args.out:
        out = outputs.register(args.out)
        tio.write_report(report, out, fmt="tsv")
    sys.stdout.write(tio.format_report(report, fmt="text"))


def _run_synth(args: argparse.Namespace, outputs: _Outputs) -> None:
    if bool(args.spec) == bool(args.preset):
        raise _UsageError("exactly one of --spec or --preset is required")
    if args.preset:
        spec = synth.preset(args.preset)
    else:
        spec = synth.parse_spec(Path(args.spec).read_text(encoding="utf-8"))
    if args.seed is not None:
        spec.seed = args.seed
    scenario = synth.generate_scenario(spec)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tio.write_ground_truth(scenario.gt_wb, scenario.gt_hs, outputs.register(out_dir / "gt.txt"))
    tio.write_detections(scenario.wb_detections, outputs.register(out_dir / "det_wb.txt"))
    tio.write_detections(scenario.hs_detections, outputs.register(out_dir / "det_hs.txt"))
    tio.write_embeddings(scenario.wb_embeddings, outputs.register(out_dir / "emb_wb.bin"))
    tio.write_embeddings(scenario.hs_embeddings, outputs.register(out_dir / "emb_hs.bin"))
    resolved = outputs.register(out_dir / "scenario.spec")
    resolved.write_text(synth.format_spec(spec), encoding="utf-8")
    print(
        f"wrote scenario to {out_dir}: {len(scenario.gt_wb)} gt boxes, "
        f"{len(scenario.wb_detections)} wb / {len(scenario.hs_detections)} hs detections"
    )


_SWEEPABLE = ("tau", "age", "gallery", "distance", "fusion")


def _run_ablate(args: argparse.Namespace, outputs: _Outputs) -> None:
    key, _, values_text = args.sweep.partition("=")
    key = key.strip()
    if key not in _SWEEPABLE:
        raise _UsageError(f"--sweep key must be one of {','.join(_SWEEPABLE)}")
    values = [v.strip() for v in values_text.split(",") if v.strip()]
    if not values:
        raise _UsageError("--sweep list is empty")
    grid = _parse_grid(args.loc_grid)
    gt_wb, gt_hs = tio.load_ground_truth(args.gt)
    bundle = tio.SequenceBundle.load(
        args.detections_wb, args.detections_hs, args.embeddings_wb, args.embeddings_hs
    )

    def run_point(value: str) -> tuple[str, dict[str, float]]:
        point = argparse.Namespace(**vars(args))
        setattr(point, {"gallery": "gallery", "distance": "distance", "fusion": "fusion",
                        "tau": "tau", "age": "age"}[key], value)
        if key == "tau":
            point.tau = float(value)
        elif key == "gallery":
            point.gallery = int(value)
        cfg = _build_tracker_config(point)
        pred = run_sequence(
            bundle.wb_detections,
            bundle.hs_detections,
            bundle.wb_embeddings,
            bundle.hs_embeddings,
            cfg,
            min_containment=args.min_containment,
            min_confidence=args.min_conf,
        )
        gt = gt_hs if cfg.fusion_mode == "hs" and len(gt_hs) else gt_wb
        scores = metrics.evaluate_sequence(gt, pred, grid)
        return value, scores

    workers = min(worker_count(), len(values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_point, values))
    else:
        results = [run_point(v) for v in values]

    report = metrics.MetricReport(
        config={"sweep": args.sweep, "gt": args.gt, "loc_grid": args.loc_grid}
    )
    for value, scores in results:
        report.per_sequence[f"{key}={value}"] = scores
    if args.out:
        tio.write_report(report, outputs.register(args.out), fmt="tsv")
    sys.stdout.write(tio.format_report(report, fmt="text"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgrmpt",
        description="Head-shoulder aided multi-person tracking and evaluation toolkit",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    track = commands.add_parser("track", help="run the tracker on a detection bundle")
    _add_track_flags(track)
    track.add_argument("--out", required=True, help="result file (MOT rows)")

    ev = commands.add_parser("eval", help="score a result file against ground truth")
    ev.add_argument("--gt", required=True, help="ground truth annotation file")
    ev.add_argument("--res", required=True, help="tracker result file")
    ev.add_argument("--metrics", default="mota,idf1,hota,tgrhota")
    ev.add_argument("--loc-grid", default="0.05:0.95:0.05", help="lo:hi:step")
    ev.add_argument("--gt-kind", choices=("wb", "hs"), default="wb")
    ev.add_argument("--out", help="machine-readable TSV report path")

    sy = commands.add_parser("synth", help="generate a synthetic scenario")
    sy.add_argument("--spec", help="scenario spec file")
    sy.add_argument("--preset", choices=synth.PRESET_NAMES, help="built-in scenario")
    sy.add_argument("--seed", type=int, help="override the spec seed")
    sy.add_argument("--out", required=True, help="output directory")

    ab = commands.add_parser("ablate", help="sweep one tracker flag and tabulate scores")
    _add_track_flags(ab)
    ab.add_argument("--gt", required=True, help="ground truth annotation file")
    ab.add_argument("--sweep", required=True, help="key=v1,v2,... over " + ",".join(_SWEEPABLE))
    ab.add_argument("--loc-grid", default="0.05:0.95:0.05")
    ab.add_argument("--out", help="machine-readable TSV report path")

    return parser


_RUNNERS = {
    "track": _run_track,
    "eval": _run_eval,
    "synth": _run_synth,
    "ablate": _run_ablate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    outputs = _Outputs()
    try:
        _RUNNERS[args.command](args, outputs)
    except _UsageError as exc:
        outputs.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        outputs.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        outputs.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
