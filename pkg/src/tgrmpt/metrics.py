"""Evaluation engine: CLEAR/MOTA, IDF1, HOTA, and TGRHOTA.

Per-frame matching maximizes the number of prediction/ground-truth pairs
with IoU at or above the localization threshold (pairs below it are
inadmissible), then the total IoU among those; the matching is exact and
deterministic, not the globally-biased variant some HOTA tools use, so
scores can differ from third-party implementations in tie situations. The
in-repo definitional oracle in the test suite is the source of truth.

TGRHOTA restricts the outer average of the association score to TP', the
time-consistent subset of TPs: a TP is kept only when every earlier TP
either shares both its prediction and ground-truth ids or differs in both.
The per-TP association counts themselves are still taken over the full TP
set. A prediction or ground-truth identity that ever switches partners
therefore stops contributing to TP' permanently, which is the literal
reading of the definition.

The symbol alpha names two unrelated things in this domain: the track age
threshold and the localization threshold. Here they are always called
``age`` and ``loc_threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assignment import solve_min_cost
from .core import AGGREGATE_KEY, MetricReport, TPRecord, TrajectorySet
from .errors import EmptyGroundTruth
from .geometry import iou_matrix

DEFAULT_GRID = np.round(np.arange(1, 20) * 0.05, 10)
CLEAR_THRESHOLD = 0.5
METRIC_FAMILIES = ("mota", "idf1", "hota", "tgrhota")


@dataclass
class MatchSet:
    """Time-ordered true positives at one localization threshold."""

    loc_threshold: float
    tps: list[TPRecord]
    fns: dict[int, int]
    fps: dict[int, int]


@dataclass(frozen=True)
class AssociationCounts:
    """TPA/FNA/FPA for one TP; TPA counts the TP itself, so TPA >= 1."""

    tpa: int
    fna: int
    fpa: int


@dataclass(frozen=True)
class ClearScores:
    mota: float
    motp: float
    fp: int
    fn: int
    idsw: int
    num_gt: int


@dataclass(frozen=True)
class IdScores:
    idf1: float
    idtp: int
    idfp: int
    idfn: int


@dataclass
class HotaScores:
    """Per-threshold arrays plus raw accumulators; scalars average the grid."""

    thresholds: np.ndarray
    deta: np.ndarray
    assa: np.ndarray
    asspr: np.ndarray
    assre: np.ndarray
    hota: np.ndarray
    tp: np.ndarray
    fn: np.ndarray
    fp: np.ndarray
    assa_sum: np.ndarray
    asspr_sum: np.ndarray
    assre_sum: np.ndarray

    @property
    def DetA(self) -> float:
        return float(self.deta.mean())

    @property
    def AssA(self) -> float:
        return float(self.assa.mean())

    @property
    def AssPr(self) -> float:
        return float(self.asspr.mean())

    @property
    def AssRe(self) -> float:
        return float(self.assre.mean())

    @property
    def HOTA(self) -> float:
        return float(self.hota.mean())


@dataclass
class TgrhotaScores:
    """TGRHOTA companion of HotaScores; DetA is shared with plain HOTA."""

    thresholds: np.ndarray
    deta: np.ndarray
    assa_prime: np.ndarray
    tgrhota: np.ndarray
    tp_prime: np.ndarray
    assa_prime_sum: np.ndarray
    degenerate_tp_prime: bool

    @property
    def DetA(self) -> float:
        return float(self.deta.mean())

    @property
    def AssAPrime(self) -> float:
        return float(self.assa_prime.mean())

    @property
    def TGRHOTA(self) -> float:
        return float(self.tgrhota.mean())


def _side_arrays(ts: TrajectorySet) -> tuple[np.ndarray, np.ndarray, list[int], np.ndarray]:
    """Entries flattened to (frames, compact ids, id list, boxes), sorted by
    frame then id."""
    n = len(ts.entries)
    frames = np.empty(n, dtype=np.int64)
    ids = np.empty(n, dtype=np.int64)
    boxes = np.empty((n, 4))
    for k, ((f, i), b) in enumerate(ts.entries.items()):
        frames[k] = f
        ids[k] = i
        boxes[k] = (b.x, b.y, b.w, b.h)
    order = np.lexsort((ids, frames))
    frames, ids, boxes = frames[order], ids[order], boxes[order]
    unique_ids, compact = np.unique(ids, return_inverse=True)
    return frames, compact.astype(np.int64), unique_ids.tolist(), boxes


class _PairIndex:
    """Per-frame id arrays and IoU matrices shared by every metric family.

    Matchings are cached per frame keyed by the admissibility mask, so a
    threshold sweep only pays for distinct masks.
    """

    def __init__(self, gt: TrajectorySet, pr: TrajectorySet):
        g_frames, g_comp, self.gt_ids, g_boxes = _side_arrays(gt)
        p_frames, p_comp, self.pr_ids, p_boxes = _side_arrays(pr)
        self.num_gt = len(gt.entries)
        self.num_pr = len(pr.entries)
        self.gt_count = np.bincount(g_comp, minlength=len(self.gt_ids)).astype(np.float64)
        self.pr_count = np.bincount(p_comp, minlength=len(self.pr_ids)).astype(np.float64)

        frames = np.union1d(g_frames, p_frames) if (len(g_frames) or len(p_frames)) else np.empty(0, np.int64)
        self.frames = frames.tolist()
        g_bounds = np.searchsorted(g_frames, frames, side="left")
        g_ends = np.searchsorted(g_frames, frames, side="right")
        p_bounds = np.searchsorted(p_frames, frames, side="left")
        p_ends = np.searchsorted(p_frames, frames, side="right")
        self.f_gt: list[np.ndarray] = []
        self.f_pr: list[np.ndarray] = []
        self.iou: list[np.ndarray] = []
        for k in range(len(frames)):
            g_slice = slice(g_bounds[k], g_ends[k])
            p_slice = slice(p_bounds[k], p_ends[k])
            self.f_gt.append(g_comp[g_slice])
            self.f_pr.append(p_comp[p_slice])
            self.iou.append(iou_matrix(g_boxes[g_slice], p_boxes[p_slice]))
        self._cache: list[dict[bytes, tuple[np.ndarray, np.ndarray]]] = [
            {} for _ in self.frames
        ]

    def match(self, fi: int, mask: np.ndarray, key: bytes) -> tuple[np.ndarray, np.ndarray]:
        """Row/col index arrays of the optimal matching under the mask."""
        cached = self._cache[fi].get(key)
        if cached is not None:
            return cached
        if not mask.any():
            out = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
        elif (mask.sum(axis=1) <= 1).all() and (mask.sum(axis=0) <= 1).all():
            # Admissible cells form a partial permutation: taking all of
            # them is the unique maximum matching, no solve needed.
            out = np.nonzero(mask)
        else:
            # Rows and columns without any admissible cell can never match;
            # dropping them keeps the solver small.
            rows_ok = np.flatnonzero(mask.any(axis=1))
            cols_ok = np.flatnonzero(mask.any(axis=0))
            sub_mask = mask[np.ix_(rows_ok, cols_ok)]
            result = solve_min_cost(
                -self.iou[fi][np.ix_(rows_ok, cols_ok)], forbid=~sub_mask
            )
            rows = rows_ok[[r for r, _ in result.pairs]]
            cols = cols_ok[[c for _, c in result.pairs]]
            out = (rows, cols)
        self._cache[fi][key] = out
        return out


def _require_gt(gt: TrajectorySet) -> None:
    if not gt.entries:
        raise EmptyGroundTruth("ground truth has no detections; scores are undefined")


def frame_match(gt: TrajectorySet, pr: TrajectorySet, loc_threshold: float) -> MatchSet:
    """Per-frame matching of predictions to ground truth at one threshold."""
    idx = _PairIndex(gt, pr)
    tps: list[TPRecord] = []
    fns: dict[int, int] = {}
    fps: dict[int, int] = {}
    for fi, frame in enumerate(idx.frames):
        iou = idx.iou[fi]
        mask = iou >= loc_threshold
        rows, cols = idx.match(fi, mask, mask.tobytes())
        for r, c in zip(rows, cols):
            tps.append(
                TPRecord(
                    frame=frame,
                    pr_id=idx.pr_ids[idx.f_pr[fi][c]],
                    gt_id=idx.gt_ids[idx.f_gt[fi][r]],
                    loc_score=float(iou[r, c]),
                )
            )
        n_match = len(rows)
        if len(idx.f_gt[fi]) - n_match:
            fns[frame] = len(idx.f_gt[fi]) - n_match
        if len(idx.f_pr[fi]) - n_match:
            fps[frame] = len(idx.f_pr[fi]) - n_match
    return MatchSet(loc_threshold, tps, fns, fps)


def compute_tp_prime(ms: MatchSet) -> list[TPRecord]:
    """Subset of TPs whose (pr, gt) pairing is consistent with all earlier TPs.

    TPs within one frame do not constrain each other. Once an id has been
    seen with two different partners, every later TP involving it is
    excluded.
    """
    pr_partner: dict[int, int | None] = {}
    gt_partner: dict[int, int | None] = {}
    kept: list[TPRecord] = []
    by_frame: dict[int, list[TPRecord]] = {}
    for tp in ms.tps:
        by_frame.setdefault(tp.frame, []).append(tp)
    for frame in sorted(by_frame):
        batch = by_frame[frame]
        for tp in batch:
            p_ok = pr_partner.get(tp.pr_id, tp.gt_id) == tp.gt_id
            g_ok = gt_partner.get(tp.gt_id, tp.pr_id) == tp.pr_id
            if p_ok and g_ok:
                kept.append(tp)
        for tp in batch:
            if pr_partner.get(tp.pr_id, tp.gt_id) != tp.gt_id:
                pr_partner[tp.pr_id] = None  # conflicting history, never matches again
            else:
                pr_partner[tp.pr_id] = tp.gt_id
            if gt_partner.get(tp.gt_id, tp.pr_id) != tp.pr_id:
                gt_partner[tp.gt_id] = None
            else:
                gt_partner[tp.gt_id] = tp.pr_id
    return kept


def association_counts(
    gt: TrajectorySet, pr: TrajectorySet, ms: MatchSet
) -> list[AssociationCounts]:
    """TPA/FNA/FPA for every TP of a MatchSet, in the same order."""
    pair_count: dict[tuple[int, int], int] = {}
    for tp in ms.tps:
        pair_count[(tp.gt_id, tp.pr_id)] = pair_count.get((tp.gt_id, tp.pr_id), 0) + 1
    gt_total: dict[int, int] = {}
    for _, i in gt.entries:
        gt_total[i] = gt_total.get(i, 0) + 1
    pr_total: dict[int, int] = {}
    for _, i in pr.entries:
        pr_total[i] = pr_total.get(i, 0) + 1
    out = []
    for tp in ms.tps:
        tpa = pair_count[(tp.gt_id, tp.pr_id)]
        out.append(
            AssociationCounts(
                tpa=tpa,
                fna=gt_total[tp.gt_id] - tpa,
                fpa=pr_total[tp.pr_id] - tpa,
            )
        )
    return out


@dataclass
class _AssocAccum:
    """One pass over the frames accumulating HOTA and TGRHOTA jointly."""

    thresholds: np.ndarray
    tp: np.ndarray = field(init=False)
    fn: np.ndarray = field(init=False)
    fp: np.ndarray = field(init=False)
    assa_sum: np.ndarray = field(init=False)
    asspr_sum: np.ndarray = field(init=False)
    assre_sum: np.ndarray = field(init=False)
    tp_prime: np.ndarray = field(init=False)
    assa_prime_sum: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        a = len(self.thresholds)
        for name in ("tp", "fn", "fp", "tp_prime"):
            setattr(self, name, np.zeros(a))
        for name in ("assa_sum", "asspr_sum", "assre_sum", "assa_prime_sum"):
            setattr(self, name, np.zeros(a))


def _assoc_pass(idx: _PairIndex, thresholds: np.ndarray) -> _AssocAccum:
    acc = _AssocAccum(thresholds)
    n_alpha = len(thresholds)
    n_g, n_p = len(idx.gt_ids), len(idx.pr_ids)
    match_cnt = np.zeros((n_alpha, n_g, n_p))
    retained_cnt = np.zeros((n_alpha, n_g, n_p))
    # Partner history per threshold: -1 never seen, -2 conflicting.
    pr_partner = np.full((n_alpha, n_p), -1, dtype=np.int64)
    gt_partner = np.full((n_alpha, n_g), -1, dtype=np.int64)

    for fi in range(len(idx.frames)):
        g_idx, p_idx = idx.f_gt[fi], idx.f_pr[fi]
        n_gf, n_pf = len(g_idx), len(p_idx)
        if not (n_gf and n_pf):
            acc.fn += n_gf
            acc.fp += n_pf
            continue
        # Thresholds ascending shrink the admissible mask monotonically, so
        # equal masks sit in consecutive runs; each run shares one matching
        # and is accumulated as a block.
        masks = idx.iou[fi][None, :, :] >= thresholds[:, None, None]
        keys = [masks[a].tobytes() for a in range(n_alpha)]
        start = 0
        while start < n_alpha:
            stop = start + 1
            while stop < n_alpha and keys[stop] == keys[start]:
                stop += 1
            rows, cols = idx.match(fi, masks[start], keys[start])
            k = len(rows)
            block = slice(start, stop)
            acc.tp[block] += k
            acc.fn[block] += n_gf - k
            acc.fp[block] += n_pf - k
            if k:
                gg = g_idx[rows]
                pp = p_idx[cols]
                old_p = pr_partner[block, pp]
                old_g = gt_partner[block, gg]
                p_ok = (old_p == -1) | (old_p == gg[None, :])
                g_ok = (old_g == -1) | (old_g == pp[None, :])
                retained = p_ok & g_ok
                # (gg, pp) pairs are distinct within a frame, so plain fancy
                # indexing accumulates correctly.
                match_cnt[block, gg, pp] += 1.0
                retained_cnt[block, gg, pp] += retained
                acc.tp_prime[block] += retained.sum(axis=1)
                pr_partner[block, pp] = np.where(p_ok, gg[None, :], -2)
                gt_partner[block, gg] = np.where(g_ok, pp[None, :], -2)
            start = stop

    denom = idx.gt_count[None, :, None] + idx.pr_count[None, None, :] - match_cnt
    with np.errstate(invalid="ignore", divide="ignore"):
        score = np.where(denom > 0, match_cnt / np.maximum(denom, 1e-300), 0.0)
        pr_frac = np.where(
            idx.pr_count[None, None, :] > 0, match_cnt / np.maximum(idx.pr_count[None, None, :], 1e-300), 0.0
        )
        gt_frac = np.where(
            idx.gt_count[None, :, None] > 0, match_cnt / np.maximum(idx.gt_count[None, :, None], 1e-300), 0.0
        )
    acc.assa_sum = (match_cnt * score).sum(axis=(1, 2))
    acc.asspr_sum = (match_cnt * pr_frac).sum(axis=(1, 2))
    acc.assre_sum = (match_cnt * gt_frac).sum(axis=(1, 2))
    acc.assa_prime_sum = (retained_cnt * score).sum(axis=(1, 2))
    return acc


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _hota_from_accum(acc: _AssocAccum) -> HotaScores:
    deta = _safe_div(acc.tp, acc.tp + acc.fn + acc.fp)
    assa = _safe_div(acc.assa_sum, acc.tp)
    asspr = _safe_div(acc.asspr_sum, acc.tp)
    assre = _safe_div(acc.assre_sum, acc.tp)
    return HotaScores(
        thresholds=acc.thresholds,
        deta=deta,
        assa=assa,
        asspr=asspr,
        assre=assre,
        hota=np.sqrt(deta * assa),
        tp=acc.tp,
        fn=acc.fn,
        fp=acc.fp,
        assa_sum=acc.assa_sum,
        asspr_sum=acc.asspr_sum,
        assre_sum=acc.assre_sum,
    )


def _tgrhota_from_accum(acc: _AssocAccum) -> TgrhotaScores:
    deta = _safe_div(acc.tp, acc.tp + acc.fn + acc.fp)
    assa_prime = _safe_div(acc.assa_prime_sum, acc.tp_prime)
    degenerate = bool(((acc.tp_prime == 0) & (acc.tp > 0)).any())
    return TgrhotaScores(
        thresholds=acc.thresholds,
        deta=deta,
        assa_prime=assa_prime,
        tgrhota=np.sqrt(deta * assa_prime),
        tp_prime=acc.tp_prime,
        assa_prime_sum=acc.assa_prime_sum,
        degenerate_tp_prime=degenerate,
    )


def compute_hota(
    gt: TrajectorySet, pr: TrajectorySet, thresholds: np.ndarray | None = None
) -> HotaScores:
    """DetA, AssA, AssPr, AssRe, HOTA per threshold and grid-averaged."""
    _require_gt(gt)
    thresholds = DEFAULT_GRID if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    return _hota_from_accum(_assoc_pass(_PairIndex(gt, pr), thresholds))


def compute_tgrhota(
    gt: TrajectorySet, pr: TrajectorySet, thresholds: np.ndarray | None = None
) -> TgrhotaScores:
    """AssA' and TGRHOTA: association averaged over TP' instead of TP."""
    _require_gt(gt)
    thresholds = DEFAULT_GRID if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    return _tgrhota_from_accum(_assoc_pass(_PairIndex(gt, pr), thresholds))


def compute_clear(gt: TrajectorySet, pr: TrajectorySet) -> ClearScores:
    """MOTA family at localization threshold 0.5.

    An id switch is counted when a ground-truth id's matched prediction id
    differs from its most recent previous one; gaps do not reset the
    reference. MOTP is the mean IoU over TPs (0 when there are none).
    """
    _require_gt(gt)
    return _clear_from_index(_PairIndex(gt, pr))


def compute_idf1(gt: TrajectorySet, pr: TrajectorySet) -> IdScores:
    """Identity F1 under the best global one-to-one pairing of trajectories.

    A frame counts toward IDTP when the paired boxes are both present with
    IoU >= 0.5; the pairing maximizes total IDTP.
    """
    _require_gt(gt)
    return _idf1_from_index(_PairIndex(gt, pr))


def evaluate_sequence(
    gt: TrajectorySet,
    pr: TrajectorySet,
    thresholds: np.ndarray | None = None,
    families: tuple[str, ...] = METRIC_FAMILIES,
) -> dict[str, float]:
    """All requested metric families for one sequence, sharing one index."""
    _require_gt(gt)
    for fam in families:
        if fam not in METRIC_FAMILIES:
            raise ValueError(f"unknown metric family {fam!r}")
    thresholds = DEFAULT_GRID if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    idx = _PairIndex(gt, pr)
    out: dict[str, float] = {}

    if "hota" in families or "tgrhota" in families:
        acc = _assoc_pass(idx, thresholds)
        if "hota" in families:
            h = _hota_from_accum(acc)
            out.update(
                DetA=h.DetA, AssA=h.AssA, AssPr=h.AssPr, AssRe=h.AssRe, HOTA=h.HOTA
            )
        if "tgrhota" in families:
            t = _tgrhota_from_accum(acc)
            out.update(AssAPrime=t.AssAPrime, TGRHOTA=t.TGRHOTA)
            if "hota" not in families:
                out["DetA"] = t.DetA

    if "mota" in families:
        clear = _clear_from_index(idx)
        out.update(
            MOTA=clear.mota, MOTP=clear.motp, FP=float(clear.fp), FN=float(clear.fn),
            IDSW=float(clear.idsw),
        )
    if "idf1" in families:
        ids = _idf1_from_index(idx)
        out.update(
            IDF1=ids.idf1, IDTP=float(ids.idtp), IDFP=float(ids.idfp), IDFN=float(ids.idfn)
        )
    return out


def build_report(
    sequences: dict[str, tuple[TrajectorySet, TrajectorySet]],
    thresholds: np.ndarray | None = None,
    families: tuple[str, ...] = METRIC_FAMILIES,
    config: dict[str, object] | None = None,
) -> MetricReport:
    """Per-sequence scores plus a combined row under the ALL key.

    Count-based metrics aggregate by summing; HOTA-family scores combine
    per threshold with TP-weighted association averages, the convention
    used by the reference tooling for multi-sequence results.
    """
    thresholds = DEFAULT_GRID if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    report = MetricReport(config=dict(config or {}))
    report.config.setdefault("loc_grid", ",".join(f"{t:g}" for t in thresholds))

    accums: list[_AssocAccum] = []
    clears: list[ClearScores] = []
    idss: list[IdScores] = []
    degenerate = False
    for name, (gt, pr) in sequences.items():
        _require_gt(gt)
        idx = _PairIndex(gt, pr)
        row: dict[str, float] = {}
        if "hota" in families or "tgrhota" in families:
            acc = _assoc_pass(idx, thresholds)
            accums.append(acc)
            if "hota" in families:
                h = _hota_from_accum(acc)
                row.update(DetA=h.DetA, AssA=h.AssA, AssPr=h.AssPr, AssRe=h.AssRe, HOTA=h.HOTA)
            if "tgrhota" in families:
                t = _tgrhota_from_accum(acc)
                degenerate |= t.degenerate_tp_prime
                row.update(AssAPrime=t.AssAPrime, TGRHOTA=t.TGRHOTA)
                row.setdefault("DetA", t.DetA)
        if "mota" in families:
            clear = _clear_from_index(idx)
            clears.append(clear)
            row.update(
                MOTA=clear.mota, MOTP=clear.motp, FP=float(clear.fp),
                FN=float(clear.fn), IDSW=float(clear.idsw),
            )
        if "idf1" in families:
            ids = _idf1_from_index(idx)
            idss.append(ids)
            row.update(
                IDF1=ids.idf1, IDTP=float(ids.idtp), IDFP=float(ids.idfp), IDFN=float(ids.idfn)
            )
        report.per_sequence[name] = row

    agg: dict[str, float] = {}
    if accums:
        tp = sum(a.tp for a in accums)
        fn = sum(a.fn for a in accums)
        fp = sum(a.fp for a in accums)
        deta = _safe_div(tp, tp + fn + fp)
        if "hota" in families:
            assa = _safe_div(sum(a.assa_sum for a in accums), tp)
            asspr = _safe_div(sum(a.asspr_sum for a in accums), tp)
            assre = _safe_div(sum(a.assre_sum for a in accums), tp)
            agg.update(
                DetA=float(deta.mean()),
                AssA=float(assa.mean()),
                AssPr=float(asspr.mean()),
                AssRe=float(assre.mean()),
                HOTA=float(np.sqrt(deta * assa).mean()),
            )
        if "tgrhota" in families:
            tpp = sum(a.tp_prime for a in accums)
            assa_p = _safe_div(sum(a.assa_prime_sum for a in accums), tpp)
            agg.setdefault("DetA", float(deta.mean()))
            agg.update(
                AssAPrime=float(assa_p.mean()),
                TGRHOTA=float(np.sqrt(deta * assa_p).mean()),
            )
    if clears:
        fp_c = sum(c.fp for c in clears)
        fn_c = sum(c.fn for c in clears)
        idsw = sum(c.idsw for c in clears)
        num_gt = sum(c.num_gt for c in clears)
        tp_c = num_gt - fn_c
        motp_num = sum(c.motp * (c.num_gt - c.fn) for c in clears)
        agg.update(
            MOTA=1.0 - (fp_c + fn_c + idsw) / num_gt,
            MOTP=motp_num / tp_c if tp_c else 0.0,
            FP=float(fp_c), FN=float(fn_c), IDSW=float(idsw),
        )
    if idss:
        idtp = sum(i.idtp for i in idss)
        idfp = sum(i.idfp for i in idss)
        idfn = sum(i.idfn for i in idss)
        agg.update(
            IDF1=2 * idtp / (2 * idtp + idfp + idfn) if idtp + idfp + idfn else 0.0,
            IDTP=float(idtp), IDFP=float(idfp), IDFN=float(idfn),
        )
    report.aggregate = agg
    report.flags["degenerate_tp_prime"] = degenerate
    return report


def _clear_from_index(idx: _PairIndex) -> ClearScores:
    fp = fn = idsw = tp = 0
    iou_total = 0.0
    last_pr: dict[int, int] = {}
    for fi in range(len(idx.frames)):
        g_idx, p_idx = idx.f_gt[fi], idx.f_pr[fi]
        if len(g_idx) and len(p_idx):
            mask = idx.iou[fi] >= CLEAR_THRESHOLD
            rows, cols = idx.match(fi, mask, mask.tobytes())
        else:
            rows = cols = np.empty(0, dtype=np.int64)
        k = len(rows)
        tp += k
        fn += len(g_idx) - k
        fp += len(p_idx) - k
        for r, c in zip(rows, cols):
            gid = idx.gt_ids[g_idx[r]]
            pid = idx.pr_ids[p_idx[c]]
            iou_total += float(idx.iou[fi][r, c])
            if gid in last_pr and last_pr[gid] != pid:
                idsw += 1
            last_pr[gid] = pid
    mota = 1.0 - (fp + fn + idsw) / idx.num_gt
    motp = iou_total / tp if tp else 0.0
    return ClearScores(mota=mota, motp=motp, fp=fp, fn=fn, idsw=idsw, num_gt=idx.num_gt)


def _idf1_from_index(idx: _PairIndex) -> IdScores:
    n_g, n_p = len(idx.gt_ids), len(idx.pr_ids)
    if n_p == 0:
        return IdScores(idf1=0.0, idtp=0, idfp=0, idfn=idx.num_gt)
    overlap = np.zeros((n_g, n_p))
    for fi in range(len(idx.frames)):
        g_idx, p_idx = idx.f_gt[fi], idx.f_pr[fi]
        if len(g_idx) and len(p_idx):
            overlap[np.ix_(g_idx, p_idx)] += idx.iou[fi] >= CLEAR_THRESHOLD
    result = solve_min_cost(-overlap)
    idtp = int(round(sum(overlap[g, p] for g, p in result.pairs)))
    idfp = idx.num_pr - idtp
    idfn = idx.num_gt - idtp
    return IdScores(idf1=2 * idtp / (2 * idtp + idfp + idfn), idtp=idtp, idfp=idfp, idfn=idfn)
