from __future__ import annotations

import numpy as np
import pytest

from tgrmpt.core import BoundingBox, Role, TrajectorySet


def box(x=0.0, y=0.0, w=10.0, h=10.0) -> BoundingBox:
    return BoundingBox(x, y, w, h)


def trajectory(entries, role=Role.GROUND_TRUTH) -> TrajectorySet:
    """Build a TrajectorySet from (frame, id, x, y, w, h) tuples."""
    ts = TrajectorySet(role)
    for frame, ident, x, y, w, h in entries:
        ts.add(frame, ident, BoundingBox(x, y, w, h))
    return ts


def single_identity_gt(num_frames: int, ident: int = 1) -> TrajectorySet:
    """One identity drifting right, one box per frame, all boxes valid."""
    ts = TrajectorySet(Role.GROUND_TRUTH)
    for f in range(1, num_frames + 1):
        ts.add(f, ident, BoundingBox(10.0 + 2.0 * f, 20.0, 30.0, 60.0))
    return ts


def random_eval_pair(seed: int, max_ids: int = 5, max_frames: int = 50):
    """Random (gt, pr) pair exercising drops, relabels, jitter, and clutter.

    Boxes get continuous jitter so IoU ties have measure zero and every
    matcher agrees on the optimum. Prediction ids are drawn from a small
    pool shared across identities, which produces splits and merges.
    """
    rng = np.random.default_rng(seed)
    n_ids = int(rng.integers(1, max_ids + 1))
    n_frames = int(rng.integers(5, max_frames + 1))
    pr_pool = list(range(101, 101 + n_ids + 3))

    gt = TrajectorySet(Role.GROUND_TRUTH)
    pr = TrajectorySet(Role.PREDICTION)
    for ident in range(1, n_ids + 1):
        x0, y0 = rng.uniform(0, 200, size=2)
        vx, vy = rng.uniform(-3, 3, size=2)
        w, h = rng.uniform(15, 40), rng.uniform(30, 80)
        # Cut the timeline into segments, each relabeled to a pool id.
        n_segs = int(rng.integers(1, 4))
        cuts = sorted(rng.choice(np.arange(2, n_frames + 1), size=n_segs - 1, replace=False).tolist()) if n_segs > 1 else []
        bounds = [1] + cuts + [n_frames + 1]
        seg_ids = [int(rng.choice(pr_pool)) for _ in range(n_segs)]
        for f in range(1, n_frames + 1):
            bx = BoundingBox(x0 + vx * f, y0 + vy * f, w, h)
            gt.add(f, ident, bx)
            if rng.random() < 0.12:
                continue  # dropped detection
            seg = next(k for k in range(n_segs) if bounds[k] <= f < bounds[k + 1])
            dx, dy = rng.normal(0.0, 2.0, size=2)
            pb = BoundingBox(bx.x + dx, bx.y + dy, w, h)
            key = (f, seg_ids[seg])
            if key not in pr.entries:
                pr.add(f, seg_ids[seg], pb)
    # Clutter predictions with ids from the same pool.
    n_clutter = int(rng.integers(0, n_frames // 2 + 1))
    for _ in range(n_clutter):
        f = int(rng.integers(1, n_frames + 1))
        pid = int(rng.choice(pr_pool))
        if (f, pid) in pr.entries:
            continue
        pr.add(
            f,
            pid,
            BoundingBox(rng.uniform(300, 600), rng.uniform(300, 600), rng.uniform(10, 40), rng.uniform(10, 40)),
        )
    return gt, pr


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
