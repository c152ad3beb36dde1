import numpy as np
import pytest

from tgrmpt.core import (
    BoundingBox,
    Detection,
    Embedding,
    Kind,
    Role,
    TrajectorySet,
    validate_trajectory_set,
)
from tgrmpt.errors import DegenerateBox, DuplicateEntry, NonFiniteValue


def test_empty_set_is_valid():
    validate_trajectory_set(TrajectorySet(Role.GROUND_TRUTH))


def test_duplicate_entry_rejected():
    ts = TrajectorySet(Role.GROUND_TRUTH)
    ts.add(3, 7, BoundingBox(0, 0, 5, 5))
    with pytest.raises(DuplicateEntry):
        ts.add(3, 7, BoundingBox(1, 1, 5, 5))


def test_degenerate_box_rejected():
    with pytest.raises(DegenerateBox):
        BoundingBox(0, 0, -1, 10)
    with pytest.raises(DegenerateBox):
        BoundingBox(0, 0, 10, 0)


def test_non_finite_box_rejected():
    with pytest.raises(NonFiniteValue):
        BoundingBox(float("nan"), 0, 1, 1)
    with pytest.raises(NonFiniteValue):
        BoundingBox(0, float("inf"), 1, 1)


def test_detection_validation():
    box = BoundingBox(0, 0, 5, 5)
    with pytest.raises(ValueError):
        Detection(frame=0, kind=Kind.WB, box=box, confidence=0.5, det_id=1)
    with pytest.raises(ValueError):
        Detection(frame=1, kind=Kind.WB, box=box, confidence=1.5, det_id=1)


def test_embedding_invariants():
    e = Embedding([1.0, 2.0])
    assert e.dim == 2
    with pytest.raises(ValueError):
        Embedding([])
    with pytest.raises(NonFiniteValue):
        Embedding([1.0, float("nan")])
    zero = Embedding([0.0, 0.0])  # legal hs-missing placeholder
    assert zero.dim == 2
    with pytest.raises(ValueError):
        e.values[0] = 9.0  # read-only storage


def test_trajectory_frame_must_be_positive():
    ts = TrajectorySet(Role.PREDICTION)
    with pytest.raises(ValueError):
        ts.add(0, 1, BoundingBox(0, 0, 1, 1))


def test_trajectory_accessors():
    ts = TrajectorySet(Role.GROUND_TRUTH)
    ts.add(2, 5, BoundingBox(0, 0, 1, 1))
    ts.add(1, 4, BoundingBox(0, 0, 1, 1))
    ts.add(2, 4, BoundingBox(3, 3, 1, 1))
    assert ts.frames() == [1, 2]
    assert ts.ids() == [4, 5]
    assert set(ts.at_frame(2)) == {4, 5}
    assert len(ts) == 3
