import pytest

from tgrmpt.core import BoundingBox, Detection, Kind
from tgrmpt.errors import MixedFrames, WrongKind
from tgrmpt.fusion import pair_detections


def wb(x, y, w, h, det_id, frame=1):
    return Detection(frame=frame, kind=Kind.WB, box=BoundingBox(x, y, w, h), confidence=0.9, det_id=det_id)


def hs(x, y, w, h, det_id, frame=1):
    return Detection(frame=frame, kind=Kind.HS, box=BoundingBox(x, y, w, h), confidence=0.9, det_id=det_id)


def test_full_containment_pairs():
    result = pair_detections([wb(0, 0, 10, 20, 1)], [hs(2, 0, 5, 8, 1)], min_containment=0.5)
    assert len(result.matched) == 1
    assert result.unmatched_wb == [] and result.discarded_hs == []


def test_lonely_hs_is_discarded():
    result = pair_detections([], [hs(0, 0, 5, 5, 1)])
    assert result.matched == [] and len(result.discarded_hs) == 1


def test_derived_two_by_two_pairing():
    # Overlapping wb boxes A (x 0..10) and B (x 4..14) with two wide hs
    # strips give containments (A,a)=0.9, (B,a)=0.5, (A,b)=0.7, (B,b)=0.9.
    # Enumerating both pairings: 0.9 + 0.9 = 1.8 beats 0.7 + 0.5 = 1.2.
    A, B = wb(0, 0, 10, 10, 1), wb(4, 0, 10, 10, 2)
    a = hs(-1, 0, 10, 2, 11)
    b = hs(3, 0, 10, 2, 12)
    result = pair_detections([A, B], [a, b], min_containment=0.0)
    pairs = {(dw.det_id, dh.det_id) for dw, dh in result.matched}
    assert pairs == {(1, 11), (2, 12)}


def test_threshold_dissolves_pairs():
    result = pair_detections([wb(0, 0, 10, 10, 1)], [hs(8, 0, 10, 2, 11)], min_containment=0.5)
    assert result.matched == []
    assert [d.det_id for d in result.unmatched_wb] == [1]
    assert [d.det_id for d in result.discarded_hs] == [11]


def test_partition_invariant():
    wbs = [wb(0, 0, 10, 10, 1), wb(30, 0, 10, 10, 2), wb(60, 0, 10, 10, 3)]
    hss = [hs(2, 0, 5, 5, 11), hs(31, 0, 5, 5, 12), hs(90, 0, 5, 5, 13)]
    result = pair_detections(wbs, hss, min_containment=0.5)
    matched_wb = {dw.det_id for dw, _ in result.matched}
    matched_hs = {dh.det_id for _, dh in result.matched}
    assert matched_wb | {d.det_id for d in result.unmatched_wb} == {1, 2, 3}
    assert matched_hs | {d.det_id for d in result.discarded_hs} == {11, 12, 13}
    assert len(matched_wb) == len(result.matched)


def test_monotone_threshold():
    wbs = [wb(0, 0, 10, 10, 1), wb(8, 0, 10, 10, 2)]
    hss = [hs(1, 0, 6, 4, 11), hs(9, 0, 6, 4, 12)]
    sizes = [
        len(pair_detections(wbs, hss, min_containment=t).matched)
        for t in (0.0, 0.3, 0.6, 0.9, 1.0)
    ]
    assert sizes == sorted(sizes, reverse=True)


def test_equal_counts_full_matching_at_zero_threshold():
    wbs = [wb(i * 50, 0, 10, 10, i) for i in range(1, 4)]
    hss = [hs(i * 50 + 100, 0, 5, 5, 10 + i) for i in range(1, 4)]
    result = pair_detections(wbs, hss, min_containment=0.0)
    assert len(result.matched) == 3


def test_mixed_frames_rejected():
    with pytest.raises(MixedFrames):
        pair_detections([wb(0, 0, 5, 5, 1, frame=1)], [hs(0, 0, 2, 2, 2, frame=2)])


def test_wrong_kind_rejected():
    with pytest.raises(WrongKind):
        pair_detections([hs(0, 0, 5, 5, 1)], [])
    with pytest.raises(WrongKind):
        pair_detections([], [wb(0, 0, 5, 5, 1)])
