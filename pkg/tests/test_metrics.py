import pytest
from hypothesis import given, strategies as st

from dshrpl.metrics import (ConfusionCounts, MetricsRow, detection_rate, false_negative_rate,
                            false_positive_rate, packet_delivery_rate)


def test_detection_rate():
    assert detection_rate(ConfusionCounts(tp=9, fn=1)) == 90.0
    assert detection_rate(ConfusionCounts(tp=5)) == 100.0
    assert detection_rate(ConfusionCounts(tn=4)) is None


def test_false_positive_rate():
    assert false_positive_rate(ConfusionCounts(fp=2, tn=8)) == 20.0
    assert false_positive_rate(ConfusionCounts(tn=8)) == 0.0
    assert false_positive_rate(ConfusionCounts(tp=1)) is None


def test_false_negative_rate():
    assert false_negative_rate(ConfusionCounts(fn=1, tp=9)) == 10.0
    assert false_negative_rate(ConfusionCounts(tp=3)) == 0.0
    assert false_negative_rate(ConfusionCounts()) is None


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_dr_and_fnr_are_complements(tp, fn):
    c = ConfusionCounts(tp=tp, fn=fn)
    if tp + fn:
        assert detection_rate(c) + false_negative_rate(c) == pytest.approx(100.0, abs=1e-12)


def test_packet_delivery_rate():
    assert packet_delivery_rate({1: 30, 2: 20}, {1: 27, 2: 18}) == 90.0
    assert packet_delivery_rate({1: 4}, {1: 4}) == 100.0
    assert packet_delivery_rate({}, {}) is None
    assert packet_delivery_rate({1: 0}, {}) is None
    with pytest.raises(ValueError):
        packet_delivery_rate({1: 2}, {1: 3})


def test_classify_and_sum():
    c = ConfusionCounts.classify(attackers=[3, 4], honest=[1, 2, 5], quarantined=[3, 5])
    assert c == ConfusionCounts(tp=1, tn=2, fp=1, fn=1)
    assert c + c == ConfusionCounts(2, 4, 2, 2)
    assert false_positive_rate(ConfusionCounts.classify([3], [1, 2], [3])) == 0.0
    with pytest.raises(ValueError):
        ConfusionCounts(tp=-1)


def test_row_bounds():
    with pytest.raises(ValueError):
        MetricsRow(1, 2.0, "off", 1, 101.0, None, None, None)
    row = MetricsRow.from_counts(1, 2.0, "off", 1, ConfusionCounts(tp=1, tn=3), {1: 4}, {1: 2})
    assert (row.dr, row.fpr, row.fnr, row.pdr) == (100.0, 0.0, 0.0, 50.0)
