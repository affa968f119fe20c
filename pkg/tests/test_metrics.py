from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from coexsim.metrics import DuplicateRecordError, MetricsCollector, RxRecord
from coexsim.phy import Outcome

S = 1_000_000


def collector(delays, outcome=Outcome.DELIVERED, payload=105, gap=S):
    c = MetricsCollector()
    for i, d in enumerate(delays):
        c.frame_sent()
        c.record(RxRecord(i, outcome, payload, i * gap, i * gap + d))
    return c


def test_corrupted_frame_counts_bytes():
    c = collector([4000], outcome=Outcome.CORRUPTED)
    s = c.summarize(100 * S)
    assert (s.frames_with_errors, s.bytes_with_errors, s.delivered) == (1, 105, 0)


def test_delivered_frame_counts():
    s = collector([4000]).summarize(100 * S)
    assert s.delivered == 1 and s.frames_with_errors == 0


def test_not_received_is_neither():
    s = collector([4000], outcome=Outcome.NOT_RECEIVED).summarize(S)
    assert (s.delivered, s.frames_with_errors, s.not_received) == (0, 0, 1)


def test_duplicate_frame_is_an_error():
    c = collector([1000])
    with pytest.raises(DuplicateRecordError):
        c.record(RxRecord(0, Outcome.DELIVERED, 105, 0, 10))


def test_empty_summary_is_flagged():
    s = MetricsCollector().summarize(100 * S)
    assert s.empty
    assert (s.throughput_bps, s.avg_e2e_delay_s, s.avg_jitter_s) == (0, 0, 0)


def test_delay_and_jitter_example():
    s = collector([2000, 3000]).summarize(10 * S)
    assert s.avg_e2e_delay_s == Fraction(25, 10_000)
    assert s.avg_jitter_s == Fraction(1, 1000)


def test_throughput_example():
    # [DERIVED] 100 * 105 * 8 / 100
    s = collector([4000] * 100).summarize(100 * S)
    assert s.throughput_bps == 840


def test_single_delivery_has_zero_jitter():
    assert collector([5000]).summarize(S).avg_jitter_s == 0


def test_jitter_follows_arrival_order():
    c = MetricsCollector()
    # frame 0 is created first but arrives last
    c.record(RxRecord(0, Outcome.DELIVERED, 1, 0, 9000))
    c.record(RxRecord(1, Outcome.DELIVERED, 1, 1000, 2000))
    c.record(RxRecord(2, Outcome.DELIVERED, 1, 3000, 5000))
    # arrival order delays: 1000, 2000, 9000
    assert c.summarize(S).avg_jitter_s == Fraction(1000 + 7000, 2 * S)


def test_record_must_not_precede_creation():
    with pytest.raises(ValueError):
        RxRecord(0, Outcome.DELIVERED, 1, 10, 5)


def test_duration_must_be_positive():
    with pytest.raises(ValueError):
        MetricsCollector().summarize(0)


outcomes = st.sampled_from(list(Outcome))
records = st.lists(st.tuples(outcomes, st.integers(0, 2000), st.integers(0, 10 ** 6)),
                   max_size=40)


@given(records, st.integers(1, 10 ** 9))
def test_throughput_identity_is_exact(recs, duration):
    c = MetricsCollector()
    for i, (out, payload, delay) in enumerate(recs):
        c.frame_sent()
        c.record(RxRecord(i, out, payload, i * 10, i * 10 + delay))
    s = c.summarize(duration)
    assert s.throughput_bps * duration == 8 * s.delivered_bytes * S
    assert s.delivered + s.frames_with_errors <= s.sent
    assert min(s.throughput_bps, s.avg_e2e_delay_s, s.avg_jitter_s) >= 0


@given(st.lists(st.integers(0, 10 ** 5), min_size=1, max_size=30), st.integers(1, 50))
def test_scaling_delays_scales_delay_and_jitter(delays, k):
    a = collector(delays, gap=10 ** 7).summarize(S)
    b = collector([k * d for d in delays], gap=10 ** 7).summarize(S)
    assert b.avg_e2e_delay_s == k * a.avg_e2e_delay_s
    assert b.avg_jitter_s == k * a.avg_jitter_s


@given(records)
def test_counts_do_not_depend_on_insertion_order(recs):
    def summary(order):
        c = MetricsCollector()
        for i in order:
            out, payload, delay = recs[i]
            c.record(RxRecord(i, out, payload, i * 10, i * 10 + delay))
        return c.summarize(S)

    fwd = summary(range(len(recs)))
    rev = summary(reversed(range(len(recs))))
    assert fwd == rev
