"""Reception records at the PAN coordinator and the four per-run metrics."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List

from .engine import US_PER_S
from .phy import Outcome


class DuplicateRecordError(ValueError):
    pass


@dataclass(frozen=True)
class RxRecord:
    frame_id: int
    outcome: Outcome
    payload_bytes: int
    created_at: int
    rx_end: int

    def __post_init__(self):
        if self.rx_end < self.created_at:
            raise ValueError("frame received before it was created")

    @property
    def delay(self) -> int:
        return self.rx_end - self.created_at


@dataclass(frozen=True)
class MetricsSummary:
    sent: int
    delivered: int
    frames_with_errors: int
    bytes_with_errors: int
    delivered_bytes: int
    throughput_bps: Fraction
    avg_e2e_delay_s: Fraction
    avg_jitter_s: Fraction
    not_received: int = 0
    dropped: int = 0
    empty: bool = False

    def as_row(self) -> dict:
        return {
            "sent": self.sent,
            "delivered": self.delivered,
            "frames_with_errors": self.frames_with_errors,
            "bytes_with_errors": self.bytes_with_errors,
            "throughput_bps": self.throughput_bps,
            "avg_e2e_delay_s": self.avg_e2e_delay_s,
            "avg_jitter_s": self.avg_jitter_s,
        }


class MetricsCollector:
    """Accumulates one record per frame received at the coordinator."""

    def __init__(self):
        self.records: Dict[int, RxRecord] = {}
        self.sent = 0
        self.dropped = 0

    def frame_sent(self) -> None:
        self.sent += 1

    def frame_dropped(self) -> None:
        self.dropped += 1

    def record(self, rec: RxRecord) -> None:
        if rec.frame_id in self.records:
            raise DuplicateRecordError(f"frame {rec.frame_id} already recorded")
        self.records[rec.frame_id] = rec

    def summarize(self, duration: int) -> MetricsSummary:
        """Compute the metrics over ``duration`` microseconds of simulated time."""
        if duration <= 0:
            raise ValueError("duration must be positive")
        delivered: List[RxRecord] = []
        errors = error_bytes = missing = 0
        for rec in self.records.values():
            if rec.outcome is Outcome.DELIVERED:
                delivered.append(rec)
            elif rec.outcome is Outcome.CORRUPTED:
                errors += 1
                error_bytes += rec.payload_bytes
            else:
                missing += 1
        delivered.sort(key=lambda r: (r.rx_end, r.frame_id))
        delivered_bytes = sum(r.payload_bytes for r in delivered)
        delays = [r.delay for r in delivered]
        if delays:
            avg_delay = Fraction(sum(delays), len(delays) * US_PER_S)
        else:
            avg_delay = Fraction(0)
        if len(delays) > 1:
            diffs = [abs(b - a) for a, b in zip(delays, delays[1:])]
            jitter = Fraction(sum(diffs), len(diffs) * US_PER_S)
        else:
            jitter = Fraction(0)
        return MetricsSummary(
            sent=self.sent,
            delivered=len(delivered),
            frames_with_errors=errors,
            bytes_with_errors=error_bytes,
            delivered_bytes=delivered_bytes,
            throughput_bps=Fraction(8 * delivered_bytes * US_PER_S, duration),
            avg_e2e_delay_s=avg_delay,
            avg_jitter_s=jitter,
            not_received=missing,
            dropped=self.dropped,
            empty=not delivered,
        )
