"""Discrete-event core: integer microsecond clock and a (time, seq) ordered queue."""

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

US_PER_S = 1_000_000


def seconds(value: float) -> int:
    """Convert seconds to the integer microsecond clock unit."""
    return int(round(value * US_PER_S))


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


class EventKind(Enum):
    TX_START = "tx-start"
    TX_END = "tx-end"
    BACKOFF_EXPIRE = "backoff-expire"
    CCA_SAMPLE = "cca-sample"
    DIFS_END = "difs-end"
    TRAFFIC_FIRE = "traffic-fire"
    SIM_END = "sim-end"


@dataclass(order=True)
class SimEvent:
    time: int
    seq: int
    target: Any = field(compare=False)
    kind: EventKind = field(compare=False)
    payload: Any = field(default=None, compare=False)
    cancelled: bool = field(default=False, compare=False)


Handler = Callable[[SimEvent], None]


class Simulator:
    """Single-threaded event loop.

    Handlers are registered per target id; each dispatched event goes to the
    handler of its target. Cancellation marks the event dead and it is
    skipped when popped.
    """

    def __init__(self):
        self._queue: List[SimEvent] = []
        self._live: Dict[int, SimEvent] = {}
        self._handlers: Dict[Any, Handler] = {}
        self._seq = 0
        self._now = 0
        self.dispatched = 0

    def now(self) -> int:
        return self._now

    def register(self, target, handler: Handler) -> None:
        self._handlers[target] = handler

    def schedule(self, time: int, target, kind: EventKind, payload=None) -> int:
        if time < self._now:
            raise SchedulingError(
                f"event {kind.value} for {target!r} at {time} us is before clock {self._now} us"
            )
        event = SimEvent(int(time), self._seq, target, kind, payload)
        self._seq += 1
        heapq.heappush(self._queue, event)
        self._live[event.seq] = event
        return event.seq

    def schedule_in(self, delay: int, target, kind: EventKind, payload=None) -> int:
        return self.schedule(self._now + delay, target, kind, payload)

    def cancel(self, event_id: Optional[int]) -> None:
        if event_id is None:
            return
        event = self._live.pop(event_id, None)
        if event is not None:
            event.cancelled = True

    def drop_after(self, time: int) -> int:
        """Discard every queued event later than ``time``; returns how many."""
        late = [e for e in self._queue if e.time > time and not e.cancelled]
        for event in late:
            self.cancel(event.seq)
        return len(late)

    def pending(self) -> int:
        return len(self._live)

    def run_until(self, end: int) -> int:
        """Dispatch every event with time <= end; later events stay queued."""
        count = 0
        while self._queue and self._queue[0].time <= end:
            event = heapq.heappop(self._queue)
            if event.cancelled:
                continue
            del self._live[event.seq]
            self._now = event.time
            handler = self._handlers.get(event.target)
            if handler is not None:
                handler(event)
            count += 1
        self._now = max(self._now, end)
        self.dispatched += count
        return count
