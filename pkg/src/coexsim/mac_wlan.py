"""802.11b DCF basic access for the WLAN interferers.

Frames go out without ACKs, so by default every transmission ends as a
success and the contention window stays at ``cw_min``. A caller that can
infer collisions passes ``collided`` and gets binary exponential backoff up
to ``retry_limit``.

Carrier sense is delivered by the medium through :meth:`on_medium_busy` and
:meth:`on_medium_idle`. A countdown reaching zero transmits even if another
station starts in the same instant; that is the DCF collision case.
"""

import random
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Deque, Optional

from .engine import EventKind, SimEvent, Simulator
from .frame import Frame


@dataclass(frozen=True)
class DcfParams:
    cw_min: int = 31
    cw_max: int = 1023
    slot_us: int = 20
    difs_us: int = 50
    sifs_us: int = 10
    retry_limit: int = 7

    def __post_init__(self):
        if not 0 < self.cw_min < self.cw_max:
            raise ValueError("need 0 < cw_min < cw_max")
        if min(self.slot_us, self.difs_us, self.sifs_us) <= 0:
            raise ValueError("DCF durations must be positive")


class Phase(Enum):
    IDLE = "idle"
    DIFS = "difs"
    BACKOFF = "backoff"
    TRANSMIT = "transmit"


class DcfMac:
    def __init__(self, node_id: int, sim: Simulator, medium_idle: Callable[[], bool],
                 transmit: Callable[[Frame], int], params: DcfParams = DcfParams(),
                 rng_for: Optional[Callable[[Frame], random.Random]] = None,
                 queue_depth: int = 8, collided: Optional[Callable[[Frame], bool]] = None,
                 observer=None):
        self.node_id = node_id
        self.sim = sim
        self.params = params
        self.medium_idle = medium_idle
        self.transmit = transmit
        if rng_for is None:
            shared = random.Random(node_id)
            rng_for = lambda frame: shared  # noqa: E731
        self.rng_for = rng_for
        self.queue_depth = queue_depth
        self.collided = collided
        self.observer = observer

        self.phase = Phase.IDLE
        self.cw = params.cw_min
        self.backoff_slots = 0
        self.frozen = False
        self.retries = 0
        self.pending: Optional[Frame] = None
        self.queue: Deque[Frame] = deque()
        self.dropped = 0
        self.retry_drops = 0
        self.sent = 0
        self._rng: Optional[random.Random] = None
        self._timer: Optional[int] = None
        self._resume_at = 0
        self._expiry: Optional[int] = None

    def _notify(self, kind: str, **info) -> None:
        if self.observer is not None:
            self.observer(kind, self, **info)

    def handle(self, event: SimEvent) -> None:
        self._timer = None
        if event.kind is EventKind.DIFS_END:
            self._transmit()
        elif event.kind is EventKind.BACKOFF_EXPIRE:
            self._expiry = None
            self.backoff_slots = 0
            self._transmit()
        elif event.kind is EventKind.TX_END:
            self._finish()
        else:
            raise ValueError(f"unexpected event {event.kind} for DCF MAC")

    def enqueue(self, frame: Frame) -> None:
        if self.pending is None:
            self.pending = frame
            self._rng = self.rng_for(frame)
            self.retries = 0
            if self.medium_idle():
                self.phase = Phase.DIFS
                self._timer = self.sim.schedule_in(self.params.difs_us, self.node_id,
                                                   EventKind.DIFS_END)
            else:
                self._enter_backoff()
        elif len(self.queue) >= self.queue_depth:
            self.dropped += 1
            self._notify("drop", frame=frame)
        else:
            self.queue.append(frame)

    def _enter_backoff(self) -> None:
        self.backoff_slots = self._rng.randint(0, self.cw)
        self._notify("backoff", cw=self.cw, slots=self.backoff_slots)
        self.phase = Phase.BACKOFF
        self.frozen = True
        if self.medium_idle():
            self.on_medium_idle()

    def on_medium_busy(self) -> None:
        if self.phase is Phase.DIFS:
            self.sim.cancel(self._timer)
            self._timer = None
            self._enter_backoff()
        elif self.phase is Phase.BACKOFF and not self.frozen:
            now = self.sim.now()
            if self._expiry == now:
                return
            self.sim.cancel(self._timer)
            self._timer = None
            self._expiry = None
            if now > self._resume_at:
                self.backoff_slots -= (now - self._resume_at) // self.params.slot_us
            self.frozen = True

    def on_medium_idle(self) -> None:
        if self.phase is not Phase.BACKOFF or not self.frozen:
            return
        self.frozen = False
        self._resume_at = self.sim.now() + self.params.difs_us
        self._expiry = self._resume_at + self.backoff_slots * self.params.slot_us
        self._timer = self.sim.schedule(self._expiry, self.node_id, EventKind.BACKOFF_EXPIRE)

    def _transmit(self) -> None:
        self.phase = Phase.TRANSMIT
        frame = self.pending
        frame.tx_start = self.sim.now()
        self.sent += 1
        self._notify("tx", frame=frame, cw=self.cw)
        self.sim.schedule_in(self.transmit(frame), self.node_id, EventKind.TX_END)

    def _finish(self) -> None:
        if self.collided is not None and self.collided(self.pending):
            self.on_collision()
        else:
            self.cw = self.params.cw_min
            self._next()

    def on_collision(self) -> None:
        """No successful end for the pending frame: widen the window and retry."""
        p = self.params
        self.retries += 1
        if self.retries > p.retry_limit:
            self.retry_drops += 1
            self._notify("retry-drop", frame=self.pending)
            self.cw = p.cw_min
            self._next()
            return
        self.cw = min(2 * (self.cw + 1) - 1, p.cw_max)
        self._enter_backoff()

    def _next(self) -> None:
        self.pending = None
        self.retries = 0
        if self.queue:
            self.pending = self.queue.popleft()
            self._rng = self.rng_for(self.pending)
            self._enter_backoff()
        else:
            self._rng = None
            self.phase = Phase.IDLE
