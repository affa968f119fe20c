"""Slotted CSMA/CA for an 802.15.4 end device.

Backoff periods are aligned to a global grid of ``unit_backoff_us`` anchored
at t=0. A CCA occupies one backoff period, so after a busy CCA the next
backoff starts at the following boundary; after ``cw0`` clear CCAs the frame
goes out on the next boundary. There are no ACKs or retransmissions.
"""

import random
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Deque, Optional

from .engine import EventKind, SimEvent, Simulator
from .frame import Frame


@dataclass(frozen=True)
class CsmaParams:
    mac_min_be: int = 3
    a_max_be: int = 5
    mac_max_csma_backoffs: int = 4
    cw0: int = 2
    unit_backoff_us: int = 320  # 20 symbols at 62.5 ksym/s

    def __post_init__(self):
        if not 0 < self.mac_min_be <= self.a_max_be:
            raise ValueError("need 0 < mac_min_be <= a_max_be")
        if self.mac_max_csma_backoffs < 0 or self.cw0 <= 0 or self.unit_backoff_us <= 0:
            raise ValueError("CSMA parameters must be positive")


class Phase(Enum):
    IDLE = "idle"
    BACKOFF = "backoff"
    CCA = "cca"
    TRANSMIT = "transmit"


def next_boundary(t: int, unit: int) -> int:
    """First slot boundary at or after ``t``."""
    return -(-t // unit) * unit


class LrWpanMac:
    """CSMA/CA state machine for one node.

    ``cca`` answers whether the channel is busy right now, ``transmit`` puts
    the frame on the air and returns its airtime in µs, and ``rng_for``
    returns the random stream used for one frame's backoff draws.
    ``observer``, when set, is called as ``observer(kind, mac, **info)`` for
    backoff draws, CCA verdicts, transmissions, drops and access failures.
    """

    def __init__(self, node_id: int, sim: Simulator, cca: Callable[[], bool],
                 transmit: Callable[[Frame], int], params: CsmaParams = CsmaParams(),
                 rng_for: Optional[Callable[[Frame], random.Random]] = None,
                 queue_depth: int = 8, observer=None, on_done=None):
        self.node_id = node_id
        self.sim = sim
        self.params = params
        self.cca = cca
        self.transmit = transmit
        if rng_for is None:
            shared = random.Random(node_id)
            rng_for = lambda frame: shared  # noqa: E731
        self.rng_for = rng_for
        self.queue_depth = queue_depth
        self.observer = observer
        self.on_done = on_done

        self.phase = Phase.IDLE
        self.nb = 0
        self.be = params.mac_min_be
        self.cw = params.cw0
        self.pending: Optional[Frame] = None
        self.queue: Deque[Frame] = deque()
        self.dropped = 0
        self.access_failures = 0
        self._rng: Optional[random.Random] = None

    def _notify(self, kind: str, **info) -> None:
        if self.observer is not None:
            self.observer(kind, self, **info)

    def handle(self, event: SimEvent) -> None:
        if event.kind is EventKind.BACKOFF_EXPIRE:
            self.on_backoff_expired()
        elif event.kind is EventKind.CCA_SAMPLE:
            self.on_cca_sample()
        elif event.kind is EventKind.TX_START:
            self._start_transmission()
        elif event.kind is EventKind.TX_END:
            self._finish()
        else:
            raise ValueError(f"unexpected event {event.kind} for LR-WPAN MAC")

    def enqueue(self, frame: Frame) -> None:
        if self.pending is None:
            self._begin(frame)
        elif len(self.queue) >= self.queue_depth:
            self.dropped += 1
            self._notify("drop", frame=frame)
        else:
            self.queue.append(frame)

    def _begin(self, frame: Frame) -> None:
        p = self.params
        self.pending = frame
        self.nb = 0
        self.cw = p.cw0
        self.be = p.mac_min_be
        self._rng = self.rng_for(frame)
        self._backoff(next_boundary(self.sim.now(), p.unit_backoff_us))

    def _backoff(self, start: int) -> None:
        periods = self._rng.randint(0, 2 ** self.be - 1)
        self._notify("backoff", be=self.be, periods=periods, nb=self.nb)
        self.phase = Phase.BACKOFF
        self.sim.schedule(start + periods * self.params.unit_backoff_us,
                          self.node_id, EventKind.BACKOFF_EXPIRE)

    def on_backoff_expired(self) -> None:
        self.phase = Phase.CCA
        unit = self.params.unit_backoff_us
        self.sim.schedule(next_boundary(self.sim.now(), unit), self.node_id, EventKind.CCA_SAMPLE)

    def on_cca_sample(self) -> None:
        p = self.params
        busy = bool(self.cca())
        self._notify("cca", busy=busy, cw=self.cw, nb=self.nb, be=self.be)
        next_slot = self.sim.now() + p.unit_backoff_us
        if busy:
            self.nb += 1
            self.be = min(self.be + 1, p.a_max_be)
            self.cw = p.cw0
            if self.nb > p.mac_max_csma_backoffs:
                self.on_channel_access_failure()
            else:
                self._backoff(next_slot)
            return
        self.cw -= 1
        if self.cw == 0:
            self.phase = Phase.TRANSMIT
            self.sim.schedule(next_slot, self.node_id, EventKind.TX_START)
        else:
            self.sim.schedule(next_slot, self.node_id, EventKind.CCA_SAMPLE)

    def on_channel_access_failure(self) -> None:
        self.access_failures += 1
        self._notify("failure", frame=self.pending, nb=self.nb)
        self._next()

    def _start_transmission(self) -> None:
        frame = self.pending
        frame.tx_start = self.sim.now()
        self._notify("tx", frame=frame)
        duration = self.transmit(frame)
        self.sim.schedule_in(duration, self.node_id, EventKind.TX_END)

    def _finish(self) -> None:
        frame = self.pending
        if self.on_done is not None:
            self.on_done(frame)
        self._next()

    def _next(self) -> None:
        self.pending = None
        self._rng = None
        if self.queue:
            self._begin(self.queue.popleft())
        else:
            self.phase = Phase.IDLE
