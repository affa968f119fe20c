from dataclasses import dataclass
from typing import Optional


@dataclass
class Frame:
    """One MAC frame; ``tx_start`` and ``rx_end`` are filled in as it progresses."""

    id: int
    src: int
    dst: int
    payload_bytes: int
    channel: int
    created_at: int
    tx_start: Optional[int] = None
    rx_end: Optional[int] = None
