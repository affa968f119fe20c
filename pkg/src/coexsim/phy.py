"""Propagation, airtime and the SINR-threshold reception model."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Tuple

from .spectrum import ChannelSpec, overlap_mhz

SPEED_OF_LIGHT = 299_792_458.0
CARRIER_HZ = 2.44e9
DEFAULT_PATH_LOSS_EXPONENT = 2.0
DEFAULT_NOISE_DBM = -100.0


class ColocatedNodesError(ValueError):
    """Two radios share a position, so path loss is undefined."""


class Outcome(Enum):
    DELIVERED = "delivered"
    CORRUPTED = "corrupted"
    NOT_RECEIVED = "not-received"


def free_space_loss_db(d: float, freq_hz: float = CARRIER_HZ) -> float:
    return 20.0 * math.log10(4.0 * math.pi * d * freq_hz / SPEED_OF_LIGHT)


REFERENCE_LOSS_DB = free_space_loss_db(1.0)


def path_loss_db(d: float, exponent: float = DEFAULT_PATH_LOSS_EXPONENT) -> float:
    """Log-distance path loss with a 1 m free-space reference at 2.44 GHz."""
    if not d > 0:
        raise ColocatedNodesError(f"path loss undefined at distance {d!r} m")
    return REFERENCE_LOSS_DB + 10.0 * exponent * math.log10(d)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def range_sensitivity_dbm(tx_power_dbm: float, range_m: float,
                          exponent: float = DEFAULT_PATH_LOSS_EXPONENT) -> float:
    """Receiver sensitivity that puts the decode boundary exactly at ``range_m``."""
    return tx_power_dbm - path_loss_db(range_m, exponent)


@dataclass(frozen=True)
class RadioConfig:
    tx_power_dbm: float
    data_rate_bps: int
    modulation: str
    nominal_range_m: float
    overhead_bytes: int = 0
    preamble_us: int = 0
    sinr_threshold_db: float = 10.0
    cca_threshold_dbm: float = -85.0
    path_loss_exponent: float = DEFAULT_PATH_LOSS_EXPONENT
    rx_sensitivity_dbm: Optional[float] = None

    def __post_init__(self):
        if self.data_rate_bps <= 0:
            raise ValueError("data rate must be positive")
        if self.rx_sensitivity_dbm is None:
            object.__setattr__(
                self, "rx_sensitivity_dbm",
                range_sensitivity_dbm(self.tx_power_dbm, self.nominal_range_m,
                                      self.path_loss_exponent),
            )

    def frame_airtime(self, payload_bytes: int) -> int:
        return self.preamble_us + airtime(payload_bytes, self.overhead_bytes, self.data_rate_bps)


def wpan_radio(**overrides) -> RadioConfig:
    # 6 B SHR+PHR, 11 B MAC header and FCS
    params = dict(tx_power_dbm=3.0, data_rate_bps=250_000, modulation="OQPSK",
                  nominal_range_m=10.0, overhead_bytes=17)
    params.update(overrides)
    return RadioConfig(**params)


def wlan_radio(**overrides) -> RadioConfig:
    # 802.11b long preamble, 28 B MAC header and FCS
    params = dict(tx_power_dbm=20.0, data_rate_bps=11_000_000, modulation="CCK",
                  nominal_range_m=100.0, overhead_bytes=28, preamble_us=192)
    params.update(overrides)
    return RadioConfig(**params)


def received_power_dbm(cfg: RadioConfig, d: float) -> float:
    return cfg.tx_power_dbm - path_loss_db(d, cfg.path_loss_exponent)


def airtime(payload_bytes: int, overhead_bytes: int, rate_bps: int) -> int:
    """Serialisation time in whole microseconds, rounded up."""
    if rate_bps <= 0:
        raise ValueError("rate must be positive")
    bits = 8 * (payload_bytes + overhead_bytes)
    return -(-bits * 1_000_000 // rate_bps)


def distance(a: Tuple[float, float], b: Tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass
class Transmission:
    """One frame on the air."""

    frame: object
    start: int
    end: int
    channel: ChannelSpec
    tx_position: Tuple[float, float]
    tx_power_dbm: float
    source: int = -1
    heard_by: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("transmission must have positive airtime")

    def power_at(self, position, exponent: float = DEFAULT_PATH_LOSS_EXPONENT) -> float:
        return self.tx_power_dbm - path_loss_db(distance(self.tx_position, position), exponent)

    def intersects(self, other: "Transmission") -> bool:
        return self.start < other.end and other.start < self.end


def interference_mw(rx_position, tx: Transmission, concurrent: Iterable[Transmission],
                    exponent: float = DEFAULT_PATH_LOSS_EXPONENT) -> float:
    """In-band interference at ``rx_position``, linear sum of overlap-weighted powers."""
    total = 0.0
    for other in concurrent:
        if other is tx:
            continue
        shared = overlap_mhz(tx.channel, other.channel)
        if shared <= 0:
            continue
        weight = shared / other.channel.width_mhz
        total += weight * dbm_to_mw(other.power_at(rx_position, exponent))
    return total


def frame_outcome(rx_position, rx_cfg: RadioConfig, tx: Transmission,
                  concurrent: Iterable[Transmission],
                  noise_dbm: float = DEFAULT_NOISE_DBM) -> Outcome:
    exponent = rx_cfg.path_loss_exponent
    signal_dbm = tx.power_at(rx_position, exponent)
    if signal_dbm < rx_cfg.rx_sensitivity_dbm:
        return Outcome.NOT_RECEIVED
    denominator = interference_mw(rx_position, tx, concurrent, exponent) + dbm_to_mw(noise_dbm)
    sinr_db = signal_dbm - mw_to_dbm(denominator)
    if sinr_db >= rx_cfg.sinr_threshold_db:
        return Outcome.DELIVERED
    return Outcome.CORRUPTED
