"""2.4 GHz channel plans for 802.11b and 802.15.4 and their spectral overlap.

WLAN channel n is centred at 2412 + 5(n - 1) MHz and is 22 MHz wide.
WPAN channel k (numbered 1..16) is centred at 2405 + 5(k - 1) MHz and is
3 MHz wide. All band edges are multiples of 0.5 MHz, so overlaps are exact
in binary floating point.
"""

from dataclasses import dataclass

WLAN_CHANNELS = range(1, 12)
WPAN_CHANNELS = range(1, 17)
WLAN_WIDTH_MHZ = 22.0
WPAN_WIDTH_MHZ = 3.0


@dataclass(frozen=True)
class ChannelSpec:
    """Frequency span of one channel of either technology."""

    standard: str  # "wlan" or "wpan"
    id: int
    low_mhz: float
    high_mhz: float

    @property
    def width_mhz(self) -> float:
        return self.high_mhz - self.low_mhz

    @property
    def center_mhz(self) -> float:
        return (self.low_mhz + self.high_mhz) / 2


def _check(value: int, valid: range, what: str) -> None:
    if value not in valid:
        raise ValueError(f"{what} channel {value!r} outside {valid.start}..{valid.stop - 1}")


def wpan_center(k: int) -> float:
    _check(k, WPAN_CHANNELS, "802.15.4")
    return 2405.0 + 5.0 * (k - 1)


def wlan_center(n: int) -> float:
    _check(n, WLAN_CHANNELS, "802.11b")
    return 2412.0 + 5.0 * (n - 1)


def wlan_span(n: int) -> tuple:
    """(low, high) band edges of WLAN channel ``n`` in MHz."""
    center = wlan_center(n)
    half = WLAN_WIDTH_MHZ / 2
    return (center - half, center + half)


def wpan_span(k: int) -> tuple:
    center = wpan_center(k)
    half = WPAN_WIDTH_MHZ / 2
    return (center - half, center + half)


def wlan_channel(n: int) -> ChannelSpec:
    return ChannelSpec("wlan", n, *wlan_span(n))


def wpan_channel(k: int) -> ChannelSpec:
    return ChannelSpec("wpan", k, *wpan_span(k))


def overlap_mhz(a: ChannelSpec, b: ChannelSpec) -> float:
    """Width of the intersection of two channel spans; 0 when they only touch."""
    return max(0.0, min(a.high_mhz, b.high_mhz) - max(a.low_mhz, b.low_mhz))


def overlaps(n: int, k: int) -> tuple:
    """Whether WLAN channel ``n`` and WPAN channel ``k`` overlap, and by how many MHz."""
    width = overlap_mhz(wlan_channel(n), wpan_channel(k))
    return width > 0, width


def overlapping_wlan_channels(k: int) -> list:
    return [n for n in WLAN_CHANNELS if overlaps(n, k)[0]]
