"""Topologies, random-waypoint mobility, CBR traffic and the scenario file format."""

import bisect
import dataclasses
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .engine import US_PER_S, seconds
from .phy import RadioConfig, distance, wlan_radio, wpan_radio
from .spectrum import WLAN_CHANNELS, WPAN_CHANNELS

BED_SIZE_M = 10.0
GRID_PITCH_M = 2.0
CIRCLE_RADIUS_M = 5.0
WPAN_SEPARATION_M = 1.0
N_WLAN = 20
TOPOLOGIES = ("circular", "grid", "random")

RFD_ID = 1
COORDINATOR_ID = 2

Position = Tuple[float, float]


class Role(Enum):
    RFD = "rfd"
    COORDINATOR = "ffd-coordinator"
    WLAN = "wlan"


@dataclass(frozen=True)
class TrafficSpec:
    payload_bytes: int
    interval_us: int
    start_offset_us: int = 0
    max_packets: Optional[int] = None

    def __post_init__(self):
        if self.interval_us <= 0:
            raise ValueError("traffic interval must be positive")


@dataclass
class NodeSpec:
    id: int
    role: Role
    position: Position
    radio: RadioConfig
    transmitter: bool = False
    traffic: Optional[TrafficSpec] = None
    dst: Optional[int] = None


@dataclass
class ScenarioConfig:
    """Every knob of a single run. Field names double as scenario-file keys."""

    topology: str = "circular"
    seed: int = 5
    duration_s: float = 100.0
    mobility: bool = False
    speed_mps: float = 10.0
    wpan_interval_s: float = 1.0
    wlan_interval_s: float = 1.0
    wpan_offset_s: float = 0.0
    wlan_offset_s: float = 0.0
    wpan_max_packets: Optional[int] = None
    wpan_payload_bytes: int = 105
    wlan_payload_bytes: int = 1500
    wpan_tx_power_dbm: float = 3.0
    wlan_tx_power_dbm: float = 20.0
    wpan_channel: int = 3
    wlan_channel: int = 1
    wlan_transmitters: int = 5
    path_loss_exponent: float = 2.0
    sinr_threshold_db: float = 10.0
    noise_dbm: float = -100.0
    wpan_cca_threshold_dbm: float = -85.0
    wlan_cca_threshold_dbm: float = -85.0
    queue_depth: int = 8

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if self.wpan_interval_s <= 0 or self.wlan_interval_s <= 0:
            raise ValueError("packet intervals must be positive")
        if self.wlan_channel not in WLAN_CHANNELS or self.wpan_channel not in WPAN_CHANNELS:
            raise ValueError("channel number out of range")
        if not 0 <= self.wlan_transmitters <= N_WLAN:
            raise ValueError(f"wlan_transmitters must be within 0..{N_WLAN}")

    def wpan_radio(self) -> RadioConfig:
        return wpan_radio(tx_power_dbm=self.wpan_tx_power_dbm,
                          sinr_threshold_db=self.sinr_threshold_db,
                          cca_threshold_dbm=self.wpan_cca_threshold_dbm,
                          path_loss_exponent=self.path_loss_exponent)

    def wlan_radio(self) -> RadioConfig:
        return wlan_radio(tx_power_dbm=self.wlan_tx_power_dbm,
                          sinr_threshold_db=self.sinr_threshold_db,
                          cca_threshold_dbm=self.wlan_cca_threshold_dbm,
                          path_loss_exponent=self.path_loss_exponent)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class Scenario:
    topology: str
    seed: int
    nodes: List[NodeSpec] = field(default_factory=list)

    def node(self, node_id: int) -> NodeSpec:
        for spec in self.nodes:
            if spec.id == node_id:
                return spec
        raise KeyError(node_id)

    @property
    def wlan_nodes(self) -> List[NodeSpec]:
        return [n for n in self.nodes if n.role is Role.WLAN]

    @property
    def transmitters(self) -> List[NodeSpec]:
        return [n for n in self.wlan_nodes if n.transmitter]


# --- topologies -------------------------------------------------------------

def _clamp(v: float) -> float:
    return min(max(v, 0.0), BED_SIZE_M)


def _assemble(topology, seed, cfg, wpan_pair, wlan_positions, tx_indices) -> Scenario:
    cfg = cfg or ScenarioConfig(topology=topology, seed=seed)
    wpan, wlan = cfg.wpan_radio(), cfg.wlan_radio()
    coord_pos, rfd_pos = wpan_pair
    wpan_traffic = TrafficSpec(cfg.wpan_payload_bytes, seconds(cfg.wpan_interval_s),
                               seconds(cfg.wpan_offset_s), cfg.wpan_max_packets)
    wlan_traffic = TrafficSpec(cfg.wlan_payload_bytes, seconds(cfg.wlan_interval_s),
                               seconds(cfg.wlan_offset_s))
    nodes = [
        NodeSpec(RFD_ID, Role.RFD, rfd_pos, wpan, True, wpan_traffic, COORDINATOR_ID),
        NodeSpec(COORDINATOR_ID, Role.COORDINATOR, coord_pos, wpan),
    ]
    for i, pos in enumerate(wlan_positions):
        is_tx = i in tx_indices
        nodes.append(NodeSpec(3 + i, Role.WLAN, pos, wlan, is_tx, wlan_traffic if is_tx else None))
    scenario = Scenario(topology, seed, nodes)
    _pick_wlan_destinations(scenario)
    _check_layout(scenario)
    return scenario


def _pick_wlan_destinations(scenario: Scenario) -> None:
    listeners = [n for n in scenario.wlan_nodes if not n.transmitter]
    for node in scenario.transmitters:
        if listeners:
            best = min(listeners, key=lambda n: (distance(node.position, n.position), n.id))
            node.dst = best.id


def _check_layout(scenario: Scenario) -> None:
    seen = set()
    for node in scenario.nodes:
        x, y = node.position
        if not (0 <= x <= BED_SIZE_M and 0 <= y <= BED_SIZE_M):
            raise ValueError(f"node {node.id} at {node.position} is outside the test bed")
        if node.position in seen:
            raise ValueError(f"node {node.id} shares position {node.position}")
        seen.add(node.position)


def _choose_transmitters(rng: random.Random, count: int) -> set:
    return set(rng.sample(range(N_WLAN), count))


def build_circular(seed: int = 5, cfg: Optional[ScenarioConfig] = None) -> Scenario:
    """Coordinator at the bed centre, RFD 1 m east, 20 WLAN nodes on a 5 m ring.

    Transmitters are evenly spaced around the ring (every fourth node when
    five are active); the layout does not depend on ``seed``.
    """
    center = (BED_SIZE_M / 2, BED_SIZE_M / 2)
    ring = []
    for i in range(N_WLAN):
        angle = 2 * math.pi * i / N_WLAN
        ring.append((_clamp(center[0] + CIRCLE_RADIUS_M * math.cos(angle)),
                     _clamp(center[1] + CIRCLE_RADIUS_M * math.sin(angle))))
    count = cfg.wlan_transmitters if cfg else 5
    step = N_WLAN // count if count else N_WLAN
    tx = {i * step for i in range(count)}
    rfd = (center[0] + WPAN_SEPARATION_M, center[1])
    return _assemble("circular", seed, cfg, (center, rfd), ring, tx)


def grid_points() -> List[Position]:
    """The 6 x 6 lattice of 2 m pitch covering the bed, in row-major order."""
    n = int(BED_SIZE_M / GRID_PITCH_M) + 1
    return [(GRID_PITCH_M * c, GRID_PITCH_M * r) for r in range(n) for c in range(n)]


def build_grid(seed: int = 5, cfg: Optional[ScenarioConfig] = None) -> Scenario:
    """22 nodes on the first 22 lattice points; the WPAN pair sits at (4,4)-(6,4)."""
    points = grid_points()[: N_WLAN + 2]
    coord, rfd = (4.0, 4.0), (6.0, 4.0)
    wlan_positions = [p for p in points if p not in (coord, rfd)]
    count = cfg.wlan_transmitters if cfg else 5
    tx = _choose_transmitters(random.Random(seed), count)
    return _assemble("grid", seed, cfg, (coord, rfd), wlan_positions, tx)


def build_random(seed: int = 5, cfg: Optional[ScenarioConfig] = None) -> Scenario:
    """WLAN nodes uniform over the bed; the WPAN pair is fixed 1 m apart at the centre."""
    rng = random.Random(seed)
    coord = (BED_SIZE_M / 2, BED_SIZE_M / 2)
    rfd = (coord[0] + WPAN_SEPARATION_M, coord[1])
    taken = {coord, rfd}
    wlan_positions = []
    while len(wlan_positions) < N_WLAN:
        pos = (rng.uniform(0, BED_SIZE_M), rng.uniform(0, BED_SIZE_M))
        if pos in taken:
            continue
        taken.add(pos)
        wlan_positions.append(pos)
    count = cfg.wlan_transmitters if cfg else 5
    tx = _choose_transmitters(rng, count)
    return _assemble("random", seed, cfg, (coord, rfd), wlan_positions, tx)


BUILDERS = {"circular": build_circular, "grid": build_grid, "random": build_random}


def build(cfg: ScenarioConfig) -> Scenario:
    return BUILDERS[cfg.topology](cfg.seed, cfg)


# --- mobility ---------------------------------------------------------------

class MobilityModel(Enum):
    STATIC = "static"
    RANDOM_WAYPOINT = "rwp"


@dataclass
class MobilityState:
    """Motion of one node.

    Random-waypoint legs are generated lazily from the node's own stream, so
    the trajectory is a fixed function of the seed no matter in which order
    positions are queried.
    """

    model: MobilityModel
    current: Position
    speed_mps: float = 10.0
    pause_us: int = 0
    rng: Optional[random.Random] = None
    waypoint: Optional[Position] = None
    # (depart_us, arrive_us, origin, target); the node pauses after arriving
    legs: List[tuple] = field(default_factory=list, repr=False)
    _starts: List[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.model is MobilityModel.RANDOM_WAYPOINT:
            if self.speed_mps <= 0:
                raise ValueError("random waypoint needs a positive speed")
            if self.rng is None:
                raise ValueError("random waypoint needs a random stream")
            self._add_leg(0.0, self.current)
            self.waypoint = self.legs[0][3]

    def _add_leg(self, depart: float, origin: Position) -> None:
        target = (self.rng.uniform(0, BED_SIZE_M), self.rng.uniform(0, BED_SIZE_M))
        travel = distance(origin, target) / self.speed_mps * US_PER_S
        self.legs.append((depart, depart + travel, origin, target))
        self._starts.append(depart)

    def _extend_to(self, t: float) -> None:
        while True:
            _, arrive, _, target = self.legs[-1]
            if arrive + self.pause_us > t:
                return
            self._add_leg(arrive + self.pause_us, target)


def position_at(m: MobilityState, t: int) -> Position:
    if t < 0:
        raise ValueError("time must be non-negative")
    if m.model is MobilityModel.STATIC:
        return m.current
    m._extend_to(t)
    leg = m.legs[bisect.bisect_right(m._starts, t) - 1]
    depart, arrive, (x0, y0), (x1, y1) = leg
    if t >= arrive:
        return (x1, y1)
    frac = (t - depart) / (arrive - depart)
    return (x0 + frac * (x1 - x0), y0 + frac * (y1 - y0))


def mobility_for(node: NodeSpec, cfg: ScenarioConfig) -> MobilityState:
    if not cfg.mobility:
        return MobilityState(MobilityModel.STATIC, node.position)
    rng = random.Random(f"rwp:{cfg.seed}:{node.id}")
    return MobilityState(MobilityModel.RANDOM_WAYPOINT, node.position,
                         speed_mps=cfg.speed_mps, rng=rng)


# --- traffic ----------------------------------------------------------------

def cbr_fire_times(spec: TrafficSpec, duration: int) -> List[int]:
    """Packet generation instants of a CBR source over ``[0, duration]``.

    The first packet fires at the offset if that lies inside the horizon;
    later packets fire strictly before ``duration``, since a packet generated
    at the very end can never be delivered.
    """
    times = []
    t = spec.start_offset_us
    while t < duration or (not times and t == duration):
        if spec.max_packets is not None and len(times) >= spec.max_packets:
            break
        times.append(t)
        t += spec.interval_us
    return times


# --- scenario files ---------------------------------------------------------

_BOOL_WORDS = {"on": True, "true": True, "yes": True, "1": True,
               "off": False, "false": False, "no": False, "0": False}


def read_key_values(path) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def convert_value(key: str, raw: str, kind):
    """Convert a scenario-file string into the type of field ``key``."""
    try:
        if kind is bool:
            word = raw.lower()
            if word not in _BOOL_WORDS:
                raise ValueError(raw)
            return _BOOL_WORDS[word]
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == Optional[int]:
            return None if raw.lower() in ("", "none") else int(raw)
        return raw
    except ValueError:
        raise ValueError(f"malformed value for {key}: {raw!r}") from None


SCENARIO_FIELDS = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def scenario_overrides(values: Dict[str, str]) -> dict:
    unknown = sorted(set(values) - set(SCENARIO_FIELDS))
    if unknown:
        raise ValueError(f"unknown scenario keys: {', '.join(unknown)}")
    return {k: convert_value(k, v, SCENARIO_FIELDS[k]) for k, v in values.items()}


def load_scenario(path) -> ScenarioConfig:
    return ScenarioConfig(**scenario_overrides(read_key_values(path)))
