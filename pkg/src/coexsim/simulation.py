"""One coexistence run: nodes, shared medium and metric collection."""

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .engine import EventKind, SimEvent, Simulator, seconds
from .frame import Frame
from .mac_lrwpan import CsmaParams, LrWpanMac
from .mac_wlan import DcfMac, DcfParams
from .metrics import MetricsCollector, MetricsSummary, RxRecord
from .phy import RadioConfig, Transmission, distance, frame_outcome, path_loss_db
from .scenario import (COORDINATOR_ID, MobilityModel, NodeSpec, Role, Scenario, ScenarioConfig,
                       build, mobility_for, position_at)
from .spectrum import ChannelSpec, overlap_mhz, wlan_channel, wpan_channel

MEDIUM = "medium"
SIMULATION = "simulation"
# nothing on the air lasts longer than this; older history can be dropped
_HISTORY_US = 50_000


def frame_rng(seed: int, frame: Frame) -> random.Random:
    """Random stream for one frame's channel-access draws.

    Keyed by the generation instant rather than a running counter, so two
    runs that generate a frame at the same instant from the same node make
    identical draws for it.
    """
    return random.Random(f"{seed}:{frame.src}:{frame.created_at}")


class Medium:
    """Shared 2.4 GHz channel: who is on the air and who can hear it."""

    def __init__(self, sim: Simulator, nodes: Dict[int, NodeSpec], mobility: dict,
                 path_loss_exponent: float):
        self.sim = sim
        self.nodes = nodes
        self.mobility = mobility
        self.exponent = path_loss_exponent
        self.on_air: List[Transmission] = []
        self.recent: List[Transmission] = []
        self.sensers: Dict[int, tuple] = {}
        self.sensed: Dict[int, int] = {}
        self._static = all(m.model is MobilityModel.STATIC for m in mobility.values())
        self._loss_cache: Dict[tuple, float] = {}
        self.listeners = []

    def position(self, node_id: int, t: int):
        return position_at(self.mobility[node_id], t)

    def power_at(self, tx: Transmission, node_id: int, t: int) -> float:
        if self._static:
            key = (tx.source, node_id)
            loss = self._loss_cache.get(key)
            if loss is None:
                loss = path_loss_db(distance(tx.tx_position, self.nodes[node_id].position),
                                    self.exponent)
                self._loss_cache[key] = loss
            return tx.tx_power_dbm - loss
        return tx.power_at(self.position(node_id, t), self.exponent)

    def add_senser(self, node_id: int, mac: DcfMac, channel: ChannelSpec) -> None:
        self.sensers[node_id] = (mac, channel)
        self.sensed[node_id] = 0

    def idle_at(self, node_id: int) -> bool:
        return self.sensed[node_id] == 0

    def cca_busy(self, node_id: int, channel: ChannelSpec, threshold_dbm: float) -> bool:
        now = self.sim.now()
        for tx in self.on_air:
            if tx.source == node_id or not tx.start <= now < tx.end:
                continue
            if overlap_mhz(tx.channel, channel) <= 0:
                continue
            if self.power_at(tx, node_id, now) >= threshold_dbm:
                return True
        return False

    def start(self, node_id: int, frame: Frame, channel: ChannelSpec, radio: RadioConfig) -> int:
        now = self.sim.now()
        duration = radio.frame_airtime(frame.payload_bytes)
        tx = Transmission(frame, now, now + duration, channel, self.position(node_id, now),
                          radio.tx_power_dbm, source=node_id)
        self.on_air.append(tx)
        self.recent.append(tx)
        self.sim.schedule(tx.end, MEDIUM, EventKind.TX_END, tx)
        heard = []
        for other, (_, sense_channel) in self.sensers.items():
            if other == node_id or overlap_mhz(channel, sense_channel) <= 0:
                continue
            if self.power_at(tx, other, now) >= self.nodes[other].radio.cca_threshold_dbm:
                heard.append(other)
        tx.heard_by = heard
        for other in heard:
            self.sensed[other] += 1
            if self.sensed[other] == 1:
                self.sensers[other][0].on_medium_busy()
        return duration

    def handle(self, event: SimEvent) -> None:
        tx = event.payload
        self.on_air.remove(tx)
        for other in tx.heard_by:
            self.sensed[other] -= 1
            if self.sensed[other] == 0:
                self.sensers[other][0].on_medium_idle()
        for listener in self.listeners:
            listener(tx)
        horizon = self.sim.now() - _HISTORY_US
        if self.recent and self.recent[0].end < horizon:
            self.recent = [t for t in self.recent if t.end >= horizon]

    def concurrent_with(self, tx: Transmission) -> List[Transmission]:
        return [o for o in self.recent if o is not tx and o.intersects(tx)]


class CbrSource:
    """Fires ``make_frame`` at a node on a fixed interval."""

    def __init__(self, sim: Simulator, node_id: int, spec, duration: int, on_frame):
        self.sim = sim
        self.node_id = node_id
        self.spec = spec
        self.duration = duration
        self.on_frame = on_frame
        self.fired = 0
        self.target = ("traffic", node_id)
        sim.register(self.target, self.handle)
        if spec.start_offset_us <= duration:
            sim.schedule(spec.start_offset_us, self.target, EventKind.TRAFFIC_FIRE)

    def handle(self, event: SimEvent) -> None:
        self.fired += 1
        self.on_frame(self.sim.now())
        nxt = self.sim.now() + self.spec.interval_us
        capped = self.spec.max_packets is not None and self.fired >= self.spec.max_packets
        if nxt < self.duration and not capped:
            self.sim.schedule(nxt, self.target, EventKind.TRAFFIC_FIRE)


@dataclass
class RunResult:
    config: ScenarioConfig
    summary: MetricsSummary
    events: int
    wlan_frames_sent: int = 0
    access_failures: int = 0
    wlan_airtime_us: int = 0
    transmissions: List[Transmission] = field(default_factory=list, repr=False)


class CoexistenceSimulation:
    """Wires a scenario into the event engine and runs it to the horizon."""

    def __init__(self, cfg: ScenarioConfig, scenario: Optional[Scenario] = None,
                 csma: CsmaParams = CsmaParams(), dcf: DcfParams = DcfParams(),
                 keep_transmissions: bool = False):
        self.cfg = cfg
        self.scenario = scenario or build(cfg)
        self.duration = seconds(cfg.duration_s)
        self.sim = Simulator()
        self.metrics = MetricsCollector()
        self.nodes = {n.id: n for n in self.scenario.nodes}
        mobility = {n.id: mobility_for(n, cfg) for n in self.scenario.nodes}
        self.medium = Medium(self.sim, self.nodes, mobility, cfg.path_loss_exponent)
        self.sim.register(MEDIUM, self.medium.handle)
        self.sim.register(SIMULATION, self._on_end)
        self.wpan_channel = wpan_channel(cfg.wpan_channel)
        self.wlan_channel = wlan_channel(cfg.wlan_channel)
        self._frame_ids = 0
        self.wlan_airtime = 0
        self.log: List[Transmission] = []
        if keep_transmissions:
            self.medium.listeners.append(self.log.append)
        self.medium.listeners.append(self._on_transmission_end)

        self.wpan_macs: Dict[int, LrWpanMac] = {}
        self.wlan_macs: Dict[int, DcfMac] = {}
        self.sources: List[CbrSource] = []
        for node in self.scenario.nodes:
            if node.role is Role.WLAN:
                self._add_wlan(node, dcf)
            elif node.role is Role.RFD:
                self._add_rfd(node, csma)

    def _new_frame(self, node: NodeSpec, channel_id: int, now: int) -> Frame:
        self._frame_ids += 1
        return Frame(self._frame_ids, node.id, node.dst, node.traffic.payload_bytes,
                     channel_id, now)

    def _rng_for(self, frame: Frame) -> random.Random:
        return frame_rng(self.cfg.seed, frame)

    def _add_rfd(self, node: NodeSpec, csma: CsmaParams) -> None:
        channel, radio = self.wpan_channel, node.radio
        mac = LrWpanMac(
            node.id, self.sim,
            cca=lambda: self.medium.cca_busy(node.id, channel, radio.cca_threshold_dbm),
            transmit=lambda frame: self.medium.start(node.id, frame, channel, radio),
            params=csma, rng_for=self._rng_for, queue_depth=self.cfg.queue_depth,
        )
        self.wpan_macs[node.id] = mac
        self.sim.register(node.id, mac.handle)

        def generate(now):
            self.metrics.frame_sent()
            mac.enqueue(self._new_frame(node, channel.id, now))

        self.sources.append(CbrSource(self.sim, node.id, node.traffic, self.duration, generate))

    def _add_wlan(self, node: NodeSpec, dcf: DcfParams) -> None:
        channel, radio = self.wlan_channel, node.radio
        mac = DcfMac(
            node.id, self.sim,
            medium_idle=lambda: self.medium.idle_at(node.id),
            transmit=lambda frame: self.medium.start(node.id, frame, channel, radio),
            params=dcf, rng_for=self._rng_for, queue_depth=self.cfg.queue_depth,
        )
        self.wlan_macs[node.id] = mac
        self.medium.add_senser(node.id, mac, channel)
        self.sim.register(node.id, mac.handle)
        if node.transmitter and node.traffic is not None:
            self.sources.append(CbrSource(
                self.sim, node.id, node.traffic, self.duration,
                lambda now: mac.enqueue(self._new_frame(node, channel.id, now)),
            ))

    def _on_transmission_end(self, tx: Transmission) -> None:
        frame = tx.frame
        if tx.source in self.wlan_macs:
            self.wlan_airtime += tx.end - tx.start
        if frame.dst != COORDINATOR_ID:
            return
        coordinator = self.nodes[COORDINATOR_ID]
        rx_pos = self.medium.position(COORDINATOR_ID, tx.start)
        outcome = frame_outcome(rx_pos, coordinator.radio, tx,
                                self.medium.concurrent_with(tx), self.cfg.noise_dbm)
        frame.rx_end = tx.end
        self.metrics.record(RxRecord(frame.id, outcome, frame.payload_bytes,
                                     frame.created_at, frame.rx_end))

    def _on_end(self, event: SimEvent) -> None:
        self.sim.drop_after(self.sim.now())

    def run(self) -> RunResult:
        self.sim.schedule(self.duration, SIMULATION, EventKind.SIM_END)
        events = self.sim.run_until(self.duration)
        wlan_sent = sum(m.sent for m in self.wlan_macs.values())
        failures = sum(m.access_failures for m in self.wpan_macs.values())
        for mac in self.wpan_macs.values():
            self.metrics.dropped += mac.dropped + mac.access_failures
        return RunResult(self.cfg, self.metrics.summarize(self.duration), events,
                         wlan_frames_sent=wlan_sent, access_failures=failures,
                         wlan_airtime_us=self.wlan_airtime,
                         transmissions=self.log)


def run_scenario(cfg: ScenarioConfig, **kwargs) -> RunResult:
    return CoexistenceSimulation(cfg, **kwargs).run()
