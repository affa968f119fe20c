import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from coexsim.engine import seconds
from coexsim.phy import distance
from coexsim.scenario import (COORDINATOR_ID, RFD_ID, MobilityModel, MobilityState, Role,
                              ScenarioConfig, TrafficSpec, build, build_circular, build_grid,
                              build_random, cbr_fire_times, load_scenario, mobility_for,
                              position_at, scenario_overrides)

BUILDERS = [build_circular, build_grid, build_random]


def in_bed(p):
    return 0.0 <= p[0] <= 10.0 and 0.0 <= p[1] <= 10.0


@pytest.mark.parametrize("builder", BUILDERS)
def test_population(builder):
    sc = builder()
    roles = [n.role for n in sc.nodes]
    assert len(sc.nodes) == 22
    assert roles.count(Role.WLAN) == 20
    assert roles.count(Role.RFD) == 1 and roles.count(Role.COORDINATOR) == 1
    assert len(sc.transmitters) == 5


@pytest.mark.parametrize("builder", BUILDERS)
def test_layout_in_bed_and_not_colocated(builder):
    for seed in range(20):
        sc = builder(seed)
        pts = [n.position for n in sc.nodes]
        assert all(in_bed(p) for p in pts)
        assert len(set(pts)) == len(pts)


@pytest.mark.parametrize("builder", BUILDERS)
def test_build_is_deterministic(builder):
    a, b = builder(11), builder(11)
    assert [(n.id, n.position, n.transmitter, n.dst) for n in a.nodes] == \
        [(n.id, n.position, n.transmitter, n.dst) for n in b.nodes]


@pytest.mark.parametrize("builder,gap", [(build_circular, 1.0), (build_grid, 2.0),
                                         (build_random, 1.0)])
def test_wpan_pair_spacing(builder, gap):
    # the grid pair sits on the 2 m lattice like every other grid node
    sc = builder()
    rfd, coord = sc.node(RFD_ID), sc.node(COORDINATOR_ID)
    assert distance(rfd.position, coord.position) == pytest.approx(gap)
    assert rfd.dst == COORDINATOR_ID


def test_circular_ring_5m_at_18_degrees():
    sc = build_circular()
    centre = sc.node(COORDINATOR_ID).position
    angles = []
    for n in sc.wlan_nodes:
        assert distance(n.position, centre) == pytest.approx(5.0, abs=1e-9)
        angles.append(math.degrees(math.atan2(n.position[1] - centre[1],
                                              n.position[0] - centre[0])) % 360)
    angles.sort()
    gaps = [b - a for a, b in zip(angles, angles[1:])] + [360 - angles[-1] + angles[0]]
    assert all(g == pytest.approx(18.0) for g in gaps)


def test_grid_nearest_neighbour_is_2m():
    sc = build_grid()
    pts = [n.position for n in sc.wlan_nodes]
    for p in pts:
        nearest = min(distance(p, q) for q in pts if q != p)
        assert nearest == pytest.approx(2.0)


def test_random_default_seed_is_5():
    assert ScenarioConfig().seed == 5
    assert [n.position for n in build_random().nodes] == \
        [n.position for n in build_random(5).nodes]
    assert [n.position for n in build_random(5).nodes] != \
        [n.position for n in build_random(6).nodes]


def test_wlan_destinations_are_listeners():
    for builder in BUILDERS:
        sc = builder()
        for n in sc.transmitters:
            dst = sc.node(n.dst)
            assert dst.role is Role.WLAN and not dst.transmitter


def test_zero_transmitters():
    sc = build(ScenarioConfig(topology="grid", wlan_transmitters=0))
    assert sc.transmitters == []


# --- mobility -------------------------------------------------------------

def rwp(seed=1, start=(5.0, 5.0)):
    return MobilityState(MobilityModel.RANDOM_WAYPOINT, start, speed_mps=10.0,
                         rng=random.Random(seed))


def test_static_never_moves():
    m = MobilityState(MobilityModel.STATIC, (1.0, 2.0))
    assert position_at(m, 0) == position_at(m, seconds(50)) == (1.0, 2.0)


def test_rwp_starts_at_initial_position():
    assert position_at(rwp(), 0) == (5.0, 5.0)


def test_arrival_time_is_distance_over_speed():
    m = rwp()
    depart, arrive, origin, target = m.legs[0]
    d = distance(origin, target)
    assert arrive - depart == pytest.approx(d / 10.0 * 1e6)
    # rig a leg exactly 5 m long
    m.legs[0] = (0.0, 500_000.0, (0.0, 5.0), (5.0, 5.0))
    m.waypoint = (5.0, 5.0)
    assert position_at(m, 500_000) == pytest.approx((5.0, 5.0))
    assert position_at(m, 250_000) == pytest.approx((2.5, 5.0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 20), st.lists(st.integers(0, seconds(100)), min_size=2, max_size=50))
def test_rwp_bounded_and_speed_limited(seed, times):
    m = rwp(seed)
    samples = [(t, position_at(m, t)) for t in sorted(times)]
    for t, p in samples:
        assert in_bed(p)
    for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
        assert distance(p0, p1) <= 10.0 * (t1 - t0) / 1e6 + 1e-9


def test_query_order_does_not_change_trajectory():
    a, b = rwp(3), rwp(3)
    ts = [seconds(x) for x in (90, 1, 45, 3.3, 99.9)]
    forward = {t: position_at(a, t) for t in sorted(ts)}
    shuffled = {t: position_at(b, t) for t in ts}
    assert forward == shuffled


def test_mobility_for_follows_config():
    node = build_grid().node(RFD_ID)
    assert mobility_for(node, ScenarioConfig()).model is MobilityModel.STATIC
    m = mobility_for(node, ScenarioConfig(mobility=True))
    assert m.model is MobilityModel.RANDOM_WAYPOINT and m.speed_mps == 10.0


def test_rwp_needs_speed_and_stream():
    with pytest.raises(ValueError):
        MobilityState(MobilityModel.RANDOM_WAYPOINT, (0, 0), speed_mps=0, rng=random.Random())
    with pytest.raises(ValueError):
        MobilityState(MobilityModel.RANDOM_WAYPOINT, (0, 0))


# --- traffic --------------------------------------------------------------

def test_one_second_cbr_gives_100_packets():
    times = cbr_fire_times(TrafficSpec(1500, seconds(1)), seconds(100))
    assert len(times) == 100
    assert times[0] == 0 and times[-1] == seconds(99)


def test_tenth_second_cbr_gives_1000_packets():
    assert len(cbr_fire_times(TrafficSpec(105, seconds(0.1)), seconds(100))) == 1000


def test_zero_duration():
    assert cbr_fire_times(TrafficSpec(105, 1000), 0) == [0]
    assert cbr_fire_times(TrafficSpec(105, 1000, start_offset_us=5), 0) == []


def test_packet_cap():
    assert len(cbr_fire_times(TrafficSpec(105, 1000, max_packets=3), seconds(1))) == 3


@given(st.integers(1000, 10 ** 6), st.integers(0, 10 ** 7), st.integers(0, 10 ** 6))
def test_fire_times_spacing(interval, duration, offset):
    times = cbr_fire_times(TrafficSpec(1, interval, offset), duration)
    assert all(b - a == interval for a, b in zip(times, times[1:]))
    assert all(t < duration for t in times[1:])
    if offset < duration:
        assert len(times) == -(-(duration - offset) // interval)


# --- configuration ----------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(topology="star")
    with pytest.raises(ValueError):
        ScenarioConfig(wpan_channel=17)
    with pytest.raises(ValueError):
        ScenarioConfig(wlan_transmitters=21)
    with pytest.raises(ValueError):
        ScenarioConfig(duration_s=0)


def test_scenario_file_roundtrip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# bed run\ntopology = grid\nseed = 9\nmobility = on\n"
                    "wpan_interval_s = 0.3   # swept value\nwpan_max_packets = none\n")
    cfg = load_scenario(path)
    assert (cfg.topology, cfg.seed, cfg.mobility, cfg.wpan_interval_s) == ("grid", 9, True, 0.3)
    assert cfg.wpan_max_packets is None


def test_unknown_scenario_key_is_an_error(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("topology = grid\nrouting = aodv\n")
    with pytest.raises(ValueError, match="routing"):
        load_scenario(path)


@pytest.mark.parametrize("text", ["seed = five\n", "mobility = maybe\n", "seed 5\n",
                                  "seed = 1\nseed = 2\n"])
def test_malformed_scenario_files(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ValueError):
        load_scenario(path)


def test_overrides_convert_types():
    out = scenario_overrides({"duration_s": "10", "queue_depth": "4"})
    assert out == {"duration_s": 10.0, "queue_depth": 4}
