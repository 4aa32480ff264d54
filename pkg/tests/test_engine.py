"""Event loop, radio model and RNG derivation tests.

Latency and neighborhood checks recompute expected values from the raw
formulas rather than trusting the engine's own arithmetic.
"""

import math

import pytest

from vanetlab.engine import (
    BROADCAST,
    NS_PER_S,
    Engine,
    Event,
    RadioConfig,
    mix64,
    seconds,
    substream,
)
from vanetlab.errors import SchedulingInPast, UnknownNode


def test_seconds_floors_to_integer_ns():
    assert seconds(1.0) == 1_000_000_000
    assert seconds(0.0000000015) == 1
    assert isinstance(seconds(2.5), int)


def test_mix64_deterministic_and_order_sensitive():
    assert mix64(1, 2, 3) == mix64(1, 2, 3)
    assert mix64(1, 2) != mix64(2, 1)
    assert 0 <= mix64(2**64 - 1, 12345) < 2**64


def test_substream_reproducible_and_independent():
    a = [substream(7, 1).random() for _ in range(5)]
    b = [substream(7, 1).random() for _ in range(5)]
    c = [substream(7, 2).random() for _ in range(5)]
    assert a == b
    assert a != c


def test_events_fire_in_time_then_insertion_order():
    eng = Engine()
    fired = []
    eng.schedule_at(seconds(5), lambda: fired.append("first"))
    eng.schedule_at(seconds(5), lambda: fired.append("second"))
    eng.schedule_at(seconds(1), lambda: fired.append("early"))
    eng.run_until(seconds(10))
    assert fired == ["early", "first", "second"]


def test_child_at_same_fire_time_runs_after_parent():
    eng = Engine()
    fired = []

    def parent():
        fired.append("parent")
        eng.schedule_at(eng.clock, lambda: fired.append("child"))

    eng.schedule_at(seconds(2), parent)
    count = eng.run_until(seconds(2))
    assert fired == ["parent", "child"]
    assert count == 2


def test_run_until_is_boundary_inclusive():
    eng = Engine()
    fired = []
    for t in (1, 2, 3):
        eng.schedule_at(seconds(t), lambda t=t: fired.append(t))
    assert eng.run_until(seconds(2)) == 2
    assert fired == [1, 2]
    assert eng.clock == seconds(2)


def test_run_until_empty_queue_advances_clock():
    eng = Engine()
    assert eng.run_until(seconds(10)) == 0
    assert eng.clock == seconds(10)


def test_run_until_backwards_rejected():
    eng = Engine()
    eng.run_until(seconds(5))
    with pytest.raises(ValueError):
        eng.run_until(seconds(4))


def test_scheduling_in_the_past_rejected():
    eng = Engine()
    eng.run_until(seconds(3))
    with pytest.raises(SchedulingInPast):
        eng.schedule(Event(fire_time=seconds(2), seq=1, action=lambda: None))


def test_position_static_node():
    eng = Engine()
    eng.register_node(0, (100.0, 0.0))
    assert eng.position_at(0, 0) == (100.0, 0.0)
    assert eng.position_at(0, seconds(42)) == (100.0, 0.0)


def test_position_linear_motion():
    eng = Engine()
    eng.register_node(0, (0.0, 0.0), velocity=(10.0, 0.0))
    x, y = eng.position_at(0, seconds(5))
    assert x == pytest.approx(50.0)
    assert y == 0.0


def test_unknown_node_raises():
    eng = Engine()
    with pytest.raises(UnknownNode):
        eng.position_at(99, 0)
    with pytest.raises(UnknownNode):
        eng.neighbors(99, 0)


def test_neighbors_collinear_chain():
    eng = Engine(RadioConfig(range_m=250.0))
    for i, x in enumerate((0.0, 200.0, 400.0)):
        eng.register_node(i, (x, 0.0))
    assert eng.neighbors(0, 0) == [1]
    assert eng.neighbors(1, 0) == [0, 2]
    assert eng.neighbors(2, 0) == [1]


def test_neighbors_boundary_distance_is_in_range():
    eng = Engine(RadioConfig(range_m=250.0))
    eng.register_node(0, (0.0, 0.0))
    eng.register_node(1, (250.0, 0.0))
    assert eng.neighbors(0, 0) == [1]


def test_neighbors_symmetry_random_layout():
    eng = Engine(RadioConfig(range_m=120.0))
    rng = substream(11, 0)
    for i in range(15):
        eng.register_node(i, (rng.uniform(0, 500), rng.uniform(0, 500)))
    for n in range(15):
        for m in eng.neighbors(n, 0):
            assert n in eng.neighbors(m, 0)


def test_latency_formula_serialization_only():
    eng = Engine(RadioConfig(bandwidth_bps=6_000_000))
    # 1024 bytes over 6 Mbps at zero distance: floor(1024*8/6e6 * 1e9)
    assert eng.latency_ns(1024, 0.0) == 1_365_333


def test_latency_includes_propagation():
    radio = RadioConfig(bandwidth_bps=6_000_000, prop_delay_s_per_m=3.336e-9)
    eng = Engine(radio)
    expected = (1024 * 8 * NS_PER_S) // 6_000_000 + int(3.336e-9 * 200.0 * NS_PER_S)
    assert eng.latency_ns(1024, 200.0) == expected


def test_latency_floors_at_one_ns():
    eng = Engine(RadioConfig(bandwidth_bps=10**12))
    assert eng.latency_ns(1, 0.0) == 1


def test_unicast_delivery_time_and_payload():
    eng = Engine()
    got = []
    eng.register_node(0, (0.0, 0.0))
    eng.register_node(1, (100.0, 0.0), receiver=lambda src, p: got.append((src, p, eng.clock)))
    eng.transmit(0, 1, 1024, "hello")
    eng.run_until(seconds(1))
    assert len(got) == 1
    src, payload, at = got[0]
    assert src == 0
    assert payload == "hello"
    assert at == eng.latency_ns(1024, 100.0)


def test_unicast_out_of_range_invokes_drop_hook():
    eng = Engine(RadioConfig(range_m=250.0))
    got = []
    drops = []
    eng.register_node(0, (0.0, 0.0))
    eng.register_node(1, (300.0, 0.0), receiver=lambda src, p: got.append(p))
    eng.drop_hook = lambda src, dst, payload: drops.append((src, dst, payload))
    eng.transmit(0, 1, 512, "lost")
    eng.run_until(seconds(1))
    assert got == []
    assert drops == [(0, 1, "lost")]


def test_broadcast_reaches_all_in_range_except_sender():
    eng = Engine(RadioConfig(range_m=250.0))
    got = {1: [], 2: [], 3: []}
    eng.register_node(0, (0.0, 0.0), receiver=lambda s, p: pytest.fail("sender received"))
    eng.register_node(1, (100.0, 0.0), receiver=lambda s, p: got[1].append(p))
    eng.register_node(2, (200.0, 0.0), receiver=lambda s, p: got[2].append(p))
    eng.register_node(3, (900.0, 0.0), receiver=lambda s, p: got[3].append(p))
    eng.transmit(0, BROADCAST, 64, "beacon")
    eng.run_until(seconds(1))
    assert got[1] == ["beacon"]
    assert got[2] == ["beacon"]
    assert got[3] == []


def test_broadcast_with_no_neighbors_is_silent():
    eng = Engine()
    eng.register_node(0, (0.0, 0.0))
    eng.transmit(0, BROADCAST, 64, "beacon")
    assert eng.run_until(seconds(1)) == 0


def test_transmit_rejects_nonpositive_size():
    eng = Engine()
    eng.register_node(0, (0.0, 0.0))
    eng.register_node(1, (1.0, 0.0))
    with pytest.raises(ValueError):
        eng.transmit(0, 1, 0, "x")


def test_mobility_changes_connectivity_over_time():
    # node 1 approaches node 0 at 10 m/s from 400 m away
    eng = Engine(RadioConfig(range_m=250.0))
    got = []
    eng.register_node(0, (0.0, 0.0), receiver=lambda s, p: got.append(p))
    eng.register_node(1, (400.0, 0.0), velocity=(-10.0, 0.0))
    eng.transmit(1, 0, 64, "far")
    eng.run_until(seconds(20))
    assert got == []  # still 400 m apart at t=0
    assert eng.distance(0, 1, eng.clock) == pytest.approx(200.0)
    eng.transmit(1, 0, 64, "near")
    eng.run_until(seconds(21))
    assert got == ["near"]


def test_distance_matches_hypot():
    eng = Engine()
    eng.register_node(0, (3.0, 0.0))
    eng.register_node(1, (0.0, 4.0))
    assert eng.distance(0, 1, 0) == pytest.approx(math.hypot(3.0, 4.0))


def test_identical_schedules_execute_identically():
    def build():
        eng = Engine()
        trace = []
        for t, tag in ((3, "a"), (1, "b"), (3, "c"), (2, "d")):
            eng.schedule_at(seconds(t), lambda tag=tag: trace.append(tag))
        eng.run_until(seconds(5))
        return trace

    assert build() == build()


def test_radio_config_validation():
    with pytest.raises(ValueError):
        RadioConfig(range_m=0.0).validate()
    with pytest.raises(ValueError):
        RadioConfig(bandwidth_bps=0).validate()
