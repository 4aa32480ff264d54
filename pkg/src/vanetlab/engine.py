"""Deterministic discrete-event core.

Virtual time is integer nanoseconds. Events are totally ordered by
(fire_time, insertion seq), so two runs with the same inputs execute the
same trace. Radio delivery is an ideal unit disk: a frame reaches every
node within range, with latency floor(size*8/bandwidth) plus propagation.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import SchedulingInPast, UnknownNode

SimTime = int  # nanoseconds of virtual time

NS_PER_S = 1_000_000_000

#: transmit() destination meaning "all nodes in range"
BROADCAST = -1


def seconds(s: float) -> SimTime:
    """Convert seconds to integer nanoseconds (floor)."""
    return int(s * NS_PER_S)


def mix64(*parts: int) -> int:
    """Mix integers into one 64-bit value (splitmix64 avalanche per part).

    Used to derive independent substream seeds from (master seed, key...)
    tuples; identical inputs give identical outputs on every platform.
    """
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h + (p & 0xFFFFFFFFFFFFFFFF)) & 0xFFFFFFFFFFFFFFFF
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        h ^= h >> 31
    return h


def substream(seed: int, *keys: int) -> random.Random:
    """Deterministic per-purpose RNG derived from a master seed."""
    return random.Random(mix64(seed, *keys))


@dataclass
class RadioConfig:
    """Unit-disk radio: in-range frames always arrive, others never do."""

    range_m: float = 250.0
    bandwidth_bps: int = 6_000_000
    prop_delay_s_per_m: float = 3.336e-9

    def validate(self) -> None:
        if self.range_m <= 0:
            raise ValueError("range_m must be > 0")
        if self.bandwidth_bps <= 0:
            raise ValueError("bandwidth_bps must be > 0")


@dataclass(order=True)
class Event:
    fire_time: SimTime
    seq: int
    target: Optional[int] = field(compare=False, default=None)
    payload: Any = field(compare=False, default=None)
    action: Optional[Callable[[], None]] = field(compare=False, default=None, repr=False)


@dataclass
class _NodeState:
    position: tuple[float, float]
    velocity: tuple[float, float]
    receiver: Optional[Callable[[int, Any], None]]


class Engine:
    """Single-threaded event loop plus node registry and radio model."""

    def __init__(self, radio: RadioConfig | None = None):
        self.radio = radio or RadioConfig()
        self.radio.validate()
        self.clock: SimTime = 0
        self._queue: list[Event] = []
        self._seq = 0
        self._nodes: dict[int, _NodeState] = {}
        # called as drop_hook(src, dst, payload) when a unicast has no
        # in-range receiver; wired to the flow monitor by the scenario
        self.drop_hook: Optional[Callable[[int, int, Any], None]] = None

    # -- node registry -------------------------------------------------

    def register_node(
        self,
        node_id: int,
        position: tuple[float, float],
        velocity: tuple[float, float] = (0.0, 0.0),
        receiver: Optional[Callable[[int, Any], None]] = None,
    ) -> None:
        self._nodes[node_id] = _NodeState(position, velocity, receiver)

    def set_receiver(self, node_id: int, receiver: Callable[[int, Any], None]) -> None:
        self._state(node_id).receiver = receiver

    def node_ids(self) -> list[int]:
        return sorted(self._nodes)

    def _state(self, node_id: int) -> _NodeState:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"node {node_id} is not registered") from None

    # -- scheduling ----------------------------------------------------

    def schedule(self, ev: Event) -> None:
        if ev.fire_time < self.clock:
            raise SchedulingInPast(
                f"event at t={ev.fire_time} but clock is {self.clock}"
            )
        heapq.heappush(self._queue, ev)

    def schedule_at(
        self,
        fire_time: SimTime,
        action: Callable[[], None],
        target: Optional[int] = None,
        payload: Any = None,
    ) -> Event:
        ev = Event(fire_time, self._next_seq(), target, payload, action)
        self.schedule(ev)
        return ev

    def schedule_in(
        self,
        delay: SimTime,
        action: Callable[[], None],
        target: Optional[int] = None,
        payload: Any = None,
    ) -> Event:
        return self.schedule_at(self.clock + delay, action, target, payload)

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def run_until(self, t_end: SimTime) -> int:
        """Execute every event with fire_time <= t_end; returns the count."""
        if t_end < self.clock:
            raise ValueError(f"t_end {t_end} is before clock {self.clock}")
        executed = 0
        while self._queue and self._queue[0].fire_time <= t_end:
            ev = heapq.heappop(self._queue)
            self.clock = ev.fire_time
            if ev.action is not None:
                ev.action()
            executed += 1
        self.clock = t_end
        return executed

    # -- positions and connectivity -------------------------------------

    def position_at(self, node_id: int, t: SimTime) -> tuple[float, float]:
        st = self._state(node_id)
        dt = t / NS_PER_S
        return (st.position[0] + st.velocity[0] * dt, st.position[1] + st.velocity[1] * dt)

    def distance(self, a: int, b: int, t: SimTime) -> float:
        pa = self.position_at(a, t)
        pb = self.position_at(b, t)
        return math.hypot(pa[0] - pb[0], pa[1] - pb[1])

    def neighbors(self, node_id: int, t: SimTime) -> list[int]:
        """All other nodes within radio range at time t, ascending id."""
        self._state(node_id)
        out = []
        for other in sorted(self._nodes):
            if other == node_id:
                continue
            if self.distance(node_id, other, t) <= self.radio.range_m:
                out.append(other)
        return out

    # -- radio -----------------------------------------------------------

    def latency_ns(self, size_bytes: int, distance_m: float) -> SimTime:
        """Serialization plus propagation delay, floored to whole ns, >= 1."""
        tx = (size_bytes * 8 * NS_PER_S) // self.radio.bandwidth_bps
        prop = int(self.radio.prop_delay_s_per_m * distance_m * NS_PER_S)
        return max(1, tx + prop)

    def transmit(self, src: int, dst: int, size_bytes: int, payload: Any) -> None:
        """Schedule delivery of one frame.

        dst == BROADCAST reaches every in-range node; a unicast to an
        out-of-range (or unknown-position) destination is silently lost,
        reported through drop_hook.
        """
        self._state(src)
        if size_bytes <= 0:
            raise ValueError("size_bytes must be > 0")
        if dst == BROADCAST:
            receivers = self.neighbors(src, self.clock)
        else:
            self._state(dst)
            receivers = [dst] if dst in self.neighbors(src, self.clock) else []
            if not receivers and self.drop_hook is not None:
                self.drop_hook(src, dst, payload)
        for rcv in receivers:
            dist = self.distance(src, rcv, self.clock)
            state = self._state(rcv)

            def deliver(state=state, src=src, payload=payload):
                if state.receiver is not None:
                    state.receiver(src, payload)

            self.schedule_at(
                self.clock + self.latency_ns(size_bytes, dist),
                deliver,
                target=rcv,
                payload=payload,
            )
