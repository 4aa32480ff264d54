"""Constant-bit-rate traffic generation and per-flow statistics.

A flow is the stream of packets sharing (src address, dst address,
src port, dst port). The monitor accumulates, per flow, the 17 stored
statistics (addresses/ports, first/last tx and rx times, delay sum,
jitter sum, last delay, packet and byte counters, throughput) plus the
ground-truth count of packets absorbed by a blackhole node.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .engine import NS_PER_S, SimTime
from .errors import DuplicateTerminal, InvalidSpec


def node_address(node_id: int) -> int:
    """32-bit address of node n: the base-256 value of 10.1.1.(n+1)."""
    if not 0 <= node_id <= 253:
        raise ValueError(f"node id {node_id} outside addressable range")
    return (10 << 24) | (1 << 16) | (1 << 8) | (node_id + 1)


class DropCause(enum.Enum):
    NO_ROUTE = "no_route"
    QUEUE_OVERFLOW = "queue_overflow"
    BLACKHOLE_ABSORBED = "blackhole_absorbed"
    OUT_OF_RANGE = "out_of_range"
    END_OF_SIM = "end_of_sim"


@dataclass(frozen=True)
class FlowKey:
    src_addr: int
    dst_addr: int
    src_port: int
    dst_port: int


@dataclass
class FlowSpec:
    """One CBR flow: packet_count packets of packet_size_bytes, paced so the
    on-air bit rate equals data_rate_bps, starting at `start`."""

    src: int
    dst: int
    src_port: int
    dst_port: int
    packet_size_bytes: int
    data_rate_bps: int
    packet_count: int
    start: SimTime

    def validate(self) -> None:
        if self.src == self.dst:
            raise InvalidSpec("flow src and dst must differ")
        if self.packet_size_bytes <= 0 or self.data_rate_bps <= 0 or self.packet_count <= 0:
            raise InvalidSpec("packet size, data rate and packet count must be positive")
        if not (0 <= self.src_port <= 0xFFFF and 0 <= self.dst_port <= 0xFFFF):
            raise InvalidSpec("ports must fit in 16 bits")

    @property
    def key(self) -> FlowKey:
        return FlowKey(
            node_address(self.src), node_address(self.dst), self.src_port, self.dst_port
        )

    @property
    def interval_ns(self) -> SimTime:
        return (self.packet_size_bytes * 8 * NS_PER_S) // self.data_rate_bps


@dataclass
class DataPacket:
    key: FlowKey
    seq: int
    src: int
    dst: int
    size_bytes: int
    tx_time: SimTime


class ObsKind(enum.Enum):
    TX = "tx"
    RX = "rx"
    DROP = "drop"


@dataclass(frozen=True)
class FlowObservation:
    kind: ObsKind
    key: FlowKey
    seq: int
    time: SimTime
    size_bytes: int
    cause: Optional[DropCause] = None


@dataclass
class FlowRecord:
    """Finalized per-flow statistics; rx timestamps stay None when nothing
    was received."""

    src_addr: int
    dst_addr: int
    src_port: int
    dst_port: int
    time_first_tx: SimTime
    time_first_rx: Optional[SimTime]
    time_last_tx: SimTime
    time_last_rx: Optional[SimTime]
    delay_sum: int
    jitter_sum: int
    last_delay: int
    tx_packets: int
    rx_packets: int
    lost_packets: int
    tx_bytes: int
    rx_bytes: int
    throughput_bps: float
    blackhole_absorbed: int  # ground truth, not one of the 17 features

    @property
    def key(self) -> FlowKey:
        return FlowKey(self.src_addr, self.dst_addr, self.src_port, self.dst_port)


@dataclass
class _FlowAccumulator:
    key: FlowKey
    time_first_tx: Optional[SimTime] = None
    time_first_rx: Optional[SimTime] = None
    time_last_tx: Optional[SimTime] = None
    time_last_rx: Optional[SimTime] = None
    delay_sum: int = 0
    jitter_sum: int = 0
    last_delay: int = 0
    tx_packets: int = 0
    rx_packets: int = 0
    lost_packets: int = 0
    tx_bytes: int = 0
    rx_bytes: int = 0
    blackhole_absorbed: int = 0
    tx_times: dict[int, SimTime] = field(default_factory=dict)
    open_seqs: set[int] = field(default_factory=set)


class FlowMonitor:
    """Collects Tx/Rx/Drop observations and finalizes them into FlowRecords.

    The raw observation log is kept so accumulators can be re-derived and
    audited after a run.
    """

    def __init__(self) -> None:
        self._flows: dict[FlowKey, _FlowAccumulator] = {}
        self.log: list[FlowObservation] = []

    def _acc(self, key: FlowKey) -> _FlowAccumulator:
        if key not in self._flows:
            self._flows[key] = _FlowAccumulator(key)
        return self._flows[key]

    # -- observation entry points ---------------------------------------

    def observe_tx(self, key: FlowKey, seq: int, time: SimTime, size_bytes: int) -> None:
        self.observe(FlowObservation(ObsKind.TX, key, seq, time, size_bytes))

    def observe_rx(self, key: FlowKey, seq: int, time: SimTime, size_bytes: int) -> None:
        self.observe(FlowObservation(ObsKind.RX, key, seq, time, size_bytes))

    def observe_drop(
        self, key: FlowKey, seq: int, time: SimTime, size_bytes: int, cause: DropCause
    ) -> None:
        self.observe(FlowObservation(ObsKind.DROP, key, seq, time, size_bytes, cause))

    def observe(self, o: FlowObservation) -> None:
        acc = self._acc(o.key)
        if o.kind is ObsKind.TX:
            if o.seq in acc.tx_times:
                raise DuplicateTerminal(f"duplicate Tx for {o.key} seq {o.seq}")
            acc.tx_times[o.seq] = o.time
            acc.open_seqs.add(o.seq)
            acc.tx_packets += 1
            acc.tx_bytes += o.size_bytes
            if acc.time_first_tx is None:
                acc.time_first_tx = o.time
            acc.time_last_tx = o.time
        else:
            if o.seq not in acc.tx_times:
                raise DuplicateTerminal(f"terminal before Tx for {o.key} seq {o.seq}")
            if o.seq not in acc.open_seqs:
                raise DuplicateTerminal(
                    f"second terminal observation for {o.key} seq {o.seq}"
                )
            acc.open_seqs.discard(o.seq)
            if o.kind is ObsKind.RX:
                delay = o.time - acc.tx_times[o.seq]
                if acc.rx_packets > 0:
                    acc.jitter_sum += abs(delay - acc.last_delay)
                acc.last_delay = delay
                acc.delay_sum += delay
                acc.rx_packets += 1
                acc.rx_bytes += o.size_bytes
                if acc.time_first_rx is None:
                    acc.time_first_rx = o.time
                acc.time_last_rx = o.time
            else:
                acc.lost_packets += 1
                if o.cause is DropCause.BLACKHOLE_ABSORBED:
                    acc.blackhole_absorbed += 1
        self.log.append(o)

    # -- finalize ---------------------------------------------------------

    def finalize(self, t_end: SimTime) -> list[FlowRecord]:
        """Close still-open packets as end-of-sim drops and emit one record
        per flow, ordered by flow key."""
        for acc in self._flows.values():
            for seq in sorted(acc.open_seqs):
                self.observe_drop(
                    acc.key, seq, t_end, 0, DropCause.END_OF_SIM
                )
        records = []
        for key in sorted(
            self._flows, key=lambda k: (k.src_addr, k.dst_addr, k.src_port, k.dst_port)
        ):
            acc = self._flows[key]
            records.append(
                FlowRecord(
                    src_addr=key.src_addr,
                    dst_addr=key.dst_addr,
                    src_port=key.src_port,
                    dst_port=key.dst_port,
                    time_first_tx=acc.time_first_tx if acc.time_first_tx is not None else 0,
                    time_first_rx=acc.time_first_rx,
                    time_last_tx=acc.time_last_tx if acc.time_last_tx is not None else 0,
                    time_last_rx=acc.time_last_rx,
                    delay_sum=acc.delay_sum,
                    jitter_sum=acc.jitter_sum,
                    last_delay=acc.last_delay,
                    tx_packets=acc.tx_packets,
                    rx_packets=acc.rx_packets,
                    lost_packets=acc.lost_packets,
                    tx_bytes=acc.tx_bytes,
                    rx_bytes=acc.rx_bytes,
                    throughput_bps=_throughput_bps(acc),
                    blackhole_absorbed=acc.blackhole_absorbed,
                )
            )
        return records


def _throughput_bps(acc: _FlowAccumulator) -> float:
    if acc.rx_packets == 0 or acc.time_last_rx is None or acc.time_first_tx is None:
        return 0.0
    window_ns = acc.time_last_rx - acc.time_first_tx
    if window_ns <= 0:
        return 0.0
    return acc.rx_bytes * 8 / (window_ns / NS_PER_S)


def start_flow(engine, node, monitor: FlowMonitor, spec: FlowSpec) -> None:
    """Schedule the flow's packets on the engine.

    `node` is the source's routing agent; each packet is handed to it via
    send_data() right after the Tx observation is recorded, so every packet
    has a Tx entry regardless of what routing later does with it.
    """
    spec.validate()
    key = spec.key
    interval = spec.interval_ns
    for i in range(spec.packet_count):

        def emit(i=i):
            pkt = DataPacket(
                key=key,
                seq=i,
                src=spec.src,
                dst=spec.dst,
                size_bytes=spec.packet_size_bytes,
                tx_time=engine.clock,
            )
            monitor.observe_tx(key, i, engine.clock, spec.packet_size_bytes)
            node.send_data(pkt)

        engine.schedule_at(spec.start + i * interval, emit, target=spec.src)


def recompute_from_log(
    log: Iterable[FlowObservation],
) -> dict[FlowKey, dict[str, int]]:
    """Brute-force re-derivation of delay/jitter/counter accumulators from
    an observation log; used to audit the incremental bookkeeping."""
    tx_times: dict[tuple[FlowKey, int], SimTime] = {}
    out: dict[FlowKey, dict[str, int]] = {}
    delays: dict[FlowKey, list[int]] = {}
    for o in log:
        acc = out.setdefault(
            o.key,
            {
                "tx_packets": 0,
                "rx_packets": 0,
                "lost_packets": 0,
                "delay_sum": 0,
                "jitter_sum": 0,
                "last_delay": 0,
                "blackhole_absorbed": 0,
            },
        )
        if o.kind is ObsKind.TX:
            tx_times[(o.key, o.seq)] = o.time
            acc["tx_packets"] += 1
        elif o.kind is ObsKind.RX:
            d = o.time - tx_times[(o.key, o.seq)]
            delays.setdefault(o.key, []).append(d)
            acc["rx_packets"] += 1
        else:
            acc["lost_packets"] += 1
            if o.cause is DropCause.BLACKHOLE_ABSORBED:
                acc["blackhole_absorbed"] += 1
    for key, ds in delays.items():
        out[key]["delay_sum"] = sum(ds)
        out[key]["jitter_sum"] = sum(abs(b - a) for a, b in zip(ds, ds[1:]))
        out[key]["last_delay"] = ds[-1]
    return out
