"""Labeled datasets over flow records: the 4 classification features
(addresses and ports), train/test splitting, class balancing, CSV I/O.

A record is labeled malicious (1) when a blackhole absorbed at least one
of its packets; loss for any other reason stays normal (0).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import InsufficientClassCount, SchemaError, TooFewRows
from .flows import FlowRecord

DATASET_HEADER = "src_addr,dst_addr,src_port,dst_port,label"

FLOWS_HEADER = (
    "src_addr,dst_addr,src_port,dst_port,"
    "time_first_tx_ns,time_first_rx_ns,time_last_tx_ns,time_last_rx_ns,"
    "delay_sum_ns,jitter_sum_ns,last_delay_ns,"
    "tx_packets,rx_packets,lost_packets,tx_bytes,rx_bytes,"
    "throughput_bps,blackhole_absorbed,label"
)

_UNSET_TIME = -1  # CSV sentinel for rx timestamps of flows with no Rx


@dataclass(frozen=True)
class DatasetRow:
    src_addr: int
    dst_addr: int
    src_port: int
    dst_port: int
    label: int


@dataclass
class Dataset:
    rows: list[DatasetRow]
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def class_counts(self) -> tuple[int, int]:
        """(positive, negative) row counts."""
        pos = sum(1 for r in self.rows if r.label == 1)
        return pos, len(self.rows) - pos


def record_label(record: FlowRecord) -> int:
    return 1 if record.blackhole_absorbed >= 1 else 0


def label_flows(records: Iterable[FlowRecord], provenance: Optional[dict] = None) -> Dataset:
    rows = [
        DatasetRow(r.src_addr, r.dst_addr, r.src_port, r.dst_port, record_label(r))
        for r in records
    ]
    return Dataset(rows, provenance or {})


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    stratified: bool = False

    def validate(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Uniform random partition; first round(fraction*N) permuted rows train.

    With stratified=True the rounding rule applies per class instead.
    """
    spec.validate()
    n = len(ds.rows)
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to split, got {n}")
    rng = random.Random(spec.seed)
    if spec.stratified:
        train: list[DatasetRow] = []
        test: list[DatasetRow] = []
        for label in (1, 0):
            group = [r for r in ds.rows if r.label == label]
            rng.shuffle(group)
            k = _round_half_up(spec.train_fraction * len(group))
            train.extend(group[:k])
            test.extend(group[k:])
        rng.shuffle(train)
        rng.shuffle(test)
    else:
        order = list(range(n))
        rng.shuffle(order)
        n_train = _round_half_up(spec.train_fraction * n)
        train = [ds.rows[i] for i in order[:n_train]]
        test = [ds.rows[i] for i in order[n_train:]]
    prov = dict(ds.provenance)
    return (
        Dataset(train, {**prov, "split": "train", "split_seed": spec.seed}),
        Dataset(test, {**prov, "split": "test", "split_seed": spec.seed}),
    )


def balance(ds: Dataset, target_pos: int, target_neg: int, seed: int) -> Dataset:
    """Subsample without replacement to exact per-class counts, then shuffle."""
    pos = [r for r in ds.rows if r.label == 1]
    neg = [r for r in ds.rows if r.label == 0]
    if len(pos) < target_pos or len(neg) < target_neg:
        raise InsufficientClassCount(
            f"need {target_pos} positive / {target_neg} negative rows, "
            f"have {len(pos)} / {len(neg)}",
            available_positive=len(pos),
            available_negative=len(neg),
        )
    rng = random.Random(seed)
    chosen = rng.sample(pos, target_pos) + rng.sample(neg, target_neg)
    rng.shuffle(chosen)
    return Dataset(chosen, {**ds.provenance, "balanced": [target_pos, target_neg]})


# -- CSV I/O ----------------------------------------------------------------


def write_csv(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(DATASET_HEADER + "\n")
        for r in ds.rows:
            fh.write(f"{r.src_addr},{r.dst_addr},{r.src_port},{r.dst_port},{r.label}\n")


def read_csv(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != DATASET_HEADER:
        raise SchemaError(f"bad dataset header in {path}")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 5:
            raise SchemaError(f"{path}:{ln}: expected 5 fields, got {len(fields)}")
        try:
            values = [int(f) for f in fields]
        except ValueError as e:
            raise SchemaError(f"{path}:{ln}: non-integer field ({e})") from None
        if values[4] not in (0, 1):
            raise SchemaError(f"{path}:{ln}: label must be 0 or 1, got {values[4]}")
        rows.append(DatasetRow(*values))
    return Dataset(rows, {"source": str(path)})


def write_flows_csv(records: Iterable[FlowRecord], path) -> None:
    """Full 17-feature flow table plus ground truth and label."""

    def t(v):
        return _UNSET_TIME if v is None else v

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(FLOWS_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.src_addr},{r.dst_addr},{r.src_port},{r.dst_port},"
                f"{r.time_first_tx},{t(r.time_first_rx)},{r.time_last_tx},{t(r.time_last_rx)},"
                f"{r.delay_sum},{r.jitter_sum},{r.last_delay},"
                f"{r.tx_packets},{r.rx_packets},{r.lost_packets},{r.tx_bytes},{r.rx_bytes},"
                f"{r.throughput_bps!r},{r.blackhole_absorbed},{record_label(r)}\n"
            )


def read_flows_csv(path) -> list[FlowRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FLOWS_HEADER:
        raise SchemaError(f"bad flows header in {path}")
    records = []
    for ln, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 19:
            raise SchemaError(f"{path}:{ln}: expected 19 fields, got {len(fields)}")
        try:
            ints = [int(f) for f in fields[:16]]
            throughput = float(fields[16])
            absorbed = int(fields[17])
            label = int(fields[18])
        except ValueError as e:
            raise SchemaError(f"{path}:{ln}: bad field ({e})") from None
        if label not in (0, 1):
            raise SchemaError(f"{path}:{ln}: label must be 0 or 1, got {label}")
        rec = FlowRecord(
            src_addr=ints[0],
            dst_addr=ints[1],
            src_port=ints[2],
            dst_port=ints[3],
            time_first_tx=ints[4],
            time_first_rx=None if ints[5] == _UNSET_TIME else ints[5],
            time_last_tx=ints[6],
            time_last_rx=None if ints[7] == _UNSET_TIME else ints[7],
            delay_sum=ints[8],
            jitter_sum=ints[9],
            last_delay=ints[10],
            tx_packets=ints[11],
            rx_packets=ints[12],
            lost_packets=ints[13],
            tx_bytes=ints[14],
            rx_bytes=ints[15],
            throughput_bps=throughput,
            blackhole_absorbed=absorbed,
        )
        if record_label(rec) != label:
            raise SchemaError(f"{path}:{ln}: label inconsistent with ground truth")
        records.append(rec)
    return records
