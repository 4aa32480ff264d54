"""Sweep configuration: parameter ranges, per-scenario sampling, and the
JSON config file format used by the command line."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import RadioConfig, mix64, seconds, substream
from .errors import ConfigError
from .flows import FlowSpec
from .scenario import ArenaConfig, ScenarioParams

SRC_PORT_BASE = 49153
DST_PORT = 9
MAX_PORT = 0xFFFF

FLOW_START_MIN_S = 1.0
FLOW_START_MAX_S = 5.0

# substream purposes, mixed with (seed, scenario index)
_SAMPLE = 103


def _int_range(value, name: str) -> tuple[int, int]:
    try:
        lo, hi = int(value[0]), int(value[1])
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"{name} must be a [lo, hi] integer pair") from None
    if lo > hi:
        raise ConfigError(f"{name}: lo {lo} exceeds hi {hi}")
    if lo <= 0:
        raise ConfigError(f"{name}: bounds must be positive")
    return lo, hi


@dataclass
class ScenarioConfig:
    """Everything a sweep needs. Ranges are inclusive [lo, hi] bounds
    sampled uniformly per scenario (per flow for the traffic ranges)."""

    seed: int = 1729
    scenario_count: int = 12
    flows_per_scenario: int = 250
    flow_pairs_per_scenario: int = 30
    sim_duration_s: float = 30.0
    vehicles: tuple[int, int] = (10, 65)
    malicious: tuple[int, int] = (1, 10)
    data_rate_kbps: tuple[int, int] = (600, 1800)
    packet_count: tuple[int, int] = (7, 70)
    packet_size_bytes: tuple[int, int] = (1024, 1800)
    arena: ArenaConfig = field(default_factory=lambda: ArenaConfig(1760.0, 20.0))
    radio: RadioConfig = field(default_factory=RadioConfig)
    speed_min_mps: float = 0.4
    speed_max_mps: float = 1.0
    balance: Optional[tuple[int, int]] = (500, 1500)
    split_fraction: float = 0.6
    stratified_split: bool = False

    def validate(self) -> None:
        if self.seed < 0 or self.seed > 0xFFFFFFFFFFFFFFFF:
            raise ConfigError("seed must fit in 64 bits")
        if self.scenario_count < 1 or self.flows_per_scenario < 1:
            raise ConfigError("scenario_count and flows_per_scenario must be >= 1")
        if self.flow_pairs_per_scenario < 1:
            raise ConfigError("flow_pairs_per_scenario must be >= 1")
        if self.sim_duration_s <= FLOW_START_MAX_S:
            raise ConfigError(
                f"sim_duration_s must exceed the flow start window ({FLOW_START_MAX_S}s)"
            )
        for name in ("vehicles", "malicious", "data_rate_kbps", "packet_count",
                     "packet_size_bytes"):
            _int_range(getattr(self, name), name)
        for v_end, m_end in zip(self.vehicles, self.malicious):
            if m_end + 2 > v_end:
                raise ConfigError(
                    "each end of the malicious range must leave room for two "
                    f"honest vehicles ({m_end} + 2 > {v_end})"
                )
        if self.vehicles[1] > 254:
            raise ConfigError("at most 254 vehicles are addressable")
        last_port = SRC_PORT_BASE + self.scenario_count * self.flows_per_scenario - 1
        if last_port > MAX_PORT:
            raise ConfigError(
                f"scenario_count * flows_per_scenario exhausts the source port space "
                f"(last port {last_port} > {MAX_PORT})"
            )
        if self.arena.length_m <= 0 or self.arena.width_m <= 0:
            raise ConfigError("arena dimensions must be positive")
        self.radio.validate()
        if self.speed_min_mps < 0 or self.speed_max_mps < self.speed_min_mps:
            raise ConfigError("need 0 <= speed_min_mps <= speed_max_mps")
        if self.balance is not None:
            if self.balance[0] < 1 or self.balance[1] < 1:
                raise ConfigError("balance counts must be positive")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split_fraction must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "scenario_count": self.scenario_count,
            "flows_per_scenario": self.flows_per_scenario,
            "flow_pairs_per_scenario": self.flow_pairs_per_scenario,
            "sim_duration_s": self.sim_duration_s,
            "vehicles": list(self.vehicles),
            "malicious": list(self.malicious),
            "data_rate_kbps": list(self.data_rate_kbps),
            "packet_count": list(self.packet_count),
            "packet_size_bytes": list(self.packet_size_bytes),
            "arena": {"length_m": self.arena.length_m, "width_m": self.arena.width_m},
            "radio": {
                "range_m": self.radio.range_m,
                "bandwidth_bps": self.radio.bandwidth_bps,
                "prop_delay_s_per_m": self.radio.prop_delay_s_per_m,
            },
            "mobility": {
                "speed_min_mps": self.speed_min_mps,
                "speed_max_mps": self.speed_max_mps,
            },
            "balance": list(self.balance) if self.balance is not None else None,
            "split_fraction": self.split_fraction,
            "stratified_split": self.stratified_split,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        cfg = cls()
        known = {
            "seed", "scenario_count", "flows_per_scenario",
            "flow_pairs_per_scenario", "sim_duration_s",
            "vehicles", "malicious", "data_rate_kbps", "packet_count",
            "packet_size_bytes", "arena", "radio", "mobility", "balance",
            "split_fraction", "stratified_split",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "seed" in raw:
                cfg.seed = int(raw["seed"])
            if "scenario_count" in raw:
                cfg.scenario_count = int(raw["scenario_count"])
            if "flows_per_scenario" in raw:
                cfg.flows_per_scenario = int(raw["flows_per_scenario"])
            if "flow_pairs_per_scenario" in raw:
                cfg.flow_pairs_per_scenario = int(raw["flow_pairs_per_scenario"])
            if "sim_duration_s" in raw:
                cfg.sim_duration_s = float(raw["sim_duration_s"])
            for name in ("vehicles", "malicious", "data_rate_kbps", "packet_count",
                         "packet_size_bytes"):
                if name in raw:
                    setattr(cfg, name, _int_range(raw[name], name))
            if "arena" in raw:
                a = dict(raw["arena"])
                cfg.arena = ArenaConfig(
                    length_m=float(a.pop("length_m", cfg.arena.length_m)),
                    width_m=float(a.pop("width_m", cfg.arena.width_m)),
                )
                if a:
                    raise ConfigError(f"unknown arena keys: {sorted(a)}")
            if "radio" in raw:
                r = dict(raw["radio"])
                cfg.radio = RadioConfig(
                    range_m=float(r.pop("range_m", cfg.radio.range_m)),
                    bandwidth_bps=int(r.pop("bandwidth_bps", cfg.radio.bandwidth_bps)),
                    prop_delay_s_per_m=float(
                        r.pop("prop_delay_s_per_m", cfg.radio.prop_delay_s_per_m)
                    ),
                )
                if r:
                    raise ConfigError(f"unknown radio keys: {sorted(r)}")
            if "mobility" in raw:
                m = dict(raw["mobility"])
                cfg.speed_min_mps = float(m.pop("speed_min_mps", cfg.speed_min_mps))
                cfg.speed_max_mps = float(m.pop("speed_max_mps", cfg.speed_max_mps))
                if m:
                    raise ConfigError(f"unknown mobility keys: {sorted(m)}")
            if "balance" in raw:
                b = raw["balance"]
                cfg.balance = None if b is None else (int(b[0]), int(b[1]))
            if "split_fraction" in raw:
                cfg.split_fraction = float(raw["split_fraction"])
            if "stratified_split" in raw:
                cfg.stratified_split = bool(raw["stratified_split"])
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError, IndexError) as e:
            raise ConfigError(f"malformed config value: {e}") from None
        cfg.validate()
        return cfg


def default_config() -> ScenarioConfig:
    cfg = ScenarioConfig()
    cfg.validate()
    return cfg


def _grid(lo: int, hi: int, index: int, count: int) -> int:
    """Integer grid point `index` of `count` spanning [lo, hi] inclusive."""
    if count <= 1:
        return hi
    return lo + round(index * (hi - lo) / (count - 1))


def sample_scenario(cfg: ScenarioConfig, index: int) -> ScenarioParams:
    """Scenario `index` of the sweep. Vehicle and attacker counts walk an
    ascending grid over their ranges, the way a load sweep steps through
    its operating points; traffic parameters are drawn per flow from a
    (seed, index)-derived substream."""
    rng = substream(cfg.seed, index, _SAMPLE)
    vehicles = _grid(cfg.vehicles[0], cfg.vehicles[1], index, cfg.scenario_count)
    malicious = min(
        _grid(cfg.malicious[0], cfg.malicious[1], index, cfg.scenario_count),
        vehicles - 2,
    )
    blackholes = tuple(sorted(rng.sample(range(vehicles), malicious)))
    honest = [n for n in range(vehicles) if n not in set(blackholes)]

    # Traffic concentrates on a fixed pool of conversation pairs so the
    # same endpoints exchange packets repeatedly, as fleet telemetry and
    # platooning links do. Pool entries may collide; that only skews the
    # repeat counts, not the uniformity of the draw.
    pairs = [tuple(rng.sample(honest, 2)) for _ in range(cfg.flow_pairs_per_scenario)]

    port_base = SRC_PORT_BASE + index * cfg.flows_per_scenario
    flows = []
    for f in range(cfg.flows_per_scenario):
        src, dst = pairs[rng.randrange(len(pairs))]
        flows.append(
            FlowSpec(
                src=src,
                dst=dst,
                src_port=port_base + f,
                dst_port=DST_PORT,
                packet_size_bytes=rng.randint(*cfg.packet_size_bytes),
                data_rate_bps=rng.randint(*cfg.data_rate_kbps) * 1000,
                packet_count=rng.randint(*cfg.packet_count),
                start=seconds(rng.uniform(FLOW_START_MIN_S, FLOW_START_MAX_S)),
            )
        )
    return ScenarioParams(
        index=index,
        seed=cfg.seed,
        vehicles=vehicles,
        blackholes=blackholes,
        flows=flows,
        sim_duration_ns=seconds(cfg.sim_duration_s),
        arena=ArenaConfig(cfg.arena.length_m, cfg.arena.width_m),
        radio=RadioConfig(
            cfg.radio.range_m, cfg.radio.bandwidth_bps, cfg.radio.prop_delay_s_per_m
        ),
        speed_range_mps=(cfg.speed_min_mps, cfg.speed_max_mps),
    )


def derived_seed(seed: int, purpose: int) -> int:
    """Stable sub-seed for downstream stages (split, balance, models)."""
    return mix64(seed, purpose)
