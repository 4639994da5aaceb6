"""Scenario configuration: geometry, radio constants, and algorithm knobs.

All physical quantities are stored in linear SI units (meters, seconds,
watts). dB / dBm values from datasheets are converted once, at config
construction time, via :func:`db_to_linear` / :func:`dbm_to_watts`.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

UAV_NAMES = ("alice", "jack")  # source transmitter, cooperative jammer
RX_NAMES = ("bob", "eve")  # intended user, eavesdropper


def db_to_linear(db: float) -> float:
    """Power ratio in dB -> linear ratio."""
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    """Power level in dBm -> watts."""
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class AlgorithmParams:
    """Tolerances and schedules for the block-coordinate pipeline.

    trust_radius_init is a fraction of the per-slot displacement limit;
    penalty_init is a fraction of the source transmit-power budget.
    """

    bcd_tol: float = 1e-3
    bf_tol: float = 1e-4
    traj_tol_alice: float = 1e-4
    traj_tol_jack: float = 1e-4
    penalty_init: float = 1e-2
    penalty_shrink: float = 0.5
    trust_radius_init: float = 1.0
    trust_shrink_alice: float = 0.8
    trust_shrink_jack: float = 0.8
    max_outer_iters: int = 30
    max_inner_iters: int = 30
    max_penalty_rounds: int = 10
    solver_tol: float = 1e-7
    rank_one_ratio_min: float = 0.999


@dataclass(frozen=True)
class ScenarioConfig:
    """Full experiment description.

    Positions are 2-D ground-plane coordinates in meters; each UAV flies at
    a fixed altitude ``height[uav]``. ``n_slots`` must equal
    round(task_duration / slot_duration); it is stored explicitly so a config
    file is self-describing.
    """

    uav_initial: dict[str, tuple[float, float]]
    uav_final: dict[str, tuple[float, float]]
    height: dict[str, float]
    bob_pos: tuple[float, float]
    eve_pos: tuple[float, float]
    targets: tuple[tuple[float, float], ...]
    max_speed: float
    slot_duration: float
    task_duration: float
    n_slots: int
    n_sensing_slots: int
    slots_per_target: int
    n_antennas: int
    antenna_spacing: float
    pathloss_ref: float
    noise_power: dict[str, float]
    p_max: dict[str, float]
    residual_jam_bob: float
    residual_jam_eve: float
    residual_sense_bob: float
    residual_sense_eve: float
    beampattern_threshold: float
    distance_weight: float
    algo: AlgorithmParams = field(default_factory=AlgorithmParams)

    @property
    def slot_displacement(self) -> float:
        """Maximum per-slot displacement in meters (speed * slot length)."""
        return self.max_speed * self.slot_duration

    def replace(self, **changes: Any) -> "ScenarioConfig":
        """Return a copy with top-level fields replaced (re-validated)."""
        data = _to_plain_dict(self)
        for key, value in changes.items():
            if key not in data:
                raise KeyError(f"unknown scenario field: {key!r}")
            data[key] = value
        cfg = _from_plain_dict(data)
        validate_scenario(cfg)
        return cfg


def default_scenario() -> ScenarioConfig:
    """Reference configuration used throughout the experiments.

    Target positions are a fixed, documented choice (the source material
    leaves them as "randomly located"): four points spread along the flight
    corridor on both sides of the straight initial-to-final path.
    """
    cfg = ScenarioConfig(
        uav_initial={"alice": (0.0, 0.0), "jack": (0.0, 0.0)},
        uav_final={"alice": (100.0, 0.0), "jack": (100.0, 0.0)},
        height={"alice": 120.0, "jack": 100.0},
        bob_pos=(40.0, 60.0),
        eve_pos=(60.0, 60.0),
        targets=((20.0, 15.0), (40.0, -20.0), (65.0, 30.0), (85.0, -5.0)),
        max_speed=20.0,
        slot_duration=0.5,
        task_duration=10.0,
        n_slots=20,
        n_sensing_slots=8,
        slots_per_target=2,
        n_antennas=4,
        antenna_spacing=0.5,
        pathloss_ref=db_to_linear(-30.0),
        noise_power={"bob": dbm_to_watts(-80.0), "eve": dbm_to_watts(-80.0)},
        p_max={"alice": dbm_to_watts(30.0), "jack": dbm_to_watts(25.0)},
        residual_jam_bob=db_to_linear(-20.0),
        residual_jam_eve=db_to_linear(0.0),
        residual_sense_bob=db_to_linear(-20.0),
        residual_sense_eve=db_to_linear(0.0),
        beampattern_threshold=dbm_to_watts(-20.0),
        distance_weight=0.5,
        algo=AlgorithmParams(),
    )
    validate_scenario(cfg)
    return cfg


_PAIR_FIELDS = {"uav_initial": UAV_NAMES, "uav_final": UAV_NAMES}
_SCALAR_MAP_FIELDS = {"height": UAV_NAMES, "noise_power": RX_NAMES, "p_max": UAV_NAMES}


def validate_scenario(cfg: ScenarioConfig) -> None:
    """Raise ValueError on any inconsistent or out-of-range field."""

    def fail(msg: str) -> None:
        raise ValueError(f"invalid scenario: {msg}")

    for name, keys in {**_PAIR_FIELDS, **_SCALAR_MAP_FIELDS}.items():
        mapping = getattr(cfg, name)
        if set(mapping) != set(keys):
            fail(f"{name} must have exactly the keys {keys}")

    if cfg.slot_duration <= 0 or cfg.task_duration <= 0:
        fail("durations must be positive")
    if cfg.n_slots != round(cfg.task_duration / cfg.slot_duration):
        fail("n_slots must equal round(task_duration / slot_duration)")
    if cfg.n_slots < 1:
        fail("need at least one slot")
    if cfg.max_speed <= 0:
        fail("max_speed must be positive")
    if cfg.n_antennas < 1:
        fail("n_antennas must be >= 1")
    if cfg.antenna_spacing <= 0:
        fail("antenna_spacing must be positive")
    if not (0.0 < cfg.pathloss_ref):
        fail("pathloss_ref must be positive")
    for q in RX_NAMES:
        if cfg.noise_power[q] <= 0:
            fail(f"noise_power[{q}] must be positive")
    for m in UAV_NAMES:
        if cfg.p_max[m] < 0:
            fail(f"p_max[{m}] must be nonnegative")
        if cfg.height[m] <= 0:
            fail(f"height[{m}] must be positive")
    for name in ("residual_jam_bob", "residual_jam_eve", "residual_sense_bob", "residual_sense_eve"):
        value = getattr(cfg, name)
        if not (0.0 <= value <= 1.0):
            fail(f"{name} must lie in [0, 1]")
    if cfg.beampattern_threshold < 0:
        fail("beampattern_threshold must be nonnegative")
    if not (0.0 <= cfg.distance_weight <= 1.0):
        fail("distance_weight must lie in [0, 1]")
    if cfg.slots_per_target < 0 or cfg.n_sensing_slots < 0:
        fail("sensing slot counts must be nonnegative")
    if cfg.n_sensing_slots != cfg.slots_per_target * len(cfg.targets):
        fail("n_sensing_slots must equal slots_per_target * number of targets")
    if cfg.n_sensing_slots > cfg.n_slots:
        fail("n_sensing_slots cannot exceed n_slots")
    for m in UAV_NAMES:
        start = cfg.uav_initial[m]
        end = cfg.uav_final[m]
        span = math.dist(start, end)
        if span > cfg.n_slots * cfg.slot_displacement + 1e-9:
            fail(f"{m}: endpoints unreachable within the task period")


def _to_plain_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    data = asdict(cfg)
    data["uav_initial"] = {m: list(v) for m, v in cfg.uav_initial.items()}
    data["uav_final"] = {m: list(v) for m, v in cfg.uav_final.items()}
    data["targets"] = [list(t) for t in cfg.targets]
    data["bob_pos"] = list(cfg.bob_pos)
    data["eve_pos"] = list(cfg.eve_pos)
    return data


def _from_plain_dict(data: dict[str, Any]) -> ScenarioConfig:
    data = copy.deepcopy(data)
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    missing = known - set(data)
    if missing:
        raise ValueError(f"missing scenario keys: {sorted(missing)}")

    algo_data = data.pop("algo")
    algo_known = set(AlgorithmParams.__dataclass_fields__)
    algo_unknown = set(algo_data) - algo_known
    if algo_unknown:
        raise ValueError(f"unknown algo keys: {sorted(algo_unknown)}")
    algo = AlgorithmParams(**algo_data)

    for name in ("bob_pos", "eve_pos"):
        data[name] = tuple(float(x) for x in data[name])
    data["targets"] = tuple(tuple(float(x) for x in t) for t in data["targets"])
    for name in _PAIR_FIELDS:
        data[name] = {m: tuple(float(x) for x in v) for m, v in data[name].items()}
    for name in _SCALAR_MAP_FIELDS:
        data[name] = {k: float(v) for k, v in data[name].items()}
    return ScenarioConfig(algo=algo, **data)


def save_scenario(cfg: ScenarioConfig, path: str) -> None:
    """Write the config as JSON (floats round-trip exactly)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_to_plain_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scenario(path: str) -> ScenarioConfig:
    """Load a JSON config; unknown keys are an error."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    cfg = _from_plain_dict(data)
    validate_scenario(cfg)
    return cfg
