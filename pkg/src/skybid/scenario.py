"""World geometry, fleet description, surveillance queue dynamics, and
scenario file loading.

Positions are kilometres in a square map; the data queue is megabytes.
All types are immutable value objects and every operation is a pure
function, so instances are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

from skybid import energy
from skybid.errors import ParseError, ValidationError


@dataclass(frozen=True)
class Position:
    """Point in the world frame, kilometres."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"position {name} must be finite")
        if self.z < 0:
            raise ValidationError(f"position z must be >= 0, got {self.z}")

    def distance_to(self, other: "Position") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2 + (self.y - other.y) ** 2 + (self.z - other.z) ** 2
        )


def round_trip_distance(drone: Position, surveillance: Position, base: Position) -> float:
    """Length in kilometres of the leg drone -> surveillance -> base station."""
    return drone.distance_to(surveillance) + surveillance.distance_to(base)


@dataclass(frozen=True)
class DroneSpec:
    """Airframe datasheet values."""

    model_name: str
    weight_g: float
    max_speed_kmh: float
    max_flight_time_min: float
    battery_capacity_mah: float
    battery_voltage_v: float

    def __post_init__(self):
        for name in (
            "weight_g",
            "max_speed_kmh",
            "max_flight_time_min",
            "battery_capacity_mah",
            "battery_voltage_v",
        ):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def max_speed_ms(self) -> float:
        return self.max_speed_kmh / 3.6


@dataclass(frozen=True)
class DeliveryRequest:
    """A broadcast request: how much data, and how fast it must arrive.

    A request whose latency budget cannot even cover the radio transfer is
    constructible but admits no candidates downstream.
    """

    data_amount_mb: float
    max_latency_s: float
    link_rate_mbps: float = 250.0
    link_range_m: float = 200.0

    def __post_init__(self):
        if self.data_amount_mb < 0:
            raise ValidationError(f"data_amount_mb must be >= 0, got {self.data_amount_mb}")
        for name in ("max_latency_s", "link_rate_mbps", "link_range_m"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class SurveillanceQueue:
    """Finite on-board data buffer with a constant arrival rate.

    ``dropped_mb`` accumulates data lost to buffer overflow.
    """

    capacity_mb: float
    backlog_mb: float
    arrival_rate_mb: float
    dropped_mb: float = 0.0

    def __post_init__(self):
        if not self.capacity_mb > 0:
            raise ValidationError(f"capacity_mb must be > 0, got {self.capacity_mb}")
        if not 0 <= self.backlog_mb <= self.capacity_mb:
            raise ValidationError(
                f"backlog_mb must be within [0, {self.capacity_mb}], got {self.backlog_mb}"
            )
        if self.arrival_rate_mb < 0:
            raise ValidationError(
                f"arrival_rate_mb must be >= 0, got {self.arrival_rate_mb}"
            )
        if self.dropped_mb < 0:
            raise ValidationError(f"dropped_mb must be >= 0, got {self.dropped_mb}")


def queue_step(
    queue: SurveillanceQueue, served_mb: float, scheduled: bool
) -> SurveillanceQueue:
    """One time step of the buffer: arrivals always land, service happens
    only when a delivery drone was scheduled, overflow is clamped and
    counted in ``dropped_mb``."""
    if served_mb < 0:
        raise ValidationError(f"served_mb must be >= 0, got {served_mb}")
    raw = queue.backlog_mb - (served_mb if scheduled else 0.0) + queue.arrival_rate_mb
    dropped = max(raw - queue.capacity_mb, 0.0)
    backlog = min(max(raw, 0.0), queue.capacity_mb)
    return replace(queue, backlog_mb=backlog, dropped_mb=queue.dropped_mb + dropped)


@dataclass(frozen=True)
class SurveillanceDrone:
    position: Position
    spec: DroneSpec


@dataclass(frozen=True)
class DeliveryDrone:
    position: Position
    spec: DroneSpec
    remaining_energy_j: float
    demand: float

    def __post_init__(self):
        if self.remaining_energy_j < 0:
            raise ValidationError(
                f"remaining_energy_j must be >= 0, got {self.remaining_energy_j}"
            )
        if not 0 <= self.demand <= 1:
            raise ValidationError(f"demand must be in [0, 1], got {self.demand}")


@dataclass(frozen=True)
class Scenario:
    """A complete world: map, fleet, base stations, and the active request."""

    map_side_km: float
    surveillance: SurveillanceDrone
    delivery_drones: tuple[DeliveryDrone, ...]
    base_stations: tuple[Position, ...]
    request: DeliveryRequest
    rng_seed: int = 0
    energy_params: energy.EnergyParams = field(default_factory=energy.default_params)
    queue: SurveillanceQueue | None = None

    def __post_init__(self):
        if not self.map_side_km > 0:
            raise ValidationError(f"map_side_km must be > 0, got {self.map_side_km}")
        if len(self.base_stations) < 1:
            raise ValidationError("base_stations must contain at least one station")
        self._check_inside("surveillance drone", self.surveillance.position)
        for i, drone in enumerate(self.delivery_drones):
            self._check_inside(f"delivery drone {i + 1}", drone.position)

    def _check_inside(self, label: str, pos: Position) -> None:
        if not (0 <= pos.x <= self.map_side_km and 0 <= pos.y <= self.map_side_km):
            raise ValidationError(
                f"{label} at ({pos.x}, {pos.y}) lies outside the "
                f"{self.map_side_km} km map"
            )


def _get(mapping: dict, key: str, context: str):
    if not isinstance(mapping, dict):
        raise ParseError(f"{context} must be a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        raise ParseError(f"missing key '{key}' in {context}")
    return mapping[key]


def _position(raw, context: str) -> Position:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ParseError(f"{context} must be a 3-element [x, y, z] list")
    try:
        return Position(float(raw[0]), float(raw[1]), float(raw[2]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"{context} must contain numbers: {exc}") from exc


def _drone_spec(raw, context: str) -> DroneSpec:
    return DroneSpec(
        model_name=str(_get(raw, "model_name", context)),
        weight_g=float(_get(raw, "weight_g", context)),
        max_speed_kmh=float(_get(raw, "max_speed_kmh", context)),
        max_flight_time_min=float(_get(raw, "max_flight_time_min", context)),
        battery_capacity_mah=float(_get(raw, "battery_capacity_mah", context)),
        battery_voltage_v=float(_get(raw, "battery_voltage_v", context)),
    )


def _energy_params(raw) -> energy.EnergyParams:
    known = {
        "weight_n",
        "rotor_radius_m",
        "blade_count",
        "blade_angular_velocity_rad_s",
        "air_density_kg_m3",
        "profile_drag_coeff",
        "induced_power_factor",
    }
    if not isinstance(raw, dict):
        raise ParseError("energy_params must be a mapping")
    unknown = set(raw) - known
    if unknown:
        raise ParseError(f"unknown energy_params keys: {sorted(unknown)}")
    kwargs = {k: (int(v) if k == "blade_count" else float(v)) for k, v in raw.items()}
    return energy.EnergyParams.from_basic(**kwargs)


def load_scenario(path: str | Path) -> Scenario:
    """Read and fully validate a scenario file (YAML key/value document)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse scenario file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"scenario file {path} must contain a top-level mapping")

    surv_raw = _get(raw, "surveillance_drone", "scenario")
    surveillance = SurveillanceDrone(
        position=_position(_get(surv_raw, "position", "surveillance_drone"), "surveillance_drone.position"),
        spec=_drone_spec(_get(surv_raw, "spec", "surveillance_drone"), "surveillance_drone.spec"),
    )

    req_raw = _get(raw, "request", "scenario")
    request = DeliveryRequest(
        data_amount_mb=float(_get(req_raw, "data_amount_mb", "request")),
        max_latency_s=float(_get(req_raw, "max_latency_s", "request")),
        link_rate_mbps=float(req_raw.get("link_rate_mbps", 250.0)),
        link_range_m=float(req_raw.get("link_range_m", 200.0)),
    )

    default_spec_raw = raw.get("delivery_drone_spec")
    default_spec = (
        _drone_spec(default_spec_raw, "delivery_drone_spec") if default_spec_raw else None
    )

    drones_raw = _get(raw, "delivery_drones", "scenario")
    if not isinstance(drones_raw, list):
        raise ParseError("delivery_drones must be a list")
    drones = []
    for i, entry in enumerate(drones_raw):
        context = f"delivery_drones[{i}]"
        spec_raw = entry.get("spec") if isinstance(entry, dict) else None
        if spec_raw is not None:
            spec = _drone_spec(spec_raw, f"{context}.spec")
        elif default_spec is not None:
            spec = default_spec
        else:
            raise ParseError(f"{context} has no spec and no delivery_drone_spec default")
        drones.append(
            DeliveryDrone(
                position=_position(_get(entry, "position", context), f"{context}.position"),
                spec=spec,
                remaining_energy_j=float(_get(entry, "remaining_energy_j", context)),
                demand=float(_get(entry, "demand", context)),
            )
        )

    bases_raw = _get(raw, "base_stations", "scenario")
    if not isinstance(bases_raw, list):
        raise ParseError("base_stations must be a list")
    bases = tuple(_position(b, f"base_stations[{i}]") for i, b in enumerate(bases_raw))

    params = _energy_params(raw["energy_params"]) if "energy_params" in raw else energy.default_params()

    queue = None
    if "queue" in raw:
        queue_raw = raw["queue"]
        queue = SurveillanceQueue(
            capacity_mb=float(_get(queue_raw, "capacity_mb", "queue")),
            backlog_mb=float(_get(queue_raw, "backlog_mb", "queue")),
            arrival_rate_mb=float(_get(queue_raw, "arrival_rate_mb", "queue")),
        )

    return Scenario(
        map_side_km=float(_get(raw, "map_side_km", "scenario")),
        surveillance=surveillance,
        delivery_drones=tuple(drones),
        base_stations=bases,
        request=request,
        rng_seed=int(raw.get("rng_seed", 0)),
        energy_params=params,
        queue=queue,
    )


def demo_scenario_path() -> Path:
    """Path of the bundled 15-drone demo scenario."""
    return Path(resources.files("skybid").joinpath("data/demo_scenario.yaml"))
