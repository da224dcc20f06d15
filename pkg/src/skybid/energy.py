"""Rotary-wing power and energy arithmetic, plus battery feasibility.

Hover power is the sum of a blade-profile term (turning the rotor through
the air) and an induced term (lifting the airframe).  Forward flight
modulates both terms with speed and adds fuselage parasite drag.  All
quantities are SI: newtons, metres, seconds, watts, joules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from skybid.errors import InfeasibleError, ValidationError

#: joules per (mAh * volt); 1 mAh is 3.6 coulombs.
MAH_VOLT_TO_JOULES = 3.6


def _require_positive(name: str, value) -> None:
    if not value > 0:
        raise ValidationError(f"{name} must be > 0, got {value}")


def _require_consistent(name: str, value: float, expected: float, rel_tol: float) -> None:
    if abs(value - expected) > rel_tol * abs(expected):
        raise ValidationError(
            f"{name} = {value} inconsistent with derived value {expected} "
            f"(relative tolerance {rel_tol})"
        )


@dataclass(frozen=True)
class EnergyParams:
    """Aerodynamic constants of a rotary-wing airframe.

    Attributes:
        weight_n: aircraft weight in newtons
        rotor_radius_m: rotor radius
        disc_area_m2: rotor disc area; must equal pi * R^2
        blade_count: number of rotor blades
        rotor_solidity: ratio of total blade area to disc area
        blade_angular_velocity_rad_s: blade angular velocity
        tip_speed_ms: tip speed of the rotor blade; must equal omega * R
        fuselage_drag_ratio: fuselage drag ratio d0
        air_density_kg_m3: air density
        induced_velocity_ms: mean rotor-induced velocity in hover; must be
            close to sqrt(W / (2 rho A))
        profile_drag_coeff: blade profile drag coefficient
        induced_power_factor: incremental correction factor to induced power
    """

    weight_n: float
    rotor_radius_m: float
    disc_area_m2: float
    blade_count: int
    rotor_solidity: float
    blade_angular_velocity_rad_s: float
    tip_speed_ms: float
    fuselage_drag_ratio: float
    air_density_kg_m3: float
    induced_velocity_ms: float
    profile_drag_coeff: float
    induced_power_factor: float

    def __post_init__(self):
        for name in (
            "weight_n",
            "rotor_radius_m",
            "disc_area_m2",
            "blade_count",
            "rotor_solidity",
            "blade_angular_velocity_rad_s",
            "tip_speed_ms",
            "fuselage_drag_ratio",
            "air_density_kg_m3",
            "induced_velocity_ms",
            "profile_drag_coeff",
            "induced_power_factor",
        ):
            _require_positive(name, getattr(self, name))
        _require_consistent(
            "disc_area_m2", self.disc_area_m2, math.pi * self.rotor_radius_m**2, 1e-6
        )
        _require_consistent(
            "tip_speed_ms",
            self.tip_speed_ms,
            self.blade_angular_velocity_rad_s * self.rotor_radius_m,
            1e-6,
        )
        _require_consistent(
            "induced_velocity_ms",
            self.induced_velocity_ms,
            math.sqrt(self.weight_n / (2 * self.air_density_kg_m3 * self.disc_area_m2)),
            1e-2,
        )

    @classmethod
    def from_basic(
        cls,
        weight_n: float = 8.0,
        rotor_radius_m: float = 0.4,
        blade_count: int = 4,
        blade_angular_velocity_rad_s: float = 300.0,
        air_density_kg_m3: float = 1.225,
        profile_drag_coeff: float = 0.012,
        induced_power_factor: float = 0.1,
    ) -> "EnergyParams":
        """Build a parameter set from the primary constants, deriving the rest.

        The solidity and fuselage-drag constants (0.0157, 0.0151) belong to
        the reference quadrotor airframe; override the derived fields via the
        main constructor for a different blade geometry.
        """
        for name, value in (
            ("weight_n", weight_n),
            ("rotor_radius_m", rotor_radius_m),
            ("blade_count", blade_count),
            ("blade_angular_velocity_rad_s", blade_angular_velocity_rad_s),
            ("air_density_kg_m3", air_density_kg_m3),
            ("profile_drag_coeff", profile_drag_coeff),
            ("induced_power_factor", induced_power_factor),
        ):
            _require_positive(name, value)
        disc_area = math.pi * rotor_radius_m**2
        solidity = 0.0157 * blade_count / (math.pi * rotor_radius_m)
        return cls(
            weight_n=weight_n,
            rotor_radius_m=rotor_radius_m,
            disc_area_m2=disc_area,
            blade_count=blade_count,
            rotor_solidity=solidity,
            blade_angular_velocity_rad_s=blade_angular_velocity_rad_s,
            tip_speed_ms=blade_angular_velocity_rad_s * rotor_radius_m,
            fuselage_drag_ratio=0.0151 / (solidity * disc_area),
            air_density_kg_m3=air_density_kg_m3,
            induced_velocity_ms=math.sqrt(weight_n / (2 * air_density_kg_m3 * disc_area)),
            profile_drag_coeff=profile_drag_coeff,
            induced_power_factor=induced_power_factor,
        )


_DEFAULT_PARAMS: EnergyParams | None = None


def default_params() -> EnergyParams:
    """Reference quadrotor preset (8 N airframe, 0.4 m rotors)."""
    global _DEFAULT_PARAMS
    if _DEFAULT_PARAMS is None:
        _DEFAULT_PARAMS = EnergyParams.from_basic()
    return _DEFAULT_PARAMS


def profile_power(params: EnergyParams) -> float:
    """Blade profile power P_o = (delta/8) rho s A omega^3 R^3, watts."""
    return (
        (params.profile_drag_coeff / 8.0)
        * params.air_density_kg_m3
        * params.rotor_solidity
        * params.disc_area_m2
        * params.blade_angular_velocity_rad_s**3
        * params.rotor_radius_m**3
    )


def induced_power(params: EnergyParams) -> float:
    """Induced (lift) power P_i = (1+k) W^(3/2) / sqrt(2 rho A), watts."""
    return (
        (1.0 + params.induced_power_factor)
        * params.weight_n**1.5
        / math.sqrt(2.0 * params.air_density_kg_m3 * params.disc_area_m2)
    )


def hover_power(params: EnergyParams) -> float:
    """Hover power P_h = P_o + P_i, watts."""
    return profile_power(params) + induced_power(params)


def forward_power(params: EnergyParams, v_ms: float) -> float:
    """Instantaneous power at forward speed ``v_ms``, watts.

    The induced term carries the half-power bracket exactly as written in
    the underlying model; at v = 0 the expression collapses to hover power.
    """
    if v_ms < 0:
        raise ValidationError(f"v_ms must be >= 0, got {v_ms}")
    p_o = profile_power(params)
    p_i = induced_power(params)
    utip2 = params.tip_speed_ms**2
    v0_2 = params.induced_velocity_ms**2
    blade = p_o * (1.0 + 3.0 * v_ms**2 / utip2)
    induced = p_i * (math.sqrt(1.0 + v_ms**4 / (4.0 * v0_2**2)) - v_ms**2 / (2.0 * v0_2)) ** 0.5
    parasite = (
        0.5
        * params.fuselage_drag_ratio
        * params.air_density_kg_m3
        * params.rotor_solidity
        * params.disc_area_m2
        * v_ms**3
    )
    return blade + induced + parasite


def flight_energy(params: EnergyParams, duration_s: float, v_ms: float) -> float:
    """Energy in joules for flying ``duration_s`` seconds at constant speed."""
    if duration_s < 0:
        raise ValidationError(f"duration_s must be >= 0, got {duration_s}")
    return duration_s * forward_power(params, v_ms)


def min_velocity(distance_m: float, t_fly_s: float) -> float:
    """Slowest speed that still covers ``distance_m`` within ``t_fly_s``."""
    if distance_m < 0:
        raise ValidationError(f"distance_m must be >= 0, got {distance_m}")
    if t_fly_s <= 0:
        raise InfeasibleError(
            f"no flight time left (t_fly_s = {t_fly_s}); latency budget exhausted"
        )
    return distance_m / t_fly_s


def mission_energy(
    params: EnergyParams,
    distance_m: float,
    v_ms: float,
    hover_overhead_s: float = 0.0,
) -> float:
    """Energy for a delivery leg of ``distance_m`` at speed ``v_ms``.

    ``hover_overhead_s`` covers time spent hovering while data is
    transferred; it is charged at hover power.
    """
    if distance_m < 0:
        raise ValidationError(f"distance_m must be >= 0, got {distance_m}")
    if hover_overhead_s < 0:
        raise ValidationError(f"hover_overhead_s must be >= 0, got {hover_overhead_s}")
    if distance_m == 0:
        travel = 0.0
    else:
        if v_ms <= 0:
            raise InfeasibleError(
                f"positive speed required to cover {distance_m} m, got v_ms = {v_ms}"
            )
        travel = flight_energy(params, distance_m / v_ms, v_ms)
    return travel + hover_overhead_s * hover_power(params)


def usable_energy_j(capacity_mah: float, voltage_v: float, usable_fraction: float = 0.8) -> float:
    """Usable battery energy in joules for a given capacity and voltage."""
    _require_positive("capacity_mah", capacity_mah)
    _require_positive("voltage_v", voltage_v)
    if not 0 < usable_fraction <= 1:
        raise ValidationError(f"usable_fraction must be in (0, 1], got {usable_fraction}")
    return capacity_mah * voltage_v * MAH_VOLT_TO_JOULES * usable_fraction


@dataclass(frozen=True)
class BatteryState:
    """Battery electrical state; ``remaining_j`` never exceeds the usable budget."""

    capacity_mah: float
    voltage_v: float
    usable_fraction: float = 0.8
    remaining_j: float = 0.0

    def __post_init__(self):
        budget = usable_energy_j(self.capacity_mah, self.voltage_v, self.usable_fraction)
        if not 0 <= self.remaining_j <= budget:
            raise ValidationError(
                f"remaining_j must be within [0, {budget}], got {self.remaining_j}"
            )

    @property
    def usable_j(self) -> float:
        return usable_energy_j(self.capacity_mah, self.voltage_v, self.usable_fraction)

    @classmethod
    def full(cls, capacity_mah: float, voltage_v: float, usable_fraction: float = 0.8) -> "BatteryState":
        return cls(
            capacity_mah=capacity_mah,
            voltage_v=voltage_v,
            usable_fraction=usable_fraction,
            remaining_j=usable_energy_j(capacity_mah, voltage_v, usable_fraction),
        )
