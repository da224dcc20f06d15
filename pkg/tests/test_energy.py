import math

import pytest
from hypothesis import given, strategies as st

from skybid import energy
from skybid.energy import BatteryState, EnergyParams
from skybid.errors import InfeasibleError, ValidationError

PARAMS = energy.default_params()

# frozen oracle values: literal evaluation of the power formulas with the
# reference constants (weight 8 N, R 0.4 m, 4 blades, omega 300 rad/s,
# rho 1.225, delta 0.012, k 0.1), done in a separate REPL
ORACLE_P_O = 79.76102400000003
ORACLE_P_I = 22.4289888887777
ORACLE_P_H = 102.19001288877773
ORACLE_E_60S_10MS = 5782.564442172632
ORACLE_MISSION_5KM_10MS_16S = 49823.07722432571


def rel(a, b):
    return abs(a - b) / abs(b)


class TestHoverPower:
    def test_components_match_oracle(self):
        assert rel(energy.profile_power(PARAMS), ORACLE_P_O) < 1e-12
        assert rel(energy.induced_power(PARAMS), ORACLE_P_I) < 1e-12
        assert rel(energy.hover_power(PARAMS), ORACLE_P_H) < 1e-12

    def test_close_to_quoted_reference_values(self):
        # the airframe datasheet quotes ~79.9 / ~22.4 / ~102.3 W
        assert rel(energy.profile_power(PARAMS), 79.9) < 0.01
        assert rel(energy.induced_power(PARAMS), 22.4) < 0.01
        assert rel(energy.hover_power(PARAMS), 102.3) < 0.01

    def test_profile_power_linear_in_drag_coeff(self):
        half = EnergyParams.from_basic(profile_drag_coeff=0.006)
        assert rel(energy.profile_power(half), energy.profile_power(PARAMS) / 2) < 1e-12

    def test_induced_power_scales_with_correction_factor(self):
        p13 = EnergyParams.from_basic(induced_power_factor=0.3)
        assert rel(energy.induced_power(p13), energy.induced_power(PARAMS) * 1.3 / 1.1) < 1e-12

    def test_density_doubling(self):
        dense = EnergyParams.from_basic(air_density_kg_m3=2 * 1.225)
        assert rel(energy.profile_power(dense), 2 * energy.profile_power(PARAMS)) < 1e-12
        assert rel(energy.induced_power(dense), energy.induced_power(PARAMS) / math.sqrt(2)) < 1e-12


class TestFlightEnergy:
    def test_zero_speed_matches_hover(self):
        for t in (0.1, 1.0, 60.0, 3600.0):
            assert rel(energy.flight_energy(PARAMS, t, 0.0), t * energy.hover_power(PARAMS)) <= 1e-9

    def test_zero_duration(self):
        assert energy.flight_energy(PARAMS, 0.0, 10.0) == 0.0

    def test_frozen_value(self):
        assert rel(energy.flight_energy(PARAMS, 60.0, 10.0), ORACLE_E_60S_10MS) < 1e-12

    @given(st.floats(min_value=0.0, max_value=40.0), st.floats(min_value=0.01, max_value=3600.0))
    def test_monotone_in_duration(self, v, t):
        assert energy.flight_energy(PARAMS, t + 1.0, v) > energy.flight_energy(PARAMS, t, v)

    def test_parasite_term_dominates_at_speed(self):
        # finite-difference slope of energy wrt speed is larger at 30 m/s
        # than at 5 m/s (convex tail from the cubic drag term)
        h = 1e-3

        def slope(v):
            return (energy.flight_energy(PARAMS, 1.0, v + h) - energy.flight_energy(PARAMS, 1.0, v - h)) / (2 * h)

        assert slope(30.0) > slope(5.0)


class TestParams:
    def test_derived_constants_near_quoted_values(self):
        # datasheet prints A=0.503, U_tip=120, d_0=0.6, v_0=2.54, s=0.05
        assert rel(PARAMS.disc_area_m2, 0.503) < 0.01
        assert rel(PARAMS.tip_speed_ms, 120.0) < 0.01
        assert rel(PARAMS.fuselage_drag_ratio, 0.6) < 0.01
        assert rel(PARAMS.induced_velocity_ms, 2.54) < 0.01
        assert rel(PARAMS.rotor_solidity, 0.05) < 0.01

    def test_inconsistent_disc_area_rejected(self):
        with pytest.raises(ValidationError, match="disc_area_m2"):
            EnergyParams(
                weight_n=8.0,
                rotor_radius_m=0.4,
                disc_area_m2=0.503,  # printed rounding, not pi * R^2
                blade_count=4,
                rotor_solidity=PARAMS.rotor_solidity,
                blade_angular_velocity_rad_s=300.0,
                tip_speed_ms=120.0,
                fuselage_drag_ratio=PARAMS.fuselage_drag_ratio,
                air_density_kg_m3=1.225,
                induced_velocity_ms=PARAMS.induced_velocity_ms,
                profile_drag_coeff=0.012,
                induced_power_factor=0.1,
            )

    @pytest.mark.parametrize("field,value", [("weight_n", -1.0), ("air_density_kg_m3", 0.0)])
    def test_positive_fields(self, field, value):
        with pytest.raises(ValidationError, match=field):
            EnergyParams.from_basic(**{field: value})


class TestMinVelocity:
    def test_arithmetic(self):
        assert energy.min_velocity(1000.0, 100.0) == 10.0

    def test_zero_distance(self):
        assert energy.min_velocity(0.0, 50.0) == 0.0

    @pytest.mark.parametrize("t_fly", [0.0, -5.0])
    def test_no_time_left(self, t_fly):
        with pytest.raises(InfeasibleError):
            energy.min_velocity(123.0, t_fly)


class TestMissionEnergy:
    def test_nothing_to_do(self):
        assert energy.mission_energy(PARAMS, 0.0, 0.0, 0.0) == 0.0

    def test_pure_hover(self):
        assert rel(energy.mission_energy(PARAMS, 0.0, 0.0, 16.0), 16.0 * energy.hover_power(PARAMS)) < 1e-12

    def test_frozen_composition(self):
        assert rel(energy.mission_energy(PARAMS, 5000.0, 10.0, 16.0), ORACLE_MISSION_5KM_10MS_16S) < 1e-12

    def test_degenerate_speed_rejected(self):
        with pytest.raises(InfeasibleError):
            energy.mission_energy(PARAMS, 100.0, 0.0, 0.0)


class TestBattery:
    def test_mah_to_joules(self):
        assert energy.usable_energy_j(1000.0, 1.0, 1.0) == 3600.0
        assert energy.usable_energy_j(2970.0, 7.6, 0.8) == pytest.approx(2970.0 * 7.6 * 3.6 * 0.8)

    def test_full_battery(self):
        b = BatteryState.full(2970.0, 7.6)
        assert b.remaining_j == b.usable_j

    def test_overfull_rejected(self):
        cap = energy.usable_energy_j(2970.0, 7.6, 0.8)
        with pytest.raises(ValidationError, match="remaining_j"):
            BatteryState(2970.0, 7.6, 0.8, cap * 1.01)

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            BatteryState(2970.0, 7.6, 0.8, -1.0)
