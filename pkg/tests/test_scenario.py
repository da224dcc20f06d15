import math

import pytest
import yaml
from hypothesis import given, strategies as st

from skybid.errors import ParseError, ValidationError
from skybid.scenario import (
    DroneSpec,
    Position,
    SurveillanceQueue,
    demo_scenario_path,
    load_scenario,
    queue_step,
    round_trip_distance,
)

# independent hand computation of the bundled drone-1 leg:
# sqrt(1.8891^2 + 2.9843^2 + 0.0482^2) + sqrt(3^2 + 3^2 + 0.08^2)
ORACLE_DEMO_DRONE1_KM = 7.7756842863798115

finite = st.floats(min_value=-50.0, max_value=50.0)
nonneg = st.floats(min_value=0.0, max_value=50.0)


def pos(x, y, z):
    return Position(x, y, z)


class TestPosition:
    def test_negative_altitude_rejected(self):
        with pytest.raises(ValidationError, match="z"):
            Position(0.0, 0.0, -0.1)

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            Position(math.nan, 0.0, 0.0)


class TestRoundTrip:
    def test_colocated(self):
        p = pos(1.0, 2.0, 0.5)
        assert round_trip_distance(p, p, p) == 0.0

    def test_three_four_five(self):
        assert round_trip_distance(pos(0, 0, 0), pos(3, 4, 0), pos(3, 4, 0)) == 5.0

    def test_demo_drone_one(self):
        d = round_trip_distance(pos(5.3891, 6.4843, 0.1018), pos(3.5, 3.5, 0.15), pos(6.5, 0.5, 0.07))
        assert d == pytest.approx(ORACLE_DEMO_DRONE1_KM, rel=1e-12)

    @given(finite, finite, nonneg, finite, finite, nonneg, finite, finite, nonneg)
    def test_swap_symmetry_and_triangle(self, ax, ay, az, bx, by, bz, cx, cy, cz):
        a, s, b = pos(ax, ay, az), pos(bx, by, bz), pos(cx, cy, cz)
        via = round_trip_distance(a, s, b)
        assert via == pytest.approx(round_trip_distance(b, s, a), rel=1e-12, abs=1e-12)
        assert via >= a.distance_to(b) - 1e-9


class TestQueue:
    def test_pure_arrival(self):
        q = SurveillanceQueue(capacity_mb=100.0, backlog_mb=10.0, arrival_rate_mb=2.0)
        assert queue_step(q, 5.0, scheduled=False).backlog_mb == 12.0

    def test_full_drain(self):
        q = SurveillanceQueue(capacity_mb=100.0, backlog_mb=10.0, arrival_rate_mb=0.0)
        assert queue_step(q, 10.0, scheduled=True).backlog_mb == 0.0

    def test_overflow_clamped_and_counted(self):
        q = SurveillanceQueue(capacity_mb=100.0, backlog_mb=100.0, arrival_rate_mb=5.0)
        stepped = queue_step(q, 0.0, scheduled=False)
        assert stepped.backlog_mb == 100.0
        assert stepped.dropped_mb == 5.0

    def test_overdrain_clamped_at_zero(self):
        q = SurveillanceQueue(capacity_mb=100.0, backlog_mb=3.0, arrival_rate_mb=1.0)
        assert queue_step(q, 50.0, scheduled=True).backlog_mb == 0.0

    def test_negative_service_rejected(self):
        q = SurveillanceQueue(capacity_mb=10.0, backlog_mb=0.0, arrival_rate_mb=0.0)
        with pytest.raises(ValidationError):
            queue_step(q, -1.0, scheduled=True)

    def test_invalid_backlog_rejected(self):
        with pytest.raises(ValidationError, match="backlog_mb"):
            SurveillanceQueue(capacity_mb=10.0, backlog_mb=11.0, arrival_rate_mb=0.0)

    @given(
        st.floats(min_value=1.0, max_value=200.0),
        st.floats(min_value=0.0, max_value=20.0),
        st.lists(st.tuples(st.floats(min_value=0.0, max_value=50.0), st.booleans()), max_size=30),
    )
    def test_backlog_stays_in_bounds(self, capacity, arrival, steps):
        q = SurveillanceQueue(capacity_mb=capacity, backlog_mb=0.0, arrival_rate_mb=arrival)
        dropped_before = 0.0
        for served, scheduled in steps:
            q = queue_step(q, served, scheduled)
            assert 0.0 <= q.backlog_mb <= q.capacity_mb
            assert q.dropped_mb >= dropped_before
            dropped_before = q.dropped_mb


class TestDroneSpec:
    def test_speed_conversion(self):
        spec = DroneSpec("x", 907.0, 72.0, 31.0, 2970.0, 7.6)
        assert spec.max_speed_ms == pytest.approx(20.0)

    def test_positive_fields(self):
        with pytest.raises(ValidationError, match="battery_capacity_mah"):
            DroneSpec("x", 907.0, 72.0, 31.0, 0.0, 7.6)


class TestLoadScenario:
    def test_demo_scenario(self):
        scn = load_scenario(demo_scenario_path())
        assert scn.surveillance.position == Position(3.5, 3.5, 0.15)
        assert len(scn.delivery_drones) == 15
        assert len(scn.base_stations) == 4
        assert scn.request.link_rate_mbps == 250.0

    def test_deterministic(self):
        path = demo_scenario_path()
        assert load_scenario(path) == load_scenario(path)

    def _demo_dict(self):
        with open(demo_scenario_path(), encoding="utf-8") as fh:
            return yaml.safe_load(fh)

    def test_zero_base_stations_rejected(self, tmp_path):
        raw = self._demo_dict()
        raw["base_stations"] = []
        p = tmp_path / "bad.yaml"
        p.write_text(yaml.safe_dump(raw))
        with pytest.raises(ValidationError, match="base_stations"):
            load_scenario(p)

    def test_drone_outside_map_rejected(self, tmp_path):
        raw = self._demo_dict()
        raw["delivery_drones"][0]["position"] = [7.5, 1.0, 0.1]
        p = tmp_path / "bad.yaml"
        p.write_text(yaml.safe_dump(raw))
        with pytest.raises(ValidationError, match="delivery drone 1"):
            load_scenario(p)

    def test_queue_block_loaded(self):
        scn = load_scenario(demo_scenario_path())
        assert scn.queue is not None
        assert scn.queue.capacity_mb == 4000.0

    def test_overfull_queue_in_file_rejected(self, tmp_path):
        raw = self._demo_dict()
        raw["queue"] = {"capacity_mb": 100.0, "backlog_mb": 150.0, "arrival_rate_mb": 1.0}
        p = tmp_path / "bad.yaml"
        p.write_text(yaml.safe_dump(raw))
        with pytest.raises(ValidationError, match="backlog_mb"):
            load_scenario(p)

    def test_missing_key_is_parse_error(self, tmp_path):
        raw = self._demo_dict()
        del raw["request"]
        p = tmp_path / "bad.yaml"
        p.write_text(yaml.safe_dump(raw))
        with pytest.raises(ParseError, match="request"):
            load_scenario(p)

    def test_malformed_yaml_is_parse_error(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("map_side_km: [unclosed\n  nonsense: {")
        with pytest.raises(ParseError):
            load_scenario(p)
