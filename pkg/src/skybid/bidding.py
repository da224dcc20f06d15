"""Candidate screening and private valuation construction.

A delivery drone joins the auction when its remaining battery covers the
round trip within the latency budget.  Its private value is demand over
sacrificed-energy ratio: v = d / p, with p the fraction of the remaining
battery the mission would burn.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from skybid import energy
from skybid.errors import ValidationError
from skybid.scenario import DeliveryRequest, Scenario, round_trip_distance


def transfer_time(request: DeliveryRequest) -> float:
    """Radio transfer time in seconds: megabytes * 8 / (megabits per second)."""
    return request.data_amount_mb * 8.0 / request.link_rate_mbps


@dataclass(frozen=True)
class Valuation:
    """Private value of one drone, with its provenance."""

    demand: float
    energy_ratio: float
    value: float

    def __post_init__(self):
        if not self.energy_ratio > 0:
            raise ValidationError(f"energy_ratio must be > 0, got {self.energy_ratio}")
        if self.value != self.demand / self.energy_ratio:
            raise ValidationError("value must equal demand / energy_ratio exactly")

    @classmethod
    def compute(cls, demand: float, energy_ratio: float) -> "Valuation":
        if not energy_ratio > 0:
            raise ValidationError(f"energy_ratio must be > 0, got {energy_ratio}")
        return cls(demand=demand, energy_ratio=energy_ratio, value=demand / energy_ratio)


@dataclass(frozen=True, eq=False)
class BidProfile:
    """One auction round's bids, aligned with the drone indices that made them."""

    bids: np.ndarray
    candidate_ids: tuple[int, ...]

    def __post_init__(self):
        arr = np.asarray(self.bids, dtype=float)
        object.__setattr__(self, "bids", arr)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("bids must be a non-empty 1-d vector")
        if len(self.candidate_ids) != arr.size:
            raise ValidationError("candidate_ids length must match bids length")
        if np.any(arr < 0):
            raise ValidationError("all bids must be >= 0")
        arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.bids.size)

    @classmethod
    def from_values(cls, values) -> "BidProfile":
        values = np.asarray(values, dtype=float)
        return cls(bids=values, candidate_ids=tuple(range(values.size)))


@dataclass(frozen=True)
class UniformValuation:
    """i.i.d. values on [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError(f"require lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, n)


@dataclass(frozen=True)
class RatioValuation:
    """v = d / p with d ~ U[d_min, d_max] and p ~ U[p_min, p_max], sampled
    by construction (the exact ratio distribution, which is not uniform)."""

    d_min: float
    d_max: float
    p_min: float
    p_max: float

    def __post_init__(self):
        # equality makes a degenerate (point-mass) component, which is allowed
        if not 0 <= self.d_min <= self.d_max:
            raise ValidationError(
                f"require 0 <= d_min <= d_max, got [{self.d_min}, {self.d_max}]"
            )
        if not 0 < self.p_min <= self.p_max <= 1:
            raise ValidationError(
                f"require 0 < p_min <= p_max <= 1, got [{self.p_min}, {self.p_max}]"
            )

    @property
    def support(self) -> tuple[float, float]:
        return (self.d_min / self.p_max, self.d_max / self.p_min)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        d = rng.uniform(self.d_min, self.d_max, n)
        p = rng.uniform(self.p_min, self.p_max, n)
        return d / p


@dataclass(frozen=True)
class EmpiricalValuation:
    """Scenario-driven values: the energy ratio comes from a randomized
    battery draw against a fixed mission energy, demand is U[0, 1]."""

    mission_energy_j: float = 30000.0
    capacity_range_mah: tuple[float, float] = (2300.0, 2970.0)
    voltage_v: float = 7.6
    usable_fraction: float = 0.8

    def __post_init__(self):
        lo, hi = self.capacity_range_mah
        if not 0 < lo <= hi:
            raise ValidationError(f"capacity_range_mah must be 0 < lo <= hi, got {lo}, {hi}")
        max_avail = energy.usable_energy_j(hi, self.voltage_v, self.usable_fraction)
        if not 0 < self.mission_energy_j < max_avail:
            raise ValidationError(
                f"mission_energy_j must be within (0, {max_avail}) so that some "
                f"battery draw is feasible, got {self.mission_energy_j}"
            )

    @property
    def support(self) -> tuple[float, float]:
        hi_cap = self.capacity_range_mah[1]
        max_available = energy.usable_energy_j(hi_cap, self.voltage_v, self.usable_fraction)
        return (0.0, max_available / self.mission_energy_j)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        lo, hi = self.capacity_range_mah
        capacity = rng.uniform(lo, hi, n)
        available = capacity * self.voltage_v * energy.MAH_VOLT_TO_JOULES * self.usable_fraction
        ratio = self.mission_energy_j / available
        # redraw batteries that could not fund the mission (ratio > 1)
        while np.any(ratio > 1):
            redo = ratio > 1
            capacity[redo] = rng.uniform(lo, hi, int(redo.sum()))
            available = capacity * self.voltage_v * energy.MAH_VOLT_TO_JOULES * self.usable_fraction
            ratio = self.mission_energy_j / available
        demand = rng.uniform(0.0, 1.0, n)
        return demand / ratio


ValuationDistribution = Union[UniformValuation, RatioValuation, EmpiricalValuation]


def parse_distribution(text: str) -> ValuationDistribution:
    """Parse CLI syntax: ``uniform:a,b`` | ``ratio:dmin,dmax,pmin,pmax`` |
    ``empirical[:mission_energy_j]``."""
    name, _, argtext = text.partition(":")
    args = [float(a) for a in argtext.split(",") if a] if argtext else []
    if name == "uniform":
        if len(args) != 2:
            raise ValidationError(f"uniform distribution needs 2 parameters, got {args}")
        return UniformValuation(*args)
    if name == "ratio":
        if len(args) != 4:
            raise ValidationError(f"ratio distribution needs 4 parameters, got {args}")
        return RatioValuation(*args)
    if name == "empirical":
        if len(args) == 0:
            return EmpiricalValuation()
        if len(args) == 1:
            return EmpiricalValuation(mission_energy_j=args[0])
        raise ValidationError(f"empirical distribution takes at most 1 parameter, got {args}")
    raise ValidationError(f"unknown distribution '{name}'")


def sample_valuations(
    dist: ValuationDistribution, n: int, rng: np.random.Generator
) -> BidProfile:
    """Draw one truthful bid profile of size ``n``."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return BidProfile.from_values(dist.sample(n, rng))


def ratio_density_constant(dist: RatioValuation) -> float:
    """Constant (p_max + p_min) / (2 (d_max - d_min)).

    This closed form is sometimes quoted as the marginal density of d / p
    under independent uniforms; kept for documentation and comparison only.
    The true ratio density varies with v, which is why sampling happens by
    construction in :class:`RatioValuation`.
    """
    if dist.d_max == dist.d_min:
        raise ValidationError("density constant undefined for a degenerate demand range")
    return (dist.p_max + dist.p_min) / (2.0 * (dist.d_max - dist.d_min))


def write_bid_samples_csv(path: str | Path, profiles: list[BidProfile]) -> None:
    """Sample-table layout: one row per auction round, one column per drone."""
    if not profiles:
        raise ValidationError("profiles must be nonempty")
    width = len(profiles[0])
    if any(len(p) != width for p in profiles):
        raise ValidationError("all profiles must have the same number of bidders")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["no"] + [f"drone_{i + 1}" for i in range(width)])
        for row, profile in enumerate(profiles, start=1):
            writer.writerow([row] + [f"{b:.4f}" for b in profile.bids])


@dataclass(frozen=True)
class CandidateReport:
    """Feasibility break-down for one delivery drone."""

    index: int
    distance_km: float
    v_min_ms: float
    required_energy_j: float
    remaining_energy_j: float
    candidate: bool
    demand: float
    energy_ratio: float
    bid: float


def evaluate_candidates(
    scenario: Scenario, hover_overhead_s: float | None = None
) -> list[CandidateReport]:
    """Screen every delivery drone against the active request.

    ``hover_overhead_s`` defaults to the data-transfer time (the drone
    hovers next to the surveillance drone while receiving); pass 0.0 to
    charge nothing for the transfer.

    Infeasible drones get ``v_min_ms = inf`` / ``required_energy_j = inf``
    when the latency budget is already consumed, and ``bid = nan`` whenever
    no meaningful value exists.
    """
    t_transfer = transfer_time(scenario.request)
    t_fly = scenario.request.max_latency_s - t_transfer
    overhead = t_transfer if hover_overhead_s is None else hover_overhead_s
    surv = scenario.surveillance.position
    params = scenario.energy_params

    reports = []
    for i, drone in enumerate(scenario.delivery_drones):
        distance_km = min(
            round_trip_distance(drone.position, surv, base) for base in scenario.base_stations
        )
        distance_m = distance_km * 1000.0
        if t_fly <= 0:
            reports.append(
                CandidateReport(
                    index=i,
                    distance_km=distance_km,
                    v_min_ms=math.inf,
                    required_energy_j=math.inf,
                    remaining_energy_j=drone.remaining_energy_j,
                    candidate=False,
                    demand=drone.demand,
                    energy_ratio=math.nan,
                    bid=math.nan,
                )
            )
            continue
        v_min = energy.min_velocity(distance_m, t_fly)
        required = energy.mission_energy(params, distance_m, v_min, overhead)
        feasible = (
            drone.remaining_energy_j >= required and v_min <= drone.spec.max_speed_ms
        )
        if feasible and drone.remaining_energy_j > 0 and required > 0:
            ratio = required / drone.remaining_energy_j
            bid = drone.demand / ratio
        elif feasible:
            # zero-cost mission: the sacrificed-energy ratio degenerates to 0
            ratio = 0.0
            bid = math.inf if drone.demand > 0 else 0.0
        else:
            ratio = math.nan
            bid = math.nan
        reports.append(
            CandidateReport(
                index=i,
                distance_km=distance_km,
                v_min_ms=v_min,
                required_energy_j=required,
                remaining_energy_j=drone.remaining_energy_j,
                candidate=feasible,
                demand=drone.demand,
                energy_ratio=ratio,
                bid=bid,
            )
        )
    return reports


def select_candidates(
    scenario: Scenario, hover_overhead_s: float | None = None
) -> tuple[list[int], BidProfile | None]:
    """The auction entry list: feasible drone indices and their bids.

    An empty candidate list is a valid outcome (no auction this round) and
    is signalled by ``([], None)``.
    """
    reports = [r for r in evaluate_candidates(scenario, hover_overhead_s) if r.candidate]
    if not reports:
        return [], None
    profile = BidProfile(
        bids=np.array([r.bid for r in reports], dtype=float),
        candidate_ids=tuple(r.index for r in reports),
    )
    return [r.index for r in reports], profile
