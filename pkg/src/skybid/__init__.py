"""Auction-based scheduling for energy-constrained delivery drones.

A library plus CLI covering: world and fleet modelling, rotary-wing energy
arithmetic, feasibility screening with demand/energy bid construction,
classical auction baselines with incentive checkers, a trainable monotone
network auction, and a seeded experiment harness that writes CSV reports
with figures.
"""

from skybid.bidding import (
    BidProfile,
    EmpiricalValuation,
    RatioValuation,
    UniformValuation,
    Valuation,
    evaluate_candidates,
    sample_valuations,
    select_candidates,
    transfer_time,
)
from skybid.energy import (
    BatteryState,
    EnergyParams,
    default_params,
    flight_energy,
    hover_power,
    min_velocity,
    mission_energy,
)
from skybid.errors import InfeasibleError, ParseError, ValidationError
from skybid.mechanisms import (
    AuctionOutcome,
    MechanismConfig,
    check_bb,
    check_ic_empirical,
    check_ir,
    run_analytic_myerson,
    run_fpa,
    run_spa,
)
from skybid.neural_auction import (
    MonotoneNetParams,
    TrainConfig,
    load_params,
    run_neural,
    save_params,
    train,
    virtual_inverse,
    virtual_transform,
)
from skybid.scenario import (
    DeliveryDrone,
    DeliveryRequest,
    DroneSpec,
    Position,
    Scenario,
    SurveillanceQueue,
    demo_scenario_path,
    load_scenario,
    queue_step,
    round_trip_distance,
)

__version__ = "0.1.0"
