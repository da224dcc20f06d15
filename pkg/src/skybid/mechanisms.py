"""Classical single-item auctions and incentive property checkers.

First-price and second-price auctions, the closed-form revenue-optimal
rule for uniform value distributions, and empirical checks for individual
rationality, incentive compatibility, and budget balance.  Revenue is
``sum_i (payment_i - cost) * allocation_i``; a bidder's utility is
``value * allocation - payment``.  Ties always break toward the lowest
index so outcomes are deterministic functions of the bids.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from skybid.bidding import BidProfile, UniformValuation
from skybid.errors import ValidationError

IR_TOLERANCE = 1e-9
IC_TOLERANCE = 1e-6


@dataclass(frozen=True)
class MechanismConfig:
    """Auctioneer-side knobs: per-sale processing cost and optional reserve."""

    processing_cost: float = 0.0
    reserve: float | None = None

    def __post_init__(self):
        if self.processing_cost < 0:
            raise ValidationError(
                f"processing_cost must be >= 0, got {self.processing_cost}"
            )
        if self.reserve is not None and self.reserve < 0:
            raise ValidationError(f"reserve must be >= 0, got {self.reserve}")


@dataclass(frozen=True, eq=False)
class AuctionOutcome:
    """Result of one auction: who won, who pays what, and the seller's take."""

    winner: int | None
    allocation: np.ndarray
    payments: np.ndarray
    revenue: float
    utilities: np.ndarray

    def __post_init__(self):
        alloc = np.asarray(self.allocation, dtype=float)
        if alloc.sum() > 1 + 1e-9 or np.any(alloc < 0) or np.any(alloc > 1 + 1e-9):
            raise ValidationError("allocation must be probabilities summing to <= 1")


def _no_sale_outcome(n: int) -> AuctionOutcome:
    zeros = np.zeros(n)
    return AuctionOutcome(
        winner=None, allocation=zeros, payments=zeros.copy(), revenue=0.0, utilities=zeros.copy()
    )


def _single_winner_outcome(
    bids: np.ndarray, winner: int, payment: float, cost: float
) -> AuctionOutcome:
    n = bids.size
    allocation = np.zeros(n)
    allocation[winner] = 1.0
    payments = np.zeros(n)
    payments[winner] = payment
    utilities = bids * allocation - payments
    return AuctionOutcome(
        winner=winner,
        allocation=allocation,
        payments=payments,
        revenue=payment - cost,
        utilities=utilities,
    )


def run_fpa(bids: BidProfile, cfg: MechanismConfig | None = None) -> AuctionOutcome:
    """First-price auction: highest bid wins and is paid in full."""
    cfg = cfg or MechanismConfig()
    winner = int(np.argmax(bids.bids))
    return _single_winner_outcome(bids.bids, winner, float(bids.bids[winner]), cfg.processing_cost)


def run_spa(bids: BidProfile, cfg: MechanismConfig | None = None) -> AuctionOutcome:
    """Second-price auction: highest bid wins, pays the runner-up bid.

    With a reserve configured, bids below it cannot win and the payment is
    at least the reserve.  A single bid without a reserve leaves the price
    undefined and raises.
    """
    cfg = cfg or MechanismConfig()
    values = bids.bids
    n = values.size
    if n == 1 and cfg.reserve is None:
        raise ValidationError("second price is undefined for a single bid without a reserve")
    winner = int(np.argmax(values))
    if cfg.reserve is not None and values[winner] < cfg.reserve:
        return _no_sale_outcome(n)
    if n == 1:
        payment = cfg.reserve
    else:
        second = float(np.partition(values, -2)[-2])
        payment = second if cfg.reserve is None else max(second, cfg.reserve)
    return _single_winner_outcome(values, winner, float(payment), cfg.processing_cost)


def second_price_revenue_batch(
    values: np.ndarray, cfg: MechanismConfig | None = None
) -> np.ndarray:
    """Vectorized SPA revenue for a (profiles, bidders) value matrix.

    Agrees row-for-row with :func:`run_spa`; exists so large Monte Carlo
    sweeps stay cheap.
    """
    cfg = cfg or MechanismConfig()
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] < 2:
        raise ValidationError("values must be (profiles, bidders >= 2)")
    second = np.partition(values, -2, axis=1)[:, -2]
    if cfg.reserve is None:
        return second - cfg.processing_cost
    top = values.max(axis=1)
    revenue = np.where(top >= cfg.reserve, np.maximum(second, cfg.reserve) - cfg.processing_cost, 0.0)
    return revenue


def analytic_virtual_value(v: float, dist: UniformValuation) -> float:
    """Virtual value v - (1 - F(v)) / f(v) for U[a, b]; equals 2 v - b."""
    if not dist.lo <= v <= dist.hi:
        raise ValidationError(
            f"value {v} outside distribution support [{dist.lo}, {dist.hi}]"
        )
    return 2.0 * v - dist.hi


def analytic_inverse_virtual(y: float, dist: UniformValuation) -> float:
    """Inverse of the U[a, b] virtual value: (y + b) / 2."""
    return (y + dist.hi) / 2.0


def run_analytic_myerson(
    bids: BidProfile, dist: UniformValuation, cfg: MechanismConfig | None = None
) -> AuctionOutcome:
    """Revenue-optimal auction for uniform values.

    The highest virtual value wins if non-negative, and pays the inverse
    virtual of ``max(second-highest virtual value, 0)``; otherwise the item
    is kept (a valid no-sale outcome).
    """
    cfg = cfg or MechanismConfig()
    virtuals = np.array([analytic_virtual_value(float(b), dist) for b in bids.bids])
    winner = int(np.argmax(virtuals))
    if virtuals[winner] < 0:
        return _no_sale_outcome(len(bids))
    if virtuals.size == 1:
        threshold = 0.0
    else:
        threshold = max(float(np.partition(virtuals, -2)[-2]), 0.0)
    payment = analytic_inverse_virtual(threshold, dist)
    return _single_winner_outcome(bids.bids, winner, payment, cfg.processing_cost)


def analytic_myerson_revenue_batch(
    values: np.ndarray, dist: UniformValuation, cfg: MechanismConfig | None = None
) -> np.ndarray:
    """Vectorized revenue of :func:`run_analytic_myerson` over a
    (profiles, bidders) value matrix; agrees row-for-row with it."""
    cfg = cfg or MechanismConfig()
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] < 2:
        raise ValidationError("values must be (profiles, bidders >= 2)")
    virtuals = 2.0 * values - dist.hi
    top = virtuals.max(axis=1)
    second = np.partition(virtuals, -2, axis=1)[:, -2]
    payment = (np.maximum(second, 0.0) + dist.hi) / 2.0
    return np.where(top >= 0, payment - cfg.processing_cost, 0.0)


def check_ir(outcome: AuctionOutcome, true_values: Sequence[float]) -> bool:
    """Individual rationality: no bidder ends up with negative utility."""
    values = np.asarray(true_values, dtype=float)
    utilities = values * outcome.allocation - outcome.payments
    return bool(np.all(utilities >= -IR_TOLERANCE))


def check_bb(outcome: AuctionOutcome, budgets: Sequence[float]) -> bool:
    """Budget balance: every payment stays within the bidder's budget."""
    return bool(np.all(outcome.payments <= np.asarray(budgets, dtype=float)))


def write_outcome_csv(path: str | Path, bids: BidProfile, outcome: AuctionOutcome) -> None:
    """One row per bidder (bid, allocation, payment, utility) plus a
    revenue footer row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bidder", "bid", "allocation", "payment", "utility"])
        for i in range(len(bids)):
            writer.writerow(
                [
                    bids.candidate_ids[i] + 1,
                    f"{bids.bids[i]:.12g}",
                    f"{outcome.allocation[i]:.12g}",
                    f"{outcome.payments[i]:.12g}",
                    f"{outcome.utilities[i]:.12g}",
                ]
            )
        writer.writerow(["revenue", "", "", f"{outcome.revenue:.12g}", ""])


@dataclass(frozen=True)
class ICReport:
    """Empirical incentive-compatibility probe over a deviation grid."""

    deviation_grid: tuple[float, ...]
    per_bidder_gain: np.ndarray
    max_gain: float
    ic_holds: bool


def check_ic_empirical(
    mechanism: Callable[[BidProfile], AuctionOutcome],
    profile: BidProfile,
    true_values: Sequence[float],
    deviation_grid: Sequence[float],
) -> ICReport:
    """Probe a mechanism for profitable misreports.

    For every bidder and factor ``r`` the bidder's report is replaced by
    ``r * value`` while the others stand pat; the report records the best
    utility improvement over truthful bidding.
    """
    grid = tuple(float(r) for r in deviation_grid)
    if not grid:
        raise ValidationError("deviation_grid must be nonempty")
    values = np.asarray(true_values, dtype=float)
    n = len(profile)
    if values.size != n:
        raise ValidationError("true_values length must match the profile")

    def utility(bids_vector: np.ndarray, bidder: int) -> float:
        outcome = mechanism(BidProfile(bids=bids_vector, candidate_ids=profile.candidate_ids))
        return float(values[bidder] * outcome.allocation[bidder] - outcome.payments[bidder])

    gains = np.zeros(n)
    base = np.array(profile.bids, dtype=float)
    for i in range(n):
        truthful = base.copy()
        truthful[i] = values[i]
        truthful_utility = utility(truthful, i)
        best = -np.inf
        for r in grid:
            deviated = base.copy()
            deviated[i] = r * values[i]
            best = max(best, utility(deviated, i))
        gains[i] = best - truthful_utility
    max_gain = float(gains.max())
    return ICReport(
        deviation_grid=grid,
        per_bidder_gain=gains,
        max_gain=max_gain,
        ic_holds=max_gain <= IC_TOLERANCE,
    )
