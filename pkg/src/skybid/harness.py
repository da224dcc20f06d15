"""Seeded experiment driver.

Every experiment is a pure function of (spec, seed): profile batches and
per-bidder-count training seeds derive from the master seed through fixed
``SeedSequence`` keys, so a rerun writes byte-identical CSV.  Each report
is a CSV with a header row; a matplotlib figure is rendered next to it
unless plotting is switched off.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from skybid import mechanisms, neural_auction, plots
from skybid.bidding import (
    BidProfile,
    UniformValuation,
    ValuationDistribution,
    evaluate_candidates,
)
from skybid.errors import ValidationError
from skybid.neural_auction import MonotoneNetParams, TrainConfig
from skybid.scenario import load_scenario

EXPERIMENT_KINDS = (
    "revenue-curve",
    "revenue-cdf",
    "gap-distribution",
    "mechanism-bars",
    "false-bid-sweep",
    "candidate-demo",
)
MECHANISM_NAMES = ("spa", "fpa", "dla", "myerson")

#: five-bidder profile used by the false-bid preset: a 0.8408 target facing
#: a 0.7832 runner-up.
DEFAULT_FALSE_BID_PROFILE = (0.8408, 0.7832, 0.6553, 0.5121, 0.3764)
DEFAULT_FALSE_RATES = tuple(i / 5 for i in range(1, 11))

_SEED_TRAIN, _SEED_PROFILES, _SEED_BASELINE = 0, 1, 2


def derive_seed(master: int, purpose: int, index: int = 0) -> int:
    """Stable child seed for (master, purpose, index)."""
    return int(np.random.SeedSequence([master, purpose, index]).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run, on what distribution, and where to write it."""

    kind: str
    out_path: Path
    dist: ValuationDistribution = field(default_factory=lambda: UniformValuation(0.0, 1.0))
    mechanisms: tuple[str, ...] = ("spa", "dla")
    bidder_counts: tuple[int, ...] = (5, 10)
    trials: int = 1000
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    rng_seed: int = 0
    checkpoint: Path | None = None
    plot: bool = True

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValidationError(f"unknown experiment kind {self.kind!r}")
        unknown = set(self.mechanisms) - set(MECHANISM_NAMES)
        if unknown:
            raise ValidationError(f"unknown mechanisms: {sorted(unknown)}")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if not self.bidder_counts:
            raise ValidationError("bidder_counts must be nonempty")
        if "spa" in self.mechanisms and min(self.bidder_counts) < 2:
            raise ValidationError("bidder counts must be >= 2 when SPA participates")


@dataclass(frozen=True)
class SummaryStats:
    """Quartiles plus mean of one revenue sample."""

    count: int
    mean: float
    p25: float
    p50: float
    p75: float

    def __post_init__(self):
        if not self.p25 <= self.p50 <= self.p75:
            raise ValidationError("percentiles must be ordered p25 <= p50 <= p75")

    @classmethod
    def from_values(cls, values) -> "SummaryStats":
        arr = np.asarray(values, dtype=float)
        p25, p50, p75 = np.percentile(arr, [25, 50, 75])
        return cls(count=arr.size, mean=float(arr.mean()), p25=float(p25), p50=float(p50), p75=float(p75))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[h]) for h in header])


def _dla_params(spec: ExperimentSpec, n_bidders: int) -> MonotoneNetParams:
    """Load the checkpoint if one was given, else train for this bidder count."""
    if spec.checkpoint is not None:
        return neural_auction.load_params(spec.checkpoint)
    cfg = replace(spec.train_cfg, rng_seed=derive_seed(spec.rng_seed, _SEED_TRAIN, n_bidders))
    return neural_auction.train(spec.dist, n_bidders, cfg).params


def _profiles(spec: ExperimentSpec, n_bidders: int, count: int) -> np.ndarray:
    """One shared (count, n) value matrix per bidder count, so mechanisms
    are compared on identical cases."""
    rng = np.random.default_rng(derive_seed(spec.rng_seed, _SEED_PROFILES, n_bidders))
    return spec.dist.sample(count * n_bidders, rng).reshape(count, n_bidders)


def _mechanism_revenues(
    name: str, values: np.ndarray, spec: ExperimentSpec, params: MonotoneNetParams | None
) -> np.ndarray:
    if name == "spa":
        return mechanisms.second_price_revenue_batch(values)
    if name == "fpa":
        return values.max(axis=1)
    if name == "myerson":
        if not isinstance(spec.dist, UniformValuation):
            raise ValidationError("analytic Myerson needs a uniform valuation distribution")
        return mechanisms.analytic_myerson_revenue_batch(values, spec.dist)
    if name == "dla":
        _, _, revenues = neural_auction.hard_auction_batch(params, values)
        return revenues
    raise ValidationError(f"unknown mechanism {name!r}")


def run_revenue_curve(spec: ExperimentSpec) -> list[dict]:
    """Per-iteration hard revenue for each bidder count, with the SPA mean
    on an independent profile batch as the flat baseline."""
    if "dla" not in spec.mechanisms:
        raise ValidationError("revenue-curve needs the dla mechanism")
    rows = []
    for n in spec.bidder_counts:
        cfg = replace(spec.train_cfg, rng_seed=derive_seed(spec.rng_seed, _SEED_TRAIN, n))
        result = neural_auction.train(spec.dist, n, cfg)
        rng = np.random.default_rng(derive_seed(spec.rng_seed, _SEED_BASELINE, n))
        baseline_values = spec.dist.sample(spec.trials * n, rng).reshape(spec.trials, n)
        spa_baseline = float(mechanisms.second_price_revenue_batch(baseline_values).mean())
        for step in result.history:
            rows.append(
                {
                    "bidders": n,
                    "iteration": step.iteration,
                    "loss": step.loss,
                    "soft_revenue": step.soft_revenue,
                    "dla_hard_revenue": step.hard_revenue,
                    "spa_baseline": spa_baseline,
                }
            )
    header = ["bidders", "iteration", "loss", "soft_revenue", "dla_hard_revenue", "spa_baseline"]
    write_csv(spec.out_path, header, rows)
    if spec.plot:
        plots.render_revenue_curve(rows, Path(spec.out_path).with_suffix(".png"))
    return rows


def run_revenue_cdf(spec: ExperimentSpec) -> tuple[list[dict], dict[tuple[str, int], SummaryStats]]:
    """Empirical revenue CDF per (mechanism, bidder count), plus quartile
    summaries written to ``<out>_summary.csv``."""
    if spec.trials < 100:
        raise ValidationError(f"revenue-cdf needs trials >= 100, got {spec.trials}")
    rows = []
    stats: dict[tuple[str, int], SummaryStats] = {}
    for n in spec.bidder_counts:
        values = _profiles(spec, n, spec.trials)
        params = _dla_params(spec, n) if "dla" in spec.mechanisms else None
        for name in spec.mechanisms:
            revenues = np.sort(_mechanism_revenues(name, values, spec, params))
            stats[(name, n)] = SummaryStats.from_values(revenues)
            for rank, revenue in enumerate(revenues, start=1):
                rows.append(
                    {
                        "mechanism": name,
                        "bidders": n,
                        "rank": rank,
                        "revenue": float(revenue),
                        "cdf": rank / spec.trials,
                    }
                )
    write_csv(spec.out_path, ["mechanism", "bidders", "rank", "revenue", "cdf"], rows)
    out = Path(spec.out_path)
    summary_rows = [
        {
            "mechanism": name,
            "bidders": n,
            "count": s.count,
            "mean": s.mean,
            "p25": s.p25,
            "p50": s.p50,
            "p75": s.p75,
        }
        for (name, n), s in stats.items()
    ]
    write_csv(
        out.with_name(out.stem + "_summary.csv"),
        ["mechanism", "bidders", "count", "mean", "p25", "p50", "p75"],
        summary_rows,
    )
    if spec.plot:
        plots.render_revenue_cdf(rows, out.with_suffix(".png"))
    return rows, stats


def run_gap_distribution(spec: ExperimentSpec) -> list[dict]:
    """Per-case DLA minus SPA revenue on shared profiles, sorted ascending."""
    if spec.trials < 2:
        raise ValidationError(f"gap-distribution needs trials >= 2, got {spec.trials}")
    n = spec.bidder_counts[0]
    values = _profiles(spec, n, spec.trials)
    params = _dla_params(spec, n)
    spa = mechanisms.second_price_revenue_batch(values)
    _, _, dla = neural_auction.hard_auction_batch(params, values)
    order = np.argsort(dla - spa, kind="stable")
    rows = [
        {
            "rank": rank,
            "spa_revenue": float(spa[i]),
            "dla_revenue": float(dla[i]),
            "gap": float(dla[i] - spa[i]),
        }
        for rank, i in enumerate(order, start=1)
    ]
    write_csv(spec.out_path, ["rank", "spa_revenue", "dla_revenue", "gap"], rows)
    if spec.plot:
        plots.render_gap(rows, Path(spec.out_path).with_suffix(".png"))
    return rows


def run_mechanism_bars(spec: ExperimentSpec) -> list[dict]:
    """Small per-case comparison of SPA, DLA, and FPA revenue.

    Each case also reports whether the truthful ordering
    SPA <= DLA <= FPA held (a no-sale reserve round can break the left
    inequality)."""
    for needed in ("spa", "fpa", "dla"):
        if needed not in spec.mechanisms:
            raise ValidationError(f"mechanism-bars needs {needed} in the mechanism set")
    n = spec.bidder_counts[0]
    values = _profiles(spec, n, spec.trials)
    params = _dla_params(spec, n)
    rows = []
    for case in range(spec.trials):
        profile = BidProfile.from_values(values[case])
        spa = mechanisms.run_spa(profile).revenue
        fpa = mechanisms.run_fpa(profile).revenue
        dla = neural_auction.run_neural(params, profile, spec.train_cfg.quality_k, "hard").revenue
        rows.append(
            {
                "case": case + 1,
                "spa_revenue": spa,
                "dla_revenue": dla,
                "fpa_revenue": fpa,
                "ordered": spa <= dla + 1e-9 and dla <= fpa + 1e-9,
            }
        )
    write_csv(
        spec.out_path,
        ["case", "spa_revenue", "dla_revenue", "fpa_revenue", "ordered"],
        rows,
    )
    if spec.plot:
        plots.render_bars(rows, Path(spec.out_path).with_suffix(".png"))
    return rows


def run_false_bid_sweep(
    spec: ExperimentSpec,
    true_values=DEFAULT_FALSE_BID_PROFILE,
    target_bidder: int = 0,
    false_rates=DEFAULT_FALSE_RATES,
) -> list[dict]:
    """Distort one bidder's report by each rate and record what happens
    under SPA and the trained network auction.

    Under-bids that fall below the runner-up lose (utility 0); inflated
    winning bids pay the unchanged threshold price, so utility never beats
    truthful for an incentive-compatible rule."""
    values = np.asarray(true_values, dtype=float)
    if not 0 <= target_bidder < values.size:
        raise ValidationError(f"target_bidder {target_bidder} outside profile of {values.size}")
    rates = tuple(float(r) for r in false_rates)
    if not rates or min(rates) <= 0:
        raise ValidationError("false_rates must be positive and nonempty")
    n = values.size
    params = _dla_params(spec, n)
    truth = values[target_bidder]

    rows = []
    for rate in rates:
        bids = values.copy()
        bids[target_bidder] = rate * truth
        profile = BidProfile.from_values(bids)

        spa_outcome = mechanisms.run_spa(profile)
        spa_win = spa_outcome.winner == target_bidder
        spa_pay = float(spa_outcome.payments[target_bidder])
        spa_util = truth * float(spa_outcome.allocation[target_bidder]) - spa_pay

        soft = neural_auction.run_neural(params, profile, spec.train_cfg.quality_k, "soft")
        hard = neural_auction.run_neural(params, profile, spec.train_cfg.quality_k, "hard")
        dla_win = hard.winner == target_bidder
        dla_pay = float(hard.payments_final[target_bidder]) if dla_win else 0.0
        dla_util = truth * (1.0 if dla_win else 0.0) - dla_pay

        rows.append(
            {
                "rate": rate,
                "bid": float(bids[target_bidder]),
                "spa_win": spa_win,
                "spa_payment": spa_pay,
                "spa_utility": spa_util,
                "dla_win_prob": float(soft.allocation_probs[target_bidder]),
                "dla_win": dla_win,
                "dla_payment": dla_pay,
                "dla_utility": dla_util,
            }
        )
    header = [
        "rate",
        "bid",
        "spa_win",
        "spa_payment",
        "spa_utility",
        "dla_win_prob",
        "dla_win",
        "dla_payment",
        "dla_utility",
    ]
    write_csv(spec.out_path, header, rows)
    if spec.plot:
        plots.render_false_bid(rows, Path(spec.out_path).with_suffix(".png"), truth)
    return rows


def run_candidate_demo(
    scenario_path, out_path, plot: bool = True, hover_overhead_s: float | None = None
) -> list[dict]:
    """Feasibility table for every drone in a scenario file."""
    scn = load_scenario(scenario_path)
    reports = evaluate_candidates(scn, hover_overhead_s)
    rows = [
        {
            "drone": r.index + 1,
            "distance_km": r.distance_km,
            "v_min_ms": r.v_min_ms,
            "required_energy_j": r.required_energy_j,
            "remaining_energy_j": r.remaining_energy_j,
            "candidate": r.candidate,
            "bid": r.bid,
        }
        for r in reports
    ]
    header = [
        "drone",
        "distance_km",
        "v_min_ms",
        "required_energy_j",
        "remaining_energy_j",
        "candidate",
        "bid",
    ]
    write_csv(out_path, header, rows)
    if plot:
        plots.render_candidates(rows, Path(out_path).with_suffix(".png"))
    return rows
