"""Command-line entry point.

Subcommands: train, revenue-curve, revenue-cdf, gap, bars, false-bid,
candidates.  Every experiment writes CSV (plus a PNG unless --no-plot) and
reruns byte-identically for the same seed.  Exit code 0 on success, 2 with
a diagnostic on stderr for validation failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from skybid import harness, neural_auction
from skybid.bidding import parse_distribution
from skybid.errors import InfeasibleError, ParseError, ValidationError
from skybid.neural_auction import TrainConfig
from skybid.scenario import demo_scenario_path


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skybid",
        description="Auction-based scheduling experiments for delivery drones.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", type=Path, required=True, help="output CSV path")
    common.add_argument("--config", type=Path, default=None,
                        help="scenario file (scenario-driven commands)")
    common.add_argument("--dist", default="uniform:0,1",
                        help="uniform:a,b | ratio:dmin,dmax,pmin,pmax | empirical[:mission_j]")
    common.add_argument("--bidders", type=_int_list, default=(5, 10),
                        help="comma-separated bidder counts")
    common.add_argument("--iterations", type=int, default=500)
    common.add_argument("--k-quality", type=float, default=1.0,
                        help="softmax quality parameter")
    common.add_argument("--learning-rate", type=float, default=0.1)
    common.add_argument("--batch-size", type=int, default=128)
    common.add_argument("--groups", type=int, default=5,
                        help="groups in the monotone network")
    common.add_argument("--functions", type=int, default=3,
                        help="linear functions per group")
    common.add_argument("--checkpoint", type=Path, default=None,
                        help="train: where to save parameters; others: pre-trained parameters to load")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True,
                        help="render a PNG next to the CSV")

    p_train = sub.add_parser("train", parents=[common], help="fit the network auction")
    p_train.set_defaults(func=cmd_train)

    p_curve = sub.add_parser("revenue-curve", parents=[common],
                             help="hard revenue per training iteration vs the SPA baseline")
    p_curve.set_defaults(func=cmd_revenue_curve)

    p_cdf = sub.add_parser("revenue-cdf", parents=[common],
                           help="empirical revenue CDF per mechanism and bidder count")
    p_cdf.add_argument("--mechanisms", default="spa,dla")
    p_cdf.set_defaults(func=cmd_revenue_cdf)

    p_gap = sub.add_parser("gap", parents=[common],
                           help="per-case DLA minus SPA revenue, sorted")
    p_gap.set_defaults(func=cmd_gap)

    p_bars = sub.add_parser("bars", parents=[common],
                            help="per-case SPA / DLA / FPA revenue")
    p_bars.set_defaults(func=cmd_bars)

    p_false = sub.add_parser("false-bid", parents=[common],
                             help="sweep one bidder's report over false rates")
    p_false.add_argument("--values", type=_float_list,
                         default=harness.DEFAULT_FALSE_BID_PROFILE,
                         help="truthful profile, comma separated")
    p_false.add_argument("--target", type=int, default=0, help="deviating bidder index")
    p_false.add_argument("--rates", type=_float_list, default=harness.DEFAULT_FALSE_RATES)
    p_false.set_defaults(func=cmd_false_bid)

    p_cand = sub.add_parser("candidates", parents=[common],
                            help="feasibility screening for a scenario file")
    p_cand.set_defaults(func=cmd_candidates)

    return parser


def _train_cfg(args) -> TrainConfig:
    return TrainConfig(
        quality_k=args.k_quality,
        iterations=args.iterations,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        rng_seed=args.seed,
        groups=args.groups,
        functions=args.functions,
    )


def _spec(args, kind: str, mechanisms: tuple[str, ...], default_trials: int) -> harness.ExperimentSpec:
    return harness.ExperimentSpec(
        kind=kind,
        out_path=args.out,
        dist=parse_distribution(args.dist),
        mechanisms=mechanisms,
        bidder_counts=args.bidders,
        trials=args.trials if args.trials is not None else default_trials,
        train_cfg=_train_cfg(args),
        rng_seed=args.seed,
        checkpoint=args.checkpoint,
        plot=args.plot,
    )


def cmd_train(args) -> int:
    dist = parse_distribution(args.dist)
    n = args.bidders[0]
    result = neural_auction.train(dist, n, _train_cfg(args))
    rows = [
        {
            "iteration": s.iteration,
            "loss": s.loss,
            "soft_revenue": s.soft_revenue,
            "hard_revenue": s.hard_revenue,
        }
        for s in result.history
    ]
    harness.write_csv(args.out, ["iteration", "loss", "soft_revenue", "hard_revenue"], rows)
    if args.plot:
        from skybid import plots

        plots.render_training_log(rows, Path(args.out).with_suffix(".png"))
    if args.checkpoint is not None:
        neural_auction.save_params(result.params, args.checkpoint)
        print(f"checkpoint written to {args.checkpoint}")
    print(f"training log written to {args.out}")
    return 0


def cmd_revenue_curve(args) -> int:
    spec = _spec(args, "revenue-curve", ("spa", "dla"), default_trials=1000)
    harness.run_revenue_curve(spec)
    print(f"revenue curve written to {args.out}")
    return 0


def cmd_revenue_cdf(args) -> int:
    mechs = tuple(m for m in args.mechanisms.split(",") if m)
    spec = _spec(args, "revenue-cdf", mechs, default_trials=1000)
    harness.run_revenue_cdf(spec)
    print(f"revenue CDF written to {args.out}")
    return 0


def cmd_gap(args) -> int:
    spec = _spec(args, "gap-distribution", ("spa", "dla"), default_trials=300)
    harness.run_gap_distribution(spec)
    print(f"gap distribution written to {args.out}")
    return 0


def cmd_bars(args) -> int:
    spec = _spec(args, "mechanism-bars", ("spa", "fpa", "dla"), default_trials=10)
    harness.run_mechanism_bars(spec)
    print(f"mechanism bars written to {args.out}")
    return 0


def cmd_false_bid(args) -> int:
    spec = _spec(args, "false-bid-sweep", ("spa", "dla"),
                 default_trials=len(args.rates))
    harness.run_false_bid_sweep(spec, args.values, args.target, args.rates)
    print(f"false-bid sweep written to {args.out}")
    return 0


def cmd_candidates(args) -> int:
    scenario_path = args.config if args.config is not None else demo_scenario_path()
    harness.run_candidate_demo(scenario_path, args.out, plot=args.plot)
    print(f"candidate table written to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
