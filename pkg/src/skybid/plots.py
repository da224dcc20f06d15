"""Figure rendering for experiment reports.

Each renderer takes the same row dicts the CSV writer gets and saves one
PNG; the Agg backend keeps everything headless-safe.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_DPI = 150


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_revenue_curve(rows: list[dict], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    counts = sorted({r["bidders"] for r in rows})
    for n in counts:
        sub = [r for r in rows if r["bidders"] == n]
        ax.plot([r["iteration"] for r in sub], [r["dla_hard_revenue"] for r in sub],
                label=f"network auction, {n} bidders")
        ax.axhline(sub[0]["spa_baseline"], linestyle="--", linewidth=1,
                   color=ax.lines[-1].get_color(), alpha=0.6,
                   label=f"second-price baseline, {n} bidders")
    ax.set_xlabel("training iteration")
    ax.set_ylabel("expected revenue")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    _save(fig, path)


def render_training_log(rows: list[dict], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    iterations = [r["iteration"] for r in rows]
    ax.plot(iterations, [r["hard_revenue"] for r in rows], label="hard-mode revenue")
    ax.plot(iterations, [r["soft_revenue"] for r in rows], alpha=0.6,
            label="soft revenue (negative loss)")
    ax.set_xlabel("training iteration")
    ax.set_ylabel("revenue")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    _save(fig, path)


def render_revenue_cdf(rows: list[dict], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    pairs = sorted({(r["mechanism"], r["bidders"]) for r in rows})
    for mech, n in pairs:
        sub = [r for r in rows if r["mechanism"] == mech and r["bidders"] == n]
        ax.step([r["revenue"] for r in sub], [r["cdf"] for r in sub],
                where="post", label=f"{mech}, {n} bidders")
    ax.set_xlabel("revenue")
    ax.set_ylabel("empirical CDF")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    _save(fig, path)


def render_gap(rows: list[dict], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ranks = [r["rank"] for r in rows]
    gaps = [r["gap"] for r in rows]
    ax.fill_between(ranks, gaps, step="mid", alpha=0.4)
    ax.plot(ranks, gaps, linewidth=1)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("case (sorted by gap)")
    ax.set_ylabel("network auction minus second-price revenue")
    ax.grid(alpha=0.3)
    _save(fig, path)


def render_bars(rows: list[dict], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    cases = [r["case"] for r in rows]
    width = 0.27
    for offset, (key, label) in enumerate(
        (("spa_revenue", "second-price"), ("dla_revenue", "network auction"), ("fpa_revenue", "first-price"))
    ):
        ax.bar([c + (offset - 1) * width for c in cases], [r[key] for r in rows],
               width=width, label=label)
    ax.set_xlabel("case")
    ax.set_ylabel("revenue")
    ax.set_xticks(cases)
    ax.grid(alpha=0.3, axis="y")
    ax.legend(fontsize=8)
    _save(fig, path)


def render_false_bid(rows: list[dict], path: Path, true_value: float) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    rates = [r["rate"] for r in rows]

    ax1.plot(rates, [r["dla_payment"] for r in rows], "o-", color="tab:red",
             label="network-auction payment")
    ax1.plot(rates, [r["spa_payment"] for r in rows], "s--", color="tab:blue",
             label="second-price payment")
    ax1.axhline(true_value, color="black", linewidth=1, label="truthful value")
    ax1.set_xlabel("false rate")
    ax1.set_ylabel("payment")
    ax1.grid(alpha=0.3)
    ax1.legend(fontsize=8)

    ax2.plot(rates, [r["dla_win_prob"] for r in rows], "o-", color="tab:green",
             label="win probability (soft)")
    ax2.set_xlabel("false rate")
    ax2.set_ylabel("win probability")
    ax2.grid(alpha=0.3)
    twin = ax2.twinx()
    twin.plot(rates, [r["dla_utility"] for r in rows], "d-", color="tab:purple",
              label="utility")
    twin.set_ylabel("utility")
    lines = ax2.get_lines() + twin.get_lines()
    ax2.legend(lines, [l.get_label() for l in lines], fontsize=8)
    _save(fig, path)


def render_candidates(rows: list[dict], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    drones = [r["drone"] for r in rows]
    required = [r["required_energy_j"] for r in rows]
    remaining = [r["remaining_energy_j"] for r in rows]
    colors = ["tab:green" if r["candidate"] else "tab:red" for r in rows]
    ax.bar([d - 0.2 for d in drones], required, width=0.4, color=colors,
           label="required energy")
    ax.bar([d + 0.2 for d in drones], remaining, width=0.4, color="tab:gray",
           alpha=0.6, label="remaining energy")
    ax.set_xlabel("delivery drone")
    ax.set_ylabel("energy (J)")
    ax.set_xticks(drones)
    ax.grid(alpha=0.3, axis="y")
    ax.legend(fontsize=8)
    _save(fig, path)
