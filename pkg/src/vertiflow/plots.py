"""Figure rendering for sweep reports.

Renders the same data that goes into the plot CSVs: throughput enhancement
curves versus budget, and quantile bands for travel alternative diversity and
maximum landing distance.  Files are written headlessly (Agg backend).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _by_w(rows):
    groups: dict[float, list] = {}
    for r in rows:
        groups.setdefault(r.w, []).append(r)
    return sorted(groups.items())


def render_enhancement(rows, path: str) -> None:
    fig, (ax_top, ax_bot) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for w, grp in _by_w(rows):
        budgets = [r.budget for r in grp]
        ax_top.plot(budgets, [r.delta_bar for r in grp], marker="o", label=f"w={w:g}")
        ax_bot.plot(budgets, [r.delta for r in grp], marker="o", label=f"w={w:g}")
    ax_top.set_ylabel("expected enhancement")
    ax_bot.set_ylabel("total enhancement")
    ax_bot.set_xlabel("budget")
    ax_top.legend()
    for ax in (ax_top, ax_bot):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_quantiles(rows, prefix: str, ylabel: str, path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for w, grp in _by_w(rows):
        budgets = [r.budget for r in grp]
        q = lambda name: [getattr(r, f"{prefix}_{name}") for r in grp]
        ax.fill_between(budgets, q("q25"), q("q75"), alpha=0.25,
                        label=f"w={w:g} interquartile")
        ax.plot(budgets, q("median"), marker="o", label=f"w={w:g} median")
        ax.plot(budgets, q("min"), linestyle="--", linewidth=0.9, alpha=0.7)
        ax.plot(budgets, q("max"), linestyle="--", linewidth=0.9, alpha=0.7)
    ax.set_xlabel("budget")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
