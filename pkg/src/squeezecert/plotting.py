"""Figure rendering for the CLI report paths.

Figures are written straight to files (Agg backend, no display); every
function takes the same row dictionaries the CSV/JSON emitters consume,
so a figure is always consistent with the delimited output next to it.
"""
from __future__ import annotations

from typing import Any, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def save_report_figure(rows: Sequence[dict[str, Any]], path: str) -> None:
    """Catalog overview: reported, sufficient, and necessary counts vs N."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    n = [row["n_spins"] for row in rows]
    ax.scatter(
        n,
        [row["m_reported"] for row in rows],
        marker="s",
        s=36,
        color="#444444",
        label="reported",
    )
    have_upper = [(row["n_spins"], row["m_upper_sufficient"]) for row in rows
                  if row["m_upper_sufficient"] is not None]
    if have_upper:
        ax.scatter(
            [x for x, _ in have_upper],
            [y for _, y in have_upper],
            marker="v",
            s=42,
            color="#1f77b4",
            label="sufficient (upper bound route)",
        )
    have_lower = [(row["n_spins"], row["m_lower_necessary"]) for row in rows
                  if row["m_lower_necessary"] is not None]
    if have_lower:
        ax.scatter(
            [x for x, _ in have_lower],
            [y for _, y in have_lower],
            marker="^",
            s=42,
            color="#d62728",
            label="necessary (lower bound route)",
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("system size N")
    ax.set_ylabel("measurement repetitions M")
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(points: Sequence[dict[str, Any]], path: str) -> None:
    """Required sample size vs hypothesized transverse mean."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = [p["mu_perp"] for p in points if p["m_required"] is not None]
    ys = [p["m_required"] for p in points if p["m_required"] is not None]
    ax.plot(xs, ys, marker="o", markersize=4, color="#1f77b4")
    ax.set_xlabel("hypothesized transverse mean")
    ax.set_ylabel("required M")
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_validation_figure(rows: Sequence[dict[str, Any]], path: str) -> None:
    """Empirical tail frequencies against their analytic bounds."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    methods = sorted({row["method"] for row in rows})
    markers = {"bernstein_gamma_c": "o", "mcdiarmid": "s", "bernstein_gamma_prime": "D"}
    for method in methods:
        sub = [row for row in rows if row["method"] == method]
        gamma = [row["gamma"] for row in sub]
        ax.errorbar(
            gamma,
            [row["frequency"] for row in sub],
            yerr=[row["halfwidth"] for row in sub],
            fmt=markers.get(method, "o"),
            markersize=4,
            capsize=2,
            linestyle="none",
            label=f"{method} empirical",
        )
        ax.plot(gamma, [row["bound"] for row in sub], linestyle="--", alpha=0.7,
                label=f"{method} bound")
    ax.set_yscale("log")
    ax.set_xlabel("threshold")
    ax.set_ylabel("tail probability")
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
