"""Figure rendering for reports, fold sweeps, and split comparisons.

Figures are written next to the delimited output files.  matplotlib is
imported lazily with the non-interactive Agg backend so library use and
plot-free CLI runs never touch a display.
"""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update(
        {
            "figure.dpi": 120,
            "savefig.dpi": 150,
            "axes.grid": True,
            "grid.alpha": 0.3,
            "font.size": 9,
        }
    )
    return plt


def _subset_label(names: list[str]) -> str:
    return "+".join(names) if names else "(empty)"


def save_sweep_figure(
    rows: list[tuple[int, float]], path: str, reference_folds: int = 10
) -> str:
    """Line plot of superset probability against fold count.

    A dotted vertical line marks ``reference_folds`` when it lies inside
    the swept range.
    """
    plt = _pyplot()
    folds = [m for m, _ in rows]
    probs = [p for _, p in rows]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(folds, probs, marker="o", lw=1.2, color="tab:blue")
    if folds and min(folds) <= reference_folds <= max(folds):
        ax.axvline(reference_folds, ls=":", color="black", lw=1.0)
    ax.set_xlabel("number of folds")
    ax.set_ylabel("superset probability")
    ax.set_title("Sensitivity of the superset probability to the fold count")
    ax.set_xticks(folds)
    ax.set_ylim(0.0, max(probs) * 1.3 if probs else 1.0)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_posterior_figure(report: dict, path: str) -> str:
    """Horizontal bar panels of the top subsets under each model."""
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(9.5, 4.2), sharex=True)
    panels = (
        ("local model", report["top_h0"], "tab:orange"),
        ("linear model", report["top_h1"], "tab:blue"),
    )
    for ax, (title, entries, color) in zip(axes, panels):
        labels = [_subset_label(e["subset"]) for e in entries]
        probs = [e["probability"] for e in entries]
        pos = range(len(entries) - 1, -1, -1)
        ax.barh(list(pos), probs, color=color)
        ax.set_yticks(list(pos))
        ax.set_yticklabels(labels, fontsize=7)
        ax.set_xlabel("posterior probability")
        ax.set_title(title)
    fig.suptitle(
        f"superset probability = {report['probability']:.4f} "
        f"({'strict' if report['strict'] else 'inclusive'}, "
        f"{report['folds']} folds, seed {report['seed']})"
    )
    fig.tight_layout(rect=(0, 0, 1, 0.94))
    fig.savefig(path)
    plt.close(fig)
    return path


def save_split_figure(split: dict, path: str) -> str:
    """Bar comparison of the fine- and coarse-precision probabilities."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    labels, probs, sizes = [], [], []
    for key in ("fine", "coarse"):
        labels.append(key)
        probs.append(split[key]["probability"])
        sizes.append(split[key]["dataset"]["n"])
    bars = ax.bar(labels, probs, color=["tab:green", "tab:gray"], width=0.5)
    for bar, n in zip(bars, sizes):
        ax.annotate(
            f"n = {n}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    ax.set_ylabel("superset probability")
    ax.set_title(
        "Precision-split comparison "
        f"(columns: {', '.join(split['precision_columns'])})"
    )
    ax.set_ylim(0.0, max(probs) * 1.35)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
