"""Figure rendering for machine reports.

Writes layer-count curves and reachable-set growth next to the delimited
data they come from, so a report directory carries both the numbers and the
pictures.  Only the report path imports this module; matplotlib stays an
optional concern for library users.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

FIG_SIZE = (6.0, 3.6)
DPI = 150


def _style(ax, xlabel, ylabel, title):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.grid(True, alpha=0.3, linewidth=0.5)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)


def write_layer_csv(layers, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "layer_size", "cumulative"])
        total = set()
        for lc in layers:
            if lc.layer is not None:
                total |= lc.layer
            w.writerow([lc.index, lc.count, len(total)])


def render_layer_counts(layers, path: Path, machine_name: str, x: str) -> None:
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    steps = [lc.index for lc in layers]
    counts = [lc.count for lc in layers]
    ax.plot(steps, counts, marker="o", markersize=3, linewidth=1.2, color="#2c6fbb")
    _style(ax, "step i", "layer size N_i",
           f"{machine_name} on {x!r}: configurations reachable in exactly i steps")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_growth(layers, path: Path, machine_name: str, x: str) -> None:
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    steps, cumulative = [], []
    seen = set()
    for lc in layers:
        if lc.layer is not None:
            seen |= lc.layer
        steps.append(lc.index)
        cumulative.append(len(seen))
    ax.step(steps, cumulative, where="post", linewidth=1.2, color="#b3452c")
    _style(ax, "step i", "distinct configurations",
           f"{machine_name} on {x!r}: forward closure growth")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_report_figures(layers, out_dir: Path, machine_name: str, x: str) -> list[str]:
    """Write the CSV and both figures; returns the created file names."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    csv_path = out_dir / "layers.csv"
    write_layer_csv(layers, csv_path)
    files.append(csv_path.name)
    png1 = out_dir / "layer_counts.png"
    render_layer_counts(layers, png1, machine_name, x)
    files.append(png1.name)
    png2 = out_dir / "closure_growth.png"
    render_growth(layers, png2, machine_name, x)
    files.append(png2.name)
    return files
