"""Figures and TSV tables for demo reports."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def write_tables(report, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, rows in report.tables.items():
        path = out_dir / f"{report.name}_{name}.tsv" if name != report.name else out_dir / f"{name}.tsv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, delimiter="\t", lineterminator="\n").writerows(rows)
        paths.append(path)
    checks = out_dir / f"{report.name}_checks.tsv"
    with open(checks, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["check", "passed", "detail"])
        for c in report.checks:
            w.writerow([c.name, c.passed, c.detail])
    paths.append(checks)
    return paths


def plot_series(report, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (xs, ys) in report.series.items():
        style = "-o" if label.startswith("evidential") else "--s"
        ax.plot(xs, ys, style, label=label, markersize=4)
    ax.set_xlabel("probability of two-boxing")
    ax.set_ylabel("expected utility")
    ax.set_yscale("symlog", linthresh=1)
    ax.legend(fontsize=7)
    ax.set_title(report.name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_matrices(report, path) -> Path:
    items = list(report.matrices.items())
    cols = min(len(items), 4)
    rows = (len(items) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 2.8 * rows), squeeze=False)
    for ax in axes.flat:
        ax.axis("off")
    for ax, (name, m) in zip(axes.flat, items):
        m = np.atleast_2d(m)
        ax.axis("on")
        ax.imshow(m, vmin=0, vmax=max(1.0, float(m.max())), cmap="viridis", aspect="auto")
        ax.set_title(name, fontsize=8)
        ax.set_xlabel("output", fontsize=7)
        ax.set_ylabel("input", fontsize=7)
        ax.tick_params(labelsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def write_report(report, out_dir) -> list[Path]:
    """Write every table as TSV and any series or matrices as PNG figures."""
    out_dir = Path(out_dir)
    paths = write_tables(report, out_dir)
    if report.series:
        paths.append(plot_series(report, out_dir / f"{report.name}_series.png"))
    if report.matrices:
        paths.append(plot_matrices(report, out_dir / f"{report.name}_channels.png"))
    return paths
