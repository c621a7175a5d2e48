"""Matplotlib rendering for the plot-data files the experiment drivers emit.

Kept out of the experiment drivers on purpose: rows.csv and the .dat files are
the canonical artifacts, figures are a convenience layer the CLI adds next to
them.  Axis choice keys off the header line, so any .dat written by
emit_plot_data renders without extra configuration.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIG_SIZE = (6.4, 4.2)
FIG_DPI = 130


def read_dat(path) -> tuple[list[str], np.ndarray]:
    """Load one whitespace data file; returns (column names, rows)."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path} has no '# ' header line")
    columns = lines[0][2:].split()
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != len(columns):
        raise ValueError(
            f"{path}: header names {len(columns)} columns, rows have {data.shape[1]}"
        )
    return columns, data


def render_dat(dat_path, png_path=None) -> Path:
    """Render one data file to PNG alongside it (or at png_path)."""
    dat_path = Path(dat_path)
    columns, data = read_dat(dat_path)
    out = Path(png_path) if png_path is not None else dat_path.with_suffix(".png")

    fig, ax = plt.subplots(figsize=FIG_SIZE, dpi=FIG_DPI)
    x = data[:, 0]
    if columns[:2] == ["delta", "epsilon"]:
        ax.loglog(x, data[:, 1], "o", label="measured")
        if "fit" in columns:
            order = np.argsort(x)
            ax.loglog(x[order], data[order, columns.index("fit")], "-", label="fit")
        ax.legend()
    elif columns[:2] == ["d_value", "gap"]:
        ax.plot(x, data[:, 1], "o", label="gap")
        if "threshold" in columns:
            ax.plot(x, data[:, columns.index("threshold")], "--", label="threshold")
        ax.legend()
    else:
        order = np.argsort(x)
        ax.plot(x[order], data[order, 1], "o-")
    ax.set_xlabel(columns[0])
    ax.set_ylabel(columns[1])
    ax.set_title(dat_path.stem.replace("_", " "))
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def render_many(dat_paths: Sequence) -> list[Path]:
    return [render_dat(p) for p in dat_paths]


def render_report(reports: Sequence[dict], png_path) -> Path:
    """Horizontal bar chart of per-property deviations from a report listing."""
    if not reports:
        raise ValueError("no report entries to render")
    names = [r["property"] for r in reports]
    values = [r["deviation"] for r in reports]
    out = Path(png_path)

    fig, ax = plt.subplots(figsize=FIG_SIZE, dpi=FIG_DPI)
    pos = np.arange(len(names))
    ax.barh(pos, values)
    ax.set_yticks(pos, names)
    ax.invert_yaxis()
    ax.set_xlabel("deviation")
    ax.set_title("deviation by property")
    for y, v in zip(pos, values):
        ax.annotate(f"{v:.4g}", (v, y), xytext=(3, 0), textcoords="offset points",
                    va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out
