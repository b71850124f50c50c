"""Matplotlib rendering of panel specs from CSV datasets.

Rendering is read-only over its inputs and deterministic: a fixed style
sheet, no timestamps in the canvas or the PNG metadata.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from matplotlib.colors import LogNorm

from .panels import PanelSpec

# checked-in style: every run renders identically
STYLE = {
    "figure.figsize": (4.8, 3.6),
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "axes.prop_cycle": plt.cycler(
        color=["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]),
    "image.cmap": "viridis",
    "lines.linewidth": 1.4,
    "legend.fontsize": 8,
    "legend.framealpha": 0.85,
}

PNG_METADATA = {"Software": "render-figures"}


class RenderError(RuntimeError):
    """Input dataset cannot be rendered (missing file/column, empty table)."""


def _load(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise RenderError(f"input file not found: {path}")
    frame = pd.read_csv(path, comment="#")
    if frame.empty:
        raise RenderError(f"input file has no data rows: {path}")
    return frame


def _require(frame: pd.DataFrame, columns, path: str) -> None:
    missing = [c for c in columns if c and c not in frame.columns]
    if missing:
        raise RenderError(f"missing column(s) {missing} in {path}; "
                          f"found {list(frame.columns)}")


def _draw_lines(ax, panel: PanelSpec, frame: pd.DataFrame):
    labels = panel.legend or panel.ys
    for column, label in zip(panel.ys, labels):
        ax.plot(frame[panel.x], frame[column], label=label)
    if panel.legend:
        ax.legend()


def _draw_angle_comparison(ax, panel: PanelSpec, frame: pd.DataFrame):
    ax.plot(frame[panel.x], frame[panel.true_col], "-", color="#1f77b4",
            label="true")
    ax.plot(frame[panel.x], frame[panel.est_col], "--", color="#d62728",
            label="estimated")
    ax.legend()


def _draw_heatmap(ax, panel: PanelSpec, frame: pd.DataFrame,
                  contour: pd.DataFrame | None):
    table = frame.pivot_table(index=panel.y, columns=panel.x, values=panel.z)
    xs = table.columns.to_numpy(dtype=float)
    ys = table.index.to_numpy(dtype=float)
    zs = table.to_numpy(dtype=float)
    norm = None
    if panel.zscale == "log":
        positive = zs[zs > 0]
        if positive.size == 0:
            raise RenderError(f"no positive values of {panel.z} for log scale")
        norm = LogNorm(vmin=max(positive.min(), positive.max() * 1e-6),
                       vmax=positive.max())
        zs = np.maximum(zs, norm.vmin)
    mesh = ax.pcolormesh(xs, ys, zs, norm=norm, shading="auto",
                         rasterized=True)
    ax.figure.colorbar(mesh, ax=ax, label=panel.z)
    if contour is not None:
        for _, line in contour.groupby("polyline_id"):
            ax.plot(line.iloc[:, 1], line.iloc[:, 2], panel.contour_dash,
                    color=panel.contour_color, linewidth=1.2)


def build_figure(panel: PanelSpec, frame: pd.DataFrame,
                 contour: pd.DataFrame | None = None):
    """Build the matplotlib figure for a panel from loaded dataframes."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if panel.kind == "lines":
            _require(frame, (panel.x, *panel.ys), panel.source)
            _draw_lines(ax, panel, frame)
        elif panel.kind == "angle-comparison":
            _require(frame, (panel.x, panel.true_col, panel.est_col), panel.source)
            _draw_angle_comparison(ax, panel, frame)
        elif panel.kind == "heatmap":
            _require(frame, (panel.x, panel.y, panel.z), panel.source)
            if contour is not None and "polyline_id" not in contour.columns:
                raise RenderError(
                    f"missing column(s) ['polyline_id'] in {panel.contour}")
            _draw_heatmap(ax, panel, frame, contour)
        else:
            raise RenderError(f"unknown panel kind {panel.kind!r}")
        ax.set_xlabel(panel.xlabel)
        ax.set_ylabel(panel.ylabel)
        if panel.kind != "heatmap" and panel.yscale != "linear":
            ax.set_yscale(panel.yscale)
        ax.set_title(panel.name)
        fig.tight_layout()
    return fig


def render(panel: PanelSpec, in_dir: str, out_dir: str, fmt: str = "png") -> str:
    """Render one panel from `in_dir` CSVs into `out_dir`; returns the path."""
    frame = _load(os.path.join(in_dir, panel.source))
    contour = None
    if panel.contour is not None:
        contour_path = os.path.join(in_dir, panel.contour)
        if os.path.exists(contour_path):
            contour = _load(contour_path)
    fig = build_figure(panel, frame, contour)
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, f"{panel.name}.{fmt}")
    try:
        fig.savefig(out_path, metadata=PNG_METADATA if fmt == "png" else None)
    finally:
        plt.close(fig)
    return out_path
