"""Render convergence traces as figure files.

Figures are built through ``matplotlib.figure.Figure`` directly (no pyplot,
no global state), so rendering is safe from library code and needs no
display. The CLI writes these PNGs next to the trace CSVs.
"""

from __future__ import annotations

import math
import os

from matplotlib.figure import Figure

from .model import IterationTrace

__all__ = ["save_trace_figure", "save_comparison_figures", "QUANTITIES"]

# (trace attribute, axis label, log-scale y)
QUANTITIES = (
    ("energy", "energy", False),
    ("psnr", "PSNR [dB]", False),
    ("residual", "relative residual", True),
    ("norm_n", "mean |n|", False),
)


def _plottable(values):
    return [v if math.isfinite(v) else math.nan for v in values]


def save_trace_figure(trace: IterationTrace, path, title: str | None = None) -> str:
    """Write a 2x2 panel of energy / PSNR / residual / |n| over iterations."""
    fig = Figure(figsize=(9.0, 6.5), dpi=110)
    axes = fig.subplots(2, 2).ravel()
    for ax, (attr, label, logy) in zip(axes, QUANTITIES):
        values = getattr(trace, attr)
        if attr == "psnr" and all(math.isnan(v) for v in values):
            ax.set_axis_off()
            ax.text(0.5, 0.5, "no reference image", ha="center", va="center")
            continue
        ax.plot(trace.iters, _plottable(values), lw=1.2)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("iteration")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path = os.fspath(path)
    fig.savefig(path)
    return path


def save_comparison_figures(labeled_traces, out_dir, prefix: str = "compare") -> dict:
    """One overlay figure per monitored quantity for several labeled traces.

    ``labeled_traces`` maps a legend label to an :class:`IterationTrace`.
    Returns ``{quantity: written path}``.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = {}
    for attr, label, logy in QUANTITIES:
        if attr == "psnr" and all(
            math.isnan(v) for t in labeled_traces.values() for v in t.psnr
        ):
            continue
        fig = Figure(figsize=(6.4, 4.4), dpi=110)
        ax = fig.subplots()
        for name, trace in labeled_traces.items():
            ax.plot(trace.iters, _plottable(getattr(trace, attr)), lw=1.2, label=name)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("iteration")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize="small")
        fig.tight_layout()
        path = os.path.join(os.fspath(out_dir), f"{prefix}_{attr}.png")
        fig.savefig(path)
        written[attr] = path
    return written
