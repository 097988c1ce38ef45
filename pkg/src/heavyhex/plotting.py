"""Rate-versus-probability figures for sweep results (PNG and SVG via matplotlib)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import CurvePoint  # noqa: E402


def plot_curves(points: Sequence[CurvePoint], out_stem, axis: str = "q_effective", title: str = "") -> list[Path]:
    """One line per (decoder, labels, d) with Wilson error bars and the identity line.

    Writes ``<out_stem>.png`` and ``<out_stem>.svg`` and returns both paths.
    Zero-rate points are drawn at half a failure so they stay on the log axis.
    """
    out_stem = Path(out_stem)
    groups: dict[tuple, list[CurvePoint]] = {}
    for p in points:
        groups.setdefault((p.decoder, p.labels, p.d), []).append(p)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    xs_all = []
    for (dec, labels, d), pts in sorted(groups.items()):
        pts = sorted(pts, key=lambda p: p.x(axis))
        xs = [p.x(axis) for p in pts]
        ys = [p.logical_error_rate if p.failures else 0.5 / p.trials for p in pts]
        lo = [max(y - p.ci_lo, 0.0) for y, p in zip(ys, pts)]
        hi = [max(p.ci_hi - y, 0.0) for y, p in zip(ys, pts)]
        label = f"{dec}{'-' + labels if labels and labels not in dec else ''} d={d}"
        ax.errorbar(xs, ys, yerr=[lo, hi], marker="o", ms=3, capsize=2, label=label)
        xs_all += xs
    if xs_all:
        lo_x, hi_x = min(xs_all), max(xs_all)
        ax.plot([lo_x, hi_x], [lo_x, hi_x], "k--", lw=1, label="identity")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("per-cycle physical error probability" if axis == "q_effective" else "per-step error probability")
    ax.set_ylabel("logical error rate")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    paths = [out_stem.with_suffix(".png"), out_stem.with_suffix(".svg")]
    # fixed metadata keeps the SVG byte-stable between runs
    fig.savefig(paths[0], dpi=120, metadata={"Software": None})
    fig.savefig(paths[1], metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return paths
