"""Figure construction from torusmut output files.

Three figure kinds, each a pure function of files the torusmut CLI wrote:

``cdf_overlay``
    Empirical CDF of one rescaled per-replicate column (step plot) against
    a limit-law CDF grid, with the report's KS statistic annotated.
``volume_ratio``
    Simulated-mean-volume over closed-form-approximation ratios with the
    acceptance band, straight from a validation report.
``event_map``
    Final-state snapshot of one replicate's accepted mutation events: one
    patch per accepted event (growth wedges in one dimension, disks in
    two or more).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle, Polygon

from . import io as pio
from .io import SchemaError

__all__ = ["FIGURE_KINDS", "FigureSpec", "RenderResult", "render"]

FIGURE_KINDS = ("cdf_overlay", "volume_ratio", "event_map")

_REQUIRED_INPUTS = {
    "cdf_overlay": ("samples", "cdf"),
    "volume_ratio": ("report",),
    "event_map": ("events", "meta"),
}

_FORMATS = ("png", "svg", "pdf")


@dataclass(frozen=True)
class FigureSpec:
    """A single figure request: input file paths, kind, and output path.

    Input files are checked for existence eagerly so a bad request fails
    before any parsing or drawing starts.
    """

    kind: str
    out: str
    fmt: str = "png"
    samples: Optional[str] = None   # cdf_overlay: per-replicate CSV
    cdf: Optional[str] = None       # cdf_overlay: limit CDF grid (t,F)
    report: Optional[str] = None    # cdf_overlay (optional), volume_ratio
    events: Optional[str] = None    # event_map: accepted-event CSV
    meta: Optional[str] = None      # event_map: run metadata JSON
    column: Optional[str] = None    # cdf_overlay: sample column
    scale: Optional[float] = None   # cdf_overlay: explicit rescale divisor
    replicate: Optional[int] = None  # event_map: replicate_index
    title: Optional[str] = None
    dpi: int = 120

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r}; "
                f"expected one of {FIGURE_KINDS}")
        if self.fmt not in _FORMATS:
            raise SchemaError(
                f"unknown image format {self.fmt!r}; "
                f"expected one of {_FORMATS}")
        for name in _REQUIRED_INPUTS[self.kind]:
            value = getattr(self, name)
            if value is None:
                raise SchemaError(
                    f"figure kind {self.kind!r} requires input {name!r}")
            if not os.path.isfile(value):
                raise SchemaError(f"input file not found: {value!r}")
        if self.report is not None and not os.path.isfile(self.report):
            raise SchemaError(f"input file not found: {self.report!r}")
        if self.scale is not None and not self.scale > 0:
            raise SchemaError("scale must be positive")


@dataclass(frozen=True)
class RenderResult:
    """What was drawn: output path plus countable facts for checking."""

    path: str
    kind: str
    info: Dict[str, object] = field(default_factory=dict)


def render(spec: FigureSpec) -> RenderResult:
    """Build the figure described by ``spec`` and write it to ``spec.out``."""
    builder = {
        "cdf_overlay": _render_cdf_overlay,
        "volume_ratio": _render_volume_ratio,
        "event_map": _render_event_map,
    }[spec.kind]
    fig, info = builder(spec)
    try:
        out_dir = os.path.dirname(os.path.abspath(spec.out))
        os.makedirs(out_dir, exist_ok=True)
        fig.savefig(spec.out, format=spec.fmt, dpi=spec.dpi)
    finally:
        plt.close(fig)
    return RenderResult(path=spec.out, kind=spec.kind, info=info)


# ---------------------------------------------------------------------------
# cdf_overlay
# ---------------------------------------------------------------------------

def _law_target(report: dict) -> Optional[dict]:
    for target in report["targets"]:
        if "ks" in target:
            return target
    return None


def _resolve_scale(spec: FigureSpec, report: Optional[dict]) -> float:
    if spec.scale is not None:
        return float(spec.scale)
    if report is not None:
        scale = report.get("scale")
        if isinstance(scale, dict) and "value" in scale:
            return float(scale["value"])
        target = _law_target(report)
        if target is not None and "scale_value" in target:
            return float(target["scale_value"])
    return 1.0


def _render_cdf_overlay(spec: FigureSpec):
    header, rows = pio.read_samples(spec.samples)
    column = spec.column
    if column is None:
        sigmas = pio.sigma_columns(header)
        if not sigmas:
            raise SchemaError(
                f"{spec.samples!r}: no sigma_* columns and no explicit "
                f"column requested")
        column = sigmas[-1]
    values = pio.column_values(spec.samples, header, rows, column)

    report = pio.read_report(spec.report) if spec.report else None
    scale = _resolve_scale(spec, report)
    rescaled = np.sort(values / scale)
    n = rescaled.size
    ecdf = np.arange(1, n + 1) / n

    grid_t, grid_f = pio.read_cdf_grid(spec.cdf)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.step(rescaled, ecdf, where="post", lw=1.4,
            label=f"empirical ({n} replicates)")
    ax.plot(grid_t, grid_f, "k--", lw=1.2, label="limit law")
    ax.set_xlabel(f"{column} / {scale:.6g}" if scale != 1.0 else column)
    ax.set_ylabel("CDF")
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="lower right")

    info: Dict[str, object] = {"n_samples": int(n), "column": column,
                               "scale": scale}
    if report is not None:
        target = _law_target(report)
        if target is not None:
            ks = float(target["ks"])
            verdict = "pass" if target.get("pass") else "FAIL"
            ax.annotate(f"KS = {ks:.4f} ({verdict})", xy=(0.02, 0.94),
                        xycoords="axes fraction", fontsize=9)
            info["ks"] = ks
    ax.set_title(spec.title or "Empirical vs limit CDF")
    fig.tight_layout()
    return fig, info


# ---------------------------------------------------------------------------
# volume_ratio
# ---------------------------------------------------------------------------

def _render_volume_ratio(spec: FigureSpec):
    report = pio.read_report(spec.report)
    diags = [t for t in report["targets"]
             if t.get("kind") == "volume_diag" and isinstance(
                 t.get("rows"), list)]
    if not diags:
        raise SchemaError(
            f"{spec.report!r}: no volume_diag target with rows in report")

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    n_points = 0
    for idx, diag in enumerate(diags):
        times = [float(r["t"]) for r in diag["rows"]]
        ratios = [float(r["ratio"]) for r in diag["rows"]]
        n_points += len(times)
        label = f"level {diag.get('level', '?')}"
        ax.plot(times, ratios, "o-", label=label)
        band = diag.get("band")
        if idx == 0 and isinstance(band, list) and len(band) == 2:
            ax.axhspan(float(band[0]), float(band[1]), color="0.9", zorder=0)
            ax.axhline(float(band[0]), color="0.6", lw=0.8, ls="--")
            ax.axhline(float(band[1]), color="0.6", lw=0.8, ls="--")
    ax.axhline(1.0, color="k", lw=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel("mean volume / closed-form approximation")
    ax.legend(loc="best")
    ax.set_title(spec.title or "Volume ratio diagnostic")
    fig.tight_layout()
    return fig, {"n_points": n_points, "n_targets": len(diags)}


# ---------------------------------------------------------------------------
# event_map
# ---------------------------------------------------------------------------

_TYPE_COLORS = plt.get_cmap("tab10")


def _render_event_map(spec: FigureSpec):
    events = pio.read_events(spec.events)
    meta = pio.read_meta(spec.meta)
    model = meta["config"]["model"]
    d = int(model["d"])
    L = float(model["L"])
    alpha = float(model["alpha"])

    rep_index = spec.replicate
    if rep_index is None:
        rep_index = min(e.replicate_index for e in events)
    selected = [e for e in events if e.replicate_index == rep_index]
    if not selected:
        available = sorted({e.replicate_index for e in events})
        raise SchemaError(
            f"{spec.events!r}: no events for replicate_index {rep_index}; "
            f"available: {available[:20]}")
    horizon = max(e.time for e in selected)

    fig, ax = plt.subplots(figsize=(6.0, 4.6))
    if d == 1:
        # Space-time portrait: each accepted event opens a growth wedge
        # from its origin (x, t) widening at rate alpha until the horizon.
        for ev in selected:
            reach = alpha * (horizon - ev.time)
            x, t = ev.coords[0], ev.time
            wedge = Polygon([(x, t), (x - reach, horizon),
                             (x + reach, horizon)], closed=True,
                            alpha=0.35, lw=0.8,
                            facecolor=_TYPE_COLORS((ev.mtype - 1) % 10),
                            edgecolor="k")
            ax.add_patch(wedge)
        ax.set_xlim(0.0, L)
        ax.set_ylim(0.0, horizon * 1.02 if horizon > 0 else 1.0)
        ax.set_xlabel("position")
        ax.set_ylabel("time")
    else:
        # Final-time snapshot in the first two coordinates: one disk of
        # radius alpha*(horizon - t) per accepted event.
        for ev in selected:
            reach = alpha * (horizon - ev.time)
            disk = Circle((ev.coords[0], ev.coords[1]),
                          radius=max(reach, 0.002 * L), alpha=0.35, lw=0.8,
                          facecolor=_TYPE_COLORS((ev.mtype - 1) % 10),
                          edgecolor="k")
            ax.add_patch(disk)
        ax.set_xlim(0.0, L)
        ax.set_ylim(0.0, L)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    n_patches = len(ax.patches)
    types = sorted({e.mtype for e in selected})
    ax.set_title(spec.title or
                 f"Accepted events, replicate {rep_index} "
                 f"({n_patches} events, types {types})")
    fig.tight_layout()
    return fig, {"n_patches": n_patches, "replicate_index": rep_index,
                 "horizon": horizon, "d": d}
