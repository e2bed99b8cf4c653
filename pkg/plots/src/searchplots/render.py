"""Render experiment CSVs: the sensitivity-vs-exponent curve and the heat map.

This is a presentation tool only: it never reorders, rescales, or recomputes
the data it reads.  Input files must match the documented schemas exactly:

    mu_sensitivity.csv: mu, phi, phi_stderr, argmax_D
    heatmap.csv:        mu, D, ratio_to_opt

Both panels emit PNG and SVG next to each other, and renders are
deterministic for identical inputs (fixed hash salt, no date metadata).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CURVE_COLUMNS = ["mu", "phi", "phi_stderr", "argmax_D"]
HEATMAP_COLUMNS = ["mu", "D", "ratio_to_opt"]

# darker = larger ratio; a sequential map keeps the encoding monotone
_CMAP = "Greys"

plt.rcParams["svg.hashsalt"] = "searchplots"


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


@dataclass(frozen=True)
class PlotJob:
    """One rendering task."""

    input_csv: Path
    output: Path
    panel: str                  # "mu_curve" or "heatmap"
    log_x: bool = False
    log_y: bool = False
    log_color: bool = False


@dataclass(frozen=True)
class RenderResult:
    paths: tuple[Path, Path]    # (png, svg)
    n_rows: int
    argmin_mu: float | None = None
    extras: dict = field(default_factory=dict)


def _read_rows(path: Path, columns: list[str]) -> list[dict[str, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != columns:
            raise SchemaError(
                f"{path}: expected columns {columns}, got {reader.fieldnames}")
        rows = [{k: float(v) for k, v in row.items()} for row in reader]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _edges(values: np.ndarray, log: bool) -> np.ndarray:
    """Cell edges around sample positions; handles a single cell too."""
    if log:
        v = np.log(values)
        e = _edges(v, False)
        return np.exp(e)
    if values.size == 1:
        half = 0.5 if values[0] == 0 else abs(values[0]) * 0.1
        return np.array([values[0] - half, values[0] + half])
    mids = (values[1:] + values[:-1]) / 2.0
    first = values[0] - (mids[0] - values[0])
    last = values[-1] + (values[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def _save(fig, output: Path) -> tuple[Path, Path]:
    base = output.with_suffix("")
    png = base.with_suffix(".png")
    svg = base.with_suffix(".svg")
    fig.savefig(png, dpi=150, metadata={"Software": "searchplots"})
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return png, svg


def _render_curve(job: PlotJob) -> RenderResult:
    rows = _read_rows(job.input_csv, CURVE_COLUMNS)
    mu = np.array([r["mu"] for r in rows])
    phi = np.array([r["phi"] for r in rows])
    err = np.array([r["phi_stderr"] for r in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.fill_between(mu, phi - err, phi + err, alpha=0.25, color="tab:blue",
                    linewidth=0)
    ax.plot(mu, phi, marker="o", color="tab:blue")
    i_min = int(np.argmin(phi))
    argmin = float(mu[i_min])
    ax.annotate(f"min at mu = {argmin:g}", xy=(argmin, phi[i_min]),
                xytext=(argmin, phi[i_min] * 1.15),
                ha="center", arrowprops={"arrowstyle": "->"})
    ax.set_xlabel("step-length exponent mu")
    ax.set_ylabel("scale-sensitivity phi(n)")
    if job.log_x:
        ax.set_xscale("log")
    if job.log_y:
        ax.set_yscale("log")
    paths = _save(fig, job.output)
    return RenderResult(paths=paths, n_rows=len(rows), argmin_mu=argmin)


def _render_heatmap(job: PlotJob) -> RenderResult:
    rows = _read_rows(job.input_csv, HEATMAP_COLUMNS)
    mus = list(dict.fromkeys(r["mu"] for r in rows))     # keep file order
    ds = list(dict.fromkeys(r["D"] for r in rows))
    grid = np.full((len(ds), len(mus)), math.nan)
    for r in rows:
        grid[ds.index(r["D"]), mus.index(r["mu"])] = r["ratio_to_opt"]
    if np.isnan(grid).any():
        raise SchemaError(f"{job.input_csv}: grid is not a full cartesian "
                          "product of mu and D")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    norm = matplotlib.colors.LogNorm() if job.log_color else None
    mesh = ax.pcolormesh(_edges(np.array(mus), job.log_x),
                         _edges(np.array(ds), job.log_y),
                         grid, cmap=_CMAP, norm=norm)
    fig.colorbar(mesh, ax=ax, label="detection time / (n/D)")
    ax.set_xlabel("step-length exponent mu")
    ax.set_ylabel("target diameter D")
    if job.log_x:
        ax.set_xscale("log")
    if job.log_y:
        ax.set_yscale("log")
    paths = _save(fig, job.output)
    return RenderResult(paths=paths, n_rows=len(rows),
                        extras={"n_mu": len(mus), "n_D": len(ds),
                                "max_ratio": float(np.nanmax(grid))})


def render(job: PlotJob) -> RenderResult:
    """Render one panel; returns the written paths and panel metadata."""
    if job.panel == "mu_curve":
        return _render_curve(job)
    if job.panel == "heatmap":
        return _render_heatmap(job)
    raise ValueError(f"unknown panel {job.panel!r}; "
                     "choose mu_curve or heatmap")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="searchplots",
        description="Render torus-search experiment CSVs to PNG and SVG")
    parser.add_argument("--input", required=True, type=Path)
    parser.add_argument("--output", required=True, type=Path)
    parser.add_argument("--panel", required=True,
                        choices=["mu_curve", "heatmap"])
    parser.add_argument("--log-x", action="store_true")
    parser.add_argument("--log-y", action="store_true")
    parser.add_argument("--log-color", action="store_true")
    args = parser.parse_args(argv)
    job = PlotJob(input_csv=args.input, output=args.output, panel=args.panel,
                  log_x=args.log_x, log_y=args.log_y,
                  log_color=args.log_color)
    try:
        result = render(job)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in result.paths:
        print(f"wrote {path}")
    if result.argmin_mu is not None:
        print(f"sensitivity minimum at mu = {result.argmin_mu:g}")
    return 0


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
