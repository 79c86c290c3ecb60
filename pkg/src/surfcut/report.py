"""Report emission: JSON summary, delimited surface data, and figures.

Every run writes report.json (parameters, versions, seeds, energies,
metrics), surfaces.csv (recovered labels and positions), and plotdata.csv
(per-column truth / baseline / proposed traces).  Unless disabled, the
same data is rendered to PNG figures next to the delimited files.
"""

from __future__ import annotations

import csv
import datetime
import json
import platform
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import __version__
from .errors import SurfcutError
from .fileio import save_surfaces
from .pipeline import PipelineRun


def _versions():
    return {
        "surfcut": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def _energies(run: PipelineRun):
    out = {"proposed": run.proposed.energy, "proposed_flow": int(run.proposed.flow)}
    if run.baseline is not None:
        out["baseline"] = run.baseline.energy
        out["baseline_flow"] = int(run.baseline.flow)
    return out


def write_plotdata(run: PipelineRun, path) -> Path:
    path = Path(path)
    lam = run.num_surfaces
    x_dim, y_dim = run.proposed.positions.shape[1:]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "surface", "truth", "baseline", "proposed"])
        for i in range(lam):
            for x in range(x_dim):
                for y in range(y_dim):
                    truth = "" if run.truth is None else repr(float(run.truth[i, x, y]))
                    base = "" if run.baseline is None else repr(
                        float(run.baseline.positions[i, x, y])
                    )
                    writer.writerow([x, y, i, truth, base,
                                     repr(float(run.proposed.positions[i, x, y]))])
    return path


def render_figures(run: PipelineRun, out_dir) -> list:
    """Render surface traces and, when truth is known, an error summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    lam = run.num_surfaces
    x_dim, y_dim = run.proposed.positions.shape[1:]
    y_mid = y_dim // 2
    xs = np.arange(x_dim)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i in range(lam):
        c = colors[i % len(colors)]
        if run.truth is not None:
            ax.plot(xs, run.truth[i, :, y_mid], "-", color=c, lw=1.0,
                    label=f"surface {i} truth")
        if run.baseline is not None:
            ax.plot(xs, run.baseline.positions[i, :, y_mid], ":", color=c, lw=1.0,
                    label=f"surface {i} baseline")
        ax.plot(xs, run.proposed.positions[i, :, y_mid], "--", color=c, lw=1.2,
                label=f"surface {i} proposed")
    ax.set_xlabel("x (column)")
    ax.set_ylabel("z position (voxels)")
    ax.set_title(f"Surface traces at y = {y_mid}")
    ax.legend(fontsize=7, ncol=lam)
    fig.tight_layout()
    trace_path = out_dir / "surface_traces.png"
    fig.savefig(trace_path, dpi=120)
    plt.close(fig)
    paths.append(trace_path)

    if run.metrics.get("proposed"):
        fig, ax = plt.subplots(figsize=(6, 4))
        idx = np.arange(lam)
        width = 0.35
        prop = run.metrics["proposed"]["umsp"]
        ax.bar(idx, prop, width, label="proposed")
        if run.metrics.get("baseline"):
            ax.bar(idx + width, run.metrics["baseline"]["umsp"], width, label="baseline")
        ax.set_xticks(idx + width / 2)
        ax.set_xticklabels([f"S{i + 1}" for i in range(lam)])
        ax.set_ylabel("mean |position error| (voxels)")
        ax.set_title("Per-surface positioning error")
        ax.legend()
        fig.tight_layout()
        err_path = out_dir / "error_summary.png"
        fig.savefig(err_path, dpi=120)
        plt.close(fig)
        paths.append(err_path)
    return paths


def emit_report(run: PipelineRun, out_dir, figures: bool = True) -> dict:
    """Write report.json, surfaces.csv, plotdata.csv, and figures.

    report.json is key-sorted so reruns with the same config and seed are
    byte-identical except for the timestamp field.  Returns the paths.
    """
    if run.proposed.positions.size == 0:
        raise SurfcutError("refusing to emit an empty report: no surfaces")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report = {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "seed": run.seed,
        "parameters": run.config,
        "versions": _versions(),
        "dims": list(run.dims),
        "spacing": list(run.spacing),
        "num_surfaces": run.num_surfaces,
        "graph": run.graph_stats,
        "energies": _energies(run),
        "metrics": run.metrics,
    }
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")

    surfaces_path = save_surfaces(run.proposed.labels, run.proposed.positions,
                                  out_dir / "surfaces.csv")
    plot_path = write_plotdata(run, out_dir / "plotdata.csv")

    paths = {"report": report_path, "surfaces": surfaces_path, "plotdata": plot_path}
    if figures:
        paths["figures"] = render_figures(run, out_dir / "figures")
    return paths
