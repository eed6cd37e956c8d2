"""Figure rendering for the matrix and sequence report paths.

Each report command writes its delimited output (CSV) and, next to it,
matplotlib figures of the same data.  Everything here is file-based; no
interactive backends.
"""

import csv
import math
import os


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def write_matrix_csv(path, names, matrix):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + list(names))
        for name, row in zip(names, matrix):
            writer.writerow([name] + [format_value(v) for v in row])


def format_value(v):
    if v == math.inf:
        return "inf"
    return f"{v:.12g}"


def render_matrix_heatmap(path, names, matrix, title):
    plt = _plt()
    import numpy as np

    data = np.asarray(
        [[1.0 if v == math.inf else v for v in row] for row in matrix], dtype=float
    )
    fig, ax = plt.subplots(figsize=(0.6 * len(names) + 2.5, 0.6 * len(names) + 2))
    im = ax.imshow(data, cmap="viridis")
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(names)), names, fontsize=8)
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sequence_figures(outdir, names, report):
    """Consecutive-distance series and per-radius traces as PNG files."""
    plt = _plt()
    n = report["count"]

    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = range(1, n)
    ax.plot(xs, report["consecutive_pointed"], "o-", label="pointed")
    ax.plot(xs, report["consecutive_integral"], "s--", label="integral")
    ax.set_xlabel("step")
    ax.set_ylabel("distance")
    ax.set_title("consecutive distances")
    ax.legend()
    fig.tight_layout()
    series_path = os.path.join(outdir, "consecutive_distances.png")
    fig.savefig(series_path, dpi=150)
    plt.close(fig)

    trace_path = None
    if report["radius_traces"]:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for trace in report["radius_traces"]:
            i, j = trace["pair"]
            ax.plot(report["radius_grid"], trace["values"], label=f"{names[i]} vs {names[j]}")
        ax.set_xlabel("radius")
        ax.set_ylabel("capped ball distance")
        ax.set_title("per-radius ball distances")
        if len(report["radius_traces"]) <= 10:
            ax.legend(fontsize=7)
        fig.tight_layout()
        trace_path = os.path.join(outdir, "radius_traces.png")
        fig.savefig(trace_path, dpi=150)
        plt.close(fig)

    fig_paths = [series_path]
    if trace_path:
        fig_paths.append(trace_path)
    return fig_paths
