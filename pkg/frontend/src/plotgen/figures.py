"""Figure assembly: convergence comparisons and kernel-shape plots.

Each builder returns the exact data series it drew so tests can assert on
the plotted values rather than on pixels.
"""

import glob as globmod
import subprocess

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .runlog import SchemaError, read_kernel_table, read_runlog


class ChecksumMismatchError(ValueError):
    """Run logs from different problem instances in one figure."""


LABELS = {"ZO-Std": "ZO Std", "ZO-RF": "ZO RF", "ZO-Ker": "ZO Ker",
          "FO": "FO"}
ORDER = ["ZO Std", "ZO RF", "ZO Ker", "FO"]


def collect_runs(pattern):
    """Load every run log matching the glob; enforce a single checksum."""
    paths = sorted(globmod.glob(pattern))
    if not paths:
        raise FileNotFoundError(f"no run logs match {pattern!r}")
    logs = [read_runlog(p) for p in paths]
    checksums = {log.checksum for log in logs}
    if len(checksums) > 1:
        raise ChecksumMismatchError(
            f"{len(checksums)} distinct problem checksums in one figure: "
            f"{sorted(checksums)}")
    return logs


def convergence_series(logs, x_axis):
    """Aggregate seeds per method: median gap with a min-max band.

    Returns {label: {"x": [...], "median": [...], "lo": [...], "hi": [...]}}.
    """
    if x_axis not in ("iteration", "oracle_calls"):
        raise ValueError(f"unknown x axis {x_axis!r}")
    by_method = {}
    for log in logs:
        by_method.setdefault(log.method, []).append(log)
    series = {}
    for method, runs in by_method.items():
        ks = runs[0].column("k")
        for run in runs[1:]:
            if run.column("k") != ks:
                raise SchemaError(
                    f"seed runs of {method} log different iteration grids")
        gaps = np.array([run.column("gap") for run in runs])
        xcol = "k" if x_axis == "iteration" else "oracle_calls"
        series[LABELS.get(method, method)] = {
            "x": runs[0].column(xcol),
            "median": np.median(gaps, axis=0).tolist(),
            "lo": gaps.min(axis=0).tolist(),
            "hi": gaps.max(axis=0).tolist(),
            "n_seeds": len(runs),
        }
    return series


def plot_convergence(pattern, x_axis, out_path):
    """Render one curve per method (median over seeds, min-max band)."""
    logs = collect_runs(pattern)
    series = convergence_series(logs, x_axis)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    labels = sorted(series,
                    key=lambda s: ORDER.index(s) if s in ORDER else len(ORDER))
    for label in labels:
        s = series[label]
        line, = ax.plot(s["x"], s["median"], label=label)
        if s["n_seeds"] > 1:
            ax.fill_between(s["x"], s["lo"], s["hi"], alpha=0.2,
                            color=line.get_color())
    ax.set_yscale("log")
    ax.set_xlabel("iteration" if x_axis == "iteration" else "oracle calls")
    ax.set_ylabel("saddle-point gap")
    noise = logs[0].header.get("noise_level")
    if noise:
        ax.set_title(f"noise level {float(noise):.0%}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return series


def fetch_kernel_table(beta_list, table_path=None):
    """Kernel rows from a saved table file or the `zosaddle` command."""
    if table_path is not None:
        with open(table_path, encoding="utf-8") as fh:
            return read_kernel_table(fh.read())
    cmd = ["zosaddle", "kernel-table", "--beta-list",
           ",".join(f"{b:g}" for b in beta_list)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise ValueError(
            f"kernel-table failed (exit {proc.returncode}): "
            f"{proc.stderr.strip() or proc.stdout.strip()}")
    return read_kernel_table(proc.stdout)


def kernel_series(rows, points=401):
    """Evaluate each tabulated kernel polynomial on a grid of [-1, 1]."""
    r = np.linspace(-1.0, 1.0, points)
    series = {}
    for row in rows:
        coeffs = row["coeffs"]  # ascending powers of r
        values = np.polynomial.polynomial.polyval(r, coeffs)
        series[row["beta"]] = {"r": r.tolist(), "K": values.tolist()}
    return series


def plot_kernels(beta_list, out_path, table_path=None):
    """Plot K_beta(r) on [-1, 1] for each requested beta."""
    rows = fetch_kernel_table(beta_list, table_path)
    series = kernel_series(rows)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for beta in sorted(series):
        s = series[beta]
        ax.plot(s["r"], s["K"], label=f"beta = {beta:g}")
    ax.axhline(0.0, color="gray", linewidth=0.6)
    ax.set_xlabel("r")
    ax.set_ylabel("K(r)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return series
