"""Artifact writers: CSV tables, ``summary.json``, the ``plot.gp`` script and
matplotlib figures rendered next to them."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

FMT = "{:.15g}"


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return FMT.format(float(x))


def write_table(path, header, columns):
    """Write equal-length columns as CSV with 15 significant digits."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in zip(*columns):
            wr.writerow([_fmt(c) for c in row])


def read_table(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in body]
        try:
            out[name] = np.array([float(c) for c in col])
        except ValueError:
            out[name] = col
    return out


def write_profile(path, grid, z):
    write_table(path, ["x", "v", "w", "rho", "theta"], [grid.x, z.v, z.w, z.rho, z.theta])


def write_decay(path, grid, z, s):
    m = 2.0 * s + 1.0
    pos = grid.x != 0.0
    x = grid.x[pos]
    ax = np.abs(x) ** m
    v, w, rho = z.v[pos], z.w[pos], z.rho[pos]
    write_table(path, ["x", "rho", "v", "w", "x_pow_rho", "x_pow_v", "x_pow_w"],
                [x, rho, v, w, ax * rho, ax * v, ax * w])


def write_kernels(path, samples, s):
    x = samples.x
    write_table(path, ["x", "k11", "k12", "x_pow_k11", "x_pow_k12"],
                [x, samples.k11, samples.k12,
                 x ** (2 * s + 1) * samples.k11, x ** (2 * s + 2) * samples.k12])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_summary(path, summary: dict):
    with open(path, "w") as fh:
        json.dump(_clean(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def gnuplot_script(s: float, files) -> str:
    """Gnuplot script redrawing the log-log figures from the CSVs present."""
    m = 2 * s + 1
    lines = [
        "# regenerate with: gnuplot plot.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 1200,500",
        "set logscale xy",
        "set format y '%.0e'",
        "set key top right",
        f"m = {m:.15g}",
    ]
    if "decay.csv" in files:
        lines += [
            "set output 'decay_gp.png'",
            "set multiplot layout 1,2",
            "set title 'rho'",
            "ref(x) = 1e0 * x**(-m)",
            "plot 'decay.csv' every ::1 using ($1>0?$1:1/0):2 with lines title 'rho', \\",
            "     ref(x) dashtype 2 lc rgb 'black' title sprintf('slope -%.2f', m)",
            "set title '|v|'",
            "plot 'decay.csv' every ::1 using ($1>0?$1:1/0):(abs($3)) with lines title '|v|', \\",
            "     ref(x) dashtype 2 lc rgb 'black' title sprintf('slope -%.2f', m)",
            "unset multiplot",
        ]
    if "kernels.csv" in files:
        lines += [
            "set output 'kernels_gp.png'",
            "set multiplot layout 1,2",
            "set title 'k11'",
            "plot 'kernels.csv' every ::1 using 1:(abs($2)) with lines title '|k11|'",
            "set title 'k12'",
            "plot 'kernels.csv' every ::1 using 1:(abs($3)) with lines title '|k12|'",
            "unset multiplot",
        ]
    if "trace.csv" in files:
        lines += [
            "set output 'trace_gp.png'",
            "unset logscale x",
            "set title 'residual'",
            "plot 'trace.csv' every ::1 using 1:3 with linespoints title 'residual', \\",
            "     'trace.csv' every ::1 using 1:4 with linespoints title 'increment'",
        ]
    return "\n".join(lines) + "\n"


def write_gnuplot(out_dir: Path, s: float):
    out_dir = Path(out_dir)
    files = {p.name for p in out_dir.glob("*.csv")}
    (out_dir / "plot.gp").write_text(gnuplot_script(s, files))


# -- matplotlib figures ----------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _reference_line(ax, x, y, m):
    """Dashed line of slope -m through the median of the plotted tail."""
    ok = np.isfinite(y) & (y > 0) & (x >= 1.0)
    if not np.any(ok):
        return
    j = np.nonzero(ok)[0][len(np.nonzero(ok)[0]) // 2]
    c = y[j] * x[j] ** m
    ax.loglog(x[ok], c * x[ok] ** (-m), "k--", lw=1.0, label=f"slope $-{m:.2f}$")


def plot_decay(path, profiles, s, title=None):
    """Log-log panels of ``rho`` and ``|v|`` on the right half-line.

    ``profiles`` is a list of ``(label, grid, z)``.
    """
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    m = 2 * s + 1
    for label, grid, z in profiles:
        pos = grid.x > 0
        axes[0].loglog(grid.x[pos], z.rho[pos], lw=1.0, label=label)
        axes[1].loglog(grid.x[pos], np.abs(z.v[pos]), lw=1.0, label=label)
    label, grid, z = profiles[-1]
    pos = grid.x > 0
    _reference_line(axes[0], grid.x[pos], z.rho[pos], m)
    _reference_line(axes[1], grid.x[pos], np.abs(z.v[pos]), m)
    axes[0].set_title(r"$\rho$")
    axes[1].set_title(r"$|v|$")
    for ax in axes:
        ax.set_xlabel("x")
        ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_kernels(path, samples, s):
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    x = samples.x
    axes[0].plot(x, x ** (2 * s + 1) * samples.k11, lw=1.0)
    axes[0].axhline(samples.K1, color="k", ls="--", lw=1.0, label="K1")
    axes[0].set_title(r"$x^{2s+1} k_{11}$")
    axes[1].plot(x, x ** (2 * s + 2) * samples.k12, lw=1.0)
    axes[1].axhline(samples.K2, color="k", ls="--", lw=1.0, label="K2")
    axes[1].set_title(r"$x^{2s+2} k_{12}$")
    for ax in axes:
        ax.set_xscale("log")
        ax.set_xlabel("x")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_trace(path, trace):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    it = trace.column("iteration")
    ax.semilogy(it, trace.column("residual"), "o-", ms=3, label="residual")
    ax.semilogy(it, np.maximum(trace.column("increment"), 1e-300), "s-", ms=3, label="increment")
    ax.semilogy(it, np.maximum(np.abs(trace.column("m_nu") - 1.0), 1e-300), "^-", ms=3,
                label="|m-1|")
    ax.set_xlabel("iteration")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
