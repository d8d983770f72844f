"""SVG figures for run artifacts (matplotlib, deterministic output)."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InputError  # noqa: E402

__all__ = ["read_table", "plot_spectrum", "plot_lambda", "plot_scan", "gnuplot_script", "PLOT_KINDS"]

plt.rcParams.update({
    "svg.hashsalt": "heislab",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (5.0, 3.6),
})


def read_table(path) -> dict:
    """Columns of a CSV file with a header row, as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InputError(f"{path} holds no data rows")
    header, body = rows[0], rows[1:]
    cols = {}
    for i, name in enumerate(header):
        try:
            cols[name] = np.array([float(r[i]) if r[i] != "" else np.nan for r in body])
        except ValueError:
            cols[name] = np.array([r[i] for r in body])
    return cols


def _save(fig, out):
    out = Path(out)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def plot_spectrum(table, out, window=None, title=None):
    """Log-log singular values with the fitted slope in ``window``."""
    k, mu = table["k"], table["mu"]
    keep = mu > 0
    if not np.any(keep):
        raise InputError("spectrum has no positive values")
    fig, ax = plt.subplots()
    ax.loglog(k[keep] + 1, mu[keep], ".", ms=2, color="k", label=r"$\mu_k$")
    if window is not None:
        k0, k1 = window
        sel = keep & (k >= k0) & (k <= k1)
        if sel.sum() >= 2:
            x, y = np.log(k[sel] + 1), np.log(mu[sel])
            b, a = np.polyfit(x, y, 1)
            ax.loglog(k[sel] + 1, np.exp(a + b * x), "-", color="C3", lw=1,
                      label=f"slope {b:.3f} on [{k0}, {k1}]")
    ax.set_xlabel("k + 1")
    ax.set_ylabel("singular value")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return _save(fig, out)


def plot_lambda(table, out, title=None):
    N, lam = table["N"], table["Lambda"]
    fig, ax = plt.subplots()
    ax.semilogx(N, lam, "o-", ms=3, color="k")
    ax.set_xlabel("N")
    ax.set_ylabel(r"$\Lambda_N$")
    if title:
        ax.set_title(title)
    return _save(fig, out)


def plot_scan(table, out, x="gauge", y="ratio", title=None):
    xs, ys = table[x], table[y]
    keep = np.isfinite(xs) & np.isfinite(ys)
    if not np.any(keep):
        raise InputError("scan table holds no finite rows")
    fig, ax = plt.subplots()
    ax.plot(xs[keep], ys[keep], ".", ms=3, color="k")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if title:
        ax.set_title(title)
    return _save(fig, out)


PLOT_KINDS = {
    "spectrum": ("spectrum.csv", plot_spectrum),
    "lambda": ("lambda.csv", plot_lambda),
    "scan": ("scan.csv", plot_scan),
}


def gnuplot_script(kind: str, data: str, out_svg: str) -> str:
    """Gnuplot script rendering the same figure from the CSV ``data``."""
    head = (f"set terminal svg size 500,360\nset output '{out_svg}'\n"
            "set datafile separator ','\nset key autotitle columnhead\nset grid\n")
    if kind == "spectrum":
        return head + ("set logscale xy\nset xlabel 'k + 1'\nset ylabel 'singular value'\n"
                       f"plot '{data}' using ($1+1):2 with points pt 7 ps 0.2\n")
    if kind == "lambda":
        return head + ("set logscale x\nset xlabel 'N'\nset ylabel 'Lambda_N'\n"
                       f"plot '{data}' using 1:2 with linespoints\n")
    if kind == "scan":
        return head + ("set xlabel 'gauge'\nset ylabel 'ratio'\n"
                       f"plot '{data}' using 'gauge':'ratio' with points pt 7 ps 0.3\n")
    raise InputError(f"unknown plot kind {kind!r}")
