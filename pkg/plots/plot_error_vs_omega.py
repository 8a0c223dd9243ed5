"""Plot discretization errors against the angular frequency.

Input: one or more CSVs with columns omega,h,e_u,e_w,e_p,e_T (one row per
(omega, h) pair).  Output: a 2x2 panel figure, one panel per error norm, one
log-log curve per mesh size.

Usage: python3 plot_error_vs_omega.py sweep-omega.csv [more.csv ...] -o out/error_vs_omega
"""

import argparse
import sys

import matplotlib.pyplot as plt

from common import read_rows, save_figure

COLUMNS = ["omega", "h", "e_u", "e_w", "e_p", "e_T"]
NORMS = [("e_u", "displacement"), ("e_w", "flux"),
         ("e_p", "pressure"), ("e_T", "temperature")]


def collect_series(paths):
    """Group rows by h; fail if any curve misses an omega sample."""
    rows = []
    for path in paths:
        rows.extend(read_rows(path, COLUMNS))
    omegas = sorted({r["omega"] for r in rows})
    series = {}
    for r in rows:
        series.setdefault(r["h"], {})[r["omega"]] = r
    gaps = [f"h={h:g}: omega={om:g}"
            for h, data in series.items()
            for om in omegas if om not in data]
    if gaps:
        raise ValueError("missing series points: " + "; ".join(gaps))
    return omegas, series


def make_figure(omegas, series):
    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True)
    for ax, (col, label) in zip(axes.flat, NORMS):
        for h in sorted(series, reverse=True):
            vals = [series[h][om][col] for om in omegas]
            ax.loglog(omegas, vals, marker="o", ms=3, label=f"h = {h:g}")
        ax.set_title(f"{label} error")
        ax.grid(True, which="both", alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel(r"$\omega$")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csvs", nargs="+", help="sweep CSV files")
    ap.add_argument("-o", "--out", required=True, help="output path prefix")
    args = ap.parse_args(argv)
    try:
        omegas, series = collect_series(args.csvs)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in save_figure(make_figure(omegas, series), args.out):
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
