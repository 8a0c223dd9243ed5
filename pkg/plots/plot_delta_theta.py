"""Plot the temperature-gradient error against the conductivity scale.

Input: one CSV per mesh size with columns theta,delta,e_T, named
sweep-delta-theta_n<N>.csv so the mesh size can be read from the filename.
Output: one panel per mesh size, log-log e_T versus theta, one curve per
stabilization parameter delta.

Usage: python3 plot_delta_theta.py sweep-delta-theta_n8.csv ... -o out/delta_theta
"""

import argparse
import re
import sys

import matplotlib.pyplot as plt

from common import read_rows, save_figure

COLUMNS = ["theta", "delta", "e_T"]


def mesh_label(path):
    m = re.search(r"_n(\d+)", str(path))
    if not m:
        raise ValueError(f"{path}: cannot infer mesh size "
                         "(expected a _n<N> filename tag)")
    return int(m.group(1))


def make_figure(panels):
    fig, axes = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.6),
                             sharey=True, squeeze=False)
    for ax, (n, rows) in zip(axes[0], sorted(panels.items())):
        deltas = sorted({r["delta"] for r in rows})
        for d in deltas:
            pts = sorted((r["theta"], r["e_T"]) for r in rows
                         if r["delta"] == d)
            ax.loglog([p[0] for p in pts], [p[1] for p in pts],
                      marker="o", ms=3, label=rf"$\delta$ = {d:g}")
        ax.set_title(f"h = 1/{n}")
        ax.set_xlabel(r"$\theta$")
        ax.grid(True, which="both", alpha=0.3)
    axes[0][0].set_ylabel(r"temperature gradient error")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csvs", nargs="+", help="sweep CSV files, one per mesh")
    ap.add_argument("-o", "--out", required=True, help="output path prefix")
    args = ap.parse_args(argv)
    try:
        panels = {mesh_label(p): read_rows(p, COLUMNS) for p in args.csvs}
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in save_figure(make_figure(panels), args.out):
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
