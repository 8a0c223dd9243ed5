"""Plot benchmark pressure fields.

Two modes:
  --field pressure.csv   heatmaps of Re p and Im p from cell-center data
                         (columns x,y,re_p,im_p,abs_p)
  --lines l1.csv l2.csv  |p| along the vertical midline, one curve per file
                         (columns y,value; an omega<W> filename tag labels
                         each curve)

Usage:
  python3 plot_pressure.py --field cantilever_n32_omega1_pressure.csv -o out/cantilever
  python3 plot_pressure.py --lines layered_n32_omega*_line.csv -o out/layered
"""

import argparse
import re
import sys

import matplotlib.pyplot as plt

from common import read_rows, save_figure


def field_figure(path):
    rows = read_rows(path, ["x", "y", "re_p", "im_p", "abs_p"])
    x = [r["x"] for r in rows]
    y = [r["y"] for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.8))
    for ax, col, label in ((axes[0], "re_p", "Re p"), (axes[1], "im_p", "Im p")):
        vals = [r[col] for r in rows]
        # symmetric color range so the zero level is visually centered
        vmax = max(abs(v) for v in vals) or 1.0
        sc = ax.scatter(x, y, c=vals, s=8, marker="s", cmap="RdBu_r",
                        vmin=-vmax, vmax=vmax)
        ax.set_title(label)
        ax.set_aspect("equal")
        fig.colorbar(sc, ax=ax)
    fig.tight_layout()
    return fig


def curve_label(path):
    m = re.search(r"omega([0-9.]+)", str(path))
    return rf"$\omega$ = {m.group(1)}" if m else str(path)


def lines_figure(paths):
    fig, ax = plt.subplots(figsize=(5, 3.8))
    for path in paths:
        rows = read_rows(path, ["y", "value"])
        ax.plot([r["y"] for r in rows], [abs(r["value"]) for r in rows],
                marker="o", ms=3, label=curve_label(path))
    ax.set_xlabel("y")
    ax.set_ylabel("|p|")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    mode = ap.add_mutually_exclusive_group(required=True)
    mode.add_argument("--field", help="cell-center pressure CSV")
    mode.add_argument("--lines", nargs="+", help="line-sample CSVs")
    ap.add_argument("-o", "--out", required=True, help="output path prefix")
    args = ap.parse_args(argv)
    try:
        fig = field_figure(args.field) if args.field else lines_figure(args.lines)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in save_figure(fig, args.out):
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
