"""Shared CSV loading and figure output for the plot scripts.

The scripts are pure CSV-to-image transformations: they never recompute any
physics.  Every reader validates the column schema up front and reports the
exact missing columns, and every figure is written as both PNG and PDF.
"""

import csv
import pathlib

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


class SchemaError(ValueError):
    """A CSV does not match the expected column contract."""


def read_rows(path, required):
    """Read a CSV into a list of per-row dicts of floats.

    Raises SchemaError naming every missing column, and ValueError when the
    file holds no data rows.
    """
    path = pathlib.Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing columns {', '.join(missing)} "
                f"(found: {', '.join(header) or 'none'})"
            )
        rows = [
            {c: float(row[c]) for c in required if row[c] != ""}
            for row in reader
        ]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def save_figure(fig, out_prefix):
    """Write the figure as <prefix>.png and <prefix>.pdf and return the paths."""
    prefix = pathlib.Path(out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = [prefix.with_suffix(".png"), prefix.with_suffix(".pdf")]
    fig.savefig(paths[0], dpi=200, bbox_inches="tight")
    fig.savefig(paths[1], bbox_inches="tight")
    plt.close(fig)
    return paths
