#!/usr/bin/env python3
"""Plot a `squeezesim sweep` CSV.

1-D sweeps get a line plot of every output column; 2-D sweeps a heat map of
the first output. NaN rows (failed grid points) are left blank.

Usage: plot_sweep.py sweep.csv [out.png]
"""
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

AXES = ("delta_big", "delta_bar", "t")


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(".", 1)[0] + ".png"
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    axis_cols = [i for i, h in enumerate(header) if h in AXES]
    out_cols = [
        i for i, h in enumerate(header) if h not in AXES and h != "error"
    ]
    vals = np.array(
        [[float(c) if c not in ("", "NaN") else np.nan for c in r[:-1]] for r in body]
    )

    fig, ax = plt.subplots(figsize=(6, 4))
    if len(axis_cols) == 1:
        x = vals[:, axis_cols[0]]
        for c in out_cols:
            ax.plot(x, vals[:, c], marker=".", label=header[c])
        ax.set_xlabel(header[axis_cols[0]])
        ax.set_yscale("log")
        ax.legend()
    else:
        x = np.unique(vals[:, axis_cols[0]])
        y = np.unique(vals[:, axis_cols[1]])
        z = vals[:, out_cols[0]].reshape(len(x), len(y)).copy()
        z[~(z > 0)] = np.nan
        pc = ax.pcolormesh(y, x, np.log10(z), shading="nearest")
        fig.colorbar(pc, label=f"log10 {header[out_cols[0]]}")
        ax.set_xlabel(header[axis_cols[1]])
        ax.set_ylabel(header[axis_cols[0]])

    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
