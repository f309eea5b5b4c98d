#!/usr/bin/env python3
"""Plot an `squeezesim evolve` CSV: variances and excitations vs xi*t.

Usage: plot_timeseries.py series.csv [out.png]
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(".", 1)[0] + ".png"
    data = np.genfromtxt(path, delimiter=",", names=True)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.semilogy(data["xi_t"], data["var_y_plus"], label=r"$\Delta Y_+^2$")
    ax1.semilogy(data["xi_t"], data["var_x_plus"], label=r"$\Delta X_+^2$")
    ax1.semilogy(data["xi_t"], data["min_var"], "--", label="min variance")
    ax1.axhline(0.5, color="gray", lw=0.8, label="vacuum")
    ax1.set_xlabel(r"$\xi t$")
    ax1.set_ylabel("variance")
    ax1.legend()

    ax2.semilogy(data["xi_t"], data["n_polariton"], label="polariton")
    ax2.semilogy(data["xi_t"], data["n_spinwave"], label="spin wave")
    ax2.set_xlabel(r"$\xi t$")
    ax2.set_ylabel("excitations")
    ax2.legend()

    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
