#!/usr/bin/env python3
"""Plot the deflected beam shape and in-plane fields from a snapshot CSV.

Usage: plot_snapshot.py <snapshot.csv> [output.png]
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "snapshot.png"

    data = np.genfromtxt(path, delimiter=",", names=True)
    x = data["x"]

    fig, axes = plt.subplots(2, 2, figsize=(10, 7))

    # centerline in the lab frame: (x + u, w)
    axes[0][0].plot(x + data["u"], data["w"])
    axes[0][0].set_title("deflected centerline")
    axes[0][0].set_xlabel("x + u")
    axes[0][0].set_ylabel("w")
    axes[0][0].axis("equal")

    axes[0][1].plot(x, data["w_x"], label="w_x")
    axes[0][1].plot(x, data["w_xx"], label="w_xx")
    axes[0][1].set_title("slopes and curvature")
    axes[0][1].legend(fontsize=8)

    axes[1][0].plot(x, data["u"], label="u")
    axes[1][0].plot(x, data["u_t"], label="u_t")
    if not np.all(np.isnan(data["u_tt"])):
        axes[1][0].plot(x, data["u_tt"], label="u_tt")
    axes[1][0].set_title("in-plane displacement")
    axes[1][0].legend(fontsize=8)

    axes[1][1].plot(x, data["inext_deviation"])
    axes[1][1].set_title("inextensibility deviation w_x^4/4")
    axes[1][1].set_yscale("log")

    for ax in axes.flat:
        ax.set_xlabel("x")

    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
