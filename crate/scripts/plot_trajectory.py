#!/usr/bin/env python3
"""Plot modal coordinates and energy history from a trajectory CSV.

Usage: plot_trajectory.py <trajectory.csv> [output.png]
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
    out = sys.argv[2] if len(sys.argv) > 2 else "trajectory.png"

    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    t = data["t"]
    q_cols = [n for n in names if n.startswith("q_")]

    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)

    for name in q_cols:
        axes[0].plot(t, data[name], label=name)
    axes[0].set_ylabel("modal coordinate")
    axes[0].legend(loc="upper right", fontsize=8)

    for name in ["E_kinetic", "E_inertial", "E_bend", "E_nl", "E_total"]:
        axes[1].plot(t, data[name], label=name.replace("E_", ""))
    axes[1].set_ylabel("energy")
    axes[1].set_yscale("log")
    # log scale chokes on exact zeros
    axes[1].set_ylim(bottom=max(1e-18, data["E_total"].max() * 1e-14))
    axes[1].legend(loc="upper right", fontsize=8)

    axes[2].plot(t, data["identity_residual"])
    axes[2].set_ylabel("identity residual")
    axes[2].set_xlabel("t")

    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
