#!/usr/bin/env python3
"""
Plot a diagnostics file

    python docs/examples/plot_diagnostics.py runs/sweep-memristor-1d

Draws the free energy and dissipation over time and, for sweeps, the
current against the V_D multiplier.
"""

import sys
from pathlib import Path

import matplotlib.pyplot as plt

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from src.harness.records import read_diagnostics_csv


def main(run_dir: str) -> None:
    data = read_diagnostics_csv(Path(run_dir) / "diagnostics.csv")
    currents = [name for name in data if name.startswith("current_")]

    fig, axes = plt.subplots(1, 2 if currents else 1, figsize=(11 if currents else 6, 4))
    axes = axes if currents else [axes]

    axes[0].plot(data["time"], data["energy_total"], label="free energy")
    axes[0].plot(data["time"], data["dissipation"], label="dissipation")
    axes[0].set_xlabel("t")
    axes[0].legend()

    if currents:
        for name in currents:
            axes[1].plot(data["bias"], data[name], label=name.removeprefix("current_"))
        axes[1].set_xlabel("V_D multiplier")
        axes[1].set_ylabel("current")
        axes[1].legend()

    fig.tight_layout()
    plt.show()


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "runs/scenario")
