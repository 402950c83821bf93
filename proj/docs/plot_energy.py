"""Plot energy.csv (and budget.csv if present) from a run directory.

    python3 docs/plot_energy.py out/couette_linear_k1 [--save fig.png]
"""

import argparse
import pathlib

import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("run_dir", type=pathlib.Path)
    ap.add_argument("--save", type=pathlib.Path)
    args = ap.parse_args()

    energy = pd.read_csv(args.run_dir / "energy.csv")
    budget_path = args.run_dir / "budget.csv"
    panels = 2 if budget_path.exists() else 1
    fig, axes = plt.subplots(1, panels, figsize=(6 * panels, 4), squeeze=False)

    ax = axes[0, 0]
    for col in ("E", "E0", "Eneq"):
        if (energy[col] > 0).any():
            ax.semilogy(energy["t"], energy[col], label=col)
    ax.set_xlabel("t")
    ax.legend()

    if panels == 2:
        budget = pd.read_csv(budget_path)
        ax = axes[0, 1]
        for k, rows in budget.groupby("k"):
            ax.plot(rows["t"], rows["defect"] / rows["D"], label=f"k = {k}")
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_xlabel("t")
        ax.set_ylabel("defect / D_k")
        ax.legend()

    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
