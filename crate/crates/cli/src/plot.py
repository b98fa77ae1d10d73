#!/usr/bin/env python3
"""Plot CSV files written by optolaser. Requires numpy and matplotlib."""
import sys

import matplotlib.pyplot as plt
import numpy as np

FILES = __FILES__


def schema(path):
    with open(path) as f:
        first = f.readline()
    return dict(kv.split("=", 1) for kv in first[1:].split())["schema"]


def table(path):
    return np.genfromtxt(path, delimiter=",", skip_header=1, names=True, dtype=None, encoding="utf-8")


def plot(path, ax):
    kind = schema(path)
    t = table(path)
    if kind == "map2d":
        d1 = np.unique(t["delta_omega1"])
        om = np.unique(t["omega"])
        z = np.asarray(t["I2"], dtype=float).reshape(len(d1), len(om))
        mesh = ax.pcolormesh(om, d1, z, shading="auto")
        plt.colorbar(mesh, ax=ax, label="|a2|^2")
        ax.set_ylabel("delta_omega1")
        ax.set_xlabel("Omega")
        return
    if kind == "trajectory":
        ax.plot(t["t"], t["I2"], label="|a2|^2")
        ax.plot(t["t"], t["Ib"], label="|b|^2")
        ax.set_xlabel("t")
        ax.legend()
        return
    if kind == "laser_curve_noisy":
        ax.errorbar(t["omega"], t["mean_I2"], yerr=t["stderr_I2"], fmt="k-", label="noisy")
    elif kind == "laser_curve_analytic":
        ax.plot(t["omega"], t["I2"], "r-", label="closed form")
    else:
        ax.plot(t["omega"], t["I2"], "b--", label=kind)
    ax.set_xlabel("Omega")
    ax.legend()


def main():
    files = sys.argv[1:] or FILES
    curves = [f for f in files if schema(f).startswith("laser_curve")]
    others = [f for f in files if f not in curves]
    panels = (1 if curves else 0) + len(others)
    fig, axes = plt.subplots(panels, 1, figsize=(6, 4 * panels), squeeze=False)
    row = 0
    if curves:
        for f in curves:
            plot(f, axes[0][0])
        axes[0][0].set_ylabel("|a2|^2")
        row = 1
    for f in others:
        plot(f, axes[row][0])
        row += 1
    fig.tight_layout()
    out = (files[0].rsplit(".", 1)[0]) + ".png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
