#!/usr/bin/env python3
"""Print the trajectory statistics the shipped partitions and section were
chosen from: mean w on the simple orbit, and where the right and left
branches turn in z across the window.

Usage: scripts/calibrate_partitions.py [path/to/fhr]
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

ROOT = Path(__file__).resolve().parent.parent
FHR = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "build" / "tools" / "fhr")
CONFIG = str(ROOT / "configs" / "default.json")


def trajectory(a):
    with tempfile.NamedTemporaryFile(suffix=".csv") as f:
        subprocess.run([FHR, "simulate", "-c", CONFIG, "-a", str(a), "-o", f.name], check=True)
        return pd.read_csv(f.name).to_numpy()


def branch_extremes(v, z, right):
    """z where each visit to a branch ends (max on the right, min on the left)."""
    on = v >= 0.2 if right else v <= -0.2
    edges = np.flatnonzero(np.diff(on.astype(int)))
    if on[0]:
        edges = edges[1:]  # start on a rising edge
    out = []
    for start, stop in zip(edges[::2] + 1, edges[1::2] + 1):
        seg = z[start:stop]
        if seg.size:
            out.append(seg.max() if right else seg.min())
    return np.array(out)


def main():
    simple = trajectory(0.7138)
    print(f"a=0.7138 mean w = {simple[:, 2].mean():.4f}")
    for a in (0.71385, 0.7165, 0.7175):
        tr = trajectory(a)
        v, z = tr[:, 1], tr[:, 3]
        tops = branch_extremes(v, z, right=True)
        bottoms = branch_extremes(v, z, right=False)
        print(f"a={a}: right-branch exit z quantiles (5,50,95%) "
              f"{np.percentile(tops, [5, 50, 95]).round(3)}; "
              f"left-branch exit z {np.percentile(bottoms, [5, 50, 95]).round(3)}")


if __name__ == "__main__":
    main()
