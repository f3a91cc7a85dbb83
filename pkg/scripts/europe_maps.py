"""Synthetic Europe run: 130 stations, full sweep, maps of several indicators.

    python3 scripts/europe_maps.py [--out runs/europe] [--stations 130] [--workers 1]

Writes climates to <out>/climate and results to <out>/results, then prints
the per-field station range and the share of grid nodes with data.
"""
import argparse
import time
from pathlib import Path

import numpy as np

from wallmap.cli import main as wallmap

FIELDS = ("pf_p", "pf_t", "best_pf_p", "best_d1", "best_mdot")


def read_asc(path: Path) -> np.ndarray:
    lines = path.read_text().splitlines()
    values = np.loadtxt(lines[6:], ndmin=2)
    return np.where(values == -9999, np.nan, values)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/europe")
    ap.add_argument("--stations", type=int, default=130)
    ap.add_argument("--workers", default="1")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    out = Path(args.out)
    common = ["--climate-dir", str(out / "climate"), "--output-dir", str(out / "results"), "--workers", args.workers]
    steps = [
        ["synth", str(args.stations), "--out", str(out / "climate"), "--seed", str(args.seed)],
        ["simulate", *common],
        ["sweep", *common],
        *(["map", "--field", f, *common] for f in FIELDS),
    ]
    for step in steps:
        start = time.perf_counter()
        if wallmap(step) != 0:
            raise SystemExit(f"step {step[0]} failed")
        print(f"  [{step[0]} {time.perf_counter() - start:.1f} s]")

    for f in FIELDS:
        grid = read_asc(out / "results" / "map" / f / "grid.asc")
        covered = np.isfinite(grid)
        print(f"{f:>10}: {np.nanmin(grid):8.4g} .. {np.nanmax(grid):8.4g}, {100 * covered.mean():.0f} % of nodes mapped")


if __name__ == "__main__":
    main()
