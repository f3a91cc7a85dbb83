"""3x3 pipe depth / mass flow sweep on a Netherlands-like synthetic year.

Prints both indicator tables next to the published De Bilt values and the
RMS difference of the efficiency table.

    python3 scripts/netherlands_sweep.py [--k 0.4] [--a1 0.9]
"""
import argparse
import time

import numpy as np

from wallmap import SweepGrid, SyntheticProfile, best_config, default_params, generate_synthetic, run_sweep
from wallmap.sweep import format_tables

PUBLISHED_PF_P = np.array([[30.6, 24.7, 20.2], [39.0, 30.9, 25.2], [44.3, 34.8, 28.0]])
PUBLISHED_PF_T = np.array([[29.8, 26.5, 23.7], [33.1, 29.5, 26.5], [34.5, 30.9, 27.7]])

NL = SyntheticProfile(latitude=52.1, longitude=5.18, station_id="NL", station_name="Netherlands-like")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=float, default=None, help="wall conductivity [W/mK]")
    ap.add_argument("--a1", type=float, default=None, help="solar absorptance")
    args = ap.parse_args()

    params = default_params()
    if args.k is not None:
        params = params.replace(k=args.k)
    if args.a1 is not None:
        params = params.replace(a1=args.a1)

    climate = generate_synthetic(NL)
    start = time.perf_counter()
    result = run_sweep(params, SweepGrid(), climate)
    elapsed = time.perf_counter() - start

    print(format_tables(result))
    rms = float(np.sqrt(np.mean((result.pf_p - PUBLISHED_PF_P) ** 2)))
    print(f"published PF_p rows (MF 0.5, 1, 2 kg/min):\n{PUBLISHED_PF_P}")
    print(f"published PF_t rows:\n{PUBLISHED_PF_T}")
    print(f"RMS difference PF_p: {rms:.2f} points")
    best = best_config(result)
    print(f"best: d1={best.d1 * 1000:g} mm, mdot={best.mdot * 60:g} kg/min, PF_p={best.pf_p:.1f} %, PF_t={best.pf_t:.1f} %")
    print(f"sweep time {elapsed:.2f} s")


if __name__ == "__main__":
    main()
