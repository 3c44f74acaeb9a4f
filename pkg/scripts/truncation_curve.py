"""Truncation error of the welcher-weg path sum against its geometric bound.

For each loop gain q the network is R = 1/2, G1 = 1, G2 = e^{i phi} with
|cos(phi/2)| = q and M = 1. Output: CSV (q, N, error, bound, fitted rate).

    python scripts/truncation_curve.py --q 0.3 0.6 0.9 --max-loops 60
"""
import argparse
import csv
import sys

import numpy as np

from tlnet.paths import transfer_coefficients, truncation_curve
from tlnet.timeloop import gs_network


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--q", type=float, nargs="+", default=[0.3, 0.6, 0.9])
    ap.add_argument("--max-loops", type=int, default=60)
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    w.writerow(["q", "N", "error", "bound"])
    for q in args.q:
        phi = 2 * np.arccos(q)
        table = transfer_coefficients(gs_network(0.5, 1.0, np.exp(1j * phi), 1.0))
        curve = truncation_curve(table, args.max_loops)
        for n, err, bound in curve:
            w.writerow([q, n, f"{err:.6e}", f"{bound:.6e}"])
        # log-linear fit of the error on the range above rounding noise
        pts = [(n, np.log(e)) for n, e, _ in curve if e > 1e-13]
        if len(pts) > 2:
            slope = np.polyfit(*zip(*pts), 1)[0]
            print(f"# q={q}: fitted decay rate {np.exp(slope):.6f}", file=sys.stderr)


if __name__ == "__main__":
    main()
