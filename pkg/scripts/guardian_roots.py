"""Guardian-angel tuning: the closed-form detection function f vs the network's own amplitude.

For each tau_A, reports the root tau_B of f(x, y) = x - sqrt(1-x^2) y / (1-xy),
the branch-1 amplitude the network actually produces at that root, and the
tau_B that zeroes the network amplitude.

    python scripts/guardian_roots.py --points 9
"""
import argparse
import csv
import sys

import numpy as np

from tlnet.paradox import detection_amplitude, guardian_angel_solve, guardian_tune_network


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=9)
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    w.writerow(["tau_a", "tau_b_f_root", "amplitude_at_f_root", "tau_b_network", "amplitude_at_network_root"])
    for x in np.linspace(0.1, 0.9, args.points):
        y_f = guardian_angel_solve(x)
        y_n = guardian_tune_network(x)
        w.writerow([
            f"{x:.4f}", f"{y_f:.12f}", f"{abs(detection_amplitude(x, y_f)):.3e}",
            f"{y_n:.12f}", f"{abs(detection_amplitude(x, y_n)):.3e}",
        ])


if __name__ == "__main__":
    main()
