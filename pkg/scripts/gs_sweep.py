"""Sweep the scalar two-beamsplitter loop over reflectivity and branch phase.

Writes CSV (R, phi, |S_fb|, arg S_fb, |pipeline - closed form|) to stdout.

    python scripts/gs_sweep.py --points 41 --phases 16 > gs_sweep.csv
"""
import argparse
import csv
import sys

import numpy as np

from tlnet.errors import IllPosedError
from tlnet.timeloop import gs_closed_form, gs_network, reduce_loop


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--phases", type=int, default=16)
    ap.add_argument("--loop-phase", type=float, default=0.3, help="phase of M (radians)")
    args = ap.parse_args()

    m = np.exp(1j * args.loop_phase)
    w = csv.writer(sys.stdout)
    w.writerow(["R", "phi", "abs_s_fb", "arg_s_fb", "closed_form_err"])
    worst = 0.0
    for R in np.linspace(0.0, 1.0, args.points):
        for phi in np.linspace(-np.pi, np.pi, args.phases, endpoint=False):
            g1, g2 = 1.0, np.exp(1j * phi)
            try:
                s = reduce_loop(gs_network(R, g1, g2, m))[0, 0]
                err = abs(s - gs_closed_form(R, g1, g2, m))
            except IllPosedError:
                continue
            worst = max(worst, err)
            w.writerow([f"{R:.6f}", f"{phi:.6f}", f"{abs(s):.17g}", f"{np.angle(s):.17g}", f"{err:.3e}"])
    print(f"# max closed-form deviation {worst:.3e}", file=sys.stderr)


if __name__ == "__main__":
    main()
