"""Siegel's unitarity property under Haar-random feedback, by block size.

    python scripts/siegel_trials.py --trials 1000 --seed 0
"""
import argparse

from tlnet.blockop import haar_unitary, partition, rng
from tlnet.mobius import check_siegel


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    gen = rng(args.seed)
    print("r  s  trials  skipped  max_deviation  max_singular_value")
    for r in range(1, 5):
        for s in range(1, 5):
            op = partition(haar_unitary(r + s, gen), (r, s))
            rep = check_siegel(op, 1, args.trials // 16, seed=args.seed + 10 * r + s)
            print(f"{r}  {s}  {rep.trials:6d}  {rep.skipped:7d}  {rep.max_deviation:13.3e}  {rep.max_singular_value:.15f}")


if __name__ == "__main__":
    main()
