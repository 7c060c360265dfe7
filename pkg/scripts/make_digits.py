#!/usr/bin/env python3
"""Generate the bundled 28x28 digit IDX files (surrogate dataset)."""
import argparse

from nsat.zoo.datasets import make_surrogate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    ap.add_argument("--train-n", type=int, default=5000)
    ap.add_argument("--test-n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    paths = make_surrogate(args.out, args.train_n, args.test_n, args.seed)
    for part, (ip, lp) in paths.items():
        print(f"{part}: {ip} {lp}")


if __name__ == "__main__":
    main()
