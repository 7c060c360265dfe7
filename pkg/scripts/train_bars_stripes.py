#!/usr/bin/env python3
"""Unsupervised bars-and-stripes training with shared symmetric weights."""
import argparse

import numpy as np

from nsat.zoo.erbm import ErbmRun, ErbmParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--target", type=int, default=2)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()
    run = ErbmRun(ErbmParams(seed=args.seed))
    hist = run.train(epochs=args.epochs, target=args.target, log=print)
    W = run.weight_matrix()
    print(f"best error {min(hist)}/32 after {len(hist)} epochs; "
          f"|W| mean {np.abs(W).mean():.1f}; symmetry exact: {run.symmetry_exact()}")


if __name__ == "__main__":
    main()
