#!/usr/bin/env python3
"""Train the 100-to-5 hidden-pattern detectors and report selectivity."""
import argparse

import numpy as np

from nsat.zoo.pattern import PatternRun, PatternParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--blocks", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=21)
    args = ap.parse_args()
    run = PatternRun(PatternParams(seed=args.seed))
    frac0, hit0 = run.selectivity(40)
    print(f"before training: in-window fraction={np.round(frac0, 2)} hit rate={hit0:.2f}")
    run.run_blocks(args.blocks, learn=True)
    frac, hit = run.selectivity(80)
    print(f"after {args.blocks} blocks: in-window fraction={np.round(frac, 2)} hit rate={hit:.2f}")


if __name__ == "__main__":
    main()
